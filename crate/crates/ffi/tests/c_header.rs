//! The generated header must compile as C and as C++, and a C program
//! linked against the static library must run.

use std::path::{Path, PathBuf};
use std::process::Command;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "wbnsim.h"

int main(void) {
    WbnDeployment *dep = NULL;
    if (wbn_deployment_place(10, 100.0, 3, &dep) != WBN_STATUS_OK) return 1;
    WbnChannel ch = wbn_channel_perfect();
    WbnRoundSummary s;
    if (wbn_run_round(dep, &ch, NULL, WBN_MECHANISM_PBFT, 3, 0, &s) != WBN_STATUS_OK) return 2;
    wbn_deployment_free(dep);
    if (!s.success || s.tx_events != 21 || s.rx_events != 210) return 3;
    uint64_t c = 0;
    if (wbn_comm_complexity(WBN_MECHANISM_PBFT, 0xFFFFFFFFu, &c) != WBN_STATUS_INVALID_ARGUMENT) return 4;
    if (wbn_last_error() == NULL) return 5;
    printf("ok %s\n", wbn_version());
    return 0;
}
"#;

fn compiler(name: &str) -> Option<String> {
    Command::new(name)
        .arg("--version")
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|_| name.to_string())
}

fn static_lib() -> Option<PathBuf> {
    // tests/ binaries live in target/<profile>/deps
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libwbnsim_ffi.a");
    lib.exists().then_some(lib)
}

fn compile(cc: &str, lang: &str, src: &Path, extra: &[&str]) -> std::process::Output {
    Command::new(cc)
        .args(["-x", lang])
        .arg(src)
        .arg("-I")
        .arg(crate_dir().join("include"))
        .args(extra)
        .output()
        .expect("spawn compiler")
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let Some(cc) = compiler("cc") else {
        panic!("a C compiler is required for the header check");
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let c = compile(
        &cc,
        "c",
        &src,
        &["-std=c11", "-Wall", "-Werror", "-fsyntax-only"],
    );
    assert!(c.status.success(), "{}", String::from_utf8_lossy(&c.stderr));
    if let Some(cxx) = compiler("c++") {
        let out = compile(&cxx, "c++", &src, &["-Wall", "-Werror", "-fsyntax-only"]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn linked_c_program_runs() {
    let cc = compiler("cc").expect("a C compiler is required");
    let lib = static_lib().expect("libwbnsim_ffi.a next to the test binary");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    let bin = dir.path().join("probe");
    std::fs::write(&src, PROGRAM).unwrap();
    let out = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(
        String::from_utf8_lossy(&run.stdout).trim(),
        format!("ok {}", env!("CARGO_PKG_VERSION"))
    );
}
