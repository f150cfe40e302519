use std::path::Path;
use std::process::{Command, Output};

fn wbnsim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wbnsim"))
        .args(args)
        .current_dir(cwd)
        .env("WBNSIM_THREADS", "2")
        .output()
        .expect("spawn wbnsim")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn complexity_matches_golden_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let o = wbnsim(
        &["complexity", "--set", "n_min=1", "--set", "n_max=12"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let golden = include_bytes!("fixtures/complexity_n1_12.csv");
    assert_eq!(o.stdout, golden.as_slice());
}

#[test]
fn out_writes_main_and_side_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = wbnsim(
        &[
            "jam",
            "--trials",
            "3",
            "--set",
            "nodes=30",
            "--set",
            "export_map=true",
            "--out",
            "fig4.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names, ["fig4.csv", "fig4_map.csv", "fig4_summary.csv"]);
    let main = std::fs::read_to_string(dir.path().join("fig4.csv")).unwrap();
    assert!(main.contains("# trials=3\n"));
    assert!(main.contains("# nodes=30\n"));
    assert!(main.starts_with("# build=wbnsim "));
}

#[test]
fn rejection_is_one_line_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let o = wbnsim(
        &[
            "viability",
            "--set",
            "pathloss_exponent=-1",
            "--out",
            "x.csv",
        ],
        dir.path(),
    );
    assert!(!o.status.success());
    let err = stderr(&o);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.contains("pathloss_exponent must be > 0"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn engine_error_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    // PBFT needs 3f+1 = 7 nodes
    let o = wbnsim(
        &[
            "round",
            "--set",
            "nodes=5",
            "--set",
            "fault_budget=2",
            "--out",
            "r.csv",
        ],
        dir.path(),
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("7"), "{}", stderr(&o));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "# small sweep\nn_min = 3\nn_max = 4\nmechanisms = raft\nseed = 9\n",
    )
    .unwrap();
    let o = wbnsim(
        &[
            "complexity",
            "--config",
            "run.cfg",
            "--set",
            "n_max=5",
            "--seed",
            "11",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("# seed=11\n"));
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        body,
        [
            "mechanism,n,complexity,spectrum",
            "raft,3,6,4",
            "raft,4,8,5",
            "raft,5,10,6"
        ]
    );
}

#[test]
fn unknown_key_and_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = wbnsim(&["interval", "--set", "gamma=2"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown key 'gamma'"));
    let o = wbnsim(&["interval", "--config", "missing.cfg"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("missing.cfg"));
    let o = wbnsim(&["interval", "--preset", "fig9"], dir.path());
    assert!(!o.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_wbnsim"))
        .args(["complexity"])
        .env("WBNSIM_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(stderr(&o).contains("WBNSIM_THREADS"));
}

#[test]
fn preset_applies_under_any_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let o = wbnsim(
        &[
            "round",
            "--preset",
            "fig4",
            "--set",
            "mechanism=raft",
            "--set",
            "fault_budget=1",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("# nodes=300\n"));
    assert!(text.contains("# pathloss_exponent=2.5\n"));
    assert!(text.contains("# jammer_active=true\n"));
}
