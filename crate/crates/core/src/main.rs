use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wbnsim::config::{parse_config, read_config_file, ConfigSources, Preset};
use wbnsim::csv_out::{to_csv_bytes, write_csv};
use wbnsim::experiments::{run_with_threads, Experiment};
use wbnsim::Error;

/// Wireless blockchain network simulator.
#[derive(Debug, Parser)]
#[command(name = "wbnsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Communication complexity and spectrum requirement against N.
    Complexity,
    /// Minimum viable transmit power against node density.
    Viability,
    /// Raft rounds under a jammer across SIR thresholds.
    Jam,
    /// PBFT throughput and latency against the transmission interval.
    Interval,
    /// A single consensus round, traced slot by slot.
    Round,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat key=value config file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base seed; trial k uses seed + k.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Monte Carlo trials per parameter point.
    #[arg(long, global = true, value_name = "K")]
    trials: Option<u32>,
    /// Output CSV; side tables go next to it as <stem>_<table>.csv.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Named parameter bundle (fig2, fig3, fig4, fig5).
    #[arg(long, global = true, value_parser = parse_preset)]
    preset: Option<Preset>,
    /// Override one config key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse()
}

fn experiment(cmd: &Command) -> Experiment {
    match cmd {
        Command::Complexity => Experiment::Complexity,
        Command::Viability => Experiment::Viability,
        Command::Jam => Experiment::Jamming,
        Command::Interval => Experiment::Interval,
        Command::Round => Experiment::Round,
    }
}

/// Worker count from `WBNSIM_THREADS`, if set.
fn thread_cap() -> Result<Option<usize>, Error> {
    match std::env::var("WBNSIM_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::InvalidSpec(format!(
                "WBNSIM_THREADS must be a positive integer, got '{v}'"
            ))),
        },
    }
}

fn side_path(main: &Path, suffix: &str) -> PathBuf {
    let stem = main
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let ext = main
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    main.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn run(cli: Cli) -> Result<(), Error> {
    let file = cli
        .common
        .config
        .as_deref()
        .map(read_config_file)
        .transpose()?;
    let sources = ConfigSources {
        preset: cli.common.preset,
        file,
        sets: cli.common.sets,
        seed: cli.common.seed,
        trials: cli.common.trials,
        out: cli.common.out,
    };
    let config = parse_config(Some(experiment(&cli.command)), &sources)?;
    let output = run_with_threads(&config.spec, thread_cap()?)?;
    match &config.out {
        Some(path) => {
            // render everything first so a bad table leaves no files behind
            for (_, table) in &output.extras {
                to_csv_bytes(table)?;
            }
            write_csv(&output.main, path)?;
            for (suffix, table) in &output.extras {
                write_csv(table, &side_path(path, suffix))?;
            }
        }
        None => {
            let bytes = to_csv_bytes(&output.main)?;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&bytes)
                .and_then(|()| stdout.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = e.to_string().replace('\n', " ");
            eprintln!("wbnsim: {line}");
            ExitCode::FAILURE
        }
    }
}
