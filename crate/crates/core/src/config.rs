//! Flat `key=value` configuration.
//!
//! Values resolve in this order, later sources winning: per-experiment
//! defaults, `--preset`, the config file, `--set key=value`, then the
//! dedicated flags (`--seed`, `--trials`, `--out`). Unknown keys are
//! rejected; every resolved key is echoed into the output metadata.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::consensus::Mechanism;
use crate::experiments::{Experiment, FaultSpec, Placement, SweepSpec};
use crate::radio::{Point, DEFAULT_TX_POWER_DBM};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    /// `message` names the key and the violated constraint.
    #[error("{message}")]
    Invalid { key: String, message: String },
    #[error("line {line}: expected key=value, got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("--set expects key=value, got '{0}'")]
    SetSyntax(String),
    #[error("line {line}: duplicate key '{key}'")]
    Duplicate { line: usize, key: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl ConfigError {
    /// The offending key, where there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::UnknownKey(k) => Some(k),
            ConfigError::Invalid { key, .. } | ConfigError::Duplicate { key, .. } => Some(key),
            _ => None,
        }
    }
}

fn invalid(key: &str, message: impl Display) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: format!("{key} {message}"),
    }
}

/// Named parameter bundles, one per standard experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig2, Preset::Fig3, Preset::Fig4, Preset::Fig5];

    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        }
    }

    /// The preset that `experiment` starts from, if any.
    pub fn for_experiment(experiment: Experiment) -> Option<Preset> {
        match experiment {
            Experiment::Complexity => Some(Preset::Fig2),
            Experiment::Viability => Some(Preset::Fig3),
            Experiment::Jamming => Some(Preset::Fig4),
            Experiment::Interval => Some(Preset::Fig5),
            Experiment::Round => None,
        }
    }

    pub fn apply(&self, spec: &mut SweepSpec) {
        match self {
            Preset::Fig2 => {
                spec.mechanisms = Mechanism::ALL.to_vec();
                spec.n_min = 2;
                spec.n_max = 100;
            }
            Preset::Fig3 => {
                spec.channel.pathloss_exponent = 4.0;
                spec.channel.reference_loss_db = 0.0;
                spec.channel.rx_sensitivity_dbm = -84.5;
                spec.lambda_min = 1e-4;
                spec.lambda_max = 1e-1;
                spec.lambda_points = 31;
                spec.viability_faults = vec![
                    FaultSpec::Fixed(100),
                    FaultSpec::Fixed(1000),
                    FaultSpec::Auto,
                ];
                spec.r_max = 1000.0;
            }
            Preset::Fig4 => {
                spec.nodes = 300;
                spec.radius = 100.0;
                spec.placement = Placement::Fixed;
                spec.channel.pathloss_exponent = 2.5;
                spec.channel.reference_loss_db = 40.0;
                spec.channel.rx_sensitivity_dbm = -84.5;
                spec.channel.sir_threshold_db = -10.0;
                spec.tx_power_dbm = DEFAULT_TX_POWER_DBM;
                spec.jammer.position = Point::new(spec.radius / 2.0, 0.0);
                spec.jammer.tx_power_dbm = DEFAULT_TX_POWER_DBM;
                spec.jammer.active = true;
                spec.sir_list = vec![-12.0, -10.0, -8.0, -6.0, -4.0];
                spec.trials = 100;
            }
            Preset::Fig5 => {
                spec.n_list = vec![10, 15];
                spec.interval_faults = vec![1, 2, 3];
                spec.v_min = 1e-2;
                spec.v_max = 1e2;
                spec.v_points = 201;
                spec.tau = 1.0;
                spec.block_txns = 1.0;
            }
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown preset '{s}' (expected fig2, fig3, fig4 or fig5)"))
    }
}

/// Defaults for one experiment: the base values plus its preset.
pub fn defaults_for(experiment: Experiment) -> SweepSpec {
    let mut spec = SweepSpec {
        experiment,
        ..SweepSpec::default()
    };
    if let Some(preset) = Preset::for_experiment(experiment) {
        preset.apply(&mut spec);
    }
    spec
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: SweepSpec,
    pub out: Option<PathBuf>,
}

/// Everything [`parse_config`] merges, lowest precedence first.
#[derive(Debug, Clone, Default)]
pub struct ConfigSources {
    pub preset: Option<Preset>,
    /// Contents of a config file.
    pub file: Option<String>,
    /// `key=value` overrides.
    pub sets: Vec<String>,
    pub seed: Option<u64>,
    pub trials: Option<u32>,
    pub out: Option<PathBuf>,
}

pub fn read_config_file(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Splits config text into `(key, value)` pairs. Blank lines and lines
/// starting with `#` are skipped; a key may appear once.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = split_pair(line).ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: line.to_string(),
        })?;
        if !seen.insert(key.clone()) {
            return Err(ConfigError::Duplicate { line: i + 1, key });
        }
        pairs.push((key, value));
    }
    Ok(pairs)
}

fn split_pair(s: &str) -> Option<(String, String)> {
    let (k, v) = s.split_once('=')?;
    let k = k.trim();
    if k.is_empty() {
        return None;
    }
    Some((k.to_string(), v.trim().to_string()))
}

/// Resolves a run. `experiment` comes from the subcommand; when `None`
/// the config must name one with an `experiment` key.
pub fn parse_config(
    experiment: Option<Experiment>,
    sources: &ConfigSources,
) -> Result<RunConfig, ConfigError> {
    let file_pairs = match &sources.file {
        Some(text) => parse_pairs(text)?,
        None => Vec::new(),
    };
    let mut set_pairs = Vec::with_capacity(sources.sets.len());
    for s in &sources.sets {
        let pair = split_pair(s).ok_or_else(|| ConfigError::SetSyntax(s.clone()))?;
        set_pairs.push(pair);
    }

    let named = file_pairs
        .iter()
        .chain(&set_pairs)
        .filter(|(k, _)| k == "experiment")
        .map(|(_, v)| parse_value::<Experiment>("experiment", v))
        .next_back()
        .transpose()?;
    let experiment = match (experiment, named) {
        (Some(cmd), Some(file)) if cmd != file => {
            return Err(invalid(
                "experiment",
                format!("is '{file}' in the config but the command runs '{cmd}'"),
            ))
        }
        (Some(e), _) | (None, Some(e)) => e,
        (None, None) => return Err(invalid("experiment", "must be set")),
    };

    let mut spec = defaults_for(experiment);
    if let Some(preset) = sources.preset {
        preset.apply(&mut spec);
    }
    let mut out = None;
    for (key, value) in file_pairs.iter().chain(&set_pairs) {
        match key.as_str() {
            "experiment" => {}
            "out" => out = Some(PathBuf::from(value)),
            _ => apply_key(&mut spec, key, value)?,
        }
    }
    if let Some(seed) = sources.seed {
        spec.base_seed = seed;
    }
    if let Some(trials) = sources.trials {
        spec.trials = trials;
    }
    if sources.out.is_some() {
        out = sources.out.clone();
    }
    validate(&spec)?;
    Ok(RunConfig { spec, out })
}

/// Every key accepted besides `experiment` and `out`, in echo order.
pub const KEYS: &[&str] = &[
    "seed",
    "trials",
    "pathloss_exponent",
    "reference_loss_db",
    "rx_sensitivity_dbm",
    "sir_threshold_db",
    "noise_floor_dbm",
    "tx_power_dbm",
    "jammer_active",
    "jammer_x",
    "jammer_y",
    "jammer_power_dbm",
    "nodes",
    "radius",
    "placement",
    "density",
    "mechanisms",
    "n_min",
    "n_max",
    "lambda_min",
    "lambda_max",
    "lambda_points",
    "viability_f",
    "r_max",
    "sir_list",
    "export_map",
    "n_list",
    "interval_f",
    "v_min",
    "v_max",
    "v_points",
    "tau",
    "block_txns",
    "mechanism",
    "fault_budget",
    "interval_s",
    "max_slots",
    "byzantine_nodes",
    "crashed_nodes",
    "byzantine_behavior",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| invalid(key, format!("cannot take '{value}': {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: Display,
{
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|v| parse_value(key, v.trim()))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(invalid(
            key,
            format!("expects true or false, got '{value}'"),
        )),
    }
}

fn parse_slots(key: &str, value: &str) -> Result<u64, ConfigError> {
    match value {
        "unlimited" => Ok(u64::MAX),
        _ => parse_value(key, value),
    }
}

/// Sets one key on `spec`.
pub fn apply_key(spec: &mut SweepSpec, key: &str, value: &str) -> Result<(), ConfigError> {
    let ch = &mut spec.channel;
    match key {
        "seed" => spec.base_seed = parse_value(key, value)?,
        "trials" => spec.trials = parse_value(key, value)?,
        "pathloss_exponent" => ch.pathloss_exponent = parse_value(key, value)?,
        "reference_loss_db" => ch.reference_loss_db = parse_value(key, value)?,
        "rx_sensitivity_dbm" => ch.rx_sensitivity_dbm = parse_value(key, value)?,
        "sir_threshold_db" => ch.sir_threshold_db = parse_value(key, value)?,
        "noise_floor_dbm" => ch.noise_floor_dbm = parse_value(key, value)?,
        "tx_power_dbm" => spec.tx_power_dbm = parse_value(key, value)?,
        "jammer_active" => spec.jammer.active = parse_bool(key, value)?,
        "jammer_x" => spec.jammer.position.x = parse_value(key, value)?,
        "jammer_y" => spec.jammer.position.y = parse_value(key, value)?,
        "jammer_power_dbm" => spec.jammer.tx_power_dbm = parse_value(key, value)?,
        "nodes" => spec.nodes = parse_value(key, value)?,
        "radius" => spec.radius = parse_value(key, value)?,
        "placement" => spec.placement = parse_value(key, value)?,
        "density" => spec.density = parse_value(key, value)?,
        "mechanisms" => spec.mechanisms = parse_list(key, value)?,
        "n_min" => spec.n_min = parse_value(key, value)?,
        "n_max" => spec.n_max = parse_value(key, value)?,
        "lambda_min" => spec.lambda_min = parse_value(key, value)?,
        "lambda_max" => spec.lambda_max = parse_value(key, value)?,
        "lambda_points" => spec.lambda_points = parse_value(key, value)?,
        "viability_f" => spec.viability_faults = parse_list(key, value)?,
        "r_max" => spec.r_max = parse_value(key, value)?,
        "sir_list" => spec.sir_list = parse_list(key, value)?,
        "export_map" => spec.export_map = parse_bool(key, value)?,
        "n_list" => spec.n_list = parse_list(key, value)?,
        "interval_f" => spec.interval_faults = parse_list(key, value)?,
        "v_min" => spec.v_min = parse_value(key, value)?,
        "v_max" => spec.v_max = parse_value(key, value)?,
        "v_points" => spec.v_points = parse_value(key, value)?,
        "tau" => spec.tau = parse_value(key, value)?,
        "block_txns" => spec.block_txns = parse_value(key, value)?,
        "mechanism" => spec.mechanism = parse_value(key, value)?,
        "fault_budget" => spec.fault_budget = parse_value(key, value)?,
        "interval_s" => spec.interval_s = parse_value(key, value)?,
        "max_slots" => spec.max_slots = parse_slots(key, value)?,
        "byzantine_nodes" => spec.byzantine_nodes = parse_value(key, value)?,
        "crashed_nodes" => spec.crashed_nodes = parse_value(key, value)?,
        "byzantine_behavior" => spec.byzantine_behavior = parse_value(key, value)?,
        _ => return Err(ConfigError::UnknownKey(key.to_string())),
    }
    Ok(())
}

fn join<T: Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// The value of `key` as it would be written in a config file.
pub fn key_value(spec: &SweepSpec, key: &str) -> Option<String> {
    let ch = &spec.channel;
    Some(match key {
        "seed" => spec.base_seed.to_string(),
        "trials" => spec.trials.to_string(),
        "pathloss_exponent" => ch.pathloss_exponent.to_string(),
        "reference_loss_db" => ch.reference_loss_db.to_string(),
        "rx_sensitivity_dbm" => ch.rx_sensitivity_dbm.to_string(),
        "sir_threshold_db" => ch.sir_threshold_db.to_string(),
        "noise_floor_dbm" => ch.noise_floor_dbm.to_string(),
        "tx_power_dbm" => spec.tx_power_dbm.to_string(),
        "jammer_active" => spec.jammer.active.to_string(),
        "jammer_x" => spec.jammer.position.x.to_string(),
        "jammer_y" => spec.jammer.position.y.to_string(),
        "jammer_power_dbm" => spec.jammer.tx_power_dbm.to_string(),
        "nodes" => spec.nodes.to_string(),
        "radius" => spec.radius.to_string(),
        "placement" => spec.placement.as_str().to_string(),
        "density" => spec.density.to_string(),
        "mechanisms" => join(&spec.mechanisms),
        "n_min" => spec.n_min.to_string(),
        "n_max" => spec.n_max.to_string(),
        "lambda_min" => spec.lambda_min.to_string(),
        "lambda_max" => spec.lambda_max.to_string(),
        "lambda_points" => spec.lambda_points.to_string(),
        "viability_f" => join(&spec.viability_faults),
        "r_max" => spec.r_max.to_string(),
        "sir_list" => join(&spec.sir_list),
        "export_map" => spec.export_map.to_string(),
        "n_list" => join(&spec.n_list),
        "interval_f" => join(&spec.interval_faults),
        "v_min" => spec.v_min.to_string(),
        "v_max" => spec.v_max.to_string(),
        "v_points" => spec.v_points.to_string(),
        "tau" => spec.tau.to_string(),
        "block_txns" => spec.block_txns.to_string(),
        "mechanism" => spec.mechanism.to_string(),
        "fault_budget" => spec.fault_budget.to_string(),
        "interval_s" => spec.interval_s.to_string(),
        "max_slots" => match spec.max_slots {
            u64::MAX => "unlimited".to_string(),
            n => n.to_string(),
        },
        "byzantine_nodes" => spec.byzantine_nodes.to_string(),
        "crashed_nodes" => spec.crashed_nodes.to_string(),
        "byzantine_behavior" => spec.byzantine_behavior.as_str().to_string(),
        _ => return None,
    })
}

/// Build identifier written at the top of every output file.
pub fn build_id() -> String {
    format!("wbnsim {}", env!("CARGO_PKG_VERSION"))
}

impl SweepSpec {
    /// The metadata block: build id, experiment, then every key.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let mut meta = vec![
            ("build".to_string(), build_id()),
            ("experiment".to_string(), self.experiment.to_string()),
        ];
        meta.extend(
            KEYS.iter()
                .map(|k| (k.to_string(), key_value(self, k).expect("listed key"))),
        );
        meta
    }
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be > 0 (got {v})")))
    }
}

fn finite(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be finite (got {v})")))
    }
}

fn non_empty<T>(key: &str, v: &[T]) -> Result<(), ConfigError> {
    if v.is_empty() {
        Err(invalid(key, "must not be empty"))
    } else {
        Ok(())
    }
}

fn at_least(key: &str, v: u64, min: u64) -> Result<(), ConfigError> {
    if v >= min {
        Ok(())
    } else {
        Err(invalid(key, format!("must be >= {min} (got {v})")))
    }
}

/// Checks every field, naming the first offending key.
pub fn validate(spec: &SweepSpec) -> Result<(), ConfigError> {
    let ch = &spec.channel;
    positive("pathloss_exponent", ch.pathloss_exponent)?;
    finite("reference_loss_db", ch.reference_loss_db)?;
    if ch.rx_sensitivity_dbm.is_nan() || ch.rx_sensitivity_dbm == f64::INFINITY {
        return Err(invalid("rx_sensitivity_dbm", "must be finite or -inf"));
    }
    finite("sir_threshold_db", ch.sir_threshold_db)?;
    if ch.noise_floor_dbm.is_nan() || ch.noise_floor_dbm == f64::INFINITY {
        return Err(invalid("noise_floor_dbm", "must be finite or -inf"));
    }
    finite("tx_power_dbm", spec.tx_power_dbm)?;
    finite("jammer_x", spec.jammer.position.x)?;
    finite("jammer_y", spec.jammer.position.y)?;
    finite("jammer_power_dbm", spec.jammer.tx_power_dbm)?;
    at_least("trials", u64::from(spec.trials), 1)?;
    at_least("nodes", spec.nodes as u64, 1)?;
    positive("radius", spec.radius)?;
    positive("density", spec.density)?;
    non_empty("mechanisms", &spec.mechanisms)?;
    at_least("n_min", u64::from(spec.n_min), 1)?;
    at_least("n_max", u64::from(spec.n_max), u64::from(spec.n_min))?;
    positive("lambda_min", spec.lambda_min)?;
    positive("lambda_max", spec.lambda_max)?;
    at_least("lambda_points", spec.lambda_points as u64, 1)?;
    if spec.lambda_points > 1 && spec.lambda_max <= spec.lambda_min {
        return Err(invalid("lambda_max", "must exceed lambda_min"));
    }
    non_empty("viability_f", &spec.viability_faults)?;
    positive("r_max", spec.r_max)?;
    non_empty("sir_list", &spec.sir_list)?;
    for &s in &spec.sir_list {
        finite("sir_list", s)?;
    }
    non_empty("n_list", &spec.n_list)?;
    non_empty("interval_f", &spec.interval_faults)?;
    positive("v_min", spec.v_min)?;
    positive("v_max", spec.v_max)?;
    at_least("v_points", spec.v_points as u64, 1)?;
    if spec.v_points > 1 && spec.v_max <= spec.v_min {
        return Err(invalid("v_max", "must exceed v_min"));
    }
    positive("tau", spec.tau)?;
    positive("block_txns", spec.block_txns)?;
    positive("interval_s", spec.interval_s)?;
    at_least("max_slots", spec.max_slots, 1)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::ByzantineBehavior;

    fn sources(file: &str) -> ConfigSources {
        ConfigSources {
            file: Some(file.to_string()),
            ..ConfigSources::default()
        }
    }

    #[test]
    fn empty_file_gives_defaults() {
        for e in Experiment::ALL {
            let cfg = parse_config(Some(e), &sources("")).unwrap();
            assert_eq!(cfg.spec, defaults_for(e));
            assert_eq!(cfg.out, None);
        }
    }

    #[test]
    fn negative_exponent_rejected() {
        let err =
            parse_config(Some(Experiment::Jamming), &sources("pathloss_exponent=-1")).unwrap_err();
        assert!(
            err.to_string().contains("pathloss_exponent must be > 0"),
            "{err}"
        );
        assert_eq!(err.key(), Some("pathloss_exponent"));
    }

    #[test]
    fn unknown_and_malformed_keys() {
        let err = parse_config(Some(Experiment::Complexity), &sources("gamma=3")).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey(ref k) if k == "gamma"));
        let err = parse_config(Some(Experiment::Complexity), &sources("n_min=two")).unwrap_err();
        assert_eq!(err.key(), Some("n_min"));
        let err = parse_config(Some(Experiment::Complexity), &sources("n_min")).unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }));
        let err =
            parse_config(Some(Experiment::Complexity), &sources("trials=3\ntrials=4")).unwrap_err();
        assert!(matches!(err, ConfigError::Duplicate { line: 2, .. }));
    }

    #[test]
    fn fig4_preset() {
        let src = ConfigSources {
            preset: Some(Preset::Fig4),
            ..ConfigSources::default()
        };
        let spec = parse_config(Some(Experiment::Round), &src).unwrap().spec;
        assert_eq!(spec.nodes, 300);
        assert_eq!(spec.radius, 100.0);
        assert_eq!(spec.channel.pathloss_exponent, 2.5);
        assert_eq!(spec.tx_power_dbm, spec.jammer.tx_power_dbm);
        assert_eq!(spec.jammer.position, Point::new(50.0, 0.0));
        assert!(spec.jammer.active);
    }

    #[test]
    fn precedence() {
        let src = ConfigSources {
            preset: Some(Preset::Fig4),
            file: Some("nodes=50\ntrials=7\nseed=3\nout=a.csv".into()),
            sets: vec!["nodes=60".into(), "seed=4".into()],
            seed: Some(5),
            trials: None,
            out: Some("b.csv".into()),
        };
        let cfg = parse_config(Some(Experiment::Jamming), &src).unwrap();
        assert_eq!(cfg.spec.nodes, 60);
        assert_eq!(cfg.spec.trials, 7);
        assert_eq!(cfg.spec.base_seed, 5);
        assert_eq!(cfg.out, Some(PathBuf::from("b.csv")));
    }

    #[test]
    fn experiment_key() {
        let cfg = parse_config(None, &sources("experiment=interval")).unwrap();
        assert_eq!(cfg.spec.experiment, Experiment::Interval);
        assert!(parse_config(None, &sources("")).is_err());
        let err =
            parse_config(Some(Experiment::Complexity), &sources("experiment=jam")).unwrap_err();
        assert_eq!(err.key(), Some("experiment"));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# comment\n\n  nodes = 12 \n";
        let cfg = parse_config(Some(Experiment::Round), &sources(text)).unwrap();
        assert_eq!(cfg.spec.nodes, 12);
    }

    #[test]
    fn echo_round_trips() {
        let mut spec = defaults_for(Experiment::Jamming);
        spec.channel.rx_sensitivity_dbm = f64::NEG_INFINITY;
        spec.lambda_min = 1.234_567_890_123e-7;
        spec.max_slots = 99;
        spec.viability_faults = vec![FaultSpec::Auto, FaultSpec::Fixed(3)];
        let text: String = spec
            .metadata()
            .into_iter()
            .filter(|(k, _)| k != "build")
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        let back = parse_config(None, &sources(&text)).unwrap().spec;
        assert_eq!(back, spec);
    }

    #[test]
    fn every_key_settable_and_echoed() {
        let spec = SweepSpec::default();
        for key in KEYS {
            let value = key_value(&spec, key).unwrap();
            let mut copy = spec.clone();
            apply_key(&mut copy, key, &value).unwrap();
            assert_eq!(copy, spec, "{key}");
        }
    }

    #[test]
    fn list_values() {
        let cfg = parse_config(
            Some(Experiment::Viability),
            &sources("viability_f=1, auto\nmechanisms=raft,pow\nsir_list=-3.5"),
        )
        .unwrap();
        assert_eq!(
            cfg.spec.viability_faults,
            vec![FaultSpec::Fixed(1), FaultSpec::Auto]
        );
        assert_eq!(cfg.spec.mechanisms, vec![Mechanism::Raft, Mechanism::Pow]);
        assert_eq!(cfg.spec.sir_list, vec![-3.5]);
        let err = parse_config(Some(Experiment::Viability), &sources("n_list=")).unwrap_err();
        assert!(err.to_string().contains("n_list must not be empty"));
    }

    #[test]
    fn unlimited_slots() {
        let cfg = parse_config(Some(Experiment::Round), &sources("max_slots=unlimited")).unwrap();
        assert_eq!(cfg.spec.max_slots, u64::MAX);
        let behavior: ByzantineBehavior = "conflicting_vote".parse().unwrap();
        let cfg = parse_config(
            Some(Experiment::Round),
            &sources("byzantine_behavior=conflicting_vote"),
        )
        .unwrap();
        assert_eq!(cfg.spec.byzantine_behavior, behavior);
    }
}
