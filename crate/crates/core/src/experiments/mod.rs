//! Seeded scenario runners. Each returns a [`SweepTable`] whose rows are
//! ordered by parameter point, then trial index, independent of how the
//! work was scheduled across threads.

mod complexity;
mod interval;
mod jamming;
mod round;
mod viability;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::consensus::{ByzantineBehavior, Mechanism};
use crate::radio::{
    place_nodes, place_nodes_with_density, ChannelParams, DensityMode, Deployment, Jammer, Point,
    DEFAULT_TX_POWER_DBM,
};
use crate::Error;

pub use complexity::run_complexity_sweep;
pub use interval::run_interval_sweep;
pub use jamming::run_jamming_experiment;
pub use round::run_round_trace;
pub use viability::run_viability_sweep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Complexity,
    Viability,
    Jamming,
    Interval,
    /// A single consensus round, dumped stage by stage.
    Round,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Complexity,
        Experiment::Viability,
        Experiment::Jamming,
        Experiment::Interval,
        Experiment::Round,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Complexity => "complexity",
            Experiment::Viability => "viability",
            Experiment::Jamming => "jam",
            Experiment::Interval => "interval",
            Experiment::Round => "round",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s || (s == "jamming" && *e == Experiment::Jamming))
            .ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

/// Fault budget for a viability row: fixed, or the largest PBFT tolerates
/// with `N = round(lambda * pi * r_max^2)` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultSpec {
    Fixed(u64),
    Auto,
}

impl fmt::Display for FaultSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultSpec::Fixed(v) => write!(f, "{v}"),
            FaultSpec::Auto => f.write_str("auto"),
        }
    }
}

impl FromStr for FaultSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(FaultSpec::Auto);
        }
        s.parse()
            .map(FaultSpec::Fixed)
            .map_err(|_| format!("expected a non-negative integer or 'auto', got '{s}'"))
    }
}

/// How each trial's deployment is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Exactly `nodes` nodes.
    Fixed,
    /// Node count from `density` over the disk.
    Density(DensityMode),
}

impl Placement {
    pub fn as_str(&self) -> &'static str {
        match self {
            Placement::Fixed => "fixed",
            Placement::Density(DensityMode::Rounded) => "density",
            Placement::Density(DensityMode::Poisson) => "poisson",
        }
    }
}

impl FromStr for Placement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed" => Ok(Placement::Fixed),
            "density" => Ok(Placement::Density(DensityMode::Rounded)),
            "poisson" => Ok(Placement::Density(DensityMode::Poisson)),
            _ => Err(format!("expected fixed, density or poisson, got '{s}'")),
        }
    }
}

/// Every parameter any runner reads. Runners ignore fields that do not
/// concern them, but all fields are echoed into the output metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub experiment: Experiment,
    pub trials: u32,
    pub base_seed: u64,

    // radio
    pub channel: ChannelParams,
    pub jammer: Jammer,
    pub tx_power_dbm: f64,
    pub nodes: usize,
    pub radius: f64,
    pub placement: Placement,
    pub density: f64,

    // complexity
    pub mechanisms: Vec<Mechanism>,
    pub n_min: u32,
    pub n_max: u32,

    // viability
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_points: usize,
    pub viability_faults: Vec<FaultSpec>,
    pub r_max: f64,

    // jamming
    pub sir_list: Vec<f64>,
    pub export_map: bool,

    // interval
    pub n_list: Vec<usize>,
    pub interval_faults: Vec<usize>,
    pub v_min: f64,
    pub v_max: f64,
    pub v_points: usize,
    pub tau: f64,
    pub block_txns: f64,

    // single round
    pub mechanism: Mechanism,
    pub fault_budget: usize,
    pub interval_s: f64,
    pub max_slots: u64,
    pub byzantine_nodes: usize,
    pub crashed_nodes: usize,
    pub byzantine_behavior: ByzantineBehavior,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            experiment: Experiment::Complexity,
            trials: 100,
            base_seed: 1,
            channel: ChannelParams {
                pathloss_exponent: 4.0,
                reference_loss_db: 0.0,
                rx_sensitivity_dbm: -84.5,
                sir_threshold_db: -10.0,
                noise_floor_dbm: f64::NEG_INFINITY,
            },
            jammer: Jammer {
                position: Point::new(50.0, 0.0),
                tx_power_dbm: DEFAULT_TX_POWER_DBM,
                active: false,
            },
            tx_power_dbm: DEFAULT_TX_POWER_DBM,
            nodes: 10,
            radius: 100.0,
            placement: Placement::Fixed,
            density: 0.01,
            mechanisms: Mechanism::ALL.to_vec(),
            n_min: 2,
            n_max: 100,
            lambda_min: 1e-4,
            lambda_max: 1e-1,
            lambda_points: 31,
            viability_faults: vec![
                FaultSpec::Fixed(100),
                FaultSpec::Fixed(1000),
                FaultSpec::Auto,
            ],
            r_max: 1000.0,
            sir_list: vec![-12.0, -10.0, -8.0, -6.0, -4.0],
            export_map: false,
            n_list: vec![10, 15],
            interval_faults: vec![1, 2, 3],
            v_min: 1e-2,
            v_max: 1e2,
            v_points: 201,
            tau: 1.0,
            block_txns: 1.0,
            mechanism: Mechanism::Pbft,
            fault_budget: 3,
            interval_s: 1.0,
            max_slots: u64::MAX,
            byzantine_nodes: 0,
            crashed_nodes: 0,
            byzantine_behavior: ByzantineBehavior::SilentDrop,
        }
    }
}

impl SweepSpec {
    /// Seed for trial `trial`: absolute, so trials can run in any order.
    pub fn trial_seed(&self, trial: u32) -> u64 {
        self.base_seed.wrapping_add(u64::from(trial))
    }

    /// Draws the deployment for one seed and applies the common power.
    pub fn deployment(&self, seed: u64) -> Result<Deployment, Error> {
        let mut dep = match self.placement {
            Placement::Fixed => place_nodes(self.nodes, self.radius, seed)?,
            Placement::Density(mode) => {
                place_nodes_with_density(self.density, self.radius, seed, mode)?
            }
        };
        dep.set_tx_power(self.tx_power_dbm);
        Ok(dep)
    }

    /// The jammer, if active.
    pub fn active_jammer(&self) -> Option<&Jammer> {
        self.jammer.active.then_some(&self.jammer)
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(i128::from(v))
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i128::from(v))
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Echoed as `# key=value` lines ahead of the header.
    pub metadata: Vec<(String, String)>,
}

impl SweepTable {
    pub fn new(header: &[&str], metadata: Vec<(String, String)>) -> Self {
        SweepTable {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            metadata,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn check_rectangular(&self) -> Result<(), Error> {
        match self.rows.iter().position(|r| r.len() != self.header.len()) {
            None => Ok(()),
            Some(i) => Err(Error::InvalidSpec(format!(
                "row {i} has {} cells, header has {}",
                self.rows[i].len(),
                self.header.len()
            ))),
        }
    }

    /// Index of the named column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// The main table plus any side tables, each tagged with the file-name
/// suffix it is written under (`<stem>_<suffix>.csv`).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub main: SweepTable,
    pub extras: Vec<(&'static str, SweepTable)>,
}

/// Runs whichever experiment `spec` selects.
pub fn run(spec: &SweepSpec) -> Result<ExperimentOutput, Error> {
    let single = |main| ExperimentOutput {
        main,
        extras: Vec::new(),
    };
    match spec.experiment {
        Experiment::Complexity => run_complexity_sweep(spec).map(single),
        Experiment::Viability => run_viability_sweep(spec).map(single),
        Experiment::Jamming => run_jamming_experiment(spec),
        Experiment::Interval => run_interval_sweep(spec),
        Experiment::Round => run_round_trace(spec),
    }
}

/// [`run`] on a dedicated pool of `threads` workers (all cores if `None`).
pub fn run_with_threads(
    spec: &SweepSpec,
    threads: Option<usize>,
) -> Result<ExperimentOutput, Error> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
    pool.install(|| run(spec))
}

/// `points` values evenly spaced in log10 between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, Error> {
    if !(lo > 0.0 && hi.is_finite() && lo.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "log grid bounds must be positive and finite (got {lo}..{hi})"
        )));
    }
    match points {
        0 => Err(Error::InvalidSpec(
            "log grid needs at least one point".into(),
        )),
        1 => Ok(vec![lo]),
        _ if hi <= lo => Err(Error::InvalidSpec(format!(
            "log grid upper bound {hi} must exceed lower bound {lo}"
        ))),
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            let step = (b - a) / (points - 1) as f64;
            Ok((0..points)
                .map(|i| match i {
                    0 => lo,
                    i if i == points - 1 => hi,
                    i => 10f64.powf(a + step * i as f64),
                })
                .collect())
        }
    }
}

/// Maps `f` over `items` in parallel, keeping input order in the output.
pub(crate) fn par_map_ordered<T, R, F>(items: &[T], f: F) -> Result<Vec<R>, Error>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R, Error> + Sync + Send,
{
    items.par_iter().map(f).collect()
}
