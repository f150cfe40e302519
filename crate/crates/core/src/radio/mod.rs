//! Node placement, log-distance propagation and link feasibility.
//!
//! Every link decision is a deterministic threshold test: the received
//! power must reach the receiver sensitivity and, when a jammer (or a
//! finite noise floor) is present, the signal-to-interference ratio must
//! reach the configured threshold. Both comparisons are inclusive.

mod flood;

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

pub use flood::{flood_reach, FloodResult};

/// Transmit power given to freshly placed nodes.
pub const DEFAULT_TX_POWER_DBM: f64 = 20.0;

/// Distances below this are clamped before taking the logarithm.
pub const MIN_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadioError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate distance: transmitter and receiver coincide at ({x}, {y})")]
    DegenerateDistance { x: f64, y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Leader,
    Replica,
    Miner,
    Client,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Fault {
    #[default]
    Honest,
    Crashed,
    Byzantine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub position: Point,
    pub tx_power_dbm: f64,
    pub role: Role,
    pub fault: Fault,
}

impl Node {
    pub fn is_honest(&self) -> bool {
        self.fault == Fault::Honest
    }

    pub fn is_crashed(&self) -> bool {
        self.fault == Fault::Crashed
    }
}

/// Nodes inside a disk of `coverage_radius` centred at the origin.
///
/// Node 0 is the leader and sits exactly at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub nodes: Vec<Node>,
    pub coverage_radius: f64,
    pub seed: u64,
}

impl Deployment {
    /// Builds a deployment from explicit positions. The first position
    /// becomes the leader; it is not required to be at the origin, which
    /// lets tests hand-construct small topologies.
    pub fn from_positions(positions: &[Point], tx_power_dbm: f64) -> Result<Self, RadioError> {
        if positions.is_empty() {
            return Err(RadioError::InvalidArgument(
                "deployment needs at least one node".into(),
            ));
        }
        let coverage_radius = positions
            .iter()
            .map(|p| p.norm_sq().sqrt())
            .fold(0.0_f64, f64::max);
        let nodes = positions
            .iter()
            .enumerate()
            .map(|(id, &position)| Node {
                id,
                position,
                tx_power_dbm,
                role: if id == 0 { Role::Leader } else { Role::Replica },
                fault: Fault::Honest,
            })
            .collect();
        Ok(Deployment {
            nodes,
            coverage_radius,
            seed: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leader(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn with_tx_power(mut self, tx_power_dbm: f64) -> Self {
        self.set_tx_power(tx_power_dbm);
        self
    }

    pub fn set_tx_power(&mut self, tx_power_dbm: f64) {
        for node in &mut self.nodes {
            node.tx_power_dbm = tx_power_dbm;
        }
    }

    /// Marks the highest-numbered nodes as faulty: the last `byzantine`
    /// nodes become Byzantine, the `crashed` nodes before them Crashed.
    /// The leader is only touched when the counts cover every node.
    pub fn mark_faults(&mut self, byzantine: usize, crashed: usize) {
        for (k, node) in self.nodes.iter_mut().rev().enumerate() {
            node.fault = if k < byzantine {
                Fault::Byzantine
            } else if k < byzantine + crashed {
                Fault::Crashed
            } else {
                Fault::Honest
            };
        }
    }

    /// Reassigns roles: every node is a miner under PoW, otherwise node 0
    /// leads and the rest replicate.
    pub fn assign_miner_roles(&mut self, miners: bool) {
        for node in &mut self.nodes {
            node.role = match (miners, node.id) {
                (true, _) => Role::Miner,
                (false, 0) => Role::Leader,
                (false, _) => Role::Replica,
            };
        }
    }

    pub fn honest_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_honest()).count()
    }
}

/// Places the leader at the origin and `n - 1` further nodes uniformly
/// over the disk of the given radius.
pub fn place_nodes(n: usize, radius: f64, seed: u64) -> Result<Deployment, RadioError> {
    if n == 0 {
        return Err(RadioError::InvalidArgument("n must be >= 1".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(RadioError::InvalidArgument(format!(
            "radius must be > 0 (got {radius})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::with_capacity(n);
    nodes.push(Node {
        id: 0,
        position: Point::ORIGIN,
        tx_power_dbm: DEFAULT_TX_POWER_DBM,
        role: Role::Leader,
        fault: Fault::Honest,
    });
    let r_sq = radius * radius;
    for id in 1..n {
        let u: f64 = rng.random();
        let w: f64 = rng.random();
        let r = radius * u.sqrt();
        let theta = 2.0 * PI * w;
        let mut position = Point::new(r * theta.cos(), r * theta.sin());
        // cos/sin rounding can push a point a few ulps past the rim
        if position.norm_sq() > r_sq {
            let scale = radius / position.norm_sq().sqrt();
            position = Point::new(position.x * scale, position.y * scale);
        }
        nodes.push(Node {
            id,
            position,
            tx_power_dbm: DEFAULT_TX_POWER_DBM,
            role: Role::Replica,
            fault: Fault::Honest,
        });
    }
    Ok(Deployment {
        nodes,
        coverage_radius: radius,
        seed,
    })
}

/// How the node count is derived when placing by density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DensityMode {
    /// `round(lambda * pi * R^2)`, so sweeps over lambda stay smooth.
    #[default]
    Rounded,
    /// A Poisson draw with that mean, from the same seeded stream.
    Poisson,
}

/// Node count for a density `lambda` (nodes per m^2) over a disk.
pub fn density_node_count(
    lambda: f64,
    radius: f64,
    seed: u64,
    mode: DensityMode,
) -> Result<usize, RadioError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(RadioError::InvalidArgument(format!(
            "lambda must be > 0 (got {lambda})"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(RadioError::InvalidArgument(format!(
            "radius must be > 0 (got {radius})"
        )));
    }
    let mean = lambda * PI * radius * radius;
    let n = match mode {
        DensityMode::Rounded => mean.round(),
        DensityMode::Poisson => {
            // distinct stream from the placement draw
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            let poisson = Poisson::new(mean)
                .map_err(|e| RadioError::InvalidArgument(format!("poisson mean {mean}: {e}")))?;
            poisson.sample(&mut rng)
        }
    };
    Ok((n as usize).max(1))
}

/// Density-driven placement: the leader plus enough nodes to match `lambda`.
pub fn place_nodes_with_density(
    lambda: f64,
    radius: f64,
    seed: u64,
    mode: DensityMode,
) -> Result<Deployment, RadioError> {
    let n = density_node_count(lambda, radius, seed, mode)?;
    place_nodes(n, radius, seed)
}

/// Log-distance propagation parameters plus detection thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub pathloss_exponent: f64,
    /// Loss at the 1 m reference distance, dB.
    pub reference_loss_db: f64,
    pub rx_sensitivity_dbm: f64,
    pub sir_threshold_db: f64,
    /// `-inf` means interference-limited operation.
    pub noise_floor_dbm: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            pathloss_exponent: 4.0,
            reference_loss_db: 0.0,
            rx_sensitivity_dbm: -84.5,
            sir_threshold_db: -10.0,
            noise_floor_dbm: f64::NEG_INFINITY,
        }
    }
}

impl ChannelParams {
    /// Every transmission is detected: infinite sensitivity, no noise.
    pub fn perfect() -> Self {
        ChannelParams {
            rx_sensitivity_dbm: f64::NEG_INFINITY,
            ..ChannelParams::default()
        }
    }

    pub fn validate(&self) -> Result<(), RadioError> {
        if !(self.pathloss_exponent > 0.0 && self.pathloss_exponent.is_finite()) {
            return Err(RadioError::InvalidArgument(
                "pathloss_exponent must be > 0".into(),
            ));
        }
        if !self.reference_loss_db.is_finite() {
            return Err(RadioError::InvalidArgument(
                "reference_loss must be finite".into(),
            ));
        }
        if self.rx_sensitivity_dbm.is_nan() || self.rx_sensitivity_dbm == f64::INFINITY {
            return Err(RadioError::InvalidArgument(
                "rx_sensitivity must be a number below +inf".into(),
            ));
        }
        if self.sir_threshold_db.is_nan() {
            return Err(RadioError::InvalidArgument(
                "sir_threshold must be a number".into(),
            ));
        }
        if self.noise_floor_dbm.is_nan() || self.noise_floor_dbm == f64::INFINITY {
            return Err(RadioError::InvalidArgument(
                "noise_floor must be a number below +inf".into(),
            ));
        }
        Ok(())
    }

    /// Loss in dB over `distance` metres, clamped at 1 m.
    pub fn pathloss_db(&self, distance: f64) -> f64 {
        self.reference_loss_db
            + 10.0 * self.pathloss_exponent * distance.max(MIN_DISTANCE_M).log10()
    }
}

/// A single interferer sharing the consensus band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jammer {
    pub position: Point,
    pub tx_power_dbm: f64,
    pub active: bool,
}

impl Jammer {
    /// Active jammer at `(R/2, 0)` transmitting at `tx_power_dbm`.
    pub fn default_for_radius(radius: f64, tx_power_dbm: f64) -> Self {
        Jammer {
            position: Point::new(radius / 2.0, 0.0),
            tx_power_dbm,
            active: true,
        }
    }

    /// Power this jammer lands at `rx`. A receiver sitting on the jammer
    /// sees unbounded interference.
    pub fn power_at(&self, rx: Point, ch: &ChannelParams) -> f64 {
        if !self.active {
            return f64::NEG_INFINITY;
        }
        if self.position == rx {
            return f64::INFINITY;
        }
        self.tx_power_dbm - ch.pathloss_db(self.position.distance(&rx))
    }
}

/// Received power in dBm from `tx` at `rx_position`; the distance is
/// clamped at 1 m.
pub fn received_power(tx: &Node, rx_position: Point, ch: &ChannelParams) -> f64 {
    tx.tx_power_dbm - ch.pathloss_db(tx.position.distance(&rx_position))
}

/// Like [`received_power`] but rejects coincident positions instead of
/// silently clamping them.
pub fn received_power_checked(
    tx: &Node,
    rx_position: Point,
    ch: &ChannelParams,
) -> Result<f64, RadioError> {
    if tx.position == rx_position {
        return Err(RadioError::DegenerateDistance {
            x: rx_position.x,
            y: rx_position.y,
        });
    }
    Ok(received_power(tx, rx_position, ch))
}

/// Total interference (jammer plus noise floor) at `rx`, dBm.
pub fn interference_at(rx: Point, ch: &ChannelParams, jam: Option<&Jammer>) -> f64 {
    let jam_dbm = jam.map_or(f64::NEG_INFINITY, |j| j.power_at(rx, ch));
    dbm_sum(jam_dbm, ch.noise_floor_dbm)
}

fn dbm_sum(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a == f64::INFINITY || b == f64::INFINITY {
        return f64::INFINITY;
    }
    let hi = a.max(b);
    let lo = a.min(b);
    hi + 10.0 * (1.0 + 10f64.powf((lo - hi) / 10.0)).log10()
}

/// Threshold test for a transmission from an arbitrary transmitter (used
/// for the client, which is not a consensus node).
pub fn signal_ok(
    tx_position: Point,
    tx_power_dbm: f64,
    rx_position: Point,
    ch: &ChannelParams,
    jam: Option<&Jammer>,
) -> bool {
    let signal = tx_power_dbm - ch.pathloss_db(tx_position.distance(&rx_position));
    if signal < ch.rx_sensitivity_dbm {
        return false;
    }
    let interference = interference_at(rx_position, ch, jam);
    if interference == f64::NEG_INFINITY {
        return true;
    }
    signal - interference >= ch.sir_threshold_db
}

/// Whether `rx` decodes a transmission from `tx`. Crashed transmitters
/// never get through.
pub fn link_ok(tx: &Node, rx: &Node, ch: &ChannelParams, jam: Option<&Jammer>) -> bool {
    if tx.is_crashed() {
        return false;
    }
    signal_ok(tx.position, tx.tx_power_dbm, rx.position, ch, jam)
}

/// Ids of every other node that decodes a broadcast from `tx`.
pub fn coverage_set(
    tx: &Node,
    deployment: &Deployment,
    ch: &ChannelParams,
    jam: Option<&Jammer>,
) -> BTreeSet<usize> {
    deployment
        .nodes
        .iter()
        .filter(|rx| rx.id != tx.id && link_ok(tx, rx, ch, jam))
        .map(|rx| rx.id)
        .collect()
}
