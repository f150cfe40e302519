//! Slotted, message-level consensus rounds for PBFT, Raft and PoW.
//!
//! A round runs through client request, consensus, state replication and
//! the reply to the client. Every transmission takes one slot of length
//! `interval_s` on a single shared channel; one broadcast is one
//! transmission that reaches every receiver whose link succeeds in that
//! slot.
//!
//! `tx_events` / `rx_events` tally only the stages that make up each
//! mechanism's communication cost (see [`Stage::is_tallied`]), and the
//! sender of a broadcast counts as one of its receivers. With a perfect
//! channel this reproduces the closed forms in [`crate::analytics`]
//! exactly. `slots_elapsed` counts every slot of the round.

mod pbft;
mod pow;
mod raft;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analytics::spectrum_requirement;
use crate::radio::{link_ok, signal_ok, ChannelParams, Deployment, Fault, Jammer, RadioError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConsensusError {
    #[error("config mismatch: {mechanism} with f={fault_budget} needs at least {required} nodes, deployment has {nodes}")]
    ConfigMismatch {
        mechanism: Mechanism,
        fault_budget: usize,
        required: usize,
        nodes: usize,
    },
    #[error("invalid consensus config: {0}")]
    InvalidConfig(String),
    #[error("no miner received the client request")]
    NoMinerReached,
    #[error(transparent)]
    Radio(#[from] RadioError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mechanism {
    Pbft,
    Raft,
    Pow,
}

impl Mechanism {
    pub const ALL: [Mechanism; 3] = [Mechanism::Pbft, Mechanism::Raft, Mechanism::Pow];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mechanism::Pbft => "pbft",
            Mechanism::Raft => "raft",
            Mechanism::Pow => "pow",
        }
    }

    /// Smallest deployment tolerating `f` faults.
    pub fn min_nodes(&self, f: usize) -> usize {
        match self {
            Mechanism::Pbft => 3 * f + 1,
            Mechanism::Raft | Mechanism::Pow => 2 * f + 1,
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mechanism {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pbft" => Ok(Mechanism::Pbft),
            "raft" => Ok(Mechanism::Raft),
            "pow" => Ok(Mechanism::Pow),
            other => Err(format!(
                "unknown mechanism '{other}' (expected pbft, raft or pow)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ByzantineBehavior {
    /// Byzantine nodes never transmit.
    #[default]
    SilentDrop,
    /// Byzantine nodes transmit, but their messages never count.
    ConflictingVote,
}

impl ByzantineBehavior {
    pub fn as_str(&self) -> &'static str {
        match self {
            ByzantineBehavior::SilentDrop => "silent_drop",
            ByzantineBehavior::ConflictingVote => "conflicting_vote",
        }
    }
}

impl FromStr for ByzantineBehavior {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "silent_drop" | "silentdrop" => Ok(ByzantineBehavior::SilentDrop),
            "conflicting_vote" | "conflictingvote" => Ok(ByzantineBehavior::ConflictingVote),
            other => Err(format!(
                "unknown byzantine behavior '{other}' (expected silent_drop or conflicting_vote)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusConfig {
    pub mechanism: Mechanism,
    pub fault_budget: usize,
    /// Slot length in seconds.
    pub interval_s: f64,
    pub max_slots_timeout: u64,
    pub byzantine_behavior: ByzantineBehavior,
}

impl ConsensusConfig {
    pub fn new(mechanism: Mechanism, fault_budget: usize) -> Self {
        ConsensusConfig {
            mechanism,
            fault_budget,
            interval_s: 1.0,
            max_slots_timeout: u64::MAX,
            byzantine_behavior: ByzantineBehavior::SilentDrop,
        }
    }

    pub fn with_byzantine_behavior(mut self, behavior: ByzantineBehavior) -> Self {
        self.byzantine_behavior = behavior;
        self
    }

    pub fn with_timeout(mut self, max_slots: u64) -> Self {
        self.max_slots_timeout = max_slots;
        self
    }

    pub fn with_interval(mut self, interval_s: f64) -> Self {
        self.interval_s = interval_s;
        self
    }

    /// Checks the config against a deployment of `nodes` nodes.
    pub fn validate(&self, nodes: usize) -> Result<(), ConsensusError> {
        if !(self.interval_s > 0.0 && self.interval_s.is_finite()) {
            return Err(ConsensusError::InvalidConfig(format!(
                "interval must be > 0 (got {})",
                self.interval_s
            )));
        }
        let required = self.mechanism.min_nodes(self.fault_budget);
        if nodes < required {
            return Err(ConsensusError::ConfigMismatch {
                mechanism: self.mechanism,
                fault_budget: self.fault_budget,
                required,
                nodes,
            });
        }
        let slots = spectrum_requirement(self.mechanism, u32::try_from(nodes).unwrap_or(u32::MAX));
        if u128::from(self.max_slots_timeout) < slots {
            return Err(ConsensusError::InvalidConfig(format!(
                "max_slots {} is below the {} slots a {} round needs",
                self.max_slots_timeout, slots, self.mechanism
            )));
        }
        Ok(())
    }
}

/// Round stages, in the order they can occur.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Request,
    PrePrepare,
    Prepare,
    Commit,
    /// Raft downlink: leader to followers.
    AppendEntries,
    /// Raft uplink: follower acknowledgement.
    Ack,
    /// PoW: a miner relays the client transaction.
    TxRelay,
    /// PoW: the winning miner broadcasts its block.
    Block,
    /// PBFT/Raft: leader distributes the committed block.
    Replication,
    Reply,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Request => "request",
            Stage::PrePrepare => "pre_prepare",
            Stage::Prepare => "prepare",
            Stage::Commit => "commit",
            Stage::AppendEntries => "append_entries",
            Stage::Ack => "ack",
            Stage::TxRelay => "tx_relay",
            Stage::Block => "block",
            Stage::Replication => "replication",
            Stage::Reply => "reply",
        }
    }

    /// Whether transmissions in this stage count towards the tx/rx tallies.
    pub fn is_tallied(&self, mechanism: Mechanism) -> bool {
        match mechanism {
            Mechanism::Pbft => matches!(self, Stage::PrePrepare | Stage::Prepare | Stage::Commit),
            Mechanism::Raft => matches!(self, Stage::Request | Stage::AppendEntries | Stage::Ack),
            Mechanism::Pow => matches!(self, Stage::TxRelay | Stage::Block),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    Client,
    Node(usize),
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Client => f.write_str("client"),
            Endpoint::Node(id) => write!(f, "{id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub stage: Stage,
    pub slot: u64,
    pub sender: Endpoint,
    pub recipients: Vec<Endpoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundResult {
    pub mechanism: Mechanism,
    pub success: bool,
    /// Honest nodes that confirmed the transaction.
    pub confirming_nodes: usize,
    pub tx_events: u64,
    pub rx_events: u64,
    pub slots_elapsed: u64,
    pub elapsed_s: f64,
    pub timed_out: bool,
    /// Leader for PBFT/Raft, winning miner for PoW.
    pub proposer: Option<usize>,
    /// Per node id: did this honest node confirm?
    pub confirmed: Vec<bool>,
    pub stage_trace: Vec<TraceEntry>,
}

/// Decides, transmission by transmission, which receptions succeed.
pub trait LinkModel {
    /// Does node `to` decode a transmission from `from`?
    fn delivers(&mut self, from: Endpoint, to: usize) -> bool;
    /// Does the client decode a transmission from node `from`?
    fn delivers_to_client(&mut self, from: usize) -> bool;
}

/// Links decided by the radio model. The client sits with node 0 and
/// transmits at node 0's power.
pub struct RadioLinks<'a> {
    deployment: &'a Deployment,
    ch: &'a ChannelParams,
    jam: Option<&'a Jammer>,
}

impl<'a> RadioLinks<'a> {
    pub fn new(deployment: &'a Deployment, ch: &'a ChannelParams, jam: Option<&'a Jammer>) -> Self {
        RadioLinks {
            deployment,
            ch,
            jam,
        }
    }
}

impl LinkModel for RadioLinks<'_> {
    fn delivers(&mut self, from: Endpoint, to: usize) -> bool {
        let rx = &self.deployment.nodes[to];
        match from {
            Endpoint::Node(id) => link_ok(&self.deployment.nodes[id], rx, self.ch, self.jam),
            Endpoint::Client => {
                let anchor = self.deployment.leader();
                signal_ok(
                    anchor.position,
                    anchor.tx_power_dbm,
                    rx.position,
                    self.ch,
                    self.jam,
                )
            }
        }
    }

    fn delivers_to_client(&mut self, from: usize) -> bool {
        let tx = &self.deployment.nodes[from];
        if tx.is_crashed() {
            return false;
        }
        let client = self.deployment.leader().position;
        signal_ok(tx.position, tx.tx_power_dbm, client, self.ch, self.jam)
    }
}

/// Independent Bernoulli(p) link for every node-to-node reception;
/// client links always succeed.
pub struct BernoulliLinks {
    p: f64,
    rng: ChaCha8Rng,
}

impl BernoulliLinks {
    pub fn new(p: f64, seed: u64) -> Self {
        BernoulliLinks {
            p: p.clamp(0.0, 1.0),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl LinkModel for BernoulliLinks {
    fn delivers(&mut self, from: Endpoint, _to: usize) -> bool {
        match from {
            Endpoint::Client => true,
            Endpoint::Node(_) => self.rng.random::<f64>() < self.p,
        }
    }

    fn delivers_to_client(&mut self, _from: usize) -> bool {
        true
    }
}

/// Minimum confirmations for a round to commit.
pub fn quorum(mechanism: Mechanism, f: usize, n: usize) -> Result<usize, ConsensusError> {
    let required = mechanism.min_nodes(f);
    if n == 0 || n < required {
        return Err(ConsensusError::ConfigMismatch {
            mechanism,
            fault_budget: f,
            required,
            nodes: n,
        });
    }
    Ok(match mechanism {
        Mechanism::Pbft => 2 * f + 1,
        Mechanism::Raft | Mechanism::Pow => n / 2 + 1,
    })
}

/// Runs one round of `cfg.mechanism` over the radio model.
pub fn run_round(
    deployment: &Deployment,
    ch: &ChannelParams,
    cfg: &ConsensusConfig,
    jam: Option<&Jammer>,
    seed: u64,
) -> Result<RoundResult, ConsensusError> {
    ch.validate()?;
    let mut links = RadioLinks::new(deployment, ch, jam);
    run_round_with_links(deployment, cfg, &mut links, seed)
}

/// Runs one round with an arbitrary link model.
pub fn run_round_with_links(
    deployment: &Deployment,
    cfg: &ConsensusConfig,
    links: &mut dyn LinkModel,
    seed: u64,
) -> Result<RoundResult, ConsensusError> {
    if deployment.is_empty() {
        return Err(ConsensusError::InvalidConfig("deployment is empty".into()));
    }
    cfg.validate(deployment.len())?;
    let quorum = quorum(cfg.mechanism, cfg.fault_budget, deployment.len())?;
    let mut round = Round::new(deployment, cfg);
    let outcome = match cfg.mechanism {
        Mechanism::Pbft => pbft::execute(&mut round, links, quorum),
        Mechanism::Raft => raft::execute(&mut round, links, quorum),
        Mechanism::Pow => pow::execute(&mut round, links, quorum, seed),
    };
    match outcome {
        Ok(()) => Ok(round.finish(false)),
        Err(Interrupt::TimedOut) => Ok(round.finish(true)),
        Err(Interrupt::Failed(e)) => Err(e),
    }
}

pub fn run_pbft(
    deployment: &Deployment,
    ch: &ChannelParams,
    cfg: &ConsensusConfig,
    jam: Option<&Jammer>,
    seed: u64,
) -> Result<RoundResult, ConsensusError> {
    let cfg = ConsensusConfig {
        mechanism: Mechanism::Pbft,
        ..*cfg
    };
    run_round(deployment, ch, &cfg, jam, seed)
}

pub fn run_raft(
    deployment: &Deployment,
    ch: &ChannelParams,
    cfg: &ConsensusConfig,
    jam: Option<&Jammer>,
    seed: u64,
) -> Result<RoundResult, ConsensusError> {
    let cfg = ConsensusConfig {
        mechanism: Mechanism::Raft,
        ..*cfg
    };
    run_round(deployment, ch, &cfg, jam, seed)
}

pub fn run_pow(
    deployment: &Deployment,
    ch: &ChannelParams,
    cfg: &ConsensusConfig,
    jam: Option<&Jammer>,
    seed: u64,
) -> Result<RoundResult, ConsensusError> {
    let cfg = ConsensusConfig {
        mechanism: Mechanism::Pow,
        ..*cfg
    };
    run_round(deployment, ch, &cfg, jam, seed)
}

enum Interrupt {
    TimedOut,
    Failed(ConsensusError),
}

impl From<ConsensusError> for Interrupt {
    fn from(e: ConsensusError) -> Self {
        Interrupt::Failed(e)
    }
}

type Step<T> = Result<T, Interrupt>;

/// Slot clock, counters and trace shared by the engines.
struct Round<'a> {
    deployment: &'a Deployment,
    cfg: &'a ConsensusConfig,
    next_slot: u64,
    tx_events: u64,
    rx_events: u64,
    trace: Vec<TraceEntry>,
    confirmed: Vec<bool>,
    proposer: Option<usize>,
}

impl<'a> Round<'a> {
    fn new(deployment: &'a Deployment, cfg: &'a ConsensusConfig) -> Self {
        Round {
            deployment,
            cfg,
            next_slot: 0,
            tx_events: 0,
            rx_events: 0,
            trace: Vec::new(),
            confirmed: vec![false; deployment.len()],
            proposer: None,
        }
    }

    fn n(&self) -> usize {
        self.deployment.len()
    }

    fn fault(&self, id: usize) -> Fault {
        self.deployment.nodes[id].fault
    }

    /// Will node `id` put anything on the air?
    fn transmits(&self, id: usize) -> bool {
        match self.fault(id) {
            Fault::Honest => true,
            Fault::Crashed => false,
            Fault::Byzantine => self.cfg.byzantine_behavior == ByzantineBehavior::ConflictingVote,
        }
    }

    fn claim_slot(&mut self) -> Step<u64> {
        if self.next_slot >= self.cfg.max_slots_timeout {
            return Err(Interrupt::TimedOut);
        }
        let slot = self.next_slot;
        self.next_slot += 1;
        Ok(slot)
    }

    /// One broadcast slot; returns the nodes that decoded it, ascending.
    /// Crashed nodes receive nothing.
    fn broadcast(
        &mut self,
        stage: Stage,
        from: Endpoint,
        links: &mut dyn LinkModel,
    ) -> Step<Vec<usize>> {
        let slot = self.claim_slot()?;
        let mut delivered = Vec::new();
        for rx in &self.deployment.nodes {
            if Endpoint::Node(rx.id) == from || rx.is_crashed() {
                continue;
            }
            if links.delivers(from, rx.id) {
                delivered.push(rx.id);
            }
        }
        if stage.is_tallied(self.cfg.mechanism) {
            self.tx_events += 1;
            let own_copy = u64::from(matches!(from, Endpoint::Node(_)));
            self.rx_events += delivered.len() as u64 + own_copy;
        }
        self.trace.push(TraceEntry {
            stage,
            slot,
            sender: from,
            recipients: delivered.iter().map(|&id| Endpoint::Node(id)).collect(),
        });
        Ok(delivered)
    }

    /// One unicast slot; returns whether the receiver decoded it.
    fn unicast(
        &mut self,
        stage: Stage,
        from: Endpoint,
        to: Endpoint,
        links: &mut dyn LinkModel,
    ) -> Step<bool> {
        let slot = self.claim_slot()?;
        let ok = match (from, to) {
            (Endpoint::Node(id), Endpoint::Client) => links.delivers_to_client(id),
            (_, Endpoint::Node(id)) => {
                !self.deployment.nodes[id].is_crashed() && links.delivers(from, id)
            }
            (Endpoint::Client, Endpoint::Client) => true,
        };
        if stage.is_tallied(self.cfg.mechanism) {
            self.tx_events += 1;
            self.rx_events += u64::from(ok);
        }
        self.trace.push(TraceEntry {
            stage,
            slot,
            sender: from,
            recipients: if ok { vec![to] } else { Vec::new() },
        });
        Ok(ok)
    }

    fn confirming(&self) -> usize {
        self.confirmed.iter().filter(|&&c| c).count()
    }

    fn finish(self, timed_out: bool) -> RoundResult {
        let confirming_nodes = self.confirming();
        let quorum = quorum(self.cfg.mechanism, self.cfg.fault_budget, self.n())
            .expect("validated before the round started");
        RoundResult {
            mechanism: self.cfg.mechanism,
            success: !timed_out && confirming_nodes >= quorum,
            confirming_nodes,
            tx_events: self.tx_events,
            rx_events: self.rx_events,
            slots_elapsed: self.next_slot,
            elapsed_s: self.next_slot as f64 * self.cfg.interval_s,
            timed_out,
            proposer: self.proposer,
            confirmed: self.confirmed,
            stage_trace: self.trace,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::place_nodes;

    #[test]
    fn quorum_examples() {
        assert_eq!(quorum(Mechanism::Pbft, 1, 4).unwrap(), 3);
        assert_eq!(quorum(Mechanism::Raft, 0, 1).unwrap(), 1);
        assert_eq!(quorum(Mechanism::Raft, 2, 5).unwrap(), 3);
        assert_eq!(quorum(Mechanism::Pow, 0, 10).unwrap(), 6);
        assert!(matches!(
            quorum(Mechanism::Pbft, 2, 6),
            Err(ConsensusError::ConfigMismatch { required: 7, .. })
        ));
        assert!(quorum(Mechanism::Raft, 0, 0).is_err());
    }

    #[test]
    fn config_rejects_short_timeout_and_bad_interval() {
        let cfg = ConsensusConfig::new(Mechanism::Pbft, 1).with_timeout(8);
        assert!(matches!(
            cfg.validate(4),
            Err(ConsensusError::InvalidConfig(_))
        ));
        assert!(cfg.with_timeout(9).validate(4).is_ok());
        let cfg = ConsensusConfig::new(Mechanism::Raft, 0).with_interval(0.0);
        assert!(matches!(
            cfg.validate(4),
            Err(ConsensusError::InvalidConfig(_))
        ));
    }

    #[test]
    fn round_rejects_undersized_deployment() {
        let d = place_nodes(9, 50.0, 1).unwrap();
        let cfg = ConsensusConfig::new(Mechanism::Pbft, 3);
        let err = run_round(&d, &ChannelParams::perfect(), &cfg, None, 0).unwrap_err();
        assert!(matches!(
            err,
            ConsensusError::ConfigMismatch {
                required: 10,
                nodes: 9,
                ..
            }
        ));
    }

    #[test]
    fn timeout_returns_partial_trace() {
        let d = place_nodes(4, 50.0, 1).unwrap();
        let cfg = ConsensusConfig::new(Mechanism::Pbft, 1).with_timeout(9);
        let r = run_round(&d, &ChannelParams::perfect(), &cfg, None, 0).unwrap();
        // request + pre-prepare + 4 prepares + 3 commits fit, the 4th commit does not
        assert!(r.timed_out);
        assert!(!r.success);
        assert_eq!(r.slots_elapsed, 9);
        assert_eq!(r.stage_trace.len(), 9);
    }

    #[test]
    fn parse_names() {
        assert_eq!("PBFT".parse::<Mechanism>().unwrap(), Mechanism::Pbft);
        assert!("pos".parse::<Mechanism>().is_err());
        assert_eq!(
            "conflicting_vote".parse::<ByzantineBehavior>().unwrap(),
            ByzantineBehavior::ConflictingVote
        );
    }
}
