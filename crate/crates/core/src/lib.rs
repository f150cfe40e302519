//! Simulator and closed-form analytics for blockchains running PBFT, Raft
//! or PoW over a shared wireless channel.
//!
//! - [`radio`]: placement, log-distance propagation, jamming, flooding.
//! - [`consensus`]: slotted message-level rounds for each mechanism.
//! - [`analytics`]: communication cost formulas, viable power, interval model.
//! - [`experiments`]: seeded sweeps producing [`experiments::SweepTable`]s.
//! - [`config`] and [`csv_out`]: flat key-value configs and deterministic CSV.

pub mod analytics;
pub mod config;
pub mod consensus;
pub mod csv_out;
pub mod experiments;
pub mod radio;

use std::path::PathBuf;

use thiserror::Error;

/// Any failure surfaced by the experiment and output layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Radio(#[from] radio::RadioError),
    #[error(transparent)]
    Consensus(#[from] consensus::ConsensusError),
    #[error(transparent)]
    Analytics(#[from] analytics::AnalyticsError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}
