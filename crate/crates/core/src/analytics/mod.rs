//! Closed-form communication costs, viable transmit power and the
//! transmission-interval throughput/latency model.

mod interval;
mod viability;

use thiserror::Error;

use crate::consensus::Mechanism;

pub use interval::{
    latency, optimal_interval, pbft_round_success, throughput, IntervalModel, SuccessLaw,
};
pub use viability::{min_viable_power, viability_unchecked, ViabilityResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("infeasible: required coverage radius {r_star:.3} m exceeds the {r_max} m cap")]
    Infeasible {
        r_star: f64,
        r_max: f64,
        result: ViabilityResult,
    },
    #[error("divergent latency: round success probability is zero at v={interval}")]
    DivergentLatency { interval: f64 },
}

/// Receiver-side message events in one round: PBFT `2N^2 + N`, Raft and
/// PoW `2N`.
pub fn comm_complexity(mechanism: Mechanism, n: u32) -> u128 {
    let n = u128::from(n);
    match mechanism {
        Mechanism::Pbft => 2 * n * n + n,
        Mechanism::Raft | Mechanism::Pow => 2 * n,
    }
}

/// Transmission slots in one round with every node in range of every
/// other: PBFT `2N + 1`, Raft `N + 1`, PoW `2`.
pub fn spectrum_requirement(mechanism: Mechanism, n: u32) -> u128 {
    let n = u128::from(n);
    match mechanism {
        Mechanism::Pbft => 2 * n + 1,
        Mechanism::Raft => n + 1,
        Mechanism::Pow => 2,
    }
}
