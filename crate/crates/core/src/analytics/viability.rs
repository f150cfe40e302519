use std::f64::consts::PI;

use super::AnalyticsError;
use crate::radio::ChannelParams;

/// Minimum transmit powers for a viable wireless PBFT network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViabilityResult {
    /// Leader power, dBm.
    pub p1_star: f64,
    /// Replica power, dBm.
    pub p2_star: f64,
    /// Radius whose disk holds 3f+1 nodes on average, m.
    pub r_star: f64,
}

/// Powers at which a reception exactly meets the sensitivity: the leader
/// must reach `r_star`, replicas the full diameter `2 * r_star`.
pub fn viability_unchecked(
    f: u64,
    lambda: f64,
    ch: &ChannelParams,
) -> Result<ViabilityResult, AnalyticsError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(AnalyticsError::InvalidArgument(format!(
            "lambda must be > 0 (got {lambda})"
        )));
    }
    if !ch.rx_sensitivity_dbm.is_finite() {
        return Err(AnalyticsError::InvalidArgument(
            "rx_sensitivity must be finite for a power budget".into(),
        ));
    }
    let required = 3.0 * f as f64 + 1.0;
    let r_star = (required / (PI * lambda)).sqrt();
    let floor = ch.rx_sensitivity_dbm;
    Ok(ViabilityResult {
        p1_star: floor + ch.pathloss_db(r_star),
        p2_star: floor + ch.pathloss_db(2.0 * r_star),
        r_star,
    })
}

/// [`viability_unchecked`] with the coverage radius capped at `r_max`.
pub fn min_viable_power(
    f: u64,
    lambda: f64,
    ch: &ChannelParams,
    r_max: f64,
) -> Result<ViabilityResult, AnalyticsError> {
    let result = viability_unchecked(f, lambda, ch)?;
    if result.r_star > r_max {
        return Err(AnalyticsError::Infeasible {
            r_star: result.r_star,
            r_max,
            result,
        });
    }
    Ok(result)
}
