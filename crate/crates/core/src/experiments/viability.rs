use std::f64::consts::PI;

use super::{log_grid, Cell, FaultSpec, SweepSpec, SweepTable};
use crate::analytics::{min_viable_power, AnalyticsError};
use crate::Error;

/// Minimum viable powers over the density grid. Columns: lambda, f_mode,
/// f, r_star, p1_star, p2_star, feasible. Rows beyond `r_max` are kept and
/// marked infeasible.
pub fn run_viability_sweep(spec: &SweepSpec) -> Result<SweepTable, Error> {
    if spec.viability_faults.is_empty() {
        return Err(Error::InvalidSpec("viability_f must not be empty".into()));
    }
    let grid = log_grid(spec.lambda_min, spec.lambda_max, spec.lambda_points)?;
    let mut table = SweepTable::new(
        &[
            "lambda", "f_mode", "f", "r_star", "p1_star", "p2_star", "feasible",
        ],
        spec.metadata(),
    );
    for &lambda in &grid {
        for &fault in &spec.viability_faults {
            let f = match fault {
                FaultSpec::Fixed(f) => f,
                FaultSpec::Auto => auto_fault_budget(lambda, spec.r_max),
            };
            let (result, feasible) = match min_viable_power(f, lambda, &spec.channel, spec.r_max) {
                Ok(r) => (r, true),
                Err(AnalyticsError::Infeasible { result, .. }) => (result, false),
                Err(e) => return Err(e.into()),
            };
            table.push(vec![
                Cell::Float(lambda),
                Cell::Text(
                    if fault == FaultSpec::Auto {
                        "auto"
                    } else {
                        "fixed"
                    }
                    .into(),
                ),
                f.into(),
                Cell::Float(result.r_star),
                Cell::Float(result.p1_star),
                Cell::Float(result.p2_star),
                Cell::Bool(feasible),
            ]);
        }
    }
    Ok(table)
}

/// `floor((N - 1) / 3)` with `N = round(lambda * pi * radius^2)`.
pub fn auto_fault_budget(lambda: f64, radius: f64) -> u64 {
    let n = (lambda * PI * radius * radius).round().max(1.0) as u64;
    (n - 1) / 3
}
