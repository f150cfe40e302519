use super::{Cell, SweepSpec, SweepTable};
use crate::analytics::{comm_complexity, spectrum_requirement};
use crate::Error;

/// Closed-form message and slot counts for every mechanism over
/// `n_min..=n_max`.
/// Columns: mechanism, n, complexity, spectrum.
pub fn run_complexity_sweep(spec: &SweepSpec) -> Result<SweepTable, Error> {
    if spec.mechanisms.is_empty() {
        return Err(Error::InvalidSpec("mechanisms must not be empty".into()));
    }
    if spec.n_min == 0 || spec.n_min > spec.n_max {
        return Err(Error::InvalidSpec(format!(
            "node range {}..={} must be non-empty and start at 1 or more",
            spec.n_min, spec.n_max
        )));
    }
    let mut table = SweepTable::new(
        &["mechanism", "n", "complexity", "spectrum"],
        spec.metadata(),
    );
    for &mechanism in &spec.mechanisms {
        for n in spec.n_min..=spec.n_max {
            table.push(vec![
                mechanism.as_str().into(),
                n.into(),
                Cell::Int(comm_complexity(mechanism, n) as i128),
                Cell::Int(spectrum_requirement(mechanism, n) as i128),
            ]);
        }
    }
    Ok(table)
}
