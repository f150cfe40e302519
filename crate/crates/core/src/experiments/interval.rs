use super::{log_grid, Cell, ExperimentOutput, SweepSpec, SweepTable};
use crate::analytics::{optimal_interval, pbft_round_success, throughput, IntervalModel};
use crate::consensus::Mechanism;
use crate::Error;

/// Throughput and latency curves over the interval grid for every (n, f).
///
/// Main table: n, f, v, p_link, p_round, throughput, latency,
/// latency_divergent (latency is `inf` where the round never succeeds).
/// Side table `summary`: n, f, v_star, tps_star, latency_at_v_star.
pub fn run_interval_sweep(spec: &SweepSpec) -> Result<ExperimentOutput, Error> {
    if spec.n_list.is_empty() || spec.interval_faults.is_empty() {
        return Err(Error::InvalidSpec(
            "n_list and interval_f must not be empty".into(),
        ));
    }
    let grid = log_grid(spec.v_min, spec.v_max, spec.v_points)?;
    let model = IntervalModel::exponential(spec.tau, spec.block_txns);
    let meta = spec.metadata();
    let mut main = SweepTable::new(
        &[
            "n",
            "f",
            "v",
            "p_link",
            "p_round",
            "throughput",
            "latency",
            "latency_divergent",
        ],
        meta.clone(),
    );
    let mut summary = SweepTable::new(&["n", "f", "v_star", "tps_star", "latency_at_v_star"], meta);
    for &n in &spec.n_list {
        for &f in &spec.interval_faults {
            let required = Mechanism::Pbft.min_nodes(f);
            if n < required {
                return Err(Error::InvalidSpec(format!(
                    "interval sweep needs n >= 3f+1 = {required} for f={f}, got n={n}"
                )));
            }
            for &v in &grid {
                let p_link = model.link_success(v);
                let p_round = pbft_round_success(p_link, n, f);
                let tps = throughput(v, n, f, &model)?;
                let (lat, divergent) = latency_or_inf(v, n, p_round);
                main.push(vec![
                    n.into(),
                    f.into(),
                    Cell::Float(v),
                    Cell::Float(p_link),
                    Cell::Float(p_round),
                    Cell::Float(tps),
                    Cell::Float(lat),
                    divergent.into(),
                ]);
            }
            let (v_star, tps_star) = optimal_interval(n, f, &model, &grid)?;
            let p_star = pbft_round_success(model.link_success(v_star), n, f);
            summary.push(vec![
                n.into(),
                f.into(),
                Cell::Float(v_star),
                Cell::Float(tps_star),
                Cell::Float(latency_or_inf(v_star, n, p_star).0),
            ]);
        }
    }
    Ok(ExperimentOutput {
        main,
        extras: vec![("summary", summary)],
    })
}

/// Latency `v (2n+1) / P_round`, or `inf` flagged as divergent.
fn latency_or_inf(v: f64, n: usize, p_round: f64) -> (f64, bool) {
    if p_round > 0.0 {
        (v * (2 * n + 1) as f64 / p_round, false)
    } else {
        (f64::INFINITY, true)
    }
}
