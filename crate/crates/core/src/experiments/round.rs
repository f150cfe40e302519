use super::{Cell, ExperimentOutput, SweepSpec, SweepTable};
use crate::consensus::{run_round, ConsensusConfig};
use crate::Error;

/// One consensus round on the deployment drawn from `base_seed`, dumped
/// transmission by transmission.
///
/// Main table: slot, stage, sender, recipients (space-separated), tallied.
/// Side table `summary`: the round's counters in one row.
pub fn run_round_trace(spec: &SweepSpec) -> Result<ExperimentOutput, Error> {
    let seed = spec.base_seed;
    let mut dep = spec.deployment(seed)?;
    dep.mark_faults(spec.byzantine_nodes, spec.crashed_nodes);
    let cfg = ConsensusConfig::new(spec.mechanism, spec.fault_budget)
        .with_interval(spec.interval_s)
        .with_timeout(spec.max_slots)
        .with_byzantine_behavior(spec.byzantine_behavior);
    let result = run_round(&dep, &spec.channel, &cfg, spec.active_jammer(), seed)?;

    let meta = spec.metadata();
    let mut trace = SweepTable::new(
        &["slot", "stage", "sender", "recipients", "tallied"],
        meta.clone(),
    );
    for entry in &result.stage_trace {
        let recipients: Vec<String> = entry.recipients.iter().map(|r| r.to_string()).collect();
        trace.push(vec![
            entry.slot.into(),
            entry.stage.as_str().into(),
            entry.sender.to_string().into(),
            recipients.join(" ").into(),
            entry.stage.is_tallied(spec.mechanism).into(),
        ]);
    }
    let mut summary = SweepTable::new(
        &[
            "mechanism",
            "nodes",
            "success",
            "confirming_nodes",
            "tx_events",
            "rx_events",
            "slots_elapsed",
            "elapsed_s",
            "timed_out",
            "proposer",
        ],
        meta,
    );
    summary.push(vec![
        result.mechanism.as_str().into(),
        dep.len().into(),
        result.success.into(),
        result.confirming_nodes.into(),
        result.tx_events.into(),
        result.rx_events.into(),
        result.slots_elapsed.into(),
        Cell::Float(result.elapsed_s),
        result.timed_out.into(),
        result
            .proposer
            .map_or_else(|| "".to_string(), |p| p.to_string())
            .into(),
    ]);
    Ok(ExperimentOutput {
        main: trace,
        extras: vec![("summary", summary)],
    })
}
