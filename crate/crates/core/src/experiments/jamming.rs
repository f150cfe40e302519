use super::{par_map_ordered, Cell, ExperimentOutput, SweepSpec, SweepTable};
use crate::consensus::{run_raft, ConsensusConfig, Mechanism};
use crate::radio::{link_ok, ChannelParams};
use crate::Error;

/// Per-follower link outcome within one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
struct NodeOutcome {
    id: usize,
    x: f64,
    y: f64,
    ul_ok: bool,
    dl_ok: bool,
    vote_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
struct TrialOutcome {
    seed: u64,
    nodes: usize,
    votes: usize,
    success: bool,
    followers: Vec<NodeOutcome>,
}

impl TrialOutcome {
    /// Share of followers whose vote reached the leader (1 with no followers).
    fn vote_fraction(&self) -> f64 {
        match self.nodes {
            0 | 1 => 1.0,
            n => self.votes as f64 / (n - 1) as f64,
        }
    }
}

/// One Raft round per (SIR threshold, trial). The deployment depends only
/// on the trial seed, so every threshold sees the same placements.
///
/// Main table: sir_threshold_db, trial, seed, nodes, votes, vote_fraction,
/// success. Side tables: `summary` (per threshold) and, if `export_map`
/// is set, `map` (per follower: id, x, y, ul_ok, dl_ok, vote_ok).
pub fn run_jamming_experiment(spec: &SweepSpec) -> Result<ExperimentOutput, Error> {
    if spec.sir_list.is_empty() {
        return Err(Error::InvalidSpec("sir_list must not be empty".into()));
    }
    if spec.trials == 0 {
        return Err(Error::InvalidSpec("trials must be >= 1".into()));
    }
    let points: Vec<(f64, u32)> = spec
        .sir_list
        .iter()
        .flat_map(|&sir| (0..spec.trials).map(move |t| (sir, t)))
        .collect();
    let outcomes = par_map_ordered(&points, |&(sir, trial)| run_trial(spec, sir, trial))?;

    let meta = spec.metadata();
    let mut main = SweepTable::new(
        &[
            "sir_threshold_db",
            "trial",
            "seed",
            "nodes",
            "votes",
            "vote_fraction",
            "success",
        ],
        meta.clone(),
    );
    let mut map = SweepTable::new(
        &[
            "sir_threshold_db",
            "trial",
            "id",
            "x",
            "y",
            "ul_ok",
            "dl_ok",
            "vote_ok",
        ],
        meta.clone(),
    );
    let mut summary = SweepTable::new(
        &[
            "sir_threshold_db",
            "trials",
            "success_rate",
            "mean_vote_fraction",
        ],
        meta,
    );
    for (chunk_points, chunk) in points
        .chunks(spec.trials as usize)
        .zip(outcomes.chunks(spec.trials as usize))
    {
        let sir = chunk_points[0].0;
        for (&(_, trial), out) in chunk_points.iter().zip(chunk) {
            main.push(vec![
                Cell::Float(sir),
                trial.into(),
                out.seed.into(),
                out.nodes.into(),
                out.votes.into(),
                Cell::Float(out.vote_fraction()),
                out.success.into(),
            ]);
            if spec.export_map {
                for node in &out.followers {
                    map.push(vec![
                        Cell::Float(sir),
                        trial.into(),
                        node.id.into(),
                        Cell::Float(node.x),
                        Cell::Float(node.y),
                        node.ul_ok.into(),
                        node.dl_ok.into(),
                        node.vote_ok.into(),
                    ]);
                }
            }
        }
        let k = chunk.len() as f64;
        let successes = chunk.iter().filter(|o| o.success).count() as f64;
        let votes: f64 = chunk.iter().map(TrialOutcome::vote_fraction).sum();
        summary.push(vec![
            Cell::Float(sir),
            spec.trials.into(),
            Cell::Float(successes / k),
            Cell::Float(votes / k),
        ]);
    }

    let mut extras = vec![("summary", summary)];
    if spec.export_map {
        extras.push(("map", map));
    }
    Ok(ExperimentOutput { main, extras })
}

fn run_trial(spec: &SweepSpec, sir: f64, trial: u32) -> Result<TrialOutcome, Error> {
    let seed = spec.trial_seed(trial);
    let dep = spec.deployment(seed)?;
    let ch = ChannelParams {
        sir_threshold_db: sir,
        ..spec.channel
    };
    let jam = spec.active_jammer();
    let cfg = ConsensusConfig::new(Mechanism::Raft, 0);
    let result = run_raft(&dep, &ch, &cfg, jam, seed)?;
    let leader = dep.leader();
    let followers = if spec.export_map {
        dep.nodes[1..]
            .iter()
            .map(|node| NodeOutcome {
                id: node.id,
                x: node.position.x,
                y: node.position.y,
                ul_ok: link_ok(node, leader, &ch, jam),
                dl_ok: link_ok(leader, node, &ch, jam),
                vote_ok: result.confirmed[node.id],
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(TrialOutcome {
        seed,
        nodes: dep.len(),
        votes: result.confirming_nodes.saturating_sub(1),
        success: result.success,
        followers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::Point;

    fn small_spec() -> SweepSpec {
        let mut spec = SweepSpec {
            nodes: 40,
            trials: 6,
            export_map: true,
            sir_list: vec![-12.0, -6.0, 0.0],
            ..SweepSpec::default()
        };
        spec.channel.pathloss_exponent = 2.5;
        spec.channel.reference_loss_db = 40.0;
        spec.jammer.active = true;
        spec.jammer.position = Point::new(50.0, 0.0);
        spec
    }

    fn bools(t: &SweepTable, name: &str) -> Vec<bool> {
        let c = t.column(name).unwrap();
        t.rows
            .iter()
            .map(|r| match r[c] {
                Cell::Bool(b) => b,
                _ => unreachable!(),
            })
            .collect()
    }

    #[test]
    fn vote_needs_both_directions() {
        let out = run_jamming_experiment(&small_spec()).unwrap();
        let map = &out.extras.iter().find(|(s, _)| *s == "map").unwrap().1;
        assert_eq!(map.rows.len(), 3 * 6 * 39);
        let (ul, dl, vote) = (
            bools(map, "ul_ok"),
            bools(map, "dl_ok"),
            bools(map, "vote_ok"),
        );
        for i in 0..vote.len() {
            assert_eq!(vote[i], ul[i] && dl[i]);
        }
    }

    #[test]
    fn votes_fall_as_threshold_rises() {
        let spec = small_spec();
        let out = run_jamming_experiment(&spec).unwrap();
        let fractions: Vec<f64> = out
            .main
            .rows
            .iter()
            .map(|r| match r[5] {
                Cell::Float(v) => v,
                _ => unreachable!(),
            })
            .collect();
        let t = spec.trials as usize;
        for trial in 0..t {
            assert!(fractions[trial] >= fractions[t + trial]);
            assert!(fractions[t + trial] >= fractions[2 * t + trial]);
        }
    }

    #[test]
    fn no_jammer_no_sensitivity_all_vote() {
        let mut spec = small_spec();
        spec.jammer.active = false;
        spec.channel.rx_sensitivity_dbm = f64::NEG_INFINITY;
        let out = run_jamming_experiment(&spec).unwrap();
        let map = &out.extras.iter().find(|(s, _)| *s == "map").unwrap().1;
        assert!(bools(map, "vote_ok").into_iter().all(|b| b));
        assert!(bools(&out.main, "success").into_iter().all(|b| b));
    }

    #[test]
    fn map_omitted_unless_requested() {
        let spec = SweepSpec {
            export_map: false,
            ..small_spec()
        };
        let out = run_jamming_experiment(&spec).unwrap();
        assert_eq!(out.extras.len(), 1);
        assert_eq!(out.extras[0].0, "summary");
        assert_eq!(out.extras[0].1.rows.len(), 3);
    }
}
