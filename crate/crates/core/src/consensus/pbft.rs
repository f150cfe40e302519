use super::{Endpoint, LinkModel, Round, Stage, Step};
use crate::radio::Fault;

/// Request, pre-prepare, prepare, commit, then replication and reply on
/// success.
///
/// A node is prepared once it holds the leader's pre-prepare and has
/// prepares from at least 2f distinct other nodes; it confirms once it is
/// prepared and counts 2f+1 commits, its own included. Only messages from
/// honest senders count.
pub(super) fn execute(round: &mut Round<'_>, links: &mut dyn LinkModel, quorum: usize) -> Step<()> {
    let n = round.n();
    let f = round.cfg.fault_budget;
    round.proposer = Some(0);

    let got_request = round.unicast(Stage::Request, Endpoint::Client, Endpoint::Node(0), links)?;
    if !got_request || !round.transmits(0) {
        return Ok(());
    }

    let leader_honest = round.fault(0) == Fault::Honest;
    let mut has_proposal = vec![false; n];
    has_proposal[0] = true;
    for id in round.broadcast(Stage::PrePrepare, Endpoint::Node(0), links)? {
        has_proposal[id] = true;
    }
    // a proposal from a byzantine leader is never valid
    let holds_valid = |id: usize, round: &Round<'_>| {
        leader_honest && has_proposal[id] && round.fault(id) == Fault::Honest
    };

    let mut prepares = vec![0usize; n];
    for (sender, &holds) in has_proposal.iter().enumerate() {
        if !holds || !round.transmits(sender) {
            continue;
        }
        let valid = holds_valid(sender, round);
        for rx in round.broadcast(Stage::Prepare, Endpoint::Node(sender), links)? {
            if valid {
                prepares[rx] += 1;
            }
        }
    }
    let prepared: Vec<bool> = (0..n)
        .map(|id| holds_valid(id, round) && prepares[id] >= 2 * f)
        .collect();

    let mut commits = vec![0usize; n];
    for sender in 0..n {
        let sends = match round.fault(sender) {
            Fault::Honest => prepared[sender],
            Fault::Byzantine => has_proposal[sender] && round.transmits(sender),
            Fault::Crashed => false,
        };
        if !sends {
            continue;
        }
        let valid = round.fault(sender) == Fault::Honest;
        for rx in round.broadcast(Stage::Commit, Endpoint::Node(sender), links)? {
            if valid {
                commits[rx] += 1;
            }
        }
    }
    // its own commit plus 2f others reach the 2f + 1 commit quorum
    for (id, (&ready, &heard)) in prepared.iter().zip(&commits).enumerate() {
        round.confirmed[id] = ready && heard >= 2 * f;
    }

    if round.confirming() >= quorum {
        round.broadcast(Stage::Replication, Endpoint::Node(0), links)?;
        round.unicast(Stage::Reply, Endpoint::Node(0), Endpoint::Client, links)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use crate::consensus::*;
    use crate::radio::{place_nodes, ChannelParams, Fault};

    fn perfect_pbft(
        n: usize,
        f: usize,
        byzantine: usize,
        behavior: ByzantineBehavior,
    ) -> RoundResult {
        let mut d = place_nodes(n, 100.0, 5).unwrap();
        d.mark_faults(byzantine, 0);
        let cfg = ConsensusConfig::new(Mechanism::Pbft, f).with_byzantine_behavior(behavior);
        run_pbft(&d, &ChannelParams::perfect(), &cfg, None, 0).unwrap()
    }

    #[test]
    fn minimal_pbft_all_confirm() {
        let r = perfect_pbft(4, 1, 0, ByzantineBehavior::SilentDrop);
        assert!(r.success);
        assert_eq!(r.confirming_nodes, 4);
        assert_eq!((r.tx_events, r.rx_events), (9, 36));
    }

    #[test]
    fn ten_nodes_match_closed_forms() {
        let r = perfect_pbft(10, 3, 0, ByzantineBehavior::SilentDrop);
        assert!(r.success);
        assert!(r.confirming_nodes >= 7);
        assert_eq!(r.tx_events, 21);
        assert_eq!(r.rx_events, 210);
        // request + 21 consensus slots + replication + reply
        assert_eq!(r.slots_elapsed, 24);
    }

    #[test]
    fn byzantine_budget_boundary() {
        for f in 1..=4 {
            let n = 3 * f + 1;
            for behavior in [
                ByzantineBehavior::SilentDrop,
                ByzantineBehavior::ConflictingVote,
            ] {
                let ok = perfect_pbft(n, f, f, behavior);
                assert!(ok.success, "f={f} {behavior:?}");
                assert_eq!(ok.confirming_nodes, 2 * f + 1);
                let bad = perfect_pbft(n, f, f + 1, behavior);
                assert!(!bad.success, "f={f} {behavior:?}");
            }
        }
    }

    #[test]
    fn conflicting_votes_still_use_spectrum() {
        let silent = perfect_pbft(7, 2, 2, ByzantineBehavior::SilentDrop);
        let loud = perfect_pbft(7, 2, 2, ByzantineBehavior::ConflictingVote);
        assert_eq!(silent.tx_events, 1 + 5 + 5);
        assert_eq!(loud.tx_events, 1 + 7 + 7);
    }

    #[test]
    fn dead_leader_fails_round() {
        let mut d = place_nodes(4, 100.0, 5).unwrap();
        d.nodes[0].fault = Fault::Crashed;
        let cfg = ConsensusConfig::new(Mechanism::Pbft, 1);
        let r = run_pbft(&d, &ChannelParams::perfect(), &cfg, None, 0).unwrap();
        assert!(!r.success);
        assert_eq!(r.confirming_nodes, 0);
        assert_eq!(r.tx_events, 0);
    }

    #[test]
    fn byzantine_leader_fails_round() {
        let mut d = place_nodes(4, 100.0, 5).unwrap();
        d.nodes[0].fault = Fault::Byzantine;
        let cfg = ConsensusConfig::new(Mechanism::Pbft, 1)
            .with_byzantine_behavior(ByzantineBehavior::ConflictingVote);
        let r = run_pbft(&d, &ChannelParams::perfect(), &cfg, None, 0).unwrap();
        assert!(!r.success);
    }

    #[test]
    fn single_node_pbft() {
        let r = perfect_pbft(1, 0, 0, ByzantineBehavior::SilentDrop);
        assert!(r.success);
        assert_eq!((r.tx_events, r.rx_events), (3, 3));
    }
}
