use super::{Endpoint, LinkModel, Round, Stage, Step};
use crate::radio::Fault;

/// Request, downlink append, uplink acks, then replication and reply.
///
/// A follower's vote counts iff it decoded the downlink and the leader
/// decoded its ack. The leader counts itself.
pub(super) fn execute(round: &mut Round<'_>, links: &mut dyn LinkModel, quorum: usize) -> Step<()> {
    round.proposer = Some(0);

    let got_request = round.unicast(Stage::Request, Endpoint::Client, Endpoint::Node(0), links)?;
    if !got_request || !round.transmits(0) {
        return Ok(());
    }
    let leader_honest = round.fault(0) == Fault::Honest;
    round.confirmed[0] = leader_honest;

    let downlink = round.broadcast(Stage::AppendEntries, Endpoint::Node(0), links)?;
    for follower in downlink {
        if !round.transmits(follower) {
            continue;
        }
        let acked = round.unicast(
            Stage::Ack,
            Endpoint::Node(follower),
            Endpoint::Node(0),
            links,
        )?;
        round.confirmed[follower] =
            acked && leader_honest && round.fault(follower) == Fault::Honest;
    }

    if round.confirming() >= quorum {
        round.broadcast(Stage::Replication, Endpoint::Node(0), links)?;
        round.unicast(Stage::Reply, Endpoint::Node(0), Endpoint::Client, links)?;
    }
    Ok(())
}
