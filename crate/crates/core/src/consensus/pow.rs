use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use super::{ConsensusError, Endpoint, LinkModel, Round, Stage, Step};
use crate::radio::Fault;

/// Client broadcast, one relay of the transaction, communication-free
/// mining, block broadcast, reply.
///
/// The lowest-id miner holding the request relays it. Every node draws an
/// Exp(1) mining time from the round seed in id order; the earliest draw
/// among miners holding the transaction wins (ties go to the lower id).
/// The round succeeds when a majority of honest miners hold a valid block.
pub(super) fn execute(
    round: &mut Round<'_>,
    links: &mut dyn LinkModel,
    quorum: usize,
    seed: u64,
) -> Step<()> {
    let n = round.n();
    let mut holds_tx = vec![false; n];

    let reached = round.broadcast(Stage::Request, Endpoint::Client, links)?;
    if reached.is_empty() {
        return Err(ConsensusError::NoMinerReached.into());
    }
    for &id in &reached {
        holds_tx[id] = true;
    }

    if let Some(relay) = reached.iter().copied().find(|&id| round.transmits(id)) {
        for id in round.broadcast(Stage::TxRelay, Endpoint::Node(relay), links)? {
            holds_tx[id] = true;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
    let winner = (0..n)
        .filter(|&id| holds_tx[id] && round.transmits(id))
        .min_by(|&a, &b| draws[a].total_cmp(&draws[b]).then(a.cmp(&b)));
    let Some(winner) = winner else {
        return Ok(());
    };
    round.proposer = Some(winner);

    let valid = round.fault(winner) == Fault::Honest;
    let delivered = round.broadcast(Stage::Block, Endpoint::Node(winner), links)?;
    if valid {
        round.confirmed[winner] = true;
        for id in delivered {
            round.confirmed[id] = round.fault(id) == Fault::Honest;
        }
    }

    if round.confirming() >= quorum {
        round.unicast(
            Stage::Reply,
            Endpoint::Node(winner),
            Endpoint::Client,
            links,
        )?;
    }
    Ok(())
}
