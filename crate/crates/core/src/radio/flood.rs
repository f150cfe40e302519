//! Multi-hop flooding over the directed link graph.

use std::collections::{BTreeSet, VecDeque};

use super::{coverage_set, ChannelParams, Deployment, Jammer};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FloodResult {
    /// Every node other than the source that ends up holding the message.
    pub reached: BTreeSet<usize>,
    /// Distinct nodes that transmitted, the source included. Each node
    /// transmits at most once.
    pub transmissions: usize,
}

/// Floods a message from `source`: breadth-first over coverage sets in
/// ascending id order. A node that receives the message rebroadcasts it
/// once, but only when some node in its coverage has not yet been reached
/// by then; a rebroadcast that informs nobody is skipped. The source
/// always transmits.
pub fn flood_reach(
    source: usize,
    deployment: &Deployment,
    ch: &ChannelParams,
    jam: Option<&Jammer>,
) -> FloodResult {
    let n = deployment.len();
    let mut seen = vec![false; n];
    seen[source] = true;
    let mut reached = BTreeSet::new();
    let mut queue = VecDeque::from([source]);
    let mut transmissions = 0;

    while let Some(u) = queue.pop_front() {
        let fresh: Vec<usize> = coverage_set(&deployment.nodes[u], deployment, ch, jam)
            .into_iter()
            .filter(|&v| !seen[v])
            .collect();
        if u == source || !fresh.is_empty() {
            transmissions += 1;
        }
        for v in fresh {
            seen[v] = true;
            reached.insert(v);
            queue.push_back(v);
        }
    }

    FloodResult {
        reached,
        transmissions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::{place_nodes, Point};

    fn line_of_three() -> (Deployment, ChannelParams) {
        // 0 dBm, gamma 2, no reference loss: -40 dBm at 100 m, -46 dBm at 200 m
        let d = Deployment::from_positions(
            &[
                Point::new(0.0, 0.0),
                Point::new(100.0, 0.0),
                Point::new(200.0, 0.0),
            ],
            0.0,
        )
        .unwrap();
        let ch = ChannelParams {
            pathloss_exponent: 2.0,
            reference_loss_db: 0.0,
            rx_sensitivity_dbm: -40.0,
            ..ChannelParams::default()
        };
        (d, ch)
    }

    #[test]
    fn relays_along_a_line() {
        let (d, ch) = line_of_three();
        let r = flood_reach(0, &d, &ch, None);
        assert_eq!(r.reached, BTreeSet::from([1, 2]));
        assert_eq!(r.transmissions, 2);
    }

    #[test]
    fn perfect_channel_needs_one_broadcast() {
        let d = place_nodes(40, 100.0, 9).unwrap();
        let r = flood_reach(0, &d, &ChannelParams::perfect(), None);
        assert_eq!(r.reached, (1..40).collect());
        assert_eq!(r.transmissions, 1);
    }

    #[test]
    fn isolated_source() {
        let d = place_nodes(10, 100.0, 9).unwrap().with_tx_power(-400.0);
        let r = flood_reach(0, &d, &ChannelParams::default(), None);
        assert!(r.reached.is_empty());
        assert_eq!(r.transmissions, 1);
    }
}
