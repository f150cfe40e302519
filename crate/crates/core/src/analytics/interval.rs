//! Throughput and latency of a wireless PBFT round as a function of the
//! per-transmission interval `v`.
//!
//! A longer slot makes each reception more likely but stretches the round.
//! Per-link success follows [`SuccessLaw`]; the probability that a round
//! commits is evaluated exactly by composing binomial tails over the
//! pre-prepare, prepare and commit phases, with every link independent.

use super::{spectrum_requirement, AnalyticsError};
use crate::consensus::Mechanism;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuccessLaw {
    /// `p(v) = 1 - exp(-v / tau)`.
    Exponential { tau: f64 },
    /// Every reception succeeds regardless of `v`.
    Perfect,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalModel {
    pub law: SuccessLaw,
    /// Transactions carried by one committed block.
    pub block_txns: f64,
}

impl IntervalModel {
    pub fn exponential(tau: f64, block_txns: f64) -> Self {
        IntervalModel {
            law: SuccessLaw::Exponential { tau },
            block_txns,
        }
    }

    pub fn perfect(block_txns: f64) -> Self {
        IntervalModel {
            law: SuccessLaw::Perfect,
            block_txns,
        }
    }

    /// Per-link success probability for slot length `v`.
    pub fn link_success(&self, v: f64) -> f64 {
        match self.law {
            SuccessLaw::Exponential { tau } => -(-v / tau).exp_m1(),
            SuccessLaw::Perfect => 1.0,
        }
    }

    fn validate(&self) -> Result<(), AnalyticsError> {
        if let SuccessLaw::Exponential { tau } = self.law {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(AnalyticsError::InvalidArgument(format!(
                    "tau must be > 0 (got {tau})"
                )));
            }
        }
        if !(self.block_txns > 0.0 && self.block_txns.is_finite()) {
            return Err(AnalyticsError::InvalidArgument(format!(
                "block_txns must be > 0 (got {})",
                self.block_txns
            )));
        }
        Ok(())
    }
}

/// `tails[j][t] = P(Bin(j, p) >= t)` for `j <= max_trials`.
struct BinomialTails {
    rows: Vec<Vec<f64>>,
}

impl BinomialTails {
    fn new(max_trials: usize, p: f64) -> Self {
        let mut rows = Vec::with_capacity(max_trials + 1);
        let mut pmf = vec![1.0];
        for j in 0..=max_trials {
            if j > 0 {
                pmf = next_pmf_row(&pmf, p);
            }
            rows.push(tail_sums(&pmf));
        }
        BinomialTails { rows }
    }

    fn at_least(&self, trials: usize, successes: usize) -> f64 {
        self.rows[trials].get(successes).copied().unwrap_or(0.0)
    }
}

fn next_pmf_row(prev: &[f64], p: f64) -> Vec<f64> {
    let q = 1.0 - p;
    let mut next = vec![0.0; prev.len() + 1];
    for (k, &mass) in prev.iter().enumerate() {
        next[k] += mass * q;
        next[k + 1] += mass * p;
    }
    next
}

/// `out[t] = sum_{k >= t} pmf[k]`, with one trailing zero.
fn tail_sums(pmf: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; pmf.len() + 1];
    for k in (0..pmf.len()).rev() {
        out[k] = (out[k + 1] + pmf[k]).min(1.0);
    }
    out
}

fn binomial_pmf(trials: usize, p: f64) -> Vec<f64> {
    let mut pmf = vec![1.0];
    for _ in 0..trials {
        pmf = next_pmf_row(&pmf, p);
    }
    pmf
}

/// Probability that at least `2f + 1` of `n` honest nodes commit when
/// every reception succeeds independently with probability `p`.
///
/// Holders of the pre-prepare: leader plus Bin(n-1, p) replicas. A holder
/// prepares with probability P(Bin(K-1, p) >= 2f) given K holders; a
/// prepared node confirms with probability P(Bin(M-1, p) >= 2f) given M
/// prepared nodes. Given the counts these events are independent across
/// nodes because they use disjoint links.
pub fn pbft_round_success(p: f64, n: usize, f: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = p.clamp(0.0, 1.0);
    let tails = BinomialTails::new(n, p);
    let vote = 2 * f;
    let quorum = 2 * f + 1;

    // commit phase: P(at least `quorum` confirm | m prepared)
    let commit_ok: Vec<f64> = (0..=n)
        .map(|m| {
            if m < quorum {
                return 0.0;
            }
            let r = tails.at_least(m - 1, vote);
            tails_of(m, r, quorum)
        })
        .collect();

    let holders = binomial_pmf(n - 1, p);
    let mut total = 0.0;
    for (k, &w_k) in holders.iter().enumerate() {
        if w_k == 0.0 {
            continue;
        }
        let big_k = k + 1;
        let q = tails.at_least(big_k - 1, vote);
        let prepared = binomial_pmf(big_k, q);
        let inner: f64 = prepared
            .iter()
            .enumerate()
            .map(|(m, &w_m)| w_m * commit_ok[m])
            .sum();
        total += w_k * inner;
    }
    total.clamp(0.0, 1.0)
}

fn tails_of(trials: usize, p: f64, at_least: usize) -> f64 {
    let pmf = binomial_pmf(trials, p);
    pmf.iter().skip(at_least).sum::<f64>().min(1.0)
}

fn check_args(v: f64, n: usize, f: usize, model: &IntervalModel) -> Result<(), AnalyticsError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(AnalyticsError::InvalidArgument(format!(
            "interval must be > 0 (got {v})"
        )));
    }
    if n < 3 * f + 1 {
        return Err(AnalyticsError::InvalidArgument(format!(
            "PBFT with f={f} needs n >= {}, got {n}",
            3 * f + 1
        )));
    }
    model.validate()
}

fn round_duration(v: f64, n: usize) -> f64 {
    let slots = spectrum_requirement(Mechanism::Pbft, u32::try_from(n).unwrap_or(u32::MAX));
    v * slots as f64
}

/// Committed transactions per second: `B * P_round(v) / (v * (2n + 1))`.
pub fn throughput(
    v: f64,
    n: usize,
    f: usize,
    model: &IntervalModel,
) -> Result<f64, AnalyticsError> {
    check_args(v, n, f, model)?;
    let p_round = pbft_round_success(model.link_success(v), n, f);
    Ok(model.block_txns * p_round / round_duration(v, n))
}

/// Expected time to confirmation when failed rounds are retried:
/// `v * (2n + 1) / P_round(v)`.
pub fn latency(v: f64, n: usize, f: usize, model: &IntervalModel) -> Result<f64, AnalyticsError> {
    check_args(v, n, f, model)?;
    let p_round = pbft_round_success(model.link_success(v), n, f);
    if p_round <= 0.0 {
        return Err(AnalyticsError::DivergentLatency { interval: v });
    }
    Ok(round_duration(v, n) / p_round)
}

/// Grid argmax of [`throughput`]; ties go to the smaller interval.
pub fn optimal_interval(
    n: usize,
    f: usize,
    model: &IntervalModel,
    v_grid: &[f64],
) -> Result<(f64, f64), AnalyticsError> {
    if v_grid.is_empty() {
        return Err(AnalyticsError::InvalidArgument("v_grid is empty".into()));
    }
    if v_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AnalyticsError::InvalidArgument(
            "v_grid must be strictly ascending".into(),
        ));
    }
    let mut best = (v_grid[0], throughput(v_grid[0], n, f, model)?);
    for &v in &v_grid[1..] {
        let tps = throughput(v, n, f, model)?;
        if tps > best.1 {
            best = (v, tps);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
        let (a, b) = (lo.log10(), hi.log10());
        (0..points)
            .map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64))
            .collect()
    }

    #[test]
    fn link_success_law() {
        let m = IntervalModel::exponential(1.0, 1.0);
        assert_eq!(m.link_success(0.0), 0.0);
        assert_relative_eq!(
            m.link_success(1.0),
            1.0 - (-1.0f64).exp(),
            max_relative = 1e-15
        );
        assert!(m.link_success(1e-9) > 0.0);
        assert_eq!(IntervalModel::perfect(1.0).link_success(1e-9), 1.0);
    }

    #[test]
    fn round_success_edges() {
        assert_eq!(pbft_round_success(1.0, 10, 3), 1.0);
        assert_eq!(pbft_round_success(0.0, 4, 1), 0.0);
        // f = 0 never needs a single reception
        assert_eq!(pbft_round_success(0.0, 5, 0), 1.0);
    }

    #[test]
    fn round_success_small_case_by_enumeration() {
        // n = 4, f = 1 with every phase enumerated link by link
        for &p in &[0.3, 0.6, 0.9] {
            let exact = enumerate_n4_f1(p);
            assert_relative_eq!(pbft_round_success(p, 4, 1), exact, max_relative = 1e-12);
        }
    }

    /// Brute force over every link outcome of a 4-node, f = 1 round.
    fn enumerate_n4_f1(p: f64) -> f64 {
        let n = 4;
        let weight = |bits: u64, count: u32| -> f64 {
            let ones = bits.count_ones();
            p.powi(ones as i32) * (1.0 - p).powi((count - ones) as i32)
        };
        let mut commit_memo: [Option<f64>; 16] = [None; 16];
        let mut total = 0.0;
        for pp in 0u64..(1 << 3) {
            let mut hold = [true, false, false, false];
            for (r, slot) in hold.iter_mut().enumerate().skip(1) {
                *slot = pp >> (r - 1) & 1 == 1;
            }
            let senders: Vec<usize> = (0..n).filter(|&i| hold[i]).collect();
            // prepare links: each sender to each other node
            let prep_links: Vec<(usize, usize)> = senders
                .iter()
                .flat_map(|&s| (0..n).filter(move |&j| j != s).map(move |j| (s, j)))
                .collect();
            let np = prep_links.len() as u32;
            for pb in 0u64..(1 << np) {
                let mut got = [0usize; 4];
                for (i, &(_, j)) in prep_links.iter().enumerate() {
                    if pb >> i & 1 == 1 {
                        got[j] += 1;
                    }
                }
                let prepared_mask = (0..n)
                    .filter(|&j| hold[j] && got[j] >= 2)
                    .fold(0usize, |m, j| m | 1 << j);
                let inner = *commit_memo[prepared_mask].get_or_insert_with(|| {
                    let prepared: Vec<usize> =
                        (0..n).filter(|&j| prepared_mask >> j & 1 == 1).collect();
                    let commit_links: Vec<(usize, usize)> = prepared
                        .iter()
                        .flat_map(|&s| (0..n).filter(move |&j| j != s).map(move |j| (s, j)))
                        .collect();
                    let nc = commit_links.len() as u32;
                    let mut inner = 0.0;
                    for cb in 0u64..(1 << nc) {
                        let mut commits = [0usize; 4];
                        for (i, &(_, j)) in commit_links.iter().enumerate() {
                            if cb >> i & 1 == 1 {
                                commits[j] += 1;
                            }
                        }
                        let confirmed = prepared.iter().filter(|&&j| commits[j] + 1 >= 3).count();
                        if confirmed >= 3 {
                            inner += weight(cb, nc);
                        }
                    }
                    inner
                });
                total += weight(pp, 3) * weight(pb, np) * inner;
            }
        }
        total
    }

    #[test]
    fn throughput_vanishes_at_both_ends() {
        let m = IntervalModel::exponential(1.0, 1.0);
        assert!(throughput(1e-4, 10, 1, &m).unwrap() < 1e-12);
        assert!(throughput(1e4, 10, 1, &m).unwrap() < 1e-4);
    }

    #[test]
    fn interior_optimum_for_ten_nodes() {
        let m = IntervalModel::exponential(1.0, 1.0);
        let grid = log_grid(1e-2, 1e2, 2001);
        let (v_star, tps) = optimal_interval(10, 1, &m, &grid).unwrap();
        assert!(v_star > grid[0] && v_star < grid[grid.len() - 1]);
        assert!(tps > throughput(v_star / 2.0, 10, 1, &m).unwrap());
        assert!(tps > throughput(v_star * 2.0, 10, 1, &m).unwrap());
    }

    #[test]
    fn latency_is_duration_over_success() {
        let m = IntervalModel::perfect(1.0);
        assert_relative_eq!(latency(0.5, 4, 1, &m).unwrap(), 0.5 * 9.0);
        let m = IntervalModel::exponential(1.0, 1.0);
        let v = 2.0;
        let p = pbft_round_success(m.link_success(v), 4, 1);
        assert_relative_eq!(
            latency(v, 4, 1, &m).unwrap(),
            v * 9.0 / p,
            max_relative = 1e-12
        );
        assert!(matches!(
            latency(1e-300, 4, 1, &m),
            Err(AnalyticsError::DivergentLatency { .. })
        ));
    }

    #[test]
    fn optimal_interval_tie_break_and_single_point() {
        let m = IntervalModel::perfect(1.0);
        let (v, _) = optimal_interval(4, 1, &m, &[0.1, 0.2, 0.4]).unwrap();
        assert_eq!(v, 0.1);
        let m = IntervalModel::exponential(1.0, 1.0);
        let (v, tps) = optimal_interval(4, 1, &m, &[3.0]).unwrap();
        assert_eq!(v, 3.0);
        assert_eq!(tps, throughput(3.0, 4, 1, &m).unwrap());
        assert!(optimal_interval(4, 1, &m, &[]).is_err());
        assert!(optimal_interval(4, 1, &m, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn argument_checks() {
        let m = IntervalModel::exponential(1.0, 1.0);
        assert!(throughput(0.0, 10, 1, &m).is_err());
        assert!(throughput(1.0, 9, 3, &m).is_err());
        assert!(throughput(1.0, 10, 1, &IntervalModel::exponential(0.0, 1.0)).is_err());
    }
}
