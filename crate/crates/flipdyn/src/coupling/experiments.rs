//! Contraction and coalescence experiments on top of the coupled round.

use super::exact::ExactCoupling;
use super::metric::WeightedMetric;
use super::{coupled_round, CouplingError};
use crate::analysis::{enumerate_colorings, StateSpace};
use crate::coloring::{hamming, weighted_distance, AdjacentPair, Color, Coloring};
use crate::dynamics::{distributed_round, RoundParams};
use crate::graph::Graph;
use crate::rat::{rat_f64, Rat};
use crate::schedule::FlipSchedule;
use num::One;

/// All unordered adjacent pairs (proper colorings differing at one vertex).
pub fn adjacent_pairs(g: &Graph, space: &StateSpace) -> Vec<AdjacentPair> {
    let mut out = Vec::new();
    for (i, s) in space.states().iter().enumerate() {
        for v in 0..g.n() as u32 {
            for c in 1..=space.k() {
                if c <= s.color(v) {
                    continue; // unordered: only recolor upward
                }
                let t = s.with_color(v, c);
                if space.index_of(&t).is_some_and(|j| j > i) {
                    out.push(AdjacentPair::new(s.clone(), t).unwrap());
                }
            }
        }
    }
    out
}

/// Exact one-round contraction data for a single adjacent pair.
#[derive(Debug, Clone)]
pub struct PairContraction {
    pub v_star: u32,
    pub expected_hamming: Rat,
    /// `(initial weighted distance, expected weighted distance)` when a
    /// weighting constant was supplied.
    pub weighted: Option<(Rat, Rat)>,
}

pub fn pair_contraction_exact(
    g: &Graph,
    pair: &AdjacentPair,
    alpha: &Rat,
    schedule: &FlipSchedule,
    eta: Option<&Rat>,
    metric: Option<&mut WeightedMetric>,
    line_budget: usize,
) -> Result<PairContraction, CouplingError> {
    let ec = ExactCoupling::new(g, pair, alpha.clone(), schedule, line_budget)?;
    let expected_hamming = ec.expected_hamming();
    let weighted = match (eta, metric) {
        (Some(eta), Some(metric)) => {
            let h0 = weighted_distance(g, pair, eta).expect("eta in range");
            let eh = ec.expected_weighted(metric);
            Some((h0, eh))
        }
        _ => None,
    };
    Ok(PairContraction { v_star: pair.v_star(), expected_hamming, weighted })
}

/// Exact contraction swept over every adjacent pair of the state space.
#[derive(Debug, Clone)]
pub struct ContractionSweep {
    pub pairs: usize,
    /// Largest `E[H']` over all pairs (contraction iff < 1).
    pub max_expected_hamming: Rat,
    /// Largest `E[metric'] / metric` over all pairs, when weighted.
    pub max_weighted_ratio: Option<Rat>,
    pub all_hamming_contract: bool,
    pub all_weighted_contract: Option<bool>,
}

pub fn contraction_sweep_exact(
    g: &Graph,
    k: Color,
    alpha: &Rat,
    schedule: &FlipSchedule,
    eta: Option<&Rat>,
    line_budget: usize,
) -> Result<ContractionSweep, CouplingError> {
    let space = enumerate_colorings(g, k, 20_000).expect("desk-scale state space");
    let pairs = adjacent_pairs(g, &space);
    let mut metric = eta.map(|e| WeightedMetric::new(g, k, e.clone()).expect("metric space"));
    let mut max_h: Option<Rat> = None;
    let mut max_ratio: Option<Rat> = None;
    for pair in &pairs {
        let pc = pair_contraction_exact(g, pair, alpha, schedule, eta, metric.as_mut(), line_budget)?;
        if max_h.as_ref().is_none_or(|m| pc.expected_hamming > *m) {
            max_h = Some(pc.expected_hamming.clone());
        }
        if let Some((h0, eh)) = pc.weighted {
            let ratio = eh / h0;
            if max_ratio.as_ref().is_none_or(|m| ratio > *m) {
                max_ratio = Some(ratio);
            }
        }
    }
    let max_expected_hamming = max_h.expect("at least one adjacent pair");
    let all_hamming_contract = max_expected_hamming < Rat::one();
    let all_weighted_contract = max_ratio.as_ref().map(|r| r < &Rat::one());
    Ok(ContractionSweep {
        pairs: pairs.len(),
        max_expected_hamming,
        max_weighted_ratio: max_ratio,
        all_hamming_contract,
        all_weighted_contract,
    })
}

/// Monte Carlo estimate of `E[H(X', Y')]` for one pair.
#[derive(Debug, Clone)]
pub struct SampledContraction {
    pub trials: u64,
    pub mean_hamming: f64,
    pub std_error: f64,
}

pub fn pair_contraction_sampled(
    g: &Graph,
    pair: &AdjacentPair,
    params: &RoundParams,
    trials: u64,
) -> Result<SampledContraction, CouplingError> {
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for t in 0..trials {
        let (x, y, _) = coupled_round(g, pair, params, t)?;
        let h = hamming(&x, &y).expect("same domain") as f64;
        sum += h;
        sum_sq += h * h;
    }
    let mean = sum / trials as f64;
    let var = (sum_sq / trials as f64 - mean * mean).max(0.0);
    Ok(SampledContraction {
        trials,
        mean_hamming: mean,
        std_error: (var / trials as f64).sqrt(),
    })
}

/// Exact distance-2 disagreement mass with its two comparison bounds.
#[derive(Debug, Clone)]
pub struct Dist2Report {
    pub mass: Rat,
    /// The stated bound `300 maxdeg^2 alpha^2`.
    pub bound_stated: Rat,
    /// The sharper derived constant `288 maxdeg^2 alpha^2`.
    pub bound_sharp: Rat,
}

impl Dist2Report {
    pub fn within_sharp(&self) -> bool {
        self.mass <= self.bound_sharp
    }

    pub fn within_stated(&self) -> bool {
        self.mass <= self.bound_stated
    }
}

pub fn dist2_mass_exact(
    g: &Graph,
    pair: &AdjacentPair,
    alpha: &Rat,
    schedule: &FlipSchedule,
    line_budget: usize,
) -> Result<Dist2Report, CouplingError> {
    let ec = ExactCoupling::new(g, pair, alpha.clone(), schedule, line_budget)?;
    let mass = ec.dist2_mass();
    let d2 = Rat::from_integer((g.max_degree() * g.max_degree()).into());
    let a2 = alpha * alpha;
    Ok(Dist2Report {
        mass,
        bound_stated: Rat::from_integer(300.into()) * &d2 * &a2,
        bound_sharp: Rat::from_integer(288.into()) * &d2 * &a2,
    })
}

/// One grand-coupling run: two chains from arbitrary starts share the keyed
/// coin stream, so equal clusters flip identically.
#[derive(Debug, Clone)]
pub struct CoalescenceRow {
    pub seed: u64,
    /// First round with Hamming distance zero, `None` if censored at the
    /// horizon.
    pub coalesced_at: Option<u64>,
}

pub fn coalescence_experiment(
    g: &Graph,
    starts: &[(Coloring, Coloring)],
    params: &RoundParams,
    horizon: u64,
) -> Vec<CoalescenceRow> {
    use rayon::prelude::*;
    starts
        .par_iter()
        .enumerate()
        .map(|(i, (x0, y0))| {
            let seed = params.seed.wrapping_add(i as u64);
            let p = RoundParams::new(params.alpha, params.schedule.clone(), seed);
            let mut x = x0.clone();
            let mut y = y0.clone();
            let mut when = None;
            if x == y {
                when = Some(0);
            } else if let (Some(mut rx), Some(mut ry)) = (
                crate::dynamics::ChainRunner::new(g, x0.k(), &p),
                crate::dynamics::ChainRunner::new(g, y0.k(), &p),
            ) {
                for t in 0..horizon {
                    rx.step(&mut x, t);
                    ry.step(&mut y, t);
                    if x == y {
                        when = Some(t + 1);
                        break;
                    }
                }
            } else {
                for t in 0..horizon {
                    x = distributed_round(g, &x, &p, t).expect("proper chain").0;
                    y = distributed_round(g, &y, &p, t).expect("proper chain").0;
                    if x == y {
                        when = Some(t + 1);
                        break;
                    }
                }
            }
            CoalescenceRow { seed, coalesced_at: when }
        })
        .collect()
}

/// Median of the observed coalescence times; censored runs count as the
/// horizon (which biases the median upward, the conservative direction).
pub fn median_coalescence(rows: &[CoalescenceRow], horizon: u64) -> f64 {
    let mut times: Vec<u64> = rows
        .iter()
        .map(|r| r.coalesced_at.unwrap_or(horizon))
        .collect();
    times.sort_unstable();
    let n = times.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        times[n / 2] as f64
    } else {
        (times[n / 2 - 1] + times[n / 2]) as f64 / 2.0
    }
}

/// Helper for reports: the expected-Hamming value as a float.
pub fn contraction_beta(pc: &PairContraction) -> f64 {
    1.0 - rat_f64(&pc.expected_hamming)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i};

    #[test]
    fn adjacent_pair_count_on_edge() {
        let g = Graph::path(2).unwrap();
        let space = enumerate_colorings(&g, 3, 1000).unwrap();
        let pairs = adjacent_pairs(&g, &space);
        // 6 states; each vertex can move to 1 other free color: 6 * 2 / 2.
        assert_eq!(pairs.len(), 6);
    }

    #[test]
    fn exact_contraction_on_p3_center_pair() {
        let g = Graph::path(3).unwrap();
        let x = Coloring::new(vec![1, 2, 1], 4).unwrap();
        let y = x.with_color(1, 3);
        let pair = AdjacentPair::new(x, y).unwrap();
        let alpha = rat(1, 100);
        let pc = pair_contraction_exact(
            &g,
            &pair,
            &alpha,
            &FlipSchedule::vigoda(),
            None,
            None,
            16,
        )
        .unwrap();
        assert!(
            pc.expected_hamming < rat_i(1),
            "E[H'] = {}",
            pc.expected_hamming
        );
        assert!(pc.expected_hamming > rat(9, 10), "one tiny-alpha round moves little");
    }

    #[test]
    fn sampled_matches_exact_within_three_sigma() {
        let g = Graph::path(3).unwrap();
        let x = Coloring::new(vec![1, 2, 1], 4).unwrap();
        let y = x.with_color(1, 3);
        let pair = AdjacentPair::new(x, y).unwrap();
        let alpha = rat(1, 20);
        let exact = pair_contraction_exact(
            &g,
            &pair,
            &alpha,
            &FlipSchedule::vigoda(),
            None,
            None,
            16,
        )
        .unwrap();
        let params = RoundParams::new(0.05, FlipSchedule::vigoda(), 2024);
        let sampled = pair_contraction_sampled(&g, &pair, &params, 200_000).unwrap();
        let diff = (sampled.mean_hamming - rat_f64(&exact.expected_hamming)).abs();
        assert!(
            diff <= 3.0 * sampled.std_error.max(1e-9),
            "diff {diff:.6} vs 3se {:.6}",
            3.0 * sampled.std_error
        );
    }

    #[test]
    fn coalescence_identical_starts_is_zero() {
        let g = Graph::cycle(6).unwrap();
        let c = Coloring::new(vec![1, 2, 1, 2, 1, 2], 5).unwrap();
        let params = RoundParams::new(0.1, FlipSchedule::vigoda(), 1);
        let rows = coalescence_experiment(&g, &[(c.clone(), c)], &params, 10);
        assert_eq!(rows[0].coalesced_at, Some(0));
    }

    #[test]
    fn coalescence_censoring() {
        let g = Graph::cycle(6).unwrap();
        let a = Coloring::new(vec![1, 2, 1, 2, 1, 2], 5).unwrap();
        let b = Coloring::new(vec![2, 1, 2, 1, 2, 1], 5).unwrap();
        // alpha = 0: chains never move, never coalesce.
        let params = RoundParams::new(0.0, FlipSchedule::vigoda(), 1);
        let rows = coalescence_experiment(&g, &[(a, b)], &params, 5);
        assert_eq!(rows[0].coalesced_at, None);
        assert_eq!(median_coalescence(&rows, 5), 5.0);
    }
}
