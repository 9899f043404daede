//! Exact enumeration of the coupled round's probability space.
//!
//! Activation patterns are enumerated over the activation coins (one
//! Bernoulli each); given a pattern, flippability in each chain is
//! deterministic and every coin group contributes its segment layout,
//! masked down to the flippable members. Each leaf carries an exact
//! rational probability, and the leaf probabilities of a single chain
//! marginalize to the plain round's law.

use super::{build_coupled, CoupledStructure, CouplingError, Side};
use crate::coloring::{hamming, AdjacentPair, Coloring};
use crate::cluster::{cluster_distances_from, colors_intersect, neighboring, overlap};
use crate::graph::Graph;
use crate::rat::Rat;
use crate::schedule::FlipSchedule;
use num::{One, Zero};
use std::collections::BTreeMap;

/// Default ceiling on the number of activation coins in exact mode.
pub const DEFAULT_COIN_BUDGET: usize = 16;
const MAX_COIN_BUDGET: usize = 24;

pub struct ExactCoupling<'g> {
    pub g: &'g Graph,
    pub pair: AdjacentPair,
    pub cs: CoupledStructure,
    alpha: Rat,
    /// Per activation coin: mask over coins whose X-side cluster interferes
    /// with this coin's X-side cluster.
    inter_x: Vec<u32>,
    inter_y: Vec<u32>,
    pow_act: Vec<Rat>,
    pow_inact: Vec<Rat>,
    /// Per group: member budgets aren't needed here, but per-segment masks
    /// are; segments are stored on the structure itself.
    group_members_x: Vec<Vec<(u8, usize)>>, // (bit, cluster idx) of X members
    group_members_y: Vec<Vec<(u8, usize)>>,
}

fn side_interference(
    set: &crate::cluster::ClusterSet,
    act_of: &[usize],
    n_coins: usize,
    g: &Graph,
) -> Vec<u32> {
    let mut inter = vec![0u32; n_coins];
    let m = set.len();
    for i in 0..m {
        for j in (i + 1)..m {
            let (a, b) = (set.get(i), set.get(j));
            if overlap(a, b) || (colors_intersect(a, b) && neighboring(g, a, b)) {
                inter[act_of[i]] |= 1 << act_of[j];
                inter[act_of[j]] |= 1 << act_of[i];
            }
        }
    }
    inter
}

impl<'g> ExactCoupling<'g> {
    pub fn new(
        g: &'g Graph,
        pair: &AdjacentPair,
        alpha: Rat,
        schedule: &FlipSchedule,
        coin_budget: usize,
    ) -> Result<Self, CouplingError> {
        let cs = build_coupled(g, pair, schedule)?;
        let limit = coin_budget.min(MAX_COIN_BUDGET);
        if cs.num_coins() > limit {
            return Err(CouplingError::CoinBudget { coins: cs.num_coins(), limit });
        }
        let n = cs.num_coins();
        let inter_x = side_interference(&cs.x_set, &cs.act_of_x, n, g);
        let inter_y = side_interference(&cs.y_set, &cs.act_of_y, n, g);
        let one_minus = Rat::one() - &alpha;
        let mut pow_act = vec![Rat::one()];
        let mut pow_inact = vec![Rat::one()];
        for i in 1..=n {
            pow_act.push(&pow_act[i - 1] * &alpha);
            pow_inact.push(&pow_inact[i - 1] * &one_minus);
        }
        let group_members_x: Vec<Vec<(u8, usize)>> = cs
            .groups
            .iter()
            .map(|gr| {
                gr.members
                    .iter()
                    .enumerate()
                    .filter(|(_, (s, _))| *s == Side::X)
                    .map(|(bit, (_, idx))| (bit as u8, *idx))
                    .collect()
            })
            .collect();
        let group_members_y: Vec<Vec<(u8, usize)>> = cs
            .groups
            .iter()
            .map(|gr| {
                gr.members
                    .iter()
                    .enumerate()
                    .filter(|(_, (s, _))| *s == Side::Y)
                    .map(|(bit, (_, idx))| (bit as u8, *idx))
                    .collect()
            })
            .collect();
        Ok(ExactCoupling {
            g,
            pair: pair.clone(),
            cs,
            alpha,
            inter_x,
            inter_y,
            pow_act,
            pow_inact,
            group_members_x,
            group_members_y,
        })
    }

    pub fn alpha(&self) -> &Rat {
        &self.alpha
    }

    pub fn coins(&self) -> usize {
        self.cs.num_coins()
    }

    /// Visits every outcome `(X', Y', probability)` of one coupled round.
    pub fn for_each_outcome(&self, mut visit: impl FnMut(&Coloring, &Coloring, &Rat)) {
        let n = self.cs.num_coins();
        let n_groups = self.cs.groups.len();
        for act in 0u32..(1u32 << n) {
            let na = act.count_ones() as usize;
            let p_act = &self.pow_act[na] * &self.pow_inact[n - na];
            if p_act.is_zero() {
                continue;
            }
            // Flippable flags per coin and side.
            let flip_ok_x = |coin: usize| act & (1 << coin) != 0 && act & self.inter_x[coin] == 0;
            let flip_ok_y = |coin: usize| act & (1 << coin) != 0 && act & self.inter_y[coin] == 0;

            // Per group: effective branches after masking non-flippable
            // members, with identical branches merged.
            let mut branch_groups: Vec<(usize, Vec<(u8, Rat)>)> = Vec::new();
            for gi in 0..n_groups {
                let mut eligible = 0u8;
                for &(bit, idx) in &self.group_members_x[gi] {
                    if flip_ok_x(self.cs.act_of_x[idx]) {
                        eligible |= 1 << bit;
                    }
                }
                for &(bit, idx) in &self.group_members_y[gi] {
                    if flip_ok_y(self.cs.act_of_y[idx]) {
                        eligible |= 1 << bit;
                    }
                }
                if eligible == 0 {
                    continue;
                }
                let mut merged: BTreeMap<u8, Rat> = BTreeMap::new();
                for s in &self.cs.groups[gi].segments {
                    let eff = s.fires & eligible;
                    *merged.entry(eff).or_insert_with(Rat::zero) += s.len.clone();
                }
                if merged.len() == 1 && merged.contains_key(&0) {
                    continue;
                }
                branch_groups.push((gi, merged.into_iter().collect()));
            }
            self.recurse(&branch_groups, 0, p_act, &mut Vec::new(), &mut visit);
        }
    }

    fn recurse(
        &self,
        branches: &[(usize, Vec<(u8, Rat)>)],
        depth: usize,
        prob: Rat,
        chosen: &mut Vec<(usize, u8)>,
        visit: &mut impl FnMut(&Coloring, &Coloring, &Rat),
    ) {
        if prob.is_zero() {
            return;
        }
        if depth == branches.len() {
            let mut x = self.pair.x().clone();
            let mut y = self.pair.y().clone();
            for &(gi, mask) in chosen.iter() {
                if mask == 0 {
                    continue;
                }
                for &(bit, idx) in &self.group_members_x[gi] {
                    if mask & (1 << bit) != 0 {
                        self.cs.x_set.get(idx).apply_flip(&mut x);
                    }
                }
                for &(bit, idx) in &self.group_members_y[gi] {
                    if mask & (1 << bit) != 0 {
                        self.cs.y_set.get(idx).apply_flip(&mut y);
                    }
                }
            }
            visit(&x, &y, &prob);
            return;
        }
        let (gi, options) = &branches[depth];
        for (mask, len) in options {
            if len.is_zero() {
                continue;
            }
            chosen.push((*gi, *mask));
            self.recurse(branches, depth + 1, &prob * len, chosen, visit);
            chosen.pop();
        }
    }

    /// Exact `E[H(X', Y')]`.
    pub fn expected_hamming(&self) -> Rat {
        let mut acc = Rat::zero();
        self.for_each_outcome(|x, y, p| {
            let h = hamming(x, y).expect("same domain");
            if h > 0 {
                acc += p * Rat::from_integer(h.into());
            }
        });
        acc
    }

    /// Exact probability that the disagreement vertex agrees after the round.
    pub fn agree_probability(&self) -> Rat {
        let v = self.pair.v_star();
        let mut acc = Rat::zero();
        self.for_each_outcome(|x, y, p| {
            if x.color(v) == y.color(v) {
                acc += p;
            }
        });
        acc
    }

    /// Exact marginal law of the X chain after one coupled round.
    pub fn x_marginal(&self) -> BTreeMap<Vec<crate::coloring::Color>, Rat> {
        let mut acc: BTreeMap<Vec<crate::coloring::Color>, Rat> = BTreeMap::new();
        self.for_each_outcome(|x, _, p| {
            *acc.entry(x.colors().to_vec()).or_insert_with(Rat::zero) += p;
        });
        acc.retain(|_, v| !v.is_zero());
        acc
    }

    /// Exact marginal law of the Y chain after one coupled round.
    pub fn y_marginal(&self) -> BTreeMap<Vec<crate::coloring::Color>, Rat> {
        let mut acc: BTreeMap<Vec<crate::coloring::Color>, Rat> = BTreeMap::new();
        self.for_each_outcome(|_, y, p| {
            *acc.entry(y.colors().to_vec()).or_insert_with(Rat::zero) += p;
        });
        acc.retain(|_, v| !v.is_zero());
        acc
    }

    /// Exact `sum_T |T| P[X'(T) != Y'(T)]` over clusters at cluster-graph
    /// distance exactly 2 from the disagreement (computed in the X chain;
    /// such clusters are identical in both chains).
    pub fn dist2_mass(&self) -> Rat {
        let dists = cluster_distances_from(self.g, &self.cs.x_set, self.pair.v_star());
        let targets: Vec<usize> =
            (0..self.cs.x_set.len()).filter(|&i| dists[i] == Some(2)).collect();
        if targets.is_empty() {
            return Rat::zero();
        }
        let mut mass = vec![Rat::zero(); targets.len()];
        self.for_each_outcome(|x, y, p| {
            for (slot, &t) in targets.iter().enumerate() {
                let cl = self.cs.x_set.get(t);
                if cl.vertices.iter().any(|&v| x.color(v) != y.color(v)) {
                    mass[slot] += p;
                }
            }
        });
        targets
            .iter()
            .zip(mass)
            .map(|(&t, m)| m * Rat::from_integer(self.cs.x_set.get(t).size().into()))
            .sum()
    }

    /// Exact `E[metric(X', Y')]` under the weighted metric.
    pub fn expected_weighted(&self, metric: &mut super::metric::WeightedMetric) -> Rat {
        let mut acc = Rat::zero();
        self.for_each_outcome(|x, y, p| {
            let d = metric.distance(x, y);
            if !d.is_zero() {
                acc += p * d;
            }
        });
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{enumerate_colorings, exact_row};
    use crate::coloring::Coloring;
    use crate::rat::{rat, rat_i};
    use crate::schedule::FlipSchedule;

    fn edge_pair() -> (Graph, AdjacentPair) {
        let g = Graph::path(2).unwrap();
        let x = Coloring::new(vec![1, 2], 3).unwrap();
        let y = x.with_color(0, 3);
        (g, AdjacentPair::new(x, y).unwrap())
    }

    #[test]
    fn probabilities_sum_to_one() {
        let (g, pair) = edge_pair();
        let ec = ExactCoupling::new(&g, &pair, rat(1, 10), &FlipSchedule::vigoda(), 16).unwrap();
        let mut total = Rat::zero();
        ec.for_each_outcome(|_, _, p| total += p);
        assert_eq!(total, rat_i(1));
    }

    #[test]
    fn marginals_match_the_plain_round_rows_exactly() {
        // Coin-space enumeration of the coupled round against the exact
        // transition rows, entrywise in exact rationals.
        for (g, x, y) in [
            (Graph::path(2).unwrap(), vec![1u16, 2], vec![3u16, 2]),
            (Graph::path(3).unwrap(), vec![1, 2, 1], vec![3, 2, 1]),
            (Graph::path(3).unwrap(), vec![1, 2, 1], vec![1, 3, 1]),
            (Graph::cycle(4).unwrap(), vec![1, 2, 3, 2], vec![4, 2, 3, 2]),
        ] {
            for schedule in [FlipSchedule::vigoda(), FlipSchedule::cdmpp()] {
                let k = 4;
                let x = Coloring::new(x.clone(), k).unwrap();
                let y = Coloring::new(y.clone(), k).unwrap();
                let pair = AdjacentPair::new(x.clone(), y.clone()).unwrap();
                let alpha = rat(1, 10);
                let ec = ExactCoupling::new(&g, &pair, alpha.clone(), &schedule, 16).unwrap();
                let space = enumerate_colorings(&g, k, 100_000).unwrap();
                for (marginal, start) in [(ec.x_marginal(), &x), (ec.y_marginal(), &y)] {
                    let row = exact_row(&g, &space, start, &alpha, &schedule, 16).unwrap();
                    assert_eq!(marginal.len(), row.len(), "support sizes differ");
                    for (j, p) in &row {
                        let key = space.get(*j).colors().to_vec();
                        assert_eq!(
                            marginal.get(&key),
                            Some(p),
                            "entry mismatch at state {j} under {}",
                            schedule.name()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_zero_no_motion() {
        let (g, pair) = edge_pair();
        let ec = ExactCoupling::new(&g, &pair, Rat::zero(), &FlipSchedule::vigoda(), 16).unwrap();
        assert_eq!(ec.expected_hamming(), rat_i(1));
        assert_eq!(ec.agree_probability(), Rat::zero());
        assert_eq!(ec.dist2_mass(), Rat::zero());
    }

    #[test]
    fn coin_budget_is_enforced() {
        let (g, pair) = edge_pair();
        assert!(matches!(
            ExactCoupling::new(&g, &pair, rat(1, 10), &FlipSchedule::vigoda(), 3),
            Err(CouplingError::CoinBudget { .. })
        ));
    }
}
