//! One-round coupling of two chains that differ at a single vertex, plus
//! the experiments built on it: exact contraction, the distance-2
//! disagreement mass, agreement probability at the disagreement vertex,
//! and grand-coupling coalescence runs.
//!
//! # Coin structure
//!
//! Every cluster of either chain joins exactly one *coin*: one shared
//! Bernoulli(alpha) activation draw plus one shared flip point in `[0,1)`.
//! A coin carries at most one cluster per chain with nested flip budgets,
//! so the pair flips together on the overlap of their budgets. Seen from a
//! single chain this is exactly one independent activation coin and one
//! independent flip coin per cluster: each marginal is the plain round,
//! verbatim.
//!
//! Per color `c` at the disagreement vertex `v*` (chain colors `cx`, `cy`):
//!
//! - available colors give `VStar(c)` coins: the two `{v*}` singletons flip
//!   together and erase the disagreement;
//! - a color on `d >= 1` neighbors gives a family: the through-`v*`
//!   components (sizes `A` in chain Y, `B` in chain X) and the per-neighbor
//!   slot components (sizes `a_i` in X, `b_i` in Y, duplicates zeroed).
//!   Two candidate pairings exist — designated largest slot with the
//!   opposite through component, or the two through components together
//!   and slots with slots — and the build evaluates the exact first-order
//!   Hamming growth of both and keeps the cheaper one. (Within one chain
//!   every slot component overlaps the through component, so activation
//!   coins can never be shared inside a chain; no single static pairing
//!   dominates both orders of the sequential case analysis.)
//! - every other cluster is identical in both chains and couples by the
//!   identity on one `Shared` coin.
//!
//! Components larger than six vertices are phantoms: no coin, no flip.

pub mod exact;
pub mod experiments;
pub mod metric;
pub mod phi;

pub use exact::ExactCoupling;
pub use experiments::{
    adjacent_pairs, coalescence_experiment, contraction_sweep_exact, dist2_mass_exact,
    median_coalescence, pair_contraction_exact, pair_contraction_sampled, CoalescenceRow,
    ContractionSweep, Dist2Report, PairContraction,
};
pub use metric::WeightedMetric;
pub use phi::{phi, phi_scan, phi_value, PhiReport, PhiScan};

use crate::coins::{fires, unit, Purpose};
use crate::coloring::{available_colors, hamming, is_proper, AdjacentPair, Color, Coloring};
use crate::cluster::{alternating_component, enumerate_clusters, Cluster, ClusterSet};
use crate::dynamics::{survivors, RoundParams};
use crate::graph::{Graph, Vertex};
use crate::rat::{rat_f64, Rat};
use crate::schedule::FlipSchedule;
use num::{One, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CouplingError {
    #[error("coupled round requires proper colorings")]
    ImproperInput,
    #[error("exact enumeration budget exceeded: {coins} activation coins (limit {limit})")]
    CoinBudget { coins: usize, limit: usize },
    #[error("internal: cluster partition incomplete")]
    PartitionIncomplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    X,
    Y,
}

/// A segment of a coin's flip point; `fires` is a bitmask over the coin's
/// member list.
#[derive(Debug, Clone)]
pub struct Segment {
    pub len: Rat,
    pub fires: u8,
}

/// One coin: a shared activation draw and a shared flip point for at most
/// one cluster per chain.
#[derive(Debug, Clone)]
pub struct CoinGroup {
    pub members: Vec<(Side, usize)>,
    pub segments: Vec<Segment>,
    words: [u64; 3],
}

/// The full coin decomposition for an adjacent pair.
#[derive(Debug)]
pub struct CoupledStructure {
    pub x_set: ClusterSet,
    pub y_set: ClusterSet,
    pub groups: Vec<CoinGroup>,
    /// Coin of each X / Y cluster.
    pub act_of_x: Vec<usize>,
    pub act_of_y: Vec<usize>,
}

impl CoupledStructure {
    pub fn num_coins(&self) -> usize {
        self.groups.len()
    }

    /// Layout invariants: segments tile `[0,1)` and every member's fire
    /// mass equals its schedule budget.
    pub fn validate(&self, schedule: &FlipSchedule) -> bool {
        for group in &self.groups {
            let total: Rat = group.segments.iter().map(|s| s.len.clone()).sum();
            if total != Rat::one() {
                return false;
            }
            for (bit, &(side, idx)) in group.members.iter().enumerate() {
                let size = match side {
                    Side::X => self.x_set.get(idx).size(),
                    Side::Y => self.y_set.get(idx).size(),
                };
                let mass: Rat = group
                    .segments
                    .iter()
                    .filter(|s| s.fires & (1 << bit) != 0)
                    .map(|s| s.len.clone())
                    .sum();
                if mass != schedule.prob(size) {
                    return false;
                }
            }
        }
        true
    }
}

/// Builds a two-member coin with nested budgets.
fn nested_coin(
    x: Option<usize>,
    y: Option<usize>,
    bx: Rat,
    by: Rat,
    words: [u64; 3],
) -> CoinGroup {
    let mut members = Vec::new();
    let x_bit = x.map(|i| {
        members.push((Side::X, i));
        members.len() - 1
    });
    let y_bit = y.map(|i| {
        members.push((Side::Y, i));
        members.len() - 1
    });
    let bx_eff = if x.is_some() { bx } else { Rat::zero() };
    let by_eff = if y.is_some() { by } else { Rat::zero() };
    let lo = bx_eff.clone().min(by_eff.clone());
    let hi = bx_eff.clone().max(by_eff.clone());
    let both = x_bit.map_or(0, |b| 1u8 << b) | y_bit.map_or(0, |b| 1u8 << b);
    let hi_only = if bx_eff >= by_eff {
        x_bit.map_or(0, |b| 1u8 << b)
    } else {
        y_bit.map_or(0, |b| 1u8 << b)
    };
    let mut segments = Vec::new();
    let mut push = |len: Rat, fires: u8| {
        if len > Rat::zero() {
            segments.push(Segment { len, fires });
        }
    };
    push(lo.clone(), both);
    push(&hi - &lo, hi_only);
    push(Rat::one() - &hi, 0);
    CoinGroup { members, segments, words }
}

struct FamilyData {
    a: Vec<usize>,
    b: Vec<usize>,
    i_max: usize,
    j_max: usize,
    /// X-side slot clusters (None: duplicate or oversized).
    xs: Vec<Option<usize>>,
    ys: Vec<Option<usize>>,
    /// Through components: `t_hat` in X (size B), `s_hat` in Y (size A).
    t_hat: Option<usize>,
    s_hat: Option<usize>,
    f_a: Rat,
    f_b: Rat,
}

/// Builds the coin decomposition. Every cluster of either chain gets exactly
/// one coin; the construction fails loudly if not.
pub fn build_coupled(
    g: &Graph,
    pair: &AdjacentPair,
    schedule: &FlipSchedule,
) -> Result<CoupledStructure, CouplingError> {
    if !is_proper(g, pair.x()) || !is_proper(g, pair.y()) {
        return Err(CouplingError::ImproperInput);
    }
    let x_set = enumerate_clusters(g, pair.x());
    let y_set = enumerate_clusters(g, pair.y());
    let v_star = pair.v_star();
    let (cx, cy) = (pair.color_x(), pair.color_y());
    let k = pair.x().k();

    let find = |set: &ClusterSet, vs: &BTreeSet<Vertex>, c1: Color, c2: Color| -> Option<usize> {
        if vs.len() > crate::cluster::MAX_CLUSTER_SIZE {
            return None;
        }
        let cl = Cluster {
            vertices: vs.iter().copied().collect(),
            colors: (c1.min(c2), c1.max(c2)),
        };
        let idx = set.index_of(&cl);
        debug_assert!(idx.is_some(), "component of size <= 6 must be a cluster");
        idx
    };

    let mut groups: Vec<CoinGroup> = Vec::new();
    let mut of_x: Vec<Option<usize>> = vec![None; x_set.len()];
    let mut of_y: Vec<Option<usize>> = vec![None; y_set.len()];
    let mut add = |coin: CoinGroup, of_x: &mut Vec<Option<usize>>, of_y: &mut Vec<Option<usize>>| {
        let idx = groups.len();
        for &(side, i) in &coin.members {
            match side {
                Side::X => {
                    assert!(of_x[i].is_none(), "X cluster on two coins");
                    of_x[i] = Some(idx);
                }
                Side::Y => {
                    assert!(of_y[i].is_none(), "Y cluster on two coins");
                    of_y[i] = Some(idx);
                }
            }
        }
        groups.push(coin);
    };

    // Available-color singletons at v*: identity coupling, budgets 1.
    for c in available_colors(g, pair.x(), v_star) {
        let vs: BTreeSet<Vertex> = [v_star].into();
        let xi = find(&x_set, &vs, cx, c).expect("v* singleton exists in X");
        let yi = find(&y_set, &vs, cy, c).expect("v* singleton exists in Y");
        add(
            nested_coin(Some(xi), Some(yi), Rat::one(), Rat::one(), [2, c as u64, 0]),
            &mut of_x,
            &mut of_y,
        );
    }

    // Per-color families with an adaptive pairing choice.
    for c in 1..=k {
        let ws = pair.neighbors_with_color(g, c);
        if ws.is_empty() {
            continue;
        }
        let fam = {
            let side = |sigma: &Coloring, other: Color| {
                let mut seen: Vec<BTreeSet<Vertex>> = Vec::new();
                let mut comps: Vec<Option<BTreeSet<Vertex>>> = Vec::new();
                for &w in &ws {
                    let comp = alternating_component(g, sigma, w, other);
                    if seen.iter().any(|e| e == &comp) {
                        comps.push(None);
                    } else {
                        seen.push(comp.clone());
                        comps.push(Some(comp));
                    }
                }
                comps
            };
            let s_comps = side(pair.x(), cy);
            let t_comps = side(pair.y(), cx);
            let a: Vec<usize> = s_comps.iter().map(|c| c.as_ref().map_or(0, BTreeSet::len)).collect();
            let b: Vec<usize> = t_comps.iter().map(|c| c.as_ref().map_or(0, BTreeSet::len)).collect();
            let i_max = (0..a.len()).max_by_key(|&i| (a[i], std::cmp::Reverse(i))).unwrap();
            let j_max = (0..b.len()).max_by_key(|&i| (b[i], std::cmp::Reverse(i))).unwrap();
            let s_hat_set = alternating_component(g, pair.y(), v_star, c);
            let t_hat_set = alternating_component(g, pair.x(), v_star, c);
            let xs: Vec<Option<usize>> = s_comps
                .iter()
                .map(|comp| comp.as_ref().and_then(|s| find(&x_set, s, c, cy)))
                .collect();
            let ys: Vec<Option<usize>> = t_comps
                .iter()
                .map(|comp| comp.as_ref().and_then(|s| find(&y_set, s, c, cx)))
                .collect();
            let s_hat = find(&y_set, &s_hat_set, c, cy);
            let t_hat = find(&x_set, &t_hat_set, c, cx);
            let f_a = if s_hat.is_some() { schedule.prob(s_hat_set.len()) } else { Rat::zero() };
            let f_b = if t_hat.is_some() { schedule.prob(t_hat_set.len()) } else { Rat::zero() };
            FamilyData { a, b, i_max, j_max, xs, ys, t_hat, s_hat, f_a, f_b }
        };

        // Candidate pairings of the family entities across the chains.
        let d = ws.len();
        let fx = |i: usize| schedule.prob(fam.a[i]);
        let fy = |i: usize| schedule.prob(fam.b[i]);
        let mut prose: Vec<(Option<usize>, Option<usize>, Rat, Rat)> = Vec::new();
        prose.push((fam.xs[fam.i_max], fam.s_hat, fx(fam.i_max), fam.f_a.clone()));
        prose.push((fam.t_hat, fam.ys[fam.j_max], fam.f_b.clone(), fy(fam.j_max)));
        if fam.i_max != fam.j_max {
            prose.push((fam.xs[fam.j_max], fam.ys[fam.i_max], fx(fam.j_max), fy(fam.i_max)));
        }
        for i in 0..d {
            if i == fam.i_max || i == fam.j_max {
                continue;
            }
            prose.push((fam.xs[i], fam.ys[i], fx(i), fy(i)));
        }
        let mut hats: Vec<(Option<usize>, Option<usize>, Rat, Rat)> = Vec::new();
        hats.push((fam.t_hat, fam.s_hat, fam.f_b.clone(), fam.f_a.clone()));
        for i in 0..d {
            hats.push((fam.xs[i], fam.ys[i], fx(i), fy(i)));
        }

        // Exact first-order Hamming growth of a pairing: one coin active at
        // a time, everything else idle, both members flippable.
        let growth = |coins: &[(Option<usize>, Option<usize>, Rat, Rat)]| -> Rat {
            let mut total = Rat::zero();
            for (xi, yi, bx, by) in coins {
                let bx = if xi.is_some() { bx.clone() } else { Rat::zero() };
                let by = if yi.is_some() { by.clone() } else { Rat::zero() };
                let lo = bx.clone().min(by.clone());
                let hi = bx.clone().max(by.clone());
                let delta = |do_x: bool, do_y: bool| -> Rat {
                    let mut x = pair.x().clone();
                    let mut y = pair.y().clone();
                    if do_x {
                        if let Some(i) = xi {
                            x_set.get(*i).apply_flip(&mut x);
                        }
                    }
                    if do_y {
                        if let Some(i) = yi {
                            y_set.get(*i).apply_flip(&mut y);
                        }
                    }
                    Rat::from_integer((hamming(&x, &y).unwrap() as i64 - 1).into())
                };
                if lo > Rat::zero() {
                    total += &lo * delta(true, true);
                }
                if hi > lo {
                    let x_is_hi = bx >= by;
                    total += (&hi - &lo) * delta(x_is_hi, !x_is_hi);
                }
            }
            total
        };

        let chosen = if growth(&prose) <= growth(&hats) { prose } else { hats };
        for (slot, (xi, yi, bx, by)) in chosen.into_iter().enumerate() {
            if xi.is_none() && yi.is_none() {
                continue;
            }
            add(
                nested_coin(xi, yi, bx, by, [10, c as u64, slot as u64]),
                &mut of_x,
                &mut of_y,
            );
        }
    }

    // Everything else is identical in both chains: identity coupling by key.
    for xi in 0..x_set.len() {
        if of_x[xi].is_some() {
            continue;
        }
        let cl = x_set.get(xi);
        let yi = y_set.index_of(cl).ok_or(CouplingError::PartitionIncomplete)?;
        if of_y[yi].is_some() {
            return Err(CouplingError::PartitionIncomplete);
        }
        let (pres, c1, c2) = cl.key();
        let f = schedule.prob(cl.size());
        add(
            nested_coin(
                Some(xi),
                Some(yi),
                f.clone(),
                f,
                [1, pres as u64, ((c1 as u64) << 32) | c2 as u64],
            ),
            &mut of_x,
            &mut of_y,
        );
    }
    if of_y.iter().any(Option::is_none) || of_x.iter().any(Option::is_none) {
        return Err(CouplingError::PartitionIncomplete);
    }

    let cs = CoupledStructure {
        x_set,
        y_set,
        groups,
        act_of_x: of_x.into_iter().map(Option::unwrap).collect(),
        act_of_y: of_y.into_iter().map(Option::unwrap).collect(),
    };
    debug_assert!(cs.validate(schedule));
    Ok(cs)
}

/// Flip decisions of one coupled round, for trace inspection.
#[derive(Debug, Clone, Default)]
pub struct CoupledTrace {
    pub flipped_x: Vec<Cluster>,
    pub flipped_y: Vec<Cluster>,
}

/// One coupled synchronous round; each marginal is distributed exactly as
/// the plain round. Deterministic given `(params.seed, round)`.
pub fn coupled_round(
    g: &Graph,
    pair: &AdjacentPair,
    params: &RoundParams,
    round: u64,
) -> Result<(Coloring, Coloring, CoupledTrace), CouplingError> {
    let cs = build_coupled(g, pair, &params.schedule)?;
    coupled_round_with(g, pair, &cs, params, round)
}

/// Like [`coupled_round`] but reuses a prebuilt structure.
pub fn coupled_round_with(
    g: &Graph,
    pair: &AdjacentPair,
    cs: &CoupledStructure,
    params: &RoundParams,
    round: u64,
) -> Result<(Coloring, Coloring, CoupledTrace), CouplingError> {
    let coins = params.coins();
    let act: Vec<bool> = cs
        .groups
        .iter()
        .map(|p| fires(coins.keyed_coin(round, p.words, Purpose::Activation), params.alpha))
        .collect();
    let x_active: Vec<bool> = cs.act_of_x.iter().map(|&a| act[a]).collect();
    let y_active: Vec<bool> = cs.act_of_y.iter().map(|&a| act[a]).collect();
    let (x_flippable, _, _) = survivors(g, &cs.x_set, &x_active);
    let (y_flippable, _, _) = survivors(g, &cs.y_set, &y_active);

    let mut out_x = pair.x().clone();
    let mut out_y = pair.y().clone();
    let mut trace = CoupledTrace::default();
    for (gi, group) in cs.groups.iter().enumerate() {
        if !act[gi] {
            continue;
        }
        let any_eligible = group.members.iter().any(|&(side, idx)| match side {
            Side::X => x_flippable[idx],
            Side::Y => y_flippable[idx],
        });
        if !any_eligible {
            continue;
        }
        let point = unit(coins.keyed_coin(round, group.words, Purpose::Flip));
        let mut acc = 0.0f64;
        let mut mask = 0u8;
        for s in &group.segments {
            acc += rat_f64(&s.len);
            if point < acc {
                mask = s.fires;
                break;
            }
        }
        for (bit, &(side, idx)) in group.members.iter().enumerate() {
            if mask & (1 << bit) == 0 {
                continue;
            }
            match side {
                Side::X => {
                    if x_flippable[idx] {
                        cs.x_set.get(idx).apply_flip(&mut out_x);
                        trace.flipped_x.push(cs.x_set.get(idx).clone());
                    }
                }
                Side::Y => {
                    if y_flippable[idx] {
                        cs.y_set.get(idx).apply_flip(&mut out_y);
                        trace.flipped_y.push(cs.y_set.get(idx).clone());
                    }
                }
            }
        }
    }
    debug_assert!(is_proper(g, &out_x) && is_proper(g, &out_y));
    Ok((out_x, out_y, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_on_path() -> (Graph, AdjacentPair) {
        let g = Graph::path(3).unwrap();
        let x = Coloring::new(vec![2, 3, 1], 4).unwrap();
        let y = x.with_color(2, 2);
        (g, AdjacentPair::new(x, y).unwrap())
    }

    #[test]
    fn partition_covers_every_cluster_once() {
        let (g, pair) = pair_on_path();
        let cs = build_coupled(&g, &pair, &FlipSchedule::vigoda()).unwrap();
        let mut seen_x = vec![0usize; cs.x_set.len()];
        let mut seen_y = vec![0usize; cs.y_set.len()];
        for group in &cs.groups {
            for &(side, idx) in &group.members {
                match side {
                    Side::X => seen_x[idx] += 1,
                    Side::Y => seen_y[idx] += 1,
                }
            }
        }
        assert!(seen_x.iter().all(|&c| c == 1));
        assert!(seen_y.iter().all(|&c| c == 1));
        assert!(cs.validate(&FlipSchedule::vigoda()));
    }

    #[test]
    fn partition_on_remark_style_cycle() {
        let g = Graph::cycle(4).unwrap();
        let x = Coloring::new(vec![1, 2, 3, 2], 4).unwrap();
        let y = x.with_color(0, 4);
        let pair = AdjacentPair::new(x, y).unwrap();
        let cs = build_coupled(&g, &pair, &FlipSchedule::cdmpp()).unwrap();
        assert_eq!(cs.x_set.len(), 12);
        assert!(cs.validate(&FlipSchedule::cdmpp()));
        assert!(cs.num_coins() <= 16, "{} coins", cs.num_coins());
    }

    #[test]
    fn alpha_zero_keeps_both_chains() {
        let (g, pair) = pair_on_path();
        let params = RoundParams::new(0.0, FlipSchedule::vigoda(), 3);
        let (x, y, trace) = coupled_round(&g, &pair, &params, 0).unwrap();
        assert_eq!(&x, pair.x());
        assert_eq!(&y, pair.y());
        assert!(trace.flipped_x.is_empty() && trace.flipped_y.is_empty());
        assert_eq!(hamming(&x, &y).unwrap(), 1);
    }

    #[test]
    fn rounds_preserve_properness() {
        let (g, pair) = pair_on_path();
        let params = RoundParams::new(0.35, FlipSchedule::vigoda(), 11);
        for round in 0..500 {
            let (x, y, _) = coupled_round(&g, &pair, &params, round).unwrap();
            assert!(is_proper(&g, &x) && is_proper(&g, &y));
        }
    }

    #[test]
    fn coalescing_flip_reaches_hamming_zero() {
        let (g, pair) = pair_on_path();
        let params = RoundParams::new(0.15, FlipSchedule::vigoda(), 5);
        let mut coalesced = false;
        for round in 0..3000 {
            let (x, y, _) = coupled_round(&g, &pair, &params, round).unwrap();
            if hamming(&x, &y).unwrap() == 0 {
                coalesced = true;
                break;
            }
        }
        assert!(coalesced, "identity coupling on the v* singleton never fired");
    }

    #[test]
    fn marginal_frequencies_match_plain_round() {
        // Empirical smoke check; the exact entrywise comparison lives in the
        // exact-engine tests.
        let (g, pair) = pair_on_path();
        let params = RoundParams::new(0.3, FlipSchedule::vigoda(), 77);
        let trials = 40_000u64;
        let mut changed_coupled = 0usize;
        let mut changed_plain = 0usize;
        for t in 0..trials {
            let (x, _, _) = coupled_round(&g, &pair, &params, t).unwrap();
            if &x != pair.x() {
                changed_coupled += 1;
            }
            let (px, _) = crate::dynamics::distributed_round(&g, pair.x(), &params, t).unwrap();
            if &px != pair.x() {
                changed_plain += 1;
            }
        }
        let a = changed_coupled as f64 / trials as f64;
        let b = changed_plain as f64 / trials as f64;
        assert!((a - b).abs() < 0.01, "coupled {a:.4} vs plain {b:.4}");
    }
}
