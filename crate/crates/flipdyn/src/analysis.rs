//! Exact finite-state analysis of the round on tiny instances: transition
//! matrices in exact rationals, stationary distributions, total-variation
//! mixing profiles, and ergodicity checks.
//!
//! Everything here enumerates the full probability space of one round:
//! all activation subsets of the cluster set, then all flip subsets of the
//! surviving clusters. Budgets are loud errors, never silent truncation.

use crate::coloring::{is_proper, Color, Coloring};
use crate::cluster::{colors_intersect, enumerate_clusters, neighboring, overlap};
use crate::dynamics::{run_chain, RoundParams};
use crate::graph::Graph;
use crate::rat::{rat, rat_f64, Rat};
use crate::schedule::FlipSchedule;
use num::{One, Zero};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("state space budget exceeded: more than {0} proper colorings")]
    StateBudget(usize),
    #[error("cluster budget exceeded: a state has {clusters} clusters (limit {limit})")]
    ClusterBudget { clusters: usize, limit: usize },
    #[error("chain is not irreducible; no unique stationary distribution")]
    Reducible,
    #[error("power iteration did not reach tolerance {0} in {1} iterations")]
    NoConvergence(f64, usize),
    #[error("coloring not in the enumerated state space")]
    UnknownState,
    #[error("exact solve supports at most {0} states, got {1}")]
    ExactSolveTooLarge(usize, usize),
}

/// Canonical enumeration of all proper k-colorings of a graph.
#[derive(Debug, Clone)]
pub struct StateSpace {
    states: Vec<Coloring>,
    index: HashMap<Vec<Color>, usize>,
    k: Color,
}

impl StateSpace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Coloring] {
        &self.states
    }

    pub fn get(&self, i: usize) -> &Coloring {
        &self.states[i]
    }

    pub fn k(&self) -> Color {
        self.k
    }

    pub fn index_of(&self, c: &Coloring) -> Option<usize> {
        self.index.get(c.colors()).copied()
    }
}

pub const DEFAULT_STATE_BUDGET: usize = 100_000;
pub const DEFAULT_CLUSTER_BUDGET: usize = 16;

fn enumerate_rec(
    g: &Graph,
    k: Color,
    v: usize,
    current: &mut Vec<Color>,
    states: &mut Vec<Coloring>,
    budget: usize,
) -> Result<(), AnalysisError> {
    if v == g.n() {
        if states.len() == budget {
            return Err(AnalysisError::StateBudget(budget));
        }
        states.push(Coloring::new(current.clone(), k).expect("colors in range"));
        return Ok(());
    }
    'next: for c in 1..=k {
        for &w in g.neighbors(v as u32) {
            if (w as usize) < v && current[w as usize] == c {
                continue 'next;
            }
        }
        current[v] = c;
        enumerate_rec(g, k, v + 1, current, states, budget)?;
    }
    Ok(())
}

/// All proper k-colorings, in lexicographic order of the color vectors.
pub fn enumerate_colorings(g: &Graph, k: Color, budget: usize) -> Result<StateSpace, AnalysisError> {
    let mut states = Vec::new();
    let mut current = vec![0 as Color; g.n()];
    enumerate_rec(g, k, 0, &mut current, &mut states, budget)?;
    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.colors().to_vec(), i))
        .collect();
    Ok(StateSpace { states, index, k })
}

/// Row-indexed sparse transition matrix with exact rational entries.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    rows: Vec<Vec<(usize, Rat)>>,
}

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, Rat)] {
        &self.rows[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> Rat {
        self.rows[i]
            .iter()
            .find(|(c, _)| *c == j)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(Rat::zero)
    }

    pub fn row_sum(&self, i: usize) -> Rat {
        self.rows[i].iter().map(|(_, p)| p.clone()).sum()
    }

    pub fn to_dense_f64(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, p) in row {
                out[i][*j] = rat_f64(p);
            }
        }
        out
    }
}

struct RoundEnumerator<'a> {
    set: crate::cluster::ClusterSet,
    inter: Vec<u32>,
    pow_a: Vec<Rat>,
    pow_b: Vec<Rat>,
    flip_p: Vec<Rat>,
    sigma: &'a Coloring,
}

impl<'a> RoundEnumerator<'a> {
    fn new(
        g: &Graph,
        sigma: &'a Coloring,
        alpha: &Rat,
        schedule: &FlipSchedule,
        cluster_budget: usize,
    ) -> Result<Self, AnalysisError> {
        let set = enumerate_clusters(g, sigma);
        let m = set.len();
        if m > cluster_budget {
            return Err(AnalysisError::ClusterBudget { clusters: m, limit: cluster_budget });
        }
        let mut inter = vec![0u32; m];
        for i in 0..m {
            for j in (i + 1)..m {
                let (a, b) = (set.get(i), set.get(j));
                if overlap(a, b) || (colors_intersect(a, b) && neighboring(g, a, b)) {
                    inter[i] |= 1 << j;
                    inter[j] |= 1 << i;
                }
            }
        }
        let one_minus = Rat::one() - alpha;
        let mut pow_a = vec![Rat::one()];
        let mut pow_b = vec![Rat::one()];
        for i in 1..=m {
            pow_a.push(&pow_a[i - 1] * alpha);
            pow_b.push(&pow_b[i - 1] * &one_minus);
        }
        let flip_p: Vec<Rat> = set.iter().map(|cl| schedule.prob(cl.size())).collect();
        Ok(RoundEnumerator { set, inter, pow_a, pow_b, flip_p, sigma })
    }

    /// Walks every positive-probability (activation subset, flip subset)
    /// outcome exactly once.
    fn for_each(&self, mut visit: impl FnMut(&Coloring, Rat)) {
        let m = self.set.len();
        for act in 0u32..(1 << m) {
            let na = act.count_ones() as usize;
            let p_act = &self.pow_a[na] * &self.pow_b[m - na];
            if p_act.is_zero() {
                continue;
            }
            let mut sure: Vec<usize> = Vec::new();
            let mut random: Vec<usize> = Vec::new();
            for i in 0..m {
                if act & (1 << i) != 0 && act & self.inter[i] == 0 {
                    if self.flip_p[i].is_one() {
                        sure.push(i);
                    } else if !self.flip_p[i].is_zero() {
                        random.push(i);
                    }
                }
            }
            let r = random.len();
            for fs in 0u32..(1 << r) {
                let mut tau = self.sigma.clone();
                for &i in &sure {
                    self.set.get(i).apply_flip(&mut tau);
                }
                let mut p = p_act.clone();
                for (bit, &i) in random.iter().enumerate() {
                    if fs & (1 << bit) != 0 {
                        p *= &self.flip_p[i];
                        self.set.get(i).apply_flip(&mut tau);
                    } else {
                        p *= &(Rat::one() - &self.flip_p[i]);
                    }
                }
                visit(&tau, p);
            }
        }
    }
}

/// Exact distribution of one round from a single coloring, as a sparse row
/// over the state space.
pub fn exact_row(
    g: &Graph,
    space: &StateSpace,
    sigma: &Coloring,
    alpha: &Rat,
    schedule: &FlipSchedule,
    cluster_budget: usize,
) -> Result<Vec<(usize, Rat)>, AnalysisError> {
    let en = RoundEnumerator::new(g, sigma, alpha, schedule, cluster_budget)?;
    let mut acc: HashMap<usize, Rat> = HashMap::new();
    let mut missing = false;
    en.for_each(|tau, p| match space.index_of(tau) {
        Some(j) => *acc.entry(j).or_insert_with(Rat::zero) += p,
        None => missing = true,
    });
    if missing {
        return Err(AnalysisError::UnknownState);
    }
    let mut row: Vec<(usize, Rat)> = acc.into_iter().collect();
    row.sort_by_key(|(j, _)| *j);
    Ok(row)
}

/// Exact one-round transition matrix over the full state space.
pub fn transition_matrix(
    g: &Graph,
    space: &StateSpace,
    alpha: &Rat,
    schedule: &FlipSchedule,
    cluster_budget: usize,
) -> Result<TransitionMatrix, AnalysisError> {
    use rayon::prelude::*;
    let rows: Result<Vec<_>, _> = space
        .states()
        .par_iter()
        .map(|sigma| exact_row(g, space, sigma, alpha, schedule, cluster_budget))
        .collect();
    Ok(TransitionMatrix { rows: rows? })
}

/// Exact probability of one specific transition `sigma -> tau`.
pub fn transition_probability(
    g: &Graph,
    sigma: &Coloring,
    tau: &Coloring,
    alpha: &Rat,
    schedule: &FlipSchedule,
    cluster_budget: usize,
) -> Result<Rat, AnalysisError> {
    debug_assert!(is_proper(g, sigma) && is_proper(g, tau));
    let en = RoundEnumerator::new(g, sigma, alpha, schedule, cluster_budget)?;
    let mut total = Rat::zero();
    en.for_each(|out, p| {
        if out == tau {
            total += p;
        }
    });
    Ok(total)
}

/// Stationary distribution by float power iteration.
pub fn stationary_power(
    tm: &TransitionMatrix,
    tol: f64,
    max_iters: usize,
) -> Result<Vec<f64>, AnalysisError> {
    if !check_ergodicity(tm).irreducible {
        return Err(AnalysisError::Reducible);
    }
    let n = tm.n();
    let dense = tm.to_dense_f64();
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..max_iters {
        let mut next = vec![0.0; n];
        for i in 0..n {
            let xi = x[i];
            for j in 0..n {
                next[j] += xi * dense[i][j];
            }
        }
        let norm: f64 = next.iter().sum();
        for v in &mut next {
            *v /= norm;
        }
        let l1: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if l1 <= tol {
            return Ok(x);
        }
    }
    Err(AnalysisError::NoConvergence(tol, max_iters))
}

/// Exact stationary distribution.
///
/// The transition kernel never looks at color identities, so states with the
/// same color pattern (colors renamed by first appearance) carry equal
/// stationary mass. We verify that exact lumpability holds for the pattern
/// partition and solve the small quotient system; if the verification fails
/// the dense rational solve runs instead.
pub fn stationary_exact(
    tm: &TransitionMatrix,
    space: &StateSpace,
) -> Result<Vec<Rat>, AnalysisError> {
    if !check_ergodicity(tm).irreducible {
        return Err(AnalysisError::Reducible);
    }
    if let Some(pi) = stationary_exact_lumped(tm, space) {
        return Ok(pi);
    }
    stationary_exact_dense(tm)
}

fn color_pattern(c: &Coloring) -> Vec<Color> {
    let mut rename: HashMap<Color, Color> = HashMap::new();
    let mut next: Color = 1;
    c.colors()
        .iter()
        .map(|&col| {
            *rename.entry(col).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

fn stationary_exact_lumped(tm: &TransitionMatrix, space: &StateSpace) -> Option<Vec<Rat>> {
    let n = tm.n();
    if n != space.len() {
        return None;
    }
    let mut orbit_of: Vec<usize> = Vec::with_capacity(n);
    let mut orbit_ids: HashMap<Vec<Color>, usize> = HashMap::new();
    for s in space.states() {
        let pat = color_pattern(s);
        let next = orbit_ids.len();
        orbit_of.push(*orbit_ids.entry(pat).or_insert(next));
    }
    let m = orbit_ids.len();
    if m == n {
        return None; // nothing to gain
    }
    // Row signatures: mass sent into each orbit; must agree within an orbit.
    let mut quotient: Vec<Option<Vec<Rat>>> = vec![None; m];
    let mut sizes = vec![0usize; m];
    for i in 0..n {
        let o = orbit_of[i];
        sizes[o] += 1;
        let mut sig = vec![Rat::zero(); m];
        for (j, p) in tm.row(i) {
            sig[orbit_of[*j]] += p.clone();
        }
        match &quotient[o] {
            None => quotient[o] = Some(sig),
            Some(prev) => {
                if prev != &sig {
                    return None; // not lumpable; caller falls back
                }
            }
        }
    }
    let rows: Vec<Vec<(usize, Rat)>> = quotient
        .into_iter()
        .map(|sig| {
            sig.unwrap()
                .into_iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero())
                .collect()
        })
        .collect();
    let qtm = TransitionMatrix { rows };
    let qpi = stationary_exact_dense(&qtm).ok()?;
    Some(
        (0..n)
            .map(|i| &qpi[orbit_of[i]] / rat(sizes[orbit_of[i]] as i64, 1))
            .collect(),
    )
}

/// Dense rational Gaussian elimination on `pi (P - I) = 0` with the
/// normalization `sum pi = 1`.
pub fn stationary_exact_dense(tm: &TransitionMatrix) -> Result<Vec<Rat>, AnalysisError> {
    let n = tm.n();
    const LIMIT: usize = 200;
    if n > LIMIT {
        return Err(AnalysisError::ExactSolveTooLarge(LIMIT, n));
    }
    if !check_ergodicity(tm).irreducible {
        return Err(AnalysisError::Reducible);
    }
    // Unknowns pi_j; equation j says sum_i pi_i P(i,j) - pi_j = 0, with the
    // last equation replaced by the normalization sum_j pi_j = 1.
    let mut a = vec![vec![Rat::zero(); n + 1]; n];
    for i in 0..n {
        for (j, p) in tm.row(i) {
            a[*j][i] += p.clone();
        }
    }
    for (j, row) in a.iter_mut().enumerate() {
        row[j] -= Rat::one();
    }
    for x in a[n - 1].iter_mut().take(n) {
        *x = Rat::one();
    }
    a[n - 1][n] = Rat::one();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(AnalysisError::Reducible)?;
        a.swap(col, pivot);
        let inv = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x /= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..=n {
                    let sub = &factor * &a[col][c];
                    a[r][c] -= sub;
                }
            }
        }
    }
    Ok((0..n).map(|i| a[i][n].clone()).collect())
}

/// Total variation distance between float distributions.
pub fn tv_f64(mu: &[f64], nu: &[f64]) -> f64 {
    0.5 * mu.iter().zip(nu).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Exact total variation distance.
pub fn tv_exact(mu: &[Rat], nu: &[Rat]) -> Rat {
    let sum: Rat = mu
        .iter()
        .zip(nu)
        .map(|(a, b)| if a >= b { a - b } else { b - a })
        .sum();
    sum / rat(2, 1)
}

#[derive(Debug, Clone)]
pub struct MixingProfile {
    /// `curve[t]` = worst-start total variation distance to pi after t rounds.
    pub curve: Vec<f64>,
    /// First t with curve <= 1/4, if reached within the horizon.
    pub t_mix: Option<usize>,
}

/// Worst-start TV curve of the matrix powers against `pi`.
pub fn mixing_profile(tm: &TransitionMatrix, pi: &[f64], t_max: usize) -> MixingProfile {
    let n = tm.n();
    let dense = tm.to_dense_f64();
    let mut pow: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            r
        })
        .collect();
    let mut curve = Vec::with_capacity(t_max + 1);
    let mut t_mix = None;
    for t in 0..=t_max {
        let worst = pow.iter().map(|row| tv_f64(row, pi)).fold(0.0f64, f64::max);
        curve.push(worst);
        if t_mix.is_none() && worst <= 0.25 {
            t_mix = Some(t);
        }
        if t == t_max {
            break;
        }
        pow = pow
            .iter()
            .map(|row| {
                let mut next = vec![0.0; n];
                for (i, &x) in row.iter().enumerate() {
                    if x != 0.0 {
                        for j in 0..n {
                            next[j] += x * dense[i][j];
                        }
                    }
                }
                next
            })
            .collect();
    }
    MixingProfile { curve, t_mix }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ergodicity {
    pub irreducible: bool,
    pub aperiodic: bool,
}

/// Strong connectivity plus aperiodicity of the support digraph.
pub fn check_ergodicity(tm: &TransitionMatrix) -> Ergodicity {
    let n = tm.n();
    if n == 0 {
        return Ergodicity { irreducible: false, aperiodic: false };
    }
    let fwd: Vec<Vec<usize>> = (0..n)
        .map(|i| tm.row(i).iter().filter(|(_, p)| !p.is_zero()).map(|(j, _)| *j).collect())
        .collect();
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, out) in fwd.iter().enumerate() {
        for &j in out {
            rev[j].push(i);
        }
    }
    let reach = |adj: &Vec<Vec<usize>>| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    };
    let irreducible = reach(&fwd).iter().all(|&b| b) && reach(&rev).iter().all(|&b| b);
    let all_self_loops = (0..n).all(|i| fwd[i].contains(&i));
    let aperiodic = if all_self_loops {
        true
    } else if irreducible {
        // gcd of (level(u) + 1 - level(v)) over edges, via BFS levels.
        let mut level = vec![usize::MAX; n];
        level[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for &v in &fwd[u] {
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut g = 0i64;
        for (u, out) in fwd.iter().enumerate() {
            for &v in out {
                let diff = level[u] as i64 + 1 - level[v] as i64;
                g = gcd(g, diff.abs());
            }
        }
        g == 1
    } else {
        false
    };
    Ergodicity { irreducible, aperiodic }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Histogram of `samples` independent chains after `t` rounds from a fixed
/// start; chain `i` uses seed `params.seed + i`.
pub fn empirical_distribution(
    g: &Graph,
    space: &StateSpace,
    start: &Coloring,
    params: &RoundParams,
    t: u64,
    samples: usize,
) -> Result<Vec<f64>, AnalysisError> {
    use rayon::prelude::*;
    space.index_of(start).ok_or(AnalysisError::UnknownState)?;
    let fast = g.n() <= 64;
    let counts = (0..samples)
        .into_par_iter()
        .try_fold(
            || vec![0usize; space.len()],
            |mut acc, i| {
                let p = RoundParams::new(
                    params.alpha,
                    params.schedule.clone(),
                    params.seed.wrapping_add(i as u64),
                );
                let end = if fast {
                    let mut runner = crate::dynamics::ChainRunner::new(g, space.k(), &p)
                        .expect("n <= 64");
                    let mut sigma = start.clone();
                    for round in 0..t {
                        runner.step(&mut sigma, round);
                    }
                    sigma
                } else {
                    run_chain(g, start, &p, t).map_err(|_| AnalysisError::UnknownState)?
                };
                let idx = space.index_of(&end).ok_or(AnalysisError::UnknownState)?;
                acc[idx] += 1;
                Ok::<_, AnalysisError>(acc)
            },
        )
        .try_reduce(
            || vec![0usize; space.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;
    Ok(counts.iter().map(|&c| c as f64 / samples as f64).collect())
}
