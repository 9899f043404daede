//! The weighted distance on colorings.
//!
//! Pairs of labellings differing at a single vertex get weight
//! `1 - eta (1 - gamma)`, where `gamma` is the fraction of extremal colors
//! at the disagreement; general pairs get the minimum weight over
//! single-vertex-change paths through the full labelling space. Paths may
//! pass through improper labellings — restricting them to proper colorings
//! could exceed plain Hamming distance, which the metric never does: every
//! edge weighs at most 1, so the metric is at most the Hamming distance and
//! at least `(1 - eta)` times it.

use crate::coloring::{gamma_raw, AdjacentPair, Color, Coloring};
use crate::graph::Graph;
use crate::rat::Rat;
use num::{One, Zero};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("labelling space too large for the metric: {0} states")]
    TooLarge(usize),
}

pub struct WeightedMetric<'g> {
    g: &'g Graph,
    k: Color,
    eta: Rat,
    index: HashMap<Vec<Color>, usize>,
    states: Vec<Coloring>,
    /// single-vertex-change neighbors in the labelling space.
    adj: Vec<Vec<usize>>,
    edge_weight: HashMap<(usize, usize), Rat>,
    from_source: HashMap<usize, Vec<Rat>>,
}

const LABELLING_BUDGET: usize = 20_000;

impl<'g> WeightedMetric<'g> {
    pub fn new(g: &'g Graph, k: Color, eta: Rat) -> Result<Self, MetricError> {
        let n = g.n();
        let total = (k as usize).checked_pow(n as u32).filter(|&t| t <= LABELLING_BUDGET);
        let total = total.ok_or(MetricError::TooLarge(usize::MAX))?;
        let mut states = Vec::with_capacity(total);
        let mut current = vec![1 as Color; n];
        loop {
            states.push(Coloring::new(current.clone(), k).expect("colors in range"));
            let mut pos = 0;
            loop {
                if pos == n {
                    break;
                }
                current[pos] += 1;
                if current[pos] <= k {
                    break;
                }
                current[pos] = 1;
                pos += 1;
            }
            if pos == n {
                break;
            }
        }
        let index: HashMap<Vec<Color>, usize> = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.colors().to_vec(), i))
            .collect();
        let mut adj = vec![Vec::new(); states.len()];
        for (i, s) in states.iter().enumerate() {
            for v in 0..n as u32 {
                for c in 1..=k {
                    if c == s.color(v) {
                        continue;
                    }
                    let j = index[s.with_color(v, c).colors()];
                    adj[i].push(j);
                }
            }
        }
        Ok(WeightedMetric {
            g,
            k,
            eta,
            index,
            states,
            adj,
            edge_weight: HashMap::new(),
            from_source: HashMap::new(),
        })
    }

    pub fn k(&self) -> Color {
        self.k
    }

    /// Weight of a single-vertex-change edge: `1 - eta (1 - gamma)`.
    fn weight(&mut self, i: usize, j: usize) -> Rat {
        let key = (i.min(j), i.max(j));
        if let Some(w) = self.edge_weight.get(&key) {
            return w.clone();
        }
        let pair = AdjacentPair::new(self.states[i].clone(), self.states[j].clone())
            .expect("labelling-space edges differ at one vertex");
        let gam = gamma_raw(self.g, &pair);
        let w = Rat::one() - &self.eta * (Rat::one() - gam);
        self.edge_weight.insert(key, w.clone());
        w
    }

    /// Exact metric distance between two labellings.
    pub fn distance(&mut self, a: &Coloring, b: &Coloring) -> Rat {
        if a == b {
            return Rat::zero();
        }
        let i = self.index[a.colors()];
        let j = self.index[b.colors()];
        if let Some(d) = self.from_source.get(&i) {
            return d[j].clone();
        }
        if self.adj[i].contains(&j) {
            // One-vertex difference: no multi-edge path can be shorter,
            // since every edge weighs at least 1 - eta > 1/2.
            return self.weight(i, j);
        }
        let dist = self.dijkstra(i);
        let out = dist[j].clone();
        self.from_source.insert(i, dist);
        out
    }

    fn dijkstra(&mut self, src: usize) -> Vec<Rat> {
        let n = self.states.len();
        let mut dist: Vec<Option<Rat>> = vec![None; n];
        let mut done = vec![false; n];
        dist[src] = Some(Rat::zero());
        loop {
            let mut best: Option<(usize, Rat)> = None;
            for i in 0..n {
                if done[i] {
                    continue;
                }
                if let Some(d) = &dist[i] {
                    if best.as_ref().is_none_or(|(_, bd)| d < bd) {
                        best = Some((i, d.clone()));
                    }
                }
            }
            let Some((u, du)) = best else { break };
            done[u] = true;
            let nbrs = self.adj[u].clone();
            for v in nbrs {
                if done[v] {
                    continue;
                }
                let w = self.weight(u, v);
                let cand = &du + &w;
                if dist[v].as_ref().is_none_or(|cur| &cand < cur) {
                    dist[v] = Some(cand);
                }
            }
        }
        dist.into_iter()
            .map(|d| d.expect("labelling graph is connected"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::weighted_distance;
    use crate::rat::{rat, rat_i};

    #[test]
    fn adjacent_pairs_use_the_single_edge_weight() {
        let g = Graph::path(3).unwrap();
        let eta = rat(1, 100);
        let mut metric = WeightedMetric::new(&g, 4, eta.clone()).unwrap();
        let a = Coloring::new(vec![2, 3, 4], 4).unwrap();
        let b = a.with_color(0, 1);
        let pair = AdjacentPair::new(a.clone(), b.clone()).unwrap();
        let direct = weighted_distance(&g, &pair, &eta).unwrap();
        assert_eq!(metric.distance(&a, &b), direct);
        assert_eq!(metric.distance(&a, &a), Rat::zero());
    }

    #[test]
    fn metric_sandwiched_by_hamming() {
        let g = Graph::path(3).unwrap();
        let eta = rat(1, 10);
        let mut metric = WeightedMetric::new(&g, 3, eta.clone()).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for _ in 0..60 {
            let a = Coloring::new((0..3).map(|_| rng.random_range(1..=3)).collect(), 3).unwrap();
            let b = Coloring::new((0..3).map(|_| rng.random_range(1..=3)).collect(), 3).unwrap();
            let h = crate::coloring::hamming(&a, &b).unwrap() as i64;
            let d = metric.distance(&a, &b);
            assert!(d <= rat_i(h), "metric exceeds Hamming");
            assert!(d >= (Rat::one() - &eta) * rat_i(h), "metric below (1-eta) H");
        }
    }

    #[test]
    fn triangle_inequality_and_symmetry_on_samples() {
        let g = Graph::path(2).unwrap();
        let mut metric = WeightedMetric::new(&g, 4, rat(1, 50)).unwrap();
        let states: Vec<Coloring> = (1..=4u16)
            .flat_map(|a| (1..=4u16).map(move |b| (a, b)))
            .map(|(a, b)| Coloring::new(vec![a, b], 4).unwrap())
            .collect();
        let pick = [0usize, 3, 5, 10, 15];
        for &i in &pick {
            for &j in &pick {
                let dij = metric.distance(&states[i], &states[j]);
                let dji = metric.distance(&states[j], &states[i]);
                assert_eq!(dij, dji);
                for &k in &pick {
                    let dik = metric.distance(&states[i], &states[k]);
                    let dkj = metric.distance(&states[k], &states[j]);
                    assert!(dij <= dik + dkj, "triangle violated");
                }
            }
        }
    }
}
