//! Maximal 2-colored components ("clusters"), their enumeration, conflict
//! relations, and the cluster-graph distance from a disagreement vertex.
//!
//! A cluster is identified by its vertex set together with its unordered
//! color pair; the pair degenerates to a single color when the probe color
//! equals the vertex's own color. Components larger than six vertices are
//! not clusters: the dynamics discards them outright.

use crate::coloring::{available_colors, AdjacentPair, Color, Coloring};
use crate::graph::{Graph, Vertex};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

pub const MAX_CLUSTER_SIZE: usize = 6;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("cluster not found in the cluster set of the chosen chain")]
    NotInClusterSet,
}

/// Full alternating closure from `v` with probe color `c` (no size cap).
///
/// A vertex `w` joins when it is adjacent to a member `u`, carries one of the
/// two pair colors, and differs from `u`'s color; for the degenerate pair
/// `c == sigma(v)` the closure is just `{v}`. Defined for improper labellings
/// as well: equal-colored neighbors never join.
pub fn alternating_component(
    g: &Graph,
    sigma: &Coloring,
    v: Vertex,
    c: Color,
) -> BTreeSet<Vertex> {
    let base = sigma.color(v);
    let mut seen: BTreeSet<Vertex> = BTreeSet::new();
    seen.insert(v);
    if base == c {
        return seen;
    }
    let mut frontier = vec![v];
    while let Some(u) = frontier.pop() {
        let cu = sigma.color(u);
        let want = if cu == base { c } else { base };
        for &w in g.neighbors(u) {
            if sigma.color(w) == want && seen.insert(w) {
                frontier.push(w);
            }
        }
    }
    seen
}

/// A cluster: sorted vertex set of size 1..=6 plus its color pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cluster {
    pub vertices: Vec<Vertex>,
    pub colors: (Color, Color),
}

impl Cluster {
    fn from_parts(vertices: BTreeSet<Vertex>, c1: Color, c2: Color) -> Self {
        debug_assert!((1..=MAX_CLUSTER_SIZE).contains(&vertices.len()));
        let colors = (c1.min(c2), c1.max(c2));
        Cluster { vertices: vertices.into_iter().collect(), colors }
    }

    /// Representative: the minimum-index member.
    pub fn pres(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.colors.0 == self.colors.1
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// Canonical coin key `(pres, color pair)`; unique within one coloring.
    pub fn key(&self) -> (Vertex, Color, Color) {
        (self.pres(), self.colors.0, self.colors.1)
    }

    /// Swaps the two pair colors on the members (identity when degenerate).
    pub fn apply_flip(&self, sigma: &mut Coloring) {
        let (c1, c2) = self.colors;
        if c1 == c2 {
            return;
        }
        for &v in &self.vertices {
            let cur = sigma.color(v);
            debug_assert!(cur == c1 || cur == c2);
            sigma.set_color(v, if cur == c1 { c2 } else { c1 });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClusterProbe {
    Cluster(Cluster),
    TooLarge,
}

/// The cluster reachable from `v` by a `(sigma(v), c)` alternating path,
/// or `TooLarge` as soon as a seventh vertex is reached.
pub fn cluster_at(g: &Graph, sigma: &Coloring, v: Vertex, c: Color) -> ClusterProbe {
    let base = sigma.color(v);
    let mut seen: BTreeSet<Vertex> = BTreeSet::new();
    seen.insert(v);
    if base != c {
        let mut frontier = vec![v];
        while let Some(u) = frontier.pop() {
            let cu = sigma.color(u);
            let want = if cu == base { c } else { base };
            for &w in g.neighbors(u) {
                if sigma.color(w) == want && seen.insert(w) {
                    if seen.len() > MAX_CLUSTER_SIZE {
                        return ClusterProbe::TooLarge;
                    }
                    frontier.push(w);
                }
            }
        }
    }
    ClusterProbe::Cluster(Cluster::from_parts(seen, base, c))
}

/// All clusters of a coloring, deduplicated, in canonical order, with a
/// vertex -> clusters index.
#[derive(Debug, Clone)]
pub struct ClusterSet {
    clusters: Vec<Cluster>,
    by_vertex: Vec<Vec<usize>>,
}

impl ClusterSet {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cluster> {
        self.clusters.iter()
    }

    pub fn get(&self, idx: usize) -> &Cluster {
        &self.clusters[idx]
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn index_of(&self, cluster: &Cluster) -> Option<usize> {
        self.clusters.binary_search(cluster).ok()
    }

    /// Indices of clusters containing `v`.
    pub fn at_vertex(&self, v: Vertex) -> &[usize] {
        &self.by_vertex[v as usize]
    }
}

/// Every cluster of `sigma` exactly once (degenerate singletons included).
pub fn enumerate_clusters(g: &Graph, sigma: &Coloring) -> ClusterSet {
    let mut set: BTreeSet<Cluster> = BTreeSet::new();
    for v in 0..g.n() as Vertex {
        for c in 1..=sigma.k() {
            if let ClusterProbe::Cluster(cl) = cluster_at(g, sigma, v, c) {
                set.insert(cl);
            }
        }
    }
    let clusters: Vec<Cluster> = set.into_iter().collect();
    let mut by_vertex = vec![Vec::new(); g.n()];
    for (i, cl) in clusters.iter().enumerate() {
        for &v in &cl.vertices {
            by_vertex[v as usize].push(i);
        }
    }
    ClusterSet { clusters, by_vertex }
}

/// Shared vertex.
pub fn overlap(s: &Cluster, t: &Cluster) -> bool {
    let (short, long) = if s.size() <= t.size() { (s, t) } else { (t, s) };
    short.vertices.iter().any(|&v| long.contains(v))
}

pub fn colors_intersect(s: &Cluster, t: &Cluster) -> bool {
    let (a1, a2) = s.colors;
    let (b1, b2) = t.colors;
    a1 == b1 || a1 == b2 || a2 == b1 || a2 == b2
}

/// Some member of `s` is graph-adjacent to some member of `t`.
pub fn neighboring(g: &Graph, s: &Cluster, t: &Cluster) -> bool {
    s.vertices
        .iter()
        .any(|&v| t.vertices.iter().any(|&w| g.are_adjacent(v, w)))
}

/// Neighboring clusters whose color pairs intersect; degenerate pairs
/// participate with their single color.
pub fn conflict(g: &Graph, s: &Cluster, t: &Cluster) -> bool {
    colors_intersect(s, t) && neighboring(g, s, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainSide {
    X,
    Y,
}

/// Distance of `t` from the disagreement vertex in the cluster graph of the
/// chosen chain: the singleton `{v*}` clusters sit at distance 0, and each
/// step moves to a neighboring cluster.
pub fn cluster_distance(
    g: &Graph,
    pair: &AdjacentPair,
    chain: ChainSide,
    t: &Cluster,
) -> Result<usize, ClusterError> {
    let sigma = match chain {
        ChainSide::X => pair.x(),
        ChainSide::Y => pair.y(),
    };
    let set = enumerate_clusters(g, sigma);
    let target = set.index_of(t).ok_or(ClusterError::NotInClusterSet)?;
    let dist = cluster_distances_from(g, &set, pair.v_star());
    dist[target].ok_or(ClusterError::NotInClusterSet)
}

/// BFS layers over the cluster graph from the `{v*}` singletons.
pub fn cluster_distances_from(g: &Graph, set: &ClusterSet, v_star: Vertex) -> Vec<Option<usize>> {
    let n = set.len();
    let mut dist: Vec<Option<usize>> = vec![None; n];
    let mut frontier: Vec<usize> = Vec::new();
    for (i, cl) in set.iter().enumerate() {
        if cl.vertices.as_slice() == [v_star] {
            dist[i] = Some(0);
            frontier.push(i);
        }
    }
    let mut level = 0usize;
    while !frontier.is_empty() {
        level += 1;
        let mut next = Vec::new();
        for &i in &frontier {
            for (j, cand) in set.iter().enumerate() {
                if dist[j].is_none() && neighboring(g, set.get(i), cand) {
                    dist[j] = Some(level);
                    next.push(j);
                }
            }
        }
        frontier = next;
    }
    dist
}

/// Identity coupling helper: clusters at distance 0 for every available
/// color of the disagreement vertex (mirrors the definition's base case).
pub fn distance_zero_clusters(g: &Graph, sigma: &Coloring, v_star: Vertex) -> Vec<Cluster> {
    available_colors(g, sigma, v_star)
        .into_iter()
        .map(|c| match cluster_at(g, sigma, v_star, c) {
            ClusterProbe::Cluster(cl) => cl,
            ClusterProbe::TooLarge => unreachable!("available-color cluster is a singleton"),
        })
        .collect()
}
