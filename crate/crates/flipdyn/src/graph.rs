//! Undirected simple graphs with dense integer vertex ids.
//!
//! Vertices are `0..n`; the index order doubles as the "arbitrary ordering of
//! the vertex set" that makes cluster representatives deterministic.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

pub type Vertex = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge endpoint {0} out of range for n = {1}")]
    EndpointOutOfRange(Vertex, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("edge list line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
    #[error("random regular generation gave up after {0} attempts")]
    RetriesExhausted(usize),
}

/// Immutable simple undirected graph; adjacency lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<Vertex>>,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges collapse; self-loops
    /// and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n {
                return Err(GraphError::EndpointOutOfRange(u, n));
            }
            if v as usize >= n {
                return Err(GraphError::EndpointOutOfRange(v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Graph { adj })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v as usize].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn are_adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    /// All edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::new();
        for (u, list) in self.adj.iter().enumerate() {
            for &v in list {
                if (u as Vertex) < v {
                    out.push((u as Vertex, v));
                }
            }
        }
        out
    }

    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::Infeasible(format!("cycle needs n >= 3, got {n}")));
        }
        let edges: Vec<_> = (0..n)
            .map(|i| (i as Vertex, ((i + 1) % n) as Vertex))
            .collect();
        Self::from_edges(n, &edges)
    }

    pub fn path(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Infeasible("path needs n >= 1".into()));
        }
        let edges: Vec<_> = (0..n.saturating_sub(1))
            .map(|i| (i as Vertex, (i + 1) as Vertex))
            .collect();
        Self::from_edges(n, &edges)
    }

    pub fn grid(rows: usize, cols: usize) -> Result<Self, GraphError> {
        if rows == 0 || cols == 0 {
            return Err(GraphError::Infeasible("grid needs rows, cols >= 1".into()));
        }
        let id = |r: usize, c: usize| (r * cols + c) as Vertex;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push((id(r, c), id(r, c + 1)));
                }
                if r + 1 < rows {
                    edges.push((id(r, c), id(r + 1, c)));
                }
            }
        }
        Self::from_edges(rows * cols, &edges)
    }

    pub fn complete_bipartite(a: usize, b: usize) -> Result<Self, GraphError> {
        if a == 0 || b == 0 {
            return Err(GraphError::Infeasible("complete bipartite needs a, b >= 1".into()));
        }
        let mut edges = Vec::new();
        for u in 0..a {
            for v in 0..b {
                edges.push((u as Vertex, (a + v) as Vertex));
            }
        }
        Self::from_edges(a + b, &edges)
    }

    /// Random d-regular graph by the pairing model, rejecting pairings with
    /// loops or multi-edges. Deterministic for a fixed seed.
    pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Self, GraphError> {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        if n * d % 2 != 0 {
            return Err(GraphError::Infeasible(format!(
                "random regular needs n*d even, got n={n}, d={d}"
            )));
        }
        if d >= n {
            return Err(GraphError::Infeasible(format!(
                "random regular needs d < n, got n={n}, d={d}"
            )));
        }
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        const MAX_ATTEMPTS: usize = 40_000;
        'attempt: for _ in 0..MAX_ATTEMPTS {
            let mut stubs: Vec<Vertex> = (0..n)
                .flat_map(|v| std::iter::repeat(v as Vertex).take(d))
                .collect();
            stubs.shuffle(&mut rng);
            let mut seen = std::collections::HashSet::new();
            let mut edges = Vec::with_capacity(n * d / 2);
            for pair in stubs.chunks(2) {
                let (u, v) = (pair[0], pair[1]);
                if u == v {
                    continue 'attempt;
                }
                let key = (u.min(v), u.max(v));
                if !seen.insert(key) {
                    continue 'attempt;
                }
                edges.push(key);
            }
            return Self::from_edges(n, &edges);
        }
        Err(GraphError::RetriesExhausted(MAX_ATTEMPTS))
    }

    /// Parses the edge-list text format: first non-comment line is `n`, then
    /// one `u v` pair per line with `0 <= u < v < n`; `#` starts a comment.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if n.is_none() {
                let v = line.parse::<usize>().map_err(|e| GraphError::Parse {
                    line: line_no,
                    msg: format!("expected vertex count, got {raw:?}: {e}"),
                })?;
                n = Some(v);
                continue;
            }
            let mut it = line.split_whitespace();
            let (u, v) = match (it.next(), it.next(), it.next()) {
                (Some(u), Some(v), None) => (u, v),
                _ => {
                    return Err(GraphError::Parse {
                        line: line_no,
                        msg: format!("expected \"u v\", got {raw:?}"),
                    })
                }
            };
            let parse = |s: &str| -> Result<Vertex, GraphError> {
                s.parse().map_err(|e| GraphError::Parse {
                    line: line_no,
                    msg: format!("bad vertex {s:?}: {e}"),
                })
            };
            let (u, v) = (parse(u)?, parse(v)?);
            let n = n.unwrap();
            if u as usize >= n || v as usize >= n {
                return Err(GraphError::Parse {
                    line: line_no,
                    msg: format!("endpoint {} out of range for n = {n}", u.max(v)),
                });
            }
            if u == v {
                return Err(GraphError::Parse {
                    line: line_no,
                    msg: format!("self-loop at {u}"),
                });
            }
            edges.push((u, v));
        }
        let n = n.ok_or(GraphError::Parse {
            line: 0,
            msg: "empty edge list: missing vertex count".into(),
        })?;
        Self::from_edges(n, &edges)
    }

    /// Canonical edge-list text; `parse_edge_list(to_edge_list(g)) == g`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// Declarative graph description used by experiment configs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    Cycle { n: usize },
    Path { n: usize },
    Grid { rows: usize, cols: usize },
    CompleteBipartite { a: usize, b: usize },
    RandomRegular { n: usize, d: usize, seed: u64 },
    EdgeList { text: String },
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph, GraphError> {
        match self {
            GraphSpec::Cycle { n } => Graph::cycle(*n),
            GraphSpec::Path { n } => Graph::path(*n),
            GraphSpec::Grid { rows, cols } => Graph::grid(*rows, *cols),
            GraphSpec::CompleteBipartite { a, b } => Graph::complete_bipartite(*a, *b),
            GraphSpec::RandomRegular { n, d, seed } => Graph::random_regular(*n, *d, *seed),
            GraphSpec::EdgeList { text } => Graph::parse_edge_list(text),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c4_from_edges() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.max_degree(), 2);
        assert_eq!(g, Graph::cycle(4).unwrap());
    }

    #[test]
    fn isolated_vertex() {
        let g = Graph::from_edges(1, &[]).unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.max_degree(), 0);
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = Graph::from_edges(3, &[(0, 1), (0, 1)]).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(
            Graph::from_edges(2, &[(0, 2)]),
            Err(GraphError::EndpointOutOfRange(2, 2))
        ));
        assert!(matches!(Graph::from_edges(2, &[(1, 1)]), Err(GraphError::SelfLoop(1))));
    }

    #[test]
    fn path_two_vertices() {
        let g = Graph::path(2).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
        assert_eq!(g.max_degree(), 1);
    }

    #[test]
    fn adjacency_symmetric_on_generated() {
        let graphs = [
            Graph::cycle(7).unwrap(),
            Graph::grid(3, 4).unwrap(),
            Graph::complete_bipartite(2, 5).unwrap(),
            Graph::random_regular(10, 3, 7).unwrap(),
        ];
        for g in &graphs {
            for u in 0..g.n() as Vertex {
                for &v in g.neighbors(u) {
                    assert!(g.are_adjacent(v, u), "asymmetric adjacency {u}-{v}");
                }
            }
        }
    }

    #[test]
    fn random_regular_degrees_and_determinism() {
        let g = Graph::random_regular(10, 3, 7).unwrap();
        for v in 0..10 {
            assert_eq!(g.degree(v), 3);
        }
        let h = Graph::random_regular(10, 3, 7).unwrap();
        assert_eq!(g, h);
        assert!(Graph::random_regular(5, 3, 1).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let text = "4\n0 1\n1 2\n2 3\n3 0\n";
        let g = Graph::parse_edge_list(text).unwrap();
        assert_eq!(g, Graph::cycle(4).unwrap());
        assert_eq!(Graph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        match Graph::parse_edge_list("2\n0 2\n") {
            Err(GraphError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(Graph::parse_edge_list("# only a comment\n").is_err());
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let g = Graph::parse_edge_list("# header\n3\n\n0 1 # chord\n1 2\n").unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
    }
}
