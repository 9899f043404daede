//! Colorings, distances, disagreement configurations, and the extremal
//! classification behind the weighted metric.
//!
//! Colors are `1..=k`. Improper labellings are representable (robustness
//! tests want them) but every chain entry point demands properness.

use crate::cluster::{alternating_component, MAX_CLUSTER_SIZE};
use crate::graph::{Graph, Vertex};
use crate::rat::{rat, Rat};
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

pub type Color = u16;

/// Configuration entries are capped here; the code stands for "component
/// larger than six vertices", which no schedule ever flips.
pub const SIZE_OVERFLOW: u8 = (MAX_CLUSTER_SIZE + 1) as u8;

#[derive(Debug, Error)]
pub enum ColoringError {
    #[error("vertex {0} has color {1}, outside 1..={2}")]
    ColorOutOfRange(Vertex, Color, Color),
    #[error("coloring has {0} vertices, graph has {1}")]
    WrongLength(usize, usize),
    #[error("colorings disagree in domain: {0} vs {1} vertices (k = {2} vs {3})")]
    MismatchedDomains(usize, usize, Color, Color),
    #[error("colorings differ at {0} vertices, expected exactly one")]
    NotAdjacentPair(usize),
    #[error("coloring text: {0}")]
    Parse(String),
    #[error("eta must satisfy 0 < eta < 1/2, got {0}")]
    EtaOutOfRange(String),
    #[error("coloring must be proper for {0}")]
    ImproperColoring(&'static str),
}

/// Total assignment of colors `1..=k` to vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    colors: Vec<Color>,
    k: Color,
}

impl Coloring {
    pub fn new(colors: Vec<Color>, k: Color) -> Result<Self, ColoringError> {
        for (v, &c) in colors.iter().enumerate() {
            if c == 0 || c > k {
                return Err(ColoringError::ColorOutOfRange(v as Vertex, c, k));
            }
        }
        Ok(Coloring { colors, k })
    }

    pub fn k(&self) -> Color {
        self.k
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    pub fn color(&self, v: Vertex) -> Color {
        self.colors[v as usize]
    }

    pub fn set_color(&mut self, v: Vertex, c: Color) {
        debug_assert!(c >= 1 && c <= self.k);
        self.colors[v as usize] = c;
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    /// Recolors `v` to `c`, returning the new coloring.
    pub fn with_color(&self, v: Vertex, c: Color) -> Coloring {
        let mut out = self.clone();
        out.set_color(v, c);
        out
    }

    /// Greedy random proper coloring; `None` if some vertex has no free
    /// color under the random order (cannot happen for k >= maxdeg + 1).
    pub fn random_proper<R: rand::Rng>(g: &Graph, k: Color, rng: &mut R) -> Option<Coloring> {
        let mut colors = vec![0 as Color; g.n()];
        let mut order: Vec<Vertex> = (0..g.n() as Vertex).collect();
        use rand::seq::SliceRandom;
        order.shuffle(rng);
        for &v in &order {
            let used: Vec<Color> = g.neighbors(v).iter().map(|&w| colors[w as usize]).collect();
            let free: Vec<Color> = (1..=k).filter(|c| !used.contains(c)).collect();
            if free.is_empty() {
                return None;
            }
            colors[v as usize] = free[rng.random_range(0..free.len())];
        }
        Some(Coloring { colors, k })
    }

    /// Parses the text format: header `k=<int>`, then whitespace-separated
    /// 1-based colors in vertex index order.
    pub fn parse(text: &str) -> Result<Self, ColoringError> {
        let mut it = text.split_whitespace();
        let head = it.next().ok_or_else(|| ColoringError::Parse("empty input".into()))?;
        let k: Color = head
            .strip_prefix("k=")
            .ok_or_else(|| ColoringError::Parse(format!("expected k=<int> header, got {head:?}")))?
            .parse()
            .map_err(|e| ColoringError::Parse(format!("bad k: {e}")))?;
        let mut colors = Vec::new();
        for tok in it {
            let c: Color = tok
                .parse()
                .map_err(|e| ColoringError::Parse(format!("bad color {tok:?}: {e}")))?;
            colors.push(c);
        }
        Coloring::new(colors, k)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("k={}\n", self.k);
        for (i, c) in self.colors.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{c}");
        }
        out.push('\n');
        out
    }
}

/// True iff no edge is monochromatic.
pub fn is_proper(g: &Graph, sigma: &Coloring) -> bool {
    debug_assert_eq!(g.n(), sigma.n());
    g.edges().iter().all(|&(u, v)| sigma.color(u) != sigma.color(v))
}

/// Number of disagreeing vertices.
pub fn hamming(a: &Coloring, b: &Coloring) -> Result<usize, ColoringError> {
    if a.n() != b.n() || a.k() != b.k() {
        return Err(ColoringError::MismatchedDomains(a.n(), b.n(), a.k(), b.k()));
    }
    Ok(a.colors
        .iter()
        .zip(&b.colors)
        .filter(|(x, y)| x != y)
        .count())
}

/// Colors absent from the neighborhood of `v`.
pub fn available_colors(g: &Graph, sigma: &Coloring, v: Vertex) -> Vec<Color> {
    let mut used = vec![false; sigma.k() as usize + 1];
    for &w in g.neighbors(v) {
        used[sigma.color(w) as usize] = true;
    }
    (1..=sigma.k()).filter(|&c| !used[c as usize]).collect()
}

/// Two proper colorings differing at exactly one vertex.
#[derive(Debug, Clone)]
pub struct AdjacentPair {
    x: Coloring,
    y: Coloring,
    v_star: Vertex,
}

impl AdjacentPair {
    pub fn new(x: Coloring, y: Coloring) -> Result<Self, ColoringError> {
        if x.n() != y.n() || x.k() != y.k() {
            return Err(ColoringError::MismatchedDomains(x.n(), y.n(), x.k(), y.k()));
        }
        let diffs: Vec<Vertex> = (0..x.n() as Vertex)
            .filter(|&v| x.color(v) != y.color(v))
            .collect();
        if diffs.len() != 1 {
            return Err(ColoringError::NotAdjacentPair(diffs.len()));
        }
        Ok(AdjacentPair { x, y, v_star: diffs[0] })
    }

    pub fn x(&self) -> &Coloring {
        &self.x
    }

    pub fn y(&self) -> &Coloring {
        &self.y
    }

    pub fn v_star(&self) -> Vertex {
        self.v_star
    }

    /// The disagreement color in the first chain.
    pub fn color_x(&self) -> Color {
        self.x.color(self.v_star)
    }

    pub fn color_y(&self) -> Color {
        self.y.color(self.v_star)
    }

    /// Neighbors of the disagreement vertex carrying color `c`, ascending.
    pub fn neighbors_with_color(&self, g: &Graph, c: Color) -> Vec<Vertex> {
        g.neighbors(self.v_star)
            .iter()
            .copied()
            .filter(|&w| self.x.color(w) == c)
            .collect()
    }
}

/// The cluster-size tuple `(A, B; a, b)` around a disagreement for one color.
///
/// Slots pair `a_i` with `b_i` through the shared neighbor `w_i`; they are
/// stored sorted descending by `(a_i, b_i)` so classification is insensitive
/// to neighbor order. Duplicate components are zeroed at the higher index;
/// entries above six are capped at [`SIZE_OVERFLOW`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration {
    pub big_a: u8,
    pub big_b: u8,
    slots: Vec<(u8, u8)>,
}

impl Configuration {
    pub fn new(big_a: u8, big_b: u8, a: Vec<u8>, b: Vec<u8>) -> Self {
        assert_eq!(a.len(), b.len(), "configuration sides must pair up");
        assert!(!a.is_empty(), "configuration needs d >= 1");
        let mut slots: Vec<(u8, u8)> = a.into_iter().zip(b).collect();
        slots.sort_unstable_by(|l, r| r.cmp(l));
        Configuration { big_a, big_b, slots }
    }

    pub fn d(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[(u8, u8)] {
        &self.slots
    }

    pub fn a(&self) -> Vec<u8> {
        self.slots.iter().map(|s| s.0).collect()
    }

    pub fn b(&self) -> Vec<u8> {
        self.slots.iter().map(|s| s.1).collect()
    }

    /// Mirror image: swaps the roles of the two chains.
    pub fn mirrored(&self) -> Configuration {
        Configuration::new(
            self.big_b,
            self.big_a,
            self.b(),
            self.a(),
        )
    }
}

impl std::fmt::Display for Configuration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fmt_seq = |xs: Vec<u8>| {
            let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
            format!("({})", items.join(","))
        };
        write!(
            f,
            "({},{};{},{})",
            self.big_a,
            self.big_b,
            fmt_seq(self.a()),
            fmt_seq(self.b())
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtremalClass {
    C0,
    C1,
    C2,
}

/// Exact matches against the extremal tuples; everything else is `C0`.
/// The tight tuples are `(3,2;(2),(1))`, `(7,3;(3,3),(1,1))`, and their
/// mirror images.
pub fn classify(cfg: &Configuration) -> ExtremalClass {
    let d = cfg.d();
    if d == 1 {
        let (a, b) = cfg.slots[0];
        if (cfg.big_a, cfg.big_b, a, b) == (3, 2, 2, 1)
            || (cfg.big_a, cfg.big_b, a, b) == (2, 3, 1, 2)
        {
            return ExtremalClass::C1;
        }
    } else if d == 2 {
        let s = &cfg.slots;
        if cfg.big_a == 7 && cfg.big_b == 3 && s[0] == (3, 1) && s[1] == (3, 1) {
            return ExtremalClass::C2;
        }
        if cfg.big_a == 3 && cfg.big_b == 7 && s[0] == (1, 3) && s[1] == (1, 3) {
            return ExtremalClass::C2;
        }
    }
    ExtremalClass::C0
}

fn cap(size: usize) -> u8 {
    if size > MAX_CLUSTER_SIZE {
        SIZE_OVERFLOW
    } else {
        size as u8
    }
}

/// The configuration of color `c` around the disagreement: sizes of the
/// `(c, color_y)` components in X and the `(c, color_x)` components in Y,
/// with duplicate components zeroed at the higher index.
///
/// Returns `None` when `c` does not appear in the neighborhood of the
/// disagreement vertex.
pub fn configuration_at(
    g: &Graph,
    pair: &AdjacentPair,
    c: Color,
) -> Result<Option<Configuration>, ColoringError> {
    if !is_proper(g, pair.x()) || !is_proper(g, pair.y()) {
        return Err(ColoringError::ImproperColoring("configuration_at"));
    }
    Ok(configuration_at_raw(g, pair, c))
}

/// Mechanical configuration evaluation without the properness guard; the
/// metric's shortest paths pass through improper labellings, where the
/// alternating-component definition still applies.
pub(crate) fn configuration_at_raw(
    g: &Graph,
    pair: &AdjacentPair,
    c: Color,
) -> Option<Configuration> {
    let ws = pair.neighbors_with_color(g, c);
    if ws.is_empty() {
        return None;
    }
    let side_sizes = |sigma: &Coloring, other: Color| -> Vec<u8> {
        let mut comps: Vec<std::collections::BTreeSet<Vertex>> = Vec::new();
        let mut sizes = Vec::new();
        for &w in &ws {
            let comp = alternating_component(g, sigma, w, other);
            if comps.iter().any(|earlier| earlier == &comp) {
                sizes.push(0);
            } else {
                sizes.push(cap(comp.len()));
                comps.push(comp);
            }
        }
        sizes
    };
    let a = side_sizes(pair.x(), pair.color_y());
    let b = side_sizes(pair.y(), pair.color_x());
    let big_a = cap(alternating_component(g, pair.y(), pair.v_star(), c).len());
    let big_b = cap(alternating_component(g, pair.x(), pair.v_star(), c).len());
    Some(Configuration::new(big_a, big_b, a, b))
}

/// Fraction of extremal colors at the disagreement: `(|C1| + 2|C2|) / maxdeg`.
pub fn gamma(g: &Graph, pair: &AdjacentPair) -> Result<Rat, ColoringError> {
    if !is_proper(g, pair.x()) || !is_proper(g, pair.y()) {
        return Err(ColoringError::ImproperColoring("gamma"));
    }
    Ok(gamma_raw(g, pair))
}

pub(crate) fn gamma_raw(g: &Graph, pair: &AdjacentPair) -> Rat {
    let delta = g.max_degree();
    if delta == 0 {
        return Rat::zero();
    }
    let mut weight = 0i64;
    for c in 1..=pair.x().k() {
        if let Some(cfg) = configuration_at_raw(g, pair, c) {
            weight += match classify(&cfg) {
                ExtremalClass::C0 => 0,
                ExtremalClass::C1 => 1,
                ExtremalClass::C2 => 2,
            };
        }
    }
    rat(weight, delta as i64)
}

/// The weighted distance `1 - eta * (1 - gamma)` for a pair differing at one
/// vertex; lies in `[1 - eta, 1]`.
pub fn weighted_distance(g: &Graph, pair: &AdjacentPair, eta: &Rat) -> Result<Rat, ColoringError> {
    if !(eta > &Rat::zero() && eta < &rat(1, 2)) {
        return Err(ColoringError::EtaOutOfRange(eta.to_string()));
    }
    let gam = gamma(g, pair)?;
    Ok(Rat::one() - eta * (Rat::one() - gam))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    pub(crate) const R: Color = 1;
    pub(crate) const B: Color = 2;
    pub(crate) const P: Color = 3;
    pub(crate) const Y: Color = 4;

    /// The four-cycle with the two colorings whose cluster counts differ.
    pub(crate) fn remark_instance() -> (Graph, Coloring, Coloring) {
        let g = Graph::cycle(4).unwrap();
        let sigma = Coloring::new(vec![R, B, P, B], 4).unwrap();
        let tau = Coloring::new(vec![Y, B, Y, B], 4).unwrap();
        (g, sigma, tau)
    }

    #[test]
    fn proper_checks() {
        let (g, sigma, tau) = remark_instance();
        assert!(is_proper(&g, &sigma));
        assert!(is_proper(&g, &tau));
        let edge = Graph::path(2).unwrap();
        let mono = Coloring::new(vec![1, 1], 2).unwrap();
        assert!(!is_proper(&edge, &mono));
        let lone = Graph::from_edges(1, &[]).unwrap();
        assert!(is_proper(&lone, &Coloring::new(vec![1], 3).unwrap()));
    }

    #[test]
    fn hamming_basics() {
        let (_, sigma, tau) = remark_instance();
        assert_eq!(hamming(&sigma, &sigma).unwrap(), 0);
        assert_eq!(hamming(&sigma, &tau).unwrap(), 2);
        let shifted = sigma.with_color(0, Y);
        assert_eq!(hamming(&sigma, &shifted).unwrap(), 1);
        let other_k = Coloring::new(vec![1, 2, 3, 2], 5).unwrap();
        assert!(hamming(&sigma, &other_k).is_err());
    }

    #[test]
    fn available_colors_cases() {
        let lone = Graph::from_edges(1, &[]).unwrap();
        let c = Coloring::new(vec![1], 4).unwrap();
        assert_eq!(available_colors(&lone, &c, 0), vec![1, 2, 3, 4]);

        // Center of a path, both neighbors the same color: k - d + (d_c - 1).
        let p3 = Graph::path(3).unwrap();
        let same = Coloring::new(vec![1, 2, 1], 4).unwrap();
        assert_eq!(available_colors(&p3, &same, 1), vec![2, 3, 4]);

        let mixed = Coloring::new(vec![1, 3, 2], 4).unwrap();
        assert_eq!(available_colors(&p3, &mixed, 1), vec![3, 4]);
    }

    #[test]
    fn available_colors_identity_on_random_colorings() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let g = Graph::random_regular(12, 3, 5).unwrap();
        for k in [5u16, 6, 8] {
            let sigma = Coloring::random_proper(&g, k, &mut rng).unwrap();
            for v in 0..g.n() as Vertex {
                let mut counts = vec![0usize; k as usize + 1];
                for &w in g.neighbors(v) {
                    counts[sigma.color(w) as usize] += 1;
                }
                let extra: usize = counts.iter().filter(|&&d| d >= 2).map(|&d| d - 1).sum();
                let expect = k as usize - g.degree(v) + extra;
                assert_eq!(available_colors(&g, &sigma, v).len(), expect);
            }
        }
    }

    #[test]
    fn adjacent_pair_validation() {
        let (_, sigma, tau) = remark_instance();
        assert!(matches!(
            AdjacentPair::new(sigma.clone(), tau),
            Err(ColoringError::NotAdjacentPair(2))
        ));
        let moved = sigma.with_color(0, Y);
        let pair = AdjacentPair::new(sigma, moved).unwrap();
        assert_eq!(pair.v_star(), 0);
        assert_eq!(pair.color_x(), R);
        assert_eq!(pair.color_y(), Y);
    }

    #[test]
    fn classify_matches_only_listed_tuples() {
        let c1 = Configuration::new(3, 2, vec![2], vec![1]);
        assert_eq!(classify(&c1), ExtremalClass::C1);
        let c1m = Configuration::new(2, 3, vec![1], vec![2]);
        assert_eq!(classify(&c1m), ExtremalClass::C1);
        let c2 = Configuration::new(7, 3, vec![3, 3], vec![1, 1]);
        assert_eq!(classify(&c2), ExtremalClass::C2);
        let c2m = Configuration::new(3, 7, vec![1, 1], vec![3, 3]);
        assert_eq!(classify(&c2m), ExtremalClass::C2);
        let plain = Configuration::new(2, 2, vec![1], vec![1]);
        assert_eq!(classify(&plain), ExtremalClass::C0);
    }

    #[test]
    fn classify_enumeration_finds_exactly_four_matches() {
        let mut hits = 0usize;
        // All configurations with d <= 3 and entries <= 7.
        for d in 1usize..=3 {
            let mut idx = vec![0u8; 2 * d];
            loop {
                let a: Vec<u8> = idx[..d].to_vec();
                let b: Vec<u8> = idx[d..].to_vec();
                if a[0] >= 1 && b[0] >= 1 {
                    let big_a = 1 + a.iter().map(|&x| x as usize).sum::<usize>();
                    let big_b = 1 + b.iter().map(|&x| x as usize).sum::<usize>();
                    let cfg = Configuration::new(cap(big_a), cap(big_b), a, b);
                    if classify(&cfg) != ExtremalClass::C0 {
                        hits += 1;
                    }
                }
                let mut pos = 0;
                loop {
                    if pos == idx.len() {
                        break;
                    }
                    idx[pos] += 1;
                    if idx[pos] <= 7 {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if pos == idx.len() {
                    break;
                }
            }
        }
        // (3,2;(2),(1)) and (2,3;(1),(2)) at d=1; the ordered variants of
        // (7,3;(3,3),(1,1)) and (3,7;(1,1),(3,3)) at d=2.
        assert_eq!(hits, 4);
    }

    #[test]
    fn configuration_ordering_is_canonical() {
        let cfg = Configuration::new(7, 3, vec![3, 3], vec![1, 1]);
        assert_eq!(cfg.slots(), &[(3, 1), (3, 1)]);
        let jumbled = Configuration::new(6, 6, vec![1, 3], vec![2, 1]);
        assert_eq!(jumbled.slots(), &[(3, 1), (1, 2)]);
        assert_eq!(jumbled.to_string(), "(6,6;(3,1),(1,2))");
    }

    #[test]
    fn weighted_distance_endpoints() {
        let g = Graph::path(3).unwrap();
        let x = Coloring::new(vec![2, 3, 4], 4).unwrap();
        let y = x.with_color(0, 1);
        let pair = AdjacentPair::new(x, y).unwrap();
        // Color 3 sits in configuration (2,2;(1),(1)): not extremal.
        let cfg = configuration_at(&g, &pair, 3).unwrap().unwrap();
        assert_eq!(cfg, Configuration::new(2, 2, vec![1], vec![1]));
        assert_eq!(gamma(&g, &pair).unwrap(), Rat::zero());
        let eta = rat(1, 4);
        assert_eq!(weighted_distance(&g, &pair, &eta).unwrap(), rat(3, 4));
        assert!(weighted_distance(&g, &pair, &rat(1, 2)).is_err());
        assert!(weighted_distance(&g, &pair, &Rat::zero()).is_err());
    }

    #[test]
    fn configuration_small_extremal_instance() {
        // Path x - w - v*: the (3,2;(2),(1)) tuple realized on three vertices.
        let g = Graph::path(3).unwrap();
        let x = Coloring::new(vec![2, 3, 1], 4).unwrap();
        let y = x.with_color(2, 2);
        let pair = AdjacentPair::new(x, y).unwrap();
        let cfg = configuration_at(&g, &pair, 3).unwrap().unwrap();
        assert_eq!(cfg, Configuration::new(3, 2, vec![2], vec![1]));
        assert_eq!(classify(&cfg), ExtremalClass::C1);
        assert_eq!(gamma(&g, &pair).unwrap(), rat(1, 2));
        // Colors other than 3 are absent from the neighborhood.
        assert_eq!(configuration_at(&g, &pair, 1).unwrap(), None);
    }

    #[test]
    fn configuration_two_branch_instance() {
        // Two disjoint 3-vertex branches below the disagreement: the
        // (7,3;(3,3),(1,1)) tuple.
        let g =
            Graph::from_edges(7, &[(0, 1), (0, 2), (1, 3), (2, 4), (3, 5), (4, 6)]).unwrap();
        let x = Coloring::new(vec![1, 3, 3, 2, 2, 3, 3], 4).unwrap();
        let y = x.with_color(0, 2);
        let pair = AdjacentPair::new(x, y).unwrap();
        let cfg = configuration_at(&g, &pair, 3).unwrap().unwrap();
        assert_eq!(cfg, Configuration::new(7, 3, vec![3, 3], vec![1, 1]));
        assert_eq!(classify(&cfg), ExtremalClass::C2);
    }

    #[test]
    fn configuration_dedups_joined_neighbors() {
        // Both color-3 neighbors of the disagreement sit in one (3,2)
        // component, so the second slot zeroes out.
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let x = Coloring::new(vec![1, 3, 3, 2], 4).unwrap();
        let y = x.with_color(0, 2);
        let pair = AdjacentPair::new(x, y).unwrap();
        let cfg = configuration_at(&g, &pair, 3).unwrap().unwrap();
        assert_eq!(cfg.a(), vec![3, 0]);
        assert_eq!(cfg.big_a, 4);
        assert_eq!(cfg.b(), vec![1, 1]);
        assert_eq!(cfg.big_b, 3);
    }

    #[test]
    fn coloring_text_round_trip() {
        let c = Coloring::parse("k=4\n1 2 1 2\n").unwrap();
        assert_eq!(c.k(), 4);
        assert_eq!(c.colors(), &[1, 2, 1, 2]);
        assert_eq!(Coloring::parse(&c.to_text()).unwrap(), c);
        assert!(Coloring::parse("1 2 3").is_err());
        assert!(Coloring::parse("k=2\n3\n").is_err());
    }
}
