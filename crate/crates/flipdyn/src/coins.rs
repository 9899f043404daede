//! Counter-based per-cluster randomness.
//!
//! The activation and flip coins of a cluster in round `t` are a pure
//! function of `(seed, t, canonical key, purpose)`. This makes rounds
//! reproducible and order-independent, lets two coupled chains share coins
//! by key, and lets the message-passing engine evaluate the same coins the
//! direct engine uses. A deployed system would realize this as pre-shared
//! per-cluster seeds derived after discovery.

use crate::cluster::Cluster;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Activation,
    Flip,
}

impl Purpose {
    fn salt(self) -> u64 {
        match self {
            Purpose::Activation => 0x9e37_79b9_7f4a_7c15,
            Purpose::Flip => 0x85eb_ca6b_27d4_eb2f,
        }
    }
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic coin source for one chain (or one coupled pair).
#[derive(Debug, Clone, Copy)]
pub struct CoinStream {
    seed: u64,
}

impl CoinStream {
    pub fn new(seed: u64) -> Self {
        CoinStream { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn raw(&self, round: u64, words: [u64; 3], purpose: Purpose) -> u64 {
        let mut h = mix64(self.seed ^ 0x6a09_e667_f3bc_c908);
        h = mix64(h ^ round.wrapping_mul(0xd6e8_feb8_6659_fd93));
        for w in words {
            h = mix64(h ^ w);
        }
        mix64(h ^ purpose.salt())
    }

    /// Uniform 64-bit word for a cluster, keyed by `(pres, color pair)`.
    pub fn cluster_coin(&self, round: u64, cluster: &Cluster, purpose: Purpose) -> u64 {
        let (pres, c1, c2) = cluster.key();
        self.raw(
            round,
            [pres as u64, ((c1 as u64) << 32) | c2 as u64, 0x636c_7573_7465_72],
            purpose,
        )
    }

    /// Uniform word keyed by arbitrary line identifiers (coupled rounds).
    pub fn keyed_coin(&self, round: u64, words: [u64; 3], purpose: Purpose) -> u64 {
        self.raw(round, words, purpose)
    }
}

/// Interprets a uniform word as a Bernoulli(p) draw.
pub fn fires(word: u64, p: f64) -> bool {
    if p >= 1.0 {
        return true;
    }
    if p <= 0.0 {
        return false;
    }
    (word as f64) < p * (u64::MAX as f64)
}

/// Interprets a uniform word as a point in [0, 1).
pub fn unit(word: u64) -> f64 {
    (word >> 11) as f64 / (1u64 << 53) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::Coloring;
    use crate::graph::Graph;

    #[test]
    fn coins_are_deterministic_and_purpose_split() {
        let g = Graph::cycle(4).unwrap();
        let sigma = Coloring::new(vec![1, 2, 1, 2], 4).unwrap();
        let set = crate::cluster::enumerate_clusters(&g, &sigma);
        let s = CoinStream::new(7);
        let cl = set.get(0);
        assert_eq!(
            s.cluster_coin(3, cl, Purpose::Activation),
            s.cluster_coin(3, cl, Purpose::Activation)
        );
        assert_ne!(
            s.cluster_coin(3, cl, Purpose::Activation),
            s.cluster_coin(3, cl, Purpose::Flip)
        );
        assert_ne!(
            s.cluster_coin(3, cl, Purpose::Activation),
            s.cluster_coin(4, cl, Purpose::Activation)
        );
        assert_ne!(
            CoinStream::new(8).cluster_coin(3, cl, Purpose::Activation),
            s.cluster_coin(3, cl, Purpose::Activation)
        );
    }

    #[test]
    fn fires_edge_cases() {
        assert!(fires(0, 1.0));
        assert!(fires(u64::MAX, 1.0));
        assert!(!fires(0, 0.0));
        assert!(fires(0, 1e-12));
    }

    #[test]
    fn empirical_rate_close_to_p() {
        let s = CoinStream::new(42);
        let p = 0.3;
        let mut hits = 0usize;
        let n = 100_000;
        for i in 0..n {
            let cl = Cluster { vertices: vec![i as u32], colors: (1, 2) };
            if fires(s.cluster_coin(0, &cl, Purpose::Activation), p) {
                hits += 1;
            }
        }
        let rate = hits as f64 / n as f64;
        assert!((rate - p).abs() < 0.01, "rate {rate}");
    }
}
