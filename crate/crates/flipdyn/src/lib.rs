//! Synchronous flip dynamics for sampling proper k-colorings.
//!
//! The chain recolors maximal 2-colored components ("clusters") of size at
//! most six: in every round each cluster independently activates with a small
//! probability, activations that overlap or that sit on adjacent vertices
//! while sharing a color cancel each other, and every surviving cluster flips
//! its two colors with a probability that depends only on its size.
//!
//! The crate contains
//! - the round itself ([`dynamics`]), both as a direct simulator and as a
//!   faithful message-passing protocol in the LOCAL model ([`local`]),
//! - cluster detection and the cluster-graph distance ([`cluster`]),
//! - the size-indexed flip schedules with their certified inequalities
//!   ([`schedule`]),
//! - exact finite-state analysis: transition matrices in exact rationals,
//!   stationary distributions, total-variation mixing profiles ([`analysis`]),
//! - the one-round coupling of two chains that differ at a single vertex,
//!   the `Phi` configuration functional with exhaustive bound scans, and
//!   contraction / coalescence experiments ([`coupling`]).

pub mod analysis;
pub mod coins;
pub mod coloring;
pub mod coupling;
pub mod cluster;
pub mod dynamics;
pub mod graph;
pub mod local;
pub mod schedule;

pub mod rat;

pub use rat::{rat, rat_i, rat_str, Rat};

pub use coloring::{
    available_colors, classify, configuration_at, gamma, hamming, is_proper, weighted_distance,
    AdjacentPair, Color, Coloring, Configuration, ExtremalClass,
};
pub use cluster::{
    cluster_at, cluster_distance, conflict, enumerate_clusters, overlap, ChainSide, Cluster,
    ClusterProbe, ClusterSet, MAX_CLUSTER_SIZE,
};
pub use graph::{Graph, GraphSpec, Vertex};
pub use schedule::FlipSchedule;
