//! Message-passing implementation of one round in the LOCAL model.
//!
//! Twelve synchronous message rounds, constant in the graph size:
//!
//! 1..6   cluster discovery: per color pair, member sets relay along
//!        alternating edges; after six hops every vertex knows the full
//!        member list of each of its clusters (a component on at most six
//!        vertices has diameter at most five) and any component that shows
//!        seven or more members marks itself discarded.
//! 7      status: every vertex tells its neighbors which of its clusters
//!        are active. Activation coins are evaluated locally from the
//!        keyed stream (a deployed system would pre-share per-cluster
//!        seeds derived after discovery; vertices know their neighbors'
//!        colors, maintained by the commit announcements of the previous
//!        round). At the end of the status round each vertex records every
//!        interference it can witness: an overlap at itself, or an active
//!        neighboring cluster sharing a color.
//! 8..12  veto relay: witnessed vetoes travel along cluster edges; five
//!        hops cover the worst-case member-to-member distance. In round 12
//!        each representative also announces its cluster's flip coin, and
//!        every member applies the swap exactly when its cluster is
//!        active, veto-free, and the coin fired.
//!
//! All messages travel along graph edges; the flip coin of a cluster is
//! announced only by its representative (the minimum-index member).

use crate::coins::{fires, Purpose};
use crate::coloring::{is_proper, Color, Coloring};
use crate::cluster::Cluster;
use crate::dynamics::{DynamicsError, RoundParams};
use crate::graph::{Graph, Vertex};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Fixed round budget of the protocol; independent of n, k, and degree.
pub const ROUND_BUDGET: usize = 12;

pub type ClusterKey = (Vertex, Color, Color);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Payload {
    Discovery { pair: (Color, Color), members: Vec<Vertex>, oversize: bool },
    Status { key: ClusterKey, active: bool },
    Veto { key: ClusterKey },
    FlipCommit { key: ClusterKey, flip: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub src: Vertex,
    pub dst: Vertex,
    pub round: u8,
    pub payload: Payload,
}

#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub rounds_used: usize,
    pub messages: Vec<Message>,
    pub result: Coloring,
    pub flipped: Vec<Cluster>,
}

#[derive(Debug, Clone, Default)]
struct Know {
    members: BTreeSet<Vertex>,
    oversize: bool,
}

/// One synchronous round of the chain, executed by message passing.
/// Produces exactly the same coloring and flipped set as the direct engine
/// under the same `(seed, round)`.
pub fn run_local_round(
    g: &Graph,
    sigma: &Coloring,
    params: &RoundParams,
    round: u64,
) -> Result<ProtocolRun, DynamicsError> {
    if !is_proper(g, sigma) {
        return Err(DynamicsError::ImproperInput);
    }
    let n = g.n();
    let k = sigma.k();
    let coins = params.coins();
    let mut log: Vec<Message> = Vec::new();

    // Per-vertex discovery state: the member sets of every color pair the
    // vertex participates in.
    let mut know: Vec<BTreeMap<(Color, Color), Know>> = (0..n)
        .map(|v| {
            let own = sigma.color(v as Vertex);
            (1..=k)
                .map(|c| {
                    let pair = (own.min(c), own.max(c));
                    let mut kn = Know::default();
                    kn.members.insert(v as Vertex);
                    (pair, kn)
                })
                .collect()
        })
        .collect();

    // Rounds 1..6: alternating relay of member sets.
    for round_no in 1u8..=6 {
        let mut inbox: Vec<Vec<(Color, Color, Vec<Vertex>, bool)>> = vec![Vec::new(); n];
        for v in 0..n as Vertex {
            let own = sigma.color(v);
            for (&pair, kn) in &know[v as usize] {
                let other = if pair.0 == own { pair.1 } else { pair.0 };
                if other == own {
                    continue; // degenerate pair never relays
                }
                for &w in g.neighbors(v) {
                    if sigma.color(w) == other {
                        log.push(Message {
                            src: v,
                            dst: w,
                            round: round_no,
                            payload: Payload::Discovery {
                                pair,
                                members: kn.members.iter().copied().collect(),
                                oversize: kn.oversize,
                            },
                        });
                        inbox[w as usize].push((
                            pair.0,
                            pair.1,
                            kn.members.iter().copied().collect(),
                            kn.oversize,
                        ));
                    }
                }
            }
        }
        for (v, items) in inbox.into_iter().enumerate() {
            for (c1, c2, members, oversize) in items {
                let kn = know[v].get_mut(&(c1, c2)).expect("receiver participates in the pair");
                kn.members.extend(members);
                if oversize || kn.members.len() > crate::cluster::MAX_CLUSTER_SIZE {
                    kn.oversize = true;
                }
            }
        }
    }

    // Local cluster views with activation coins: key -> (cluster, active).
    let mut my_clusters: Vec<BTreeMap<ClusterKey, (Cluster, bool)>> = vec![BTreeMap::new(); n];
    for v in 0..n {
        for (&pair, kn) in &know[v] {
            if kn.oversize {
                continue;
            }
            let cl = Cluster { vertices: kn.members.iter().copied().collect(), colors: pair };
            let active = fires(coins.cluster_coin(round, &cl, Purpose::Activation), params.alpha);
            my_clusters[v].insert(cl.key(), (cl, active));
        }
    }

    // Round 7: status exchange with all neighbors.
    let mut neighbor_status: Vec<Vec<(ClusterKey, (Color, Color), bool)>> = vec![Vec::new(); n];
    for v in 0..n as Vertex {
        for (key, (cl, active)) in &my_clusters[v as usize] {
            for &w in g.neighbors(v) {
                log.push(Message {
                    src: v,
                    dst: w,
                    round: 7,
                    payload: Payload::Status { key: *key, active: *active },
                });
                neighbor_status[w as usize].push((*key, cl.colors, *active));
            }
        }
    }

    // Witnessed vetoes: overlaps at this vertex, conflicts across edges.
    let mut vetoes: Vec<BTreeSet<ClusterKey>> = vec![BTreeSet::new(); n];
    for v in 0..n {
        let actives: Vec<(ClusterKey, (Color, Color))> = my_clusters[v]
            .iter()
            .filter(|(_, (_, a))| *a)
            .map(|(key, (cl, _))| (*key, cl.colors))
            .collect();
        for (i, &(key_a, _)) in actives.iter().enumerate() {
            for &(key_b, _) in &actives[i + 1..] {
                vetoes[v].insert(key_a);
                vetoes[v].insert(key_b);
            }
        }
        for &(key_t, colors_t, active_t) in &neighbor_status[v] {
            if !active_t {
                continue;
            }
            for &(key_s, colors_s) in &actives {
                if key_t == key_s {
                    continue;
                }
                let (a1, a2) = colors_s;
                let (b1, b2) = colors_t;
                if a1 == b1 || a1 == b2 || a2 == b1 || a2 == b2 {
                    vetoes[v].insert(key_s);
                }
            }
        }
    }

    // Rounds 8..12: veto relay along cluster edges.
    for round_no in 8u8..=12 {
        let mut inbox: Vec<Vec<ClusterKey>> = vec![Vec::new(); n];
        for v in 0..n as Vertex {
            for key in vetoes[v as usize].iter() {
                if let Some((cl, _)) = my_clusters[v as usize].get(key) {
                    for &w in g.neighbors(v) {
                        if cl.contains(w) {
                            log.push(Message {
                                src: v,
                                dst: w,
                                round: round_no,
                                payload: Payload::Veto { key: *key },
                            });
                            inbox[w as usize].push(*key);
                        }
                    }
                }
            }
        }
        for (v, keys) in inbox.into_iter().enumerate() {
            vetoes[v].extend(keys);
        }
    }

    // Round 12: representatives announce their flip coins.
    for v in 0..n as Vertex {
        for (key, (cl, active)) in &my_clusters[v as usize] {
            if cl.pres() != v || !*active {
                continue;
            }
            let flip = fires(
                coins.cluster_coin(round, cl, Purpose::Flip),
                params.schedule.prob_f64(cl.size()),
            );
            for &w in g.neighbors(v) {
                if cl.contains(w) {
                    log.push(Message {
                        src: v,
                        dst: w,
                        round: 12,
                        payload: Payload::FlipCommit { key: *key, flip },
                    });
                }
            }
        }
    }

    // Apply: every member evaluates the same predicate locally.
    let mut result = sigma.clone();
    let mut flipped: BTreeSet<Cluster> = BTreeSet::new();
    for v in 0..n as Vertex {
        for (key, (cl, active)) in &my_clusters[v as usize] {
            if !*active || vetoes[v as usize].contains(key) {
                continue;
            }
            let flip = fires(
                coins.cluster_coin(round, cl, Purpose::Flip),
                params.schedule.prob_f64(cl.size()),
            );
            if !flip {
                continue;
            }
            flipped.insert(cl.clone());
            if cl.is_degenerate() {
                continue;
            }
            let (c1, c2) = cl.colors;
            let cur = result.color(v);
            debug_assert!(cur == c1 || cur == c2);
            result.set_color(v, if cur == c1 { c2 } else { c1 });
        }
    }
    debug_assert!(is_proper(g, &result));
    Ok(ProtocolRun {
        rounds_used: ROUND_BUDGET,
        messages: log,
        result,
        flipped: flipped.into_iter().collect(),
    })
}

#[derive(Debug, Clone, Default)]
pub struct AuditReport {
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies locality (messages travel along edges), the round budget, and
/// that flip announcements originate only from cluster representatives.
pub fn audit_protocol(run: &ProtocolRun, g: &Graph) -> AuditReport {
    let mut report = AuditReport::default();
    if run.rounds_used > ROUND_BUDGET {
        report
            .violations
            .push(format!("round budget exceeded: {} > {ROUND_BUDGET}", run.rounds_used));
    }
    for m in &run.messages {
        if m.src == m.dst || !g.are_adjacent(m.src, m.dst) {
            report.violations.push(format!(
                "non-edge message {} -> {} in round {}",
                m.src, m.dst, m.round
            ));
        }
        if m.round as usize > ROUND_BUDGET {
            report.violations.push(format!(
                "message in round {} beyond the budget {ROUND_BUDGET}",
                m.round
            ));
        }
        if let Payload::FlipCommit { key, .. } = &m.payload {
            if m.src != key.0 {
                report.violations.push(format!(
                    "flip commit for cluster ({},{},{}) announced by non-representative {}",
                    key.0, key.1, key.2, m.src
                ));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::distributed_round;
    use crate::schedule::FlipSchedule;
    use rand::SeedableRng;

    fn params(alpha: f64, seed: u64) -> RoundParams {
        RoundParams::new(alpha, FlipSchedule::vigoda(), seed)
    }

    #[test]
    fn matches_direct_engine_on_small_instances() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
        for seed in 0..40u64 {
            let g = Graph::random_regular(12, 3, seed).unwrap();
            let sigma = Coloring::random_proper(&g, 6, &mut rng).unwrap();
            let p = params(0.3, 1000 + seed);
            for round in 0..4 {
                let run = run_local_round(&g, &sigma, &p, round).unwrap();
                let (direct, trace) = distributed_round(&g, &sigma, &p, round).unwrap();
                assert_eq!(run.result, direct, "seed {seed} round {round}");
                let mut direct_flips = trace.flipped.clone();
                direct_flips.sort();
                assert_eq!(run.flipped, direct_flips, "flipped sets differ");
                assert_eq!(run.rounds_used, ROUND_BUDGET);
                assert!(audit_protocol(&run, &g).pass());
            }
        }
    }

    #[test]
    fn oversized_components_never_flip() {
        // An 8-cycle alternating two colors: every (1,2) component is the
        // whole cycle, size 8 > 6, and must be discarded.
        let g = Graph::cycle(8).unwrap();
        let sigma = Coloring::new(vec![1, 2, 1, 2, 1, 2, 1, 2], 4).unwrap();
        let p = params(1.0, 3);
        for round in 0..20 {
            let run = run_local_round(&g, &sigma, &p, round).unwrap();
            for cl in &run.flipped {
                assert!(cl.colors != (1, 2), "oversized component flipped");
            }
            assert_eq!(run.result, distributed_round(&g, &sigma, &p, round).unwrap().0);
        }
    }

    #[test]
    fn constant_round_count_across_instances() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(4);
        let instances = [
            Graph::cycle(4).unwrap(),
            Graph::path(2).unwrap(),
            Graph::random_regular(50, 3, 9).unwrap(),
            Graph::grid(4, 5).unwrap(),
        ];
        let mut counts = BTreeSet::new();
        for g in &instances {
            let k = (g.max_degree() + 2) as Color;
            let sigma = Coloring::random_proper(g, k, &mut rng).unwrap();
            let run = run_local_round(g, &sigma, &params(0.1, 5), 0).unwrap();
            counts.insert(run.rounds_used);
        }
        assert_eq!(counts.len(), 1);
        assert_eq!(counts.into_iter().next().unwrap(), ROUND_BUDGET);
    }

    #[test]
    fn audit_flags_injected_faults() {
        let g = Graph::cycle(4).unwrap();
        let sigma = Coloring::new(vec![1, 2, 1, 2], 4).unwrap();
        let mut run = run_local_round(&g, &sigma, &params(0.2, 8), 0).unwrap();
        assert!(audit_protocol(&run, &g).pass());

        // Non-edge message: vertices 0 and 2 are opposite corners.
        run.messages.push(Message {
            src: 0,
            dst: 2,
            round: 7,
            payload: Payload::Status { key: (0, 1, 2), active: true },
        });
        let report = audit_protocol(&run, &g);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].contains("non-edge"));

        // Flip announced by a member that is not the representative.
        run.messages.pop();
        run.messages.push(Message {
            src: 1,
            dst: 0,
            round: 12,
            payload: Payload::FlipCommit { key: (0, 1, 2), flip: true },
        });
        let report = audit_protocol(&run, &g);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].contains("non-representative"));
    }

    #[test]
    fn discovery_learns_exact_member_sets() {
        // Alternating 6-path: the (1,2) component is all six vertices, at
        // the cap; every vertex must know all six members (diameter 5).
        let g = Graph::path(6).unwrap();
        let sigma = Coloring::new(vec![1, 2, 1, 2, 1, 2], 3).unwrap();
        let p = params(0.5, 11);
        for round in 0..50 {
            let run = run_local_round(&g, &sigma, &p, round).unwrap();
            let (direct, _) = distributed_round(&g, &sigma, &p, round).unwrap();
            assert_eq!(run.result, direct, "round {round}");
        }
    }
}
