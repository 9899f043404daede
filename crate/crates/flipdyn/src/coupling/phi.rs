//! The configuration functional `Phi` and exhaustive bound scans.
//!
//! For one color at the disagreement, the coupled flips change the Hamming
//! distance by at most `Phi` in expectation (per unit activation mass):
//!
//! ```text
//! Phi = (A - a_imax - 1) f_A  +  (B - b_jmax - 1) f_B
//!     + sum_i [ (a_i + b_i - 1) min(q_i, q'_i)
//!               + a_i (q_i - min) + b_i (q'_i - min) ]
//! ```
//!
//! where `q_i = f(a_i)` minus `f_A` on the designated largest slot, and
//! `q'_i = f(b_i)` minus `f_B` on the designated largest co-slot. Empty
//! (deduplicated) slots and oversized components contribute with `f = 0`.
//!
//! The scan enumerates every configuration shape with `d <= d_max` and
//! entries up to `size_max` — including zeroed duplicate slots and every
//! admissible choice of the designated maxima — and compares `Phi` against
//! `(11/6) d - 1` and, for non-extremal configurations, `(161/88) d - 1`.

use crate::coloring::{classify, Configuration, ExtremalClass};
use crate::rat::{rat, rat_i, rat_str, Rat};
use crate::schedule::FlipSchedule;
use num::{BigInt, ToPrimitive};
use std::collections::BTreeSet;

/// One `Phi` evaluation against its applicable bound.
#[derive(Debug, Clone)]
pub struct PhiReport {
    pub config: Configuration,
    pub phi: Rat,
    pub bound: Rat,
    pub slack: Rat,
}

impl PhiReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config.to_string(),
            "phi": rat_str(&self.phi),
            "bound": rat_str(&self.bound),
            "slack": rat_str(&self.slack),
        })
    }
}

fn sched_value(s: &FlipSchedule, size: usize) -> Rat {
    s.prob(size)
}

/// The Hamming bound `(11/6) d - 1`.
pub fn hamming_bound(d: usize) -> Rat {
    rat(11, 6) * rat_i(d as i64) - rat_i(1)
}

/// The non-extremal bound `(161/88) d - 1`.
pub fn non_extremal_bound(d: usize) -> Rat {
    rat(161, 88) * rat_i(d as i64) - rat_i(1)
}

/// Exact `Phi` of a configuration, using the canonical slot order: the
/// designated slots are the first attaining `max a_i` and `max b_i`.
pub fn phi_value(cfg: &Configuration, schedule: &FlipSchedule) -> Rat {
    let slots = cfg.slots();
    let d = slots.len();
    let a_max = slots.iter().map(|s| s.0).max().unwrap();
    let b_max = slots.iter().map(|s| s.1).max().unwrap();
    let i_max = slots.iter().position(|s| s.0 == a_max).unwrap();
    let j_max = slots.iter().position(|s| s.1 == b_max).unwrap();
    let f_a = sched_value(schedule, cfg.big_a as usize);
    let f_b = sched_value(schedule, cfg.big_b as usize);
    let mut phi = rat_i(cfg.big_a as i64 - a_max as i64 - 1) * &f_a
        + rat_i(cfg.big_b as i64 - b_max as i64 - 1) * &f_b;
    for (i, &(a, b)) in slots.iter().enumerate().take(d) {
        let mut q = sched_value(schedule, a as usize);
        if i == i_max {
            q -= &f_a;
        }
        let mut qp = sched_value(schedule, b as usize);
        if i == j_max {
            qp -= &f_b;
        }
        let m = if q <= qp { q.clone() } else { qp.clone() };
        phi += rat_i(a as i64 + b as i64 - 1) * &m
            + rat_i(a as i64) * (&q - &m)
            + rat_i(b as i64) * (&qp - &m);
    }
    phi
}

/// `Phi` with its applicable bound: the Hamming bound in general, tightened
/// to `(161/88) d - 1` for non-extremal configurations under the tuned
/// schedule.
pub fn phi(cfg: &Configuration, schedule: &FlipSchedule) -> PhiReport {
    let value = phi_value(cfg, schedule);
    let bound = if schedule.name() == "cdmpp" && classify(cfg) == ExtremalClass::C0 {
        non_extremal_bound(cfg.d())
    } else {
        hamming_bound(cfg.d())
    };
    let slack = &bound - &value;
    PhiReport { config: cfg.clone(), phi: value, bound, slack }
}

/// Result of the exhaustive configuration scan.
#[derive(Debug, Clone)]
pub struct PhiScan {
    pub schedule: String,
    pub d_max: usize,
    pub size_max: u8,
    pub configs_checked: u64,
    /// Configurations with `Phi > (11/6) d - 1`.
    pub hamming_violations: Vec<PhiReport>,
    /// Non-extremal configurations with `Phi > (161/88) d - 1`
    /// (collected only when the scan runs with `check_non_extremal`).
    pub non_extremal_violations: Vec<PhiReport>,
    /// Configurations attaining the Hamming bound with equality.
    pub equality_witnesses: Vec<Configuration>,
    /// Worst (smallest-slack) report against the Hamming bound.
    pub worst: Option<PhiReport>,
}

impl PhiScan {
    pub fn pass(&self) -> bool {
        self.hamming_violations.is_empty() && self.non_extremal_violations.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schedule": self.schedule,
            "d_max": self.d_max,
            "size_max": self.size_max,
            "configs_checked": self.configs_checked,
            "hamming_violations": self.hamming_violations.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            "non_extremal_violations": self.non_extremal_violations.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            "equality_witnesses": self.equality_witnesses.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "worst": self.worst.as_ref().map(|r| r.to_json()),
            "pass": self.pass(),
        })
    }
}

/// Fixed-denominator integer view of a schedule, fast enough to evaluate
/// tens of millions of configurations.
struct FixedPoint {
    /// numerators of f(0), f(1), ..., f(7) over `den`.
    num: [i64; 8],
    den: i64,
}

impl FixedPoint {
    fn new(schedule: &FlipSchedule) -> Option<FixedPoint> {
        // Common denominator of the schedule entries and both bounds.
        let mut den = BigInt::from(264); // lcm(6, 88)
        for p in schedule.probs() {
            den = num::integer::lcm(den, p.denom().clone());
        }
        let den_i = den.to_i64()?;
        if den_i > 1_000_000_000 {
            return None;
        }
        let mut numerators = [0i64; 8];
        for (s, n) in numerators.iter_mut().enumerate().take(7).skip(1) {
            let p = schedule.prob(s);
            *n = (p.numer() * &den / p.denom()).to_i64()?;
        }
        Some(FixedPoint { num: numerators, den: den_i })
    }

    #[inline]
    fn f(&self, size: i64) -> i64 {
        if (1..=6).contains(&size) {
            self.num[size as usize]
        } else {
            0
        }
    }
}

/// Evaluates `Phi` (numerator over `fp.den`) for a slot multiset with a
/// designated largest slot on each side. `des_a`/`des_b` give the slot
/// values carrying the designation; `same_slot` says whether one slot holds
/// both designations.
#[allow(clippy::too_many_arguments)]
fn phi_fixed(
    fp: &FixedPoint,
    slots: &[(i64, i64)],
    big_a: i64,
    big_b: i64,
    des_a: (i64, i64),
    des_b: (i64, i64),
    same_slot: bool,
) -> i64 {
    let f_a = fp.f(big_a);
    let f_b = fp.f(big_b);
    let mut phi = (big_a - des_a.0 - 1) * f_a + (big_b - des_b.1 - 1) * f_b;
    let mut take_a = true;
    let mut take_b = true;
    for &(a, b) in slots {
        let mut q = fp.f(a);
        let mut qp = fp.f(b);
        if same_slot {
            if take_a && (a, b) == des_a {
                q -= f_a;
                qp -= f_b;
                take_a = false;
                take_b = false;
            }
        } else {
            if take_a && (a, b) == des_a {
                q -= f_a;
                take_a = false;
            } else if take_b && (a, b) == des_b {
                qp -= f_b;
                take_b = false;
            }
        }
        let m = q.min(qp);
        phi += (a + b - 1) * m + a * (q - m) + b * (qp - m);
    }
    phi
}

/// Exhaustively scans all configurations with `d <= d_max` and slot entries
/// `<= size_max`, including zeroed duplicate slots and every admissible
/// designation of the largest slots.
pub fn phi_scan(
    schedule: &FlipSchedule,
    d_max: usize,
    size_max: u8,
    check_non_extremal: bool,
) -> PhiScan {
    assert!(d_max >= 1 && d_max <= 6, "scan is exhaustive only up to d = 6");
    assert!(size_max <= 6);
    let fp = FixedPoint::new(schedule).expect("schedule denominators too large for the scan");
    let ham_num = |d: i64| (11 * fp.den / 6) * d - fp.den;
    let ne_num = |d: i64| (161 * fp.den / 88) * d - fp.den;

    let mut scan = PhiScan {
        schedule: schedule.name().to_string(),
        d_max,
        size_max,
        configs_checked: 0,
        hamming_violations: Vec::new(),
        non_extremal_violations: Vec::new(),
        equality_witnesses: Vec::new(),
        worst: None,
    };
    let mut witnesses: BTreeSet<Configuration> = BTreeSet::new();
    let mut worst: Option<(Rat, Configuration)> = None;

    // Pair values in descending order so multisets come out presorted.
    let mut values: Vec<(i64, i64)> = Vec::new();
    for a in (0..=size_max as i64).rev() {
        for b in (0..=size_max as i64).rev() {
            values.push((a, b));
        }
    }

    let mut slots: Vec<(i64, i64)> = Vec::new();
    for d in 1..=d_max {
        let ham = ham_num(d as i64);
        let ne = ne_num(d as i64);
        enumerate_multisets(&values, 0, d, &mut slots, &mut |slots| {
            // A physical configuration has a first slot with both entries
            // positive (later slots may be zeroed duplicates).
            if !slots.iter().any(|&(a, b)| a >= 1 && b >= 1) {
                return;
            }
            let big_a: i64 = 1 + slots.iter().map(|s| s.0).sum::<i64>();
            let big_b: i64 = 1 + slots.iter().map(|s| s.1).sum::<i64>();
            // Slots arrive sorted descending by (a, b), so the largest `a`
            // sits first; duplicates of a candidate value are adjacent.
            let a_max = slots[0].0;
            let b_max = slots.iter().map(|s| s.1).max().unwrap();
            let mut a_cands = [(0i64, 0i64); 6];
            let mut na = 0usize;
            for &s in slots.iter() {
                if s.0 == a_max && (na == 0 || a_cands[na - 1] != s) {
                    a_cands[na] = s;
                    na += 1;
                }
            }
            let mut b_cands = [(0i64, 0i64); 6];
            let mut nb = 0usize;
            for &s in slots.iter() {
                if s.1 == b_max && !b_cands[..nb].contains(&s) {
                    b_cands[nb] = s;
                    nb += 1;
                }
            }
            scan.configs_checked += 1;
            let mut phi_worst: Option<i64> = None;
            for &u in &a_cands[..na] {
                for &w in &b_cands[..nb] {
                    let variants: [Option<bool>; 2] = if u == w {
                        let twice = slots.iter().filter(|&&s| s == u).count() >= 2;
                        [Some(true), if twice { Some(false) } else { None }]
                    } else {
                        [Some(false), None]
                    };
                    for same in variants.into_iter().flatten() {
                        let v = phi_fixed(&fp, slots, big_a, big_b, u, w, same);
                        if phi_worst.is_none_or(|cur| v > cur) {
                            phi_worst = Some(v);
                        }
                    }
                }
            }
            let v = phi_worst.unwrap();
            let cap = |x: i64| x.min(7) as u8;
            let make_cfg = || {
                Configuration::new(
                    cap(big_a),
                    cap(big_b),
                    slots.iter().map(|s| cap(s.0)).collect(),
                    slots.iter().map(|s| cap(s.1)).collect(),
                )
            };
            if v >= ham {
                let cfg = make_cfg();
                if v > ham {
                    scan.hamming_violations.push(phi(&cfg, schedule));
                } else {
                    witnesses.insert(cfg);
                }
            }
            if check_non_extremal && v > ne {
                let cfg = make_cfg();
                if classify(&cfg) == ExtremalClass::C0 {
                    let value = Rat::new(BigInt::from(v), BigInt::from(fp.den));
                    let bound = non_extremal_bound(d);
                    let slack = &bound - &value;
                    scan.non_extremal_violations.push(PhiReport {
                        config: cfg,
                        phi: value,
                        bound,
                        slack,
                    });
                }
            }
            let slack = Rat::new(BigInt::from(ham - v), BigInt::from(fp.den));
            if worst.as_ref().is_none_or(|(s, _)| slack < *s) {
                worst = Some((slack, make_cfg()));
            }
        });
    }
    scan.equality_witnesses = witnesses.into_iter().collect();
    scan.worst = worst.map(|(_, cfg)| phi(&cfg, schedule));
    scan
}

/// Multisets of `depth` values drawn with repetition from `values[from..]`.
fn enumerate_multisets(
    values: &[(i64, i64)],
    from: usize,
    depth: usize,
    slots: &mut Vec<(i64, i64)>,
    visit: &mut impl FnMut(&[(i64, i64)]),
) {
    if depth == 0 {
        visit(slots);
        return;
    }
    for i in from..values.len() {
        slots.push(values[i]);
        enumerate_multisets(values, i, depth - 1, slots, visit);
        slots.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;

    #[test]
    fn phi_of_the_small_extremal_tuple() {
        // (3,2;(2),(1)): Phi = p_1 - p_3 = 5/6 under both schedules.
        let cfg = Configuration::new(3, 2, vec![2], vec![1]);
        for s in [FlipSchedule::vigoda(), FlipSchedule::cdmpp()] {
            let report = phi(&cfg, &s);
            assert_eq!(report.phi, rat(5, 6), "schedule {}", s.name());
            assert_eq!(report.bound, rat(5, 6));
            assert!(report.slack.is_zero());
        }
        // Mirror tuple has the same value.
        let mirror = cfg.mirrored();
        assert_eq!(phi_value(&mirror, &FlipSchedule::cdmpp()), rat(5, 6));
    }

    #[test]
    fn phi_of_the_large_extremal_tuple() {
        // (7,3;(3,3),(1,1)): Phi = 8/3 = (11/6)*2 - 1.
        let cfg = Configuration::new(7, 3, vec![3, 3], vec![1, 1]);
        let report = phi(&cfg, &FlipSchedule::cdmpp());
        assert_eq!(report.phi, rat(8, 3));
        assert_eq!(report.bound, rat(8, 3));
        assert!(report.slack.is_zero());
    }

    #[test]
    fn phi_vigoda_two_slot_tight_case() {
        // a = (2,2), b = (1,1): Phi = 2 + 2 f_2 + f_5 = 8/3.
        let cfg = Configuration::new(5, 3, vec![2, 2], vec![1, 1]);
        let v = FlipSchedule::vigoda();
        assert_eq!(
            phi_value(&cfg, &v),
            rat_i(2) + rat_i(2) * v.prob(2) + v.prob(5)
        );
        assert_eq!(phi_value(&cfg, &v), rat(8, 3));
    }

    #[test]
    fn phi_d1_reduces_to_the_drop_form() {
        // For d = 1 the functional equals i(f_i - f_{i+1}) + (j-1)(f_j - f_{j+1})
        // with i the smaller of the two cluster sizes.
        let v = FlipSchedule::vigoda();
        for a in 1u8..=6 {
            for b in 1u8..=6 {
                let cfg = Configuration::new(a + 1, b + 1, vec![a], vec![b]);
                let (i, j) = (a.min(b) as usize, a.max(b) as usize);
                let drop = |s: usize| v.prob(s) - v.prob(s + 1);
                let expect = rat_i(i as i64) * drop(i) + rat_i(j as i64 - 1) * drop(j);
                assert_eq!(phi_value(&cfg, &v), expect, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn cdmpp_non_extremal_is_tight_at_161_over_88() {
        // d = 1 slots (3,1)..(6,1) all sit exactly at the non-extremal bound.
        let p = FlipSchedule::cdmpp();
        for a in 3u8..=6 {
            let cfg = Configuration::new(a + 1, 2, vec![a], vec![1]);
            let report = phi(&cfg, &p);
            assert_eq!(report.phi, rat(73, 88), "a={a}");
            assert_eq!(report.bound, rat(73, 88));
            assert!(report.slack.is_zero());
        }
    }

    #[test]
    fn scan_vigoda_small_depth() {
        let scan = phi_scan(&FlipSchedule::vigoda(), 2, 6, false);
        assert!(scan.pass(), "violations: {:?}", scan.hamming_violations);
        let has = |cfg: &Configuration| scan.equality_witnesses.contains(cfg);
        assert!(has(&Configuration::new(5, 3, vec![2, 2], vec![1, 1])));
        assert!(has(&Configuration::new(3, 2, vec![2], vec![1])));
        assert!(has(&Configuration::new(2, 3, vec![1], vec![2])));
    }

    #[test]
    fn scan_cdmpp_small_depth_witnesses_are_extremal_only() {
        let scan = phi_scan(&FlipSchedule::cdmpp(), 2, 6, true);
        assert!(scan.pass());
        assert_eq!(
            scan.equality_witnesses,
            vec![
                Configuration::new(2, 3, vec![1], vec![2]),
                Configuration::new(3, 2, vec![2], vec![1]),
                Configuration::new(3, 7, vec![1, 1], vec![3, 3]),
                Configuration::new(7, 3, vec![3, 3], vec![1, 1]),
            ]
        );
        for w in &scan.equality_witnesses {
            assert_ne!(classify(w), ExtremalClass::C0);
        }
    }

    #[test]
    fn fixed_point_agrees_with_bigrational() {
        let fp = FixedPoint::new(&FlipSchedule::cdmpp()).unwrap();
        for d in 1..=3usize {
            let mut slots = Vec::new();
            enumerate_multisets(
                &[(3, 1), (2, 2), (1, 0), (0, 1), (6, 6)],
                0,
                d,
                &mut slots,
                &mut |slots| {
                    if !slots.iter().any(|&(a, b)| a >= 1 && b >= 1) {
                        return;
                    }
                    let big_a = 1 + slots.iter().map(|s| s.0).sum::<i64>();
                    let big_b = 1 + slots.iter().map(|s| s.1).sum::<i64>();
                    let cap = |x: i64| x.min(7) as u8;
                    let cfg = Configuration::new(
                        cap(big_a),
                        cap(big_b),
                        slots.iter().map(|s| cap(s.0)).collect(),
                        slots.iter().map(|s| cap(s.1)).collect(),
                    );
                    let exact = phi_value(&cfg, &FlipSchedule::cdmpp());
                    // The canonical designation is one of the enumerated
                    // variants; check it is reproduced exactly.
                    let sorted = cfg.slots();
                    let a_max = sorted.iter().map(|s| s.0).max().unwrap() as i64;
                    let b_max = sorted.iter().map(|s| s.1).max().unwrap() as i64;
                    let i_max = sorted.iter().position(|s| s.0 as i64 == a_max).unwrap();
                    let j_max = sorted.iter().position(|s| s.1 as i64 == b_max).unwrap();
                    let slots_i64: Vec<(i64, i64)> =
                        sorted.iter().map(|s| (s.0 as i64, s.1 as i64)).collect();
                    let fixed = phi_fixed(
                        &fp,
                        &slots_i64,
                        big_a.min(7),
                        big_b.min(7),
                        slots_i64[i_max],
                        slots_i64[j_max],
                        i_max == j_max,
                    );
                    assert_eq!(
                        exact,
                        Rat::new(BigInt::from(fixed), BigInt::from(fp.den)),
                        "cfg {cfg}"
                    );
                },
            );
        }
    }
}
