//! Size-indexed flip schedules and the exact inequality certificates the
//! coupling analysis rests on.

use crate::rat::{parse_rat, rat, rat_f64, rat_i, rat_str, Rat};
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("schedule must start with probability 1 for singletons, got {0}")]
    FirstNotOne(String),
    #[error("schedule must be nonincreasing: index {0} rises")]
    NotMonotone(usize),
    #[error("flip probability {0} at index {1} outside [0,1]")]
    OutOfRange(String, usize),
    #[error("flip probabilities must vanish beyond size 6, got {0} at index {1}")]
    TailNotZero(String, usize),
    #[error("schedule needs at least one entry")]
    Empty,
    #[error("bad rational {0:?}")]
    BadRational(String),
}

/// Flip probabilities indexed by cluster size, exact rationals.
///
/// Invariants: `prob(1) = 1`, nonincreasing, and `prob(s) = 0` for `s >= 7`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipSchedule {
    name: String,
    probs: Vec<Rat>, // probs[i] = flip probability for size i+1; length 6
}

impl FlipSchedule {
    /// The original flip parameters: 1, 13/42, 1/6, 2/21, 1/21, 1/84.
    pub fn vigoda() -> Self {
        FlipSchedule {
            name: "vigoda".into(),
            probs: vec![rat_i(1), rat(13, 42), rat(1, 6), rat(2, 21), rat(1, 21), rat(1, 84)],
        }
    }

    /// The LP-tuned parameters: 1, 185/616, 1/6, 47/462, 9/154, 2/77.
    pub fn cdmpp() -> Self {
        FlipSchedule {
            name: "cdmpp".into(),
            probs: vec![
                rat_i(1),
                rat(185, 616),
                rat(1, 6),
                rat(47, 462),
                rat(9, 154),
                rat(2, 77),
            ],
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "vigoda" => Some(Self::vigoda()),
            "cdmpp" => Some(Self::cdmpp()),
            _ => None,
        }
    }

    pub fn new(name: impl Into<String>, probs: Vec<Rat>) -> Result<Self, ScheduleError> {
        if probs.is_empty() {
            return Err(ScheduleError::Empty);
        }
        for (idx, p) in probs.iter().enumerate() {
            if p < &Rat::zero() || p > &Rat::one() {
                return Err(ScheduleError::OutOfRange(rat_str(p), idx + 1));
            }
            if idx > 0 && probs[idx] > probs[idx - 1] {
                return Err(ScheduleError::NotMonotone(idx + 1));
            }
            if idx >= 6 && !p.is_zero() {
                return Err(ScheduleError::TailNotZero(rat_str(p), idx + 1));
            }
        }
        if !probs[0].is_one() {
            return Err(ScheduleError::FirstNotOne(rat_str(&probs[0])));
        }
        let mut probs: Vec<Rat> = probs.into_iter().take(6).collect();
        probs.resize(6, Rat::zero());
        Ok(FlipSchedule { name: name.into(), probs })
    }

    /// Parses entries like `["1", "13/42", ...]` for sizes 1, 2, ...
    pub fn from_strings(name: &str, entries: &[String]) -> Result<Self, ScheduleError> {
        let probs = entries
            .iter()
            .map(|s| parse_rat(s).ok_or_else(|| ScheduleError::BadRational(s.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(name, probs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Flip probability for a cluster of `size` vertices; zero for size 0
    /// (an empty slot) and for anything above six.
    pub fn prob(&self, size: usize) -> Rat {
        if size == 0 || size > 6 {
            Rat::zero()
        } else {
            self.probs[size - 1].clone()
        }
    }

    pub fn prob_f64(&self, size: usize) -> f64 {
        if size == 0 || size > 6 {
            0.0
        } else {
            rat_f64(&self.probs[size - 1])
        }
    }

    pub fn probs(&self) -> &[Rat] {
        &self.probs
    }

    /// `f_i - f_{i+1}`.
    fn drop_at(&self, i: usize) -> Rat {
        self.prob(i) - self.prob(i + 1)
    }

    /// Property 1: `i (f_i - f_{i+1}) + (j-1)(f_j - f_{j+1}) <= 5/6`,
    /// maximized exactly over `1 <= i, j <= 7`.
    pub fn check_p1(&self) -> P1Report {
        let mut max = Rat::zero() - rat_i(1);
        let mut witness = (1usize, 1usize);
        for i in 1..=7 {
            for j in 1..=7 {
                let val = rat_i(i as i64) * self.drop_at(i)
                    + rat_i(j as i64 - 1) * self.drop_at(j);
                if val > max {
                    max = val;
                    witness = (i, j);
                }
            }
        }
        let pass = max <= rat(5, 6);
        P1Report { max_value: max, witness, pass }
    }

    /// Property 2: `2 (i-1) f_i + f_{2i+1} <= 2/3`, maximized over `1 <= i <= 6`.
    pub fn check_p2(&self) -> P2Report {
        let mut max = Rat::zero() - rat_i(1);
        let mut witness = 1usize;
        for i in 1..=6 {
            let val = rat_i(2 * (i as i64 - 1)) * self.prob(i) + self.prob(2 * i + 1);
            if val > max {
                max = val;
                witness = i;
            }
        }
        let pass = max <= rat(2, 3);
        P2Report { max_value: max, witness, pass }
    }

    /// Auxiliary inequalities used in the d >= 3 coupling case:
    /// `(i - c) f_i < 1/4` for `c in {2, 3}`, and
    /// `a f_a + (b-1) f_b <= 4/3` over `1 <= a <= b <= 6`.
    pub fn check_aux(&self) -> AuxReport {
        let mut excess_max = Rat::zero() - rat_i(10);
        let mut excess_witness = (1usize, 2i64);
        for c in [2i64, 3] {
            for i in 1..=7usize {
                let val = rat_i(i as i64 - c) * self.prob(i);
                if val > excess_max {
                    excess_max = val;
                    excess_witness = (i, c);
                }
            }
        }
        let excess_pass = excess_max < rat(1, 4);

        let mut pair_max = Rat::zero() - rat_i(10);
        let mut pair_witness = (1usize, 1usize);
        for a in 1..=6usize {
            for b in a..=6usize {
                let val = rat_i(a as i64) * self.prob(a) + rat_i(b as i64 - 1) * self.prob(b);
                if val > pair_max {
                    pair_max = val;
                    pair_witness = (a, b);
                }
            }
        }
        let pair_pass = pair_max <= rat(4, 3);

        AuxReport { excess_max, excess_witness, excess_pass, pair_max, pair_witness, pair_pass }
    }

    /// Runs all three certificates.
    pub fn certify(&self) -> Certificate {
        let p1 = self.check_p1();
        let p2 = self.check_p2();
        let aux = self.check_aux();
        let pass = p1.pass && p2.pass && aux.pass();
        Certificate { schedule: self.name.clone(), p1, p2, aux, pass }
    }
}

#[derive(Debug, Clone)]
pub struct P1Report {
    pub max_value: Rat,
    pub witness: (usize, usize),
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct P2Report {
    pub max_value: Rat,
    pub witness: usize,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct AuxReport {
    pub excess_max: Rat,
    pub excess_witness: (usize, i64),
    pub excess_pass: bool,
    pub pair_max: Rat,
    pub pair_witness: (usize, usize),
    pub pair_pass: bool,
}

impl AuxReport {
    pub fn pass(&self) -> bool {
        self.excess_pass && self.pair_pass
    }
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub schedule: String,
    pub p1: P1Report,
    pub p2: P2Report,
    pub aux: AuxReport,
    pub pass: bool,
}

impl Certificate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schedule": self.schedule,
            "p1": { "max": rat_str(&self.p1.max_value), "witness": self.p1.witness, "pass": self.p1.pass },
            "p2": { "max": rat_str(&self.p2.max_value), "witness": self.p2.witness, "pass": self.p2.pass },
            "aux": {
                "excess_max": rat_str(&self.aux.excess_max),
                "excess_witness": self.aux.excess_witness,
                "excess_pass": self.aux.excess_pass,
                "pair_max": rat_str(&self.aux.pair_max),
                "pair_witness": self.aux.pair_witness,
                "pair_pass": self.aux.pair_pass,
            },
            "pass": self.pass,
        })
    }
}

/// Declarative schedule reference for configs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum ScheduleSpec {
    Named(String),
    Custom { name: String, probs: Vec<String> },
}

impl ScheduleSpec {
    pub fn build(&self) -> Result<FlipSchedule, ScheduleError> {
        match self {
            ScheduleSpec::Named(name) => FlipSchedule::by_name(name)
                .ok_or_else(|| ScheduleError::BadRational(format!("unknown schedule {name:?}"))),
            ScheduleSpec::Custom { name, probs } => FlipSchedule::from_strings(name, probs),
        }
    }
}
