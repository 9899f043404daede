//! Experiment configuration: JSON format, presets, and resolution.

use anyhow::{anyhow, bail, Context, Result};
use flipdyn::dynamics::AlphaSpec;
use flipdyn::graph::GraphSpec;
use flipdyn::rat::parse_rat;
use flipdyn::schedule::ScheduleSpec;
use flipdyn::{rat, Color, FlipSchedule, Graph, Rat};
use num::Zero;
use serde::{Deserialize, Serialize};

/// A fully declarative experiment; serialized verbatim into every output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub k: Color,
    /// `"paper-default"`, a float, or an exact `"num/den"` string.
    pub alpha: serde_json::Value,
    pub schedule: ScheduleSpec,
    pub seed: u64,
    #[serde(default)]
    pub experiment: serde_json::Value,
}

impl ExperimentConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn build_graph(&self) -> Result<Graph> {
        Ok(self.graph.build()?)
    }

    pub fn build_schedule(&self) -> Result<FlipSchedule> {
        Ok(self.schedule.build()?)
    }

    /// Resolved float activation probability (for simulation).
    pub fn alpha_f64(&self, g: &Graph) -> Result<f64> {
        match &self.alpha {
            serde_json::Value::Number(x) => {
                let a = x.as_f64().ok_or_else(|| anyhow!("bad alpha number"))?;
                if !(0.0..=1.0).contains(&a) {
                    bail!("alpha {a} outside [0,1]");
                }
                Ok(a)
            }
            serde_json::Value::String(s) if s == "paper-default" => {
                Ok(AlphaSpec::PaperDefault(s.clone()).resolve(self.k, g.max_degree()))
            }
            serde_json::Value::String(s) => {
                let r = parse_rat(s).ok_or_else(|| anyhow!("bad alpha {s:?}"))?;
                let a = flipdyn::rat::rat_f64(&r);
                if !(0.0..=1.0).contains(&a) {
                    bail!("alpha {s} outside [0,1]");
                }
                Ok(a)
            }
            other => bail!("bad alpha value {other}"),
        }
    }

    /// Resolved exact activation probability (for enumeration).
    pub fn alpha_exact(&self, g: &Graph) -> Result<Rat> {
        match &self.alpha {
            serde_json::Value::Number(x) => {
                let s = x.to_string();
                parse_rat(&s).ok_or_else(|| anyhow!("alpha {s} is not an exact decimal"))
            }
            serde_json::Value::String(s) if s == "paper-default" => {
                // eps = clamp(k/maxdeg - 11/6, 1e-3, 1); alpha = eps/(5000 k).
                let delta = g.max_degree();
                let eps = if delta == 0 {
                    rat(1, 1)
                } else {
                    let raw = rat(self.k as i64, delta as i64) - rat(11, 6);
                    raw.clamp(rat(1, 1000), rat(1, 1))
                };
                Ok(eps / rat(5000 * self.k as i64, 1))
            }
            serde_json::Value::String(s) => {
                let r = parse_rat(s).ok_or_else(|| anyhow!("bad alpha {s:?}"))?;
                if r < Rat::zero() || r > rat(1, 1) {
                    bail!("alpha {s} outside [0,1]");
                }
                Ok(r)
            }
            other => bail!("bad alpha value {other}"),
        }
    }

    /// The resolved alpha rendered for provenance.
    pub fn alpha_resolved_string(&self, g: &Graph) -> Result<String> {
        Ok(flipdyn::rat::rat_str(&self.alpha_exact(g)?))
    }
}

/// Built-in experiment presets.
pub fn preset(name: &str) -> Result<(&'static str, ExperimentConfig)> {
    let cfg = match name {
        "remark-asymmetry" => ExperimentConfig {
            graph: GraphSpec::Cycle { n: 4 },
            k: 4,
            alpha: serde_json::json!("1/10"),
            schedule: ScheduleSpec::Named("vigoda".into()),
            seed: 1,
            experiment: serde_json::json!({ "kind": "remark-asymmetry", "alphas": ["1/10", "1/100"] }),
        },
        "p3-k4" => ExperimentConfig {
            graph: GraphSpec::Path { n: 3 },
            k: 4,
            alpha: serde_json::json!("1/20"),
            schedule: ScheduleSpec::Named("vigoda".into()),
            seed: 1,
            experiment: serde_json::json!({ "kind": "full", "t_max": 600 }),
        },
        "phi-vigoda" => ExperimentConfig {
            graph: GraphSpec::Path { n: 2 },
            k: 4,
            alpha: serde_json::json!(0.0),
            schedule: ScheduleSpec::Named("vigoda".into()),
            seed: 1,
            experiment: serde_json::json!({ "kind": "phi-scan", "d_max": 6, "size_max": 6, "non_extremal": false }),
        },
        "phi-cdmpp" => ExperimentConfig {
            graph: GraphSpec::Path { n: 2 },
            k: 4,
            alpha: serde_json::json!(0.0),
            schedule: ScheduleSpec::Named("cdmpp".into()),
            seed: 1,
            experiment: serde_json::json!({ "kind": "phi-scan", "d_max": 6, "size_max": 6, "non_extremal": true }),
        },
        "lemma-3.4" => ExperimentConfig {
            graph: GraphSpec::Path { n: 4 },
            k: 4,
            alpha: serde_json::json!("1/100"),
            schedule: ScheduleSpec::Named("vigoda".into()),
            seed: 1,
            experiment: serde_json::json!({
                "kind": "dist2",
                "x": "k=4\n1 2 1 2\n",
                "y": "k=4\n3 2 1 2\n",
            }),
        },
        "lemma-3.5" => ExperimentConfig {
            graph: GraphSpec::Path { n: 3 },
            k: 4,
            alpha: serde_json::json!("1/100"),
            schedule: ScheduleSpec::Named("vigoda".into()),
            seed: 1,
            experiment: serde_json::json!({
                "kind": "agreement",
                "x": "k=4\n1 2 1\n",
                "y": "k=4\n1 3 1\n",
            }),
        },
        other => bail!("unknown preset {other:?}; available: remark-asymmetry, p3-k4, phi-vigoda, phi-cdmpp, lemma-3.4, lemma-3.5"),
    };
    Ok((name_static(name), cfg))
}

fn name_static(name: &str) -> &'static str {
    match name {
        "remark-asymmetry" => "remark-asymmetry",
        "p3-k4" => "p3-k4",
        "phi-vigoda" => "phi-vigoda",
        "phi-cdmpp" => "phi-cdmpp",
        "lemma-3.4" => "lemma-3.4",
        "lemma-3.5" => "lemma-3.5",
        _ => "custom",
    }
}
