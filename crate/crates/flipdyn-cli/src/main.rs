//! Command-line driver: simulate the chain, certify schedules, scan the
//! configuration functional, run exact finite-state analyses, and drive the
//! coupling experiments.
//!
//! Exit codes: 0 success, 1 verification failure (a checked bound was
//! violated or outputs mismatched), 2 usage or budget errors.

mod config;
mod output;

use anyhow::{anyhow, bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use config::{preset, ExperimentConfig};
use flipdyn::analysis::{
    check_ergodicity, enumerate_colorings, mixing_profile,
    stationary_exact, stationary_power, transition_matrix, transition_probability, tv_exact,
    DEFAULT_CLUSTER_BUDGET, DEFAULT_STATE_BUDGET,
};
use flipdyn::coloring::AdjacentPair;
use flipdyn::coupling::exact::DEFAULT_COIN_BUDGET;
use flipdyn::coupling::{
    coalescence_experiment, dist2_mass_exact, median_coalescence, pair_contraction_exact,
    pair_contraction_sampled, phi_scan, ExactCoupling,
};
use flipdyn::dynamics::RoundParams;
use flipdyn::local::{audit_protocol, run_local_round};
use flipdyn::rat::{rat_f64, rat_str};
use flipdyn::{rat, Coloring, FlipSchedule, Graph, Rat};
use output::Emitter;
use serde_json::json;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "flipdyn", version, about = "Distributed flip dynamics simulator and verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in preset: remark-asymmetry | p3-k4 | phi-vigoda | phi-cdmpp | lemma-3.4 | lemma-3.5.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Round engine for simulations.
    #[arg(long, global = true, value_enum, default_value_t = Engine::Direct)]
    engine: Engine,
    /// Tabular output format for curves and sweeps.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Direct,
    Local,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run the chain for a number of rounds.
    Simulate {
        /// Number of synchronous rounds.
        #[arg(long, default_value_t = 100)]
        rounds: u64,
        /// Also write the full trajectory as JSON lines.
        #[arg(long, default_value_t = false)]
        trajectory: bool,
    },
    /// Certify a schedule's flip-probability inequalities.
    ScheduleCheck {
        /// vigoda | cdmpp | path to a JSON file {"name":..., "probs":["1","13/42",...]}.
        #[arg(long, default_value = "vigoda")]
        schedule: String,
    },
    /// Exhaustive configuration scan against the per-color bounds.
    PhiScan {
        #[arg(long, default_value = "vigoda")]
        schedule: String,
        #[arg(long, default_value_t = 6)]
        d_max: usize,
        #[arg(long, default_value_t = 6)]
        size_max: u8,
    },
    /// Exact transition matrix, stationary law, and mixing profile.
    Exact,
    /// Coupling experiments: contraction, distance-2 mass, agreement,
    /// coalescence.
    Couple,
    /// Direct-vs-protocol equivalence audit on random instances.
    LocalCheck {
        #[arg(long, default_value_t = 100)]
        instances: u64,
        #[arg(long, default_value_t = 30)]
        n_max: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("FLIPDYN_THREADS") {
        if let Ok(t) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn load_config(cli: &Cli, default_preset: Option<&str>) -> Result<ExperimentConfig> {
    let mut cfg = if let Some(path) = &cli.config {
        ExperimentConfig::from_file(path)?
    } else if let Some(name) = &cli.preset {
        preset(name)?.1
    } else if let Some(name) = default_preset {
        preset(name)?.1
    } else {
        bail!("need --config or --preset");
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn schedule_from_arg(arg: &str) -> Result<FlipSchedule> {
    if let Some(s) = FlipSchedule::by_name(arg) {
        return Ok(s);
    }
    #[derive(serde::Deserialize)]
    struct FileSchedule {
        name: String,
        probs: Vec<String>,
    }
    let text = std::fs::read_to_string(arg)
        .map_err(|e| anyhow!("schedule {arg:?} is neither built-in nor a readable file: {e}"))?;
    let fs: FileSchedule = serde_json::from_str(&text)?;
    Ok(FlipSchedule::from_strings(&fs.name, &fs.probs)?)
}

fn run(cli: Cli) -> Result<i32> {
    let emit = Emitter::new(&cli.out)?;
    match &cli.command {
        Command::Simulate { rounds, trajectory } => cmd_simulate(&cli, &emit, *rounds, *trajectory),
        Command::ScheduleCheck { schedule } => cmd_schedule_check(&emit, schedule),
        Command::PhiScan { schedule, d_max, size_max } => {
            cmd_phi_scan(&cli, &emit, schedule, *d_max, *size_max)
        }
        Command::Exact => cmd_exact(&cli, &emit),
        Command::Couple => cmd_couple(&cli, &emit),
        Command::LocalCheck { instances, n_max } => cmd_local_check(&cli, &emit, *instances, *n_max),
    }
}

fn cmd_simulate(cli: &Cli, emit: &Emitter, rounds: u64, trajectory: bool) -> Result<i32> {
    let cfg = load_config(cli, Some("p3-k4"))?;
    let g = cfg.build_graph()?;
    let schedule = cfg.build_schedule()?;
    let alpha = cfg.alpha_f64(&g)?;
    if (cfg.k as usize) < g.max_degree() + 2 {
        eprintln!(
            "warning: k = {} < maxdeg + 2 = {}; ergodicity is not guaranteed",
            cfg.k,
            g.max_degree() + 2
        );
    }
    let start = start_coloring(&cfg, &g)?;
    let params = RoundParams::new(alpha, schedule, cfg.seed);

    let mut flips = 0usize;
    let mut messages = 0usize;
    let mut traj: Vec<Coloring> = vec![start.clone()];
    let mut current = start.clone();
    for t in 0..rounds {
        match cli.engine {
            Engine::Direct => {
                let (next, trace) = flipdyn::dynamics::distributed_round(&g, &current, &params, t)?;
                flips += trace.flipped.len();
                current = next;
            }
            Engine::Local => {
                let run = run_local_round(&g, &current, &params, t)?;
                let audit = audit_protocol(&run, &g);
                if !audit.pass() {
                    bail!("protocol audit failed: {:?}", audit.violations);
                }
                flips += run.flipped.len();
                messages += run.messages.len();
                current = run.result;
            }
        }
        if trajectory {
            traj.push(current.clone());
        }
    }
    assert!(flipdyn::is_proper(&g, &current));
    let config_json = serde_json::to_value(&cfg)?;
    let results = json!({
        "engine": match cli.engine { Engine::Direct => "direct", Engine::Local => "local" },
        "rounds": rounds,
        "resolved_alpha": cfg.alpha_resolved_string(&g)?,
        "total_flips": flips,
        "messages": if cli.engine == Engine::Local { Some(messages) } else { None },
        "proper": true,
        "final_coloring": current.to_text(),
    });
    let path = emit.json("simulate.json", &config_json, results)?;
    if trajectory {
        let lines: Vec<serde_json::Value> =
            traj.iter().map(|c| json!(c.to_text().trim())).collect();
        emit.jsonl("trajectory.jsonl", &lines)?;
    }
    println!("simulate: {rounds} rounds, {flips} flips -> {}", path.display());
    Ok(0)
}

fn start_coloring(cfg: &ExperimentConfig, g: &Graph) -> Result<Coloring> {
    if let Some(text) = cfg.experiment.get("start").and_then(|v| v.as_str()) {
        let c = Coloring::parse(text)?;
        if !flipdyn::is_proper(g, &c) {
            bail!("start coloring is not proper");
        }
        return Ok(c);
    }
    // Deterministic greedy start.
    let mut colors = Vec::with_capacity(g.n());
    for v in 0..g.n() as u32 {
        let used: Vec<u16> = g
            .neighbors(v)
            .iter()
            .filter(|&&w| (w as usize) < colors.len())
            .map(|&w| colors[w as usize])
            .collect();
        let c = (1..=cfg.k)
            .find(|c| !used.contains(c))
            .ok_or_else(|| anyhow!("greedy start failed; k too small"))?;
        colors.push(c);
    }
    Ok(Coloring::new(colors, cfg.k)?)
}

fn cmd_schedule_check(emit: &Emitter, schedule: &str) -> Result<i32> {
    let s = schedule_from_arg(schedule)?;
    let cert = s.certify();
    let doc = cert.to_json();
    emit.json("schedule-check.json", &json!({ "schedule": schedule }), doc.clone())?;
    println!(
        "schedule {}: P1 max {} at {:?}, P2 max {} at {}, aux excess {} pair {} -> {}",
        s.name(),
        rat_str(&cert.p1.max_value),
        cert.p1.witness,
        rat_str(&cert.p2.max_value),
        cert.p2.witness,
        rat_str(&cert.aux.excess_max),
        rat_str(&cert.aux.pair_max),
        if cert.pass { "PASS" } else { "FAIL" }
    );
    Ok(if cert.pass { 0 } else { 1 })
}

fn cmd_phi_scan(cli: &Cli, emit: &Emitter, schedule: &str, d_max: usize, size_max: u8) -> Result<i32> {
    if d_max == 0 || d_max > 6 || size_max > 6 {
        bail!("scan is exhaustive only for 1 <= d_max <= 6 and size_max <= 6");
    }
    // Presets may override the schedule.
    let (sched, non_extremal) = if let Some(name) = &cli.preset {
        let cfg = preset(name)?.1;
        let s = cfg.build_schedule()?;
        let ne = cfg.experiment.get("non_extremal").and_then(|v| v.as_bool()).unwrap_or(false);
        (s, ne)
    } else {
        let s = schedule_from_arg(schedule)?;
        let ne = s.name() == "cdmpp";
        (s, ne)
    };
    let scan = phi_scan(&sched, d_max, size_max, non_extremal);
    emit.json("phi-scan.json", &json!({ "schedule": sched.name(), "d_max": d_max }), scan.to_json())?;
    println!(
        "phi scan {}: {} configurations, {} + {} violations, witnesses {:?} -> {}",
        sched.name(),
        scan.configs_checked,
        scan.hamming_violations.len(),
        scan.non_extremal_violations.len(),
        scan.equality_witnesses.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        if scan.pass() { "PASS" } else { "FAIL" }
    );
    Ok(if scan.pass() { 0 } else { 1 })
}

fn cmd_exact(cli: &Cli, emit: &Emitter) -> Result<i32> {
    let cfg = load_config(cli, Some("p3-k4"))?;
    let config_json = serde_json::to_value(&cfg)?;
    if cfg.experiment.get("kind").and_then(|v| v.as_str()) == Some("remark-asymmetry") {
        return cmd_exact_remark(&cfg, emit, &config_json);
    }
    let g = cfg.build_graph()?;
    let schedule = cfg.build_schedule()?;
    let alpha = cfg.alpha_exact(&g)?;
    let space = enumerate_colorings(&g, cfg.k, DEFAULT_STATE_BUDGET)?;
    let tm = transition_matrix(&g, &space, &alpha, &schedule, DEFAULT_CLUSTER_BUDGET)?;
    let erg = check_ergodicity(&tm);
    let pi_exact = if erg.irreducible { Some(stationary_exact(&tm, &space)?) } else { None };
    let pi_float = if erg.irreducible {
        stationary_power(&tm, 1e-12, 1_000_000)?
    } else {
        vec![1.0 / space.len() as f64; space.len()]
    };
    let t_max = cfg.experiment.get("t_max").and_then(|v| v.as_u64()).unwrap_or(600) as usize;
    let profile = mixing_profile(&tm, &pi_float, t_max);
    let uniform: Vec<Rat> = vec![rat(1, space.len() as i64); space.len()];
    let tv_uniform = pi_exact.as_ref().map(|pi| tv_exact(pi, &uniform));

    // Matrix artifact: sparse rows with exact rationals.
    let rows: Vec<serde_json::Value> = (0..tm.n())
        .map(|i| {
            json!({
                "state": space.get(i).to_text().trim(),
                "row": tm.row(i).iter().map(|(j, p)| json!([j, rat_str(p)])).collect::<Vec<_>>(),
            })
        })
        .collect();
    emit.json("matrix.json", &config_json, json!({ "states": space.len(), "rows": rows }))?;
    emit.json(
        "stationary.json",
        &config_json,
        json!({
            "irreducible": erg.irreducible,
            "aperiodic": erg.aperiodic,
            "stationary_exact": pi_exact.as_ref().map(|pi| pi.iter().map(rat_str).collect::<Vec<_>>()),
            "tv_to_uniform": tv_uniform.as_ref().map(rat_str),
            "tv_to_uniform_float": tv_uniform.as_ref().map(rat_f64),
            "t_mix": profile.t_mix,
        }),
    )?;
    let curve_rows: Vec<Vec<String>> = profile
        .curve
        .iter()
        .enumerate()
        .map(|(t, d)| vec![t.to_string(), format!("{d:.12}")])
        .collect();
    match cli.format {
        Format::Csv | Format::Json => {
            emit.csv("mixing.csv", &["t", "worst_tv"], &curve_rows)?;
        }
    }
    println!(
        "exact: {} states, irreducible={}, t_mix={:?}, TV(pi,uniform)={}",
        space.len(),
        erg.irreducible,
        profile.t_mix,
        tv_uniform.as_ref().map(rat_str).unwrap_or_else(|| "n/a".into())
    );
    Ok(0)
}

fn cmd_exact_remark(cfg: &ExperimentConfig, emit: &Emitter, config_json: &serde_json::Value) -> Result<i32> {
    let g = cfg.build_graph()?;
    let schedule = cfg.build_schedule()?;
    let sigma = Coloring::new(vec![1, 2, 3, 2], 4)?;
    let tau = Coloring::new(vec![4, 2, 4, 2], 4)?;
    let n_sigma = flipdyn::enumerate_clusters(&g, &sigma).len();
    let n_tau = flipdyn::enumerate_clusters(&g, &tau).len();
    let alphas: Vec<Rat> = cfg
        .experiment
        .get("alphas")
        .and_then(|v| v.as_array())
        .map(|xs| {
            xs.iter()
                .filter_map(|x| x.as_str().and_then(flipdyn::rat::parse_rat))
                .collect()
        })
        .unwrap_or_else(|| vec![rat(1, 10), rat(1, 100)]);
    let mut entries = Vec::new();
    let mut asymmetric = true;
    for alpha in &alphas {
        let fwd = transition_probability(&g, &sigma, &tau, alpha, &schedule, DEFAULT_CLUSTER_BUDGET)?;
        let bwd = transition_probability(&g, &tau, &sigma, alpha, &schedule, DEFAULT_CLUSTER_BUDGET)?;
        asymmetric &= fwd != bwd;
        entries.push(json!({
            "alpha": rat_str(alpha),
            "forward": rat_str(&fwd),
            "backward": rat_str(&bwd),
            "equal": fwd == bwd,
        }));
    }
    emit.json(
        "remark-asymmetry.json",
        config_json,
        json!({
            "clusters_sigma": n_sigma,
            "clusters_tau": n_tau,
            "transitions": entries,
            "asymmetric": asymmetric,
        }),
    )?;
    println!(
        "remark: |clusters(sigma)| = {n_sigma}, |clusters(tau)| = {n_tau}, asymmetric = {asymmetric}"
    );
    Ok(if asymmetric && n_sigma == 12 && n_tau == 13 { 0 } else { 1 })
}

fn pair_from_experiment(cfg: &ExperimentConfig, g: &Graph) -> Result<AdjacentPair> {
    let get = |key: &str| -> Result<Coloring> {
        let text = cfg
            .experiment
            .get(key)
            .and_then(|v| v.as_str())
            .ok_or_else(|| anyhow!("experiment needs {key:?} (coloring text)"))?;
        Ok(Coloring::parse(text)?)
    };
    let x = get("x")?;
    let y = get("y")?;
    if !flipdyn::is_proper(g, &x) || !flipdyn::is_proper(g, &y) {
        bail!("pair colorings must be proper");
    }
    Ok(AdjacentPair::new(x, y)?)
}

fn cmd_couple(cli: &Cli, emit: &Emitter) -> Result<i32> {
    let cfg = load_config(cli, None)?;
    let config_json = serde_json::to_value(&cfg)?;
    let g = cfg.build_graph()?;
    let schedule = cfg.build_schedule()?;
    let kind = cfg
        .experiment
        .get("kind")
        .and_then(|v| v.as_str())
        .ok_or_else(|| anyhow!("couple config needs experiment.kind"))?;
    match kind {
        "contraction" => {
            let pair = pair_from_experiment(&cfg, &g)?;
            let alpha = cfg.alpha_exact(&g)?;
            let pc = pair_contraction_exact(&g, &pair, &alpha, &schedule, None, None, DEFAULT_COIN_BUDGET)?;
            let mode = cfg.experiment.get("mode").and_then(|v| v.as_str()).unwrap_or("exact");
            let sampled = if mode == "sampled" {
                let trials = cfg.experiment.get("trials").and_then(|v| v.as_u64()).unwrap_or(100_000);
                let params = RoundParams::new(cfg.alpha_f64(&g)?, schedule.clone(), cfg.seed);
                Some(pair_contraction_sampled(&g, &pair, &params, trials)?)
            } else {
                None
            };
            let contracts = pc.expected_hamming < Rat::from_integer(1.into());
            emit.json(
                "contraction.json",
                &config_json,
                json!({
                    "expected_hamming": rat_str(&pc.expected_hamming),
                    "expected_hamming_float": rat_f64(&pc.expected_hamming),
                    "contracts": contracts,
                    "sampled": sampled.as_ref().map(|s| json!({
                        "trials": s.trials, "mean": s.mean_hamming, "std_error": s.std_error,
                    })),
                }),
            )?;
            println!(
                "contraction: E[H'] = {} ({:.8}) -> {}",
                rat_str(&pc.expected_hamming),
                rat_f64(&pc.expected_hamming),
                if contracts { "contracts" } else { "NO CONTRACTION" }
            );
            Ok(if contracts { 0 } else { 1 })
        }
        "dist2" => {
            let pair = pair_from_experiment(&cfg, &g)?;
            let alpha = cfg.alpha_exact(&g)?;
            let report = dist2_mass_exact(&g, &pair, &alpha, &schedule, DEFAULT_COIN_BUDGET)?;
            emit.json(
                "dist2.json",
                &config_json,
                json!({
                    "mass": rat_str(&report.mass),
                    "bound_288": rat_str(&report.bound_sharp),
                    "bound_300": rat_str(&report.bound_stated),
                    "within_288": report.within_sharp(),
                    "within_300": report.within_stated(),
                }),
            )?;
            println!(
                "dist2 mass = {} vs 288 d^2 a^2 = {} -> {}",
                rat_str(&report.mass),
                rat_str(&report.bound_sharp),
                if report.within_sharp() { "PASS" } else { "FAIL" }
            );
            Ok(if report.within_sharp() && report.within_stated() { 0 } else { 1 })
        }
        "agreement" => {
            let pair = pair_from_experiment(&cfg, &g)?;
            let alpha = cfg.alpha_exact(&g)?;
            let ec = ExactCoupling::new(&g, &pair, alpha.clone(), &schedule, DEFAULT_COIN_BUDGET)?;
            let agree = ec.agree_probability();
            let avail = flipdyn::available_colors(&g, pair.x(), pair.v_star()).len() as i64;
            let bound = rat(avail, 1)
                * &alpha
                * (Rat::from_integer(1.into()) - rat(10 * cfg.k as i64, 1) * &alpha);
            let pass = agree >= bound;
            emit.json(
                "agreement.json",
                &config_json,
                json!({
                    "agree_probability": rat_str(&agree),
                    "lower_bound": rat_str(&bound),
                    "available_colors": avail,
                    "pass": pass,
                }),
            )?;
            println!(
                "agreement: P = {} >= bound {} -> {}",
                rat_str(&agree),
                rat_str(&bound),
                if pass { "PASS" } else { "FAIL" }
            );
            Ok(if pass { 0 } else { 1 })
        }
        "coalescence" => {
            let sizes: Vec<usize> = cfg
                .experiment
                .get("sizes")
                .and_then(|v| v.as_array())
                .map(|xs| xs.iter().filter_map(|x| x.as_u64().map(|u| u as usize)).collect())
                .unwrap_or_else(|| vec![16, 32, 64]);
            let pairs_per = cfg.experiment.get("pairs").and_then(|v| v.as_u64()).unwrap_or(60) as usize;
            let horizon = cfg.experiment.get("horizon").and_then(|v| v.as_u64()).unwrap_or(40_000);
            let alpha = cfg.alpha_f64(&g)?;
            let mut rows = Vec::new();
            let mut medians = Vec::new();
            for &n in &sizes {
                let gc = Graph::cycle(n)?;
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(cfg.seed ^ n as u64);
                let starts: Vec<(Coloring, Coloring)> = (0..pairs_per)
                    .map(|_| {
                        let a = Coloring::random_proper(&gc, cfg.k, &mut rng).unwrap();
                        let b = Coloring::random_proper(&gc, cfg.k, &mut rng).unwrap();
                        (a, b)
                    })
                    .collect();
                let params = RoundParams::new(alpha, schedule.clone(), cfg.seed ^ (n as u64) << 8);
                let result = coalescence_experiment(&gc, &starts, &params, horizon);
                let med = median_coalescence(&result, horizon);
                medians.push((n, med));
                for r in &result {
                    rows.push(vec![
                        n.to_string(),
                        r.seed.to_string(),
                        r.coalesced_at.map(|t| t.to_string()).unwrap_or_else(|| "censored".into()),
                    ]);
                }
            }
            emit.csv("coalescence.csv", &["n", "seed", "coalesced_at"], &rows)?;
            emit.json(
                "coalescence.json",
                &config_json,
                json!({
                    "medians": medians.iter().map(|(n, m)| json!({ "n": n, "median": m })).collect::<Vec<_>>(),
                }),
            )?;
            for (n, m) in &medians {
                println!("coalescence median on cycle n={n}: {m}");
            }
            Ok(0)
        }
        other => bail!("unknown couple experiment kind {other:?}"),
    }
}

fn cmd_local_check(cli: &Cli, emit: &Emitter, instances: u64, n_max: usize) -> Result<i32> {
    use rand::{Rng, SeedableRng};
    let seed = cli.seed.unwrap_or(1);
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let mut mismatches = 0u64;
    let mut violations = 0u64;
    let mut rounds_seen = std::collections::BTreeSet::new();
    let mut messages_total = 0usize;
    for i in 0..instances {
        let n = rng.random_range(4..=n_max.max(4));
        let d = rng.random_range(2..=3.min(n - 1));
        let g = if n * d % 2 == 0 {
            Graph::random_regular(n, d, seed ^ i)?
        } else {
            Graph::cycle(n)?
        };
        let k = (g.max_degree() + 2 + rng.random_range(0..3)) as u16;
        let sigma = Coloring::random_proper(&g, k, &mut rng)
            .ok_or_else(|| anyhow!("greedy coloring failed"))?;
        let params = RoundParams::new(0.2, FlipSchedule::vigoda(), seed.wrapping_add(i));
        let run = run_local_round(&g, &sigma, &params, i)?;
        let (direct, _) = flipdyn::dynamics::distributed_round(&g, &sigma, &params, i)?;
        if run.result != direct {
            mismatches += 1;
        }
        let audit = audit_protocol(&run, &g);
        violations += audit.violations.len() as u64;
        rounds_seen.insert(run.rounds_used);
        messages_total += run.messages.len();
    }
    let constant_rounds = rounds_seen.len() == 1;
    let pass = mismatches == 0 && violations == 0 && constant_rounds;
    emit.json(
        "local-check.json",
        &json!({ "instances": instances, "n_max": n_max, "seed": seed }),
        json!({
            "mismatches": mismatches,
            "locality_violations": violations,
            "rounds_used": rounds_seen.iter().copied().collect::<Vec<_>>(),
            "constant_rounds": constant_rounds,
            "messages_total": messages_total,
            "pass": pass,
        }),
    )?;
    println!(
        "local-check: {instances} instances, {mismatches} mismatches, {violations} violations, rounds {:?} -> {}",
        rounds_seen,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { 1 })
}
