//! Experiment harness: loads an instance, runs an algorithm over several
//! seeds and renders the per-iteration trace (CSV) and a summary (JSON).

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

use crate::acs::{solve_acs, AcsParams, IterationRecord};
use crate::dps::{self, DpsParams};
use crate::instances::{self, LopMatrix, SparsePattern, WeightedGraph};
use crate::mbmp;
use crate::pharaoh::{solve_pas, PasParams};
use crate::pheromone::SpeciesProfile;
use crate::sbsam::{solve_sbsam, SbsamParams, SbsamProblem};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "run,iteration,best_cost,mean_cost,uturns,blocked_edges";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Acs,
    Pas,
    Sbsam,
    /// Hybrid colony with swap refinement (bandwidth only).
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    Tsp,
    Mbmp,
    Lop,
    Route,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

/// Whether `algorithm` can run on `problem`.
pub fn compatible(algorithm: Algorithm, problem: Problem) -> bool {
    use Algorithm as A;
    use Problem as P;
    matches!(
        (algorithm, problem),
        (A::Acs, P::Tsp) | (A::Pas, P::Tsp | P::Route) | (A::Sbsam, P::Tsp | P::Lop) | (A::Hybrid, P::Mbmp)
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub problem: Problem,
    pub instance: PathBuf,
    /// Demand pairs for routing; all pairs when absent.
    pub demands: Option<PathBuf>,
    pub seed: u64,
    pub repeats: usize,
    pub iterations: Option<usize>,
    pub ants: Option<usize>,
    /// `key=value` overrides, applied in order.
    pub params: Vec<(String, String)>,
}

impl ExperimentConfig {
    pub fn new(algorithm: Algorithm, problem: Problem, instance: impl Into<PathBuf>) -> Self {
        Self {
            algorithm,
            problem,
            instance: instance.into(),
            demands: None,
            seed: 0,
            repeats: 1,
            iterations: None,
            ants: None,
            params: Vec::new(),
        }
    }
}

/// Splits `key=value`.
pub fn parse_param(s: &str) -> Result<(String, String)> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() && !v.trim().is_empty() => {
            Ok((k.trim().to_string(), v.trim().to_string()))
        }
        _ => Err(Error::invalid(format!("expected key=value, got `{s}`"))),
    }
}

/// Pending overrides; every key must be consumed by the chosen algorithm.
struct Overrides(BTreeMap<String, String>);

impl Overrides {
    fn new(pairs: &[(String, String)]) -> Self {
        Self(pairs.iter().cloned().collect())
    }

    fn take<T: std::str::FromStr>(&mut self, key: &str, slot: &mut T) -> Result<()> {
        if let Some(v) = self.0.remove(key) {
            *slot = v
                .parse()
                .map_err(|_| Error::invalid(format!("bad value `{v}` for parameter {key}")))?;
        }
        Ok(())
    }

    fn species(&mut self, species: &mut SpeciesProfile) -> Result<()> {
        self.take("half_life", &mut species.half_life)
    }

    fn acs(&mut self, p: &mut AcsParams) -> Result<()> {
        self.take("q0", &mut p.q0)?;
        self.take("alpha", &mut p.alpha)?;
        self.take("beta", &mut p.beta)?;
        self.take("rho_local", &mut p.rho_local)?;
        self.take("rho_global", &mut p.rho_global)?;
        self.take("inner_rate", &mut p.inner_rate)?;
        self.take("parallel", &mut p.parallel)?;
        self.species(&mut p.species)
    }

    fn finish(self) -> Result<()> {
        match self.0.keys().next() {
            Some(k) => Err(Error::invalid(format!("unknown parameter `{k}`"))),
            None => Ok(()),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

enum Instance {
    Tsp(WeightedGraph),
    Mbmp(SparsePattern),
    Lop(LopMatrix),
    Route(dps::NetworkTopology, Vec<(usize, usize)>),
}

fn load(cfg: &ExperimentConfig) -> Result<Instance> {
    let text = read(&cfg.instance)?;
    if cfg.demands.is_some() && cfg.problem != Problem::Route {
        return Err(Error::invalid("demands apply to the route problem only"));
    }
    Ok(match cfg.problem {
        Problem::Tsp => Instance::Tsp(instances::parse_tsp(&text)?),
        Problem::Mbmp => Instance::Mbmp(instances::parse_matrix(&text)?),
        Problem::Lop => Instance::Lop(instances::parse_lop(&text)?),
        Problem::Route => {
            let net = dps::parse_network(&text)?;
            let demands = match &cfg.demands {
                Some(p) => dps::parse_demands(&read(p)?, net.n())?,
                None => dps::all_pairs(net.n()),
            };
            Instance::Route(net, demands)
        }
    })
}

/// A fully configured solver for one instance.
enum Plan {
    Acs(AcsParams),
    Pas(PasParams),
    Sbsam(SbsamParams),
    Hybrid(AcsParams, usize),
    Route(DpsParams, usize),
}

fn plan(cfg: &ExperimentConfig, instance: &Instance) -> Result<Plan> {
    let mut o = Overrides::new(&cfg.params);
    let colony = |p: &mut AcsParams| {
        if let Some(it) = cfg.iterations {
            p.max_iterations = it;
        }
        if let Some(a) = cfg.ants {
            p.n_ants = a;
        }
    };
    let plan = match (cfg.algorithm, instance) {
        (Algorithm::Acs, _) => {
            let mut p = AcsParams::default();
            colony(&mut p);
            o.acs(&mut p)?;
            Plan::Acs(p)
        }
        (Algorithm::Pas, Instance::Route(..)) => {
            if cfg.ants.is_some() {
                return Err(Error::invalid("routing launches one ant per demand; --ants does not apply"));
            }
            let mut p = DpsParams::default();
            o.take("explore", &mut p.explore_rate)?;
            o.take("exploit", &mut p.exploit_rate)?;
            o.take("bad_factor", &mut p.bad_factor)?;
            o.take("neg_amount", &mut p.neg_amount)?;
            o.take("block_threshold", &mut p.block_threshold)?;
            let mut kappa = f64::NAN;
            o.take("kappa", &mut kappa)?;
            if !kappa.is_nan() {
                p.kappa = Some(kappa);
            }
            o.take("gain", &mut p.gain)?;
            o.take("sharpness", &mut p.sharpness)?;
            o.take("rho_global", &mut p.rho_global)?;
            o.take("parallel", &mut p.parallel)?;
            o.species(&mut p.species)?;
            Plan::Route(p, cfg.iterations.unwrap_or(500))
        }
        (Algorithm::Pas, _) => {
            let mut p = PasParams::default();
            colony(&mut p.acs);
            o.acs(&mut p.acs)?;
            o.take("bad_factor", &mut p.bad_factor)?;
            o.take("uturn_prob", &mut p.uturn_prob)?;
            o.take("neg_amount", &mut p.neg_amount)?;
            o.take("exploit_q0", &mut p.exploit_q0)?;
            o.take("block_threshold", &mut p.block_threshold)?;
            Plan::Pas(p)
        }
        (Algorithm::Sbsam, _) => {
            let mut p = SbsamParams::default();
            colony(&mut p.acs);
            o.acs(&mut p.acs)?;
            o.take("xi", &mut p.xi)?;
            o.take("virtual_weight", &mut p.virtual_weight)?;
            o.take("psl", &mut p.psl)?;
            Plan::Sbsam(p)
        }
        (Algorithm::Hybrid, Instance::Mbmp(pattern)) => {
            let mut p = mbmp::default_params();
            colony(&mut p);
            o.acs(&mut p)?;
            let mut rounds = pattern.n();
            o.take("refine_rounds", &mut rounds)?;
            Plan::Hybrid(p, rounds)
        }
        (Algorithm::Hybrid, _) => unreachable!("compatibility checked"),
    };
    o.finish()?;
    Ok(plan)
}

/// One run's final cost and trace.
struct RunOutput {
    best: f64,
    trace: Vec<IterationRecord>,
}

fn run_once(plan: &Plan, instance: &Instance, seed: u64) -> Result<RunOutput> {
    let (best, trace) = match (plan, instance) {
        (Plan::Acs(p), Instance::Tsp(g)) => {
            let r = solve_acs(g, p, seed)?;
            (r.best.cost, r.trace)
        }
        (Plan::Pas(p), Instance::Tsp(g)) => {
            let r = solve_pas(g, p, seed)?;
            (r.best.cost, r.trace)
        }
        (Plan::Sbsam(p), Instance::Tsp(g)) => {
            let r = solve_sbsam(SbsamProblem::Tsp(g), p, seed)?;
            (r.best.cost, r.trace)
        }
        (Plan::Sbsam(p), Instance::Lop(m)) => {
            let r = solve_sbsam(SbsamProblem::Lop(m), p, seed)?;
            (r.best.cost, r.trace)
        }
        (Plan::Hybrid(p, rounds), Instance::Mbmp(pattern)) => {
            let r = mbmp::solve_mbmp(pattern, p, *rounds, seed)?;
            (r.best.bw as f64, r.trace)
        }
        (Plan::Route(p, budget), Instance::Route(net, demands)) => {
            let r = dps::run_routing(net, demands, p, seed, *budget)?;
            let cost = if r.overlay_complete { r.overlay_cost } else { f64::INFINITY };
            (cost, r.trace)
        }
        _ => unreachable!("plan matches instance"),
    };
    Ok(RunOutput { best, trace })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub algorithm: String,
    pub problem: String,
    /// Best final cost over all runs (largest for maximization problems).
    pub best_cost: f64,
    pub mean_best: f64,
    pub std_best: f64,
    pub wall_ms: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// `(run, record)` ordered by run, then iteration.
    pub rows: Vec<(usize, IterationRecord)>,
    pub summary: Summary,
}

fn round9(x: f64) -> f64 {
    if x.is_finite() {
        (x * 1e9).round() / 1e9
    } else {
        x
    }
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for (run, r) in &self.rows {
            let _ = writeln!(
                out,
                "{run},{},{:.9},{:.9},{},{}",
                r.iteration, r.best_cost, r.mean_cost, r.uturns, r.blocked_edges
            );
        }
        out
    }

    /// Summary as JSON; non-finite numbers become `null`.
    pub fn summary_json(&self) -> String {
        let s = &self.summary;
        let rounded = Summary {
            best_cost: round9(s.best_cost),
            mean_best: round9(s.mean_best),
            std_best: round9(s.std_best),
            ..s.clone()
        };
        serde_json::to_string_pretty(&rounded).expect("summary serializes")
    }
}

/// Runs `cfg.repeats` runs with seeds `seed, seed+1, …`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    if !compatible(cfg.algorithm, cfg.problem) {
        return Err(Error::Incompatible {
            algorithm: cfg.algorithm.to_string(),
            problem: cfg.problem.to_string(),
        });
    }
    if cfg.repeats == 0 {
        return Err(Error::invalid("repeats must be positive"));
    }
    let instance = load(cfg)?;
    let plan = plan(cfg, &instance)?;

    let clock = Instant::now();
    let runs: Vec<RunOutput> = (0..cfg.repeats)
        .into_par_iter()
        .map(|run| run_once(&plan, &instance, cfg.seed.wrapping_add(run as u64)))
        .collect::<Result<_>>()?;
    let wall_ms = clock.elapsed().as_millis() as u64;

    let finals: Vec<f64> = runs.iter().map(|r| r.best).collect();
    let best_cost = if cfg.problem == Problem::Lop {
        finals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        finals.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let mean_best = finals.iter().sum::<f64>() / finals.len() as f64;
    let std_best = if mean_best.is_finite() {
        (finals.iter().map(|x| (x - mean_best).powi(2)).sum::<f64>() / finals.len() as f64).sqrt()
    } else {
        f64::NAN
    };
    let rows = runs
        .into_iter()
        .enumerate()
        .flat_map(|(run, r)| r.trace.into_iter().map(move |rec| (run, rec)))
        .collect();
    Ok(Report {
        rows,
        summary: Summary {
            algorithm: cfg.algorithm.to_string(),
            problem: cfg.problem.to_string(),
            best_cost,
            mean_best,
            std_best,
            wall_ms,
            seed: cfg.seed,
        },
    })
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Incompatible { .. } => 3,
        Error::Io { .. } => 4,
        Error::Parse { .. } | Error::Unsupported(_) => 5,
        Error::InvalidArgument(_) => 6,
        Error::NotPermutation(_) | Error::ConstructionFailed(_) => 1,
    }
}
