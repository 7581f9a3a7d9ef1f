//! The work behind each CLI subcommand, independent of argument parsing.

use std::path::{Path, PathBuf};

use num::{BigRational, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use wks_core::adversary::{run_lower_bound_experiment, LowerBoundStats};
use wks_core::offline::{opt_cost, opt_hierarchical};
use wks_core::sequences::{adversary_cost_constants, harmonic, n_sequence, ratio_constants};
use wks_core::spc::{LazySpc, OracleSpc};
use wks_core::{compose_run, Point, SpcAlgorithm, Universe, Weights};

use crate::error::{HarnessError, Result};
use crate::instances::{random_requests, RandomFeasibleSpc};
use crate::seeding::{rng, splitmix64, trial_seed};
use crate::stats::{summarize, Summary};
use crate::trace_io::{write_trace, TraceMeta, TraceRecord};

fn f(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| HarnessError::io(path, e.into()))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> HarnessError + '_ {
    move |e| HarnessError::io(path, e.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpcKind {
    /// Replays a minimum-cost pattern for the known sequence.
    Oracle,
    Lazy,
    RandomFeasible,
}

impl std::str::FromStr for SpcKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(SpcKind::Oracle),
            "lazy" => Ok(SpcKind::Lazy),
            "random" => Ok(SpcKind::RandomFeasible),
            _ => Err(HarnessError::Validation(format!("unknown pattern constructor {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub universe: Universe,
    pub weights: Weights,
    /// Fixed requests; otherwise a random sequence of `random_len` drawn from the master seed.
    pub requests: Option<Vec<Point>>,
    pub random_len: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub spc: SpcKind,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub rsp_cost: f64,
    pub spc_cost: f64,
    pub opt_cost: f64,
    pub ratio_to_spc: f64,
    pub ratio_to_opt: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub trials: usize,
    pub requests: usize,
    pub rsp_cost: Summary,
    pub ratio_to_spc: Summary,
    pub ratio_to_opt: Summary,
    pub results: Vec<TrialResult>,
}

/// Runs the composed algorithm `trials` times on one request sequence.
/// Trial `i` seeds the engine with `trial_seed(seed, i)`; a generated
/// sequence uses `trial_seed(seed, u64::MAX)`.
pub fn simulate(cfg: &SimulateConfig) -> Result<SimulateSummary> {
    if cfg.trials == 0 {
        return Err(HarnessError::Validation("trials must be at least 1".into()));
    }
    let k = cfg.weights.k();
    let requests = match (&cfg.requests, cfg.random_len) {
        (Some(r), None) => r.clone(),
        (None, Some(0)) => return Err(HarnessError::Validation("--random needs a positive length".into())),
        (None, Some(t)) => random_requests(&mut rng(trial_seed(cfg.seed, u64::MAX)), cfg.universe, t),
        _ => return Err(HarnessError::Validation("give exactly one of --requests or --random".into())),
    };
    for &p in &requests {
        cfg.universe.check(p)?;
    }
    if cfg.spc == SpcKind::Oracle {
        OracleSpc::new(&requests, &cfg.weights, cfg.universe)?;
    }
    let runs: Vec<Result<(TrialResult, Vec<TraceRecord>)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let s = trial_seed(cfg.seed, i as u64);
            let mut spc: Box<dyn SpcAlgorithm> = match cfg.spc {
                SpcKind::Oracle => Box::new(OracleSpc::new(&requests, &cfg.weights, cfg.universe)?),
                SpcKind::Lazy => Box::new(LazySpc::new(cfg.universe, k)?),
                SpcKind::RandomFeasible => {
                    Box::new(RandomFeasibleSpc::new(cfg.universe, k, rng(splitmix64(s)))?)
                }
            };
            let run = compose_run(spc.as_mut(), s, &requests, &cfg.weights, cfg.universe)?;
            if !run.all_served() {
                return Err(HarnessError::SuiteFailed(format!("trial {i} left a request unserved")));
            }
            let (rsp, spc_c, opt) = (f(&run.rsp_cost), f(&run.spc_cost), f(&run.opt_cost));
            let result = TrialResult {
                trial: i,
                seed: s,
                rsp_cost: rsp,
                spc_cost: spc_c,
                opt_cost: opt,
                ratio_to_spc: rsp / spc_c,
                ratio_to_opt: rsp / opt,
            };
            Ok((result, run.steps.iter().map(TraceRecord::from).collect()))
        })
        .collect();
    let mut results = Vec::with_capacity(cfg.trials);
    let mut traces = Vec::with_capacity(cfg.trials);
    for r in runs {
        let (res, tr) = r?;
        results.push(res);
        traces.push(tr);
    }
    let col = |g: fn(&TrialResult) -> f64| summarize(&results.iter().map(g).collect::<Vec<_>>());
    let summary = SimulateSummary {
        trials: cfg.trials,
        requests: requests.len(),
        rsp_cost: col(|r| r.rsp_cost),
        ratio_to_spc: col(|r| r.ratio_to_spc),
        ratio_to_opt: col(|r| r.ratio_to_opt),
        results,
    };
    if let Some(dir) = &cfg.out {
        create_dir(dir)?;
        let req_path = dir.join("requests.txt");
        let text: Vec<String> = requests.iter().map(|p| p.to_string()).collect();
        std::fs::write(&req_path, text.join(" ") + "\n").map_err(|e| HarnessError::io(&req_path, e))?;
        for (res, tr) in summary.results.iter().zip(&traces) {
            let meta = TraceMeta::new(k, cfg.universe, res.seed, &cfg.weights);
            write_trace(&dir.join(format!("trace_{:05}.jsonl", res.trial)), &meta, tr)?;
        }
        let path = dir.join("trials.csv");
        let mut w = csv_writer(&path)?;
        for r in &summary.results {
            w.serialize(r).map_err(csv_err(&path))?;
        }
        w.flush().map_err(|e| HarnessError::io(&path, e))?;
        write_summary_csv(
            &dir.join("summary.csv"),
            &[
                ("rsp_cost", &summary.rsp_cost),
                ("ratio_to_spc", &summary.ratio_to_spc),
                ("ratio_to_opt", &summary.ratio_to_opt),
            ],
        )?;
    }
    Ok(summary)
}

fn write_summary_csv(path: &Path, rows: &[(&str, &Summary)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["metric", "n", "mean", "std_dev", "ci95", "min", "max"])
        .map_err(csv_err(path))?;
    for (name, s) in rows {
        w.write_record([
            name.to_string(),
            s.n.to_string(),
            format!("{:.6}", s.mean),
            format!("{:.6}", s.std_dev),
            format!("{:.6}", s.ci95),
            format!("{:.6}", s.min),
            format!("{:.6}", s.max),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

#[derive(Debug, Clone)]
pub struct AdversaryConfig {
    pub k: usize,
    pub beta: u64,
    pub calls: usize,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdversarySummary {
    pub k: usize,
    pub beta: u64,
    pub trials: usize,
    pub accounted_calls: usize,
    pub alg_cost_per_call: f64,
    pub pattern_cost_per_call: f64,
    pub ratio: f64,
    pub predicted_alg_cost_per_call: f64,
    pub predicted_pattern_cost_per_call: f64,
    pub harmonic_bound: f64,
}

#[derive(Serialize)]
struct CallRow {
    trial: usize,
    call: usize,
    ell_ext: usize,
    omitted: Point,
    emissions: usize,
    alg_cost: u128,
    pattern_cost: u128,
    accounted: bool,
}

/// Trial `i` runs the lower-bound experiment with seed `trial_seed(seed, i)`.
pub fn adversary(cfg: &AdversaryConfig) -> Result<(AdversarySummary, Vec<LowerBoundStats>)> {
    if cfg.trials == 0 || cfg.calls == 0 {
        return Err(HarnessError::Validation("trials and calls must be at least 1".into()));
    }
    if cfg.beta < 2 {
        return Err(HarnessError::Validation("--beta must be at least 2".into()));
    }
    if cfg.k == 0 || cfg.k > 4 {
        return Err(HarnessError::Validation("--k must be between 1 and 4".into()));
    }
    let stats: Vec<LowerBoundStats> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_lower_bound_experiment(cfg.k, cfg.beta, cfg.calls, trial_seed(cfg.seed, i as u64)))
        .collect::<std::result::Result<_, _>>()?;
    let accounted: usize = stats.iter().map(|s| s.accounted_calls).sum();
    let alg: u128 = stats.iter().map(|s| s.alg_cost).sum();
    let pat: u128 = stats.iter().map(|s| s.pattern_cost).sum();
    let summary = AdversarySummary {
        k: cfg.k,
        beta: cfg.beta,
        trials: cfg.trials,
        accounted_calls: accounted,
        alg_cost_per_call: alg as f64 / accounted as f64,
        pattern_cost_per_call: pat as f64 / accounted as f64,
        ratio: alg as f64 / pat as f64,
        predicted_alg_cost_per_call: stats[0].predicted_alg_cost_per_call,
        predicted_pattern_cost_per_call: stats[0].predicted_pattern_cost_per_call,
        harmonic_bound: stats[0].harmonic_bound,
    };
    if let Some(dir) = &cfg.out {
        create_dir(dir)?;
        let path = dir.join("adversary_calls.csv");
        let mut w = csv_writer(&path)?;
        for (trial, s) in stats.iter().enumerate() {
            for (call, c) in s.per_call.iter().enumerate() {
                w.serialize(CallRow {
                    trial,
                    call,
                    ell_ext: c.ell_ext,
                    omitted: c.omitted,
                    emissions: c.emissions,
                    alg_cost: c.alg_cost,
                    pattern_cost: c.pattern_cost,
                    accounted: call < s.accounted_calls,
                })
                .map_err(csv_err(&path))?;
            }
        }
        w.flush().map_err(|e| HarnessError::io(&path, e))?;
        let path = dir.join("adversary_summary.csv");
        let mut w = csv_writer(&path)?;
        w.serialize(&summary).map_err(csv_err(&path))?;
        w.flush().map_err(|e| HarnessError::io(&path, e))?;
    }
    Ok((summary, stats))
}

#[derive(Debug, Clone, Serialize)]
pub struct OptReport {
    pub requests: Vec<Point>,
    pub opt_cost: String,
    pub opt_hierarchical_cost: String,
    pub levels: Vec<usize>,
    pub labels: Vec<Vec<Point>>,
}

pub fn opt(requests: &[Point], weights: &Weights, universe: Universe) -> Result<OptReport> {
    let h = opt_hierarchical(requests, weights, universe)?;
    Ok(OptReport {
        requests: requests.to_vec(),
        opt_cost: opt_cost(requests, weights, universe)?.to_string(),
        opt_hierarchical_cost: h.cost.to_string(),
        levels: h.trace.levels().to_vec(),
        labels: (1..=weights.k()).map(|l| h.labeling.level(l).to_vec()).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsRow {
    pub level: usize,
    pub n: String,
    pub harmonic_n: Option<String>,
    pub ratio_constant: Option<String>,
    pub adversary_constant: Option<String>,
}

/// `n_ℓ`, `H(n_ℓ)`, the per-level ratio constants `c_ℓ` and, given `β`, the
/// adversary's per-call pattern-cost constants.
pub fn constants(k: usize, beta: Option<u64>) -> Result<Vec<ConstantsRow>> {
    if k == 0 {
        return Err(HarnessError::Validation("--k must be at least 1".into()));
    }
    let c = ratio_constants(k).ok();
    let adv = beta.map(|b| adversary_cost_constants(k + 1, b)).transpose()?;
    let h_ok = |l: usize| n_sequence(l).to_string().parse::<u64>().ok().and_then(|n| harmonic(n).ok());
    Ok((1..=k)
        .map(|l| ConstantsRow {
            level: l,
            n: n_sequence(l).to_string(),
            harmonic_n: if l <= 5 { h_ok(l).map(|h| h.to_string()) } else { None },
            ratio_constant: c.as_ref().map(|c| c[l - 1].to_string()),
            adversary_constant: adv.as_ref().map(|a| a[l].to_string()),
        })
        .collect())
}
