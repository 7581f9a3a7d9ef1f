//! Property suites with machine-readable reports.
//!
//! Every engine run made by any suite is audited: each position must lie in
//! the label set it was drawn from, every request must be served, and the
//! counting bounds on forced moves must hold.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num::{BigRational, ToPrimitive};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use wks_core::adversary::{
    adversary_stream, build_set_system, check_stream, constructive_labeling, evaluate_stream,
    verify_set_system,
};
use wks_core::feasibility::oracle::{
    last_labels_by_enumeration, q_from_tuples, reachable_last_labels, DEFAULT_ENUMERATION_BUDGET,
};
use wks_core::offline::{opt_cost, opt_hierarchical};
use wks_core::sequences::{harmonic, n_value, ratio_constants};
use wks_core::spc::{LazySpc, OracleSpc};
use wks_core::{
    compose_run, pattern_cost, CostReport, ExtensionTrace, FeasibilityIndex, LabelSet, Level, Point,
    RspEngine, SpcAlgorithm, StepOutcome, Universe, Weights,
};

use crate::error::{HarnessError, Result};
use crate::instances::{
    pinned_heavy_instance, random_feasible_reveals, random_instance, random_requests,
    two_label_instance, RandomFeasibleSpc,
};
use crate::seeding::{rng, trial_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Oracle,
    Dichotomy,
    Subset,
    Serving,
    Uniformity,
    Counting,
    Movement,
    Offline,
    SetSystem,
    Adversary,
    LowerBound,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Oracle,
        Suite::Dichotomy,
        Suite::Subset,
        Suite::Serving,
        Suite::Uniformity,
        Suite::Counting,
        Suite::Movement,
        Suite::Offline,
        Suite::SetSystem,
        Suite::Adversary,
        Suite::LowerBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Dichotomy => "dichotomy",
            Suite::Subset => "subset",
            Suite::Serving => "serving",
            Suite::Uniformity => "uniformity",
            Suite::Counting => "counting",
            Suite::Movement => "movement",
            Suite::Offline => "offline",
            Suite::SetSystem => "setsystem",
            Suite::Adversary => "adversary",
            Suite::LowerBound => "lowerbound",
        }
    }

    /// Sample count used when none is given.
    pub fn default_samples(self) -> usize {
        match self {
            Suite::Oracle | Suite::Dichotomy | Suite::Subset | Suite::Counting | Suite::Movement => 1000,
            Suite::Serving => 300,
            Suite::Uniformity => 10_000,
            Suite::Adversary => 10,
            Suite::LowerBound => 20,
            Suite::Offline | Suite::SetSystem => 0,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| HarnessError::Validation(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    /// Instances, steps or runs examined, depending on the suite.
    pub checked: u64,
    pub engine_runs: u64,
    /// Unserved requests, empty label sets, or positions outside their sets.
    pub serving_faults: u64,
    /// Runs breaking the counting bounds on forced moves.
    pub counting_faults: u64,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub counterexample: Option<String>,
    pub seconds: f64,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        Self {
            suite: suite.name().into(),
            passed: true,
            checked: 0,
            engine_runs: 0,
            serving_faults: 0,
            counting_faults: 0,
            metrics: BTreeMap::new(),
            notes: Vec::new(),
            counterexample: None,
            seconds: 0.0,
        }
    }

    fn fail(&mut self, what: impl Into<String>) {
        let what = what.into();
        self.serving_faults += what.contains(SERVING_FAULT) as u64;
        self.counting_faults += what.contains(COUNTING_FAULT) as u64;
        self.passed = false;
        if self.counterexample.is_none() {
            self.counterexample = Some(what);
        }
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> f64 {
        self.metrics.get(name).copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteParams {
    pub seed: u64,
    /// Overrides [`Suite::default_samples`].
    pub samples: Option<usize>,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self { seed: 1, samples: None }
    }
}

pub fn run_suite(suite: Suite, params: SuiteParams) -> Result<SuiteReport> {
    let start = Instant::now();
    let samples = params.samples.unwrap_or(suite.default_samples());
    let seed = params.seed;
    let mut report = match suite {
        Suite::Oracle => oracle_suite(samples, seed)?,
        Suite::Dichotomy => q_ensemble_suite(Suite::Dichotomy, samples, seed)?,
        Suite::Subset => q_ensemble_suite(Suite::Subset, samples, seed)?,
        Suite::Serving => serving_suite(samples, seed)?,
        Suite::Uniformity => uniformity_suite(samples, seed)?,
        Suite::Counting => counting_suite(samples, seed)?,
        Suite::Movement => movement_suite(samples, seed)?,
        Suite::Offline => offline_suite()?,
        Suite::SetSystem => set_system_suite()?,
        Suite::Adversary => adversary_suite(samples, seed)?,
        Suite::LowerBound => lower_bound_suite(samples, seed, 500)?,
    };
    report.seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Every tuple in `{0..size}^len`, lexicographic with the last coordinate fastest.
pub fn all_tuples(size: u32, len: usize) -> Vec<Vec<Point>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..size).map(move |p| {
                    let mut w = v.clone();
                    w.push(p);
                    w
                })
            })
            .collect();
    }
    out
}

/// Every pattern of length `len` (`ℓ_1 = k`).
pub fn all_traces(k: usize, len: usize) -> Vec<ExtensionTrace> {
    all_tuples(k as u32 + 1, len.saturating_sub(1))
        .into_iter()
        .map(|rest| {
            let mut ells = vec![k];
            ells.extend(rest.iter().map(|&l| l as Level));
            ExtensionTrace::from_levels(k, &ells).expect("levels in range")
        })
        .collect()
}

const SERVING_FAULT: &str = "serving fault: ";
const COUNTING_FAULT: &str = "counting fault: ";

/// Engine errors that break the serving guarantee are tagged so reports can count them.
fn core_fault(e: wks_core::Error) -> String {
    match e {
        wks_core::Error::EmptyQ { .. } | wks_core::Error::Unserved { .. } => format!("{SERVING_FAULT}{e}"),
        _ => e.to_string(),
    }
}

/// Audits one engine step.
fn audit_step(step: &StepOutcome) -> std::result::Result<(), String> {
    if let Some(l) = step.levels.iter().find(|l| !l.q.contains(l.position)) {
        return Err(format!(
            "{SERVING_FAULT}t={}: server {} at {} outside its set {}",
            step.t, l.level, l.position, l.q
        ));
    }
    if !step.positions().contains(&step.sigma) {
        return Err(format!("{SERVING_FAULT}t={}: request {} unserved", step.t, step.sigma));
    }
    Ok(())
}

fn audit_report(report: &CostReport) -> std::result::Result<(), String> {
    report
        .check_counting_bounds()
        .map_err(|level| format!("{COUNTING_FAULT}bound violated at level {level}: {:?}", report.levels))
}

/// Runs a fresh engine over `reveals` with all audits.
pub fn audited_run(
    universe: Universe,
    k: usize,
    seed: u64,
    reveals: &[(Point, Level)],
) -> std::result::Result<(Vec<StepOutcome>, CostReport), String> {
    let mut engine = RspEngine::new(universe, k, seed).map_err(core_fault)?;
    let mut steps = Vec::with_capacity(reveals.len());
    for &(sigma, ell) in reveals {
        let step = engine.step(sigma, ell).map_err(core_fault)?;
        audit_step(&step)?;
        steps.push(step);
    }
    let w = Weights::from_integers(&vec![1; k]).expect("unit weights");
    let report = engine.cost_report(&w).map_err(core_fault)?;
    audit_report(&report)?;
    Ok((steps, report))
}

fn describe(trace: &ExtensionTrace, reqs: &[Point]) -> String {
    format!("levels={:?} requests={:?}", trace.levels(), reqs)
}

/// Compares every `Q^ℓ(top)` of one instance against reference tuples.
fn compare_q(
    trace: &ExtensionTrace,
    reqs: &[Point],
    universe: Universe,
    tuples: &BTreeSet<Vec<Point>>,
) -> std::result::Result<u64, String> {
    let k = trace.k();
    let mut idx = FeasibilityIndex::from_parts(universe, trace, reqs).map_err(core_fault)?;
    if idx.is_feasible() == tuples.is_empty() {
        return Err(format!("feasibility disagrees on {}", describe(trace, reqs)));
    }
    let mut compared = 0;
    for level in 1..=k {
        for top in all_tuples(universe.size(), k - level) {
            let q = idx.compute_q(level, &top).map_err(core_fault)?;
            let expected = q_from_tuples(tuples, universe, level, &top);
            if q != expected {
                return Err(format!(
                    "Q^{level}({top:?}) = {q}, reference {expected} on {}",
                    describe(trace, reqs)
                ));
            }
            compared += 1;
        }
    }
    Ok(compared)
}

fn oracle_suite(samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Oracle);
    let mut jobs = Vec::new();
    for k in 1..=2usize {
        for size in 1..=3u32 {
            for len in 1..=5usize {
                for trace in all_traces(k, len) {
                    jobs.push((size, trace));
                }
            }
        }
    }
    let results: Vec<std::result::Result<(u64, u64), String>> = jobs
        .par_iter()
        .map(|(size, trace)| {
            let u = Universe::new(*size).expect("nonempty");
            let mut counts = (0, 0);
            for reqs in all_tuples(*size, trace.len()) {
                let tuples = last_labels_by_enumeration(trace, &reqs, u, DEFAULT_ENUMERATION_BUDGET)
                    .map_err(core_fault)?;
                counts.0 += 1;
                counts.1 += compare_q(trace, &reqs, u, &tuples)?;
            }
            Ok(counts)
        })
        .collect();
    let (mut instances, mut sets) = (0u64, 0u64);
    for r in results {
        match r {
            Ok((i, s)) => {
                instances += i;
                sets += s;
            }
            Err(e) => report.fail(e),
        }
    }
    report.metric("exhaustive_instances", instances as f64);
    report.metric("exhaustive_q_sets", sets as f64);

    let random: Vec<std::result::Result<(u64, bool), String>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(trial_seed(seed, i as u64));
            let u = Universe::new(4).expect("nonempty");
            let len = r.gen_range(1..=7);
            let (trace, reqs) = if i % 2 == 0 {
                let reveals = random_feasible_reveals(&mut r, 3, u, len);
                let (reqs, ells): (Vec<Point>, Vec<Level>) = reveals.into_iter().unzip();
                (ExtensionTrace::from_levels(3, &ells).expect("valid"), reqs)
            } else {
                random_instance(&mut r, 3, u, len)
            };
            let tuples = reachable_last_labels(&trace, &reqs, u, DEFAULT_ENUMERATION_BUDGET)
                .map_err(core_fault)?;
            let crossed = trace.total_intervals() <= 8;
            if crossed {
                let enumerated = last_labels_by_enumeration(&trace, &reqs, u, DEFAULT_ENUMERATION_BUDGET)
                    .map_err(core_fault)?;
                if enumerated != tuples {
                    return Err(format!("reference oracles disagree on {}", describe(&trace, &reqs)));
                }
            }
            Ok((compare_q(&trace, &reqs, u, &tuples)?, crossed))
        })
        .collect();
    let (mut random_sets, mut crossed) = (0u64, 0u64);
    for r in &random {
        match r {
            Ok((s, c)) => {
                random_sets += s;
                crossed += *c as u64;
            }
            Err(e) => report.fail(e.clone()),
        }
    }
    report.metric("random_instances", samples as f64);
    report.metric("random_q_sets", random_sets as f64);
    report.metric("random_oracle_cross_checks", crossed as f64);
    report.checked = instances + samples as u64;
    Ok(report)
}

fn q_ensemble_suite(which: Suite, samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(which);
    let (k, size) = (2usize, 6u32);
    let u = Universe::new(size).expect("nonempty");
    let bounds: Vec<u64> = (1..=k).map(|l| n_value(l).expect("small level")).collect();
    // (steps, checks, violation, max explicit size per level)
    let results: Vec<(u64, u64, Option<String>, Vec<usize>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(trial_seed(seed, i as u64));
            let len = r.gen_range(1..=6);
            // Half the patterns extend as little as possible, which keeps intervals long.
            let reveals = if i % 2 == 0 {
                random_feasible_reveals(&mut r, k, u, len)
            } else {
                let mut lazy = LazySpc::new(u, k).expect("valid");
                random_requests(&mut r, u, len)
                    .into_iter()
                    .map(|s| (s, lazy.step(s).expect("feasible extension exists")))
                    .collect()
            };
            let mut idx = FeasibilityIndex::new(u, k).expect("valid");
            let mut prev: Vec<LabelSet> = Vec::new();
            let mut max_size = vec![0usize; k];
            let (mut checks, mut bad) = (0u64, None);
            for (t, &(sigma, ell)) in reveals.iter().enumerate() {
                idx.push(sigma, ell).expect("valid reveal");
                let mut now = Vec::new();
                let mut slot = 0;
                for level in 1..=k {
                    for top in all_tuples(size, k - level) {
                        let q = idx.compute_q(level, &top).expect("valid query");
                        if let LabelSet::Explicit(v) = &q {
                            max_size[level - 1] = max_size[level - 1].max(v.len());
                        }
                        match which {
                            Suite::Dichotomy => {
                                checks += 1;
                                if let LabelSet::Explicit(v) = &q {
                                    if v.len() as u64 > bounds[level - 1] && bad.is_none() {
                                        bad = Some(format!(
                                            "|Q^{level}({top:?})| = {} at t={} on {:?}",
                                            v.len(),
                                            t + 1,
                                            reveals
                                        ));
                                    }
                                }
                            }
                            _ => {
                                if t > 0 && level > ell {
                                    checks += 1;
                                    if !q.is_subset_of(&prev[slot]) && bad.is_none() {
                                        bad = Some(format!(
                                            "Q^{level}({top:?}) grew from {} to {q} at t={} on {:?}",
                                            prev[slot],
                                            t + 1,
                                            reveals
                                        ));
                                    }
                                }
                            }
                        }
                        now.push(q);
                        slot += 1;
                    }
                }
                prev = now;
            }
            (reveals.len() as u64, checks, bad, max_size)
        })
        .collect();
    let mut steps = 0;
    let mut max_size = vec![0usize; k];
    for (s, c, bad, m) in results {
        steps += s;
        report.checked += c;
        if let Some(b) = bad {
            report.fail(b);
        }
        for (a, b) in max_size.iter_mut().zip(m) {
            *a = (*a).max(b);
        }
    }
    report.metric("instances", samples as f64);
    report.metric("steps", steps as f64);
    for (l, m) in max_size.iter().enumerate() {
        report.metric(&format!("max_explicit_size_level_{}", l + 1), *m as f64);
    }
    Ok(report)
}

fn serving_suite(samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Serving);
    let results: Vec<std::result::Result<u64, String>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(trial_seed(seed, i as u64));
            let k = 1 + i % 3;
            let size = r.gen_range(1..=5u32);
            let u = Universe::new(size).expect("nonempty");
            let len = r.gen_range(1..=15);
            let reqs = random_requests(&mut r, u, len);
            let ws: Vec<u64> = (0..k as u32).map(|j| 3u64.pow(j)).collect();
            let w = Weights::from_integers(&ws).expect("valid");
            let mut spc: Box<dyn SpcAlgorithm> = match (i / 3) % 3 {
                0 => Box::new(LazySpc::new(u, k).map_err(core_fault)?),
                1 => Box::new(OracleSpc::new(&reqs, &w, u).map_err(core_fault)?),
                _ => Box::new(RandomFeasibleSpc::new(u, k, rng(r.gen())).map_err(core_fault)?),
            };
            let run = compose_run(spc.as_mut(), r.gen(), &reqs, &w, u).map_err(core_fault)?;
            for s in &run.steps {
                audit_step(s)?;
            }
            audit_report(&run.report)?;
            if run.opt_cost > run.rsp_cost || run.opt_cost > run.spc_cost {
                return Err(format!("cost below the optimum on {reqs:?}"));
            }
            Ok(len as u64)
        })
        .collect();
    for r in results {
        match r {
            Ok(steps) => {
                report.checked += steps;
                report.engine_runs += 1;
            }
            Err(e) => report.fail(e),
        }
    }
    report.metric("requests_served", report.checked as f64);
    Ok(report)
}

/// Largest `|freq − p| / (4 √(p(1−p)/N))` over the observed points.
fn uniformity_excess(counts: &BTreeMap<Point, u64>, support: &[Point], n: u64) -> (f64, Option<String>) {
    let p = 1.0 / support.len() as f64;
    let tol = 4.0 * (p * (1.0 - p) / n as f64).sqrt();
    let mut worst: f64 = 0.0;
    for &x in support {
        let freq = *counts.get(&x).unwrap_or(&0) as f64 / n as f64;
        worst = worst.max((freq - p).abs() / tol);
    }
    let outside: Vec<_> = counts.keys().filter(|x| !support.contains(x)).collect();
    let bad = (!outside.is_empty()).then(|| format!("sampled outside the set: {outside:?}"));
    (worst, bad)
}

fn uniformity_suite(samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Uniformity);
    let n = samples.max(1) as u64;
    let cases = [("pinned_heavy", pinned_heavy_instance(), 1usize), ("two_label", two_label_instance(), 2usize)];
    for (name, (u, script), level) in cases {
        let runs: Vec<std::result::Result<(Point, LabelSet, Point), String>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let (steps, _) = audited_run(u, 2, trial_seed(seed, i), &script)?;
                let last = steps.last().expect("nonempty script");
                let l = last.level(level);
                Ok((l.position, l.q.clone(), last.level(2).position))
            })
            .collect();
        let mut counts: BTreeMap<Point, u64> = BTreeMap::new();
        let mut sets: Vec<LabelSet> = Vec::new();
        let mut heavy = BTreeSet::new();
        for r in runs {
            match r {
                Ok((p, q, h)) => {
                    *counts.entry(p).or_default() += 1;
                    if !sets.contains(&q) {
                        sets.push(q);
                    }
                    heavy.insert(h);
                    report.engine_runs += 1;
                }
                Err(e) => report.fail(e),
            }
        }
        if sets.len() != 1 {
            report.fail(format!("{name}: the final set varies across seeds: {sets:?}"));
            continue;
        }
        if level == 1 && heavy.len() != 1 {
            report.fail(format!("{name}: the heavy server is not pinned: {heavy:?}"));
        }
        let support = sets.into_iter().next().expect("one set").to_points(u);
        let (worst, bad) = uniformity_excess(&counts, &support, n);
        if let Some(b) = bad {
            report.fail(format!("{name}: {b}"));
        }
        if worst > 1.0 {
            report.fail(format!("{name}: frequencies {counts:?} over {n} runs miss 1/{}", support.len()));
        }
        report.metric(&format!("{name}_set_size"), support.len() as f64);
        report.metric(&format!("{name}_worst_deviation_over_tolerance"), worst);
        report.checked += n;
    }
    Ok(report)
}

fn counting_suite(samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Counting);
    let results: Vec<std::result::Result<(), String>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(trial_seed(seed, i as u64));
            let k = 1 + i % 3;
            let u = Universe::new(r.gen_range(2..=5)).expect("nonempty");
            let len = r.gen_range(1..=25);
            let reveals = random_feasible_reveals(&mut r, k, u, len);
            audited_run(u, k, r.gen(), &reveals).map(|_| ())
        })
        .collect();
    for r in results {
        match r {
            Ok(()) => report.engine_runs += 1,
            Err(e) => report.fail(e),
        }
    }
    report.checked = report.engine_runs;
    Ok(report)
}

fn movement_suite(samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Movement);
    let k = 2;
    let c = ratio_constants(k)?;
    let h: Vec<f64> = (1..=k)
        .map(|l| harmonic(n_value(l).expect("small")).map(|x| x.to_f64().unwrap_or(f64::NAN)))
        .collect::<std::result::Result<_, _>>()?;
    let trials = samples.max(1);
    let fixed = [(4u32, 30usize), (5, 40), (6, 40)];
    for (case, &(size, len)) in fixed.iter().enumerate() {
        let u = Universe::new(size).expect("nonempty");
        let reveals = random_feasible_reveals(&mut rng(trial_seed(seed, 1_000_000 + case as u64)), k, u, len);
        let runs: Vec<std::result::Result<CostReport, String>> = (0..trials)
            .into_par_iter()
            .map(|i| audited_run(u, k, trial_seed(seed, i as u64), &reveals).map(|(_, r)| r))
            .collect();
        let mut ok = Vec::new();
        for r in runs {
            match r {
                Ok(rep) => ok.push(rep),
                Err(e) => report.fail(e),
            }
        }
        report.engine_runs += ok.len() as u64;
        if ok.is_empty() {
            continue;
        }
        let m = ok.len() as f64;
        for level in 1..=k {
            let x = ok.iter().map(|r| r.level(level).forced_resamples as f64).sum::<f64>() / m;
            let y = ok.iter().map(|r| r.level(level).unforced_resamples as f64).sum::<f64>() / m;
            let intervals = ok[0].level(level).interval_count as f64;
            let cl = c[level - 1].to_f64().unwrap_or(f64::NAN);
            let tag = format!("case{case}_level{level}");
            report.metric(&format!("{tag}_mean_forced"), x);
            report.metric(&format!("{tag}_mean_unforced"), y);
            report.metric(&format!("{tag}_intervals"), intervals);
            if y > h[level - 1] * x * 1.1 {
                report.fail(format!("{tag}: mean unforced {y:.3} exceeds H(n)·{x:.3}·1.1"));
            }
            if x + y > cl * intervals * 1.1 {
                report.fail(format!("{tag}: mean moves {:.3} exceed c·{intervals}·1.1", x + y));
            }
            report.checked += 2;
        }
    }
    Ok(report)
}

/// Minimum total movement by trying every configuration sequence.
fn brute_opt_cost(reqs: &[Point], weights: &[u64], size: u32) -> u64 {
    let k = weights.len();
    let configs: Vec<Vec<Point>> = all_tuples(size, k);
    let mut best: Vec<Option<u64>> = configs
        .iter()
        .map(|c| c.contains(&reqs[0]).then(|| weights.iter().sum()))
        .collect();
    for &sigma in &reqs[1..] {
        best = configs
            .iter()
            .map(|c| {
                if !c.contains(&sigma) {
                    return None;
                }
                configs
                    .iter()
                    .zip(&best)
                    .filter_map(|(d, b)| {
                        let moved: u64 = (0..k).filter(|&i| c[i] != d[i]).map(|i| weights[i]).sum();
                        b.map(|b| b + moved)
                    })
                    .min()
            })
            .collect();
    }
    best.into_iter().flatten().min().expect("some configuration serves")
}

fn offline_suite() -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Offline);
    let example = opt_cost(&[0, 1, 0, 1], &Weights::from_integers(&[1, 10])?, Universe::new(3)?)?;
    report.metric("example_abab_w1_10", example.to_f64().unwrap_or(f64::NAN));
    if example != BigRational::from_integer(11.into()) {
        report.fail(format!("opt_cost(a,b,a,b; 1,10) = {example}"));
    }
    let weight_sets: Vec<Vec<u64>> = vec![vec![1], vec![1, 1], vec![1, 3], vec![1, 10]];
    let mut jobs = Vec::new();
    for ws in &weight_sets {
        for size in 1..=3u32 {
            for len in 1..=5usize {
                jobs.push((ws.clone(), size, len));
            }
        }
    }
    let results: Vec<std::result::Result<(u64, u64), String>> = jobs
        .par_iter()
        .map(|(ws, size, len)| {
            let k = ws.len();
            let u = Universe::new(*size).expect("nonempty");
            let w = Weights::from_integers(ws).expect("valid");
            let traces = all_traces(k, *len);
            let (mut n, mut brute) = (0, 0);
            for reqs in all_tuples(*size, *len) {
                let opt = opt_hierarchical(&reqs, &w, u).map_err(core_fault)?;
                let mut best: Option<BigRational> = None;
                for trace in &traces {
                    let mut idx = FeasibilityIndex::from_parts(u, trace, &reqs).map_err(core_fault)?;
                    if idx.is_feasible() {
                        let c = pattern_cost(trace, &w).map_err(core_fault)?;
                        if best.as_ref().is_none_or(|b| c < *b) {
                            best = Some(c);
                        }
                    }
                }
                let ctx = format!("w={ws:?} |U|={size} requests={reqs:?}");
                if best.as_ref() != Some(&opt.cost) {
                    return Err(format!("hierarchical optimum {} vs exhaustive {best:?} for {ctx}", opt.cost));
                }
                if !opt.labeling.serves(&opt.trace, &reqs) {
                    return Err(format!("witness labeling does not serve {ctx}"));
                }
                let oc = opt_cost(&reqs, &w, u).map_err(core_fault)?;
                if oc > opt.cost {
                    return Err(format!("opt_cost {oc} above hierarchical {} for {ctx}", opt.cost));
                }
                if *len <= 4 {
                    let b = brute_opt_cost(&reqs, ws, *size);
                    if oc != BigRational::from_integer(b.into()) {
                        return Err(format!("opt_cost {oc} vs brute force {b} for {ctx}"));
                    }
                    brute += 1;
                }
                n += 1;
            }
            Ok((n, brute))
        })
        .collect();
    let mut brute = 0;
    for r in results {
        match r {
            Ok((n, b)) => {
                report.checked += n;
                brute += b;
            }
            Err(e) => report.fail(e),
        }
    }
    report.metric("instances", report.checked as f64);
    report.metric("brute_force_opt_checks", brute as f64);
    Ok(report)
}

fn set_system_suite() -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::SetSystem);
    for ell in 1..=4usize {
        let n = n_value(ell).expect("small level") as u32;
        // A scattered ground set, to avoid relying on contiguous indices.
        let ground: Vec<Point> = (0..n).map(|i| 3 * i + 7).rev().collect();
        let system = build_set_system(&ground, ell)?;
        let violations = verify_set_system(&ground, &system.sets, ell);
        if let Some(v) = violations.first() {
            report.fail(format!("level {ell}: {v}"));
        }
        report.metric(&format!("level{ell}_sets"), system.sets.len() as f64);
        report.metric(&format!("level{ell}_set_size"), system.sets[0].len() as f64);
        report.checked += 1;
    }
    Ok(report)
}

fn adversary_suite(samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Adversary);
    // (k, β, calls, check every prefix)
    let configs = [(1usize, 10u64, 50usize, true), (2, 3, 50, true), (2, 100, 50, true), (3, 2, 8, true)];
    let mut jobs = Vec::new();
    for &cfg in &configs {
        for i in 0..samples.max(1) {
            jobs.push((cfg, trial_seed(seed, i as u64)));
        }
    }
    let results: Vec<std::result::Result<(u64, u64), String>> = jobs
        .par_iter()
        .map(|&((k, beta, calls, prefixes), s)| {
            let size = n_value(k - 1).expect("small") as u32 + 1;
            let u = Universe::new(size).expect("nonempty");
            let stream = adversary_stream(k, beta, u, calls, s).map_err(core_fault)?;
            let ctx = format!("k={k} beta={beta} seed={s}");
            let violations = check_stream(&stream).map_err(core_fault)?;
            if let Some(v) = violations.first() {
                return Err(format!("{ctx}: {v}"));
            }
            if prefixes {
                let mut idx = FeasibilityIndex::new(u, k).expect("valid");
                for (t, e) in stream.emissions.iter().enumerate() {
                    idx.push(e.point, e.level).map_err(core_fault)?;
                    if !idx.is_feasible() {
                        return Err(format!("{ctx}: prefix of length {} infeasible", t + 1));
                    }
                }
            }
            let labeling = constructive_labeling(&stream).map_err(core_fault)?;
            let trace = stream.trace().map_err(core_fault)?;
            if !labeling.serves(&trace, &stream.requests()) {
                return Err(format!("{ctx}: constructive labeling does not serve the stream"));
            }
            let stats = evaluate_stream(&stream).map_err(core_fault)?;
            audit_report(&stats.report)?;
            Ok((stream.calls.len() as u64, stream.emissions.len() as u64))
        })
        .collect();
    let (mut calls, mut emissions) = (0, 0);
    for r in results {
        match r {
            Ok((c, e)) => {
                calls += c;
                emissions += e;
                report.engine_runs += 1;
            }
            Err(e) => report.fail(e),
        }
    }
    report.checked = calls;
    report.metric("strategy_calls_checked", calls as f64);
    report.metric("emissions_checked", emissions as f64);
    Ok(report)
}

/// Tolerances for the lower-bound experiment.
pub const ALG_COST_TOLERANCE: f64 = 0.10;
pub const PATTERN_COST_TOLERANCE: f64 = 0.10;
pub const RATIO_BAND: (f64, f64) = (1.30, 1.55);

pub fn lower_bound_suite(seeds: usize, seed: u64, calls: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::LowerBound);
    let (k, beta) = (2usize, 100u64);
    let runs: Vec<std::result::Result<_, String>> = (0..seeds.max(1))
        .into_par_iter()
        .map(|i| {
            let stats = wks_core::adversary::run_lower_bound_experiment(k, beta, calls, trial_seed(seed, i as u64))
                .map_err(core_fault)?;
            audit_report(&stats.report)?;
            Ok(stats)
        })
        .collect();
    let mut all = Vec::new();
    for r in runs {
        match r {
            Ok(s) => all.push(s),
            Err(e) => report.fail(e),
        }
    }
    report.engine_runs = all.len() as u64;
    if all.is_empty() {
        return Ok(report);
    }
    let accounted: usize = all.iter().map(|s| s.accounted_calls).sum();
    let alg: u128 = all.iter().map(|s| s.alg_cost).sum();
    let pat: u128 = all.iter().map(|s| s.pattern_cost).sum();
    let alg_per_call = alg as f64 / accounted as f64;
    let pat_per_call = pat as f64 / accounted as f64;
    let ratio = alg as f64 / pat as f64;
    let (pa, pp, h) = (
        all[0].predicted_alg_cost_per_call,
        all[0].predicted_pattern_cost_per_call,
        all[0].harmonic_bound,
    );
    report.checked = accounted as u64;
    report.metric("seeds", all.len() as f64);
    report.metric("accounted_calls", accounted as f64);
    report.metric("alg_cost_per_call", alg_per_call);
    report.metric("pattern_cost_per_call", pat_per_call);
    report.metric("ratio", ratio);
    report.metric("predicted_alg_cost_per_call", pa);
    report.metric("predicted_pattern_cost_per_call", pp);
    report.metric("harmonic_bound", h);
    if alg_per_call < pa * (1.0 - ALG_COST_TOLERANCE) {
        report.fail(format!("algorithm cost per call {alg_per_call:.3} below {pa:.3} by more than 10%"));
    } else if alg_per_call > pa * (1.0 + ALG_COST_TOLERANCE) {
        report
            .notes
            .push(format!("algorithm cost per call {alg_per_call:.3} above {pa:.3} by more than 10%"));
    }
    if (pat_per_call - pp).abs() > pp * PATTERN_COST_TOLERANCE {
        report.fail(format!("pattern cost per call {pat_per_call:.3} not within 10% of {pp:.3}"));
    }
    if !(RATIO_BAND.0..=RATIO_BAND.1).contains(&ratio) {
        report.fail(format!("ratio {ratio:.4} outside [{}, {}]", RATIO_BAND.0, RATIO_BAND.1));
    }
    Ok(report)
}
