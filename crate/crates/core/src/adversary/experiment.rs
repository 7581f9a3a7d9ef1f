//! Feeds an adversary stream to the revealed-pattern algorithm and amortizes
//! both costs over the top-level calls.

use num::ToPrimitive;

use super::stream::{adversary_stream, span_pattern_cost, EmissionStream};
use crate::error::{Error, Result};
use crate::model::{CostReport, Level, Point, Universe, Weights};
use crate::rsp::RspEngine;
use crate::sequences::{adversary_cost_constants, harmonic, n_value};

/// The engine's seed is derived from the stream seed so both are pinned by one number.
pub fn engine_seed(seed: u64) -> u64 {
    seed ^ 0xA5A5_A5A5_A5A5_A5A5
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallCost {
    pub ell_ext: Level,
    pub omitted: Point,
    pub emissions: usize,
    pub alg_cost: u128,
    /// Cost of all intervals, at any level, opened during the call.
    pub pattern_cost: u128,
}

#[derive(Debug, Clone)]
pub struct LowerBoundStats {
    pub k: usize,
    pub beta: u64,
    pub seed: u64,
    pub calls: usize,
    /// Calls counted in the amortization: everything before the last
    /// heaviest-level interval, unless that is the only one.
    pub accounted_calls: usize,
    pub alg_cost: u128,
    pub pattern_cost: u128,
    pub alg_cost_per_call: f64,
    pub pattern_cost_per_call: f64,
    pub ratio: f64,
    /// `(β−1)^{k−1} / (n_{k−1}+1)`.
    pub predicted_alg_cost_per_call: f64,
    /// `β^{k−1} / ((n_{k−1}+1) H(n_{k−1})) + c^adv_{k−1}`.
    pub predicted_pattern_cost_per_call: f64,
    /// `H(n_{k−1})`.
    pub harmonic_bound: f64,
    pub per_call: Vec<CallCost>,
    pub report: CostReport,
}

/// Theoretical comparators `(alg/call, pattern/call, H(n_{k−1}))`.
pub fn lower_bound_predictions(k: usize, beta: u64) -> Result<(f64, f64, f64)> {
    let n = n_value(k - 1).ok_or(Error::Overflow("n_ell"))?;
    let h = harmonic(n)?.to_f64().unwrap_or(f64::NAN);
    let c_adv = adversary_cost_constants(k, beta)?[k - 1]
        .to_f64()
        .unwrap_or(f64::INFINITY);
    let b = beta as f64;
    let alg = (b - 1.0).powi(k as i32 - 1) / (n as f64 + 1.0);
    let pattern = b.powi(k as i32 - 1) / ((n as f64 + 1.0) * h) + c_adv;
    Ok((alg, pattern, h))
}

/// Runs the algorithm on an existing stream.
pub fn evaluate_stream(stream: &EmissionStream) -> Result<LowerBoundStats> {
    let (k, beta) = (stream.k, stream.beta);
    let weights: Vec<u128> = (0..k)
        .map(|j| (beta as u128).checked_pow(j as u32).ok_or(Error::Overflow("beta^k")))
        .collect::<Result<_>>()?;
    let mut engine = RspEngine::new(stream.universe, k, engine_seed(stream.seed))?;
    let mut step_costs = Vec::with_capacity(stream.emissions.len());
    for e in &stream.emissions {
        let out = engine.step(e.point, e.level)?;
        let cost: u128 = out
            .levels
            .iter()
            .filter(|s| s.relocated())
            .map(|s| weights[s.level - 1])
            .sum();
        step_costs.push(cost);
    }
    let per_call: Vec<CallCost> = stream
        .top_calls
        .iter()
        .map(|top| {
            let span = &stream.calls[top.call];
            CallCost {
                ell_ext: top.ell_ext,
                omitted: top.omitted,
                emissions: span.len(),
                alg_cost: step_costs[span.start..span.end].iter().sum(),
                pattern_cost: span_pattern_cost(&stream.emissions[span.start..span.end], k, &weights),
            }
        })
        .collect();
    let last_open = stream
        .top_calls
        .iter()
        .rposition(|t| t.ell_ext == k)
        .unwrap_or(0);
    let accounted_calls = if last_open == 0 { per_call.len() } else { last_open };
    let window = &per_call[..accounted_calls];
    let alg_cost: u128 = window.iter().map(|c| c.alg_cost).sum();
    let pattern_cost: u128 = window.iter().map(|c| c.pattern_cost).sum();
    let (pa, pp, h) = lower_bound_predictions(k, beta)?;
    let calls = accounted_calls as f64;
    let integer_weights: Vec<u64> = weights
        .iter()
        .map(|&w| u64::try_from(w).map_err(|_| Error::Overflow("beta^k")))
        .collect::<Result<_>>()?;
    let report = engine.cost_report(&Weights::from_integers(&integer_weights)?)?;
    Ok(LowerBoundStats {
        k,
        beta,
        seed: stream.seed,
        calls: per_call.len(),
        accounted_calls,
        alg_cost,
        pattern_cost,
        alg_cost_per_call: alg_cost as f64 / calls,
        pattern_cost_per_call: pattern_cost as f64 / calls,
        ratio: alg_cost as f64 / pattern_cost as f64,
        predicted_alg_cost_per_call: pa,
        predicted_pattern_cost_per_call: pp,
        harmonic_bound: h,
        per_call,
        report,
    })
}

/// Generates `budget_calls` calls of the marking loop on `n_{k−1}+1` points
/// with weights `1, β, …, β^{k−1}` and runs the algorithm on them.
pub fn run_lower_bound_experiment(
    k: usize,
    beta: u64,
    budget_calls: usize,
    seed: u64,
) -> Result<LowerBoundStats> {
    if k == 0 {
        return Err(Error::LevelOutOfRange { level: 0, k });
    }
    let n = n_value(k - 1).ok_or(Error::Overflow("n_ell"))?;
    let size = u32::try_from(n + 1).map_err(|_| Error::Overflow("universe"))?;
    let stream = adversary_stream(k, beta, Universe::new(size)?, budget_calls, seed)?;
    evaluate_stream(&stream)
}
