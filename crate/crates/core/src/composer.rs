//! Weighted k-server from a pattern constructor and the revealed-pattern
//! algorithm run in tandem. The composed algorithm's servers sit exactly
//! where the revealed-pattern engine put them; no separate copy is kept.

use num::BigRational;

use crate::error::Result;
use crate::model::{pattern_cost, CostReport, ExtensionTrace, Point, Universe, Weights};
use crate::offline::opt_cost;
use crate::rsp::{RspEngine, StepOutcome};
use crate::spc::SpcAlgorithm;

#[derive(Debug, Clone)]
pub struct ComposedRun {
    pub requests: Vec<Point>,
    /// The constructor's final pattern `ℐ_T`.
    pub spc_trace: ExtensionTrace,
    pub steps: Vec<StepOutcome>,
    pub report: CostReport,
    pub spc_cost: BigRational,
    pub rsp_cost: BigRational,
    pub opt_cost: BigRational,
}

impl ComposedRun {
    /// Positions after step `t` (1-based), lightest server first.
    pub fn positions_at(&self, t: usize) -> Vec<Point> {
        self.steps[t - 1].positions()
    }

    pub fn all_served(&self) -> bool {
        self.steps
            .iter()
            .all(|s| s.levels.iter().any(|l| l.position == s.sigma))
    }
}

/// Feeds each request to `spc`, hands `(σ_t, ℓ_t)` to a fresh engine seeded
/// with `rsp_seed`, and reports the three costs.
pub fn compose_run<S: SpcAlgorithm + ?Sized>(
    spc: &mut S,
    rsp_seed: u64,
    requests: &[Point],
    weights: &Weights,
    universe: Universe,
) -> Result<ComposedRun> {
    let k = spc.k();
    let mut engine = RspEngine::new(universe, k, rsp_seed)?;
    let mut steps = Vec::with_capacity(requests.len());
    for &sigma in requests {
        let ell = spc.step(sigma)?;
        steps.push(engine.step(sigma, ell)?);
    }
    let report = engine.cost_report(weights)?;
    let spc_trace = engine.trace().clone();
    Ok(ComposedRun {
        requests: requests.to_vec(),
        spc_cost: pattern_cost(&spc_trace, weights)?,
        rsp_cost: report.weighted_cost.clone(),
        opt_cost: opt_cost(requests, weights, universe)?,
        spc_trace,
        steps,
        report,
    })
}
