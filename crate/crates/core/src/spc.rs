//! Service-pattern construction: online algorithms that, for every request,
//! commit to an extension level keeping the pattern feasible.
//!
//! Two baselines are provided. Neither carries a competitiveness guarantee;
//! they exist to drive the composition and to give known pattern costs.

use crate::error::{Error, Result};
use crate::feasibility::FeasibilityIndex;
use crate::model::{ExtensionTrace, Level, Point, Universe, Weights};
use crate::offline::opt_hierarchical;

/// An online service-pattern constructor.
pub trait SpcAlgorithm {
    fn k(&self) -> usize;
    /// Consumes the next request and returns its extension level `ℓ_t`.
    fn step(&mut self, sigma: Point) -> Result<Level>;
    fn reset(&mut self);
}

/// The smallest `ℓ` whose extension of `trace` stays feasible for
/// `history + [sigma]`. `ℓ = k` always works: every level opens a fresh
/// interval and level 1 can take `sigma`.
pub fn lazy_spc_step(
    history: &[Point],
    trace: &ExtensionTrace,
    sigma: Point,
    universe: Universe,
) -> Result<Level> {
    let mut index = FeasibilityIndex::from_parts(universe, trace, history)?;
    lazy_level(&mut index, sigma)
}

fn lazy_level(index: &mut FeasibilityIndex, sigma: Point) -> Result<Level> {
    let k = index.k();
    let first = if index.is_empty() { k } else { 0 };
    for ell in first..k {
        index.push(sigma, ell)?;
        let ok = index.is_feasible();
        index.pop();
        if ok {
            return Ok(ell);
        }
    }
    Ok(k)
}

/// Extends as little as possible at every step.
#[derive(Debug, Clone)]
pub struct LazySpc {
    index: FeasibilityIndex,
}

impl LazySpc {
    pub fn new(universe: Universe, k: usize) -> Result<Self> {
        Ok(Self {
            index: FeasibilityIndex::new(universe, k)?,
        })
    }

    pub fn trace(&self) -> &ExtensionTrace {
        self.index.trace()
    }
}

impl SpcAlgorithm for LazySpc {
    fn k(&self) -> usize {
        self.index.k()
    }

    fn step(&mut self, sigma: Point) -> Result<Level> {
        let ell = lazy_level(&mut self.index, sigma)?;
        self.index.push(sigma, ell)?;
        Ok(ell)
    }

    fn reset(&mut self) {
        let (universe, k) = (self.index.universe(), self.index.k());
        self.index = FeasibilityIndex::new(universe, k).expect("k was valid");
    }
}

/// Clairvoyant baseline: replays a minimum-cost hierarchical pattern for a
/// request sequence known in advance.
#[derive(Debug, Clone)]
pub struct OracleSpc {
    requests: Vec<Point>,
    trace: ExtensionTrace,
    cursor: usize,
}

impl OracleSpc {
    pub fn new(requests: &[Point], weights: &Weights, universe: Universe) -> Result<Self> {
        let opt = opt_hierarchical(requests, weights, universe)?;
        Ok(Self {
            requests: requests.to_vec(),
            trace: opt.trace,
            cursor: 0,
        })
    }

    pub fn trace(&self) -> &ExtensionTrace {
        &self.trace
    }
}

/// [`OracleSpc`]'s full pattern for `requests`.
pub fn oracle_spc(requests: &[Point], weights: &Weights, universe: Universe) -> Result<ExtensionTrace> {
    Ok(OracleSpc::new(requests, weights, universe)?.trace)
}

impl SpcAlgorithm for OracleSpc {
    fn k(&self) -> usize {
        self.trace.k()
    }

    fn step(&mut self, sigma: Point) -> Result<Level> {
        match self.requests.get(self.cursor) {
            Some(&expected) if expected == sigma => {
                let ell = self.trace.levels()[self.cursor];
                self.cursor += 1;
                Ok(ell)
            }
            Some(_) => Err(Error::Precondition(format!(
                "request {} differs from the planned sequence at step {}",
                sigma,
                self.cursor + 1
            ))),
            None => Err(Error::Precondition("request beyond the planned sequence".into())),
        }
    }

    fn reset(&mut self) {
        self.cursor = 0;
    }
}
