//! The randomized revealed-service-pattern algorithm.
//!
//! Each input is a pair `(σ_t, ℓ_t)`. Servers are decided from the heaviest
//! down. Server `ℓ` is resampled uniformly from
//! `Q_t^ℓ(s_t^{ℓ+1}, …, s_t^k)` when a heavier server made an unforced move
//! earlier in this step or when `ℓ ≤ ℓ_t` (forced). Otherwise it is resampled
//! only if its current point has dropped out of the set (unforced), which
//! raises the flag for all lighter servers. A lone server stays put.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`),
//! so a seed pins every run bit-for-bit.

use num::{BigInt, BigRational, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::feasibility::{FeasibilityIndex, LabelSet};
use crate::model::{CostReport, ExtensionTrace, LevelCounters, Level, Point, Universe, Weights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Forced,
    Unforced,
    None,
}

impl MoveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MoveKind::Forced => "forced",
            MoveKind::Unforced => "unforced",
            MoveKind::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "forced" => Some(MoveKind::Forced),
            "unforced" => Some(MoveKind::Unforced),
            "none" => Some(MoveKind::None),
            _ => None,
        }
    }
}

/// What happened to one server during a step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelStep {
    pub level: Level,
    pub kind: MoveKind,
    /// Flag value when this level was decided.
    pub flag_before: bool,
    pub previous: Option<Point>,
    pub position: Point,
    pub q: LabelSet,
}

impl LevelStep {
    pub fn relocated(&self) -> bool {
        self.previous != Some(self.position)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub t: usize,
    pub sigma: Point,
    pub ell: Level,
    /// Index 0 is level 1.
    pub levels: Vec<LevelStep>,
}

impl StepOutcome {
    pub fn level(&self, level: Level) -> &LevelStep {
        &self.levels[level - 1]
    }

    pub fn positions(&self) -> Vec<Point> {
        self.levels.iter().map(|s| s.position).collect()
    }

    /// Weighted cost of the relocations made in this step.
    pub fn cost(&self, weights: &Weights) -> BigRational {
        self.levels
            .iter()
            .filter(|s| s.relocated())
            .fold(BigRational::zero(), |acc, s| acc + weights.get(s.level))
    }
}

/// Algorithm state: positions, the revealed pattern so far and the random source.
#[derive(Debug, Clone)]
pub struct RspEngine {
    index: FeasibilityIndex,
    positions: Vec<Point>,
    rng: ChaCha8Rng,
    seed: u64,
    counters: Vec<LevelCounters>,
}

impl RspEngine {
    pub fn new(universe: Universe, k: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            index: FeasibilityIndex::new(universe, k)?,
            positions: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            counters: vec![LevelCounters::default(); k],
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn k(&self) -> usize {
        self.index.k()
    }

    pub fn universe(&self) -> Universe {
        self.index.universe()
    }

    pub fn trace(&self) -> &ExtensionTrace {
        self.index.trace()
    }

    pub fn requests(&self) -> &[Point] {
        self.index.requests()
    }

    pub fn steps(&self) -> usize {
        self.index.len()
    }

    /// Server positions, lightest first; `None` before the first step.
    pub fn positions(&self) -> Option<&[Point]> {
        (!self.positions.is_empty()).then_some(self.positions.as_slice())
    }

    fn sample(&mut self, q: &LabelSet) -> Point {
        match q {
            LabelSet::All => self.rng.gen_range(0..self.index.universe().size()),
            LabelSet::Explicit(v) => v[self.rng.gen_range(0..v.len())],
        }
    }

    /// Serves `sigma` given that the adversary's pattern is extended by `ell`.
    ///
    /// An infeasible reveal is rejected before anything moves. `EmptyQ` and
    /// `Unserved` signal a broken internal invariant and leave the state
    /// unusable.
    pub fn step(&mut self, sigma: Point, ell: Level) -> Result<StepOutcome> {
        let k = self.k();
        self.index.push(sigma, ell)?;
        let t = self.index.len();
        if !self.index.is_feasible() {
            self.index.pop();
            return Err(Error::InfeasibleReveal { t });
        }
        let previous: Vec<Option<Point>> = if self.positions.is_empty() {
            vec![None; k]
        } else {
            self.positions.iter().copied().map(Some).collect()
        };
        let mut next = self.positions.clone();
        next.resize(k, 0);
        let mut levels = Vec::with_capacity(k);
        let mut flag = false;
        for level in (1..=k).rev() {
            let q = self.index.compute_q(level, &next[level..])?;
            if q.is_empty() {
                return Err(Error::EmptyQ { t, level });
            }
            let prev = previous[level - 1];
            let flag_before = flag;
            let kind = if flag || level <= ell {
                MoveKind::Forced
            } else if !prev.is_some_and(|p| q.contains(p)) {
                flag = true;
                MoveKind::Unforced
            } else {
                MoveKind::None
            };
            let position = match kind {
                MoveKind::None => prev.expect("a kept server has a position"),
                _ => self.sample(&q),
            };
            next[level - 1] = position;
            let c = &mut self.counters[level - 1];
            match kind {
                MoveKind::Forced => c.forced_resamples += 1,
                MoveKind::Unforced => c.unforced_resamples += 1,
                MoveKind::None => {}
            }
            if prev != Some(position) {
                c.relocations += 1;
            }
            levels.push(LevelStep {
                level,
                kind,
                flag_before,
                previous: prev,
                position,
                q,
            });
        }
        levels.reverse();
        self.positions = next;
        if !self.positions.contains(&sigma) {
            return Err(Error::Unserved { t, sigma });
        }
        Ok(StepOutcome {
            t,
            sigma,
            ell,
            levels,
        })
    }

    /// Recomputes every `Q_t^ℓ(s^{ℓ+1}, …, s^k)` from scratch and checks the
    /// current positions lie in them.
    pub fn check_membership(&self) -> Result<bool> {
        let Some(pos) = self.positions() else {
            return Ok(true);
        };
        let mut fresh =
            FeasibilityIndex::from_parts(self.universe(), self.trace(), self.requests())?;
        for level in 1..=self.k() {
            if !fresh.compute_q(level, &pos[level..])?.contains(pos[level - 1]) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Accumulated counters with `weighted_cost = Σ_ℓ w_ℓ · relocations_ℓ`.
    pub fn cost_report(&self, weights: &Weights) -> Result<CostReport> {
        if self.steps() == 0 {
            return Err(Error::Empty);
        }
        if weights.k() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                actual: weights.k(),
            });
        }
        let mut levels = self.counters.clone();
        for (i, c) in levels.iter_mut().enumerate() {
            c.interval_count = self.trace().interval_count(i + 1) as u64;
        }
        let weighted_cost = levels.iter().enumerate().fold(BigRational::zero(), |acc, (i, c)| {
            acc + weights.get(i + 1) * BigRational::from_integer(BigInt::from(c.relocations))
        });
        Ok(CostReport {
            levels,
            weighted_cost,
        })
    }
}
