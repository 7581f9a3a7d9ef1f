use thiserror::Error;

use crate::model::{Level, Point};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("universe must contain at least one point")]
    EmptyUniverse,
    #[error("point {point} is outside the universe of size {size}")]
    PointOutOfRange { point: Point, size: u32 },
    #[error("weights must be a nonempty non-decreasing sequence of positive rationals")]
    InvalidWeights,
    #[error("level {level} is out of range 0..={k}")]
    LevelOutOfRange { level: Level, k: usize },
    #[error("the first step of a trace must be a {k}-extension, got {level}")]
    FirstStepNotFull { level: Level, k: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("trace has {trace} steps but there are {requests} requests")]
    LengthMismatch { trace: usize, requests: usize },
    #[error("[{begin}, {end}) is not an interval at level {level}")]
    NotAnInterval { level: Level, begin: u32, end: u32 },
    #[error("empty trace or request sequence")]
    Empty,
    #[error("work estimate {needed} exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("harmonic number of zero is undefined")]
    ZeroHarmonic,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("step {t}: the revealed extension is infeasible for the request history")]
    InfeasibleReveal { t: usize },
    #[error("step {t}: empty feasible-label set at level {level}")]
    EmptyQ { t: usize, level: Level },
    #[error("step {t}: request {sigma} is not covered by any server")]
    Unserved { t: usize, sigma: Point },
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
