//! The recursive randomized request generator and its top-level marking loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::set_system::build_set_system;
use crate::error::{Error, Result};
use crate::model::{ExtensionTrace, Interval, Labeling, Level, Point, Universe};
use crate::sequences::{adversary_cost_constants, branching, n_value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emission {
    pub point: Point,
    pub level: Level,
}

/// One `strategy(ell, points, ell_ext)` invocation. `start..end` indexes the
/// emissions it produced (0-based), so its time span is `[start+1, end+1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallSpan {
    pub ell: Level,
    pub ell_ext: Level,
    pub start: usize,
    pub end: usize,
    pub points: Vec<Point>,
}

impl CallSpan {
    pub fn interval(&self) -> Interval {
        Interval::new(self.start as u32 + 1, self.end as u32 + 1)
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// A call made by the marking loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopCall {
    /// Index into [`EmissionStream::calls`].
    pub call: usize,
    pub omitted: Point,
    pub ell_ext: Level,
}

/// Collects emissions and call spans, calls in preorder.
#[derive(Debug, Clone, Default)]
pub struct StreamSink {
    pub emissions: Vec<Emission>,
    pub calls: Vec<CallSpan>,
}

#[derive(Debug, Clone)]
pub struct EmissionStream {
    pub k: usize,
    pub beta: u64,
    pub universe: Universe,
    pub seed: u64,
    pub emissions: Vec<Emission>,
    pub calls: Vec<CallSpan>,
    pub top_calls: Vec<TopCall>,
}

impl EmissionStream {
    pub fn requests(&self) -> Vec<Point> {
        self.emissions.iter().map(|e| e.point).collect()
    }

    pub fn levels(&self) -> Vec<Level> {
        self.emissions.iter().map(|e| e.level).collect()
    }

    pub fn trace(&self) -> Result<ExtensionTrace> {
        ExtensionTrace::from_levels(self.k, &self.levels())
    }

    pub fn top_span(&self, i: usize) -> &CallSpan {
        &self.calls[self.top_calls[i].call]
    }
}

/// Requests emitted by one `strategy(ell, ·, ·)` call.
pub fn emissions_per_call(ell: Level, beta: u64) -> u128 {
    (1..=ell).fold(1u128, |acc, j| {
        acc.saturating_mul((beta as u128 - 1) * branching(j) as u128)
    })
}

fn check_beta(beta: u64) -> Result<()> {
    if beta < 2 {
        return Err(Error::Precondition(format!("beta must be at least 2, got {beta}")));
    }
    Ok(())
}

/// Runs `strategy(ell, points, ell_ext)` into `sink`.
pub fn strategy_stream<R: Rng + ?Sized>(
    ell: Level,
    points: &[Point],
    ell_ext: Level,
    beta: u64,
    rng: &mut R,
    sink: &mut StreamSink,
) -> Result<()> {
    check_beta(beta)?;
    let n = n_value(ell).ok_or(Error::Overflow("n_ell"))?;
    if points.len() as u64 != n {
        return Err(Error::DimensionMismatch {
            expected: n as usize,
            actual: points.len(),
        });
    }
    if ell_ext < ell {
        return Err(Error::Precondition(format!(
            "extension level {ell_ext} below strategy level {ell}"
        )));
    }
    run_strategy(ell, points, ell_ext, beta, rng, sink)
}

fn run_strategy<R: Rng + ?Sized>(
    ell: Level,
    points: &[Point],
    ell_ext: Level,
    beta: u64,
    rng: &mut R,
    sink: &mut StreamSink,
) -> Result<()> {
    let id = sink.calls.len();
    let start = sink.emissions.len();
    sink.calls.push(CallSpan {
        ell,
        ell_ext,
        start,
        end: start,
        points: points.to_vec(),
    });
    if ell == 0 {
        sink.emissions.push(Emission {
            point: points[0],
            level: ell_ext,
        });
    } else {
        let system = build_set_system(points, ell)?;
        let rounds = (beta - 1) * branching(ell);
        let mut ext = ell_ext;
        for _ in 0..rounds {
            let set = &system.sets[rng.gen_range(0..system.sets.len())];
            run_strategy(ell - 1, set, ext, beta, rng, sink)?;
            ext = ell - 1;
        }
    }
    sink.calls[id].end = sink.emissions.len();
    Ok(())
}

/// The marking state of the top-level loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkState {
    points: Vec<Point>,
    marked: Vec<bool>,
}

impl MarkState {
    /// All points marked.
    pub fn new(points: Vec<Point>) -> Self {
        let marked = vec![true; points.len()];
        Self { points, marked }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn is_marked(&self, i: usize) -> bool {
        self.marked[i]
    }

    pub fn unmarked(&self) -> impl Iterator<Item = Point> + '_ {
        self.points
            .iter()
            .zip(&self.marked)
            .filter(|(_, &m)| !m)
            .map(|(&p, _)| p)
    }

    /// Marks point `i`. If that completes the marking, unmarks everything
    /// else and returns `true`.
    pub fn mark(&mut self, i: usize) -> bool {
        self.marked[i] = true;
        if self.marked.iter().all(|&m| m) {
            self.marked.iter_mut().for_each(|m| *m = false);
            self.marked[i] = true;
            true
        } else {
            false
        }
    }
}

/// `budget_calls` rounds of the marking loop on the whole universe, which must
/// have `n_{k-1} + 1` points.
pub fn adversary_stream(
    k: usize,
    beta: u64,
    universe: Universe,
    budget_calls: usize,
    seed: u64,
) -> Result<EmissionStream> {
    check_beta(beta)?;
    if k == 0 {
        return Err(Error::LevelOutOfRange { level: 0, k });
    }
    if budget_calls == 0 {
        return Err(Error::Precondition("call budget must be at least 1".into()));
    }
    let n = n_value(k - 1).ok_or(Error::Overflow("n_ell"))?;
    if universe.size() as u64 != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n as usize + 1,
            actual: universe.size() as usize,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut marks = MarkState::new(universe.points().collect());
    let mut sink = StreamSink::default();
    let mut top_calls = Vec::with_capacity(budget_calls);
    for _ in 0..budget_calls {
        let i = rng.gen_range(0..marks.points().len());
        let omitted = marks.points()[i];
        let ell_ext = if marks.mark(i) { k } else { k - 1 };
        let rest: Vec<Point> = universe.points().filter(|&q| q != omitted).collect();
        top_calls.push(TopCall {
            call: sink.calls.len(),
            omitted,
            ell_ext,
        });
        run_strategy(k - 1, &rest, ell_ext, beta, &mut rng, &mut sink)?;
    }
    Ok(EmissionStream {
        k,
        beta,
        universe,
        seed,
        emissions: sink.emissions,
        calls: sink.calls,
        top_calls,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StreamViolation {
    EmissionCount { call: usize, expected: u128, actual: usize },
    LevelStructure { call: usize },
    NotAnInterval { call: usize },
    PatternCost { call: usize, cost: u128, bound: u128 },
}

impl std::fmt::Display for StreamViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StreamViolation::EmissionCount {
                call,
                expected,
                actual,
            } => write!(f, "call {call} emitted {actual} requests, expected {expected}"),
            StreamViolation::LevelStructure { call } => {
                write!(f, "call {call} has a misplaced extension level")
            }
            StreamViolation::NotAnInterval { call } => {
                write!(f, "span of call {call} is not an interval of its level")
            }
            StreamViolation::PatternCost { call, cost, bound } => {
                write!(f, "call {call} has pattern cost {cost} above {bound}")
            }
        }
    }
}

fn level_weights(k: usize, beta: u64) -> Result<Vec<u128>> {
    (0..k)
        .map(|j| (beta as u128).checked_pow(j as u32).ok_or(Error::Overflow("beta^k")))
        .collect()
}

/// Cost of the intervals at levels `1..=max_level` that start at an emission
/// in `emissions`.
pub fn span_pattern_cost(emissions: &[Emission], max_level: Level, weights: &[u128]) -> u128 {
    emissions
        .iter()
        .map(|e| weights[..e.level.min(max_level)].iter().sum::<u128>())
        .sum()
}

/// Emission counts, the level structure of every call, and the per-call
/// pattern-cost bound.
pub fn check_stream(stream: &EmissionStream) -> Result<Vec<StreamViolation>> {
    let trace = stream.trace()?;
    let weights = level_weights(stream.k, stream.beta)?;
    let bounds = adversary_cost_constants(stream.k, stream.beta)?;
    let mut out = Vec::new();
    for (id, call) in stream.calls.iter().enumerate() {
        let expected = emissions_per_call(call.ell, stream.beta);
        if call.len() as u128 != expected {
            out.push(StreamViolation::EmissionCount {
                call: id,
                expected,
                actual: call.len(),
            });
        }
        let span = &stream.emissions[call.start..call.end];
        let shaped = span.first().is_some_and(|e| e.level == call.ell_ext && e.level >= call.ell)
            && span[1..].iter().all(|e| e.level < call.ell);
        if !shaped {
            out.push(StreamViolation::LevelStructure { call: id });
        }
        if call.ell >= 1 && trace.position_of(call.ell, call.interval()).is_none() {
            out.push(StreamViolation::NotAnInterval { call: id });
        }
        let cost = span_pattern_cost(span, call.ell, &weights);
        let bound = u128::try_from(&bounds[call.ell]).map_err(|_| Error::Overflow("c_adv"))?;
        if cost > bound {
            out.push(StreamViolation::PatternCost {
                call: id,
                cost,
                bound,
            });
        }
    }
    Ok(out)
}

/// Labels every interval of the stream's pattern so that each request is
/// served, following the inductive feasibility argument: a heaviest-level
/// interval takes the point whose marking closes it (or any point still
/// unmarked), and a call whose ground set meets a heavier label `p` labels its
/// own interval with a partner of `p`.
pub fn constructive_labeling(stream: &EmissionStream) -> Result<Labeling> {
    let k = stream.k;
    let mut labels: Vec<Vec<Point>> = vec![Vec::new(); k];
    let size = stream.universe.size() as usize;
    let mut marks = MarkState::new(stream.universe.points().collect());
    let mut top_label: Vec<Point> = Vec::new();
    let mut opened = 0usize;
    for top in &stream.top_calls {
        let idx = top.omitted as usize;
        let closed = marks.mark(idx);
        if closed != (top.ell_ext == k) {
            return Err(Error::Precondition("marking replay disagrees with the stream".into()));
        }
        if closed {
            if opened > 0 {
                top_label.push(top.omitted);
            }
            opened += 1;
        }
    }
    if opened > top_label.len() {
        let last = marks
            .unmarked()
            .next()
            .ok_or_else(|| Error::Precondition("no unmarked point for the last interval".into()))?;
        top_label.push(last);
    }
    debug_assert!(size >= 2);
    labels[k - 1] = top_label;

    let mut top_interval = 0usize;
    let mut heavier = Vec::with_capacity(k);
    for (i, top) in stream.top_calls.iter().enumerate() {
        if top.ell_ext == k && i > 0 {
            top_interval += 1;
        }
        heavier.clear();
        heavier.push(labels[k - 1][top_interval]);
        label_call(stream, top.call, &mut heavier, &mut labels)?;
    }
    Ok(Labeling::new(labels))
}

fn label_call(
    stream: &EmissionStream,
    id: usize,
    heavier: &mut Vec<Point>,
    labels: &mut [Vec<Point>],
) -> Result<usize> {
    let call = &stream.calls[id];
    let stuck = || Error::Precondition(format!("call {id} meets no heavier label"));
    let p = *heavier
        .iter()
        .find(|p| call.points.contains(p))
        .ok_or_else(stuck)?;
    if call.ell == 0 {
        return Ok(id + 1);
    }
    let system = build_set_system(&call.points, call.ell)?;
    let q = system.partner(p).ok_or_else(stuck)?;
    labels[call.ell - 1].push(q);
    heavier.push(q);
    let mut next = id + 1;
    while next < stream.calls.len() && stream.calls[next].start < call.end {
        next = label_call(stream, next, heavier, labels)?;
    }
    heavier.pop();
    Ok(next)
}
