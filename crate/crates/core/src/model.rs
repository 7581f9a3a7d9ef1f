//! Universe, weights, request sequences and hierarchical service patterns.
//!
//! Time is 1-based: request `t` occupies the half-open slot `[t, t+1)`.
//! A hierarchical service pattern is stored only as its extension trace
//! `ℓ_1, …, ℓ_T`; interval partitions are derived from it. Level 1 is the
//! lightest server, level `k` the heaviest.

use std::fmt;
use std::ops::{Deref, Range};

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

/// Index of a point of the uniform metric space.
pub type Point = u32;

/// Server level, `1..=k` (0 is only meaningful as an extension level).
pub type Level = usize;

/// The finite point set `{0, …, size-1}`. All distinct points are at distance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Universe {
    size: u32,
}

impl Universe {
    pub fn new(size: u32) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyUniverse);
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn contains(&self, p: Point) -> bool {
        p < self.size
    }

    pub fn points(&self) -> Range<Point> {
        0..self.size
    }

    pub fn check(&self, p: Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::PointOutOfRange {
                point: p,
                size: self.size,
            })
        }
    }
}

/// Server weights `w_1 ≤ … ≤ w_k`, exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weights(Vec<BigRational>);

impl Weights {
    pub fn new(w: Vec<BigRational>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|x| !x.is_positive()) || w.windows(2).any(|p| p[0] > p[1]) {
            return Err(Error::InvalidWeights);
        }
        Ok(Self(w))
    }

    pub fn from_integers(w: &[u64]) -> Result<Self> {
        Self::new(w.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
    }

    /// The lower-bound weights `1, β, …, β^{k-1}`.
    pub fn geometric(k: usize, beta: u64) -> Result<Self> {
        if k == 0 || beta == 0 {
            return Err(Error::InvalidWeights);
        }
        let beta = BigInt::from(beta);
        let mut w = Vec::with_capacity(k);
        let mut cur = BigInt::one();
        for _ in 0..k {
            w.push(BigRational::from_integer(cur.clone()));
            cur *= &beta;
        }
        Self::new(w)
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// Weight of server `level` (1-based).
    pub fn get(&self, level: Level) -> &BigRational {
        &self.0[level - 1]
    }

    pub fn as_slice(&self) -> &[BigRational] {
        &self.0
    }

    pub fn total(&self) -> BigRational {
        self.0.iter().fold(BigRational::zero(), |acc, w| acc + w)
    }

    /// Weights rescaled to integers by the least common denominator.
    /// Returns the integer weights and the common denominator.
    pub fn to_integer_scale(&self) -> Result<(Vec<u128>, BigInt)> {
        let denom = self
            .0
            .iter()
            .fold(BigInt::one(), |acc, w| num::integer::lcm(acc, w.denom().clone()));
        let scaled = self
            .0
            .iter()
            .map(|w| {
                let v = (w * BigRational::from_integer(denom.clone())).to_integer();
                u128::try_from(v).map_err(|_| Error::Overflow("integer weight scaling"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((scaled, denom))
    }
}

/// Requests `σ_1, …, σ_T`, each a point of the universe.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RequestSequence(Vec<Point>);

impl RequestSequence {
    pub fn new(universe: Universe, sigma: Vec<Point>) -> Result<Self> {
        for &p in &sigma {
            universe.check(p)?;
        }
        Ok(Self(sigma))
    }

    pub fn into_inner(self) -> Vec<Point> {
        self.0
    }
}

impl Deref for RequestSequence {
    type Target = [Point];
    fn deref(&self) -> &[Point] {
        &self.0
    }
}

/// Half-open time interval `[begin, end)` with integer endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub begin: u32,
    pub end: u32,
}

impl Interval {
    pub fn new(begin: u32, end: u32) -> Self {
        debug_assert!(begin < end);
        Self { begin, end }
    }

    pub fn len(&self) -> u32 {
        self.end - self.begin
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.begin
    }

    pub fn contains(&self, t: u32) -> bool {
        self.begin <= t && t < self.end
    }

    /// Requests falling inside the interval.
    pub fn slice<'a>(&self, requests: &'a [Point]) -> &'a [Point] {
        &requests[(self.begin - 1) as usize..(self.end - 1) as usize]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.begin, self.end)
    }
}

/// A hierarchical service pattern encoded by its extension levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionTrace {
    k: usize,
    ells: Vec<Level>,
    // starts[l - 1] lists the begin times of the level-l intervals.
    starts: Vec<Vec<u32>>,
}

impl ExtensionTrace {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::LevelOutOfRange { level: 0, k });
        }
        Ok(Self {
            k,
            ells: Vec::new(),
            starts: vec![Vec::new(); k],
        })
    }

    pub fn from_levels(k: usize, ells: &[Level]) -> Result<Self> {
        let mut trace = Self::new(k)?;
        for &ell in ells {
            trace.push(ell)?;
        }
        Ok(trace)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of steps `T`; the pattern covers `[1, T+1)`.
    pub fn len(&self) -> usize {
        self.ells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ells.is_empty()
    }

    pub fn levels(&self) -> &[Level] {
        &self.ells
    }

    /// Applies the `ell`-extension in place: levels `≤ ell` open `[t, t+1)`,
    /// heavier levels stretch their last interval over it.
    pub fn push(&mut self, ell: Level) -> Result<()> {
        if ell > self.k {
            return Err(Error::LevelOutOfRange { level: ell, k: self.k });
        }
        if self.ells.is_empty() && ell != self.k {
            return Err(Error::FirstStepNotFull { level: ell, k: self.k });
        }
        let t = self.ells.len() as u32 + 1;
        for level in 1..=ell {
            self.starts[level - 1].push(t);
        }
        self.ells.push(ell);
        Ok(())
    }

    /// Undoes the most recent extension.
    pub fn pop(&mut self) -> Option<Level> {
        let ell = self.ells.pop()?;
        for level in 1..=ell {
            self.starts[level - 1].pop();
        }
        Some(ell)
    }

    /// The `ell`-extension of this pattern.
    pub fn extend(&self, ell: Level) -> Result<Self> {
        let mut next = self.clone();
        next.push(ell)?;
        Ok(next)
    }

    /// The pattern restricted to `[1, t+1)`.
    pub fn prefix(&self, t: usize) -> Self {
        let mut trace = self.clone();
        while trace.len() > t {
            trace.pop();
        }
        trace
    }

    fn check_level(&self, level: Level) {
        assert!(
            (1..=self.k).contains(&level),
            "level {level} out of range 1..={}",
            self.k
        );
    }

    pub fn interval_count(&self, level: Level) -> usize {
        self.check_level(level);
        self.starts[level - 1].len()
    }

    pub fn interval(&self, level: Level, idx: usize) -> Interval {
        let starts = &self.starts[level - 1];
        let end = starts
            .get(idx + 1)
            .copied()
            .unwrap_or(self.ells.len() as u32 + 1);
        Interval::new(starts[idx], end)
    }

    /// `L_T^level`, the interval covering the latest step.
    pub fn last_interval(&self, level: Level) -> Option<Interval> {
        self.check_level(level);
        let n = self.starts[level - 1].len();
        (n > 0).then(|| self.interval(level, n - 1))
    }

    pub fn intervals_at(&self, level: Level) -> impl Iterator<Item = Interval> + '_ {
        self.check_level(level);
        (0..self.starts[level - 1].len()).map(move |i| self.interval(level, i))
    }

    /// Index of the level interval covering step `t`.
    pub fn index_containing(&self, level: Level, t: u32) -> Option<usize> {
        self.check_level(level);
        if t == 0 || t as usize > self.ells.len() {
            return None;
        }
        let starts = &self.starts[level - 1];
        Some(starts.partition_point(|&b| b <= t) - 1)
    }

    /// Index of `iv` among the intervals of `level`, if it is one of them.
    pub fn position_of(&self, level: Level, iv: Interval) -> Option<usize> {
        if level == 0 || level > self.k {
            return None;
        }
        let idx = self.starts[level - 1].binary_search(&iv.begin).ok()?;
        (self.interval(level, idx) == iv).then_some(idx)
    }

    /// Indices of the level `level-1` intervals nested inside `iv` (a level `level` interval).
    pub fn child_indices(&self, level: Level, iv: Interval) -> Range<usize> {
        debug_assert!(level >= 2);
        let starts = &self.starts[level - 2];
        let lo = starts.partition_point(|&b| b < iv.begin);
        let hi = starts.partition_point(|&b| b < iv.end);
        lo..hi
    }

    pub fn intervals(&self) -> IntervalSet {
        IntervalSet {
            levels: (1..=self.k).map(|l| self.intervals_at(l).collect()).collect(),
        }
    }

    pub fn total_intervals(&self) -> usize {
        self.starts.iter().map(Vec::len).sum()
    }
}

/// Per-level partitions `ℐ^1, …, ℐ^k` of `[1, T+1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalSet {
    levels: Vec<Vec<Interval>>,
}

impl IntervalSet {
    pub fn from_levels(levels: Vec<Vec<Interval>>) -> Self {
        Self { levels }
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, level: Level) -> &[Interval] {
        &self.levels[level - 1]
    }

    pub fn last(&self, level: Level) -> Option<Interval> {
        self.levels[level - 1].last().copied()
    }

    pub fn count(&self, level: Level) -> usize {
        self.levels[level - 1].len()
    }

    /// True iff every level partitions `[1, end)` into nonempty intervals and
    /// each level refines the next heavier one.
    pub fn is_hierarchical(&self) -> bool {
        let end = match self.levels.first().and_then(|l| l.last()) {
            Some(iv) => iv.end,
            None => return self.levels.iter().all(Vec::is_empty),
        };
        let partitions = self.levels.iter().all(|ivs| {
            !ivs.is_empty()
                && ivs[0].begin == 1
                && ivs.last().map(|iv| iv.end) == Some(end)
                && ivs.iter().all(|iv| !iv.is_empty())
                && ivs.windows(2).all(|w| w[0].end == w[1].begin)
        });
        partitions
            && self.levels.windows(2).all(|pair| {
                pair[1]
                    .iter()
                    .all(|coarse| pair[0].iter().any(|fine| fine.begin == coarse.begin))
            })
    }
}

/// Assignment of a point to every interval of a pattern, stored per level in
/// interval order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Labeling {
    labels: Vec<Vec<Point>>,
}

impl Labeling {
    pub fn new(labels: Vec<Vec<Point>>) -> Self {
        Self { labels }
    }

    pub fn label(&self, level: Level, idx: usize) -> Point {
        self.labels[level - 1][idx]
    }

    pub fn level(&self, level: Level) -> &[Point] {
        &self.labels[level - 1]
    }

    /// Labels of the last interval at each level, lightest first.
    pub fn last_labels(&self) -> Vec<Point> {
        self.labels.iter().map(|l| *l.last().expect("labeled level")).collect()
    }

    /// Whether the labeling is total on `trace` and serves every request.
    pub fn serves(&self, trace: &ExtensionTrace, requests: &[Point]) -> bool {
        if self.labels.len() != trace.k()
            || trace.len() != requests.len()
            || (1..=trace.k()).any(|l| self.labels[l - 1].len() != trace.interval_count(l))
        {
            return false;
        }
        requests.iter().enumerate().all(|(i, &sigma)| {
            let t = i as u32 + 1;
            (1..=trace.k()).any(|l| {
                let idx = trace.index_containing(l, t).expect("t within trace");
                self.labels[l - 1][idx] == sigma
            })
        })
    }
}

/// Movement counters for one server level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LevelCounters {
    /// `|ℐ_T^ℓ|` of the revealed pattern.
    pub interval_count: u64,
    /// `X^ℓ`
    pub forced_resamples: u64,
    /// `Y^ℓ`
    pub unforced_resamples: u64,
    pub relocations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostReport {
    /// Index 0 is level 1.
    pub levels: Vec<LevelCounters>,
    pub weighted_cost: BigRational,
}

impl CostReport {
    pub fn level(&self, level: Level) -> &LevelCounters {
        &self.levels[level - 1]
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    /// Checks `X^ℓ ≤ X^{ℓ+1} + Y^{ℓ+1} + |ℐ^ℓ|` for `ℓ < k` and `X^k ≤ |ℐ^k|`.
    /// Returns the first violating level.
    pub fn check_counting_bounds(&self) -> std::result::Result<(), Level> {
        let k = self.k();
        for level in 1..=k {
            let c = self.level(level);
            let bound = if level == k {
                c.interval_count
            } else {
                let up = self.level(level + 1);
                up.forced_resamples + up.unforced_resamples + c.interval_count
            };
            if c.forced_resamples > bound {
                return Err(level);
            }
        }
        Ok(())
    }
}

/// `Σ_ℓ w_ℓ · |ℐ_T^ℓ|`.
pub fn pattern_cost(trace: &ExtensionTrace, weights: &Weights) -> Result<BigRational> {
    if weights.k() != trace.k() {
        return Err(Error::DimensionMismatch {
            expected: trace.k(),
            actual: weights.k(),
        });
    }
    Ok((1..=trace.k()).fold(BigRational::zero(), |acc, l| {
        acc + weights.get(l) * BigRational::from_integer(BigInt::from(trace.interval_count(l)))
    }))
}

/// Turns per-step sets of moved servers into an extension trace: at each step
/// every server lighter than the heaviest mover is made to move too. The
/// first step always moves everything.
pub fn hierarchify(move_sets: &[Vec<usize>], k: usize) -> Result<ExtensionTrace> {
    let mut trace = ExtensionTrace::new(k)?;
    for (i, moved) in move_sets.iter().enumerate() {
        if let Some(&bad) = moved.iter().find(|&&s| s == 0 || s > k) {
            return Err(Error::LevelOutOfRange { level: bad, k });
        }
        let ell = if i == 0 {
            k
        } else {
            moved.iter().copied().max().unwrap_or(0)
        };
        trace.push(ell)?;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(b: u32, e: u32) -> Interval {
        Interval::new(b, e)
    }

    #[test]
    fn extension_merge_and_fresh_cases() {
        let t = ExtensionTrace::from_levels(2, &[2]).unwrap();
        let merged = t.extend(0).unwrap().intervals();
        assert_eq!(merged.level(1), &[iv(1, 3)]);
        assert_eq!(merged.level(2), &[iv(1, 3)]);
        let fresh = t.extend(2).unwrap().intervals();
        assert_eq!(fresh.level(1), &[iv(1, 2), iv(2, 3)]);
        assert_eq!(fresh.level(2), &[iv(1, 2), iv(2, 3)]);
        let mixed = ExtensionTrace::from_levels(3, &[3, 1]).unwrap().intervals();
        assert_eq!(mixed.level(1), &[iv(1, 2), iv(2, 3)]);
        assert_eq!(mixed.level(2), &[iv(1, 3)]);
        assert_eq!(mixed.level(3), &[iv(1, 3)]);
    }

    #[test]
    fn extension_errors() {
        let empty = ExtensionTrace::new(2).unwrap();
        assert_eq!(
            empty.extend(1),
            Err(Error::FirstStepNotFull { level: 1, k: 2 })
        );
        let t = empty.extend(2).unwrap();
        assert_eq!(t.extend(3), Err(Error::LevelOutOfRange { level: 3, k: 2 }));
    }

    #[test]
    fn interval_reconstruction() {
        let a = ExtensionTrace::from_levels(2, &[2, 0, 1]).unwrap().intervals();
        assert_eq!(a.level(1), &[iv(1, 3), iv(3, 4)]);
        assert_eq!(a.level(2), &[iv(1, 4)]);
        let b = ExtensionTrace::from_levels(1, &[1, 1, 1]).unwrap().intervals();
        assert_eq!(b.level(1), &[iv(1, 2), iv(2, 3), iv(3, 4)]);
        let c = ExtensionTrace::from_levels(3, &[3]).unwrap().intervals();
        for l in 1..=3 {
            assert_eq!(c.level(l), &[iv(1, 2)]);
        }
    }

    #[test]
    fn pattern_costs() {
        let t = ExtensionTrace::from_levels(2, &[2, 0, 1]).unwrap();
        let w = Weights::from_integers(&[1, 4]).unwrap();
        assert_eq!(pattern_cost(&t, &w).unwrap(), BigRational::from_integer(6.into()));
        let t = ExtensionTrace::from_levels(1, &[1, 1, 1]).unwrap();
        let w = Weights::from_integers(&[5]).unwrap();
        assert_eq!(pattern_cost(&t, &w).unwrap(), BigRational::from_integer(15.into()));
        let t = ExtensionTrace::from_levels(3, &[3, 0, 0, 0]).unwrap();
        let w = Weights::from_integers(&[2, 3, 7]).unwrap();
        assert_eq!(pattern_cost(&t, &w).unwrap(), w.total());
        assert!(pattern_cost(&t, &Weights::from_integers(&[1]).unwrap()).is_err());
    }

    #[test]
    fn hierarchify_examples() {
        let t = hierarchify(&[vec![1, 2], vec![], vec![1]], 2).unwrap();
        assert_eq!(t.levels(), &[2, 0, 1]);
        assert_eq!(hierarchify(&[vec![2]], 2).unwrap().levels(), &[2]);
        assert_eq!(hierarchify(&[vec![1, 3], vec![2]], 3).unwrap().levels(), &[3, 2]);
        assert!(hierarchify(&[vec![1], vec![4]], 3).is_err());
    }

    #[test]
    fn weights_validation() {
        assert!(Weights::from_integers(&[]).is_err());
        assert!(Weights::from_integers(&[3, 1]).is_err());
        assert!(Weights::from_integers(&[0, 1]).is_err());
        let g = Weights::geometric(3, 10).unwrap();
        assert_eq!(g, Weights::from_integers(&[1, 10, 100]).unwrap());
        let half = BigRational::new(1.into(), 2.into());
        let w = Weights::new(vec![half, BigRational::from_integer(3.into())]).unwrap();
        assert_eq!(w.to_integer_scale().unwrap(), (vec![1, 6], BigInt::from(2)));
    }

    #[test]
    fn labeling_serves() {
        let t = ExtensionTrace::from_levels(2, &[2, 0, 0, 0]).unwrap();
        let good = Labeling::new(vec![vec![1], vec![0]]);
        let bad = Labeling::new(vec![vec![2], vec![0]]);
        assert!(good.serves(&t, &[0, 1, 0, 1]));
        assert!(!bad.serves(&t, &[0, 1, 0, 1]));
    }

    #[test]
    fn navigation() {
        let t = ExtensionTrace::from_levels(2, &[2, 1, 0, 2, 1]).unwrap();
        assert_eq!(t.last_interval(2), Some(iv(4, 6)));
        assert_eq!(t.last_interval(1), Some(iv(5, 6)));
        assert_eq!(t.index_containing(1, 3), Some(1));
        assert_eq!(t.child_indices(2, iv(1, 4)), 0..2);
        assert_eq!(t.position_of(1, iv(2, 4)), Some(1));
        assert_eq!(t.position_of(1, iv(2, 5)), None);
        let mut p = t.clone();
        assert_eq!(p.pop(), Some(1));
        assert_eq!(p, t.prefix(4));
    }
}
