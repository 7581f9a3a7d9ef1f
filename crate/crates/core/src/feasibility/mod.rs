//! Feasibility of service patterns and the feasible-label sets
//! `Q_t^ℓ(p^{ℓ+1}, …, p^k)`.
//!
//! The core recursion is [`FeasibilityIndex::fls`]: the set of labels an
//! interval `I` at level `ℓ` can take when the points in `covered` are
//! already served by heavier servers. Level 1 can absorb at most one residual
//! point. A level `ℓ ≥ 2` label `p` works iff every child interval at level
//! `ℓ-1` stays feasible once `p` joins `covered`. Points neither requested
//! inside `I` nor covered are interchangeable, so only the requested points
//! plus one "adds nothing" representative are evaluated; if the
//! representative works every point does and the result is [`LabelSet::All`].
//!
//! Memo entries are keyed by `(level, begin, end, covered ∩ support(I))`.
//! Intervals that can still grow (those ending at `T+1`) live in a scratch
//! table that is dropped on every push or pop.

pub mod oracle;

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{ExtensionTrace, Interval, Level, Point, Universe};

/// A feasible-label set: the whole universe, or an explicit sorted set that is
/// never equal to the universe. An empty explicit set means "infeasible".
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LabelSet {
    All,
    Explicit(Vec<Point>),
}

impl LabelSet {
    /// Builds a set, promoting it to `All` when it covers the universe.
    pub fn canonical(universe: Universe, mut points: Vec<Point>) -> Self {
        points.sort_unstable();
        points.dedup();
        if points.len() == universe.size() as usize {
            LabelSet::All
        } else {
            LabelSet::Explicit(points)
        }
    }

    pub fn empty() -> Self {
        LabelSet::Explicit(Vec::new())
    }

    pub fn is_all(&self) -> bool {
        matches!(self, LabelSet::All)
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, LabelSet::Explicit(v) if v.is_empty())
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            LabelSet::All => true,
            LabelSet::Explicit(v) => v.binary_search(&p).is_ok(),
        }
    }

    /// Cardinality within `universe`.
    pub fn len_in(&self, universe: Universe) -> usize {
        match self {
            LabelSet::All => universe.size() as usize,
            LabelSet::Explicit(v) => v.len(),
        }
    }

    /// The explicit points, or `None` for `All`.
    pub fn explicit(&self) -> Option<&[Point]> {
        match self {
            LabelSet::All => None,
            LabelSet::Explicit(v) => Some(v),
        }
    }

    pub fn to_points(&self, universe: Universe) -> Vec<Point> {
        match self {
            LabelSet::All => universe.points().collect(),
            LabelSet::Explicit(v) => v.clone(),
        }
    }

    pub fn is_subset_of(&self, other: &LabelSet) -> bool {
        match (self, other) {
            (_, LabelSet::All) => true,
            (LabelSet::All, LabelSet::Explicit(_)) => false,
            (LabelSet::Explicit(a), LabelSet::Explicit(_)) => a.iter().all(|&p| other.contains(p)),
        }
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelSet::All => write!(f, "ALL"),
            LabelSet::Explicit(v) => write!(f, "{v:?}"),
        }
    }
}

type MemoKey = (u32, u32, u32, Vec<Point>);

/// A growing instance (pattern plus requests) with memoized label-set queries.
#[derive(Debug, Clone)]
pub struct FeasibilityIndex {
    universe: Universe,
    trace: ExtensionTrace,
    requests: Vec<Point>,
    occurrences: Vec<Vec<u32>>,
    closed: HashMap<MemoKey, LabelSet>,
    open: HashMap<MemoKey, LabelSet>,
    verified_top: usize,
}

impl FeasibilityIndex {
    pub fn new(universe: Universe, k: usize) -> Result<Self> {
        Ok(Self {
            universe,
            trace: ExtensionTrace::new(k)?,
            requests: Vec::new(),
            occurrences: vec![Vec::new(); universe.size() as usize],
            closed: HashMap::new(),
            open: HashMap::new(),
            verified_top: 0,
        })
    }

    pub fn from_parts(universe: Universe, trace: &ExtensionTrace, requests: &[Point]) -> Result<Self> {
        if trace.len() != requests.len() {
            return Err(Error::LengthMismatch {
                trace: trace.len(),
                requests: requests.len(),
            });
        }
        let mut index = Self::new(universe, trace.k())?;
        for (&sigma, &ell) in requests.iter().zip(trace.levels()) {
            index.push(sigma, ell)?;
        }
        Ok(index)
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn trace(&self) -> &ExtensionTrace {
        &self.trace
    }

    pub fn requests(&self) -> &[Point] {
        &self.requests
    }

    pub fn k(&self) -> usize {
        self.trace.k()
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// Appends request `sigma` with the `ell`-extension of the pattern.
    pub fn push(&mut self, sigma: Point, ell: Level) -> Result<()> {
        self.universe.check(sigma)?;
        self.trace.push(ell)?;
        self.requests.push(sigma);
        self.occurrences[sigma as usize].push(self.requests.len() as u32);
        self.open.clear();
        Ok(())
    }

    pub fn pop(&mut self) -> Option<(Point, Level)> {
        let ell = self.trace.pop()?;
        let sigma = self.requests.pop().expect("requests track the trace");
        self.occurrences[sigma as usize].pop();
        self.open.clear();
        let k = self.trace.k();
        let complete = self.trace.interval_count(k).saturating_sub(1);
        self.verified_top = self.verified_top.min(complete);
        Some((sigma, ell))
    }

    /// Distinct points requested inside `iv`, sorted.
    pub fn support(&self, iv: Interval) -> Vec<Point> {
        if iv.len() as usize <= 2 * self.universe.size() as usize {
            let mut pts = iv.slice(&self.requests).to_vec();
            pts.sort_unstable();
            pts.dedup();
            pts
        } else {
            self.universe
                .points()
                .filter(|&p| {
                    let occ = &self.occurrences[p as usize];
                    let i = occ.partition_point(|&t| t < iv.begin);
                    i < occ.len() && occ[i] < iv.end
                })
                .collect()
        }
    }

    /// Labels for the level-`level` interval `iv` under which the sub-pattern
    /// of levels `1..=level` restricted to `iv` serves every request in `iv`
    /// outside `covered ∪ {label}`.
    pub fn fls(&mut self, level: Level, iv: Interval, covered: &[Point]) -> Result<LabelSet> {
        if level == 0 || self.trace.position_of(level, iv).is_none() {
            return Err(Error::NotAnInterval {
                level,
                begin: iv.begin,
                end: iv.end,
            });
        }
        for &p in covered {
            self.universe.check(p)?;
        }
        let mut cov = covered.to_vec();
        cov.sort_unstable();
        cov.dedup();
        Ok(self.fls_inner(level, iv, &cov))
    }

    fn fls_inner(&mut self, level: Level, iv: Interval, covered: &[Point]) -> LabelSet {
        let support = self.support(iv);
        let cov: Vec<Point> = covered
            .iter()
            .copied()
            .filter(|p| support.binary_search(p).is_ok())
            .collect();
        let is_open = iv.end as usize == self.requests.len() + 1;
        let key = (level as u32, iv.begin, iv.end, cov);
        let memo = if is_open { &self.open } else { &self.closed };
        if let Some(hit) = memo.get(&key) {
            return hit.clone();
        }
        let cov = &key.3;
        let residual: Vec<Point> = support
            .iter()
            .copied()
            .filter(|p| cov.binary_search(p).is_err())
            .collect();
        let result = if level == 1 {
            match residual.len() {
                0 => LabelSet::All,
                1 => LabelSet::canonical(self.universe, residual),
                _ => LabelSet::empty(),
            }
        } else {
            let children: Vec<Interval> = self
                .trace
                .child_indices(level, iv)
                .map(|i| self.trace.interval(level - 1, i))
                .collect();
            if self.children_feasible(level - 1, &children, cov) {
                LabelSet::All
            } else {
                let mut labels = Vec::new();
                for &p in &residual {
                    let mut with_p = cov.clone();
                    let at = with_p.partition_point(|&x| x < p);
                    with_p.insert(at, p);
                    if self.children_feasible(level - 1, &children, &with_p) {
                        labels.push(p);
                    }
                }
                LabelSet::canonical(self.universe, labels)
            }
        };
        let memo = if is_open { &mut self.open } else { &mut self.closed };
        memo.insert(key, result.clone());
        result
    }

    fn children_feasible(&mut self, level: Level, children: &[Interval], covered: &[Point]) -> bool {
        children
            .iter()
            .all(|&child| !self.fls_inner(level, child, covered).is_empty())
    }

    fn complete_tops_feasible(&mut self) -> bool {
        let k = self.trace.k();
        let complete = self.trace.interval_count(k).saturating_sub(1);
        while self.verified_top < complete {
            let iv = self.trace.interval(k, self.verified_top);
            if self.fls_inner(k, iv, &[]).is_empty() {
                return false;
            }
            self.verified_top += 1;
        }
        true
    }

    /// Whether some labeling of the whole pattern serves every request.
    pub fn is_feasible(&mut self) -> bool {
        if self.trace.is_empty() {
            return true;
        }
        let k = self.trace.k();
        let last = self.trace.last_interval(k).expect("nonempty trace");
        self.complete_tops_feasible() && !self.fls_inner(k, last, &[]).is_empty()
    }

    /// `Q_T^level(top)` where `top[i]` is the fixed label of `L_T^{level+1+i}`.
    pub fn compute_q(&mut self, level: Level, top: &[Point]) -> Result<LabelSet> {
        let k = self.trace.k();
        if level == 0 || level > k {
            return Err(Error::LevelOutOfRange { level, k });
        }
        if top.len() != k - level {
            return Err(Error::DimensionMismatch {
                expected: k - level,
                actual: top.len(),
            });
        }
        for &p in top {
            self.universe.check(p)?;
        }
        if self.trace.is_empty() {
            return Err(Error::Empty);
        }
        if !self.complete_tops_feasible() {
            return Ok(LabelSet::empty());
        }
        let mut covered: Vec<Point> = Vec::with_capacity(top.len());
        for i in ((level + 1)..=k).rev() {
            let p = top[i - level - 1];
            let at = covered.partition_point(|&x| x < p);
            if covered.get(at) != Some(&p) {
                covered.insert(at, p);
            }
            let parent = self.trace.last_interval(i).expect("nonempty trace");
            let mut children = self.trace.child_indices(i, parent);
            children.end -= 1; // the last child is L^{i-1}, handled next round
            for c in children {
                let child = self.trace.interval(i - 1, c);
                if self.fls_inner(i - 1, child, &covered).is_empty() {
                    return Ok(LabelSet::empty());
                }
            }
        }
        let last = self.trace.last_interval(level).expect("nonempty trace");
        Ok(self.fls_inner(level, last, &covered))
    }

    /// Drops all memoized results.
    pub fn clear_memo(&mut self) {
        self.closed.clear();
        self.open.clear();
    }
}

/// One-shot [`FeasibilityIndex::fls`].
pub fn fls(
    trace: &ExtensionTrace,
    requests: &[Point],
    universe: Universe,
    level: Level,
    iv: Interval,
    covered: &[Point],
) -> Result<LabelSet> {
    FeasibilityIndex::from_parts(universe, trace, requests)?.fls(level, iv, covered)
}

/// Whether `trace` admits a labeling serving `requests`.
pub fn is_feasible(trace: &ExtensionTrace, requests: &[Point], universe: Universe) -> Result<bool> {
    Ok(FeasibilityIndex::from_parts(universe, trace, requests)?.is_feasible())
}

/// `Q_T^level(p^{level+1}, …, p^k)` for the whole instance; `top[i]` labels level `level+1+i`.
pub fn compute_q(
    trace: &ExtensionTrace,
    requests: &[Point],
    universe: Universe,
    level: Level,
    top: &[Point],
) -> Result<LabelSet> {
    FeasibilityIndex::from_parts(universe, trace, requests)?.compute_q(level, top)
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: Point = 0;
    const B: Point = 1;
    const C: Point = 2;

    fn tr(k: usize, ells: &[Level]) -> ExtensionTrace {
        ExtensionTrace::from_levels(k, ells).unwrap()
    }

    fn u(n: u32) -> Universe {
        Universe::new(n).unwrap()
    }

    #[test]
    fn fls_base_cases() {
        let t = tr(1, &[1]);
        let iv = Interval::new(1, 2);
        assert_eq!(fls(&t, &[A], u(3), 1, iv, &[]).unwrap(), LabelSet::Explicit(vec![A]));
        assert_eq!(fls(&t, &[A], u(3), 1, iv, &[A]).unwrap(), LabelSet::All);
        let t = tr(2, &[2, 1]);
        assert_eq!(
            fls(&t, &[A, B], u(3), 2, Interval::new(1, 3), &[]).unwrap(),
            LabelSet::All
        );
    }

    #[test]
    fn fls_rejects_non_intervals() {
        let t = tr(2, &[2, 1]);
        let err = fls(&t, &[A, B], u(3), 2, Interval::new(1, 2), &[]);
        assert!(matches!(err, Err(Error::NotAnInterval { .. })));
        let err = fls(&t, &[A, B], u(3), 0, Interval::new(1, 2), &[]);
        assert!(matches!(err, Err(Error::NotAnInterval { .. })));
    }

    #[test]
    fn feasibility_examples() {
        assert!(!is_feasible(&tr(1, &[1, 0]), &[A, B], u(2)).unwrap());
        assert!(is_feasible(&tr(1, &[1, 1]), &[A, B], u(2)).unwrap());
        assert!(is_feasible(&tr(2, &[2, 0, 0, 0]), &[A, B, A, B], u(3)).unwrap());
        assert!(!is_feasible(&tr(2, &[2, 0, 0]), &[A, B, C], u(3)).unwrap());
        assert!(matches!(
            is_feasible(&tr(1, &[1]), &[A, B], u(2)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn q_examples() {
        assert_eq!(
            compute_q(&tr(1, &[1, 1]), &[A, B], u(2), 1, &[]).unwrap(),
            LabelSet::Explicit(vec![B])
        );
        assert_eq!(compute_q(&tr(2, &[2]), &[A], u(3), 2, &[]).unwrap(), LabelSet::All);
        assert_eq!(
            compute_q(&tr(2, &[2]), &[A], u(3), 1, &[B]).unwrap(),
            LabelSet::Explicit(vec![A])
        );
        assert!(compute_q(&tr(2, &[2]), &[A], u(3), 1, &[]).is_err());
        assert!(compute_q(&tr(2, &[2]), &[A], u(3), 3, &[]).is_err());
    }

    #[test]
    fn explicit_never_equals_universe() {
        // Level-2 child holds {a, b}: either label repairs it, the fresh one does not.
        let q = compute_q(&tr(2, &[2, 0]), &[A, B], u(2), 2, &[]).unwrap();
        assert_eq!(q, LabelSet::All);
        let q = compute_q(&tr(2, &[2, 0]), &[A, B], u(3), 2, &[]).unwrap();
        assert_eq!(q, LabelSet::Explicit(vec![A, B]));
    }

    #[test]
    fn incremental_matches_one_shot() {
        let reqs = [A, B, A, C, A, B];
        let ells = [2, 0, 1, 0, 1, 2];
        let mut index = FeasibilityIndex::new(u(3), 2).unwrap();
        for (i, (&s, &l)) in reqs.iter().zip(&ells).enumerate() {
            index.push(s, l).unwrap();
            let t = tr(2, &ells[..=i]);
            for p in 0..3 {
                assert_eq!(
                    index.compute_q(1, &[p]).unwrap(),
                    compute_q(&t, &reqs[..=i], u(3), 1, &[p]).unwrap()
                );
            }
            assert_eq!(
                index.is_feasible(),
                is_feasible(&t, &reqs[..=i], u(3)).unwrap()
            );
        }
        index.pop();
        index.pop();
        let t = tr(2, &ells[..4]);
        assert_eq!(
            index.compute_q(2, &[]).unwrap(),
            compute_q(&t, &reqs[..4], u(3), 2, &[]).unwrap()
        );
    }

    #[test]
    fn label_set_ops() {
        let a = LabelSet::Explicit(vec![1, 3]);
        assert!(a.is_subset_of(&LabelSet::All));
        assert!(!LabelSet::All.is_subset_of(&a));
        assert!(LabelSet::Explicit(vec![3]).is_subset_of(&a));
        assert_eq!(a.len_in(u(5)), 2);
        assert_eq!(LabelSet::All.len_in(u(5)), 5);
        assert_eq!(LabelSet::canonical(u(2), vec![1, 0, 1]), LabelSet::All);
        assert_eq!(LabelSet::All.to_string(), "ALL");
    }
}
