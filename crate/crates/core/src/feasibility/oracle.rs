//! Brute-force references for the label-set recursion.
//!
//! Neither routine shares code with [`super::FeasibilityIndex`]:
//! [`enumerate_labelings`] tries every assignment of points to intervals, and
//! [`reachable_last_labels`] sweeps time forward over the labels of the
//! intervals covering the current step, which is all a hierarchical pattern
//! lets a labeling carry from one step to the next.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{ExtensionTrace, Labeling, Level, Point, Universe};

use super::LabelSet;

pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

fn check_instance(trace: &ExtensionTrace, requests: &[Point], universe: Universe) -> Result<()> {
    if trace.len() != requests.len() {
        return Err(Error::LengthMismatch {
            trace: trace.len(),
            requests: requests.len(),
        });
    }
    requests.iter().try_for_each(|&p| universe.check(p))
}

fn checked_pow(base: u32, exp: usize) -> Option<u128> {
    (base as u128).checked_pow(u32::try_from(exp).ok()?)
}

/// Calls `visit` with every feasible labeling (labels per level, lightest
/// first). Fails up front when `|U|^{#intervals}` exceeds `budget`.
pub fn for_each_feasible_labeling(
    trace: &ExtensionTrace,
    requests: &[Point],
    universe: Universe,
    budget: u128,
    mut visit: impl FnMut(&[Vec<Point>]),
) -> Result<()> {
    check_instance(trace, requests, universe)?;
    let k = trace.k();
    let n = trace.total_intervals();
    let needed = checked_pow(universe.size(), n).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    // Flattened slot of the interval covering step t at each level.
    let mut offsets = vec![0usize; k + 1];
    for level in 1..=k {
        offsets[level] = offsets[level - 1] + trace.interval_count(level);
    }
    let cover: Vec<Vec<usize>> = (1..=requests.len() as u32)
        .map(|t| {
            (1..=k)
                .map(|l| offsets[l - 1] + trace.index_containing(l, t).expect("t in range"))
                .collect()
        })
        .collect();
    let size = universe.size();
    let mut flat = vec![0 as Point; n];
    let mut nested: Vec<Vec<Point>> = (1..=k).map(|l| vec![0; trace.interval_count(l)]).collect();
    loop {
        let feasible = requests
            .iter()
            .zip(&cover)
            .all(|(&sigma, slots)| slots.iter().any(|&s| flat[s] == sigma));
        if feasible {
            for level in 1..=k {
                nested[level - 1].copy_from_slice(&flat[offsets[level - 1]..offsets[level]]);
            }
            visit(&nested);
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == n {
                return Ok(());
            }
            flat[i] += 1;
            if flat[i] < size {
                break;
            }
            flat[i] = 0;
            i += 1;
        }
    }
}

/// Every feasible labeling of `trace` with respect to `requests`.
pub fn enumerate_labelings(
    trace: &ExtensionTrace,
    requests: &[Point],
    universe: Universe,
) -> Result<Vec<Labeling>> {
    enumerate_labelings_with_budget(trace, requests, universe, DEFAULT_ENUMERATION_BUDGET)
}

pub fn enumerate_labelings_with_budget(
    trace: &ExtensionTrace,
    requests: &[Point],
    universe: Universe,
    budget: u128,
) -> Result<Vec<Labeling>> {
    let mut out = Vec::new();
    for_each_feasible_labeling(trace, requests, universe, budget, |labels| {
        out.push(Labeling::new(labels.to_vec()))
    })?;
    Ok(out)
}

/// Distinct last-interval label tuples (index 0 = level 1) among the
/// enumerated feasible labelings.
pub fn last_labels_by_enumeration(
    trace: &ExtensionTrace,
    requests: &[Point],
    universe: Universe,
    budget: u128,
) -> Result<BTreeSet<Vec<Point>>> {
    let mut tuples = BTreeSet::new();
    for_each_feasible_labeling(trace, requests, universe, budget, |labels| {
        tuples.insert(labels.iter().map(|l| *l.last().expect("nonempty level")).collect());
    })?;
    Ok(tuples)
}

/// Last-interval label tuples (index 0 = level 1) that extend to a feasible
/// labeling, found by a forward sweep over per-step label configurations.
pub fn reachable_last_labels(
    trace: &ExtensionTrace,
    requests: &[Point],
    universe: Universe,
    budget: u128,
) -> Result<BTreeSet<Vec<Point>>> {
    check_instance(trace, requests, universe)?;
    let k = trace.k();
    let states = checked_pow(universe.size(), k).unwrap_or(u128::MAX);
    let needed = states.saturating_mul(states).saturating_mul(requests.len() as u128);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut current: BTreeSet<Vec<Point>> = BTreeSet::new();
    if requests.is_empty() {
        return Ok(current);
    }
    current.insert(vec![0; k]);
    for (&sigma, &ell) in requests.iter().zip(trace.levels()) {
        let mut next = BTreeSet::new();
        for state in &current {
            for_each_relabel(state, ell, universe.size(), |candidate| {
                if candidate.contains(&sigma) {
                    next.insert(candidate.to_vec());
                }
            });
        }
        current = next;
    }
    Ok(current)
}

fn for_each_relabel(state: &[Point], ell: Level, size: u32, mut f: impl FnMut(&[Point])) {
    let mut cand = state.to_vec();
    cand[..ell].iter_mut().for_each(|x| *x = 0);
    loop {
        f(&cand);
        let mut i = 0;
        loop {
            if i == ell {
                return;
            }
            cand[i] += 1;
            if cand[i] < size {
                break;
            }
            cand[i] = 0;
            i += 1;
        }
    }
}

/// `Q^level(top)` read off a set of feasible last-label tuples; `top[i]`
/// fixes the label of level `level+1+i`.
pub fn q_from_tuples(
    tuples: &BTreeSet<Vec<Point>>,
    universe: Universe,
    level: Level,
    top: &[Point],
) -> LabelSet {
    let labels = tuples
        .iter()
        .filter(|tuple| tuple[level..] == *top)
        .map(|tuple| tuple[level - 1])
        .collect();
    LabelSet::canonical(universe, labels)
}
