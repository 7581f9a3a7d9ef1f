//! Set systems over `n_ℓ` points with `⌈n_{ℓ-1}/2⌉ + 1` sets of size
//! `n_{ℓ-1}`, such that every point is omitted by some set and every point
//! `p` has a partner `q` with each set containing `p` or `q`.
//!
//! Construction: lay the points out on an `a × b` grid with
//! `a = ⌈n_{ℓ-1}/2⌉ + 1`, `b = ⌊n_{ℓ-1}/2⌋ + 1` (so `ab = n_ℓ` and
//! `a + b - 2 = n_{ℓ-1}`), pick one designated point `d_j` per row, and let set
//! `i` be row `i` plus the designated points of every row except `i` and its
//! cyclic successor. A non-designated point of row `i` is partnered with
//! `d_{i+1}`; `d_i` is partnered with any point of row `i-1`.

use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::model::Point;
use crate::sequences::{branching, n_value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSystem {
    pub level: usize,
    pub ground: Vec<Point>,
    /// Sorted sets, in canonical (sorted) order.
    pub sets: Vec<Vec<Point>>,
}

impl SetSystem {
    /// A point `q` such that every set contains `p` or `q`.
    pub fn partner(&self, p: Point) -> Option<Point> {
        partner_in(&self.ground, &self.sets, p)
    }
}

fn partner_in(ground: &[Point], sets: &[Vec<Point>], p: Point) -> Option<Point> {
    ground.iter().copied().find(|&q| {
        sets.iter()
            .all(|s| s.binary_search(&p).is_ok() || s.binary_search(&q).is_ok())
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    GroundSize { expected: u64, actual: usize },
    SetCount { expected: u64, actual: usize },
    SetSize { index: usize, expected: u64, actual: usize },
    NotSubset { index: usize },
    NoOmittingSet { point: Point },
    NoPartner { point: Point },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::GroundSize { expected, actual } => {
                write!(f, "ground set has {actual} points, expected {expected}")
            }
            Violation::SetCount { expected, actual } => {
                write!(f, "family has {actual} sets, expected {expected}")
            }
            Violation::SetSize {
                index,
                expected,
                actual,
            } => write!(f, "set {index} has {actual} points, expected {expected}"),
            Violation::NotSubset { index } => write!(f, "set {index} leaves the ground set"),
            Violation::NoOmittingSet { point } => write!(f, "every set contains point {point}"),
            Violation::NoPartner { point } => write!(f, "point {point} has no covering partner"),
        }
    }
}

/// Every way `family` fails the three set-system properties at level `ell`.
pub fn verify_set_system(ground: &[Point], family: &[Vec<Point>], ell: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    let (n, n_prev, count) = match (n_value(ell), ell.checked_sub(1).and_then(n_value)) {
        (Some(n), Some(p)) => (n, p, branching(ell)),
        _ => {
            out.push(Violation::GroundSize {
                expected: 0,
                actual: ground.len(),
            });
            return out;
        }
    };
    let mut sorted_ground = ground.to_vec();
    sorted_ground.sort_unstable();
    sorted_ground.dedup();
    if sorted_ground.len() as u64 != n || ground.len() as u64 != n {
        out.push(Violation::GroundSize {
            expected: n,
            actual: sorted_ground.len(),
        });
    }
    if family.len() as u64 != count {
        out.push(Violation::SetCount {
            expected: count,
            actual: family.len(),
        });
    }
    let sets: Vec<Vec<Point>> = family
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    for (index, (set, raw)) in sets.iter().zip(family).enumerate() {
        if set.len() as u64 != n_prev || raw.len() != set.len() {
            out.push(Violation::SetSize {
                index,
                expected: n_prev,
                actual: set.len(),
            });
        }
        if set.iter().any(|p| sorted_ground.binary_search(p).is_err()) {
            out.push(Violation::NotSubset { index });
        }
    }
    for &p in &sorted_ground {
        if sets.iter().all(|s| s.binary_search(&p).is_ok()) {
            out.push(Violation::NoOmittingSet { point: p });
        }
    }
    for &p in &sorted_ground {
        if partner_in(&sorted_ground, &sets, p).is_none() {
            out.push(Violation::NoPartner { point: p });
        }
    }
    out
}

fn grid_family(ground: &[Point], ell: usize) -> Vec<Vec<Point>> {
    let n_prev = n_value(ell - 1).expect("small level") as usize;
    let a = n_prev.div_ceil(2) + 1;
    let b = n_prev / 2 + 1;
    let at = |row: usize, col: usize| ground[row * b + col];
    let designated = |row: usize| at(row, row % b);
    (0..a)
        .map(|i| {
            let succ = (i + 1) % a;
            let mut set: Vec<Point> = (0..b).map(|c| at(i, c)).collect();
            set.extend((0..a).filter(|&j| j != i && j != succ).map(designated));
            set.sort_unstable();
            set
        })
        .collect()
}

fn exhaustive_family(ground: &[Point], ell: usize) -> Option<Vec<Vec<Point>>> {
    let n_prev = n_value(ell - 1)? as usize;
    let count = branching(ell) as usize;
    let candidates: Vec<Vec<Point>> = ground.iter().copied().combinations(n_prev).collect();
    let mut pick = vec![0usize; count];
    loop {
        if pick.windows(2).all(|w| w[0] <= w[1]) {
            let family: Vec<Vec<Point>> = pick.iter().map(|&i| candidates[i].clone()).collect();
            if verify_set_system(ground, &family, ell).is_empty() {
                return Some(family);
            }
        }
        let mut i = 0;
        loop {
            if i == count {
                return None;
            }
            pick[i] += 1;
            if pick[i] < candidates.len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

/// Builds and verifies the level-`ell` set system on `ground` (`|ground| = n_ℓ`).
pub fn build_set_system(ground: &[Point], ell: usize) -> Result<SetSystem> {
    if ell == 0 {
        return Err(Error::Precondition("set systems start at level 1".into()));
    }
    let n = n_value(ell).ok_or(Error::Overflow("n_ell"))?;
    if ground.len() as u64 != n {
        return Err(Error::DimensionMismatch {
            expected: n as usize,
            actual: ground.len(),
        });
    }
    let mut sets = grid_family(ground, ell);
    if !verify_set_system(ground, &sets, ell).is_empty() {
        sets = match ell {
            1 | 2 => exhaustive_family(ground, ell).ok_or_else(|| {
                Error::Precondition(format!("no valid level-{ell} set system found"))
            })?,
            _ => {
                return Err(Error::Precondition(format!(
                    "level-{ell} set system failed verification"
                )))
            }
        };
    }
    sets.sort();
    let mut sorted_ground = ground.to_vec();
    sorted_ground.sort_unstable();
    Ok(SetSystem {
        level: ell,
        ground: sorted_ground,
        sets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ground(n: u32) -> Vec<Point> {
        (0..n).collect()
    }

    #[test]
    fn level_one_and_two() {
        let s1 = build_set_system(&ground(2), 1).unwrap();
        assert_eq!(s1.sets, vec![vec![0], vec![1]]);
        let s2 = build_set_system(&ground(4), 2).unwrap();
        assert_eq!(s2.sets.len(), 2);
        assert!(s2.sets.iter().all(|s| s.len() == 2));
        let mut union: Vec<Point> = s2.sets.concat();
        union.sort_unstable();
        assert_eq!(union, ground(4));
    }

    #[test]
    fn levels_three_and_four_verify() {
        for ell in 1..=4 {
            let n = n_value(ell).unwrap() as u32;
            let s = build_set_system(&ground(n), ell).unwrap();
            assert!(verify_set_system(&s.ground, &s.sets, ell).is_empty());
        }
        let s4 = build_set_system(&ground(30), 4).unwrap();
        assert_eq!(s4.sets.len(), 6);
        assert!(s4.sets.iter().all(|s| s.len() == 9));
    }

    #[test]
    fn arbitrary_ground_points() {
        let g = vec![7, 3, 11, 5];
        let s = build_set_system(&g, 2).unwrap();
        assert!(verify_set_system(&g, &s.sets, 2).is_empty());
        for &p in &g {
            assert!(s.partner(p).is_some());
        }
    }

    #[test]
    fn violations_are_reported() {
        // One set equal to P omits nothing.
        let bad = vec![vec![0, 1], vec![0, 1]];
        let v = verify_set_system(&ground(2), &bad, 1);
        assert!(v.contains(&Violation::NoOmittingSet { point: 0 }));
        assert!(v.iter().any(|x| matches!(x, Violation::SetSize { .. })));
        let v = verify_set_system(&ground(4), &[vec![0, 1], vec![0, 2]], 2);
        assert!(v.contains(&Violation::NoOmittingSet { point: 0 }));
        let v = verify_set_system(
            &ground(9),
            &[vec![0, 1, 2, 3], vec![4, 5, 6, 7], vec![0, 1, 2, 3]],
            3,
        );
        assert!(v.contains(&Violation::NoPartner { point: 8 }));
        assert!(build_set_system(&ground(3), 2).is_err());
    }

    #[test]
    fn exhaustive_search_finds_small_systems() {
        for ell in 1..=2 {
            let n = n_value(ell).unwrap() as u32;
            let fam = exhaustive_family(&ground(n), ell).unwrap();
            assert!(verify_set_system(&ground(n), &fam, ell).is_empty());
        }
    }
}
