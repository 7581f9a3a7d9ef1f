//! Random and scripted inputs.

use rand::Rng;
use wks_core::{Error as CoreError, ExtensionTrace, FeasibilityIndex, Level, Point, SpcAlgorithm, Universe};

pub fn random_requests<R: Rng + ?Sized>(rng: &mut R, universe: Universe, len: usize) -> Vec<Point> {
    (0..len).map(|_| rng.gen_range(0..universe.size())).collect()
}

/// An arbitrary pattern and request sequence of length `len`; usually infeasible.
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    universe: Universe,
    len: usize,
) -> (ExtensionTrace, Vec<Point>) {
    let ells: Vec<Level> = (0..len)
        .map(|t| if t == 0 { k } else { rng.gen_range(0..=k) })
        .collect();
    let trace = ExtensionTrace::from_levels(k, &ells).expect("levels in range");
    (trace, random_requests(rng, universe, len))
}

/// Picks a uniform proposal level for each request and raises it to the least
/// level keeping the pattern feasible.
#[derive(Debug, Clone)]
pub struct RandomFeasibleSpc<R> {
    index: FeasibilityIndex,
    rng: R,
}

impl<R: Rng> RandomFeasibleSpc<R> {
    pub fn new(universe: Universe, k: usize, rng: R) -> Result<Self, CoreError> {
        Ok(Self {
            index: FeasibilityIndex::new(universe, k)?,
            rng,
        })
    }

    pub fn trace(&self) -> &ExtensionTrace {
        self.index.trace()
    }
}

impl<R: Rng> SpcAlgorithm for RandomFeasibleSpc<R> {
    fn k(&self) -> usize {
        self.index.k()
    }

    fn step(&mut self, sigma: Point) -> Result<Level, CoreError> {
        let k = self.index.k();
        let start = if self.index.is_empty() { k } else { self.rng.gen_range(0..=k) };
        for ell in start..=k {
            self.index.push(sigma, ell)?;
            if ell == k || self.index.is_feasible() {
                return Ok(ell);
            }
            self.index.pop();
        }
        unreachable!("a full extension is always feasible")
    }

    fn reset(&mut self) {
        let (u, k) = (self.index.universe(), self.index.k());
        self.index = FeasibilityIndex::new(u, k).expect("k was valid");
    }
}

/// A random feasible `(σ_t, ℓ_t)` sequence of length `len`.
pub fn random_feasible_reveals<R: Rng>(
    rng: &mut R,
    k: usize,
    universe: Universe,
    len: usize,
) -> Vec<(Point, Level)> {
    let reqs = random_requests(rng, universe, len);
    let mut spc = RandomFeasibleSpc::new(universe, k, &mut *rng).expect("valid k");
    reqs.into_iter()
        .map(|s| (s, spc.step(s).expect("feasible extension exists")))
        .collect()
}

/// `k = 2`, five points: the heavy label is pinned to point 0 and the light
/// interval at the end sees only requests already covered, so `Q¹ = ALL`.
pub fn pinned_heavy_instance() -> (Universe, Vec<(Point, Level)>) {
    let (a, b, c) = (0, 1, 2);
    (
        Universe::new(5).expect("nonempty"),
        vec![(a, 2), (b, 0), (a, 1), (c, 0), (a, 1), (a, 0)],
    )
}

/// `k = 2`, five points, `(a,b,a,b)` under one heavy interval: `Q² = {a, b}`.
pub fn two_label_instance() -> (Universe, Vec<(Point, Level)>) {
    (
        Universe::new(5).expect("nonempty"),
        vec![(0, 2), (1, 0), (0, 0), (1, 0)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use wks_core::feasibility::is_feasible;

    #[test]
    fn reveals_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = Universe::new(4).unwrap();
        for _ in 0..20 {
            let r = random_feasible_reveals(&mut rng, 3, u, 8);
            let (reqs, ells): (Vec<Point>, Vec<Level>) = r.into_iter().unzip();
            assert_eq!(ells[0], 3);
            let trace = ExtensionTrace::from_levels(3, &ells).unwrap();
            assert!(is_feasible(&trace, &reqs, u).unwrap());
        }
    }

    #[test]
    fn scripted_instances_are_feasible() {
        for (u, script) in [pinned_heavy_instance(), two_label_instance()] {
            let (reqs, ells): (Vec<Point>, Vec<Level>) = script.into_iter().unzip();
            let trace = ExtensionTrace::from_levels(2, &ells).unwrap();
            assert!(is_feasible(&trace, &reqs, u).unwrap());
        }
    }
}
