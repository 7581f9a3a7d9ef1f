//! Exact offline optima on uniform metrics by dynamic programming over
//! server configurations.
//!
//! Both programs charge every server's first placement: the first request
//! moves all servers. Costs are computed on integer-rescaled weights and
//! converted back to exact rationals.

use num::{BigInt, BigRational};

use crate::error::{Error, Result};
use crate::model::{ExtensionTrace, Labeling, Level, Point, Universe, Weights};

pub const DEFAULT_TRANSITION_BUDGET: u128 = 100_000_000;

const INF: u128 = u128::MAX;

struct Encoding {
    size: usize,
    k: usize,
    states: usize,
}

impl Encoding {
    fn new(universe: Universe, k: usize, horizon: usize, budget: u128) -> Result<Self> {
        let size = universe.size() as usize;
        let states = (size as u128)
            .checked_pow(k as u32)
            .filter(|&s| s <= usize::MAX as u128)
            .ok_or(Error::BudgetExceeded {
                needed: u128::MAX,
                budget,
            })?;
        let needed = states.saturating_mul(horizon as u128);
        if needed > budget {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        Ok(Self {
            size,
            k,
            states: states as usize,
        })
    }

    fn stride(&self, server: usize) -> usize {
        self.size.pow(server as u32)
    }

    fn digit(&self, state: usize, server: usize) -> Point {
        ((state / self.stride(server)) % self.size) as Point
    }

    fn contains(&self, state: usize, p: Point) -> bool {
        (0..self.k).any(|i| self.digit(state, i) == p)
    }

    fn decode(&self, state: usize) -> Vec<Point> {
        (0..self.k).map(|i| self.digit(state, i)).collect()
    }
}

fn validate(requests: &[Point], weights: &Weights, universe: Universe) -> Result<()> {
    requests.iter().try_for_each(|&p| universe.check(p))?;
    if weights.k() == 0 {
        return Err(Error::InvalidWeights);
    }
    Ok(())
}

fn to_rational(value: u128, denom: &BigInt) -> BigRational {
    BigRational::new(BigInt::from(value), denom.clone())
}

/// Minimum total weighted movement serving `requests` with servers of the
/// given weights.
pub fn opt_cost(requests: &[Point], weights: &Weights, universe: Universe) -> Result<BigRational> {
    opt_cost_with_budget(requests, weights, universe, DEFAULT_TRANSITION_BUDGET)
}

pub fn opt_cost_with_budget(
    requests: &[Point],
    weights: &Weights,
    universe: Universe,
    budget: u128,
) -> Result<BigRational> {
    validate(requests, weights, universe)?;
    let (w, denom) = weights.to_integer_scale()?;
    if requests.is_empty() {
        return Ok(to_rational(0, &denom));
    }
    let enc = Encoding::new(universe, weights.k(), requests.len(), budget)?;
    let total: u128 = w.iter().try_fold(0u128, |a, &x| a.checked_add(x)).ok_or(Error::Overflow("weights"))?;
    let mut dp: Vec<u128> = (0..enc.states)
        .map(|s| if enc.contains(s, requests[0]) { total } else { INF })
        .collect();
    let mut scratch = vec![INF; enc.states];
    for &sigma in &requests[1..] {
        for (server, &weight) in w.iter().enumerate() {
            let stride = enc.stride(server);
            for (s, slot) in scratch.iter_mut().enumerate() {
                let base = s - enc.digit(s, server) as usize * stride;
                let best = (0..enc.size).map(|y| dp[base + y * stride]).min().unwrap_or(INF);
                *slot = dp[s].min(best.saturating_add(weight));
            }
            std::mem::swap(&mut dp, &mut scratch);
        }
        for (s, v) in dp.iter_mut().enumerate() {
            if !enc.contains(s, sigma) {
                *v = INF;
            }
        }
    }
    let best = dp.into_iter().min().expect("at least one state");
    Ok(to_rational(best, &denom))
}

/// A minimum-cost feasible hierarchical pattern with a witnessing labeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchicalOptimum {
    pub cost: BigRational,
    pub trace: ExtensionTrace,
    pub labeling: Labeling,
}

/// Minimum `Σ_ℓ w_ℓ |ℐ^ℓ|` over feasible hierarchical patterns. The program's
/// state is the tuple of labels of the intervals covering the current step;
/// an `ℓ`-extension relabels levels `≤ ℓ` at cost `w_1 + … + w_ℓ`.
pub fn opt_hierarchical(
    requests: &[Point],
    weights: &Weights,
    universe: Universe,
) -> Result<HierarchicalOptimum> {
    opt_hierarchical_with_budget(requests, weights, universe, DEFAULT_TRANSITION_BUDGET)
}

pub fn opt_hierarchical_with_budget(
    requests: &[Point],
    weights: &Weights,
    universe: Universe,
    budget: u128,
) -> Result<HierarchicalOptimum> {
    validate(requests, weights, universe)?;
    if requests.is_empty() {
        return Err(Error::Empty);
    }
    let k = weights.k();
    let (w, denom) = weights.to_integer_scale()?;
    let mut prefix_w = vec![0u128; k + 1];
    for l in 1..=k {
        prefix_w[l] = prefix_w[l - 1]
            .checked_add(w[l - 1])
            .ok_or(Error::Overflow("weights"))?;
    }
    let enc = Encoding::new(universe, k, requests.len(), budget)?;
    let mut dp: Vec<u128> = (0..enc.states)
        .map(|s| if enc.contains(s, requests[0]) { prefix_w[k] } else { INF })
        .collect();
    // back[t][s] = (ℓ_t, predecessor state) for t ≥ 2
    let mut back: Vec<Vec<(u8, u32)>> = Vec::with_capacity(requests.len());
    for &sigma in &requests[1..] {
        let mut best: Vec<u128> = dp.clone();
        let mut choice: Vec<(u8, u32)> = (0..enc.states).map(|s| (0, s as u32)).collect();
        // free[s] = min of dp over states agreeing with s on levels > ℓ, with argmin
        let mut free: Vec<(u128, u32)> = dp.iter().enumerate().map(|(s, &v)| (v, s as u32)).collect();
        for ell in 1..=k {
            let stride = enc.stride(ell - 1);
            let relaxed: Vec<(u128, u32)> = (0..enc.states)
                .map(|s| {
                    let base = s - enc.digit(s, ell - 1) as usize * stride;
                    (0..enc.size)
                        .map(|y| free[base + y * stride])
                        .fold((INF, u32::MAX), |acc, c| if c.0 < acc.0 { c } else { acc })
                })
                .collect();
            free = relaxed;
            for s in 0..enc.states {
                let cand = free[s].0.saturating_add(prefix_w[ell]);
                if cand < best[s] {
                    best[s] = cand;
                    choice[s] = (ell as u8, free[s].1);
                }
            }
        }
        for (s, v) in best.iter_mut().enumerate() {
            if !enc.contains(s, sigma) {
                *v = INF;
            }
        }
        dp = best;
        back.push(choice);
    }
    let (mut state, cost) = dp
        .iter()
        .enumerate()
        .fold((0usize, INF), |acc, (s, &v)| if v < acc.1 { (s, v) } else { acc });
    if cost == INF {
        return Err(Error::Precondition("no feasible hierarchical pattern".into()));
    }
    let mut ells = vec![0 as Level; requests.len()];
    let mut states = vec![0usize; requests.len()];
    for t in (1..requests.len()).rev() {
        states[t] = state;
        let (ell, prev) = back[t - 1][state];
        ells[t] = ell as Level;
        state = prev as usize;
    }
    states[0] = state;
    ells[0] = k;
    let trace = ExtensionTrace::from_levels(k, &ells)?;
    let labels = (1..=k)
        .map(|l| {
            trace
                .intervals_at(l)
                .map(|iv| enc.decode(states[(iv.begin - 1) as usize])[l - 1])
                .collect()
        })
        .collect();
    Ok(HierarchicalOptimum {
        cost: to_rational(cost, &denom),
        trace,
        labeling: Labeling::new(labels),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::pattern_cost;

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn w(ws: &[u64]) -> Weights {
        Weights::from_integers(ws).unwrap()
    }

    #[test]
    fn opt_cost_examples() {
        let u3 = Universe::new(3).unwrap();
        assert_eq!(opt_cost(&[0, 1, 0], &w(&[1]), u3).unwrap(), int(3));
        assert_eq!(opt_cost(&[0, 1, 0, 1], &w(&[1, 10]), u3).unwrap(), int(11));
        assert_eq!(opt_cost(&[0, 0, 0], &w(&[5]), u3).unwrap(), int(5));
    }

    #[test]
    fn hierarchical_examples() {
        let u3 = Universe::new(3).unwrap();
        let h = opt_hierarchical(&[0, 1, 0, 1], &w(&[1, 10]), u3).unwrap();
        assert_eq!(h.cost, int(11));
        assert_eq!(h.trace.levels(), &[2, 0, 0, 0]);
        assert!(h.labeling.serves(&h.trace, &[0, 1, 0, 1]));
        let h = opt_hierarchical(&[0, 0, 0], &w(&[1]), u3).unwrap();
        assert_eq!((h.cost, h.trace.levels().to_vec()), (int(1), vec![1, 0, 0]));
        let h = opt_hierarchical(&[0, 1], &w(&[1]), u3).unwrap();
        assert_eq!((h.cost, h.trace.levels().to_vec()), (int(2), vec![1, 1]));
    }

    #[test]
    fn rational_weights() {
        let u2 = Universe::new(2).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        let ws = Weights::new(vec![half.clone(), int(2)]).unwrap();
        let h = opt_hierarchical(&[0, 1, 0], &ws, u2).unwrap();
        assert_eq!(h.cost, half + int(2));
        assert_eq!(pattern_cost(&h.trace, &ws).unwrap(), h.cost);
    }

    #[test]
    fn budget_is_enforced() {
        let u = Universe::new(10).unwrap();
        let err = opt_cost_with_budget(&[0, 1, 2], &w(&[1, 2, 3]), u, 1000);
        assert!(matches!(err, Err(Error::BudgetExceeded { .. })));
    }
}
