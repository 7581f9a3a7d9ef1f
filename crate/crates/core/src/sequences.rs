//! Exact numeric sequences used by the analysis: harmonic numbers, the
//! dichotomy sizes `n_ℓ`, the competitive-ratio constants `c_ℓ` and the
//! adversary's per-call cost bounds.
//!
//! `n_ℓ` grows doubly exponentially (`1, 2, 4, 9, 30, 256, 16641, …`), so it
//! is returned as a big integer. The classical ceiling `n_ℓ ≤ 2^{2^{ℓ+3 log ℓ}}`
//! is only ever used as a sanity check, never in computation.

use num::{BigInt, BigRational, BigUint, One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `H(n) = 1 + 1/2 + … + 1/n`.
pub fn harmonic(n: u64) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::ZeroHarmonic);
    }
    Ok((1..=n).fold(BigRational::zero(), |acc, i| {
        acc + BigRational::new(BigInt::one(), BigInt::from(i))
    }))
}

/// `n_0 = 1`, `n_ℓ = (⌈n_{ℓ-1}/2⌉ + 1)(⌊n_{ℓ-1}/2⌋ + 1)`.
pub fn n_sequence(ell: usize) -> BigUint {
    let two = BigUint::from(2u32);
    let mut n = BigUint::one();
    for _ in 0..ell {
        let (a, b) = grid_sides(&n, &two);
        n = a * b;
    }
    n
}

fn grid_sides(prev: &BigUint, two: &BigUint) -> (BigUint, BigUint) {
    let floor = prev / two;
    let ceil = (prev + BigUint::one()) / two;
    (ceil + BigUint::one(), floor + BigUint::one())
}

/// `n_ℓ` as a machine integer; `None` once it no longer fits.
pub fn n_value(ell: usize) -> Option<u64> {
    n_sequence(ell).to_u64()
}

/// `⌈n_{ℓ-1}/2⌉ + 1`: the number of sets in the level-`ℓ` set system, and the
/// per-iteration factor of the adversary's loop counts.
pub fn branching(ell: usize) -> u64 {
    assert!(ell >= 1);
    let prev = n_value(ell - 1).expect("n fits in u64");
    prev.div_ceil(2) + 1
}

/// The competitive-ratio constants, returned with index `ℓ-1` holding `c_ℓ`:
/// `c_k = H(n_k) + 1` and `c_ℓ = (H(n_ℓ) + 1)(c_{ℓ+1} + 1)`.
pub fn ratio_constants(k: usize) -> Result<Vec<BigRational>> {
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    if k > 6 {
        // H(n_7) would need ~7·10^7 exact terms.
        return Err(Error::BudgetExceeded {
            needed: n_value(k).map_or(u128::MAX, u128::from),
            budget: n_value(6).unwrap_or(0) as u128,
        });
    }
    let one = BigRational::one();
    let mut c = vec![BigRational::zero(); k];
    for ell in (1..=k).rev() {
        let h = harmonic(n_value(ell).expect("small level"))? + &one;
        c[ell - 1] = if ell == k {
            h
        } else {
            h * (&c[ell] + &one)
        };
    }
    Ok(c)
}

/// The adversary's per-call pattern-cost bounds, index `ℓ` holding `c^adv_ℓ`
/// for `ℓ = 0..k-1`: `c_0 = 0`, `c_ℓ = β^{ℓ-1} + β(⌈n_{ℓ-1}/2⌉ + 1) c_{ℓ-1}`.
pub fn adversary_cost_constants(k: usize, beta: u64) -> Result<Vec<BigUint>> {
    if k == 0 || beta < 2 {
        return Err(Error::Precondition("need k >= 1 and beta >= 2".into()));
    }
    let beta_big = BigUint::from(beta);
    let mut c = vec![BigUint::zero()];
    let mut beta_pow = BigUint::one();
    for ell in 1..k {
        let next = &beta_pow + &beta_big * BigUint::from(branching(ell)) * &c[ell - 1];
        c.push(next);
        beta_pow *= &beta_big;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(1).unwrap(), q(1, 1));
        assert_eq!(harmonic(2).unwrap(), q(3, 2));
        assert_eq!(harmonic(4).unwrap(), q(25, 12));
        assert_eq!(harmonic(0), Err(Error::ZeroHarmonic));
    }

    #[test]
    fn n_values() {
        let got: Vec<u64> = (0..=6).map(|l| n_value(l).unwrap()).collect();
        assert_eq!(got, vec![1, 2, 4, 9, 30, 256, 16641]);
        assert_eq!(branching(1), 2);
        assert_eq!(branching(4), 6);
    }

    #[test]
    fn n_recurrence_structure() {
        for ell in 1..12 {
            let prev = n_sequence(ell - 1);
            let two = BigUint::from(2u32);
            let (a, b) = grid_sides(&prev, &two);
            assert_eq!(&a + &b - BigUint::from(2u32), prev);
            assert_eq!(a * b, n_sequence(ell));
            assert!(n_sequence(ell) > prev);
        }
    }

    #[test]
    fn n_respects_classical_ceiling() {
        for ell in 1..=5usize {
            let log = (ell as f64).log2();
            let ceiling = 2f64.powf(2f64.powf(ell as f64 + 3.0 * log));
            assert!((n_value(ell).unwrap() as f64) <= ceiling);
        }
    }

    #[test]
    fn ratio_constant_values() {
        assert_eq!(ratio_constants(1).unwrap(), vec![q(5, 2)]);
        assert_eq!(ratio_constants(2).unwrap(), vec![q(245, 24), q(37, 12)]);
        for k in 1..=4 {
            let c = ratio_constants(k).unwrap();
            assert!(c.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn adversary_constant_values() {
        let c = adversary_cost_constants(3, 10).unwrap();
        assert_eq!(c[0], BigUint::zero());
        assert_eq!(c[1], BigUint::one());
        assert_eq!(c[2], BigUint::from(30u32));
        for beta in [2, 3, 100] {
            assert_eq!(adversary_cost_constants(2, beta).unwrap()[1], BigUint::one());
        }
        assert!(adversary_cost_constants(2, 1).is_err());
    }
}
