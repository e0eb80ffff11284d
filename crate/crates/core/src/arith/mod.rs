//! Integer arithmetic, factorization under an effort budget, and quadratic
//! field elements with prime splitting and ideal valuations.

mod factor;
mod primes;
mod quad;

pub use factor::{factor, factor_with_hints, FactorBudget, FactorSource, Factorization, Factorizer};
pub use primes::{
    count_primes, is_prime, is_prime_u64, isqrt, jacobi, nth_root, primes_up_to, sqrt_mod_prime,
    strip_common, valuation, PrimeSieve,
};
pub use quad::{
    is_squarefree, kronecker, quad_valuation, quad_valuation_parts, splitting_type, QuadElem,
    QuadError, QuadPrime, SplitKind,
};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Natural logarithm of a big natural, accurate to double precision.
pub fn ln_nat(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        if let Some(f) = n.to_f64() {
            return f.ln();
        }
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::MAX);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Base-10 logarithm of a big natural.
pub fn log10_nat(n: &BigUint) -> f64 {
    ln_nat(n) / std::f64::consts::LN_10
}

/// The p-adic valuation of a nonzero rational, `None` for zero.
pub fn rational_valuation(x: &BigRational, p: &BigUint) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let n = x.numer().abs().to_biguint().unwrap();
    let d = x.denom().abs().to_biguint().unwrap();
    Some(valuation(&n, p) as i64 - valuation(&d, p) as i64)
}

/// Exact square root of a rational, if it is a square.
pub fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().to_biguint()?;
    let d = x.denom().to_biguint()?;
    let rn = isqrt(&n);
    let rd = isqrt(&d);
    if &rn * &rn == n && &rd * &rd == d {
        Some(BigRational::new(BigInt::from(rn), BigInt::from(rd)))
    } else {
        None
    }
}

/// True iff the rational is the square of a rational.
pub fn is_rational_square(x: &BigRational) -> bool {
    rational_sqrt(x).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logs() {
        assert!((ln_nat(&BigUint::from(25u32)) - 25f64.ln()).abs() < 1e-12);
        let big = num_traits::pow(BigUint::from(10u32), 400);
        assert!((log10_nat(&big) - 400.0).abs() < 1e-9);
    }

    #[test]
    fn rational_squares() {
        let r = BigRational::new(BigInt::from(9), BigInt::from(4));
        assert_eq!(rational_sqrt(&r), Some(BigRational::new(BigInt::from(3), BigInt::from(2))));
        assert!(!is_rational_square(&BigRational::from_integer(BigInt::from(2))));
        assert!(!is_rational_square(&BigRational::from_integer(BigInt::from(-4))));
    }

    #[test]
    fn rational_valuations() {
        let x = BigRational::new(BigInt::from(129), BigInt::from(100));
        assert_eq!(rational_valuation(&x, &BigUint::from(5u32)), Some(-2));
        assert_eq!(rational_valuation(&x, &BigUint::from(3u32)), Some(1));
    }
}
