//! Elliptic divisibility sequences: denominators of x(nP), their prime
//! supports, primitive divisors, the derived constants and checks of the
//! sequence lemmas.

mod constants;
mod verify;

pub use constants::{
    build_v, compute_kappa, compute_m0, estimate_c, growth_rate, growth_verdict, primitive_divisor,
    verify_m1, ConstantsConfig, EdsConstants, GrowthVerdict, PrimitiveDivisor, VEntry,
};
pub use verify::{
    odd_valuations, verify_cor_div, verify_monotone, verify_order_change, verify_rank_of_apparition, verify_square,
    verify_strong_divisibility, verify_subgroup,
};

use crate::arith::{factor_with_hints, isqrt, valuation, FactorSource, Factorization};
use crate::bigser;
use crate::curve::{CurveContext, CurveError, Point};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EdsError {
    #[error("{0}P is the point at infinity")]
    Infinity(u64),
    #[error("factorization of d_{0} is incomplete")]
    Incomplete(u64),
    #[error("index must be positive")]
    ZeroIndex,
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("{0}")]
    Precondition(String),
}

/// One term of the sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdsRecord {
    pub n: u64,
    #[serde(with = "bigser::opt_rational")]
    pub x: Option<BigRational>,
    /// Good-prime part of the denominator of x_n.
    #[serde(with = "bigser::nat_map")]
    pub d_valuations: BTreeMap<BigUint, u32>,
    /// For each bad prime p at which x_n has a pole, the pole order
    /// `-ord_p(x_n)`.
    #[serde(with = "bigser::nat_map")]
    pub bad_part: BTreeMap<BigUint, i64>,
    #[serde(with = "bigser::nat")]
    pub d_n: BigUint,
    /// Part of `d_n` left unfactored (1 when complete).
    #[serde(with = "bigser::nat")]
    pub unresolved: BigUint,
    pub complete: bool,
    /// Every prime dividing `unresolved` exceeds this.
    pub smooth_bound: u64,
}

impl EdsRecord {
    pub fn primes(&self) -> BTreeSet<BigUint> {
        self.d_valuations.keys().cloned().collect()
    }

    /// Square root of the unresolved part, which is itself a square.
    pub fn unresolved_root(&self) -> BigUint {
        let r = isqrt(&self.unresolved);
        if &r * &r == self.unresolved {
            r
        } else {
            self.unresolved.clone()
        }
    }
}

/// The sequence for one curve and base point, computed lazily.
pub struct EdsTable {
    ctx: CurveContext,
    source: Arc<dyn FactorSource>,
    points: Vec<Point<BigRational>>,
    d_values: BTreeMap<u64, BigUint>,
    records: BTreeMap<u64, EdsRecord>,
}

impl EdsTable {
    pub fn new(ctx: CurveContext, source: Arc<dyn FactorSource>) -> Self {
        EdsTable { ctx, source, points: vec![], d_values: BTreeMap::new(), records: BTreeMap::new() }
    }

    pub fn ctx(&self) -> &CurveContext {
        &self.ctx
    }

    pub fn source(&self) -> &Arc<dyn FactorSource> {
        &self.source
    }

    /// `nP` for `n >= 1`, by repeated addition.
    pub fn point(&mut self, n: u64) -> &Point<BigRational> {
        assert!(n >= 1, "multiples start at 1");
        let e = self.ctx.curve.over_q();
        while (self.points.len() as u64) < n {
            let next = match self.points.last() {
                None => self.ctx.p.clone(),
                Some(last) => e.add(last, &self.ctx.p),
            };
            self.points.push(next);
        }
        &self.points[n as usize - 1]
    }

    pub fn x(&mut self, n: u64) -> Result<BigRational, EdsError> {
        if n == 0 {
            return Err(EdsError::ZeroIndex);
        }
        self.point(n).x().cloned().ok_or(EdsError::Infinity(n))
    }

    /// Full denominator of x_n.
    pub fn denominator(&mut self, n: u64) -> Result<BigUint, EdsError> {
        Ok(self.x(n)?.denom().abs().to_biguint().unwrap())
    }

    /// d_n: the denominator of x_n with all bad primes removed. Exact and
    /// factorization-free.
    pub fn d_value(&mut self, n: u64) -> Result<BigUint, EdsError> {
        if let Some(d) = self.d_values.get(&n) {
            return Ok(d.clone());
        }
        let mut d = self.denominator(n)?;
        for p in &self.ctx.bad_primes {
            if (&d % p) == BigUint::ZERO {
                let v = valuation(&d, p);
                d /= p.pow(v);
            }
        }
        self.d_values.insert(n, d.clone());
        Ok(d)
    }

    /// Membership `p in S_n`, decided by divisibility alone.
    pub fn in_sn(&mut self, p: &BigUint, n: u64) -> Result<bool, EdsError> {
        Ok((self.d_value(n)? % p) == BigUint::ZERO)
    }

    pub fn record(&mut self, n: u64) -> Result<&EdsRecord, EdsError> {
        if !self.records.contains_key(&n) {
            let rec = self.build_record(n)?;
            self.records.insert(n, rec);
        }
        Ok(&self.records[&n])
    }

    fn build_record(&mut self, n: u64) -> Result<EdsRecord, EdsError> {
        let x = self.x(n)?;
        let mut hints: BTreeSet<BigUint> = BTreeSet::new();
        for m in 1..n {
            if n.is_multiple_of(m) {
                hints.extend(self.record(m)?.d_valuations.keys().cloned());
            }
        }
        let d = self.d_value(n)?;
        let hints: Vec<BigUint> = hints.into_iter().collect();
        let root = isqrt(&d);
        let fact: Factorization = if &root * &root == d {
            factor_with_hints(&root, &hints, self.source.as_ref()).pow(2)
        } else {
            factor_with_hints(&d, &hints, self.source.as_ref())
        };
        let mut bad_part = BTreeMap::new();
        for p in &self.ctx.bad_primes {
            if let Some(v) = crate::arith::rational_valuation(&x, p) {
                if v < 0 {
                    bad_part.insert(p.clone(), -v);
                }
            }
        }
        Ok(EdsRecord {
            n,
            x: Some(x),
            d_valuations: fact.factors.iter().cloned().collect(),
            bad_part,
            d_n: d,
            unresolved: fact.cofactor.clone(),
            complete: fact.complete,
            smooth_bound: fact.smooth_bound,
        })
    }

    /// S_n with its completeness flag.
    pub fn sn(&mut self, n: u64) -> Result<(BTreeSet<BigUint>, bool), EdsError> {
        let r = self.record(n)?;
        Ok((r.primes(), r.complete))
    }

    /// Smallest `n <= bound` with `p | d_n`.
    pub fn rank_of_apparition(&mut self, p: &BigUint, bound: u64) -> Result<Option<u64>, EdsError> {
        for n in 1..=bound {
            if self.in_sn(p, n)? {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }
}

/// Convenience: a table over the reference curve with an in-memory
/// factorizer at the default budget.
pub fn reference_table() -> EdsTable {
    EdsTable::new(
        CurveContext::reference(),
        Arc::new(crate::arith::Factorizer::new(Default::default())),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn reference_records() {
        let mut t = reference_table();
        let r1 = t.record(1).unwrap().clone();
        assert!(r1.d_valuations.is_empty());
        assert_eq!(r1.d_n, nat(1));
        let r2 = t.record(2).unwrap().clone();
        assert_eq!(r2.x.as_ref().unwrap().to_string(), "129/100");
        assert_eq!(r2.bad_part, BTreeMap::from([(nat(2), 2)]));
        assert_eq!(r2.d_valuations, BTreeMap::from([(nat(5), 2)]));
        assert_eq!(r2.d_n, nat(25));
        let r3 = t.record(3).unwrap().clone();
        assert_eq!(t.denominator(3).unwrap(), nat(171 * 171));
        assert_eq!(r3.bad_part, BTreeMap::from([(nat(3), 4)]));
        assert_eq!(r3.d_valuations, BTreeMap::from([(nat(19), 2)]));
        assert_eq!(r3.d_n, nat(361));
        assert_eq!(t.sn(2).unwrap(), (BTreeSet::from([nat(5)]), true));
    }

    #[test]
    fn rank_of_apparition_of_five() {
        let mut t = reference_table();
        assert_eq!(t.rank_of_apparition(&nat(5), 10).unwrap(), Some(2));
        assert_eq!(t.rank_of_apparition(&nat(19), 10).unwrap(), Some(3));
    }
}
