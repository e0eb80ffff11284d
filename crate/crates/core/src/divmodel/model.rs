use super::ring::{RingError, RingSpec};
use crate::bigser;
use crate::curve::Point;
use crate::eds::{EdsConstants, EdsError, EdsTable, PrimitiveDivisor};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("the zero marker has no denominator")]
    Zero,
    #[error("record for index {index} is incomplete: {reason}")]
    Incomplete { index: u64, reason: String },
    #[error("primitive divisor {0} lies in W")]
    PrimitiveInW(BigUint),
    #[error("group law disagrees with index addition at {0}")]
    Inconsistent(i64),
    #[error(transparent)]
    Eds(#[from] EdsError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Coordinates of (n*m0)P: x = a/b in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelElement {
    pub n: i64,
    #[serde(with = "bigser::int")]
    pub a: BigInt,
    #[serde(with = "bigser::nat")]
    pub b: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelValue {
    Zero,
    Element(ModelElement),
}

impl ModelValue {
    pub fn index(&self) -> i64 {
        match self {
            ModelValue::Zero => 0,
            ModelValue::Element(e) => e.n,
        }
    }
}

fn signed_point(table: &mut EdsTable, n: i64, m0: u64) -> Point<BigRational> {
    let p = table.point(n.unsigned_abs() * m0).clone();
    if n < 0 {
        table.ctx().curve.negate(&p)
    } else {
        p
    }
}

pub fn encode(table: &mut EdsTable, m0: u64, n: i64) -> Result<ModelValue, ModelError> {
    if n == 0 {
        return Ok(ModelValue::Zero);
    }
    let x = table.x(n.unsigned_abs() * m0)?;
    Ok(ModelValue::Element(ModelElement {
        n,
        a: x.numer().clone(),
        b: x.denom().abs().to_biguint().unwrap(),
    }))
}

pub fn decode(v: &ModelValue) -> i64 {
    v.index()
}

/// Encoding of j + k, cross-checked against the group law on the curve.
pub fn model_add(table: &mut EdsTable, m0: u64, j: &ModelValue, k: &ModelValue) -> Result<ModelValue, ModelError> {
    let s = j.index() + k.index();
    let pj = signed_point(table, j.index(), m0);
    let pk = signed_point(table, k.index(), m0);
    let sum = table.ctx().curve.over_q().add(&pj, &pk);
    let expect = if s == 0 { Point::Infinity } else { signed_point(table, s, m0) };
    if sum != expect {
        return Err(ModelError::Inconsistent(s));
    }
    encode(table, m0, s)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisibilityVerdict {
    pub divides: bool,
    /// A prime outside W whose exponent in b_j exceeds the one in b_k.
    #[serde(with = "bigser::opt_nat")]
    pub witness: Option<BigUint>,
}

/// Every known primitive divisor must lie outside W.
pub fn check_exclusions(consts: &EdsConstants, spec: &RingSpec) -> Result<(), ModelError> {
    for entry in &consts.primitive_divisors {
        if let PrimitiveDivisor::Known { p } = &entry.divisor {
            if spec.contains_prime(p)? {
                return Err(ModelError::PrimitiveInW(p.clone()));
            }
        }
    }
    Ok(())
}

/// Decides b_j | b_k in O_{Q,W}, where b_n is the denominator of x_{n*m0}.
pub fn model_divides(
    table: &mut EdsTable,
    consts: &EdsConstants,
    spec: &RingSpec,
    j: i64,
    k: i64,
) -> Result<DivisibilityVerdict, ModelError> {
    if j == 0 || k == 0 {
        return Err(ModelError::Zero);
    }
    let m0 = consts.m0_u64();
    let (ju, ku) = (j.unsigned_abs() * m0, k.unsigned_abs() * m0);
    let bj = table.denominator(ju)?;
    let bk = table.denominator(ku)?;
    let g = bj.gcd(&bk);
    let bad: Vec<BigUint> = table.ctx().bad_primes.iter().cloned().collect();
    let r = spec.strip_known(&(&bj / &g), &bad)?;
    if r.is_one() {
        return Ok(DivisibilityVerdict { divides: true, witness: None });
    }
    let outside = |p: &BigUint| -> Result<bool, ModelError> { Ok((&r % p).is_zero() && !spec.contains_prime(p)?) };
    for entry in &consts.primitive_divisors {
        match &entry.divisor {
            PrimitiveDivisor::Known { p } if outside(p)? => {
                return Ok(DivisibilityVerdict { divides: false, witness: Some(p.clone()) });
            }
            PrimitiveDivisor::InCofactor { cofactor }
                if (&r % cofactor).is_zero() && bk.gcd(cofactor).is_one() => {
                    let largest = cofactor.clone();
                    return Ok(DivisibilityVerdict { divides: false, witness: Some(largest) });
                }
            _ => {}
        }
    }
    let primes = table.record(ju)?.primes();
    for p in &primes {
        if outside(p)? {
            return Ok(DivisibilityVerdict { divides: false, witness: Some(p.clone()) });
        }
    }
    let f = table.source().factor(&r);
    for (p, _) in &f.factors {
        if !spec.contains_prime(p)? {
            return Ok(DivisibilityVerdict { divides: false, witness: Some(p.clone()) });
        }
    }
    if !f.complete {
        return Err(ModelError::Incomplete { index: ju, reason: format!("cofactor {} of b_j/gcd unresolved", f.cofactor) });
    }
    Ok(DivisibilityVerdict { divides: true, witness: None })
}
