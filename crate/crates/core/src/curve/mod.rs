//! Exact arithmetic on short Weierstrass curves y^2 = x^3 + ax + b.

mod finite;
mod fp;
mod torsion;

pub use finite::{count_points, order_mod_p, point_order, reduce_point};
pub use fp::Fp;
pub use torsion::{torsion_multiple, torsion_order, torsion_points};

use crate::arith::{factor, FactorBudget};
use crate::bigser;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error("singular model: 4a^3 + 27b^2 = 0")]
    Singular,
    #[error("point {0} is not on the curve")]
    OffCurve(String),
    #[error("{0} is a bad prime for this curve and point")]
    BadPrime(u64),
    #[error("t = {0} must be a positive even multiple of the torsion order {1}")]
    BadTorsionMultiple(u64, u64),
    #[error("base point is the point at infinity")]
    InfiniteBase,
    #[error("could not determine the bad primes: discriminant not fully factored")]
    UnfactoredDiscriminant,
    #[error("point counting over F_{0} is out of range")]
    CountOutOfRange(u64),
}

/// Operations the group law needs from a coordinate field.
pub trait FieldElement:
    Clone
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn is_zero_elem(&self) -> bool;
    fn invert(&self) -> Option<Self>;
    /// The integer `k` as an element of the same field as `self`.
    fn lift(&self, k: i64) -> Self;
}

impl FieldElement for BigRational {
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn invert(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
    fn lift(&self, k: i64) -> Self {
        BigRational::from_integer(k.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Point<F> {
    Infinity,
    Affine { x: F, y: F },
}

impl<F> Point<F> {
    pub fn affine(x: F, y: F) -> Self {
        Point::Affine { x, y }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn x(&self) -> Option<&F> {
        match self {
            Point::Affine { x, .. } => Some(x),
            Point::Infinity => None,
        }
    }

    pub fn y(&self) -> Option<&F> {
        match self {
            Point::Affine { y, .. } => Some(y),
            Point::Infinity => None,
        }
    }
}

impl<F: fmt::Display> fmt::Display for Point<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Infinity => write!(f, "O"),
            Point::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

/// y^2 = x^3 + ax + b over any field.
#[derive(Clone, Debug, PartialEq)]
pub struct WeierstrassCurve<F> {
    pub a: F,
    pub b: F,
}

impl<F: FieldElement> WeierstrassCurve<F> {
    pub fn contains(&self, p: &Point<F>) -> bool {
        match p {
            Point::Infinity => true,
            Point::Affine { x, y } => {
                y.clone() * y.clone()
                    == x.clone() * x.clone() * x.clone() + self.a.clone() * x.clone() + self.b.clone()
            }
        }
    }

    pub fn negate(&self, p: &Point<F>) -> Point<F> {
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => Point::affine(x.clone(), -y.clone()),
        }
    }

    pub fn double(&self, p: &Point<F>) -> Point<F> {
        self.add(p, p)
    }

    /// Chord-tangent addition; both inputs must lie on the curve.
    pub fn add(&self, p: &Point<F>, q: &Point<F>) -> Point<F> {
        let (x1, y1, x2, y2) = match (p, q) {
            (Point::Infinity, _) => return q.clone(),
            (_, Point::Infinity) => return p.clone(),
            (Point::Affine { x: x1, y: y1 }, Point::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            if y1 != y2 || y1.is_zero_elem() {
                return Point::Infinity;
            }
            let num = x1.lift(3) * x1.clone() * x1.clone() + self.a.clone();
            let den = x1.lift(2) * y1.clone();
            num * den.invert().expect("nonzero")
        } else {
            (y2.clone() - y1.clone()) * (x2.clone() - x1.clone()).invert().expect("distinct x")
        };
        let x3 = lambda.clone() * lambda.clone() - x1.clone() - x2.clone();
        let y3 = lambda * (x1.clone() - x3.clone()) - y1.clone();
        Point::affine(x3, y3)
    }

    /// Double-and-add scalar multiplication.
    pub fn mul(&self, n: &BigInt, p: &Point<F>) -> Point<F> {
        if n.is_negative() {
            return self.negate(&self.mul(&-n, p));
        }
        let mut acc = Point::Infinity;
        for i in (0..n.bits()).rev() {
            acc = self.double(&acc);
            if n.bit(i) {
                acc = self.add(&acc, p);
            }
        }
        acc
    }

    pub fn mul_u64(&self, n: u64, p: &Point<F>) -> Point<F> {
        self.mul(&BigInt::from(n), p)
    }
}

/// An integral short Weierstrass model over Q.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Curve {
    #[serde(with = "bigser::int")]
    pub a: BigInt,
    #[serde(with = "bigser::int")]
    pub b: BigInt,
    #[serde(with = "bigser::int")]
    pub disc: BigInt,
}

fn rat(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

impl Curve {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Result<Self, CurveError> {
        let (a, b) = (a.into(), b.into());
        let disc = BigInt::from(-16) * (BigInt::from(4) * a.pow(3) + BigInt::from(27) * b.pow(2));
        if disc.is_zero() {
            return Err(CurveError::Singular);
        }
        Ok(Curve { a, b, disc })
    }

    pub fn over_q(&self) -> WeierstrassCurve<BigRational> {
        WeierstrassCurve { a: rat(&self.a), b: rat(&self.b) }
    }

    /// Reduction modulo a prime of good reduction.
    pub fn over_fp(&self, p: u64) -> Option<WeierstrassCurve<Fp>> {
        if (&self.disc % BigInt::from(p)).is_zero() {
            return None;
        }
        Some(WeierstrassCurve { a: Fp::from_bigint(&self.a, p), b: Fp::from_bigint(&self.b, p) })
    }

    pub fn contains(&self, p: &Point<BigRational>) -> bool {
        self.over_q().contains(p)
    }

    fn check(&self, p: &Point<BigRational>) -> Result<(), CurveError> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(CurveError::OffCurve(p.to_string()))
        }
    }

    pub fn add(&self, p: &Point<BigRational>, q: &Point<BigRational>) -> Result<Point<BigRational>, CurveError> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.over_q().add(p, q))
    }

    pub fn negate(&self, p: &Point<BigRational>) -> Point<BigRational> {
        self.over_q().negate(p)
    }

    pub fn scalar_mul(&self, n: &BigInt, p: &Point<BigRational>) -> Result<Point<BigRational>, CurveError> {
        self.check(p)?;
        Ok(self.over_q().mul(n, p))
    }

    /// `x(nP)` as an unreduced fraction `(X, Z^2)`, computed in Jacobian
    /// coordinates over the integers without gcd normalisation. `None` when
    /// `nP` is the point at infinity.
    pub fn multiple_x_unreduced(&self, n: u64, p: &Point<BigRational>) -> Option<(BigInt, BigInt)> {
        let base = jacobian_of(p)?;
        let mut acc: Option<Jac> = None;
        for i in (0..64 - n.leading_zeros()).rev() {
            acc = acc.and_then(|j| self.jac_double(&j));
            if n >> i & 1 == 1 {
                acc = match acc {
                    None => Some(base.clone()),
                    Some(j) => self.jac_add(&j, &base),
                };
            }
        }
        acc.map(|j| {
            let z2 = &j.z * &j.z;
            (j.x, z2)
        })
    }

    fn jac_double(&self, p: &Jac) -> Option<Jac> {
        if p.y.is_zero() {
            return None;
        }
        let yy = &p.y * &p.y;
        let s = BigInt::from(4) * &p.x * &yy;
        let z2 = &p.z * &p.z;
        let m = BigInt::from(3) * &p.x * &p.x + &self.a * &z2 * &z2;
        let x = &m * &m - BigInt::from(2) * &s;
        let y = &m * (&s - &x) - BigInt::from(8) * &yy * &yy;
        let z = BigInt::from(2) * &p.y * &p.z;
        Some(Jac { x, y, z })
    }

    fn jac_add(&self, p: &Jac, q: &Jac) -> Option<Jac> {
        let z1s = &p.z * &p.z;
        let z2s = &q.z * &q.z;
        let u1 = &p.x * &z2s;
        let u2 = &q.x * &z1s;
        let s1 = &p.y * &z2s * &q.z;
        let s2 = &q.y * &z1s * &p.z;
        if u1 == u2 {
            return if s1 == s2 { self.jac_double(p) } else { None };
        }
        let h = &u2 - &u1;
        let r = &s2 - &s1;
        let h2 = &h * &h;
        let h3 = &h * &h2;
        let u1h2 = &u1 * &h2;
        let x = &r * &r - &h3 - BigInt::from(2) * &u1h2;
        let y = &r * (&u1h2 - &x) - &s1 * &h3;
        let z = h * &p.z * &q.z;
        Some(Jac { x, y, z })
    }
}

#[derive(Clone, Debug)]
struct Jac {
    x: BigInt,
    y: BigInt,
    z: BigInt,
}

/// Writes an affine rational point as (X/e^2, Y/e^3) when possible.
fn jacobian_of(p: &Point<BigRational>) -> Option<Jac> {
    let (x, y) = match p {
        Point::Affine { x, y } => (x, y),
        Point::Infinity => return None,
    };
    let e = x.denom().sqrt();
    if &(&e * &e) != x.denom() {
        return None;
    }
    let e3 = &e * &e * &e;
    if (&e3 % y.denom()).is_zero() {
        let yn = y.numer() * (&e3 / y.denom());
        let xn = x.numer() * (&(&e * &e) / x.denom());
        Some(Jac { x: xn, y: yn, z: e })
    } else {
        None
    }
}

/// A curve with a chosen base point and its bad primes.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveContext {
    pub curve: Curve,
    /// Generator of the free part.
    pub q: Point<BigRational>,
    pub t: u64,
    /// The base point `t*Q`.
    pub p: Point<BigRational>,
    pub bad_primes: BTreeSet<BigUint>,
}

impl CurveContext {
    /// `P = tQ` with `t = torsion_multiple(Q)`.
    pub fn new(curve: Curve, q: Point<BigRational>) -> Result<Self, CurveError> {
        let t = torsion_multiple(&curve, &q)?;
        Self::with_t(curve, q, t)
    }

    /// `P = tQ` for a caller-chosen `t`, validated against the torsion order.
    pub fn with_t(curve: Curve, q: Point<BigRational>, t: u64) -> Result<Self, CurveError> {
        curve.check(&q)?;
        let tors = torsion_order(&curve)?;
        if t == 0 || !t.is_multiple_of(2) || !t.is_multiple_of(tors) {
            return Err(CurveError::BadTorsionMultiple(t, tors));
        }
        let p = curve.scalar_mul(&BigInt::from(t), &q)?;
        Self::assemble(curve, q, t, p)
    }

    /// Uses `q` itself as the base point (`t = 1`). The sequence lemmas need
    /// `P` to reduce into the identity component everywhere, which holds for
    /// the reference curve with trivial torsion and one component at 2 and 3.
    pub fn with_base_point(curve: Curve, q: Point<BigRational>) -> Result<Self, CurveError> {
        curve.check(&q)?;
        let p = q.clone();
        Self::assemble(curve, q, 1, p)
    }

    fn assemble(curve: Curve, q: Point<BigRational>, t: u64, p: Point<BigRational>) -> Result<Self, CurveError> {
        let (x, y) = match &p {
            Point::Affine { x, y } => (x.clone(), y.clone()),
            Point::Infinity => return Err(CurveError::InfiniteBase),
        };
        let mut bad = BTreeSet::new();
        bad.insert(BigUint::from(2u32));
        let disc = curve.disc.abs().to_biguint().unwrap();
        let f = factor(&disc, &FactorBudget::default());
        if !f.complete {
            return Err(CurveError::UnfactoredDiscriminant);
        }
        bad.extend(f.primes().cloned());
        for den in [x.denom(), y.denom()] {
            let f = factor(&den.abs().to_biguint().unwrap(), &FactorBudget::default());
            if !f.complete {
                return Err(CurveError::UnfactoredDiscriminant);
            }
            bad.extend(f.primes().cloned());
        }
        Ok(CurveContext { curve, q, t, p, bad_primes: bad })
    }

    /// y^2 = x^3 - 2 with base point (3, 5).
    pub fn reference() -> Self {
        let curve = Curve::new(0, -2).unwrap();
        let p = point_from_ints(3, 5);
        Self::with_base_point(curve, p).unwrap()
    }

    /// y^2 = x^3 + 2 with base point (-1, 1), used for growth experiments.
    pub fn growth_reference() -> Self {
        let curve = Curve::new(0, 2).unwrap();
        let p = point_from_ints(-1, 1);
        Self::with_base_point(curve, p).unwrap()
    }

    pub fn is_bad(&self, p: &BigUint) -> bool {
        self.bad_primes.contains(p)
    }

    pub fn is_bad_u64(&self, p: u64) -> bool {
        self.bad_primes.contains(&BigUint::from(p))
    }

    /// `nP` for any integer `n`.
    pub fn multiple(&self, n: i64) -> Point<BigRational> {
        self.curve.over_q().mul(&BigInt::from(n), &self.p)
    }

    pub fn bad_primes_u64(&self) -> Vec<u64> {
        self.bad_primes.iter().filter_map(|p| p.to_u64()).collect()
    }
}

pub fn point_from_ints(x: i64, y: i64) -> Point<BigRational> {
    Point::affine(BigRational::from_integer(x.into()), BigRational::from_integer(y.into()))
}

/// Numerator and denominator of a rational as naturals (sign dropped).
pub fn num_den(x: &BigRational) -> (BigUint, BigUint) {
    (x.numer().abs().to_biguint().unwrap(), x.denom().abs().to_biguint().unwrap())
}


#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;
    use num_traits::One;
    use std::str::FromStr;

    fn gcd_reduce(num: &BigInt, den: &BigInt) -> BigRational {
        let g = num.gcd(den);
        if g.is_one() || g.is_zero() {
            BigRational::new_raw(num.clone(), den.clone())
        } else {
            BigRational::new(num / &g, den / &g)
        }
    }

    fn r(s: &str) -> BigRational {
        crate::bigser::parse_rational(s).unwrap()
    }

    #[test]
    fn reference_examples() {
        let c = Curve::new(0, -2).unwrap();
        let p = point_from_ints(3, 5);
        assert_eq!(c.add(&p, &p).unwrap(), Point::affine(r("129/100"), r("-383/1000")));
        assert_eq!(c.add(&p, &Point::Infinity).unwrap(), p);
        assert_eq!(c.add(&p, &point_from_ints(3, -5)).unwrap(), Point::Infinity);
        assert_eq!(c.scalar_mul(&BigInt::one(), &p).unwrap(), p);
        let p3 = c.scalar_mul(&BigInt::from(3), &p).unwrap();
        assert_eq!(p3.x().unwrap(), &r("164323/29241"));
        assert_eq!(c.scalar_mul(&BigInt::from(-3), &p).unwrap(), c.negate(&p3));
        assert_eq!(c.scalar_mul(&BigInt::zero(), &p).unwrap(), Point::Infinity);
        assert!(matches!(c.add(&point_from_ints(1, 1), &p), Err(CurveError::OffCurve(_))));
        assert_eq!(Curve::new(-3, 2), Err(CurveError::Singular));
    }

    #[test]
    fn two_torsion() {
        // y^2 = x^3 - x has (0,0) of order 2
        let c = Curve::new(-1, 0).unwrap();
        let t = point_from_ints(0, 0);
        assert_eq!(c.scalar_mul(&BigInt::from(2), &t).unwrap(), Point::Infinity);
    }

    #[test]
    fn jacobian_matches_affine() {
        let ctx = CurveContext::reference();
        for n in 1..=30u64 {
            let (num, den) = ctx.curve.multiple_x_unreduced(n, &ctx.p).unwrap();
            let x = gcd_reduce(&num, &den);
            let expect = ctx.multiple(n as i64);
            assert_eq!(Some(&x), expect.x(), "n={n}");
        }
        let tors = Curve::new(-1, 0).unwrap();
        assert!(tors.multiple_x_unreduced(2, &point_from_ints(0, 0)).is_none());
    }

    #[test]
    fn bad_primes_of_reference() {
        let ctx = CurveContext::reference();
        let bad: Vec<BigUint> = ctx.bad_primes.iter().cloned().collect();
        assert_eq!(bad, vec![BigUint::from_str("2").unwrap(), BigUint::from_str("3").unwrap()]);
    }
}
