use super::primes::{jacobi, sqrt_mod_prime, valuation};
use crate::bigser;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuadError {
    #[error("{0} is not a squarefree integer other than 0 and 1")]
    BadDiscriminant(i64),
    #[error("valuation of zero is undefined")]
    Zero,
    #[error("elements live in different fields Q(sqrt {0}) and Q(sqrt {1})")]
    FieldMismatch(i64, i64),
    #[error("{0} is not prime")]
    NotPrime(BigUint),
    #[error("cannot parse quadratic element {0:?}")]
    Parse(String),
}

/// True iff `d` is squarefree (sign ignored).
pub fn is_squarefree(d: i64) -> bool {
    if d == 0 {
        return false;
    }
    let mut n = d.unsigned_abs();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

fn check_field(d: i64) -> Result<(), QuadError> {
    if d == 1 || !is_squarefree(d) {
        Err(QuadError::BadDiscriminant(d))
    } else {
        Ok(())
    }
}

/// `a + b*sqrt(d)` with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadElem {
    pub d: i64,
    #[serde(with = "bigser::rational")]
    pub a: BigRational,
    #[serde(with = "bigser::rational")]
    pub b: BigRational,
}

impl QuadElem {
    pub fn new(d: i64, a: BigRational, b: BigRational) -> Result<Self, QuadError> {
        check_field(d)?;
        Ok(QuadElem { d, a, b })
    }

    pub fn from_ints(d: i64, a: i64, b: i64) -> Result<Self, QuadError> {
        Self::new(d, BigRational::from_integer(a.into()), BigRational::from_integer(b.into()))
    }

    pub fn rational(d: i64, a: BigRational) -> Result<Self, QuadError> {
        Self::new(d, a, BigRational::zero())
    }

    /// `sqrt(d)` itself.
    pub fn sqrt_d(d: i64) -> Result<Self, QuadError> {
        Self::from_ints(d, 0, 1)
    }

    /// Parses `a`, `a/b`, or `a,b` meaning `a + b*sqrt(d)`.
    pub fn parse(s: &str, d: i64) -> Result<Self, QuadError> {
        let bad = || QuadError::Parse(s.to_string());
        let (a, b) = match s.split_once(',') {
            Some((a, b)) => (a, b),
            None => (s, "0"),
        };
        let a = bigser::parse_rational(a).ok_or_else(bad)?;
        let b = bigser::parse_rational(b).ok_or_else(bad)?;
        Self::new(d, a, b)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        QuadElem { d: self.d, a: self.a.clone(), b: -self.b.clone() }
    }

    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - BigRational::from_integer(self.d.into()) * &self.b * &self.b
    }

    pub fn trace(&self) -> BigRational {
        &self.a + &self.a
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        let c = self.conj();
        Some(QuadElem { d: self.d, a: c.a / &n, b: c.b / n })
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        QuadElem { d: self.d, a: &self.a * k, b: &self.b * k }
    }

    /// Algebraic integrality: trace and norm are integers.
    pub fn is_integral(&self) -> bool {
        self.trace().is_integer() && self.norm().is_integer()
    }

    /// Exact square root inside the field, if one exists.
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(self.clone());
        }
        // (x + y sqrt d)^2 = a + b sqrt d  =>  x^2 = (a +- sqrt(N))/2
        let n = super::rational_sqrt(&self.norm())?;
        let two = BigRational::from_integer(2.into());
        for s in [n.clone(), -n] {
            let x2 = (&self.a + &s) / &two;
            if let Some(x) = super::rational_sqrt(&x2) {
                let cand = if x.is_zero() {
                    let y2 = &self.a / BigRational::from_integer(self.d.into());
                    super::rational_sqrt(&y2).map(|y| QuadElem { d: self.d, a: x, b: y })
                } else {
                    let y = &self.b / (&two * &x);
                    Some(QuadElem { d: self.d, a: x, b: y })
                };
                if let Some(c) = cand {
                    if &(&c * &c) == self {
                        return Some(c);
                    }
                }
            }
        }
        None
    }
}

impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "({})*sqrt({})", self.b, self.d)
        } else {
            write!(f, "{} + ({})*sqrt({})", self.a, self.b, self.d)
        }
    }
}

fn same_field(x: &QuadElem, y: &QuadElem) {
    assert_eq!(x.d, y.d, "arithmetic across different quadratic fields");
}

impl<'a> Add<&'a QuadElem> for &'a QuadElem {
    type Output = QuadElem;
    fn add(self, o: &QuadElem) -> QuadElem {
        same_field(self, o);
        QuadElem { d: self.d, a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl<'a> Sub<&'a QuadElem> for &'a QuadElem {
    type Output = QuadElem;
    fn sub(self, o: &QuadElem) -> QuadElem {
        same_field(self, o);
        QuadElem { d: self.d, a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl<'a> Mul<&'a QuadElem> for &'a QuadElem {
    type Output = QuadElem;
    fn mul(self, o: &QuadElem) -> QuadElem {
        same_field(self, o);
        let d = BigRational::from_integer(self.d.into());
        QuadElem {
            d: self.d,
            a: &self.a * &o.a + d * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

impl Neg for &QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        QuadElem { d: self.d, a: -self.a.clone(), b: -self.b.clone() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for QuadElem {
            type Output = QuadElem;
            fn $m(self, o: QuadElem) -> QuadElem {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        -&self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Split,
    Inert,
    Ramified,
}

/// Kronecker symbol (disc(Q(sqrt d)) | p) for a prime p.
pub fn kronecker(d: i64, p: &BigUint) -> i32 {
    if p == &BigUint::from(2u32) {
        return match d.rem_euclid(8) {
            1 => 1,
            5 => -1,
            _ => 0,
        };
    }
    jacobi(&BigInt::from(d), p)
}

/// How the rational prime `p` decomposes in Q(sqrt d).
pub fn splitting_type(p: &BigUint, d: i64) -> SplitKind {
    match kronecker(d, p) {
        1 => SplitKind::Split,
        -1 => SplitKind::Inert,
        _ => SplitKind::Ramified,
    }
}

/// A prime ideal of Q(sqrt d) above a rational prime.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadPrime {
    pub d: i64,
    #[serde(with = "bigser::nat")]
    pub p: BigUint,
    pub kind: SplitKind,
    /// For split primes: the residue r in [0, p) with r^2 = d mod p picked
    /// by the embedding sqrt(d) -> r (for p = 2, the 2-adic root = 1 mod 4).
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_nat")]
    pub root: Option<BigUint>,
    /// 0 for sqrt(d) -> r, 1 for sqrt(d) -> -r.
    pub conjugate_index: u8,
}

mod opt_nat {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};
    use std::str::FromStr;
    pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(n) => s.serialize_some(&n.to_string()),
            None => s.serialize_none(),
        }
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| BigUint::from_str(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

impl QuadPrime {
    /// All primes of Q(sqrt d) above `p`.
    pub fn above(p: &BigUint, d: i64) -> Result<Vec<QuadPrime>, QuadError> {
        check_field(d)?;
        if !super::primes::is_prime(p) {
            return Err(QuadError::NotPrime(p.clone()));
        }
        let kind = splitting_type(p, d);
        Ok(match kind {
            SplitKind::Split => {
                let r = if p == &BigUint::from(2u32) {
                    BigUint::one()
                } else {
                    let r = sqrt_mod_prime(&BigInt::from(d), p).expect("split prime has a root");
                    let other = p - &r;
                    r.min(other)
                };
                (0..2)
                    .map(|i| QuadPrime { d, p: p.clone(), kind, root: Some(r.clone()), conjugate_index: i })
                    .collect()
            }
            _ => vec![QuadPrime { d, p: p.clone(), kind, root: None, conjugate_index: 0 }],
        })
    }

    pub fn residue_degree(&self) -> u32 {
        if self.kind == SplitKind::Inert {
            2
        } else {
            1
        }
    }

    pub fn ramification_index(&self) -> u32 {
        if self.kind == SplitKind::Ramified {
            2
        } else {
            1
        }
    }

    /// The root of d modulo p^k, on this prime's embedding.
    pub fn root_mod(&self, k: u32) -> (BigInt, BigInt) {
        let r0 = BigInt::from(self.root.clone().expect("split prime"));
        let p = BigInt::from(self.p.clone());
        let d = BigInt::from(self.d);
        let modulus = p.pow(k);
        let r = if self.p == BigUint::from(2u32) {
            let mut r = BigInt::one();
            for i in 3..=k + 1 {
                let m = BigInt::from(2).pow(i + 1);
                if (&r * &r - &d).mod_floor(&m) != BigInt::zero() {
                    r += BigInt::from(2).pow(i - 1);
                }
            }
            r.mod_floor(&modulus)
        } else {
            let mut r = r0;
            let mut prec = p.clone();
            while prec < modulus {
                prec = (&prec * &prec).min(modulus.clone());
                let inv = (BigInt::from(2) * &r).modinv(&prec).expect("p odd, r unit");
                r = (&r - (&r * &r - &d) * inv).mod_floor(&prec);
            }
            r
        };
        let r = if self.conjugate_index == 1 { (-r).mod_floor(&modulus) } else { r };
        (r, modulus)
    }
}

/// Valuation of `a + b*sqrt(d)` (integers, not both zero) at `q`.
pub fn quad_valuation_parts(a: &BigInt, b: &BigInt, q: &QuadPrime) -> Result<i64, QuadError> {
    if a.is_zero() && b.is_zero() {
        return Err(QuadError::Zero);
    }
    let p = &q.p;
    let vp = |x: &BigInt| -> Option<u32> {
        if x.is_zero() {
            None
        } else {
            Some(valuation(&x.abs().to_biguint().unwrap(), p))
        }
    };
    let g = match (vp(a), vp(b)) {
        (Some(x), Some(y)) => x.min(y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => unreachable!(),
    };
    let pg = BigInt::from(p.clone()).pow(g);
    let (a, b) = (a / &pg, b / &pg);
    let norm = &a * &a - BigInt::from(q.d) * &b * &b;
    let vn = vp(&norm).expect("norm of a nonzero element is nonzero");
    let local = match q.kind {
        SplitKind::Inert => {
            debug_assert!(vn % 2 == 0);
            vn as i64 / 2
        }
        SplitKind::Ramified => vn as i64,
        SplitKind::Split => {
            let (r, modulus) = q.root_mod(vn + 2);
            let img = (&a + &b * r).mod_floor(&modulus);
            debug_assert!(!img.is_zero());
            vp(&img).map_or(vn as i64 + 2, |v| v as i64)
        }
    };
    Ok(local + (q.ramification_index() * g) as i64)
}

/// The valuation ord_q(x) of a nonzero element.
pub fn quad_valuation(x: &QuadElem, q: &QuadPrime) -> Result<i64, QuadError> {
    if x.d != q.d {
        return Err(QuadError::FieldMismatch(x.d, q.d));
    }
    if x.is_zero() {
        return Err(QuadError::Zero);
    }
    let l = x.a.denom().lcm(x.b.denom());
    let a = (&x.a * BigRational::from_integer(l.clone())).to_integer();
    let b = (&x.b * BigRational::from_integer(l.clone())).to_integer();
    let vl = valuation(&l.abs().to_biguint().unwrap(), &q.p) as i64;
    Ok(quad_valuation_parts(&a, &b, q)? - q.ramification_index() as i64 * vl)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: u64, d: i64) -> Vec<QuadPrime> {
        QuadPrime::above(&BigUint::from(p), d).unwrap()
    }

    #[test]
    fn splitting_examples() {
        assert_eq!(splitting_type(&BigUint::from(11u32), 5), SplitKind::Split);
        assert_eq!(q(11, 5)[0].root, Some(BigUint::from(4u32)));
        assert_eq!(splitting_type(&BigUint::from(3u32), 5), SplitKind::Inert);
        assert_eq!(splitting_type(&BigUint::from(5u32), 5), SplitKind::Ramified);
        // p = 2 via the fundamental discriminant
        assert_eq!(splitting_type(&BigUint::from(2u32), -7), SplitKind::Split);
        assert_eq!(splitting_type(&BigUint::from(2u32), 5), SplitKind::Inert);
        assert_eq!(splitting_type(&BigUint::from(2u32), 3), SplitKind::Ramified);
        assert_eq!(splitting_type(&BigUint::from(2u32), -1), SplitKind::Ramified);
    }

    #[test]
    fn brute_force_kronecker() {
        for &d in &[-1i64, 2, -2, 3, 5, -5, 7, -23, 13] {
            for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
                let kind = splitting_type(&BigUint::from(p), d);
                let dm = d.rem_euclid(p as i64) as u64;
                let expected = if dm == 0 {
                    SplitKind::Ramified
                } else if (1..p).any(|x| x * x % p == dm) {
                    SplitKind::Split
                } else {
                    SplitKind::Inert
                };
                assert_eq!(kind, expected, "p={p} d={d}");
            }
        }
    }

    #[test]
    fn valuation_examples() {
        let five = QuadElem::from_ints(5, 5, 0).unwrap();
        assert_eq!(quad_valuation(&five, &q(5, 5)[0]).unwrap(), 2);
        let three = QuadElem::from_ints(5, 3, 0).unwrap();
        assert_eq!(quad_valuation(&three, &q(3, 5)[0]).unwrap(), 1);
        let x = QuadElem::from_ints(5, 4, 1).unwrap();
        let v: Vec<i64> = q(11, 5).iter().map(|qq| quad_valuation(&x, qq).unwrap()).collect();
        assert_eq!(v.iter().sum::<i64>(), 1);
        assert!(v.contains(&0) && v.contains(&1));
        assert_eq!(quad_valuation(&QuadElem::from_ints(5, 0, 0).unwrap(), &q(5, 5)[0]), Err(QuadError::Zero));
    }

    #[test]
    fn valuation_at_two() {
        // -7 = 1 mod 8: 2 splits; (1 + sqrt(-7))/2 has norm 2
        let half = BigRational::new(1.into(), 2.into());
        let x = QuadElem::new(-7, half.clone(), half).unwrap();
        let v: Vec<i64> = q(2, -7).iter().map(|qq| quad_valuation(&x, qq).unwrap()).collect();
        assert_eq!(v.iter().sum::<i64>(), 1, "{v:?}");
        // sqrt(3) at the ramified prime above 2: (1 + sqrt 3) has norm -2
        let y = QuadElem::from_ints(3, 1, 1).unwrap();
        assert_eq!(quad_valuation(&y, &q(2, 3)[0]).unwrap(), 1);
    }

    #[test]
    fn field_ops_and_sqrt() {
        let x = QuadElem::from_ints(5, 4, 1).unwrap();
        assert_eq!(x.norm(), BigRational::from_integer(11.into()));
        let inv = x.inverse().unwrap();
        assert_eq!(&x * &inv, QuadElem::from_ints(5, 1, 0).unwrap());
        let sq = &x * &x;
        let r = sq.sqrt().unwrap();
        assert!(r == x || r == -&x);
        assert!(QuadElem::sqrt_d(5).unwrap().sqrt().is_none());
        assert!(QuadElem::from_ints(5, 5, 0).unwrap().sqrt().is_some());
        assert_eq!(QuadElem::new(4, BigRational::zero(), BigRational::zero()).unwrap_err(), QuadError::BadDiscriminant(4));
    }

    #[test]
    fn parsing() {
        let x = QuadElem::parse("1/2,1/2", 5).unwrap();
        assert!(x.is_integral());
        assert!(!QuadElem::parse("1/2", 5).unwrap().is_integral());
    }
}
