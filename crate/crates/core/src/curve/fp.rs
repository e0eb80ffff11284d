use super::FieldElement;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// An element of the prime field F_p with a runtime modulus below 2^63.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fp {
    pub v: u64,
    pub p: u64,
}

impl Fp {
    pub fn new(v: i64, p: u64) -> Self {
        Fp { v: v.rem_euclid(p as i64) as u64, p }
    }

    pub fn from_bigint(v: &BigInt, p: u64) -> Self {
        let r = v.mod_floor(&BigInt::from(p)).to_u64().unwrap();
        Fp { v: r, p }
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp { v: 1 % self.p, p: self.p };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Legendre symbol of the value: 1, -1 or 0.
    pub fn legendre(self) -> i32 {
        if self.v == 0 {
            return 0;
        }
        if self.pow((self.p - 1) / 2).v == 1 {
            1
        } else {
            -1
        }
    }

    pub fn sqrt(self) -> Option<Self> {
        let r = crate::arith::sqrt_mod_prime(&BigInt::from(self.v), &self.p.into())?;
        Some(Fp { v: r.to_u64().unwrap(), p: self.p })
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, o: Fp) -> Fp {
        Fp { v: ((self.v as u128 + o.v as u128) % self.p as u128) as u64, p: self.p }
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, o: Fp) -> Fp {
        Fp { v: ((self.v as u128 + (self.p - o.v) as u128) % self.p as u128) as u64, p: self.p }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, o: Fp) -> Fp {
        Fp { v: ((self.v as u128 * o.v as u128) % self.p as u128) as u64, p: self.p }
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        Fp { v: (self.p - self.v) % self.p, p: self.p }
    }
}

impl FieldElement for Fp {
    fn is_zero_elem(&self) -> bool {
        self.v == 0
    }
    fn invert(&self) -> Option<Self> {
        if self.v == 0 {
            None
        } else {
            Some(self.pow(self.p - 2))
        }
    }
    fn lift(&self, k: i64) -> Self {
        Fp::new(k, self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_small() {
        let p = 13;
        for a in 0..p {
            let x = Fp::new(a as i64, p);
            assert_eq!(x + (-x), Fp::new(0, p));
            if a != 0 {
                assert_eq!(x * x.invert().unwrap(), Fp::new(1, p));
            }
            assert_eq!(x - x, Fp::new(0, p));
        }
        assert_eq!(Fp::new(-1, 7).v, 6);
        assert_eq!(Fp::new(2, 7).legendre(), 1);
        assert_eq!(Fp::new(3, 7).legendre(), -1);
    }
}
