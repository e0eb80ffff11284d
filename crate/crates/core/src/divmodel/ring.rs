use crate::arith::{splitting_type, FactorSource, QuadElem, SplitKind};
use crate::bigser;
use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RingError {
    #[error("membership of {0} in W is undecided: it divides an excluded unfactored cofactor")]
    Undecided(BigUint),
    #[error("denominator {0} could not be fully factored")]
    Incomplete(BigUint),
    #[error("element belongs to a different field")]
    WrongField,
    #[error("invalid ring description: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "field", rename_all = "snake_case")]
pub enum BaseField {
    Rational,
    Quadratic { d: i64 },
}

/// Rule-based part of the inverted prime set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum PrimeRule {
    None,
    /// Primes with no degree-one factor in Q(sqrt d): the inert primes.
    NoDegreeOneQuadratic { d: i64 },
    /// Primes with no degree-one factor in the degree-p subfield of the
    /// q-th cyclotomic field: r != q whose order mod q does not divide
    /// (q-1)/p.
    NoDegreeOneCyclic { p: u64, q: u64 },
}

impl PrimeRule {
    pub fn holds(&self, r: &BigUint) -> bool {
        match self {
            PrimeRule::None => false,
            PrimeRule::NoDegreeOneQuadratic { d } => splitting_type(r, *d) == SplitKind::Inert,
            PrimeRule::NoDegreeOneCyclic { p, q } => {
                let qb = BigUint::from(*q);
                if r == &qb {
                    return false;
                }
                let rm = r % &qb;
                !rm.modpow(&BigUint::from((q - 1) / p), &qb).is_one()
            }
        }
    }
}

/// A big ring O_{K,W} with K = Q or a quadratic field; for a quadratic
/// base, W consists of all primes above the rational primes described here.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSpec {
    pub base: BaseField,
    #[serde(with = "bigser::nat_seq")]
    pub include: BTreeSet<BigUint>,
    pub rule: PrimeRule,
    #[serde(with = "bigser::nat_seq")]
    pub exclude: BTreeSet<BigUint>,
    /// The largest prime factor of each of these integers is excluded.
    #[serde(default, with = "bigser::nat_seq")]
    pub exclude_cofactors: Vec<BigUint>,
    /// Assertion that the bad primes of the working curve are included.
    pub bad_included: bool,
}

impl RingSpec {
    /// The ring of integers of Q (W empty).
    pub fn integers() -> Self {
        RingSpec {
            base: BaseField::Rational,
            include: BTreeSet::new(),
            rule: PrimeRule::None,
            exclude: BTreeSet::new(),
            exclude_cofactors: vec![],
            bad_included: false,
        }
    }

    pub fn rational(include: impl IntoIterator<Item = u64>, rule: PrimeRule) -> Self {
        RingSpec { include: include.into_iter().map(BigUint::from).collect(), rule, ..Self::integers() }
    }

    pub fn over_quadratic(mut self, d: i64) -> Self {
        self.base = BaseField::Quadratic { d };
        self
    }

    pub fn validate(&self) -> Result<(), RingError> {
        if let Some(p) = self.include.intersection(&self.exclude).next() {
            return Err(RingError::Invalid(format!("{p} is both included and excluded")));
        }
        if let PrimeRule::NoDegreeOneCyclic { p, q } = self.rule {
            if q % p != 1 {
                return Err(RingError::Invalid(format!("q = {q} is not 1 mod p = {p}")));
            }
        }
        Ok(())
    }

    /// Is the rational prime `p` in W?
    pub fn contains_prime(&self, p: &BigUint) -> Result<bool, RingError> {
        if self.exclude.contains(p) {
            return Ok(false);
        }
        let by_rule = self.include.contains(p) || self.rule.holds(p);
        if by_rule && self.exclude_cofactors.iter().any(|c| (c % p).is_zero()) {
            return Err(RingError::Undecided(p.clone()));
        }
        Ok(by_rule)
    }

    pub fn contains_u64(&self, p: u64) -> Result<bool, RingError> {
        self.contains_prime(&BigUint::from(p))
    }

    /// Splits `n` into (non-W part, W part). Needs a complete factorization.
    pub fn split_part(&self, n: &BigUint, source: &dyn FactorSource) -> Result<(BigUint, BigUint), RingError> {
        if n.is_zero() {
            return Err(RingError::Invalid("zero has no prime decomposition".into()));
        }
        let f = source.factor(n);
        if !f.complete {
            return Err(RingError::Incomplete(n.clone()));
        }
        let mut outside = BigUint::one();
        for (p, e) in &f.factors {
            if !self.contains_prime(p)? {
                outside *= p.pow(*e);
            }
        }
        let inside = n / &outside;
        Ok((outside, inside))
    }

    /// Removes the W primes that are cheap to identify (trial division by
    /// the listed and small primes); the rest is returned unchanged.
    pub fn strip_known(&self, n: &BigUint, extra: &[BigUint]) -> Result<BigUint, RingError> {
        let mut m = n.clone();
        for p in self.include.iter().chain(extra.iter()) {
            if self.contains_prime(p)? {
                while !m.is_zero() && (&m % p).is_zero() {
                    m /= p;
                }
            }
        }
        Ok(m)
    }

    /// `x in O_{Q,W}`.
    pub fn in_ring(&self, x: &BigRational, source: &dyn FactorSource) -> Result<bool, RingError> {
        let den = x.denom().abs().to_biguint().unwrap();
        if den.is_one() {
            return Ok(true);
        }
        Ok(self.split_part(&den, source)?.0.is_one())
    }

    /// `x in O_{M,W_M}` for M = Q(sqrt d): x is integral above every prime
    /// outside W iff its trace and norm are.
    pub fn in_ring_quadratic(&self, x: &QuadElem, source: &dyn FactorSource) -> Result<bool, RingError> {
        if let BaseField::Quadratic { d } = self.base {
            if d != x.d {
                return Err(RingError::WrongField);
            }
        }
        let tr = x.trace();
        let nm = x.norm();
        let den = tr.denom().lcm(nm.denom()).abs().to_biguint().unwrap();
        if den.is_one() {
            return Ok(true);
        }
        Ok(self.split_part(&den, source)?.0.is_one())
    }

    /// Primes <= bound that lie in W, for reporting.
    pub fn sample(&self, bound: u64) -> Result<Vec<u64>, RingError> {
        let mut out = vec![];
        for p in crate::arith::primes_up_to(bound) {
            if self.contains_u64(p)? {
                out.push(p);
            }
        }
        Ok(out)
    }

    pub fn include_u64(&self) -> Vec<u64> {
        self.include.iter().filter_map(|p| p.to_u64()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Factorizer;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn membership_examples() {
        let src = Factorizer::default();
        let w5 = RingSpec::rational([5], PrimeRule::None);
        assert!(w5.in_ring(&q(1, 5), &src).unwrap());
        let inert5 = RingSpec::rational([], PrimeRule::NoDegreeOneQuadratic { d: 5 });
        assert!(!inert5.in_ring(&q(1, 19), &src).unwrap());
        assert!(inert5.in_ring(&q(1, 3 * 7), &src).unwrap());
        assert!(inert5.in_ring(&q(7, 1), &src).unwrap());
        assert!(RingSpec::integers().in_ring(&q(7, 1), &src).unwrap());
    }

    #[test]
    fn cyclic_rule() {
        let r = PrimeRule::NoDegreeOneCyclic { p: 5, q: 11 };
        assert!(r.holds(&BigUint::from(3u32)));
        assert!(!r.holds(&BigUint::from(23u32))); // 23 = 1 mod 11
        assert!(!r.holds(&BigUint::from(11u32)));
    }

    #[test]
    fn exclusions_win() {
        let mut s = RingSpec::rational([2, 3], PrimeRule::NoDegreeOneQuadratic { d: -23 });
        assert!(s.contains_u64(5).unwrap());
        s.exclude.insert(BigUint::from(5u32));
        assert!(!s.contains_u64(5).unwrap());
        s.include.insert(BigUint::from(5u32));
        assert!(s.validate().is_err());
    }

    #[test]
    fn quadratic_membership() {
        let src = Factorizer::default();
        let z = RingSpec::integers().over_quadratic(5);
        let golden = QuadElem::parse("1/2,1/2", 5).unwrap();
        assert!(z.in_ring_quadratic(&golden, &src).unwrap());
        assert!(!z.in_ring_quadratic(&QuadElem::parse("1/2", 5).unwrap(), &src).unwrap());
        let w2 = RingSpec::rational([2], PrimeRule::None).over_quadratic(5);
        assert!(w2.in_ring_quadratic(&QuadElem::parse("1/2", 5).unwrap(), &src).unwrap());
    }
}
