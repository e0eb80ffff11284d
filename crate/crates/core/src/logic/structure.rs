use crate::arith::{rational_sqrt, FactorSource, QuadElem};
use crate::divmodel::RingSpec;
use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, One, Signed, Zero};
use std::fmt::Debug;
use std::sync::Arc;

/// A ring interpretation for formulas together with a finite sweep domain.
///
/// Operations return `None` when the answer cannot be computed (overflow,
/// unfinished factorizations); the evaluator turns that into "unknown".
pub trait Structure {
    type Elem: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem>;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem>;
    fn scale(&self, k: i64, a: &Self::Elem) -> Option<Self::Elem>;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }
    /// `a | b` in the ring.
    fn divides(&self, a: &Self::Elem, b: &Self::Elem) -> Option<bool>;
    /// `b / a` when `a != 0` and the quotient lies in the ring.
    fn quotient(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Option<Self::Elem>>;
    fn has_pred(&self, name: &str, arity: usize) -> bool;
    fn pred(&self, name: &str, args: &[Self::Elem]) -> Option<bool>;
    /// Elements swept by unresolved quantifiers.
    fn domain(&self) -> &[Self::Elem];
    /// Sweep domain for variables guarded by `(pred base v)`.
    fn base_domain(&self) -> &[Self::Elem] {
        self.domain()
    }
    /// A generator of the ideal of common multiples, when computable.
    fn lcm(&self, _a: &Self::Elem, _b: &Self::Elem) -> Option<Self::Elem> {
        None
    }
    /// All associates of `a`, when the unit group is finite.
    fn associates(&self, _a: &Self::Elem) -> Option<Vec<Self::Elem>> {
        None
    }
    /// `Some(Some(r))` with `r^2 = a`, `Some(None)` if `a` is not a square.
    fn sqrt(&self, _a: &Self::Elem) -> Option<Option<Self::Elem>> {
        None
    }
    /// Base-field elements `x, y` with `cx*x + cy*y = rhs`, if the system
    /// has a unique solution over the base field.
    fn solve_base_pair(
        &self,
        _cx: &Self::Elem,
        _cy: &Self::Elem,
        _rhs: &Self::Elem,
    ) -> Option<Option<(Self::Elem, Self::Elem)>> {
        None
    }
}

pub trait IntegerLike:
    Integer + Signed + Roots + Clone + Debug + CheckedAdd + CheckedSub + CheckedMul + FromPrimitive
{
}

impl<T> IntegerLike for T where
    T: Integer + Signed + Roots + Clone + Debug + CheckedAdd + CheckedSub + CheckedMul + FromPrimitive
{
}

/// The integers with sweeps over `[-bound, bound]`.
#[derive(Debug, Clone)]
pub struct IntegerStructure<T> {
    pub bound: i64,
    domain: Vec<T>,
}

impl<T: IntegerLike> IntegerStructure<T> {
    pub fn new(bound: i64) -> Self {
        let domain = (-bound..=bound).filter_map(T::from_i64).collect();
        IntegerStructure { bound, domain }
    }
}

impl<T: IntegerLike> Structure for IntegerStructure<T> {
    type Elem = T;

    fn zero(&self) -> T {
        T::zero()
    }
    fn one(&self) -> T {
        T::one()
    }
    fn add(&self, a: &T, b: &T) -> Option<T> {
        a.checked_add(b)
    }
    fn sub(&self, a: &T, b: &T) -> Option<T> {
        a.checked_sub(b)
    }
    fn scale(&self, k: i64, a: &T) -> Option<T> {
        T::from_i64(k)?.checked_mul(a)
    }
    fn mul(&self, a: &T, b: &T) -> Option<T> {
        a.checked_mul(b)
    }
    fn is_zero(&self, a: &T) -> bool {
        a.is_zero()
    }
    fn divides(&self, a: &T, b: &T) -> Option<bool> {
        Some(if a.is_zero() { b.is_zero() } else { b.is_multiple_of(a) })
    }
    fn quotient(&self, a: &T, b: &T) -> Option<Option<T>> {
        if a.is_zero() {
            return None;
        }
        Some(if b.is_multiple_of(a) { Some(b.div_floor(a)) } else { None })
    }
    fn has_pred(&self, name: &str, arity: usize) -> bool {
        matches!(name, "nonsq" | "base") && arity == 1
    }
    fn pred(&self, name: &str, args: &[T]) -> Option<bool> {
        match (name, args) {
            ("base", [_]) => Some(true),
            ("nonsq", [x]) => Some(self.sqrt(x)?.is_none()),
            _ => None,
        }
    }
    fn domain(&self) -> &[T] {
        &self.domain
    }
    fn lcm(&self, a: &T, b: &T) -> Option<T> {
        if a.is_zero() || b.is_zero() {
            return Some(T::zero());
        }
        (a.abs() / a.gcd(b)).checked_mul(&b.abs())
    }
    fn associates(&self, a: &T) -> Option<Vec<T>> {
        Some(if a.is_zero() { vec![a.clone()] } else { vec![a.abs(), -a.abs()] })
    }
    fn sqrt(&self, a: &T) -> Option<Option<T>> {
        if a.is_negative() {
            return Some(None);
        }
        let r = a.sqrt();
        Some(if r.checked_mul(&r).as_ref() == Some(a) { Some(r) } else { None })
    }
}

fn qq(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// The ring O_{Q,W}, swept over fractions with bounded numerator and
/// W-supported bounded denominator.
#[derive(Clone)]
pub struct RationalRing {
    pub spec: RingSpec,
    source: Arc<dyn FactorSource>,
    domain: Vec<BigRational>,
}

impl RationalRing {
    pub fn truncated(spec: RingSpec, source: Arc<dyn FactorSource>, num_bound: i64, den_bound: u64) -> Self {
        let mut domain = vec![];
        for den in 1..=den_bound.max(1) {
            let db = BigRational::from_integer(BigInt::from(den));
            if den > 1 && spec.in_ring(&db.recip(), source.as_ref()) != Ok(true) {
                continue;
            }
            for num in -num_bound..=num_bound {
                if num.gcd(&(den as i64)) == 1 || (num == 0 && den == 1) {
                    domain.push(BigRational::new(BigInt::from(num), BigInt::from(den)));
                }
            }
        }
        RationalRing { spec, source, domain }
    }

    pub fn contains(&self, x: &BigRational) -> Option<bool> {
        self.spec.in_ring(x, self.source.as_ref()).ok()
    }
}

impl Structure for RationalRing {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> Option<BigRational> {
        Some(a + b)
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> Option<BigRational> {
        Some(a - b)
    }
    fn scale(&self, k: i64, a: &BigRational) -> Option<BigRational> {
        Some(qq(k) * a)
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> Option<BigRational> {
        Some(a * b)
    }
    fn divides(&self, a: &BigRational, b: &BigRational) -> Option<bool> {
        if a.is_zero() {
            return Some(b.is_zero());
        }
        self.contains(&(b / a))
    }
    fn quotient(&self, a: &BigRational, b: &BigRational) -> Option<Option<BigRational>> {
        if a.is_zero() {
            return None;
        }
        let q = b / a;
        Some(if self.contains(&q)? { Some(q) } else { None })
    }
    fn has_pred(&self, name: &str, arity: usize) -> bool {
        matches!(name, "nonsq" | "base") && arity == 1
    }
    fn pred(&self, name: &str, args: &[BigRational]) -> Option<bool> {
        match (name, args) {
            ("base", [_]) => Some(true),
            ("nonsq", [x]) => Some(rational_sqrt(x).is_none()),
            _ => None,
        }
    }
    fn domain(&self) -> &[BigRational] {
        &self.domain
    }
    fn sqrt(&self, a: &BigRational) -> Option<Option<BigRational>> {
        Some(rational_sqrt(a))
    }
}

/// The ring O_{M,W_M} for M = Q(sqrt d), where W_M consists of the primes
/// above the rational primes of `spec`. `base` is the predicate for
/// membership in O_{Q,W}.
#[derive(Clone)]
pub struct QuadRing {
    pub d: i64,
    pub spec: RingSpec,
    source: Arc<dyn FactorSource>,
    domain: Vec<QuadElem>,
    base_domain: Vec<QuadElem>,
}

impl QuadRing {
    /// `domain` and `base_domain` are the sweep sets for unguarded and
    /// `base`-guarded variables.
    pub fn new(
        d: i64,
        spec: RingSpec,
        source: Arc<dyn FactorSource>,
        domain: Vec<QuadElem>,
        base_domain: Vec<QuadElem>,
    ) -> Self {
        QuadRing { d, spec, source, domain, base_domain }
    }

    pub fn contains(&self, x: &QuadElem) -> Option<bool> {
        self.spec.in_ring_quadratic(x, self.source.as_ref()).ok()
    }

    pub fn elem(&self, a: BigRational, b: BigRational) -> QuadElem {
        QuadElem { d: self.d, a, b }
    }
}

impl Structure for QuadRing {
    type Elem = QuadElem;

    fn zero(&self) -> QuadElem {
        self.elem(BigRational::zero(), BigRational::zero())
    }
    fn one(&self) -> QuadElem {
        self.elem(BigRational::one(), BigRational::zero())
    }
    fn add(&self, a: &QuadElem, b: &QuadElem) -> Option<QuadElem> {
        Some(a + b)
    }
    fn sub(&self, a: &QuadElem, b: &QuadElem) -> Option<QuadElem> {
        Some(a - b)
    }
    fn scale(&self, k: i64, a: &QuadElem) -> Option<QuadElem> {
        Some(a.scale(&qq(k)))
    }
    fn mul(&self, a: &QuadElem, b: &QuadElem) -> Option<QuadElem> {
        Some(a * b)
    }
    fn is_zero(&self, a: &QuadElem) -> bool {
        a.is_zero()
    }
    fn divides(&self, a: &QuadElem, b: &QuadElem) -> Option<bool> {
        if a.is_zero() {
            return Some(b.is_zero());
        }
        self.contains(&(b * &a.inverse()?))
    }
    fn quotient(&self, a: &QuadElem, b: &QuadElem) -> Option<Option<QuadElem>> {
        let q = b * &a.inverse()?;
        Some(if self.contains(&q)? { Some(q) } else { None })
    }
    fn has_pred(&self, name: &str, arity: usize) -> bool {
        matches!(name, "nonsq" | "base") && arity == 1
    }
    fn pred(&self, name: &str, args: &[QuadElem]) -> Option<bool> {
        match (name, args) {
            ("base", [x]) => {
                if !x.is_rational() {
                    return Some(false);
                }
                self.spec.in_ring(&x.a, self.source.as_ref()).ok()
            }
            ("nonsq", [x]) => Some(x.sqrt().is_none()),
            _ => None,
        }
    }
    fn domain(&self) -> &[QuadElem] {
        &self.domain
    }
    fn base_domain(&self) -> &[QuadElem] {
        &self.base_domain
    }
    fn sqrt(&self, a: &QuadElem) -> Option<Option<QuadElem>> {
        Some(a.sqrt())
    }
    fn solve_base_pair(&self, cx: &QuadElem, cy: &QuadElem, rhs: &QuadElem) -> Option<Option<(QuadElem, QuadElem)>> {
        // rational parts and sqrt(d) parts give a 2x2 system over Q
        let det = &cx.a * &cy.b - &cy.a * &cx.b;
        if det.is_zero() {
            return None;
        }
        let x = (&rhs.a * &cy.b - &cy.a * &rhs.b) / &det;
        let y = (&cx.a * &rhs.b - &rhs.a * &cx.b) / &det;
        let zero = BigRational::zero();
        Some(Some((self.elem(x, zero.clone()), self.elem(y, zero))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Factorizer;
    use crate::divmodel::PrimeRule;

    #[test]
    fn integer_ops() {
        let z = IntegerStructure::<i64>::new(3);
        assert_eq!(z.domain().len(), 7);
        assert_eq!(z.divides(&2, &6), Some(true));
        assert_eq!(z.divides(&0, &0), Some(true));
        assert_eq!(z.divides(&0, &3), Some(false));
        assert_eq!(z.lcm(&-4, &6), Some(12));
        assert_eq!(z.sqrt(&49), Some(Some(7)));
        assert_eq!(z.sqrt(&2), Some(None));
        assert_eq!(z.add(&i64::MAX, &1), None);
        assert_eq!(z.quotient(&-3, &9), Some(Some(-3)));
    }

    #[test]
    fn rational_ring_truncation() {
        let spec = RingSpec::rational([2], PrimeRule::None);
        let r = RationalRing::truncated(spec, Arc::new(Factorizer::default()), 1, 4);
        // 0, +-1, +-1/2, +-1/4
        assert_eq!(r.domain().len(), 7);
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(r.divides(&BigRational::from_integer(4.into()), &half), Some(true));
        assert_eq!(r.divides(&BigRational::from_integer(3.into()), &half), Some(false));
    }

    #[test]
    fn quad_ring_coordinates() {
        let q = QuadRing::new(5, RingSpec::integers().over_quadratic(5), Arc::new(Factorizer::default()), vec![], vec![]);
        let alpha = QuadElem::sqrt_d(5).unwrap();
        let w = QuadElem::from_ints(5, 10, -10).unwrap();
        let (x, y) = q.solve_base_pair(&q.one(), &alpha, &w).unwrap().unwrap();
        assert_eq!((x, y), (QuadElem::from_ints(5, 10, 0).unwrap(), QuadElem::from_ints(5, -10, 0).unwrap()));
        let golden = QuadElem::new(5, BigRational::new(1.into(), 2.into()), BigRational::new(1.into(), 2.into())).unwrap();
        assert_eq!(q.pred("base", std::slice::from_ref(&golden)), Some(false));
        assert_eq!(q.divides(&golden, &q.one()), Some(true));
        assert_eq!(q.divides(&QuadElem::from_ints(5, 2, 0).unwrap(), &golden), Some(false));
    }
}
