//! Exact-arithmetic toolkit for elliptic divisibility sequences, Diophantine
//! models of the integers inside big rings, quantifier-counted formulas and
//! prime-density constructions.
//!
//! Everything is exact. Where a computation can only be carried out on a
//! finite range (factoring, unbounded quantifiers, natural densities) the
//! result carries a completeness flag or a depth stamp instead of an
//! unqualified claim.

pub mod arith;
pub mod bigser;
pub mod curve;
pub mod density;
pub mod divmodel;
pub mod eds;
pub mod logic;
pub mod report;

/// Arbitrary-precision signed integer.
pub type Int = num_bigint::BigInt;
/// Arbitrary-precision natural number.
pub type Nat = num_bigint::BigUint;
/// Exact rational number.
pub type Rational = num_rational::BigRational;
/// A point on a curve over the rationals.
pub type RationalPoint = curve::Point<Rational>;
/// A point on a curve reduced modulo a prime.
pub type FpPoint = curve::Point<curve::Fp>;
/// The bounded integer structure used by the multiplication-formula harness.
pub type SmallIntegers = logic::IntegerStructure<i64>;
/// The bounded integer structure with unbounded values.
pub type BigIntegers = logic::IntegerStructure<Int>;

pub use arith::{factor, FactorBudget, Factorization, Factorizer, QuadElem, QuadPrime, SplitKind};
pub use curve::{Curve, CurveContext, Point};
pub use eds::{EdsRecord, EdsTable};
pub use logic::{Formula, QuantifierProfile, Sort, Term};
