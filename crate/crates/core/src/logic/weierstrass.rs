use super::ast::{Formula, Term};
use crate::curve::Curve;
use num_traits::ToPrimitive;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error("curve coefficient {0} does not fit a formula literal")]
    CoefficientTooLarge(String),
}

fn v(name: &str) -> Term {
    Term::var(name)
}

fn pow(t: &Term, k: u32) -> Term {
    (1..k).fold(t.clone(), |acc, _| Term::mul(acc, t.clone()))
}

fn prod(ts: Vec<Term>) -> Term {
    ts.into_iter().reduce(Term::mul).unwrap_or(Term::One)
}

/// Quantification over points `(x/z, y/z)` of the curve with two universal
/// quantifiers. Returns the sentence `forall x z (matrix)` and its matrix
///
/// `(z != 0 and exists y: x^3 + a x z^2 + b z^3 = y^2 z)
///  or nonsq(x^3 z^3 + a x z^5 + b z^6) or z = 0`.
///
/// `nonsq` is decided semantically by exact square testing.
pub fn weierstrass_quantifier_rewrite(curve: &Curve) -> Result<(Formula, Formula), RewriteError> {
    weierstrass_rewrite_with_body(curve, None)
}

/// As [`weierstrass_quantifier_rewrite`], with `body` (free in x, y, z)
/// asserted alongside the curve equation.
pub fn weierstrass_rewrite_with_body(
    curve: &Curve,
    body: Option<&Formula>,
) -> Result<(Formula, Formula), RewriteError> {
    let lit = |c: &num_bigint::BigInt| c.to_i64().ok_or_else(|| RewriteError::CoefficientTooLarge(c.to_string()));
    let (a, b) = (lit(&curve.a)?, lit(&curve.b)?);
    let (x, y, z) = (v("x"), v("y"), v("z"));
    let cubic = Term::add(
        Term::add(pow(&x, 3), Term::scale(a, prod(vec![x.clone(), z.clone(), z.clone()]))),
        Term::scale(b, pow(&z, 3)),
    );
    let mut inner = vec![Formula::eq(cubic, prod(vec![y.clone(), y.clone(), z.clone()]))];
    if let Some(f) = body {
        inner.push(f.clone());
    }
    let inner = if inner.len() == 1 { inner.pop().unwrap() } else { Formula::And(inner) };
    let on_curve = Formula::And(vec![Formula::neq(z.clone(), Term::Zero), Formula::exists(&["y"], inner)]);
    let sextic = Term::add(
        Term::add(
            Term::mul(pow(&x, 3), pow(&z, 3)),
            Term::scale(a, Term::mul(x.clone(), pow(&z, 5))),
        ),
        Term::scale(b, pow(&z, 6)),
    );
    let matrix = Formula::Or(vec![
        on_curve,
        Formula::pred("nonsq", vec![sextic]),
        Formula::eq(z, Term::Zero),
    ])
    .alpha_normalize();
    let sentence = Formula::forall(&["x", "z"], matrix.clone()).alpha_normalize();
    Ok((sentence, matrix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Factorizer;
    use crate::divmodel::{PrimeRule, RingSpec};
    use crate::logic::{eval_formula, profile, EvalMode, Formula, RationalRing, Truth};
    use num_rational::BigRational;
    use std::sync::Arc;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn two_universals() {
        let (sentence, matrix) = weierstrass_quantifier_rewrite(&Curve::new(0, -2).unwrap()).unwrap();
        assert_eq!(profile(&sentence).universal_count, 2);
        assert_eq!(profile(&matrix).universal_count, 0);
    }

    #[test]
    fn matrix_semantics_on_reference_curve() {
        let (_, m) = weierstrass_quantifier_rewrite(&Curve::new(0, -2).unwrap()).unwrap();
        let Formula::Or(parts) = &m else { panic!() };
        let ring = RationalRing::truncated(RingSpec::rational([2, 5], PrimeRule::None), Arc::new(Factorizer::default()), 3, 4);
        let at = |f: &Formula, x: BigRational, z: BigRational| {
            eval_formula(&ring, EvalMode::Exact, f, &[("x", x), ("z", z)]).unwrap()
        };
        // (3, 5) on y^2 = x^3 - 2 with z = 1
        assert_eq!(at(&parts[0], q(3, 1), q(1, 1)), Truth::True);
        // 2P = (129/100, -383/1000): z = 10 gives y = -383/100, a unit multiple in O_{Q,{2,5}}
        assert_eq!(at(&parts[0], q(129, 10), q(10, 1)), Truth::True);
        // x = 2: 8 - 2 = 6 is not a square
        assert_eq!(at(&parts[0], q(2, 1), q(1, 1)), Truth::False);
        assert_eq!(at(&parts[1], q(2, 1), q(1, 1)), Truth::True);
        assert_eq!(at(&m, q(2, 1), q(1, 1)), Truth::True);
        // z = 0 only through the last disjunct
        assert_eq!(at(&parts[0], q(1, 1), q(0, 1)), Truth::False);
        assert_eq!(at(&m, q(1, 1), q(0, 1)), Truth::True);
    }
}
