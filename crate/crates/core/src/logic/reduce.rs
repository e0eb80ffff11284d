use super::ast::{fresh_name, Formula, Term};
use super::structure::QuadRing;
use crate::arith::{FactorSource, QuadElem};
use crate::divmodel::{RingError, RingSpec};
use num_bigint::BigUint;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReduceError {
    #[error("{0} universal quantifiers exceed the degree 2 of the extension")]
    TooManyUniversals(usize),
    #[error("formula is not of the form exists-forall-exists with a quantifier-free matrix: {0}")]
    Shape(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A formula `Gamma(var)` defining the base ring inside the extension ring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gamma {
    pub formula: Formula,
    pub var: String,
}

impl Gamma {
    /// The semantic stand-in `(pred base V)`.
    pub fn base_predicate() -> Self {
        Gamma { formula: Formula::pred("base", vec![Term::var("V")]), var: "V".into() }
    }

    pub fn at(&self, v: &str) -> Formula {
        self.formula.substitute(&self.var, &Term::var(v))
    }
}

/// The generator alpha = sqrt(d) of M = Q(sqrt d), the discriminant of its
/// power basis, and representatives of the nonzero residues modulo that
/// discriminant in the base ring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaData {
    pub d: i64,
    pub disc: i64,
    pub residues: Vec<i64>,
}

impl AlphaData {
    /// Power basis {1, sqrt d} has discriminant 4d; primes of W are units
    /// in O_{Q,W}, so residues are taken modulo the part of 4d outside W.
    pub fn for_sqrt(d: i64, spec: &RingSpec) -> Result<Self, RingError> {
        let disc = 4 * d;
        let mut modulus = disc.unsigned_abs();
        let mut m = modulus;
        let mut p = 2;
        while m > 1 {
            if m.is_multiple_of(p) {
                while m.is_multiple_of(p) {
                    m /= p;
                }
                if spec.contains_prime(&BigUint::from(p))? {
                    while modulus.is_multiple_of(p) {
                        modulus /= p;
                    }
                }
            }
            p += 1;
        }
        Ok(AlphaData { d, disc, residues: (1..modulus as i64).collect() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduced {
    pub formula: Formula,
    /// Free variable to be bound to alpha when evaluating.
    pub alpha: String,
    pub w: String,
    pub coordinates: Vec<String>,
}

fn pick(base: &str, used: &mut BTreeSet<String>) -> String {
    if used.insert(base.to_string()) {
        base.to_string()
    } else {
        fresh_name(base, used)
    }
}

fn quantifier_free(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) => true,
        Formula::And(fs) | Formula::Or(fs) => fs.iter().all(quantifier_free),
        Formula::Not(g) => quantifier_free(g),
        Formula::Exists(..) | Formula::Forall(..) => false,
    }
}

fn peel_exists(f: &Formula, out: &mut Vec<String>) -> Formula {
    match f {
        Formula::Exists(vs, g) => {
            out.extend(vs.iter().cloned());
            peel_exists(g, out)
        }
        _ => f.clone(),
    }
}

fn peel_forall(f: &Formula, out: &mut Vec<String>) -> Formula {
    match f {
        Formula::Forall(vs, g) => {
            out.extend(vs.iter().cloned());
            peel_forall(g, out)
        }
        _ => f.clone(),
    }
}

fn and(mut fs: Vec<Formula>) -> Formula {
    if fs.len() == 1 {
        fs.pop().unwrap()
    } else {
        Formula::And(fs)
    }
}

/// Packs up to two universally quantified base-ring variables into one
/// universal variable `w` over the quadratic extension, using the dichotomy
/// `w = x0 + x1 alpha` or `disc * w = x0 + x1 alpha` with some `x_i` not
/// divisible by `disc`.
///
/// The Gamma guards on the free variables and the outer existential block
/// sit in front of `forall w`; this is equivalent because the second
/// disjunct alone never holds for every `w`.
pub fn reduce_quantifiers(f: &Formula, gamma: &Gamma, alpha: &AlphaData) -> Result<Reduced, ReduceError> {
    let f = f.alpha_normalize();
    let mut outer = vec![];
    let rest = peel_exists(&f, &mut outer);
    let mut xs = vec![];
    let rest = peel_forall(&rest, &mut xs);
    let mut ys = vec![];
    let matrix = peel_exists(&rest, &mut ys);
    if xs.is_empty() {
        // no universal block: the leading existentials are the inner ones
        ys = outer.drain(..).chain(ys).collect();
    }
    if !quantifier_free(&matrix) {
        return Err(ReduceError::Shape(matrix.to_string()));
    }
    if xs.len() > 2 {
        return Err(ReduceError::TooManyUniversals(xs.len()));
    }
    let mut used = f.all_names();
    used.extend(gamma.formula.all_names());
    let alpha_v = pick("alpha", &mut used);
    let w = pick("w", &mut used);
    let t = pick("t", &mut used);
    let mut coords = xs.clone();
    while coords.len() < 2 {
        let c = pick(&format!("x{}", coords.len()), &mut used);
        coords.push(c);
    }
    let comb = Term::add(Term::var(&coords[0]), Term::mul(Term::var(&coords[1]), Term::var(&alpha_v)));
    let f3: Vec<Formula> = coords.iter().map(|c| gamma.at(c)).collect();
    let f4: Vec<Formula> = ys.iter().map(|y| gamma.at(y)).collect();

    let mut first = f3.clone();
    first.extend(f4);
    first.push(Formula::eq(Term::var(&w), comb.clone()));
    first.push(matrix);

    let mut h = vec![];
    for c in &coords {
        for a in &alpha.residues {
            h.push(Formula::exists(
                &[t.as_str()],
                Formula::And(vec![
                    gamma.at(&t),
                    Formula::eq(Term::sub(Term::var(c), Term::num(*a)), Term::scale(alpha.disc, Term::var(&t))),
                ]),
            ));
        }
    }
    let mut second = vec![Formula::eq(Term::scale(alpha.disc, Term::var(&w)), comb)];
    second.extend(f3);
    second.push(Formula::Or(h));

    let mut inner_vars: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
    inner_vars.extend(ys.iter().map(|s| s.as_str()));
    let inner = Formula::exists(&inner_vars, Formula::Or(vec![Formula::And(first), Formula::And(second)]));
    let mut body = vec![];
    body.extend(outer.iter().map(|u| gamma.at(u)));
    body.push(Formula::forall(&[w.as_str()], inner));
    let mut out = vec![];
    out.extend(f.free_vars().iter().map(|v| gamma.at(v)));
    if outer.is_empty() {
        out.extend(body);
    } else {
        let us: Vec<&str> = outer.iter().map(|s| s.as_str()).collect();
        out.push(Formula::exists(&us, and(body)));
    }
    Ok(Reduced { formula: and(out).alpha_normalize(), alpha: alpha_v, w, coordinates: coords })
}

/// Finite stand-ins for O_Q and O_M with M = Q(sqrt d): rationals in
/// [-bound, bound] for the base, and for the extension the power-basis
/// combinations of those plus the elements (a + b sqrt d)/2, a, b = +-1,
/// when d = 1 mod 4.
pub fn truncated_rings(d: i64, spec: RingSpec, source: Arc<dyn FactorSource>, bound: i64) -> (QuadRing, QuadRing) {
    let e = |a: BigRational, b: BigRational| QuadElem { d, a, b };
    let int = |k: i64| BigRational::from_integer(k.into());
    let base: Vec<QuadElem> = (-bound..=bound).map(|k| e(int(k), int(0))).collect();
    let mut ext = vec![];
    for a in -bound..=bound {
        for b in -bound..=bound {
            ext.push(e(int(a), int(b)));
        }
    }
    if d.rem_euclid(4) == 1 {
        let half = |k: i64| BigRational::new(k.into(), 2.into());
        for a in [-1, 1] {
            for b in [-1, 1] {
                ext.push(e(half(a), half(b)));
            }
        }
    }
    let spec = spec.over_quadratic(d);
    let k = QuadRing::new(d, spec.clone(), source.clone(), base.clone(), base.clone());
    let m = QuadRing::new(d, spec, source, ext, base);
    (k, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Factorizer;
    use crate::logic::{parse, profile, EvalMode, Evaluator, Sort, Structure, Truth};

    fn alpha5() -> AlphaData {
        AlphaData::for_sqrt(5, &RingSpec::integers()).unwrap()
    }

    #[test]
    fn residues_skip_inverted_primes() {
        assert_eq!(alpha5().disc, 20);
        assert_eq!(alpha5().residues.len(), 19);
        let w2 = RingSpec::rational([2], crate::divmodel::PrimeRule::None);
        assert_eq!(AlphaData::for_sqrt(5, &w2).unwrap().residues, vec![1, 2, 3, 4]);
    }

    #[test]
    fn profiles_and_errors() {
        let g = Gamma::base_predicate();
        let two = parse("(E (u) (A (a b) (E (y) (or (= y (+ a b)) (div u y)))))", Sort::Ring).unwrap();
        let r = reduce_quantifiers(&two, &g, &alpha5()).unwrap();
        assert_eq!(profile(&r.formula).universal_count, 1);
        assert_eq!(r.coordinates, vec!["a", "b"]);
        let none = parse("(E (y) (= y (+ T 1)))", Sort::Ring).unwrap();
        assert_eq!(profile(&reduce_quantifiers(&none, &g, &alpha5()).unwrap().formula).universal_count, 1);
        let three = parse("(A (a b c) (= a b))", Sort::Ring).unwrap();
        assert_eq!(reduce_quantifiers(&three, &g, &alpha5()), Err(ReduceError::TooManyUniversals(3)));
        let bad = parse("(A (a) (E (y) (A (z) (= y z))))", Sort::Ring).unwrap();
        assert!(matches!(reduce_quantifiers(&bad, &g, &alpha5()), Err(ReduceError::Shape(_))));
    }

    #[test]
    fn semantics_agree_on_truncated_rings() {
        let (k, m) = truncated_rings(5, RingSpec::integers(), Arc::new(Factorizer::default()), 2);
        let alpha = QuadElem::sqrt_d(5).unwrap();
        let cases = [
            "(A (a) (E (y) (= y (+ a T))))",
            "(A (a b) (E (y) (and (div y (+ a b)) (!= y 0))))",
            "(E (u) (A (a b) (or (div u (- a b)) (= a T))))",
            "(A (a) (div a T))",
            "(E (y) (= (* 2 y) T))",
        ];
        for src in cases {
            let f = parse(src, Sort::Ring).unwrap();
            let r = reduce_quantifiers(&f, &Gamma::base_predicate(), &alpha5()).unwrap();
            let ek = Evaluator::new(&k, EvalMode::Truncated, &f).unwrap();
            let em = Evaluator::new(&m, EvalMode::Truncated, &r.formula).unwrap();
            for t in k.base_domain().to_vec() {
                let want = ek.eval(&[("T", t.clone())]).unwrap();
                let got = em.eval(&[("T", t.clone()), (r.alpha.as_str(), alpha.clone())]).unwrap();
                assert_ne!(want, Truth::Unknown);
                assert_eq!(want, got, "{src} at T = {t}");
            }
        }
    }
}
