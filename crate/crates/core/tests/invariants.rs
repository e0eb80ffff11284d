mod common;

use definability::arith::{factor, quad_valuation, rational_valuation, FactorBudget, QuadElem, QuadPrime};
use definability::curve::{point_from_ints, Curve};
use definability::divmodel::{model_divides, PrimeRule, RingSpec};
use definability::eds::{reference_table, ConstantsConfig, EdsConstants};
use definability::logic::{
    parse, profile, reduce_quantifiers, AlphaData, EvalMode, Gamma, IntegerStructure, Sort, Truth,
    eval_formula, Formula,
};
use num_bigint::BigUint;
use num_rational::BigRational;
use proptest::prelude::*;

fn quad(d: i64, a: (i64, i64), b: (i64, i64)) -> QuadElem {
    QuadElem::new(d, BigRational::new(a.0.into(), a.1.into()), BigRational::new(b.0.into(), b.1.into())).unwrap()
}

fn small_prime() -> impl Strategy<Value = u64> {
    proptest::sample::select(vec![2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47])
}

fn field() -> impl Strategy<Value = i64> {
    proptest::sample::select(vec![-1i64, 2, -2, 5, -5, 3])
}

fn coord() -> impl Strategy<Value = (i64, i64)> {
    (-60i64..=60, 1i64..=30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn factoring_is_idempotent(a in 1u64..1_000_000, b in 1u64..1_000_000, c in 1u64..5_000) {
        let n = BigUint::from(a) * BigUint::from(b) * BigUint::from(c);
        let budget = FactorBudget::default();
        let f = factor(&n, &budget);
        prop_assert!(f.complete);
        let rebuilt = f.factors.iter().fold(BigUint::from(1u32), |acc, (p, e)| acc * p.pow(*e));
        prop_assert_eq!(&rebuilt, &n);
        prop_assert_eq!(factor(&rebuilt, &budget), f);
    }

    #[test]
    fn curve_addition_is_associative(x0 in -6i64..=6, y0 in 1i64..=8, a in -6i64..=6) {
        let b = y0 * y0 - x0.pow(3) - a * x0;
        prop_assume!(Curve::new(a, b).is_ok());
        let c = Curve::new(a, b).unwrap();
        let p = point_from_ints(x0, y0);
        let p2 = c.add(&p, &p).unwrap();
        prop_assert_eq!(c.add(&p2, &p).unwrap(), c.add(&p, &p2).unwrap());
        let p3 = c.add(&p2, &p).unwrap();
        let left = c.add(&c.add(&p, &p2).unwrap(), &p3).unwrap();
        let right = c.add(&p, &c.add(&p2, &p3).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn valuations_are_additive(d in field(), p in small_prime(), xa in coord(), xb in coord(), ya in coord(), yb in coord()) {
        let x = quad(d, xa, xb);
        let y = quad(d, ya, yb);
        prop_assume!(!x.is_zero() && !y.is_zero());
        let xy = &x * &y;
        for q in QuadPrime::above(&BigUint::from(p), d).unwrap() {
            prop_assert_eq!(
                quad_valuation(&xy, &q).unwrap(),
                quad_valuation(&x, &q).unwrap() + quad_valuation(&y, &q).unwrap()
            );
        }
    }

    #[test]
    fn norm_valuation_is_sum_over_primes_above(d in field(), p in small_prime(), xa in coord(), xb in coord()) {
        let x = quad(d, xa, xb);
        prop_assume!(!x.is_zero());
        let pb = BigUint::from(p);
        let total: i64 = QuadPrime::above(&pb, d)
            .unwrap()
            .iter()
            .map(|q| q.residue_degree() as i64 * quad_valuation(&x, q).unwrap())
            .sum();
        prop_assert_eq!(rational_valuation(&x.norm(), &pb).unwrap(), total);
    }

    #[test]
    fn parse_inverts_print(f in common::any_formula()) {
        let text = f.to_string();
        let back = parse(&text, Sort::Ring).unwrap();
        prop_assert_eq!(&back, &f.alpha_normalize());
        prop_assert_eq!(back.to_string(), f.alpha_normalize().to_string());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn reduction_leaves_one_universal(f in common::reducible_formula(), d in proptest::sample::select(vec![2i64, 3, 5, -1])) {
        let alpha = AlphaData::for_sqrt(d, &RingSpec::integers()).unwrap();
        let r = reduce_quantifiers(&f, &Gamma::base_predicate(), &alpha).unwrap();
        prop_assert_eq!(profile(&r.formula).universal_count, 1);
    }

    #[test]
    fn exact_answers_agree_with_wide_sweeps(
        m in common::atom(vec!["x".into(), "y".into()]),
        n in common::atom(vec!["x".into(), "y".into()]),
        ex in any::<bool>(),
        x in -6i64..=6,
    ) {
        let body = Formula::Or(vec![m, n]);
        let f = if ex { Formula::exists(&["y"], body) } else { Formula::forall(&["y"], body) };
        let small = IntegerStructure::<i64>::new(8);
        let wide = IntegerStructure::<i64>::new(300);
        let exact = eval_formula(&small, EvalMode::Exact, &f, &[("x", x)]).unwrap();
        let sweep = eval_formula(&wide, EvalMode::Sweep, &f, &[("x", x)]).unwrap();
        // a witness or counterexample found by the sweep is a certain answer
        if ex && sweep == Truth::True {
            prop_assert_ne!(exact, Truth::False, "{}", f);
        }
        if !ex && sweep == Truth::False {
            prop_assert_ne!(exact, Truth::True, "{}", f);
        }
    }
}

#[test]
fn model_divisibility_is_an_order() {
    let mut t = reference_table();
    let (c, _) = EdsConstants::compute(&mut t, &ConstantsConfig::default()).unwrap();
    let mut spec = RingSpec::rational([2, 3], PrimeRule::NoDegreeOneQuadratic { d: -23 });
    for e in &c.primitive_divisors {
        if let Some(p) = e.divisor.known() {
            spec.exclude.insert(p.clone());
        }
    }
    let n = 8i64;
    let mut rel = vec![vec![false; n as usize + 1]; n as usize + 1];
    for j in 1..=n {
        for k in 1..=n {
            rel[j as usize][k as usize] = model_divides(&mut t, &c, &spec, j, k).unwrap().divides;
        }
    }
    for j in 1..=n as usize {
        assert!(rel[j][j], "reflexive at {j}");
        for k in 1..=n as usize {
            if rel[j][k] && rel[k][j] {
                assert_eq!(j, k);
            }
            for l in 1..=n as usize {
                if rel[j][k] && rel[k][l] {
                    assert!(rel[j][l], "transitive at {j} {k} {l}");
                }
            }
        }
    }
    assert!(model_divides(&mut t, &c, &spec, -2, 4).unwrap().divides);
}
