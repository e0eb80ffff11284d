#![allow(dead_code)]

use definability::logic::{Formula, Term};
use proptest::prelude::*;

pub fn small_term(vars: Vec<String>) -> BoxedStrategy<Term> {
    let leaf = prop_oneof![
        proptest::sample::select(vars).prop_map(|v| Term::var(&v)),
        (-3i64..=3).prop_map(Term::num),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::sub(a, b)),
            (-3i64..=3, inner.clone()).prop_map(|(k, a)| Term::scale(k, a)),
            (inner.clone(), inner).prop_map(|(a, b)| Term::mul(a, b)),
        ]
    })
    .boxed()
}

pub fn atom(vars: Vec<String>) -> impl Strategy<Value = Formula> {
    let t = small_term(vars);
    (0..3u8, t.clone(), t).prop_map(|(k, a, b)| match k {
        0 => Formula::eq(a, b),
        1 => Formula::divides(a, b),
        _ => Formula::neq(a, b),
    })
}

fn names(v: &[String]) -> Vec<&str> {
    v.iter().map(|s| s.as_str()).collect()
}

/// `E U? A X E Y P` with at most two universals, at least one inner
/// existential, free variable T, and a matrix of a few atoms with at most
/// one disjunction.
pub fn reducible_formula() -> impl Strategy<Value = Formula> {
    (0..=1usize, 0..=2usize, 1..=2usize).prop_flat_map(|(nu, nx, ny)| {
        let us: Vec<String> = (0..nu).map(|i| format!("u{i}")).collect();
        let xs: Vec<String> = ["a", "b"][..nx].iter().map(|s| s.to_string()).collect();
        let ys: Vec<String> = (0..ny).map(|i| format!("y{i}")).collect();
        let mut scope = vec!["T".to_string()];
        scope.extend(us.iter().cloned());
        scope.extend(xs.iter().cloned());
        scope.extend(ys.iter().cloned());
        let conj = proptest::collection::vec(atom(scope.clone()), 1..=2);
        let disj = proptest::option::of(proptest::collection::vec(atom(scope), 2..=2));
        (conj, disj).prop_map(move |(mut cs, d)| {
            if let Some(d) = d {
                cs.push(Formula::Or(d));
            }
            let mut f = Formula::And(cs);
            f = Formula::exists(&names(&ys), f);
            if !xs.is_empty() {
                f = Formula::forall(&names(&xs), f);
            }
            if !us.is_empty() {
                f = Formula::exists(&names(&us), f);
            }
            f
        })
    })
}

/// Arbitrary formulas for printing round trips.
pub fn any_formula() -> impl Strategy<Value = Formula> {
    let vars: Vec<String> = ["x", "y", "z", "w_1"].iter().map(|s| s.to_string()).collect();
    let leaf = prop_oneof![
        atom(vars.clone()),
        proptest::collection::vec(small_term(vars.clone()), 1..=2).prop_map(|ts| Formula::pred("nonsq", ts)),
    ];
    leaf.prop_recursive(3, 16, 3, move |inner| {
        let names = proptest::sample::subsequence(vec!["x", "y", "z"], 1..=2);
        prop_oneof![
            proptest::collection::vec(inner.clone(), 1..=3).prop_map(Formula::And),
            proptest::collection::vec(inner.clone(), 1..=3).prop_map(Formula::Or),
            inner.clone().prop_map(Formula::not),
            (names.clone(), inner.clone()).prop_map(|(vs, f)| Formula::exists(&vs, f)),
            (names, inner).prop_map(|(vs, f)| Formula::forall(&vs, f)),
        ]
    })
}
