use super::ast::{Formula, Term};
use super::eval::{EvalError, EvalMode, Evaluator, Truth};
use super::structure::IntegerStructure;
use serde::{Deserialize, Serialize};

fn v(name: &str) -> Term {
    Term::var(name)
}

/// `a | L`, `b | L` and `forall d ((a | d and b | d) -> L | d)`, with the
/// universal part returned separately so several clauses share `d`.
fn lcm_parts(a: &Term, b: &Term, l: &str, d: &str) -> (Vec<Formula>, Formula) {
    let divs = vec![Formula::divides(a.clone(), v(l)), Formula::divides(b.clone(), v(l))];
    let clause = Formula::Or(vec![
        Formula::not(Formula::And(vec![Formula::divides(a.clone(), v(d)), Formula::divides(b.clone(), v(d))])),
        Formula::divides(v(l), v(d)),
    ]);
    (divs, clause)
}

/// Given `L = +-(x^2 + x)`, forces `s = x^2`: `s + x` and `L` divide each
/// other, and the pins rule out `s = -x^2 - 2x` except where it equals x^2.
fn square_parts(x: &Term, l: &str, s: &str, upper_pin: bool) -> Vec<Formula> {
    let sx = Term::add(v(s), x.clone());
    let s4 = Term::sub(v(s), Term::num(4));
    let mut out = vec![
        Formula::divides(sx.clone(), v(l)),
        Formula::divides(v(l), sx),
        Formula::divides(Term::sub(x.clone(), Term::One), Term::sub(v(s), x.clone())),
        Formula::divides(Term::add(x.clone(), Term::num(2)), s4.clone()),
    ];
    if upper_pin {
        out.push(Formula::divides(Term::sub(x.clone(), Term::num(2)), s4));
    }
    out
}

fn build(upper_pin: bool) -> Formula {
    let d = "d";
    let xs = [v("m"), v("n"), Term::add(v("m"), v("n"))];
    let mut body = vec![];
    for (i, x) in xs.iter().enumerate() {
        let l = format!("L{}", i + 1);
        let s = format!("s{}", i + 1);
        let (divs, clause) = lcm_parts(x, &Term::add(x.clone(), Term::One), &l, d);
        body.extend(divs);
        body.push(clause);
        body.extend(square_parts(x, &l, &s, upper_pin));
    }
    body.push(Formula::eq(v("s3"), Term::add(Term::add(v("s1"), v("s2")), Term::add(v("l"), v("l")))));
    Formula::exists(&["L1", "L2", "L3", "s1", "s2", "s3"], Formula::forall(&[d], Formula::And(body)))
        .alpha_normalize()
}

/// `l = m * n` in (Z, +, |) with one universal quantifier: s1, s2, s3 are
/// forced to m^2, n^2, (m+n)^2 through lcm(x, x+1) = x^2 + x, and then
/// 2l = s3 - s1 - s2.
pub fn mult_formula() -> Formula {
    build(true)
}

/// `mult_formula` without the `(x - 2) | (s - 4)` pin. It admits the wrong
/// squares s = -3 at x = -3 and s = -8 at x = 2.
pub fn mult_formula_missing_pin() -> Formula {
    build(false)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disagreement {
    pub tuple: Vec<i64>,
    pub formula: Truth,
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub variables: Vec<String>,
    pub window: i64,
    pub checked: u64,
    pub disagreements: Vec<Disagreement>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Compares `f` against `oracle` on every assignment of `variables` with
/// entries in `[-window, window]`, evaluating with the exact decision
/// rules. An "unknown" verdict counts as a disagreement.
pub fn validate_defining_formula(
    f: &Formula,
    variables: &[&str],
    oracle: impl Fn(&[i64]) -> bool,
    window: i64,
) -> Result<ValidationReport, EvalError> {
    let s = IntegerStructure::<i64>::new(window.max(0));
    let ev = Evaluator::new(&s, EvalMode::Exact, f)?;
    let mut report = ValidationReport {
        variables: variables.iter().map(|v| v.to_string()).collect(),
        window,
        checked: 0,
        disagreements: vec![],
    };
    if window < 0 {
        return Ok(report);
    }
    let k = variables.len();
    let mut tuple = vec![-window; k];
    let mut env: Vec<(&str, i64)> = variables.iter().map(|v| (*v, -window)).collect();
    loop {
        for (slot, x) in env.iter_mut().zip(&tuple) {
            slot.1 = *x;
        }
        let got = ev.eval(&env)?;
        let want = oracle(&tuple);
        report.checked += 1;
        if got != Truth::from_bool(want) {
            report.disagreements.push(Disagreement { tuple: tuple.clone(), formula: got, oracle: want });
        }
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(report);
            }
            i -= 1;
            if tuple[i] < window {
                tuple[i] += 1;
                break;
            }
            tuple[i] = -window;
        }
    }
}

/// The oracle `l = m * n` on tuples `(l, m, n)`.
pub fn product_oracle(t: &[i64]) -> bool {
    t[0] == t[1] * t[2]
}
