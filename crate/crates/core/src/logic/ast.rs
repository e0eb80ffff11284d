use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Integer language (Z, +, |, !=, 0, 1) or the ring language with products.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    Integer,
    Ring,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Zero,
    One,
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Scale(i64, Box<Term>),
    Mul(Box<Term>, Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Eq(Term, Term),
    Divides(Term, Term),
    NotEq(Term, Term),
    /// Opaque named predicate decided by the structure.
    Pred(String, Vec<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Exists(Vec<String>, Box<Formula>),
    Forall(Vec<String>, Box<Formula>),
}

#[allow(clippy::should_implement_trait)]
impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    /// The numeral k as a term: 0, 1 or k*1.
    pub fn num(k: i64) -> Term {
        match k {
            0 => Term::Zero,
            1 => Term::One,
            _ => Term::Scale(k, Box::new(Term::One)),
        }
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::Sub(Box::new(a), Box::new(b))
    }

    pub fn scale(k: i64, a: Term) -> Term {
        Term::Scale(k, Box::new(a))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(Box::new(a), Box::new(b))
    }

    pub fn has_product(&self) -> bool {
        match self {
            Term::Var(_) | Term::Zero | Term::One => false,
            Term::Mul(..) => true,
            Term::Add(a, b) | Term::Sub(a, b) => a.has_product() || b.has_product(),
            Term::Scale(_, a) => a.has_product(),
        }
    }

    pub fn vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Zero | Term::One => {}
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
            Term::Scale(_, a) => a.vars_into(out),
        }
    }

    pub fn mentions(&self, v: &str) -> bool {
        match self {
            Term::Var(x) => x == v,
            Term::Zero | Term::One => false,
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => a.mentions(v) || b.mentions(v),
            Term::Scale(_, a) => a.mentions(v),
        }
    }

    pub fn rename(&self, from: &str, to: &str) -> Term {
        self.substitute(from, &Term::Var(to.to_string()))
    }

    pub fn substitute(&self, from: &str, with: &Term) -> Term {
        match self {
            Term::Var(x) if x == from => with.clone(),
            Term::Var(_) | Term::Zero | Term::One => self.clone(),
            Term::Add(a, b) => Term::add(a.substitute(from, with), b.substitute(from, with)),
            Term::Sub(a, b) => Term::sub(a.substitute(from, with), b.substitute(from, with)),
            Term::Mul(a, b) => Term::mul(a.substitute(from, with), b.substitute(from, with)),
            Term::Scale(k, a) => Term::scale(*k, a.substitute(from, with)),
        }
    }
}

impl Atom {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Eq(a, b) | Atom::Divides(a, b) | Atom::NotEq(a, b) => vec![a, b],
            Atom::Pred(_, ts) => ts.iter().collect(),
        }
    }

    fn map_terms(&self, f: &dyn Fn(&Term) -> Term) -> Atom {
        match self {
            Atom::Eq(a, b) => Atom::Eq(f(a), f(b)),
            Atom::Divides(a, b) => Atom::Divides(f(a), f(b)),
            Atom::NotEq(a, b) => Atom::NotEq(f(a), f(b)),
            Atom::Pred(n, ts) => Atom::Pred(n.clone(), ts.iter().map(f).collect()),
        }
    }
}

#[allow(clippy::should_implement_trait)]
impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Atom(Atom::Eq(a, b))
    }

    pub fn divides(a: Term, b: Term) -> Formula {
        Formula::Atom(Atom::Divides(a, b))
    }

    pub fn neq(a: Term, b: Term) -> Formula {
        Formula::Atom(Atom::NotEq(a, b))
    }

    pub fn pred(name: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(Atom::Pred(name.to_string(), args))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn exists(vars: &[&str], f: Formula) -> Formula {
        Formula::Exists(vars.iter().map(|s| s.to_string()).collect(), Box::new(f))
    }

    pub fn forall(vars: &[&str], f: Formula) -> Formula {
        Formula::Forall(vars.iter().map(|s| s.to_string()).collect(), Box::new(f))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_into(&mut Vec::new(), &mut out);
        out
    }

    fn free_into(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => {
                let mut vs = BTreeSet::new();
                for t in a.terms() {
                    t.vars_into(&mut vs);
                }
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.free_into(bound, out)),
            Formula::Not(f) => f.free_into(bound, out),
            Formula::Exists(vs, f) | Formula::Forall(vs, f) => {
                let n = bound.len();
                bound.extend(vs.iter().cloned());
                f.free_into(bound, out);
                bound.truncate(n);
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.names_into(&mut out);
        out
    }

    fn names_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => a.terms().into_iter().for_each(|t| t.vars_into(out)),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.names_into(out)),
            Formula::Not(f) => f.names_into(out),
            Formula::Exists(vs, f) | Formula::Forall(vs, f) => {
                out.extend(vs.iter().cloned());
                f.names_into(out);
            }
        }
    }

    pub fn mentions_free(&self, v: &str) -> bool {
        match self {
            Formula::Atom(a) => a.terms().iter().any(|t| t.mentions(v)),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(|f| f.mentions_free(v)),
            Formula::Not(f) => f.mentions_free(v),
            Formula::Exists(vs, f) | Formula::Forall(vs, f) => !vs.iter().any(|x| x == v) && f.mentions_free(v),
        }
    }

    pub fn has_product(&self) -> bool {
        match self {
            Formula::Atom(a) => a.terms().iter().any(|t| t.has_product()),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(|f| f.has_product()),
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.has_product(),
        }
    }

    /// Replaces free occurrences of `from` by `with`. Bound variables of
    /// the formula must not occur in `with` (alpha-normalise first).
    pub fn substitute(&self, from: &str, with: &Term) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(a.map_terms(&|t| t.substitute(from, with))),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.substitute(from, with)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.substitute(from, with)).collect()),
            Formula::Not(f) => Formula::not(f.substitute(from, with)),
            Formula::Exists(vs, f) | Formula::Forall(vs, f) if vs.iter().any(|x| x == from) => self.clone(),
            Formula::Exists(vs, f) => Formula::Exists(vs.clone(), Box::new(f.substitute(from, with))),
            Formula::Forall(vs, f) => Formula::Forall(vs.clone(), Box::new(f.substitute(from, with))),
        }
    }

    /// Renames bound variables that clash with a free variable or with an
    /// enclosing binder, so that every binder introduces a fresh name.
    pub fn alpha_normalize(&self) -> Formula {
        let free = self.free_vars();
        let mut used = self.all_names();
        let mut scope: Vec<String> = vec![];
        self.alpha_rec(&free, &mut used, &mut scope)
    }

    fn alpha_rec(&self, free: &BTreeSet<String>, used: &mut BTreeSet<String>, scope: &mut Vec<String>) -> Formula {
        match self {
            Formula::Atom(_) => self.clone(),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.alpha_rec(free, used, scope)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.alpha_rec(free, used, scope)).collect()),
            Formula::Not(f) => Formula::not(f.alpha_rec(free, used, scope)),
            Formula::Exists(vs, f) | Formula::Forall(vs, f) => {
                let mut body = (**f).clone();
                let mut names = vec![];
                for v in vs {
                    let clash = free.contains(v) || scope.contains(v) || names.contains(v);
                    if clash {
                        let fresh = fresh_name(v, used);
                        body = body.rename_free(v, &fresh);
                        names.push(fresh);
                    } else {
                        names.push(v.clone());
                    }
                }
                let n = scope.len();
                scope.extend(names.iter().cloned());
                let body = body.alpha_rec(free, used, scope);
                scope.truncate(n);
                match self {
                    Formula::Exists(..) => Formula::Exists(names, Box::new(body)),
                    _ => Formula::Forall(names, Box::new(body)),
                }
            }
        }
    }

    fn rename_free(&self, from: &str, to: &str) -> Formula {
        self.substitute(from, &Term::Var(to.to_string()))
    }

    /// Conjuncts of nested `and`s.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(fs) => fs.iter().flat_map(|f| f.conjuncts()).collect(),
            _ => vec![self],
        }
    }
}

pub fn fresh_name(base: &str, used: &mut BTreeSet<String>) -> String {
    let stem = base.split('_').next().unwrap_or(base);
    let stem = if stem.is_empty() { "v" } else { stem };
    for i in 1.. {
        let cand = format!("{stem}_{i}");
        if !used.contains(&cand) {
            used.insert(cand.clone());
            return cand;
        }
    }
    unreachable!()
}
