use super::ast::{Atom, Formula, Term};
use super::structure::Structure;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    pub fn and(self, o: Truth) -> Truth {
        match (self, o) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        }
    }

    pub fn or(self, o: Truth) -> Truth {
        match (self, o) {
            (Truth::True, _) | (_, Truth::True) => Truth::True,
            (Truth::False, Truth::False) => Truth::False,
            _ => Truth::Unknown,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    pub fn known(self) -> Option<bool> {
        match self {
            Truth::True => Some(true),
            Truth::False => Some(false),
            Truth::Unknown => None,
        }
    }
}

impl From<Option<bool>> for Truth {
    fn from(b: Option<bool>) -> Truth {
        b.map_or(Truth::Unknown, Truth::from_bool)
    }
}

/// How quantifiers over an infinite ring are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Plain sweeps over the finite domain; a passing universal or a failing
    /// existential sweep is "unknown".
    Sweep,
    /// Sweeps as above, plus the registered exact decision rules.
    Exact,
    /// The finite domain is the universe: sweeps are conclusive. Witnesses
    /// produced by the decision rules are accepted even outside the domain.
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("free variable {0} has no value")]
    Unbound(String),
    #[error("predicate {0}/{1} is not interpreted in this structure")]
    UnknownPredicate(String, usize),
    #[error("a quantifier block binds {0} variables; at most 64 are supported")]
    BlockTooLarge(usize),
}

const DNF_CAP: usize = 256;

#[derive(Clone, Copy)]
enum Conj<'f> {
    Plain(&'f Formula),
    /// A universally quantified conjunct pulled out of the block body.
    Under(&'f [String], &'f Formula),
}

struct Branch<'f> {
    conj: Vec<Conj<'f>>,
    masks: Vec<u64>,
    guarded: u64,
}

struct Plan<'f> {
    vars: Vec<&'f str>,
    branches: Vec<Branch<'f>>,
}

enum Step<E> {
    One(usize, Vec<E>),
    Two(usize, usize, Vec<(E, E)>),
}

type Env<'e, E> = Vec<(&'e str, E)>;

/// Evaluator for one formula over one structure. Per-block solving plans
/// are cached, so repeated evaluation with different assignments is cheap.
pub struct Evaluator<'f, 's, S: Structure> {
    formula: &'f Formula,
    structure: &'s S,
    mode: EvalMode,
    free: Vec<String>,
    plans: RefCell<HashMap<*const Formula, Rc<Plan<'f>>>>,
}

fn check_preds<S: Structure>(f: &Formula, s: &S) -> Result<(), EvalError> {
    match f {
        Formula::Atom(Atom::Pred(n, ts)) => {
            if s.has_pred(n, ts.len()) {
                Ok(())
            } else {
                Err(EvalError::UnknownPredicate(n.clone(), ts.len()))
            }
        }
        Formula::Atom(_) => Ok(()),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().try_for_each(|g| check_preds(g, s)),
        Formula::Not(g) => check_preds(g, s),
        Formula::Exists(vs, g) => {
            if vs.len() > 64 {
                return Err(EvalError::BlockTooLarge(vs.len()));
            }
            check_preds(g, s)
        }
        Formula::Forall(_, g) => check_preds(g, s),
    }
}

fn bit(i: usize) -> u64 {
    1u64 << i
}

fn conj_mentions(c: &Conj<'_>, v: &str) -> bool {
    match c {
        Conj::Plain(f) => f.mentions_free(v),
        Conj::Under(vs, f) => !vs.iter().any(|w| w == v) && f.mentions_free(v),
    }
}

fn flatten<'f>(f: &'f Formula, under: Option<&'f [String]>, out: &mut Vec<Conj<'f>>) {
    match (f, under) {
        (Formula::And(fs), _) => fs.iter().for_each(|g| flatten(g, under, out)),
        (Formula::Forall(vs, body), None) => flatten(body, Some(vs), out),
        (_, None) => out.push(Conj::Plain(f)),
        (_, Some(vs)) => {
            if vs.iter().any(|v| f.mentions_free(v)) {
                out.push(Conj::Under(vs, f));
            } else {
                flatten(f, None, out);
            }
        }
    }
}

fn degree(t: &Term, v: &str) -> u32 {
    match t {
        Term::Var(x) => u32::from(x == v),
        Term::Zero | Term::One => 0,
        Term::Add(a, b) | Term::Sub(a, b) => degree(a, v).max(degree(b, v)),
        Term::Scale(_, a) => degree(a, v),
        Term::Mul(a, b) => degree(a, v) + degree(b, v),
    }
}

fn lcm_clause(f: &Formula) -> Option<(&Term, &Term, &Term, &str)> {
    let Formula::Or(parts) = f else { return None };
    let [Formula::Not(lhs), Formula::Atom(Atom::Divides(l, Term::Var(d)))] = parts.as_slice() else {
        return None;
    };
    let Formula::And(ab) = lhs.as_ref() else { return None };
    let [Formula::Atom(Atom::Divides(a, Term::Var(d1))), Formula::Atom(Atom::Divides(b, Term::Var(d2)))] = ab.as_slice()
    else {
        return None;
    };
    if d1 != d || d2 != d || a.mentions(d) || b.mentions(d) || l.mentions(d) {
        return None;
    }
    Some((a, b, l, d))
}

impl<'f, 's, S: Structure> Evaluator<'f, 's, S> {
    pub fn new(structure: &'s S, mode: EvalMode, formula: &'f Formula) -> Result<Self, EvalError> {
        check_preds(formula, structure)?;
        Ok(Evaluator {
            formula,
            structure,
            mode,
            free: formula.free_vars().into_iter().collect(),
            plans: RefCell::new(HashMap::new()),
        })
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    /// Evaluates under the assignment of the free variables.
    pub fn eval(&self, assignment: &[(&str, S::Elem)]) -> Result<Truth, EvalError> {
        for v in &self.free {
            if !assignment.iter().any(|(n, _)| n == v) {
                return Err(EvalError::Unbound(v.clone()));
            }
        }
        let mut env: Env<'_, S::Elem> = assignment.iter().map(|(n, e)| (*n, e.clone())).collect();
        Ok(self.formula_truth(self.formula, &mut env))
    }

    fn lookup<'e>(env: &Env<'e, S::Elem>, v: &str) -> Option<S::Elem> {
        env.iter().rev().find(|(n, _)| *n == v).map(|(_, e)| e.clone())
    }

    fn term<'e>(&self, t: &Term, env: &Env<'e, S::Elem>) -> Option<S::Elem> {
        let s = self.structure;
        match t {
            Term::Var(v) => Self::lookup(env, v),
            Term::Zero => Some(s.zero()),
            Term::One => Some(s.one()),
            Term::Add(a, b) => s.add(&self.term(a, env)?, &self.term(b, env)?),
            Term::Sub(a, b) => s.sub(&self.term(a, env)?, &self.term(b, env)?),
            Term::Scale(k, a) => s.scale(*k, &self.term(a, env)?),
            Term::Mul(a, b) => s.mul(&self.term(a, env)?, &self.term(b, env)?),
        }
    }

    fn atom<'e>(&self, a: &Atom, env: &Env<'e, S::Elem>) -> Truth {
        let s = self.structure;
        let pair = |x: &Term, y: &Term| Some((self.term(x, env)?, self.term(y, env)?));
        match a {
            Atom::Eq(x, y) => pair(x, y).map(|(x, y)| x == y).into(),
            Atom::NotEq(x, y) => pair(x, y).map(|(x, y)| x != y).into(),
            Atom::Divides(x, y) => pair(x, y).and_then(|(x, y)| s.divides(&x, &y)).into(),
            Atom::Pred(n, ts) => {
                let args: Option<Vec<_>> = ts.iter().map(|t| self.term(t, env)).collect();
                args.and_then(|args| s.pred(n, &args)).into()
            }
        }
    }

    fn formula_truth<'e>(&'e self, f: &'f Formula, env: &mut Env<'e, S::Elem>) -> Truth {
        match f {
            Formula::Atom(a) => self.atom(a, env),
            Formula::And(fs) => {
                let mut acc = Truth::True;
                for g in fs {
                    acc = acc.and(self.formula_truth(g, env));
                    if acc == Truth::False {
                        break;
                    }
                }
                acc
            }
            Formula::Or(fs) => {
                let mut acc = Truth::False;
                for g in fs {
                    acc = acc.or(self.formula_truth(g, env));
                    if acc == Truth::True {
                        break;
                    }
                }
                acc
            }
            Formula::Not(g) => self.formula_truth(g, env).not(),
            Formula::Forall(vs, body) => self.forall(vs, body, env),
            Formula::Exists(..) => self.exists(f, env),
        }
    }

    fn forall<'e>(&'e self, vs: &'f [String], body: &'f Formula, env: &mut Env<'e, S::Elem>) -> Truth {
        if let Formula::And(fs) = body {
            let mut acc = Truth::True;
            for g in fs {
                acc = acc.and(self.forall(vs, g, env));
                if acc == Truth::False {
                    break;
                }
            }
            return acc;
        }
        let live: Vec<&'e str> = vs.iter().filter(|v| body.mentions_free(v)).map(|v| v.as_str()).collect();
        if live.is_empty() {
            return self.formula_truth(body, env);
        }
        if self.mode != EvalMode::Sweep && live.len() == 1 {
            if let Some((a, b, l, _)) = lcm_clause(body) {
                let s = self.structure;
                let decided = (|| {
                    let m = s.lcm(&self.term(a, env)?, &self.term(b, env)?)?;
                    s.divides(&self.term(l, env)?, &m)
                })();
                if let Some(r) = decided {
                    return Truth::from_bool(r);
                }
            }
        }
        let r = self.sweep_forall(&live, body, env);
        if r == Truth::True && self.mode != EvalMode::Truncated {
            Truth::Unknown
        } else {
            r
        }
    }

    fn sweep_forall<'e>(&'e self, live: &[&'e str], body: &'f Formula, env: &mut Env<'e, S::Elem>) -> Truth {
        let Some((v, rest)) = live.split_first() else {
            return self.formula_truth(body, env);
        };
        let mut acc = Truth::True;
        for e in self.structure.domain() {
            env.push((v, e.clone()));
            let r = self.sweep_forall(rest, body, env);
            env.pop();
            acc = acc.and(r);
            if acc == Truth::False {
                break;
            }
        }
        acc
    }

    fn plan(&self, f: &'f Formula) -> Rc<Plan<'f>> {
        let key = f as *const Formula;
        if let Some(p) = self.plans.borrow().get(&key) {
            return p.clone();
        }
        let Formula::Exists(vs, body) = f else { unreachable!() };
        let mut vars: Vec<&'f str> = vs.iter().map(|v| v.as_str()).collect();
        let mut body: &'f Formula = body;
        while let Formula::Exists(ws, inner) = body {
            if ws.iter().any(|w| vars.contains(&w.as_str())) || vars.len() + ws.len() > 64 {
                break;
            }
            vars.extend(ws.iter().map(|w| w.as_str()));
            body = inner;
        }
        let mask_of = |c: &Conj<'f>| {
            vars.iter().enumerate().filter(|(_, v)| conj_mentions(c, v)).fold(0u64, |m, (i, _)| m | bit(i))
        };
        let mut base = vec![];
        flatten(body, None, &mut base);
        let expandable = |c: &Conj<'f>| matches!(c, Conj::Plain(Formula::Or(_))) && mask_of(c) != 0;
        let mut todo = vec![base];
        let mut done: Vec<Vec<Conj<'f>>> = vec![];
        while let Some(b) = todo.pop() {
            let pos = b.iter().position(expandable);
            match pos {
                Some(i) if {
                    let Conj::Plain(Formula::Or(gs)) = b[i] else { unreachable!() };
                    done.len() + todo.len() + gs.len() <= DNF_CAP
                } =>
                {
                    let Conj::Plain(Formula::Or(gs)) = b[i] else { unreachable!() };
                    for g in gs.iter().rev() {
                        let mut nb: Vec<Conj<'f>> = b[..i].to_vec();
                        flatten(g, None, &mut nb);
                        nb.extend_from_slice(&b[i + 1..]);
                        todo.push(nb);
                    }
                }
                _ => done.push(b),
            }
        }
        let branches = done
            .into_iter()
            .map(|conj| {
                let masks: Vec<u64> = conj.iter().map(mask_of).collect();
                let mut guarded = 0;
                for c in &conj {
                    if let Conj::Plain(Formula::Atom(Atom::Pred(n, ts))) = c {
                        if let (true, [Term::Var(v)]) = (n == "base", ts.as_slice()) {
                            if let Some(i) = vars.iter().position(|w| w == v) {
                                guarded |= bit(i);
                            }
                        }
                    }
                }
                Branch { conj, masks, guarded }
            })
            .collect();
        let p = Rc::new(Plan { vars, branches });
        self.plans.borrow_mut().insert(key, p.clone());
        p
    }

    fn exists<'e>(&'e self, f: &'f Formula, env: &mut Env<'e, S::Elem>) -> Truth {
        let plan = self.plan(f);
        let mut acc = Truth::False;
        for br in &plan.branches {
            let used = br.masks.iter().fold(0, |a, m| a | m);
            let idle = (0..plan.vars.len()).filter(|i| used & bit(*i) == 0).fold(0, |a, i| a | bit(i));
            acc = acc.or(self.solve(&plan.vars, br, idle, None, false, env));
            if acc == Truth::True {
                break;
            }
        }
        acc
    }

    fn conj_truth<'e>(&'e self, c: Conj<'f>, env: &mut Env<'e, S::Elem>) -> Truth {
        match c {
            Conj::Plain(g) => self.formula_truth(g, env),
            Conj::Under(vs, g) => self.forall(vs, g, env),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn solve<'e>(
        &'e self,
        vars: &[&'e str],
        br: &Branch<'f>,
        bound: u64,
        fresh: Option<u64>,
        mut unknown: bool,
        env: &mut Env<'e, S::Elem>,
    ) -> Truth {
        for (c, &m) in br.conj.iter().zip(&br.masks) {
            let due = match fresh {
                None => m == 0,
                Some(b) => m & !bound == 0 && m & b != 0,
            };
            if due {
                match self.conj_truth(*c, env) {
                    Truth::False => return Truth::False,
                    Truth::Unknown => unknown = true,
                    Truth::True => {}
                }
            }
        }
        let all = if vars.len() == 64 { u64::MAX } else { bit(vars.len()) - 1 };
        if bound == all {
            return if unknown { Truth::Unknown } else { Truth::True };
        }
        let step = if self.mode == EvalMode::Sweep { None } else { self.find_step(vars, br, bound, env) };
        match step {
            Some(Step::One(i, cands)) => {
                let mut acc = Truth::False;
                for c in cands {
                    env.push((vars[i], c));
                    let r = self.solve(vars, br, bound | bit(i), Some(bit(i)), unknown, env);
                    env.pop();
                    acc = acc.or(r);
                    if acc == Truth::True {
                        break;
                    }
                }
                acc
            }
            Some(Step::Two(i, j, cands)) => {
                let mut acc = Truth::False;
                for (x, y) in cands {
                    env.push((vars[i], x));
                    env.push((vars[j], y));
                    let r = self.solve(vars, br, bound | bit(i) | bit(j), Some(bit(i) | bit(j)), unknown, env);
                    env.truncate(env.len() - 2);
                    acc = acc.or(r);
                    if acc == Truth::True {
                        break;
                    }
                }
                acc
            }
            None => {
                let i = (0..vars.len()).find(|i| bound & bit(*i) == 0).unwrap();
                let dom =
                    if br.guarded & bit(i) != 0 { self.structure.base_domain() } else { self.structure.domain() };
                let mut acc = Truth::False;
                for e in dom {
                    env.push((vars[i], e.clone()));
                    let r = self.solve(vars, br, bound | bit(i), Some(bit(i)), unknown, env);
                    env.pop();
                    acc = acc.or(r);
                    if acc == Truth::True {
                        break;
                    }
                }
                if acc == Truth::False && self.mode != EvalMode::Truncated {
                    Truth::Unknown
                } else {
                    acc
                }
            }
        }
    }

    /// Coefficient of `v` in a term that is affine in `v`; other variables
    /// must be bound except those listed in `free`, which count as zero.
    fn coef<'e>(&self, t: &Term, v: &str, free: &[&str], env: &Env<'e, S::Elem>) -> Option<S::Elem> {
        let s = self.structure;
        match t {
            Term::Var(x) if x == v => Some(s.one()),
            Term::Var(_) | Term::Zero | Term::One => Some(s.zero()),
            Term::Add(a, b) => s.add(&self.coef(a, v, free, env)?, &self.coef(b, v, free, env)?),
            Term::Sub(a, b) => s.sub(&self.coef(a, v, free, env)?, &self.coef(b, v, free, env)?),
            Term::Scale(k, a) => s.scale(*k, &self.coef(a, v, free, env)?),
            Term::Mul(a, b) => {
                let hits = |t: &Term| t.mentions(v) || free.iter().any(|f| t.mentions(f));
                match (hits(a), hits(b)) {
                    (false, false) => Some(s.zero()),
                    (true, false) => s.mul(&self.coef(a, v, free, env)?, &self.term(b, env)?),
                    (false, true) => s.mul(&self.term(a, env)?, &self.coef(b, v, free, env)?),
                    (true, true) => None,
                }
            }
        }
    }

    /// Value of `t` with the listed variables set to zero.
    fn at_zero<'e>(&self, t: &Term, zs: &[&'e str], env: &mut Env<'e, S::Elem>) -> Option<S::Elem> {
        for z in zs {
            env.push((z, self.structure.zero()));
        }
        let r = self.term(t, env);
        env.truncate(env.len() - zs.len());
        r
    }

    /// Solutions `v` of `lhs(v) = target` for `lhs` affine in `v`.
    fn solve_affine<'e>(
        &self,
        lhs: &Term,
        target: &S::Elem,
        v: &'e str,
        env: &mut Env<'e, S::Elem>,
    ) -> Option<Vec<S::Elem>> {
        let s = self.structure;
        let c = self.coef(lhs, v, &[], env)?;
        if s.is_zero(&c) {
            return None;
        }
        let rest = self.at_zero(lhs, &[v], env)?;
        Some(s.quotient(&c, &s.sub(target, &rest)?)?.into_iter().collect())
    }

    fn find_step<'e>(
        &'e self,
        vars: &[&'e str],
        br: &Branch<'f>,
        bound: u64,
        env: &mut Env<'e, S::Elem>,
    ) -> Option<Step<S::Elem>> {
        let s = self.structure;
        for (ci, (c, &m)) in br.conj.iter().zip(&br.masks).enumerate() {
            let open = m & !bound;
            if open == 0 {
                continue;
            }
            if open.count_ones() == 1 {
                let i = open.trailing_zeros() as usize;
                let v = vars[i];
                if let Some(cands) = self.single_rule(br, ci, *c, v, env) {
                    return Some(Step::One(i, cands));
                }
            } else if open.count_ones() == 2 && open & !br.guarded == 0 {
                let i = open.trailing_zeros() as usize;
                let j = (open & !bit(i)).trailing_zeros() as usize;
                if let Conj::Plain(Formula::Atom(Atom::Eq(a, b))) = c {
                    let (x, y) = (vars[i], vars[j]);
                    let pair = (|| {
                        let cx = s.sub(&self.coef(a, x, &[y], env)?, &self.coef(b, x, &[y], env)?)?;
                        let cy = s.sub(&self.coef(a, y, &[x], env)?, &self.coef(b, y, &[x], env)?)?;
                        let ra = self.at_zero(a, &[x, y], env)?;
                        let rb = self.at_zero(b, &[x, y], env)?;
                        s.solve_base_pair(&cx, &cy, &s.sub(&rb, &ra)?)
                    })();
                    if let Some(sol) = pair {
                        return Some(Step::Two(i, j, sol.into_iter().collect()));
                    }
                }
            }
        }
        None
    }

    fn single_rule<'e>(
        &'e self,
        br: &Branch<'f>,
        ci: usize,
        c: Conj<'f>,
        v: &'e str,
        env: &mut Env<'e, S::Elem>,
    ) -> Option<Vec<S::Elem>> {
        let s = self.structure;
        match c {
            Conj::Plain(Formula::Atom(Atom::Eq(a, b))) => {
                if degree(a, v).max(degree(b, v)) == 2 {
                    return self.pure_square_rule(a, b, v, env);
                }
                let diff_coef = s.sub(&self.coef(a, v, &[], env)?, &self.coef(b, v, &[], env)?)?;
                if s.is_zero(&diff_coef) {
                    return None;
                }
                let rest = s.sub(&self.at_zero(a, &[v], env)?, &self.at_zero(b, &[v], env)?)?;
                Some(s.quotient(&diff_coef, &s.scale(-1, &rest)?)?.into_iter().collect())
            }
            Conj::Plain(Formula::Atom(Atom::Divides(t1, t2))) => {
                let partner = br.conj.iter().enumerate().any(|(k, o)| {
                    k != ci && matches!(o, Conj::Plain(Formula::Atom(Atom::Divides(u1, u2))) if u1 == t2 && u2 == t1)
                });
                if partner {
                    let (open, closed) = if t1.mentions(v) { (t1, t2) } else { (t2, t1) };
                    if !closed.mentions(v) {
                        let mut out = vec![];
                        for u in s.associates(&self.term(closed, env)?)? {
                            for x in self.solve_affine(open, &u, v, env)? {
                                if !out.contains(&x) {
                                    out.push(x);
                                }
                            }
                        }
                        return Some(out);
                    }
                }
                if let Term::Var(l) = t2 {
                    if l == v && !t1.mentions(v) {
                        return self.lcm_rule(br, t1, v, env);
                    }
                }
                None
            }
            _ => None,
        }
    }

    /// Solves `c v^2 + r = 0` (no linear term) by exact square roots; the
    /// coefficients come from evaluating at v = 0, 1, -1.
    fn pure_square_rule<'e>(&self, a: &Term, b: &Term, v: &'e str, env: &mut Env<'e, S::Elem>) -> Option<Vec<S::Elem>> {
        let s = self.structure;
        let mut at = |x: S::Elem| {
            env.push((v, x));
            let r = (|| s.sub(&self.term(a, env)?, &self.term(b, env)?))();
            env.pop();
            r
        };
        let p0 = at(s.zero())?;
        let p1 = at(s.one())?;
        let pm = at(s.scale(-1, &s.one())?)?;
        if !s.is_zero(&s.sub(&p1, &pm)?) {
            return None;
        }
        let c2x2 = s.sub(&s.add(&p1, &pm)?, &s.scale(2, &p0)?)?;
        if s.is_zero(&c2x2) {
            return None;
        }
        let Some(sq) = s.quotient(&c2x2, &s.scale(-2, &p0)?)? else { return Some(vec![]) };
        Some(match s.sqrt(&sq)? {
            None => vec![],
            Some(r) if s.is_zero(&r) => vec![r],
            Some(r) => {
                let neg = s.scale(-1, &r)?;
                vec![r, neg]
            }
        })
    }

    /// `a | v`, `b | v` and the universal lcm clause for `v` pin `v` to the
    /// associates of lcm(a, b).
    fn lcm_rule<'e>(&'e self, br: &Branch<'f>, a0: &Term, v: &str, env: &mut Env<'e, S::Elem>) -> Option<Vec<S::Elem>> {
        let s = self.structure;
        let has_div = |t: &Term| {
            br.conj.iter().any(|o| {
                matches!(o, Conj::Plain(Formula::Atom(Atom::Divides(x, Term::Var(l)))) if x == t && l == v)
            })
        };
        for c in &br.conj {
            let Conj::Under(_, g) = c else { continue };
            let Some((a, b, l, _)) = lcm_clause(g) else { continue };
            if !matches!(l, Term::Var(x) if x == v) || (a != a0 && b != a0) || a.mentions(v) || b.mentions(v) {
                continue;
            }
            if has_div(a) && has_div(b) {
                let m = s.lcm(&self.term(a, env)?, &self.term(b, env)?)?;
                return s.associates(&m);
            }
        }
        None
    }
}

/// One-shot evaluation.
pub fn eval_formula<S: Structure>(
    structure: &S,
    mode: EvalMode,
    f: &Formula,
    assignment: &[(&str, S::Elem)],
) -> Result<Truth, EvalError> {
    Evaluator::new(structure, mode, f)?.eval(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::structure::IntegerStructure;
    use crate::logic::{parse, Sort};

    fn z(f: &str, mode: EvalMode, env: &[(&str, i64)]) -> Truth {
        let s = IntegerStructure::<i64>::new(10);
        let f = parse(f, Sort::Ring).unwrap();
        eval_formula(&s, mode, &f, env).unwrap()
    }

    #[test]
    fn atoms_and_sweeps() {
        assert_eq!(z("(div 2 6)", EvalMode::Exact, &[]), Truth::True);
        assert_eq!(z("(A (d) (div d x))", EvalMode::Sweep, &[("x", 5)]), Truth::False);
        assert_eq!(z("(A (d) (div 1 d))", EvalMode::Sweep, &[]), Truth::Unknown);
        assert_eq!(z("(A (d) (div 1 d))", EvalMode::Truncated, &[]), Truth::True);
    }

    #[test]
    fn no_square_root_of_two() {
        let f = "(E (y) (= (** y y) 2))";
        assert_eq!(z(f, EvalMode::Sweep, &[]), Truth::Unknown);
        assert_eq!(z(f, EvalMode::Exact, &[]), Truth::False);
        assert_eq!(z("(E (y) (= (** y y) 1369))", EvalMode::Exact, &[]), Truth::True);
        assert_eq!(z("(E (y) (= (** (* 3 y) (+ y y)) (+ 54 x)))", EvalMode::Exact, &[("x", 0)]), Truth::True);
        assert_eq!(z("(E (y) (= (** (* 3 y) (+ y y)) (+ 54 x)))", EvalMode::Exact, &[("x", 6)]), Truth::False);
        assert_eq!(z("(E (y) (= (** y (+ y 1)) 13))", EvalMode::Exact, &[]), Truth::Unknown);
    }

    #[test]
    fn affine_and_lcm_rules() {
        assert_eq!(z("(E (y) (= (* 3 y) (+ x 1)))", EvalMode::Exact, &[("x", 1000)]), Truth::False);
        assert_eq!(z("(E (y) (= (* 3 y) (+ x 1)))", EvalMode::Exact, &[("x", 1001)]), Truth::True);
        let lcm = "(E (L) (and (div a L) (div b L) (A (d) (or (not (and (div a d) (div b d))) (div L d))) (= L c)))";
        assert_eq!(z(lcm, EvalMode::Exact, &[("a", 12), ("b", 18), ("c", -36)]), Truth::True);
        assert_eq!(z(lcm, EvalMode::Exact, &[("a", 12), ("b", 18), ("c", 72)]), Truth::False);
        let clause = "(A (d) (or (not (and (div a d) (div b d))) (div L d)))";
        assert_eq!(z(clause, EvalMode::Exact, &[("a", 4), ("b", 6), ("L", 6)]), Truth::True);
        assert_eq!(z(clause, EvalMode::Exact, &[("a", 4), ("b", 6), ("L", 5)]), Truth::False);
    }

    #[test]
    fn nested_existentials_share_a_block() {
        let f = "(E (u) (E (y) (and (= (- 1 u) (- x 31)) (= x (- 1 y)))))";
        assert_eq!(z(f, EvalMode::Exact, &[("x", -1)]), Truth::True);
        assert_eq!(z(f, EvalMode::Truncated, &[("x", -1)]), Truth::True);
    }

    #[test]
    fn associates_and_disjunctions() {
        let f = "(E (s) (and (div (+ s x) L) (div L (+ s x)) (= s w)))";
        assert_eq!(z(f, EvalMode::Exact, &[("x", 3), ("L", 12), ("w", -15)]), Truth::True);
        assert_eq!(z(f, EvalMode::Exact, &[("x", 3), ("L", 12), ("w", 8)]), Truth::False);
        let g = "(E (y) (or (= (* 2 y) x) (= (* 3 y) x)))";
        assert_eq!(z(g, EvalMode::Exact, &[("x", 9)]), Truth::True);
        assert_eq!(z(g, EvalMode::Exact, &[("x", 7)]), Truth::False);
    }

    #[test]
    fn errors() {
        let s = IntegerStructure::<i64>::new(3);
        let f = parse("(div x y)", Sort::Integer).unwrap();
        assert_eq!(eval_formula(&s, EvalMode::Exact, &f, &[("x", 1)]), Err(EvalError::Unbound("y".into())));
        let g = parse("(pred frob x)", Sort::Integer).unwrap();
        assert!(matches!(eval_formula(&s, EvalMode::Exact, &g, &[("x", 1)]), Err(EvalError::UnknownPredicate(..))));
    }
}
