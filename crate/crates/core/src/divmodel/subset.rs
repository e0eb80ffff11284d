use super::ring::{RingError, RingSpec};
use crate::arith::{is_squarefree, ln_nat, nth_root, valuation, FactorSource};
use crate::bigser;
use crate::curve::order_mod_p;
use crate::curve::CurveError;
use crate::eds::{EdsError, EdsTable};
use crate::report::{CheckReport, Verdict};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum SubsetError {
    #[error("x must be a positive integer, got {0}")]
    NotPositiveInteger(BigRational),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0} could not be fully factored")]
    Incomplete(BigUint),
    #[error("budget exhausted: index multiplier k = {k} exceeds the limit")]
    BudgetExhausted { k: BigUint, needs: Vec<NeededIndex> },
    #[error("construction failed: {0}")]
    Construction(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Eds(#[from] EdsError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "exponent", rename_all = "snake_case")]
pub enum ExponentMode {
    /// Exponent 5crn on v.
    Honest,
    /// A reduced exponent, for runs at desk scale.
    Test(u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetSystemConfig {
    /// Discriminant D' of the auxiliary field L = Q(sqrt D').
    pub d_aux: i64,
    pub d: i64,
    pub l: Vec<i64>,
    pub r: u32,
    pub n: u32,
    pub h: u32,
    #[serde(with = "bigser::nat")]
    pub z: BigUint,
    pub c: u32,
    #[serde(with = "bigser::rational")]
    pub kappa: BigRational,
    pub exponent: ExponentMode,
    /// Index multiplier m = m0 * m1.
    pub m: u64,
}

impl Default for SubsetSystemConfig {
    fn default() -> Self {
        SubsetSystemConfig {
            d_aux: -23,
            d: 10,
            l: vec![0, 4, 2],
            r: 2,
            n: 1,
            h: 1,
            z: BigUint::from(5u32),
            c: 1,
            kappa: BigRational::from_integer(2.into()),
            exponent: ExponentMode::Test(1),
            m: 1,
        }
    }
}

impl SubsetSystemConfig {
    pub fn rn(&self) -> u32 {
        self.r * self.n
    }

    pub fn v_exponent(&self) -> u32 {
        match self.exponent {
            ExponentMode::Honest => 5 * self.c * self.rn(),
            ExponentMode::Test(e) => e,
        }
    }

    pub fn is_test_mode(&self) -> bool {
        matches!(self.exponent, ExponentMode::Test(_))
    }

    /// G_i(T) = (T - d i)^2 - D'.
    pub fn g(&self, i: usize, t: &BigRational) -> BigRational {
        let s = t - BigRational::from_integer(BigInt::from(self.d) * BigInt::from(i));
        &s * &s - BigRational::from_integer(self.d_aux.into())
    }

    /// prod_i G_i(t - l_i).
    pub fn g_product(&self, t: &BigRational) -> BigRational {
        self.l
            .iter()
            .enumerate()
            .map(|(i, li)| self.g(i, &(t - BigRational::from_integer((*li).into()))))
            .fold(BigRational::one(), |a, b| a * b)
    }

    pub fn validate(&self, spec: &RingSpec, source: &dyn FactorSource) -> Result<(), SubsetError> {
        let bad = |m: String| Err(SubsetError::Config(m));
        if !is_squarefree(self.d_aux) || self.d_aux == 0 || self.d_aux == 1 {
            return bad(format!("D' = {} is not a squarefree integer other than 0, 1", self.d_aux));
        }
        if self.d_aux > 0 && crate::arith::isqrt(&BigUint::from(self.d_aux as u64)).pow(2u32) == BigUint::from(self.d_aux as u64) {
            return bad("D' is a square".into());
        }
        // |gamma - sigma(gamma)| = 2 sqrt|D'|, so d^2 > 4|D'|.
        if self.d <= 0 || (self.d as i128).pow(2) <= 4 * (self.d_aux as i128).abs() {
            return bad(format!("d = {} does not exceed 2 sqrt|D'|", self.d));
        }
        if self.r != 2 || self.n != 1 || self.h != 1 {
            return bad("only r = 2, n = 1, h = 1 are supported".into());
        }
        if self.l.len() != self.rn() as usize + 1 || self.l[0] != 0 || self.l.iter().any(|x| *x < 0) {
            return bad(format!("l must be rn + 1 = {} distinct naturals starting at 0", self.rn() + 1));
        }
        let mut sorted = self.l.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.l.len() {
            return bad("l values must be distinct".into());
        }
        if self.c == 0 || self.m == 0 {
            return bad("c and m must be positive".into());
        }
        let bound = BigRational::from_integer(self.rn().into()) * self.kappa.clone().pow((self.n * self.h) as i32);
        if BigRational::from_integer(BigInt::from(self.z.clone())) <= bound {
            return bad(format!("Z = {} must exceed rn kappa^(nh) = {}", self.z, bound));
        }
        let f = source.factor(&self.z);
        for (p, _) in &f.factors {
            if spec.contains_prime(p)? {
                return bad(format!("Z is divisible by the W prime {p}"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetBudget {
    /// Largest index for x_k and x_z.
    pub max_index: u64,
    /// Largest index at which ranks of apparition are inspected.
    pub max_rank_index: u64,
}

impl Default for SubsetBudget {
    fn default() -> Self {
        SubsetBudget { max_index: 120, max_rank_index: 120 }
    }
}

/// Why a given prime forces a multiple of its rank of apparition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeededIndex {
    #[serde(with = "bigser::nat")]
    pub p: BigUint,
    pub rank: u64,
    pub base_valuation: u32,
    pub needed_valuation: u64,
    /// rank * p^s; zero when the rank lies beyond the inspection cap.
    #[serde(with = "bigser::nat")]
    pub index: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetWitness {
    #[serde(with = "bigser::rational")]
    pub x: BigRational,
    pub j: u64,
    pub k: u64,
    pub z: u64,
    #[serde(rename = "A", with = "bigser::rational")]
    pub a: BigRational,
    #[serde(rename = "B", with = "bigser::rational")]
    pub b: BigRational,
    #[serde(rename = "C", with = "bigser::rational")]
    pub c: BigRational,
    #[serde(rename = "D", with = "bigser::rational")]
    pub d: BigRational,
    #[serde(rename = "Y", with = "bigser::rational")]
    pub y: BigRational,
    #[serde(rename = "F", with = "bigser::rational")]
    pub f: BigRational,
    #[serde(rename = "A1", with = "bigser::rational")]
    pub a1: BigRational,
    #[serde(rename = "B1", with = "bigser::rational")]
    pub b1: BigRational,
    #[serde(rename = "C1", with = "bigser::rational")]
    pub c1: BigRational,
    #[serde(rename = "D1", with = "bigser::rational")]
    pub d1: BigRational,
    #[serde(rename = "Y1", with = "bigser::rational")]
    pub y1: BigRational,
    #[serde(rename = "F1", with = "bigser::rational")]
    pub f1: BigRational,
    #[serde(rename = "X1", with = "bigser::rational")]
    pub x1: BigRational,
    #[serde(rename = "U1", with = "bigser::rational")]
    pub u1: BigRational,
    #[serde(rename = "X2", with = "bigser::rational")]
    pub x2: BigRational,
    #[serde(rename = "U2", with = "bigser::rational")]
    pub u2: BigRational,
    #[serde(rename = "X3", with = "bigser::rational")]
    pub x3: BigRational,
    #[serde(rename = "U3", with = "bigser::rational")]
    pub u3: BigRational,
    #[serde(with = "bigser::rational")]
    pub v: BigRational,
    #[serde(rename = "T", with = "bigser::rational")]
    pub t: BigRational,
    #[serde(with = "bigser::rational")]
    pub w: BigRational,
}

fn rat(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

fn nat_rat(n: &BigUint) -> BigRational {
    rat(BigInt::from(n.clone()))
}

fn rpow(x: &BigRational, e: u32) -> BigRational {
    x.clone().pow(e as i32)
}

fn bezout(a: &BigInt, b: &BigInt) -> Result<(BigInt, BigInt), SubsetError> {
    let eg = a.extended_gcd(b);
    if eg.gcd.is_one() {
        Ok((eg.x, eg.y))
    } else if (-&eg.gcd).is_one() {
        Ok((-eg.x, -eg.y))
    } else {
        Err(SubsetError::Construction(format!("{a} and {b} are not coprime")))
    }
}

fn split_x(x: &BigRational, h: u32) -> (BigInt, BigInt) {
    let p = rpow(x, h);
    (p.numer().clone(), p.denom().clone())
}

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// Forward direction for a positive integer x: j = x, v built from the G_i,
/// k from ranks of apparition lifted by the order-change law, z = jk.
pub fn subset_construct(
    x: &BigRational,
    cfg: &SubsetSystemConfig,
    table: &mut EdsTable,
    spec: &RingSpec,
    budget: &SubsetBudget,
) -> Result<SubsetWitness, SubsetError> {
    if !x.is_integer() || !x.is_positive() {
        return Err(SubsetError::NotPositiveInteger(x.clone()));
    }
    let source = table.source().clone();
    cfg.validate(spec, source.as_ref())?;
    let j = x.to_integer().to_u64().ok_or_else(|| SubsetError::Config("x is too large".into()))?;
    let h = cfg.h;
    let m = cfg.m;
    let xj = table.x(j * m)?;
    let (a, d) = (rat(xj.numer().clone()), rat(xj.denom().clone()));
    let (a1i, d1i) = split_x(&xj, h);
    let (a1, d1) = (rat(a1i.clone()), rat(d1i.clone()));
    let (x1, u1) = bezout(&a1i, &d1i)?;

    let x2h = rpow(x, 2 * h);
    let t1 = &a1 / &d1;
    let mut v = nat_rat(&cfg.z);
    for (i, li) in cfg.l.iter().enumerate() {
        let li = rat((*li).into());
        v = v * rpow(&d1, cfg.r) * cfg.g(i, &(&t1 - &li)) * cfg.g(i, &(&x2h - &li));
    }
    if !v.is_integer() {
        return Err(SubsetError::Construction(format!("v = {v} is not integral")));
    }
    let vi = v.to_integer().abs().to_biguint().unwrap();
    let e = cfg.v_exponent() as u64;

    let mut needs: BTreeMap<BigUint, u64> = BTreeMap::new();
    for (n, mult) in [(&cfg.z, 4 * h as u64), (&vi, 2 * h as u64 * e)] {
        let f = source.factor(n);
        if !f.complete {
            return Err(SubsetError::Incomplete(n.clone()));
        }
        for (p, ex) in &f.factors {
            if !spec.contains_prime(p)? {
                *needs.entry(p.clone()).or_default() += mult * *ex as u64;
            }
        }
    }

    let base = table.ctx().multiple(m as i64);
    let curve = table.ctx().curve.clone();
    let mut k = BigUint::one();
    let mut listed = vec![];
    for (p, need) in &needs {
        if table.ctx().is_bad(p) {
            return Err(SubsetError::Config(format!("bad prime {p} lies outside W")));
        }
        let pu = p.to_u64().ok_or_else(|| SubsetError::Construction(format!("prime {p} too large for rank search")))?;
        let rank = order_mod_p(&base, &curve, pu)?;
        let base_valuation = if rank.saturating_mul(m) <= budget.max_rank_index {
            valuation(&table.denominator(rank * m)?, p)
        } else {
            0
        };
        let index = if base_valuation == 0 {
            BigUint::zero()
        } else {
            let lifts = need.saturating_sub(base_valuation as u64);
            BigUint::from(rank) * p.pow(ceil_div(lifts, 2) as u32)
        };
        if index.is_zero() {
            k = BigUint::zero();
        } else if !k.is_zero() {
            k = k.lcm(&index);
        }
        listed.push(NeededIndex { p: p.clone(), rank, base_valuation, needed_valuation: *need, index });
    }
    let fits = |n: &BigUint| !n.is_zero() && n.to_u64().is_some_and(|n| n.saturating_mul(m).saturating_mul(j) <= budget.max_index);
    if !fits(&k) || budget.max_index == 0 {
        return Err(SubsetError::BudgetExhausted { k, needs: listed });
    }
    let k = k.to_u64().unwrap();
    let z = j * k;

    let xk = table.x(k * m)?;
    let xz = table.x(z * m)?;
    let (b1i, y1i) = split_x(&xk, h);
    let (c1i, f1i) = split_x(&xz, h);
    let (x2, u2) = bezout(&b1i, &y1i)?;
    let (x3, u3) = bezout(&c1i, &f1i)?;
    let y1 = rat(y1i.clone());

    let y1n = y1i.to_biguint().unwrap();
    let root = nth_root(&y1n, 2 * h);
    if Pow::pow(&root, 2 * h) != y1n {
        return Err(SubsetError::Construction("Y1 is not a 2h-th power".into()));
    }
    let t = nat_rat(&root) / (rpow(&nat_rat(&cfg.z), 2) * rpow(&v, e as u32));
    let (b1, c1, f1) = (rat(b1i), rat(c1i), rat(f1i));
    let lhs = rpow(&(&f1 * &b1 - &x2h * &y1 * &c1), 2 * h);
    let w = lhs / rpow(&y1, 2 * h + 1);

    Ok(SubsetWitness {
        x: x.clone(),
        j,
        k,
        z,
        a,
        b: rat(xk.numer().clone()),
        c: rat(xz.numer().clone()),
        d,
        y: rat(xk.denom().clone()),
        f: rat(xz.denom().clone()),
        a1,
        b1,
        c1,
        d1,
        y1,
        f1,
        x1: rat(x1),
        u1: rat(u1),
        x2: rat(x2),
        u2: rat(u2),
        x3: rat(x3),
        u3: rat(u3),
        v,
        t,
        w,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquationCheck {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

impl EquationCheck {
    fn new(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        EquationCheck { name: name.into(), verdict: Verdict::from_bool(ok), detail: detail.into() }
    }

    fn undecided(name: &str, detail: impl Into<String>) -> Self {
        EquationCheck { name: name.into(), verdict: Verdict::Inconclusive, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainInputs {
    #[serde(with = "bigser::nat")]
    pub j: BigUint,
    #[serde(with = "bigser::rational")]
    pub x: BigRational,
    /// Non-W part of v^h.
    #[serde(with = "bigser::nat")]
    pub y: BigUint,
    /// Non-W part of Y1 (or a certified divisor of it).
    #[serde(with = "bigser::nat")]
    pub e0: BigUint,
    pub c: u32,
    pub r: u32,
    pub n: u32,
    pub h: u32,
    #[serde(with = "bigser::rational")]
    pub kappa: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainAudit {
    #[serde(rename = "N", with = "bigser::nat")]
    pub n_value: BigUint,
    #[serde(with = "bigser::rational")]
    pub star_lhs: BigRational,
    #[serde(with = "bigser::rational")]
    pub star_rhs: BigRational,
    pub star: bool,
    #[serde(with = "bigser::rational")]
    pub h_value: BigRational,
    #[serde(with = "bigser::rational")]
    pub one_lhs: BigRational,
    #[serde(with = "bigser::rational")]
    pub one_rhs: BigRational,
    pub one: bool,
    #[serde(with = "bigser::rational")]
    pub two_lhs: BigRational,
    #[serde(with = "bigser::rational")]
    pub two_rhs: BigRational,
    pub two: bool,
    /// H vanishes at X2 j^(2h), i.e. x^(2h) = j^(2h).
    pub h_vanishes: bool,
    /// All three inequalities hold and together leave no room for H != 0.
    pub forces_integer: bool,
}

/// The three inequalities linking j, N = y^c and the non-W part e0 of Y1.
pub fn inequality_chain(inp: &ChainInputs) -> ChainAudit {
    let rn = inp.r * inp.n;
    let h = inp.h;
    let nv = Pow::pow(&inp.y, inp.c);
    let nr = nat_rat(&nv);
    let jr = nat_rat(&inp.j);
    let kappa = &inp.kappa;

    let star_lhs = rpow(&jr, 2 * h);
    let star_rhs = rpow(kappa, h) * rpow(&nr, 2);

    let x2 = rat(rpow(&inp.x, h).denom().clone());
    let big_x2 = rpow(&x2, 2 * h * rn);
    let h_value = rpow(&(&big_x2 * rpow(&jr, 2 * h) - &big_x2 * rpow(&inp.x, 2 * h)), rn);
    let one_lhs = rpow(&h_value, 2);
    let rnr = rat(rn.into());
    let one_rhs = rpow(&(&rnr * rpow(kappa, h * rn) * rpow(&nr, 3 * rn + 1)), 2);

    let two_lhs = rpow(&nat_rat(&inp.e0), rn);
    let two_rhs = rpow(&(rpow(&(&rnr * rpow(kappa, 2 * inp.n * h)), rn) * rpow(&nr, 5 * rn)), 2);

    let star = star_lhs < star_rhs;
    let one = one_lhs <= one_rhs;
    let two = two_lhs >= two_rhs;
    let forces_integer = star && one && two && one_rhs < two_lhs;
    ChainAudit {
        n_value: nv,
        star,
        one,
        two,
        h_vanishes: h_value.is_zero(),
        forces_integer,
        star_lhs,
        star_rhs,
        h_value,
        one_lhs,
        one_rhs,
        two_lhs,
        two_rhs,
    }
}

/// The quantity bounded by y^c for a ratio t = alpha/beta: the maximum of
/// |t|, |beta| and the coefficients of the characteristic polynomial of
/// beta^rn * t over Q.
pub fn bounded_quantity(t: &BigRational, rn: u32) -> BigRational {
    let beta = rat(t.denom().clone());
    let elem = (rpow(&beta, rn) * t).abs();
    let mut best = t.abs().max(beta);
    let mut binom = BigInt::one();
    for i in 0..=rn {
        if i > 0 {
            binom = binom * BigInt::from(rn - i + 1) / BigInt::from(i);
        }
        best = best.max(rat(binom.clone()) * rpow(&elem, i));
    }
    best
}

fn log_ratio(q: &BigRational, y: &BigUint) -> f64 {
    let num = q.numer().abs().to_biguint().unwrap();
    let den = q.denom().to_biguint().unwrap();
    (ln_nat(&num) - ln_nat(&den)) / ln_nat(y)
}

/// Samples t, takes y = non-W part of the numerator of prod G_i(t - l_i),
/// and returns the smallest integer c with 20% headroom over the largest
/// observed log(quantity)/log(y).
pub fn estimate_bounds_constant(
    cfg: &SubsetSystemConfig,
    spec: &RingSpec,
    source: &dyn FactorSource,
    samples: &[BigRational],
) -> Result<(u32, CheckReport), SubsetError> {
    let mut rep = CheckReport::new("bounds-constant");
    let mut worst: f64 = 0.0;
    let mut used = 0;
    let mut skipped = 0;
    for t in samples {
        let g = cfg.g_product(t);
        let num = g.numer().abs().to_biguint().unwrap();
        if num.is_zero() {
            skipped += 1;
            continue;
        }
        let (y, _) = match spec.split_part(&num, source) {
            Ok(parts) => parts,
            Err(RingError::Incomplete(_)) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        if y.is_one() {
            skipped += 1;
            continue;
        }
        used += 1;
        worst = worst.max(log_ratio(&bounded_quantity(t, cfg.rn()), &y));
    }
    rep.checked = used;
    let c = ((worst * 1.2).ceil() as u32).max(1);
    rep.complete = skipped == 0;
    Ok((c, rep.with_details(json!({ "c": c, "max_ratio": worst, "samples": used, "skipped": skipped }))))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetAudit {
    pub test_mode: bool,
    pub v_exponent: u32,
    pub equations: Vec<EquationCheck>,
    pub bounds_constant: EquationCheck,
    pub chain: Option<ChainAudit>,
    #[serde(default)]
    pub chain_note: Option<String>,
    /// Verdict over the equations only.
    pub verdict: Verdict,
}

impl SubsetAudit {
    pub fn failed(&self) -> Vec<&str> {
        self.equations.iter().filter(|e| e.verdict == Verdict::Fail).map(|e| e.name.as_str()).collect()
    }

    pub fn equation(&self, name: &str) -> Option<&EquationCheck> {
        self.equations.iter().find(|e| e.name == name)
    }
}

fn in_ring(spec: &RingSpec, x: &BigRational, source: &dyn FactorSource) -> Option<bool> {
    spec.in_ring(x, source).ok()
}

/// Checks every equation of the system exactly, then evaluates the
/// inequality chain and the empirical bounds constant on the tuple.
pub fn subset_check(
    wit: &SubsetWitness,
    cfg: &SubsetSystemConfig,
    table: &mut EdsTable,
    spec: &RingSpec,
) -> Result<SubsetAudit, SubsetError> {
    let source = table.source().clone();
    let src = source.as_ref();
    let h = cfg.h;
    let m = cfg.m;
    let one = BigRational::one();
    let mut eqs = vec![];

    eqs.push(EquationCheck::new(
        "multiplication-graph",
        wit.j > 0 && wit.k > 0 && wit.j.checked_mul(wit.k) == Some(wit.z),
        format!("j = {}, k = {}, z = {}", wit.j, wit.k, wit.z),
    ));

    let mut idx_ok = true;
    let mut idx_detail = vec![];
    for (name, n, num, den) in [("A/D", wit.j, &wit.a, &wit.d), ("B/Y", wit.k, &wit.b, &wit.y), ("C/F", wit.z, &wit.c, &wit.f)] {
        let ok = n > 0 && !den.is_zero() && table.x(n * m)? == num / den;
        if !ok {
            idx_detail.push(format!("{name} != x_{}", n * m));
        }
        idx_ok &= ok;
    }
    eqs.push(EquationCheck::new("index-match", idx_ok, idx_detail.join("; ")));

    let nz = |q: &BigRational| !q.is_zero();
    let cn_ok = nz(&wit.d)
        && nz(&wit.y)
        && nz(&wit.f)
        && nz(&wit.d1)
        && nz(&wit.y1)
        && nz(&wit.f1)
        && rpow(&(&wit.a / &wit.d), h) == &wit.a1 / &wit.d1
        && rpow(&(&wit.b / &wit.y), h) == &wit.b1 / &wit.y1
        && rpow(&(&wit.c / &wit.f), h) == &wit.c1 / &wit.f1;
    eqs.push(EquationCheck::new("class-number-power", cn_ok, ""));

    let rp = [
        &wit.x1 * &wit.a1 + &wit.u1 * &wit.d1 == one,
        &wit.x2 * &wit.b1 + &wit.u2 * &wit.y1 == one,
        &wit.x3 * &wit.c1 + &wit.u3 * &wit.f1 == one,
    ];
    eqs.push(EquationCheck::new("coprimality", rp.iter().all(|b| *b), format!("{rp:?}")));

    let x2h = rpow(&wit.x, 2 * h);
    let quotient = if cn_ok {
        let t1 = &wit.a1 / &wit.d1;
        let mut den = nat_rat(&cfg.z);
        for (i, li) in cfg.l.iter().enumerate() {
            let li = rat((*li).into());
            den = den * cfg.g(i, &(&t1 - &li)) * cfg.g(i, &(&x2h - &li));
        }
        if den.is_zero() {
            None
        } else {
            Some(rpow(&wit.v, h) / den)
        }
    } else {
        None
    };
    eqs.push(match quotient.as_ref().map(|q| (q, in_ring(spec, q, src))) {
        Some((_, Some(ok))) => EquationCheck::new("bound-quotient", ok, ""),
        Some((q, None)) => EquationCheck::undecided("bound-quotient", format!("membership of {q} undecided")),
        None => EquationCheck::new("bound-quotient", false, "quotient undefined"),
    });

    let e = cfg.v_exponent();
    let shape = rpow(&(rpow(&nat_rat(&cfg.z), 2) * rpow(&wit.v, e) * &wit.t), 2 * h);
    eqs.push(EquationCheck::new("denominator-shape", wit.y1 == shape, format!("exponent on v: {e}")));

    let lhs = rpow(&(&wit.f1 * &wit.b1 - &x2h * &wit.y1 * &wit.c1), 2 * h);
    eqs.push(EquationCheck::new("equivalence", lhs == rpow(&wit.y1, 2 * h + 1) * &wit.w, ""));

    let vars = [
        ("A", &wit.a),
        ("B", &wit.b),
        ("C", &wit.c),
        ("D", &wit.d),
        ("Y", &wit.y),
        ("F", &wit.f),
        ("A1", &wit.a1),
        ("B1", &wit.b1),
        ("C1", &wit.c1),
        ("D1", &wit.d1),
        ("Y1", &wit.y1),
        ("F1", &wit.f1),
        ("X1", &wit.x1),
        ("U1", &wit.u1),
        ("X2", &wit.x2),
        ("U2", &wit.u2),
        ("X3", &wit.x3),
        ("U3", &wit.u3),
        ("v", &wit.v),
        ("T", &wit.t),
        ("w", &wit.w),
    ];
    let mut outside = vec![];
    let mut undecided = vec![];
    for (name, val) in vars {
        match in_ring(spec, val, src) {
            Some(true) => {}
            Some(false) => outside.push(name),
            None => undecided.push(name),
        }
    }
    eqs.push(if !outside.is_empty() {
        EquationCheck::new("ring-membership", false, format!("outside O_W: {outside:?}"))
    } else if !undecided.is_empty() {
        EquationCheck::undecided("ring-membership", format!("undecided: {undecided:?}"))
    } else {
        EquationCheck::new("ring-membership", true, "")
    });

    let verdict = eqs.iter().fold(Verdict::Pass, |acc, e| acc.and(e.verdict));

    // Inequality chain and bounds constant, on the non-W parts.
    let (mut chain, mut chain_note, mut bounds_constant) = (None, None, EquationCheck::undecided("bounds-constant", "v not factored"));
    let vh = rpow(&wit.v, h);
    if vh.is_integer() && !vh.is_zero() {
        let vn = vh.to_integer().abs().to_biguint().unwrap();
        match spec.split_part(&vn, src) {
            Ok((y, _)) if !y.is_one() => {
                let yc = nat_rat(&Pow::pow(&y, cfg.c));
                let mut worst = vec![];
                for (label, t) in [("A1/D1", &wit.a1 / &wit.d1), ("x^2h", x2h.clone())] {
                    if bounded_quantity(&t, cfg.rn()) >= yc {
                        worst.push(label);
                    }
                }
                bounds_constant = EquationCheck::new(
                    "bounds-constant",
                    worst.is_empty(),
                    if worst.is_empty() { format!("y = {y}, c = {}", cfg.c) } else { format!("empirical c violated by {worst:?}") },
                );
                let y1 = wit.y1.to_integer().abs().to_biguint().unwrap_or_default();
                let vf = src.factor(&vn);
                let zf = src.factor(&cfg.z);
                let mut e0 = BigUint::one();
                let mut seen = std::collections::BTreeSet::new();
                for (p, _) in vf.factors.iter().chain(zf.factors.iter()) {
                    if seen.insert(p.clone()) && !spec.contains_prime(p)? && !y1.is_zero() {
                        e0 *= p.pow(valuation(&y1, p));
                    }
                }
                if wit.j > 0 {
                    chain = Some(inequality_chain(&ChainInputs {
                        j: BigUint::from(wit.j),
                        x: wit.x.clone(),
                        y,
                        e0,
                        c: cfg.c,
                        r: cfg.r,
                        n: cfg.n,
                        h,
                        kappa: cfg.kappa.clone(),
                    }));
                    chain_note = Some("e0 is the part of Y1 supported on the non-W primes of Z v, a lower bound".into());
                }
            }
            Ok(_) => chain_note = Some("v is a W-unit".into()),
            Err(e) => chain_note = Some(e.to_string()),
        }
    }

    Ok(SubsetAudit {
        test_mode: cfg.is_test_mode(),
        v_exponent: e,
        equations: eqs,
        bounds_constant,
        chain,
        chain_note,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divmodel::PrimeRule;
    use crate::eds::reference_table;

    fn spec() -> RingSpec {
        let mut s = RingSpec::rational([2, 3], PrimeRule::NoDegreeOneQuadratic { d: -23 });
        s.exclude.insert(BigUint::from(5u32));
        s.bad_included = true;
        s
    }

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn construct_and_check_one() {
        let mut t = reference_table();
        let cfg = SubsetSystemConfig::default();
        let w = subset_construct(&r(1), &cfg, &mut t, &spec(), &SubsetBudget::default()).unwrap();
        assert_eq!((w.j, w.k, w.z), (1, 50, 50));
        assert_eq!(w.v, r(5 * 32 * 24 * 144 * 192 * 384 * 464));
        let audit = subset_check(&w, &cfg, &mut t, &spec()).unwrap();
        assert_eq!(audit.verdict, Verdict::Pass, "{:?}", audit.equations);
        assert!(audit.test_mode);
        let chain = audit.chain.unwrap();
        assert!(chain.h_vanishes);
        assert_eq!(chain.n_value, BigUint::from(145u32));

        let mut bad = w.clone();
        bad.y1 = &bad.y1 * r(7);
        let a = subset_check(&bad, &cfg, &mut t, &spec()).unwrap();
        assert!(a.failed().contains(&"denominator-shape"));

        let mut bad = w.clone();
        bad.z = 51;
        let a = subset_check(&bad, &cfg, &mut t, &spec()).unwrap();
        assert!(a.failed().contains(&"multiplication-graph"));

        let mut bad = w;
        bad.t = &bad.t / r(13);
        let a = subset_check(&bad, &cfg, &mut t, &spec()).unwrap();
        assert!(a.failed().contains(&"ring-membership"));
    }

    #[test]
    fn construct_rejects_and_exhausts() {
        let mut t = reference_table();
        let cfg = SubsetSystemConfig::default();
        let half = BigRational::new(1.into(), 2.into());
        assert!(matches!(
            subset_construct(&half, &cfg, &mut t, &spec(), &SubsetBudget::default()),
            Err(SubsetError::NotPositiveInteger(_))
        ));
        match subset_construct(&r(1), &cfg, &mut t, &spec(), &SubsetBudget { max_index: 0, ..Default::default() }) {
            Err(SubsetError::BudgetExhausted { needs, .. }) => {
                let ps: Vec<u64> = needs.iter().map(|n| n.p.to_u64().unwrap()).collect();
                assert_eq!(ps, vec![5, 29]);
                assert_eq!(needs[0].index, BigUint::from(50u32));
            }
            other => panic!("{other:?}"),
        }
        let honest = SubsetSystemConfig { exponent: ExponentMode::Honest, ..cfg };
        assert!(matches!(
            subset_construct(&r(1), &honest, &mut t, &spec(), &SubsetBudget::default()),
            Err(SubsetError::BudgetExhausted { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let src = crate::arith::Factorizer::default();
        let cfg = SubsetSystemConfig::default();
        cfg.validate(&spec(), &src).unwrap();
        let small_d = SubsetSystemConfig { d: 9, ..cfg.clone() };
        assert!(small_d.validate(&spec(), &src).is_err());
        let small_z = SubsetSystemConfig { z: BigUint::from(3u32), ..cfg.clone() };
        assert!(small_z.validate(&spec(), &src).is_err());
        let w_z = SubsetSystemConfig { z: BigUint::from(7u32), ..cfg };
        // 7 is inert in Q(sqrt -23), so it lies in W.
        assert!(w_z.validate(&spec(), &src).is_err());
    }

    #[test]
    fn chain_by_hand() {
        let a = inequality_chain(&ChainInputs {
            j: BigUint::from(2u32),
            x: r(1),
            y: BigUint::from(3u32),
            e0: BigUint::from(5u32),
            c: 1,
            r: 2,
            n: 1,
            h: 1,
            kappa: r(2),
        });
        assert_eq!(a.n_value, BigUint::from(3u32));
        assert_eq!((a.star_lhs.clone(), a.star_rhs.clone()), (r(4), r(18)));
        assert_eq!(a.h_value, r(9));
        assert_eq!(a.one_lhs, r(81));
        assert_eq!(a.one_rhs, r(306_110_016));
        assert_eq!(a.two_lhs, r(25));
        assert_eq!(a.two_rhs, r(14_281_868_906_496));
        assert!(a.star && a.one && !a.two && !a.forces_integer && !a.h_vanishes);
    }

    #[test]
    fn bounds_constant_estimate() {
        let src = crate::arith::Factorizer::default();
        let cfg = SubsetSystemConfig::default();
        let samples: Vec<BigRational> = (1..=6).flat_map(|a| (1..=4).map(move |b| BigRational::new(a.into(), b.into()))).collect();
        let (c, rep) = estimate_bounds_constant(&cfg, &spec(), &src, &samples).unwrap();
        assert!(c >= 1);
        assert!(rep.checked > 0);
        assert_eq!(bounded_quantity(&r(3), 2), r(9));
        assert_eq!(bounded_quantity(&BigRational::new(1.into(), 2.into()), 2), r(4));
    }
}
