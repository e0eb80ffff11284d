use crate::arith::{primes_up_to, QuadElem, QuadError, QuadPrime, SplitKind};
use crate::curve::{order_mod_p, CurveContext};
use crate::divmodel::{RingError, RingSpec};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerticalError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no admissible prime q up to {0}")]
    NoPrime(u64),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerticalConfig {
    /// Rational prime below the primes q_i; chosen automatically if absent.
    pub q: Option<u64>,
    /// Indices are multiples of this (m1 * m0, or r * m1 for the subfield form).
    pub step: u64,
    /// Pairs (j, t*j) are searched for t up to this bound.
    pub t_max: u64,
    /// Automatic choice of q looks at primes up to this bound.
    pub q_bound: u64,
}

impl Default for VerticalConfig {
    fn default() -> Self {
        VerticalConfig { q: None, step: 1, t_max: 12, q_bound: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerticalForm {
    /// `-ord x_j < 2 ord(x_j / x_l - u)` with j | l.
    RankOneDown,
    /// `2 ord(u - a1/a2) >= -ord a2` for a1, a2 in rE(Q).
    Subfield,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum VerticalVerdict {
    /// Every level up to `depth` has a witness pair; membership is only
    /// claimed up to this depth.
    Accepted { depth: u32 },
    Rejected,
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelWitness {
    pub level: u32,
    pub j: u64,
    pub l: u64,
    /// Pole orders of x_j and x_l at each q_i, in q_i-normalized units.
    pub pole_j: Vec<i64>,
    pub pole_l: Vec<i64>,
    /// Lower bounds for ord_{q_i}(x_j / x_l - u).
    pub closeness: Vec<i64>,
    pub passed: bool,
}

/// Analytic obstruction: for rational y, min_i ord_{q_i}(y - u) <= delta,
/// while level `level` needs more at every q_i.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionCertificate {
    pub q: u64,
    pub kind: SplitKind,
    pub delta: i64,
    pub level: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareCertificate {
    pub k: u64,
    pub levels: Vec<LevelWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub pairs_tried: u64,
    pub pairs_passed: u64,
    pub levels: Vec<LevelWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerticalReport {
    pub form: VerticalForm,
    pub u: String,
    pub d: i64,
    pub q: u64,
    pub kind: SplitKind,
    pub depth: u32,
    pub method: String,
    /// For rationals: the four-square pieces of the numerator's positive
    /// and negative parts and of the denominator.
    pub decomposition: Vec<[u64; 4]>,
    pub squares: Vec<SquareCertificate>,
    pub certificate: Option<RejectionCertificate>,
    pub search: Option<SearchSummary>,
    pub verdict: VerticalVerdict,
}

/// Division polynomial values psi_n(P) modulo q^N for an integral point.
/// For a good prime q, x_n = phi_n / psi_n^2 with phi_n, psi_n coprime at q.
struct DivisionValues {
    modulus: BigInt,
    x: BigInt,
    y: BigInt,
    a: BigInt,
    b: BigInt,
    inv_2y: BigInt,
    memo: HashMap<i64, BigInt>,
}

impl DivisionValues {
    fn new(ctx: &CurveContext, q: u64, prec: u32) -> Option<Self> {
        let modulus = BigInt::from(q).pow(prec);
        let red = |r: &BigRational| -> Option<BigInt> {
            let inv = r.denom().modinv(&modulus)?;
            Some((r.numer() * inv).mod_floor(&modulus))
        };
        let x = red(ctx.p.x()?)?;
        let y = red(ctx.p.y()?)?;
        let inv_2y = (BigInt::from(2) * &y).modinv(&modulus)?;
        Some(DivisionValues {
            x,
            y,
            a: ctx.curve.a.mod_floor(&modulus),
            b: ctx.curve.b.mod_floor(&modulus),
            inv_2y,
            modulus,
            memo: HashMap::new(),
        })
    }

    fn m(&self, v: BigInt) -> BigInt {
        v.mod_floor(&self.modulus)
    }

    fn psi(&mut self, n: i64) -> BigInt {
        if n < 0 {
            let v = self.psi(-n);
            return self.m(-v);
        }
        if let Some(v) = self.memo.get(&n) {
            return v.clone();
        }
        let (x, y, a, b) = (&self.x, &self.y, &self.a, &self.b);
        let v = match n {
            0 => BigInt::zero(),
            1 => BigInt::one(),
            2 => BigInt::from(2) * y,
            3 => BigInt::from(3) * x.pow(4) + BigInt::from(6) * a * x * x + BigInt::from(12) * b * x - a * a,
            4 => {
                BigInt::from(4)
                    * y
                    * (x.pow(6) + BigInt::from(5) * a * x.pow(4) + BigInt::from(20) * b * x.pow(3)
                        - BigInt::from(5) * a * a * x * x
                        - BigInt::from(4) * a * b * x
                        - BigInt::from(8) * b * b
                        - a.pow(3))
            }
            _ if n % 2 == 1 => {
                let k = (n - 1) / 2;
                self.psi(k + 2) * self.psi(k).pow(3) - self.psi(k - 1) * self.psi(k + 1).pow(3)
            }
            _ => {
                let k = n / 2;
                let inner = self.psi(k + 2) * self.psi(k - 1).pow(2) - self.psi(k - 2) * self.psi(k + 1).pow(2);
                inner * self.psi(k) * &self.inv_2y
            }
        };
        let v = self.m(v);
        self.memo.insert(n, v.clone());
        v
    }

    fn phi(&mut self, n: i64) -> BigInt {
        let p = self.psi(n);
        let v = &self.x * &p * &p - self.psi(n - 1) * self.psi(n + 1);
        self.m(v)
    }
}

fn vq(x: &BigInt, q: u64, cap: u32) -> i64 {
    if x.is_zero() {
        return cap as i64;
    }
    let qb = BigInt::from(q);
    let mut v = 0;
    let mut y = x.clone();
    while v < cap && (&y % &qb).is_zero() {
        y /= &qb;
        v += 1;
    }
    v as i64
}

/// Local data at the primes above q.
struct Local {
    d: i64,
    q: u64,
    prec: u32,
    kind: SplitKind,
    e: i64,
    /// sqrt(d) modulo q^prec under each embedding (split primes only).
    roots: Vec<BigInt>,
    dv: DivisionValues,
}

/// A target u reduced at the primes above q: its images under the
/// embeddings (split) or its coordinates a, b.
struct Target {
    images: Vec<BigInt>,
    coords: (BigInt, BigInt),
}

impl Local {
    fn new(ctx: &CurveContext, d: i64, q: u64, prec: u32) -> Result<Self, VerticalError> {
        let primes = QuadPrime::above(&BigUint::from(q), d)?;
        let kind = primes[0].kind;
        let dv = DivisionValues::new(ctx, q, prec)
            .ok_or_else(|| VerticalError::Precondition(format!("base point is not integral at {q} or 2y vanishes")))?;
        let roots = if kind == SplitKind::Split { primes.iter().map(|p| p.root_mod(prec).0).collect() } else { vec![] };
        let e = if kind == SplitKind::Ramified { 2 } else { 1 };
        Ok(Local { d, q, prec, kind, e, roots, dv })
    }

    fn target(&self, u: &QuadElem) -> Result<Target, VerticalError> {
        let modulus = &self.dv.modulus;
        let red = |r: &BigRational| -> Result<BigInt, VerticalError> {
            let inv = r.denom().modinv(modulus).ok_or_else(|| {
                VerticalError::Precondition(format!("u is not integral at the primes above {}", self.q))
            })?;
            Ok((r.numer() * inv).mod_floor(modulus))
        };
        let (a, b) = (red(&u.a)?, red(&u.b)?);
        let images = self.roots.iter().map(|r| (&a + &b * r).mod_floor(modulus)).collect();
        Ok(Target { images, coords: (a, b) })
    }

    fn count(&self) -> usize {
        if self.kind == SplitKind::Split {
            2
        } else {
            1
        }
    }

    /// ord_{q_i}(A - u B) for A, B known modulo q^prec, capped by precision.
    fn ord_minus_u(&self, u: &Target, big_a: &BigInt, big_b: &BigInt) -> Vec<i64> {
        let m = &self.dv.modulus;
        let cap = self.prec;
        match self.kind {
            SplitKind::Split => u
                .images
                .iter()
                .map(|ui| vq(&(big_a - ui * big_b).mod_floor(m), self.q, cap))
                .collect(),
            SplitKind::Inert | SplitKind::Ramified => {
                let alpha = (big_a - &u.coords.0 * big_b).mod_floor(m);
                let beta = (&u.coords.1 * big_b).mod_floor(m);
                let (va, vb) = (vq(&alpha, self.q, cap), vq(&beta, self.q, cap));
                if self.kind == SplitKind::Inert {
                    vec![va.min(vb)]
                } else {
                    vec![(2 * va).min(2 * vb + 1)]
                }
            }
        }
    }

    /// Pole order of x_n at q_i (q_i units), from psi_n.
    fn pole(&mut self, n: u64) -> i64 {
        let p = self.dv.psi(n as i64);
        2 * self.e * vq(&p, self.q, self.prec)
    }

    /// Lower bound for ord_{q_i}(x_j / x_l - u).
    fn closeness(&mut self, u: &Target, j: u64, l: u64) -> Vec<i64> {
        let (pj, fj) = (self.dv.psi(j as i64), self.dv.phi(j as i64));
        let (pl, fl) = (self.dv.psi(l as i64), self.dv.phi(l as i64));
        let m = self.dv.modulus.clone();
        let num_a = (&fj * &pl * &pl).mod_floor(&m);
        let num_b = (&pj * &pj * &fl).mod_floor(&m);
        let den = self.e * (2 * vq(&pj, self.q, self.prec) + vq(&fl, self.q, self.prec));
        self.ord_minus_u(u, &num_a, &num_b).into_iter().map(|o| o - den).collect()
    }
}

fn witness(local: &mut Local, u: &Target, form: VerticalForm, level: u32, j: u64, l: u64) -> LevelWitness {
    let pj = local.pole(j);
    let pl = local.pole(l);
    let close = local.closeness(u, j, l);
    let lv = level as i64;
    let deep = match form {
        VerticalForm::RankOneDown => pj > lv,
        VerticalForm::Subfield => pj > lv && pl > lv,
    };
    let near = close.iter().all(|&c| match form {
        VerticalForm::RankOneDown => pj < 2 * c,
        VerticalForm::Subfield => 2 * c >= pl,
    });
    let n = local.count();
    LevelWitness {
        level,
        j,
        l,
        pole_j: vec![pj; n],
        pole_l: vec![pl; n],
        closeness: close,
        passed: deep && near,
    }
}

/// Smallest multiple j of `step` with pole(x_j) > level at the q_i.
fn level_index(local: &mut Local, rank: u64, step: u64, level: u32) -> u64 {
    let base = rank.lcm(&step);
    let mut n = base;
    while local.pole(n) <= level as i64 {
        n *= local.q;
    }
    n
}

fn admissible(ctx: &CurveContext, u: &QuadElem, spec: &RingSpec, q: u64) -> Result<bool, VerticalError> {
    let qb = BigUint::from(q);
    if q == 2 || ctx.is_bad(&qb) || spec.contains_prime(&qb)? || u.d.unsigned_abs().is_multiple_of(q) {
        return Ok(false);
    }
    let qi = BigInt::from(q);
    if (u.a.denom() % &qi).is_zero() || (u.b.denom() % &qi).is_zero() {
        return Ok(false);
    }
    let y = ctx.p.y().map(|y| y.numer().clone()).unwrap_or_default();
    Ok(!(y % &qi).is_zero())
}

fn choose_q(
    ctx: &CurveContext,
    u: &QuadElem,
    spec: &RingSpec,
    cfg: &VerticalConfig,
    depth: u32,
) -> Result<(u64, u64), VerticalError> {
    let mut best: Option<(u64, u64, u64)> = None;
    for q in primes_up_to(cfg.q_bound) {
        if !admissible(ctx, u, spec, q)? {
            continue;
        }
        if crate::arith::splitting_type(&BigUint::from(q), u.d) != SplitKind::Split {
            continue;
        }
        let Ok(rank) = order_mod_p(&ctx.p, &ctx.curve, q) else { continue };
        let mut local = Local::new(ctx, u.d, q, 2 * depth + 8)?;
        let n = level_index(&mut local, rank, cfg.step, depth);
        if best.is_none_or(|(bn, _, _)| n < bn) {
            best = Some((n, q, rank));
        }
    }
    best.map(|(_, q, r)| (q, r)).ok_or(VerticalError::NoPrime(cfg.q_bound))
}

fn four_squares(n: u64) -> Option<[u64; 4]> {
    let r = |x: u64| (x as f64).sqrt() as u64 + 1;
    for a in (0..=r(n)).rev() {
        if a * a > n {
            continue;
        }
        let n1 = n - a * a;
        for b in (0..=a.min(r(n1))).rev() {
            if b * b > n1 {
                continue;
            }
            let n2 = n1 - b * b;
            for c in (0..=b.min(r(n2))).rev() {
                if c * c > n2 {
                    continue;
                }
                let n3 = n2 - c * c;
                let d = (n3 as f64).sqrt().round() as u64;
                if d * d == n3 && d <= c {
                    return Some([a, b, c, d]);
                }
            }
        }
    }
    None
}

/// The alternative with j | l for the given form, certifying u = k^2 at
/// every level via l = k j.
fn certify_square(
    local: &mut Local,
    form: VerticalForm,
    rank: u64,
    step: u64,
    k: u64,
    depth: u32,
) -> Result<SquareCertificate, VerticalError> {
    let k2 = i64::try_from(k * k).map_err(|_| VerticalError::Precondition("square too large".into()))?;
    let target = local.target(&QuadElem::from_ints(local.d, k2, 0)?)?;
    let levels = (1..=depth)
        .map(|level| {
            let j = level_index(local, rank, step, level);
            witness(local, &target, form, level, j, k * j)
        })
        .collect();
    Ok(SquareCertificate { k, levels })
}

fn run(
    form: VerticalForm,
    u: &QuadElem,
    ctx: &CurveContext,
    spec: &RingSpec,
    depth: u32,
    cfg: &VerticalConfig,
) -> Result<VerticalReport, VerticalError> {
    let (q, rank) = match cfg.q {
        Some(q) => {
            if !admissible(ctx, &QuadElem { d: u.d, a: BigRational::zero(), b: BigRational::zero() }, spec, q)? {
                return Err(VerticalError::Precondition(format!("q = {q} is bad, inverted, ramified in the curve data, or divides 2y")));
            }
            let rank = order_mod_p(&ctx.p, &ctx.curve, q)
                .map_err(|e| VerticalError::Precondition(format!("no reduction at {q}: {e}")))?;
            (q, rank)
        }
        None => choose_q(ctx, u, spec, cfg, depth)?,
    };
    let prec = 6 * depth + 24;
    let mut local = Local::new(ctx, u.d, q, prec)?;
    let target = local.target(u)?;
    let mut report = VerticalReport {
        form,
        u: u.to_string(),
        d: u.d,
        q,
        kind: local.kind,
        depth,
        method: String::new(),
        decomposition: vec![],
        squares: vec![],
        certificate: None,
        search: None,
        verdict: VerticalVerdict::Rejected,
    };
    if u.is_zero() {
        report.method = "zero".into();
        report.verdict = VerticalVerdict::Accepted { depth };
        return Ok(report);
    }
    if u.is_rational() {
        let (num, den) = (u.a.numer().clone(), u.a.denom().clone());
        let pieces: Vec<u64> = [
            if num.is_positive() { num.clone() } else { BigInt::zero() },
            if num.is_negative() { -num.clone() } else { BigInt::zero() },
            den.clone(),
        ]
        .iter()
        .filter_map(|x| x.to_u64())
        .collect();
        if pieces.len() < 3 {
            report.verdict = VerticalVerdict::Inconclusive { reason: "rational too large to decompose".into() };
            return Ok(report);
        }
        let root = |x: u64| {
            let r = (x as f64).sqrt().round() as u64;
            (r * r == x).then_some(r)
        };
        let mut ks: Vec<u64> = vec![];
        if let (Some(k), true) = (root(pieces[0]), den.is_one() && pieces[1] == 0) {
            report.method = format!("square of {k}");
            ks.push(k);
        } else {
            report.method = "four-square closure".into();
            for (i, &p) in pieces.iter().enumerate() {
                if p == 0 || (i == 2 && p == 1) {
                    continue;
                }
                let dec = four_squares(p).expect("every natural number is a sum of four squares");
                report.decomposition.push(dec);
                ks.extend(dec.iter().copied().filter(|&k| k > 0));
            }
            ks.sort_unstable();
            ks.dedup();
        }
        for k in ks {
            report.squares.push(certify_square(&mut local, form, rank, cfg.step, k, depth)?);
        }
        let ok = report.squares.iter().all(|s| s.levels.iter().all(|w| w.passed));
        report.verdict = if ok {
            VerticalVerdict::Accepted { depth }
        } else {
            VerticalVerdict::Inconclusive { reason: "a square component failed at some level".into() }
        };
        return Ok(report);
    }
    // irrational: y - u and y - sigma(u) differ by 2b sqrt(d) for rational y
    let b = &u.b;
    let vb = crate::arith::rational_valuation(b, &BigUint::from(q)).expect("b is nonzero");
    let delta = match local.kind {
        SplitKind::Split => vb + i64::from(q == 2),
        SplitKind::Inert => vb,
        SplitKind::Ramified => 2 * vb + 1,
    };
    let level = (2 * delta).max(1) as u32;
    report.method = "irrational".into();
    report.certificate = Some(RejectionCertificate { q, kind: local.kind, delta, level });
    let mut summary = SearchSummary { pairs_tried: 0, pairs_passed: 0, levels: vec![] };
    for lv in 1..=depth {
        let j = level_index(&mut local, rank, cfg.step, lv);
        for t in 1..=cfg.t_max {
            let w = witness(&mut local, &target, form, lv, j, t * j);
            summary.pairs_tried += 1;
            if w.passed {
                summary.pairs_passed += 1;
            }
            if t == 1 || w.passed {
                summary.levels.push(w);
            }
        }
    }
    report.search = Some(summary);
    report.verdict = VerticalVerdict::Rejected;
    Ok(report)
}

/// Checks the one-universal-quantifier condition for `u in Q` at challenge
/// levels 1..=depth along the primes above q.
pub fn rankonedown_check(
    u: &QuadElem,
    ctx: &CurveContext,
    spec: &RingSpec,
    depth: u32,
    cfg: &VerticalConfig,
) -> Result<VerticalReport, VerticalError> {
    run(VerticalForm::RankOneDown, u, ctx, spec, depth, cfg)
}

/// The subfield form with pairs from rE(Q); `r` bounds [E(M) : E(Q)].
/// Requires u to be integral at the primes above q.
pub fn subfield_check(
    u: &QuadElem,
    ctx: &CurveContext,
    r: u64,
    depth: u32,
    cfg: &VerticalConfig,
) -> Result<VerticalReport, VerticalError> {
    let cfg = VerticalConfig { step: r * cfg.step, ..cfg.clone() };
    run(VerticalForm::Subfield, u, ctx, &RingSpec::integers(), depth, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> CurveContext {
        CurveContext::reference()
    }

    fn rat(d: i64, k: i64) -> QuadElem {
        QuadElem::from_ints(d, k, 0).unwrap()
    }

    #[test]
    fn division_values_match_exact_denominators() {
        // x_2 = 129/100, x_3 = 164323/29241 on y^2 = x^3 - 2
        let mut dv = DivisionValues::new(&ctx(), 1_000_003, 2).unwrap();
        let m = dv.modulus.clone();
        for (n, num, den) in [(2i64, 129i64, 100i64), (3, 164323, 29241)] {
            let psi = dv.psi(n);
            let phi = dv.phi(n);
            assert_eq!((phi * BigInt::from(den)).mod_floor(&m), (BigInt::from(num) * &psi * &psi).mod_floor(&m));
        }
    }

    #[test]
    fn auto_prime_choice() {
        let spec = RingSpec::integers();
        let cfg = VerticalConfig::default();
        for (d, q) in [(2, 7), (5, 19), (3, 61)] {
            let (got, _) = choose_q(&ctx(), &QuadElem::sqrt_d(d).unwrap(), &spec, &cfg, 3).unwrap();
            assert_eq!(got, q, "d = {d}");
        }
    }

    #[test]
    fn squares_accepted_constructively() {
        let r = rankonedown_check(&rat(5, 4), &ctx(), &RingSpec::integers(), 3, &VerticalConfig::default()).unwrap();
        assert_eq!(r.verdict, VerticalVerdict::Accepted { depth: 3 });
        assert_eq!(r.method, "square of 2");
        let w = &r.squares[0].levels[0];
        assert_eq!(w.l, 2 * w.j);
        let zero = rankonedown_check(&rat(5, 0), &ctx(), &RingSpec::integers(), 3, &VerticalConfig::default()).unwrap();
        assert_eq!(zero.verdict, VerticalVerdict::Accepted { depth: 3 });
    }

    #[test]
    fn non_squares_through_four_squares() {
        let r = rankonedown_check(&rat(5, 7), &ctx(), &RingSpec::integers(), 2, &VerticalConfig::default()).unwrap();
        assert_eq!(r.verdict, VerticalVerdict::Accepted { depth: 2 });
        assert_eq!(r.decomposition, vec![[2, 1, 1, 1]]);
    }

    #[test]
    fn sqrt_d_rejected() {
        let r = rankonedown_check(&QuadElem::sqrt_d(2).unwrap(), &ctx(), &RingSpec::integers(), 3, &VerticalConfig::default())
            .unwrap();
        assert_eq!(r.verdict, VerticalVerdict::Rejected);
        let c = r.certificate.unwrap();
        assert_eq!((c.q, c.delta, c.level), (7, 0, 1));
        assert_eq!(r.search.unwrap().pairs_passed, 0);
    }

    #[test]
    fn subfield_form() {
        let cfg = VerticalConfig::default();
        let nine = subfield_check(&rat(5, 9), &ctx(), 1, 3, &cfg).unwrap();
        assert_eq!(nine.verdict, VerticalVerdict::Accepted { depth: 3 });
        let half = BigRational::new(1.into(), 2.into());
        let golden = QuadElem::new(5, half.clone(), half).unwrap();
        let g = subfield_check(&golden, &ctx(), 1, 3, &cfg).unwrap();
        assert_eq!(g.verdict, VerticalVerdict::Rejected);
        let bad = QuadElem::new(5, BigRational::new(1.into(), 19.into()), BigRational::zero()).unwrap();
        let cfg19 = VerticalConfig { q: Some(19), ..cfg };
        assert!(matches!(subfield_check(&bad, &ctx(), 1, 3, &cfg19), Err(VerticalError::Precondition(_))));
    }

    #[test]
    fn small_integers_accepted_and_roots_rejected() {
        let cfg = VerticalConfig::default();
        let spec = RingSpec::integers();
        for k in 1..=20 {
            let r = rankonedown_check(&rat(5, k), &ctx(), &spec, 3, &cfg).unwrap();
            assert_eq!(r.verdict, VerticalVerdict::Accepted { depth: 3 }, "u = {k}");
        }
        for d in [2, 3, 5] {
            let r = rankonedown_check(&QuadElem::sqrt_d(d).unwrap(), &ctx(), &spec, 3, &cfg).unwrap();
            assert_eq!(r.verdict, VerticalVerdict::Rejected, "sqrt {d}");
            assert!(r.certificate.is_some());
        }
    }
}
