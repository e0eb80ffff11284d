use super::{EdsError, EdsTable};
use crate::arith::{is_prime_u64, ln_nat, primes_up_to, strip_common};
use crate::bigser;
use crate::report::{CheckReport, Verdict};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;

/// The largest-norm prime in S_{l^j} \ S_{l^(j-1)}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PrimitiveDivisor {
    Known {
        #[serde(with = "bigser::nat")]
        p: BigUint,
    },
    /// The largest new prime is the largest prime factor of this
    /// unfactored cofactor; certified because every prime of the cofactor is
    /// new and the largest one provably exceeds all resolved new primes.
    InCofactor {
        #[serde(with = "bigser::nat")]
        cofactor: BigUint,
    },
    /// The set difference is empty.
    Empty,
    /// Incomplete factorization prevents certifying the maximum.
    Uncertified { reason: String },
}

impl PrimitiveDivisor {
    pub fn known(&self) -> Option<&BigUint> {
        match self {
            PrimitiveDivisor::Known { p } => Some(p),
            _ => None,
        }
    }

    /// Decides `p_{l^j} | n` for an integer n, when possible.
    pub fn divides(&self, n: &BigUint) -> Option<bool> {
        match self {
            PrimitiveDivisor::Known { p } => Some((n % p).is_zero()),
            PrimitiveDivisor::InCofactor { cofactor } => {
                let g = n.gcd(cofactor);
                if g.is_one() {
                    Some(false)
                } else if (n % cofactor).is_zero() {
                    Some(true)
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

/// Lower bound on the largest prime factor of a composite whose prime
/// factors all exceed `smooth`: at most k = floor(log c / log smooth) of
/// them, so the largest is at least c^(1/k).
fn largest_prime_lower_bound(c: &BigUint, smooth: u64) -> f64 {
    let lc = ln_nat(c);
    let ls = (smooth.max(2) as f64).ln();
    let k = (lc / ls).floor().max(1.0);
    (lc / k).exp().max(smooth as f64)
}

pub fn primitive_divisor(table: &mut EdsTable, ell: u64, j: u32) -> Result<PrimitiveDivisor, EdsError> {
    if !is_prime_u64(ell) || j == 0 {
        return Err(EdsError::Precondition(format!("need a prime l and j >= 1, got l={ell}, j={j}")));
    }
    let n = ell.pow(j);
    let prev = ell.pow(j - 1);
    let d_prev = table.d_value(prev)?;
    let rec = table.record(n)?.clone();
    let new: Vec<&BigUint> = rec.d_valuations.keys().filter(|p| !(&d_prev % *p).is_zero()).collect();
    let max_new = new.last().cloned();
    if rec.complete {
        return Ok(match max_new {
            Some(p) => PrimitiveDivisor::Known { p: p.clone() },
            None => PrimitiveDivisor::Empty,
        });
    }
    let c = rec.unresolved_root();
    if !c.gcd(&d_prev).is_one() {
        return Ok(PrimitiveDivisor::Uncertified {
            reason: format!("unfactored part of d_{n} shares a factor with d_{prev}"),
        });
    }
    let bound = largest_prime_lower_bound(&c, rec.smooth_bound);
    let beats = match max_new {
        None => true,
        Some(p) => p.to_f64().is_some_and(|pf| bound > pf),
    };
    if beats {
        Ok(PrimitiveDivisor::InCofactor { cofactor: c })
    } else {
        Ok(PrimitiveDivisor::Uncertified {
            reason: format!("unfactored part of d_{n} may hide primes smaller than the largest resolved one"),
        })
    }
}

/// Smallest C such that S_{lm} \ (S_l u S_m) is nonempty for every tested
/// pair of primes l <= m with lm <= bound and m > C. Valid on the tested
/// range only.
pub fn estimate_c(table: &mut EdsTable, bound: u64) -> Result<(u64, CheckReport), EdsError> {
    let primes = primes_up_to(bound);
    let mut c = 1u64;
    let mut pairs = vec![];
    for (i, &l) in primes.iter().enumerate() {
        for &m in &primes[i..] {
            if l * m > bound {
                break;
            }
            let dlm = table.d_value(l * m)?;
            let other = table.d_value(l)? * table.d_value(m)?;
            let new_part = strip_common(&dlm, &other);
            let nonempty = !new_part.is_one();
            if !nonempty {
                c = c.max(m);
            }
            pairs.push(json!({ "l": l, "m": m, "new_primes_exist": nonempty }));
        }
    }
    let mut report = CheckReport::new("primitive-divisor-threshold");
    report.checked = pairs.len() as u64;
    report.details = json!({ "C": c, "empirical": true, "bound": bound, "pairs": pairs });
    Ok((c, report))
}

/// m0 = product of l^(a_l) over the primes with a_l > 1, where a_l is the
/// least exponent with l^(a_l) > C.
pub fn compute_m0(c: u64) -> (BigUint, BTreeMap<u64, u32>) {
    let mut a = BTreeMap::new();
    let mut m0 = BigUint::one();
    for l in primes_up_to(c.max(2)) {
        let mut e = 1u32;
        while l.pow(e) <= c {
            e += 1;
        }
        a.insert(l, e);
        if e > 1 {
            m0 *= BigUint::from(l).pow(e);
        }
    }
    (m0, a)
}

fn num_abs(x: &BigRational) -> BigUint {
    x.numer().abs().to_biguint().unwrap()
}

fn den_abs(x: &BigRational) -> BigUint {
    x.denom().abs().to_biguint().unwrap()
}

/// Checks `den(x_{l m1}) | num(x_{l m1}/x_{k l m1} - k^2)^2` and
/// `gcd(den(x_{l m1}), num(x_{k l m1})) = 1` for all `1 <= l, k <= grid`.
pub fn verify_m1(table: &mut EdsTable, m1: u64, grid: u64) -> Result<CheckReport, EdsError> {
    let mut report = CheckReport::new("m1-candidate");
    let mut cells = vec![];
    for l in 1..=grid {
        for k in 1..=grid {
            let xl = table.x(l * m1)?;
            let xkl = table.x(k * l * m1)?;
            let d = den_abs(&xl);
            let diff = if xkl.is_zero() {
                None
            } else {
                Some(&xl / &xkl - BigRational::from_integer(BigInt::from(k * k)))
            };
            let equiv = match &diff {
                Some(q) => {
                    let n = num_abs(q);
                    n.is_zero() || (&n * &n % &d).is_zero()
                }
                None => false,
            };
            let coprime = d.gcd(&num_abs(&xkl)).is_one();
            report.checked += 1;
            if !equiv {
                report.fail(format!("divisibility fails at l={l}, k={k}"));
            }
            if !coprime {
                report.fail(format!("coprimality fails at l={l}, k={k}"));
            }
            cells.push(json!({ "l": l, "k": k, "divisibility": equiv, "coprime": coprime }));
        }
    }
    report.details = json!({ "m1": m1, "grid": grid, "cells": cells });
    Ok(report)
}

/// `(n, ln(d_n) / n^2)` for `1 <= n <= n_max`.
pub fn growth_rate(table: &mut EdsTable, n_max: u64) -> Result<Vec<(u64, f64)>, EdsError> {
    (1..=n_max)
        .map(|n| Ok((n, ln_nat(&table.d_value(n)?) / (n * n) as f64)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthVerdict {
    pub window: (u64, u64),
    pub mean: f64,
    /// (max - min) / mean over the window.
    pub relative_spread: f64,
    pub early_mean_step: f64,
    pub late_mean_step: f64,
    pub converging: bool,
}

/// Spread of the rates over `[lo, hi]` and whether successive differences
/// shrink (mean |step| over the later half below the earlier half).
pub fn growth_verdict(rates: &[(u64, f64)], lo: u64, hi: u64, tolerance: f64) -> GrowthVerdict {
    let w: Vec<f64> = rates.iter().filter(|(n, _)| (lo..=hi).contains(n)).map(|(_, r)| *r).collect();
    let mean = w.iter().sum::<f64>() / w.len().max(1) as f64;
    let max = w.iter().cloned().fold(f64::MIN, f64::max);
    let min = w.iter().cloned().fold(f64::MAX, f64::min);
    let spread = if w.is_empty() { f64::INFINITY } else { (max - min) / mean };
    let steps: Vec<f64> = w.windows(2).map(|p| (p[1] - p[0]).abs()).collect();
    let half = steps.len() / 2;
    let avg = |s: &[f64]| s.iter().sum::<f64>() / s.len().max(1) as f64;
    let early = avg(&steps[..half]);
    let late = avg(&steps[steps.len() - half..]);
    GrowthVerdict {
        window: (lo, hi),
        mean,
        relative_spread: spread,
        early_mean_step: early,
        late_mean_step: late,
        converging: spread < tolerance && late < early,
    }
}

/// 2 * max over n <= n_max of n^2 / d_n.
pub fn compute_kappa(table: &mut EdsTable, n_max: u64) -> Result<BigRational, EdsError> {
    let mut best = BigRational::zero();
    for n in 1..=n_max {
        let d = BigInt::from(table.d_value(n)?);
        let q = BigRational::new(BigInt::from(n * n), d);
        if q > best {
            best = q;
        }
    }
    Ok(best * BigRational::from_integer(2.into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VEntry {
    pub ell: u64,
    pub j: u32,
    pub divisor: PrimitiveDivisor,
}

/// Primitive divisors p_{l^j} for primes l <= ell_max, j <= j_max and
/// l^j <= index_cap.
pub fn build_v(table: &mut EdsTable, ell_max: u64, j_max: u32, index_cap: u64) -> Result<Vec<VEntry>, EdsError> {
    let mut out = vec![];
    for ell in primes_up_to(ell_max) {
        for j in 1..=j_max {
            match ell.checked_pow(j) {
                Some(n) if n <= index_cap => {}
                _ => break,
            }
            out.push(VEntry { ell, j, divisor: primitive_divisor(table, ell, j)? });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantsConfig {
    /// Pairs l*m up to this bound are tested for C.
    pub c_bound: u64,
    pub kappa_bound: u64,
    pub v_ell_max: u64,
    pub v_j_max: u32,
    pub v_index_cap: u64,
    pub m1: u64,
    pub m1_grid: u64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig { c_bound: 25, kappa_bound: 25, v_ell_max: 23, v_j_max: 4, v_index_cap: 25, m1: 1, m1_grid: 4 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdsConstants {
    pub c: u64,
    pub a_ell: BTreeMap<u64, u32>,
    #[serde(with = "bigser::nat")]
    pub m0: BigUint,
    pub m1: u64,
    #[serde(with = "bigser::rational")]
    pub kappa: BigRational,
    pub primitive_divisors: Vec<VEntry>,
    pub m1_verdict: Verdict,
}

impl EdsConstants {
    pub fn compute(table: &mut EdsTable, cfg: &ConstantsConfig) -> Result<(Self, Vec<CheckReport>), EdsError> {
        let (c, c_report) = estimate_c(table, cfg.c_bound)?;
        let (m0, mut a_ell) = compute_m0(c);
        for l in primes_up_to(cfg.v_ell_max) {
            a_ell.entry(l).or_insert(1);
        }
        let kappa = compute_kappa(table, cfg.kappa_bound)?;
        let m1_report = verify_m1(table, cfg.m1, cfg.m1_grid)?;
        let v = build_v(table, cfg.v_ell_max, cfg.v_j_max, cfg.v_index_cap)?;
        let consts = EdsConstants { c, a_ell, m0, m1: cfg.m1, kappa, primitive_divisors: v, m1_verdict: m1_report.verdict };
        Ok((consts, vec![c_report, m1_report]))
    }

    pub fn m0_u64(&self) -> u64 {
        self.m0.to_u64().expect("m0 fits in a machine word at desk scale")
    }

    pub fn divisor(&self, ell: u64, j: u32) -> Option<&PrimitiveDivisor> {
        self.primitive_divisors.iter().find(|e| e.ell == ell && e.j == j).map(|e| &e.divisor)
    }
}
