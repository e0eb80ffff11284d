use super::{EdsConstants, EdsError, EdsTable};
use crate::arith::{isqrt, primes_up_to, strip_common, valuation};
use crate::curve::order_mod_p;
use crate::report::{CheckReport, Verdict};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde_json::json;
use std::collections::BTreeSet;

/// ord_t d_{pn} = ord_t d_n + 2 if t = p, unchanged otherwise, for every
/// good prime t dividing d_n.
pub fn verify_order_change(table: &mut EdsTable, n: u64, p: u64) -> Result<CheckReport, EdsError> {
    let rec = table.record(n)?.clone();
    if !rec.complete {
        return Err(EdsError::Incomplete(n));
    }
    let d_pn = table.d_value(p * n)?;
    let mut report = CheckReport::new("order-change");
    let mut rows = vec![];
    for (t, &before) in &rec.d_valuations {
        let after = valuation(&d_pn, t);
        let expected = if t == &BigUint::from(p) { before + 2 } else { before };
        report.checked += 1;
        if after != expected {
            report.fail(format!("prime {t}: ord {before} -> {after}, expected {expected}"));
        }
        rows.push(json!({ "prime": t.to_string(), "before": before, "after": after, "expected": expected }));
    }
    report.details = json!({ "n": n, "p": p, "primes": rows });
    Ok(report)
}

/// {n <= N : q^e | d_n} is the set of multiples of its least element.
pub fn verify_subgroup(table: &mut EdsTable, q: u64, e: u32, bound: u64) -> Result<CheckReport, EdsError> {
    let qe = BigUint::from(q).pow(e);
    let mut members = vec![];
    for n in 1..=bound {
        if (table.d_value(n)? % &qe).is_zero() {
            members.push(n);
        }
    }
    let mut report = CheckReport::new("subgroup");
    report.checked = bound;
    let m = members.first().copied();
    if let Some(m) = m {
        let expected: Vec<u64> = (1..=bound).filter(|n| n % m == 0).collect();
        if expected != members {
            report.fail(format!("members {members:?} are not the multiples of {m}"));
        }
    }
    report.details = json!({ "q": q, "e": e, "bound": bound, "generator": m, "members": members });
    Ok(report)
}

/// S_m and S_n meet exactly in S_gcd(m,n). Complete pairs are compared as
/// sets; every pair also gets the factorization-free check that
/// gcd(d_m, d_n) and d_gcd have the same prime support.
pub fn verify_strong_divisibility(table: &mut EdsTable, bound: u64) -> Result<CheckReport, EdsError> {
    let mut report = CheckReport::new("strong-divisibility");
    let mut complete_pairs = 0u64;
    for m in 1..=bound {
        for n in m..=bound {
            let g = m.gcd(&n);
            let (dm, dn, dg) = (table.d_value(m)?, table.d_value(n)?, table.d_value(g)?);
            let common = dm.gcd(&dn);
            let same_support = strip_common(&common, &dg).is_one() && strip_common(&dg, &common).is_one();
            report.checked += 1;
            if !same_support {
                report.fail(format!("prime support of gcd(d_{m}, d_{n}) differs from d_{g}"));
            }
            let (rm, rn) = (table.record(m)?.clone(), table.record(n)?.clone());
            if rm.complete && rn.complete {
                complete_pairs += 1;
                let inter: BTreeSet<BigUint> = rm.primes().intersection(&rn.primes()).cloned().collect();
                let sg: BTreeSet<BigUint> = rm.primes().into_iter().filter(|p| (&dg % p).is_zero()).collect();
                let rg = table.record(g)?.clone();
                let sg_ok = !rg.complete || rg.primes() == sg;
                if inter != sg || !sg_ok {
                    report.fail(format!("S_{m} and S_{n} do not meet in S_{g}"));
                }
            } else {
                report.complete = false;
            }
        }
    }
    report.details = json!({ "bound": bound, "complete_pairs": complete_pairs });
    Ok(report)
}

/// d_j | d_k whenever j | k.
pub fn verify_monotone(table: &mut EdsTable, bound: u64) -> Result<CheckReport, EdsError> {
    let mut report = CheckReport::new("monotone-divisibility");
    for k in 1..=bound {
        let dk = table.d_value(k)?;
        for j in (1..k).filter(|j| k % j == 0) {
            report.checked += 1;
            if !(&dk % table.d_value(j)?).is_zero() {
                report.fail(format!("d_{j} does not divide d_{k}"));
            }
        }
    }
    Ok(report)
}

/// d_n is a perfect square (equivalently every good-prime valuation is
/// even), checked exactly for every n, plus the recorded valuations of the
/// complete records.
pub fn verify_square(table: &mut EdsTable, bound: u64) -> Result<CheckReport, EdsError> {
    let mut report = CheckReport::new("square-denominators");
    for n in 1..=bound {
        let d = table.d_value(n)?;
        let r = isqrt(&d);
        report.checked += 1;
        if &r * &r != d {
            report.fail(format!("d_{n} is not a square"));
        }
    }
    report.details = json!({ "bound": bound });
    Ok(report)
}

/// Records up to `bound` that are already factored get their valuations
/// checked for parity.
pub fn odd_valuations(table: &mut EdsTable, bound: u64) -> Result<Vec<(u64, BigUint)>, EdsError> {
    let mut out = vec![];
    for n in 1..=bound {
        let rec = table.record(n)?;
        for (p, v) in &rec.d_valuations {
            if v % 2 == 1 {
                out.push((n, p.clone()));
            }
        }
    }
    Ok(out)
}

/// For every tabulated primitive divisor p_{l^j} with index l^(j + ord_l m0):
/// p in S_{k m0} iff l^j | k, for `k m0 <= index_bound`.
pub fn verify_cor_div(table: &mut EdsTable, consts: &EdsConstants, index_bound: u64) -> Result<CheckReport, EdsError> {
    let mut report = CheckReport::new("primitive-divisor-placement");
    let m0 = consts.m0_u64();
    let mut undecided = 0u64;
    for entry in &consts.primitive_divisors {
        let ord = valuation(&BigUint::from(m0), &BigUint::from(entry.ell));
        if entry.j <= ord {
            continue;
        }
        let jj = entry.j - ord;
        let lj = entry.ell.pow(jj);
        for k in 1..=index_bound / m0 {
            let d = table.d_value(k * m0)?;
            match entry.divisor.divides(&d) {
                Some(member) => {
                    report.checked += 1;
                    if member != (k % lj == 0) {
                        report.fail(format!(
                            "p_({}^{}) membership in S_{} disagrees with {}^{} | {}",
                            entry.ell, entry.j, k * m0, entry.ell, jj, k
                        ));
                    }
                }
                None => undecided += 1,
            }
        }
    }
    if undecided > 0 {
        report.complete = false;
    }
    report.details = json!({ "m0": m0, "index_bound": index_bound, "undecided": undecided });
    Ok(report)
}

/// order_mod_p(P) equals the least n with p | d_n, for good p <= p_max
/// that appear in some d_n with n <= bound.
pub fn verify_rank_of_apparition(table: &mut EdsTable, p_max: u64, bound: u64) -> Result<CheckReport, EdsError> {
    let mut report = CheckReport::new("rank-of-apparition");
    let mut rows = vec![];
    let ctx = table.ctx().clone();
    for p in primes_up_to(p_max) {
        if ctx.is_bad_u64(p) {
            continue;
        }
        let pb = BigUint::from(p);
        if let Some(n) = table.rank_of_apparition(&pb, bound)? {
            let ord = order_mod_p(&ctx.p, &ctx.curve, p)?;
            report.checked += 1;
            if ord != n {
                report.fail(format!("p={p}: order {ord} but first appears at {n}"));
            }
            rows.push(json!({ "p": p, "rank": n, "order": ord }));
        }
    }
    report.details = json!({ "p_max": p_max, "bound": bound, "primes": rows });
    if report.checked == 0 {
        report.verdict = Verdict::Inconclusive;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eds::reference_table;

    #[test]
    fn order_change_examples() {
        let mut t = reference_table();
        let r = verify_order_change(&mut t, 2, 3).unwrap();
        assert!(r.passed());
        assert_eq!(r.details["primes"][0]["after"], 2);
        let r = verify_order_change(&mut t, 2, 5).unwrap();
        assert!(r.passed());
        assert_eq!(r.details["primes"][0]["after"], 4);
        let r = verify_order_change(&mut t, 1, 7).unwrap();
        assert!(r.passed() && r.checked == 0);
    }

    #[test]
    fn subgroup_examples() {
        let mut t = reference_table();
        let r = verify_subgroup(&mut t, 5, 2, 12).unwrap();
        assert!(r.passed());
        assert_eq!(r.details["generator"], 2);
        let r = verify_subgroup(&mut t, 19, 2, 12).unwrap();
        assert_eq!(r.details["generator"], 3);
        let r = verify_subgroup(&mut t, 1_000_003, 2, 6).unwrap();
        assert!(r.passed() && r.details["members"].as_array().unwrap().is_empty());
    }

    #[test]
    fn small_range_properties() {
        let mut t = reference_table();
        assert!(verify_square(&mut t, 12).unwrap().passed());
        assert!(verify_monotone(&mut t, 12).unwrap().passed());
        assert!(verify_strong_divisibility(&mut t, 10).unwrap().passed());
        assert!(odd_valuations(&mut t, 10).unwrap().is_empty());
        assert!(verify_rank_of_apparition(&mut t, 30, 12).unwrap().passed());
    }
}
