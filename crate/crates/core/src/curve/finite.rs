use super::{Curve, CurveError, FieldElement, Fp, Point, WeierstrassCurve};
use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use std::collections::{BTreeSet, HashMap};

const NAIVE_LIMIT: u64 = 10_000;
const NAIVE_FALLBACK_LIMIT: u64 = 20_000_000;

/// Reduction of a rational point modulo `p`, `None` if a coordinate is not
/// `p`-integral.
pub fn reduce_point(pt: &Point<BigRational>, p: u64) -> Option<Point<Fp>> {
    match pt {
        Point::Infinity => Some(Point::Infinity),
        Point::Affine { x, y } => {
            let pb = BigInt::from(p);
            let red = |r: &BigRational| -> Option<Fp> {
                if (r.denom() % &pb) == BigInt::from(0) {
                    return None;
                }
                let inv = Fp::from_bigint(r.denom(), p).invert()?;
                Some(Fp::from_bigint(r.numer(), p) * inv)
            };
            Some(Point::affine(red(x)?, red(y)?))
        }
    }
}

/// `#E(F_p)` for a prime of good reduction: naive count up to 10^4,
/// baby-step giant-step above.
pub fn count_points(curve: &Curve, p: u64) -> Result<u64, CurveError> {
    let e = curve.over_fp(p).ok_or(CurveError::BadPrime(p))?;
    if p <= NAIVE_LIMIT {
        return Ok(naive_count(&e, p));
    }
    bsgs_count(&e, p)
}

fn rhs(e: &WeierstrassCurve<Fp>, x: Fp) -> Fp {
    x * x * x + e.a * x + e.b
}

fn naive_count(e: &WeierstrassCurve<Fp>, p: u64) -> u64 {
    let mut is_sq = vec![false; p as usize];
    for y in 0..p {
        is_sq[(y * y % p) as usize] = true;
    }
    let mut n = 1u64;
    for x in 0..p {
        let v = rhs(e, Fp::new(x as i64, p)).v;
        n += if v == 0 {
            1
        } else if is_sq[v as usize] {
            2
        } else {
            0
        };
    }
    n
}

fn naive_count_legendre(e: &WeierstrassCurve<Fp>, p: u64) -> u64 {
    let mut n = 1i64 + p as i64;
    for x in 0..p {
        n += rhs(e, Fp::new(x as i64, p)).legendre() as i64;
    }
    n as u64
}

/// All `N` in the Hasse interval with `N*P = O`.
fn hasse_candidates(e: &WeierstrassCurve<Fp>, pt: &Point<Fp>, p: u64) -> BTreeSet<u64> {
    let w = 2 * p.sqrt() + 2;
    let lo = (p + 1).saturating_sub(w);
    let hi = p + 1 + w;
    let s = ((hi - lo + 1) as f64).sqrt().ceil() as u64;
    let mut baby: HashMap<Point<Fp>, u64> = HashMap::new();
    let mut acc = Point::Infinity;
    for j in 0..s {
        if j > 0 && acc.is_infinity() {
            // small order j: every multiple of j in range works
            return (lo..=hi).filter(|n| n % j == 0).collect();
        }
        baby.entry(acc.clone()).or_insert(j);
        acc = e.add(&acc, pt);
    }
    // hi*P - i*s*P == j*P  <=>  (hi - i*s - j) P = O
    let step = e.negate(&e.mul_u64(s, pt));
    let mut g = e.mul_u64(hi, pt);
    let mut out = BTreeSet::new();
    let mut i = 0;
    while i * s <= hi - lo {
        if let Some(&j) = baby.get(&g) {
            let n = hi - i * s - j;
            if n >= lo {
                out.insert(n);
            }
        }
        g = e.add(&g, &step);
        i += 1;
    }
    out
}

fn bsgs_count(e: &WeierstrassCurve<Fp>, p: u64) -> Result<u64, CurveError> {
    let mut candidates: Option<BTreeSet<u64>> = None;
    let mut tried = 0;
    let mut x = 0u64;
    while tried < 40 && x < p {
        let fx = rhs(e, Fp::new(x as i64, p));
        x += 1;
        let y = match fx.sqrt() {
            Some(y) if fx.v != 0 => y,
            _ => continue,
        };
        let pt = Point::affine(Fp::new(x as i64 - 1, p), y);
        let c = hasse_candidates(e, &pt, p);
        let next = match candidates {
            None => c,
            Some(prev) => prev.intersection(&c).copied().collect(),
        };
        if next.len() == 1 {
            return Ok(*next.iter().next().unwrap());
        }
        candidates = Some(next);
        tried += 1;
    }
    if p <= NAIVE_FALLBACK_LIMIT {
        return Ok(naive_count_legendre(e, p));
    }
    Err(CurveError::CountOutOfRange(p))
}

/// Order of a point in a group of known order `n`.
pub fn point_order<F: FieldElement>(e: &WeierstrassCurve<F>, pt: &Point<F>, n: u64) -> u64 {
    let mut order = n;
    let mut m = n;
    let mut f = 2u64;
    let mut primes = vec![];
    while f * f <= m {
        if m.is_multiple_of(f) {
            primes.push(f);
            while m.is_multiple_of(f) {
                m /= f;
            }
        }
        f += 1;
    }
    if m > 1 {
        primes.push(m);
    }
    for f in primes {
        while order.is_multiple_of(f) && e.mul_u64(order / f, pt).is_infinity() {
            order /= f;
        }
    }
    order
}

/// The order of `pt` in `E(F_p)`: the rank of apparition of `p`.
pub fn order_mod_p(pt: &Point<BigRational>, curve: &Curve, p: u64) -> Result<u64, CurveError> {
    if pt.is_infinity() {
        return Ok(1);
    }
    let e = curve.over_fp(p).ok_or(CurveError::BadPrime(p))?;
    let red = reduce_point(pt, p).ok_or(CurveError::BadPrime(p))?;
    let n = count_points(curve, p)?;
    Ok(point_order(&e, &red, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::point_from_ints;

    fn brute_points(c: &Curve, p: u64) -> Vec<Point<Fp>> {
        let e = c.over_fp(p).unwrap();
        let mut pts = vec![Point::Infinity];
        for x in 0..p {
            for y in 0..p {
                let pt = Point::affine(Fp::new(x as i64, p), Fp::new(y as i64, p));
                if e.contains(&pt) {
                    pts.push(pt);
                }
            }
        }
        pts
    }

    #[test]
    fn counts_match_enumeration() {
        let c = Curve::new(0, -2).unwrap();
        for p in [5u64, 7, 11, 13, 17, 19, 23, 29, 31] {
            assert_eq!(count_points(&c, p).unwrap(), brute_points(&c, p).len() as u64, "p={p}");
        }
        assert_eq!(count_points(&c, 3), Err(CurveError::BadPrime(3)));
    }

    #[test]
    fn bsgs_agrees_with_naive() {
        for (a, b) in [(0i64, -2i64), (-16, 16), (1, 1), (0, 2), (-7, 10)] {
            let c = Curve::new(a, b).unwrap();
            for p in [10_007u64, 10_009, 20_011, 65_537, 100_003] {
                let Some(e) = c.over_fp(p) else { continue };
                assert_eq!(bsgs_count(&e, p).unwrap(), naive_count(&e, p), "a={a} b={b} p={p}");
            }
        }
    }

    #[test]
    fn order_mod_five_by_enumeration() {
        let c = Curve::new(0, -2).unwrap();
        let p = point_from_ints(3, 5);
        let m = order_mod_p(&p, &c, 5).unwrap();
        let e = c.over_fp(5).unwrap();
        let red = reduce_point(&p, 5).unwrap();
        let brute = (1..=10).find(|&k| e.mul_u64(k, &red).is_infinity()).unwrap();
        assert_eq!(m, brute);
        assert_eq!(brute_points(&c, 5).len() as u64 % m, 0);
        assert_eq!(order_mod_p(&Point::Infinity, &c, 5).unwrap(), 1);
        assert_eq!(order_mod_p(&p, &c, 2), Err(CurveError::BadPrime(2)));
    }
}
