use super::{count_points, Curve, CurveError, Point};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Mazur: torsion points over Q have order at most 12.
const MAZUR_MAX_ORDER: u64 = 12;
const ENUMERATION_CAP: i64 = 2_000_000;

/// Nontrivial rational torsion points, by Lutz-Nagell: integral x, and
/// y = 0 or y^2 | 4a^3 + 27b^2. Each candidate is confirmed by reaching
/// the identity within Mazur's bound. `None` when the candidate range is
/// too large to enumerate.
pub fn torsion_points(curve: &Curve) -> Option<Vec<Point<BigRational>>> {
    let d0: BigInt = BigInt::from(4) * curve.a.pow(3) + BigInt::from(27) * curve.b.pow(2);
    let d0 = d0.abs();
    let cap = (BigInt::from(1) + curve.a.abs().max(curve.b.abs() + &d0)).to_i64()?;
    if cap > ENUMERATION_CAP {
        return None;
    }
    let e = curve.over_q();
    let mut out = vec![];
    for x in -cap..=cap {
        let xb = BigInt::from(x);
        let v = &xb * &xb * &xb + &curve.a * &xb + &curve.b;
        if v.is_negative() {
            continue;
        }
        let y = v.sqrt();
        if &y * &y != v {
            continue;
        }
        if !y.is_zero() && !(&d0 % (&y * &y)).is_zero() {
            continue;
        }
        for yy in if y.is_zero() { vec![y.clone()] } else { vec![y.clone(), -y.clone()] } {
            let pt = Point::affine(BigRational::from_integer(xb.clone()), BigRational::from_integer(yy));
            let mut acc = pt.clone();
            for _ in 1..MAZUR_MAX_ORDER {
                acc = e.add(&acc, &pt);
                if acc.is_infinity() {
                    out.push(pt.clone());
                    break;
                }
                if !acc.x().unwrap().is_integer() {
                    break;
                }
            }
        }
    }
    Some(out)
}

/// `#E(Q)_tors`, or for curves too large to enumerate, a verified multiple
/// of it: the torsion subgroup injects into E(F_p) for odd good p, so it
/// divides the gcd of those group orders.
pub fn torsion_order(curve: &Curve) -> Result<u64, CurveError> {
    if let Some(pts) = torsion_points(curve) {
        return Ok(pts.len() as u64 + 1);
    }
    let mut g = 0u64;
    for p in crate::arith::primes_up_to(400).into_iter().skip(1) {
        if curve.over_fp(p).is_some() {
            g = g.gcd(&count_points(curve, p)?);
        }
    }
    Ok(g)
}

/// An even multiple of the torsion order: `2 * #E(Q)_tors`.
pub fn torsion_multiple(curve: &Curve, q: &Point<BigRational>) -> Result<u64, CurveError> {
    if !curve.contains(q) {
        return Err(CurveError::OffCurve(q.to_string()));
    }
    Ok(2 * torsion_order(curve)?)
}
