//! Prime densities: the Hasse bound for primitive divisors, prime counting,
//! empirical densities of V(P), splitting densities in quadratic and cyclic
//! extensions, and construction of inverted-prime sets of large density.

use crate::arith::{is_prime_u64, kronecker, PrimeSieve};
use crate::curve::{order_mod_p, CurveContext};
use crate::divmodel::{PrimeRule, RingError, RingSpec};
use crate::eds::{build_v, growth_rate, EdsError, EdsTable, PrimitiveDivisor};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub use crate::arith::count_primes;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DensityError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Eds(#[from] EdsError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// `l^j < 3p`: a prime new in S_{l^j} has norm above l^j / 3.
pub fn hasse_check(ell: u64, j: u32, p: &BigUint) -> bool {
    BigUint::from(ell).pow(j) < BigUint::from(3u32) * p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrendVerdict {
    DecreasingTrend,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub x: u64,
    pub members: u64,
    pub primes: u64,
    /// members / primes in lowest terms.
    pub ratio_exact: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub provenance: String,
    pub points: Vec<DensityPoint>,
    /// max over the grid of members / (sqrt(X) log X); the counting bound
    /// has this shape with an unspecified constant.
    pub fitted_constant: f64,
    pub verdict: TrendVerdict,
}

impl DensityReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.ratio).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,members,primes,ratio_exact,ratio\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{},{},{:.8}\n", p.x, p.members, p.primes, p.ratio_exact, p.ratio));
        }
        out
    }
}

/// A finite set of rational primes known completely up to `limit`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeSet {
    pub provenance: String,
    pub limit: u64,
    pub members: BTreeSet<u64>,
}

impl PrimeSet {
    pub fn new(provenance: &str, limit: u64, members: impl IntoIterator<Item = u64>) -> Self {
        PrimeSet { provenance: provenance.into(), limit, members: members.into_iter().collect() }
    }

    pub fn all_primes(limit: u64) -> Self {
        PrimeSet::new("all primes", limit, PrimeSieve::new(limit).primes())
    }
}

fn check_grid(grid: &[u64]) -> Result<(), DensityError> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] < 2 {
        return Err(DensityError::Input("grid must be nonempty, increasing and start at 2 or more".into()));
    }
    Ok(())
}

/// Non-increasing after the first point, and strictly lower at the end.
fn trend(ratios: &[BigRational]) -> TrendVerdict {
    let monotone = ratios.windows(2).all(|w| w[1] <= w[0]);
    match (ratios.first(), ratios.last()) {
        (Some(a), Some(b)) if monotone && b < a => TrendVerdict::DecreasingTrend,
        _ => TrendVerdict::Inconclusive,
    }
}

fn grid_report(provenance: &str, grid: &[u64], member: impl Fn(u64) -> bool) -> DensityReport {
    let top = *grid.last().expect("grid checked nonempty");
    let sieve = PrimeSieve::new(top);
    let mut points = vec![];
    let mut exact = vec![];
    let (mut members, mut primes) = (0u64, 0u64);
    let mut it = sieve.primes().peekable();
    for &x in grid {
        while let Some(&p) = it.peek() {
            if p > x {
                break;
            }
            primes += 1;
            members += member(p) as u64;
            it.next();
        }
        let r = BigRational::new(members.into(), primes.max(1).into());
        points.push(DensityPoint {
            x,
            members,
            primes,
            ratio_exact: r.to_string(),
            ratio: r.to_f64().unwrap_or(0.0),
        });
        exact.push(r);
    }
    let fitted_constant = points
        .iter()
        .map(|p| p.members as f64 / ((p.x as f64).sqrt() * (p.x as f64).ln()))
        .fold(0.0, f64::max);
    DensityReport { provenance: provenance.into(), points, fitted_constant, verdict: trend(&exact) }
}

/// Empirical density of `set` on the grid.
pub fn v_density(set: &PrimeSet, grid: &[u64]) -> Result<DensityReport, DensityError> {
    check_grid(grid)?;
    if *grid.last().unwrap() > set.limit {
        return Err(DensityError::Input(format!("set is only known up to {}", set.limit)));
    }
    Ok(grid_report(&set.provenance, grid, |p| set.members.contains(&p)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VSetConfig {
    pub limit: u64,
    /// Indices l^j up to this bound are taken from the factored table.
    pub index_cap: u64,
    /// Assumed bound on the exponent of a rank-n prime in d_n.
    pub exponent_bound: u32,
}

impl Default for VSetConfig {
    fn default() -> Self {
        VSetConfig { limit: 100_000, index_cap: 25, exponent_bound: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VSet {
    pub set: PrimeSet,
    /// Members p_{l^j} read off the factored table.
    pub certified: BTreeMap<u64, u64>,
    /// Table indices whose largest new prime could not be certified; their
    /// largest resolved new prime is kept when it is below the limit.
    pub uncertified: Vec<u64>,
    /// Prime-power indices above the cap that have a rank-n prime below the
    /// limit, and how many of them survive the size filter.
    pub large_index_candidates: u64,
    pub large_index_kept: u64,
    pub growth_rate: f64,
}

fn prime_power_base(n: u64) -> Option<u64> {
    if n < 2 {
        return None;
    }
    let ell = (2..).find(|d| n.is_multiple_of(*d) || d * d > n).filter(|d| n.is_multiple_of(*d)).unwrap_or(n);
    let mut m = n;
    while m.is_multiple_of(ell) {
        m /= ell;
    }
    (m == 1).then_some(ell)
}

/// The primes p_{l^j} of V(P) up to `cfg.limit`. Indices up to the cap come
/// from the factored sequence table. For larger prime-power indices n, the
/// new part of d_n has log-size about h n^2 (1 - 1/l^2), with h the fitted
/// growth rate; a rank-n prime below the limit can be the largest new prime
/// only if the rank-n primes below the limit account for that size.
pub fn v_set(table: &mut EdsTable, cfg: &VSetConfig) -> Result<VSet, DensityError> {
    let cap = cfg.index_cap.max(2);
    let entries = build_v(table, cap, 64, cap)?;
    let mut certified = BTreeMap::new();
    let mut uncertified = vec![];
    let mut members = BTreeSet::new();
    for e in &entries {
        let n = e.ell.pow(e.j);
        match &e.divisor {
            PrimitiveDivisor::Known { p } => {
                if let Some(p) = p.to_u64().filter(|&p| p <= cfg.limit) {
                    certified.insert(n, p);
                    members.insert(p);
                }
            }
            PrimitiveDivisor::InCofactor { .. } | PrimitiveDivisor::Empty => {}
            PrimitiveDivisor::Uncertified { .. } => {
                uncertified.push(n);
                let rec = table.record(n)?.clone();
                let prev = table.d_value(n / e.ell)?;
                if let Some(p) = rec
                    .d_valuations
                    .keys()
                    .filter(|p| !(&prev % *p).is_zero())
                    .filter_map(|p| p.to_u64())
                    .filter(|&p| p <= cfg.limit)
                    .max()
                {
                    members.insert(p);
                }
            }
        }
    }
    let rates = growth_rate(table, cap)?;
    let h = rates.last().map(|r| r.1).unwrap_or(0.0);
    let ctx = table.ctx().clone();
    let mut by_rank: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for p in PrimeSieve::new(cfg.limit).primes() {
        if ctx.is_bad_u64(p) {
            continue;
        }
        let Ok(r) = order_mod_p(&ctx.p, &ctx.curve, p) else { continue };
        if r > cap && prime_power_base(r).is_some() {
            by_rank.entry(r).or_default().push(p);
        }
    }
    let mut kept = 0;
    for (&n, ps) in &by_rank {
        let ell = prime_power_base(n).expect("filtered above") as f64;
        let need = 0.5 * h * (n as f64).powi(2) * (1.0 - 1.0 / (ell * ell));
        let have: f64 = ps.iter().map(|&p| cfg.exponent_bound as f64 * (p as f64).ln()).sum();
        if need <= have {
            kept += 1;
            members.insert(*ps.iter().max().expect("nonempty"));
        }
    }
    let provenance = format!(
        "V(P) for P = {} on y^2 = x^3 + {}x + {}: table indices <= {cap}, size filter above",
        ctx.p, ctx.curve.a, ctx.curve.b
    );
    Ok(VSet {
        set: PrimeSet { provenance, limit: cfg.limit, members },
        certified,
        uncertified,
        large_index_candidates: by_rank.len() as u64,
        large_index_kept: kept,
        growth_rate: h,
    })
}

/// Primes of a quadratic field K above a set of rational primes, against all
/// primes of K, both ordered by norm up to X.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftCount {
    pub d: i64,
    pub x: u64,
    pub members_above: u64,
    pub primes_of_k: u64,
    pub ratio: f64,
}

pub fn lift_to_quadratic(set: &PrimeSet, d: i64, x: u64) -> Result<LiftCount, DensityError> {
    if x > set.limit {
        return Err(DensityError::Input(format!("set is only known up to {}", set.limit)));
    }
    is_nonsquare(d)?;
    let (mut above, mut total) = (0u64, 0u64);
    for p in PrimeSieve::new(x).primes() {
        let k = match kronecker(d, &BigUint::from(p)) {
            1 => 2,
            0 => 1,
            _ if p.checked_mul(p).is_some_and(|pp| pp <= x) => 1,
            _ => 0,
        };
        total += k;
        if set.members.contains(&p) {
            above += k;
        }
    }
    Ok(LiftCount { d, x, members_above: above, primes_of_k: total, ratio: above as f64 / total.max(1) as f64 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitDensity {
    pub x: u64,
    /// Primes counted (excluding the ones listed in `excluded`).
    pub primes: u64,
    pub hits: u64,
    pub excluded: Vec<u64>,
    pub ratio: f64,
    pub expected: f64,
    /// (hits - expected * primes) / binomial standard deviation.
    pub z_score: f64,
}

fn split_density(x: u64, expected: f64, skip: &[u64], hit: impl Fn(u64) -> bool) -> SplitDensity {
    let (mut primes, mut hits) = (0u64, 0u64);
    let mut excluded = vec![];
    for p in PrimeSieve::new(x).primes() {
        if skip.contains(&p) {
            excluded.push(p);
            continue;
        }
        primes += 1;
        hits += hit(p) as u64;
    }
    let n = primes.max(1) as f64;
    let sd = (n * expected * (1.0 - expected)).sqrt();
    SplitDensity {
        x,
        primes,
        hits,
        excluded,
        ratio: hits as f64 / n,
        expected,
        z_score: if sd > 0.0 { (hits as f64 - expected * n) / sd } else { 0.0 },
    }
}

fn is_nonsquare(d: i64) -> Result<(), DensityError> {
    let r = (d.unsigned_abs() as f64).sqrt().round() as i64;
    if d >= 0 && r * r == d {
        return Err(DensityError::Input(format!("{d} is a square, Q(sqrt {d}) is not a quadratic field")));
    }
    Ok(())
}

/// Fraction of primes up to X that split or ramify in Q(sqrt d).
pub fn quadratic_split_density(d: i64, x: u64) -> Result<SplitDensity, DensityError> {
    is_nonsquare(d)?;
    Ok(split_density(x, 0.5, &[], |p| kronecker(d, &BigUint::from(p)) != -1))
}

/// The degree-p subfield of the q-th cyclotomic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicFieldRule {
    pub p: u64,
    pub q: u64,
}

impl CyclicFieldRule {
    pub fn new(p: u64, q: u64) -> Result<Self, DensityError> {
        if !is_prime_u64(p) || !is_prime_u64(q) || q % p != 1 {
            return Err(DensityError::Input(format!("need primes p, q with q = 1 mod p, got p={p}, q={q}")));
        }
        Ok(CyclicFieldRule { p, q })
    }

    /// Smallest prime p with p * eps > 1, and the smallest prime q = 1 mod p.
    pub fn for_epsilon(eps: &BigRational) -> Result<Self, DensityError> {
        if !eps.is_positive() {
            return Err(DensityError::Input("epsilon must be positive".into()));
        }
        let p = (2u64..).find(|&p| is_prime_u64(p) && eps * BigRational::from_integer(p.into()) > BigRational::one());
        let p = p.expect("primes are unbounded");
        let q = (1u64..).map(|k| k * p + 1).find(|&q| is_prime_u64(q)).expect("Dirichlet");
        CyclicFieldRule::new(p, q)
    }

    /// Whether r has a degree-one factor: r^((q-1)/p) = 1 mod q. Not defined
    /// for the ramified prime r = q.
    pub fn has_degree_one_factor(&self, r: u64) -> bool {
        let e = (self.q - 1) / self.p;
        BigUint::from(r).modpow(&BigUint::from(e), &BigUint::from(self.q)).is_one()
    }

    pub fn prime_rule(&self) -> PrimeRule {
        PrimeRule::NoDegreeOneCyclic { p: self.p, q: self.q }
    }
}

/// Fraction of primes r != q up to X with a degree-one factor.
pub fn cyclic_degree_one_density(rule: &CyclicFieldRule, x: u64) -> SplitDensity {
    split_density(x, 1.0 / rule.p as f64, &[rule.q], |r| rule.has_degree_one_factor(r))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WRule {
    Empty,
    Quadratic { d: i64 },
    Cyclic(CyclicFieldRule),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub statement: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WConstruction {
    pub epsilon: String,
    pub rule: WRule,
    pub ring: RingSpec,
    /// Density of W among primes on the grid.
    pub density: DensityReport,
    pub target: f64,
    pub meets_target: bool,
    pub conditions: Vec<Condition>,
}

/// Auxiliary field for the quadratic rule.
pub const QUADRATIC_AUX: i64 = 5;

/// W = (primes without a degree-one factor in L) u S_bad, minus the
/// exclusions, with L chosen so that W has density above 1 - eps.
pub fn build_w(
    eps: &BigRational,
    ctx: &CurveContext,
    exclusions: &PrimeSet,
    explicit: &[u64],
    grid: &[u64],
) -> Result<WConstruction, DensityError> {
    check_grid(grid)?;
    if !eps.is_positive() {
        return Err(DensityError::Input("epsilon must be positive".into()));
    }
    let half = BigRational::new(1.into(), 2.into());
    let rule = if eps >= &BigRational::one() {
        WRule::Empty
    } else if eps >= &half {
        WRule::Quadratic { d: QUADRATIC_AUX }
    } else {
        WRule::Cyclic(CyclicFieldRule::for_epsilon(eps)?)
    };
    let prime_rule = match &rule {
        WRule::Empty => PrimeRule::None,
        WRule::Quadratic { d } => PrimeRule::NoDegreeOneQuadratic { d: *d },
        WRule::Cyclic(c) => c.prime_rule(),
    };
    let bad = ctx.bad_primes_u64();
    if let Some(p) = bad.iter().find(|p| exclusions.members.contains(p) || explicit.contains(p)) {
        return Err(DensityError::Input(format!("bad prime {p} cannot be excluded from W")));
    }
    let mut ring = RingSpec::rational(bad.iter().copied(), prime_rule);
    ring.exclude = exclusions.members.iter().chain(explicit).map(|&p| BigUint::from(p)).collect();
    ring.bad_included = true;
    ring.validate()?;

    let top = *grid.last().unwrap();
    let in_w = |p: u64| ring.contains_u64(p).unwrap_or(false);
    let density = grid_report(&format!("W for epsilon = {eps}"), grid, in_w);
    let target = 1.0 - eps.to_f64().unwrap_or(1.0);
    let final_ratio = density.points.last().map(|p| p.ratio).unwrap_or(0.0);

    let v_hits: Vec<u64> = exclusions.members.iter().copied().filter(|&p| in_w(p)).collect();
    let bad_missing: Vec<u64> = bad.iter().copied().filter(|&p| !in_w(p)).collect();
    let degree_one: Vec<u64> = PrimeSieve::new(top)
        .primes()
        .filter(|&p| in_w(p))
        .filter(|&p| match &rule {
            WRule::Empty => true,
            WRule::Quadratic { d } => kronecker(*d, &BigUint::from(p)) != -1,
            WRule::Cyclic(c) => p == c.q || c.has_degree_one_factor(p),
        })
        .collect();
    let allowed: BTreeSet<u64> = bad.iter().copied().collect();
    let conditions = vec![
        Condition {
            statement: "the complement of W contains V(P)".into(),
            holds: v_hits.is_empty(),
            detail: format!("{} members of V(P) up to {} checked, inverted: {v_hits:?}", exclusions.members.len(), exclusions.limit),
        },
        Condition {
            statement: "S_bad is contained in W".into(),
            holds: bad_missing.is_empty(),
            detail: format!("S_bad = {bad:?}, missing: {bad_missing:?}"),
        },
        Condition {
            statement: "all but finitely many primes of W have no degree-one factor in L".into(),
            holds: degree_one.iter().all(|p| allowed.contains(p)),
            detail: format!("primes of W up to {top} with a degree-one factor: {degree_one:?}"),
        },
    ];
    Ok(WConstruction {
        epsilon: eps.to_string(),
        rule,
        ring,
        meets_target: final_ratio >= target,
        target,
        density,
        conditions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hasse_examples() {
        assert!(hasse_check(3, 1, &BigUint::from(19u32)));
        assert!(hasse_check(2, 1, &BigUint::from(5u32)));
        assert!(!hasse_check(7, 2, &BigUint::from(16u32)));
    }

    #[test]
    fn prime_counts() {
        assert_eq!(count_primes(10), 4);
        assert_eq!(count_primes(100), 25);
        assert_eq!(count_primes(1_000_000), 78498);
    }

    #[test]
    fn trend_verdicts() {
        let empty = v_density(&PrimeSet::new("empty", 10_000, []), &[100, 1000, 10_000]).unwrap();
        assert!(empty.ratios().iter().all(|&r| r == 0.0));
        assert_eq!(empty.verdict, TrendVerdict::Inconclusive);
        let all = v_density(&PrimeSet::all_primes(10_000), &[100, 1000, 10_000]).unwrap();
        assert!(all.ratios().iter().all(|&r| r == 1.0));
        assert_eq!(all.verdict, TrendVerdict::Inconclusive);
        let few = v_density(&PrimeSet::new("few", 10_000, [5, 19, 211]), &[100, 1000, 10_000]).unwrap();
        assert_eq!(few.verdict, TrendVerdict::DecreasingTrend);
        assert_eq!(few.points[1].ratio_exact, "1/56");
        assert!(v_density(&few_set(), &[100, 100]).is_err());
    }

    fn few_set() -> PrimeSet {
        PrimeSet::new("few", 1000, [5])
    }

    #[test]
    fn quadratic_small_count() {
        // primes below 30 with (5|p) = 1: 11, 19, 29; and 5 ramifies
        let s = quadratic_split_density(5, 30).unwrap();
        assert_eq!((s.hits, s.primes), (4, 10));
        assert!(quadratic_split_density(9, 30).is_err());
        assert!(quadratic_split_density(-1, 30).is_ok());
    }

    #[test]
    fn cyclic_rule() {
        let r = CyclicFieldRule::new(5, 11).unwrap();
        assert!(!r.has_degree_one_factor(3));
        assert!(r.has_degree_one_factor(23));
        assert!(CyclicFieldRule::new(5, 13).is_err());
        let d = cyclic_degree_one_density(&r, 1000);
        assert_eq!(d.excluded, vec![11]);
        let quarter = BigRational::new(1.into(), 4.into());
        assert_eq!(CyclicFieldRule::for_epsilon(&quarter).unwrap(), r);
        let third = BigRational::new(1.into(), 3.into());
        assert_eq!(CyclicFieldRule::for_epsilon(&third).unwrap().p, 5);
        let two_fifths = BigRational::new(2.into(), 5.into());
        assert_eq!(CyclicFieldRule::for_epsilon(&two_fifths).unwrap(), CyclicFieldRule::new(3, 7).unwrap());
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power_base(27), Some(3));
        assert_eq!(prime_power_base(31), Some(31));
        assert_eq!(prime_power_base(12), None);
        assert_eq!(prime_power_base(1), None);
    }

    #[test]
    fn w_rules_by_epsilon() {
        let ctx = CurveContext::reference();
        let v = PrimeSet::new("v", 10_000, [5, 19]);
        let grid = [100, 1000, 10_000];
        let q = |n, d| BigRational::new(BigInt::from(n), BigInt::from(d));
        let w = build_w(&q(3, 5), &ctx, &v, &[], &grid).unwrap();
        assert_eq!(w.rule, WRule::Quadratic { d: QUADRATIC_AUX });
        assert!(w.meets_target && w.conditions.iter().all(|c| c.holds));
        let w = build_w(&q(1, 4), &ctx, &v, &[], &grid).unwrap();
        assert_eq!(w.rule, WRule::Cyclic(CyclicFieldRule::new(5, 11).unwrap()));
        assert!(w.conditions.iter().all(|c| c.holds), "{:?}", w.conditions);
        let w = build_w(&q(1, 1), &ctx, &v, &[], &grid).unwrap();
        assert_eq!(w.rule, WRule::Empty);
        assert!(w.ring.include_u64().iter().all(|p| ctx.is_bad_u64(*p)));
        assert!(w.conditions.iter().all(|c| c.holds));
        assert!(build_w(&q(1, 4), &ctx, &PrimeSet::new("v", 10, [2]), &[], &grid).is_err());
    }

    use num_bigint::BigInt;
}
