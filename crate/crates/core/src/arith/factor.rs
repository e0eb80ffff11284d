use super::primes::{is_prime, nth_root, primes_up_to, valuation};
use crate::bigser;
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

/// Effort limits for [`factor`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactorBudget {
    /// Trial division runs over all primes up to this bound.
    pub trial_bound: u64,
    /// Iteration cap for each Pollard-rho (Brent) attempt.
    pub rho_iterations: u64,
    /// Number of rho attempts with different polynomials.
    pub rho_attempts: u32,
    pub seed: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget { trial_bound: 1_000_000, rho_iterations: 1 << 18, rho_attempts: 4, seed: 1 }
    }
}

impl FactorBudget {
    /// Trial division only.
    pub fn trial_only(trial_bound: u64) -> Self {
        FactorBudget { trial_bound, rho_iterations: 0, rho_attempts: 0, seed: 1 }
    }
}

/// A prime factorization, possibly with an unresolved cofactor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    #[serde(with = "bigser::nat")]
    pub value: BigUint,
    #[serde(with = "bigser::factor_list")]
    pub factors: Vec<(BigUint, u32)>,
    #[serde(with = "bigser::nat")]
    pub cofactor: BigUint,
    pub complete: bool,
    /// Every prime dividing the cofactor is larger than this.
    pub smooth_bound: u64,
}

impl Factorization {
    pub fn one() -> Self {
        Factorization {
            value: BigUint::one(),
            factors: vec![],
            cofactor: BigUint::one(),
            complete: true,
            smooth_bound: u64::MAX,
        }
    }

    fn from_parts(found: BTreeMap<BigUint, u32>, cofactor: BigUint, smooth_bound: u64) -> Self {
        let mut value = cofactor.clone();
        for (p, e) in &found {
            value *= p.pow(*e);
        }
        let complete = cofactor.is_one();
        Factorization {
            value,
            factors: found.into_iter().collect(),
            cofactor,
            complete,
            smooth_bound: if complete { u64::MAX } else { smooth_bound },
        }
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.iter().map(|(p, _)| p)
    }

    pub fn exponent_of(&self, p: &BigUint) -> u32 {
        self.factors.iter().find(|(q, _)| q == p).map_or(0, |(_, e)| *e)
    }

    pub fn largest_prime(&self) -> Option<&BigUint> {
        self.factors.last().map(|(p, _)| p)
    }

    /// Factorization of `value^k`.
    pub fn pow(&self, k: u32) -> Self {
        let found = self.factors.iter().map(|(p, e)| (p.clone(), e * k)).collect();
        Self::from_parts(found, self.cofactor.pow(k), self.smooth_bound)
    }

    /// Factorization of the product of two factorizations.
    pub fn mul(&self, other: &Self) -> Self {
        let mut found: BTreeMap<BigUint, u32> = self.factors.iter().cloned().collect();
        for (p, e) in &other.factors {
            *found.entry(p.clone()).or_insert(0) += e;
        }
        let bound = self.smooth_bound.min(other.smooth_bound);
        Self::from_parts(found, &self.cofactor * &other.cofactor, bound)
    }

    /// Checks every structural invariant, including primality of the factors.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut prod = self.cofactor.clone();
        for (i, (p, e)) in self.factors.iter().enumerate() {
            if *e == 0 {
                return Err(format!("zero exponent for {p}"));
            }
            if !is_prime(p) {
                return Err(format!("{p} is not prime"));
            }
            if i > 0 && &self.factors[i - 1].0 >= p {
                return Err("factors not strictly increasing".into());
            }
            prod *= p.pow(*e);
        }
        if prod != self.value {
            return Err("product does not reconstruct the value".into());
        }
        if self.complete != self.cofactor.is_one() {
            return Err("completeness flag disagrees with the cofactor".into());
        }
        Ok(())
    }
}

static SMALL_PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
const CACHED_BOUND: u64 = 1_000_000;

fn small_primes(bound: u64) -> std::borrow::Cow<'static, [u64]> {
    if bound <= CACHED_BOUND {
        let all = SMALL_PRIMES.get_or_init(|| primes_up_to(CACHED_BOUND));
        let end = all.partition_point(|&p| p <= bound);
        std::borrow::Cow::Borrowed(&all[..end])
    } else {
        std::borrow::Cow::Owned(primes_up_to(bound))
    }
}

/// Factors `n >= 1` by trial division up to the budget bound, then Brent's
/// variant of Pollard rho. Composite parts that resist rho are returned as
/// the cofactor with `complete = false`.
pub fn factor(n: &BigUint, budget: &FactorBudget) -> Factorization {
    assert!(!n.is_zero(), "factor: input must be positive");
    let mut found = BTreeMap::new();
    let mut m = n.clone();
    let mut cleared = false;
    for &p in small_primes(budget.trial_bound).iter() {
        if m.is_one() {
            break;
        }
        let pb = BigUint::from(p);
        if &pb * &pb > m {
            cleared = true;
            break;
        }
        if (&m % p).is_zero() {
            let v = valuation(&m, &pb);
            m /= pb.pow(v);
            found.insert(pb, v);
        }
    }
    if m.is_one() {
        return Factorization::from_parts(found, m, budget.trial_bound);
    }
    if cleared {
        found.insert(m, 1);
        return Factorization::from_parts(found, BigUint::one(), budget.trial_bound);
    }
    let mut cofactor = BigUint::one();
    let mut stack = vec![(m, 1u32)];
    while let Some((x, mult)) = stack.pop() {
        if x.is_one() {
            continue;
        }
        if is_prime(&x) {
            *found.entry(x).or_insert(0) += mult;
            continue;
        }
        if let Some((root, k)) = perfect_power(&x) {
            stack.push((root, mult * k));
            continue;
        }
        match rho_split(&x, budget) {
            Some(d) => {
                let e = &x / &d;
                stack.push((d, mult));
                stack.push((e, mult));
            }
            None => cofactor *= x.pow(mult),
        }
    }
    Factorization::from_parts(found, cofactor, budget.trial_bound)
}

/// Divides out the hinted primes first, then factors what is left.
pub fn factor_with_hints(
    n: &BigUint,
    hints: &[BigUint],
    source: &dyn FactorSource,
) -> Factorization {
    let mut found = BTreeMap::new();
    let mut m = n.clone();
    for p in hints {
        if p > &BigUint::one() && (&m % p).is_zero() {
            let v = valuation(&m, p);
            m /= p.pow(v);
            found.insert(p.clone(), v);
        }
    }
    let rest = source.factor(&m);
    let known = Factorization::from_parts(found, BigUint::one(), u64::MAX);
    known.mul(&rest)
}

fn perfect_power(x: &BigUint) -> Option<(BigUint, u32)> {
    let bits = x.bits() as u32;
    // every prime factor exceeds the trial bound, so only small k matter
    for k in [2u32, 3, 5, 7, 11, 13] {
        if k > bits {
            break;
        }
        let r = nth_root(x, k);
        if &r.pow(k) == x {
            return Some((r, k));
        }
    }
    None
}

fn rho_split(n: &BigUint, budget: &FactorBudget) -> Option<BigUint> {
    for attempt in 0..budget.rho_attempts {
        let c = budget.seed.wrapping_add(attempt as u64).wrapping_mul(2).wrapping_add(1);
        let d = if let Some(small) = n.to_u64() {
            brent_u64(small, c, budget.rho_iterations).map(BigUint::from)
        } else {
            brent_big(n, &BigUint::from(c), budget.rho_iterations)
        };
        if d.is_some() {
            return d;
        }
    }
    None
}

fn brent_u64(n: u64, c: u64, max_iter: u64) -> Option<u64> {
    if n.is_multiple_of(2) {
        return Some(2);
    }
    let f = |y: u64| ((y as u128 * y as u128 + c as u128) % n as u128) as u64;
    let (mut y, mut r, mut q, mut g) = (2u64 % n, 1u64, 1u64, 1u64);
    let (mut x, mut ys) = (y, y);
    let m = 128;
    let mut iters = 0;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                q = ((q as u128 * x.abs_diff(y) as u128) % n as u128) as u64;
            }
            g = q.gcd(&n);
            k += m;
            iters += m;
        }
        r *= 2;
        if iters > max_iter {
            break;
        }
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    if g == 1 || g == n {
        None
    } else {
        Some(g)
    }
}

fn brent_big(n: &BigUint, c: &BigUint, max_iter: u64) -> Option<BigUint> {
    let f = |y: &BigUint| (y * y + c) % n;
    let one = BigUint::one();
    let mut y = BigUint::from(2u32);
    let (mut r, mut iters) = (1u64, 0u64);
    let mut q = one.clone();
    let mut g = one.clone();
    let mut x = y.clone();
    let mut ys = y.clone();
    let m = 128u64;
    let diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = f(&y);
                q = q * diff(&x, &y) % n;
            }
            g = q.gcd(n);
            k += m;
            iters += m;
        }
        r *= 2;
        if iters > max_iter {
            break;
        }
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = diff(&x, &ys).gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    if g.is_one() || &g == n {
        None
    } else {
        Some(g)
    }
}

/// Anything that can factor integers, possibly with a persistent cache.
pub trait FactorSource: Send + Sync {
    fn factor(&self, n: &BigUint) -> Factorization;
    fn budget(&self) -> &FactorBudget;
}

/// In-memory memoizing factorizer.
#[derive(Debug, Default)]
pub struct Factorizer {
    budget: FactorBudget,
    memo: Mutex<HashMap<BigUint, Factorization>>,
}

impl Factorizer {
    pub fn new(budget: FactorBudget) -> Self {
        Factorizer { budget, memo: Mutex::new(HashMap::new()) }
    }
}

impl FactorSource for Factorizer {
    fn factor(&self, n: &BigUint) -> Factorization {
        if let Some(f) = self.memo.lock().unwrap().get(n) {
            return f.clone();
        }
        let f = factor(n, &self.budget);
        self.memo.lock().unwrap().insert(n.clone(), f.clone());
        f
    }

    fn budget(&self) -> &FactorBudget {
        &self.budget
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    fn nat(s: &str) -> BigUint {
        BigUint::from_str(s).unwrap()
    }

    fn pairs(f: &Factorization) -> Vec<(u64, u32)> {
        f.factors.iter().map(|(p, e)| (p.to_u64().unwrap(), *e)).collect()
    }

    #[test]
    fn small_examples() {
        let b = FactorBudget::default();
        let f = factor(&nat("100"), &b);
        assert_eq!(pairs(&f), vec![(2, 2), (5, 2)]);
        assert!(f.complete);
        let f = factor(&nat("1"), &b);
        assert!(f.factors.is_empty() && f.complete && f.cofactor.is_one());
        let f = factor(&nat("29241"), &b);
        assert_eq!(pairs(&f), vec![(3, 4), (19, 2)]);
    }

    #[test]
    fn rho_splits_semiprimes_above_trial_bound() {
        let p = nat("1000003");
        let q = nat("1436582649813763");
        let n = &p * &q * &q;
        let f = factor(&n, &FactorBudget::trial_only(1000).clone_with_rho());
        assert!(f.complete, "{f:?}");
        assert_eq!(f.exponent_of(&q), 2);
        assert_eq!(f.exponent_of(&p), 1);
        f.check_invariants().unwrap();
    }

    #[test]
    fn incomplete_is_flagged_not_raised() {
        let p = nat("1000000000000000003");
        let q = nat("1000000000000000009");
        let n = &p * &q;
        let f = factor(&n, &FactorBudget { rho_iterations: 10, rho_attempts: 1, ..Default::default() });
        assert!(!f.complete);
        assert_eq!(f.cofactor, n);
        assert!(f.smooth_bound >= 1_000_000);
        f.check_invariants().unwrap();
    }

    #[test]
    fn hints_are_used() {
        let big = nat("1436582649813763");
        let n = &big * &big * 25u32;
        let src = Factorizer::new(FactorBudget::trial_only(10));
        let f = factor_with_hints(&n, std::slice::from_ref(&big), &src);
        assert!(f.complete);
        assert_eq!(f.exponent_of(&big), 2);
        assert_eq!(f.exponent_of(&nat("5")), 2);
    }

    impl FactorBudget {
        fn clone_with_rho(&self) -> Self {
            FactorBudget { rho_iterations: 1 << 20, rho_attempts: 4, ..self.clone() }
        }
    }
}
