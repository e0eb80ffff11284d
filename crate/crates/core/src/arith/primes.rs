use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_traits::{One, ToPrimitive, Zero};

/// Bit-packed sieve of Eratosthenes over the odd numbers up to a limit.
#[derive(Clone, Debug)]
pub struct PrimeSieve {
    limit: u64,
    // bit i set <=> 2i+1 is composite
    bits: Vec<u64>,
}

impl PrimeSieve {
    pub fn new(limit: u64) -> Self {
        let n_odd = (limit / 2 + 1) as usize;
        let mut bits = vec![0u64; n_odd / 64 + 1];
        bits[0] |= 1; // 1 is not prime
        let mut i = 1u64;
        while (2 * i + 1) * (2 * i + 1) <= limit {
            if bits[(i / 64) as usize] >> (i % 64) & 1 == 0 {
                let p = 2 * i + 1;
                let mut j = p * p / 2;
                while 2 * j < limit + 1 {
                    bits[(j / 64) as usize] |= 1 << (j % 64);
                    j += p;
                }
            }
            i += 1;
        }
        PrimeSieve { limit, bits }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn is_prime(&self, n: u64) -> bool {
        assert!(n <= self.limit, "{n} beyond sieve limit {}", self.limit);
        if n < 2 {
            return false;
        }
        if n.is_multiple_of(2) {
            return n == 2;
        }
        let i = n / 2;
        self.bits[(i / 64) as usize] >> (i % 64) & 1 == 0
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        let two = if self.limit >= 2 { Some(2) } else { None };
        two.into_iter().chain(
            (1..=(self.limit.saturating_sub(1)) / 2)
                .map(|i| 2 * i + 1)
                .filter(move |&n| n <= self.limit && self.is_prime(n)),
        )
    }
}

/// All primes `<= n` in increasing order.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    PrimeSieve::new(n).primes().collect()
}

/// Exact prime-counting function, via a segmented sieve.
pub fn count_primes(x: u64) -> u64 {
    if x < 2 {
        return 0;
    }
    let root = x.sqrt();
    let small = primes_up_to(root);
    let mut count = 1u64; // the prime 2
    const SEG: u64 = 1 << 20;
    let mut seg = vec![false; SEG as usize];
    // odd numbers only: index i in segment starting at `lo` is lo + 2i
    let mut lo = 3u64;
    while lo <= x {
        let hi = (lo + 2 * SEG).min(x + 1);
        let len = (hi - lo).div_ceil(2) as usize;
        seg[..len].iter_mut().for_each(|b| *b = true);
        for &p in small.iter().skip(1) {
            let p2 = p * p;
            if p2 >= hi {
                break;
            }
            let mut start = if p2 >= lo { p2 } else { lo.div_ceil(p) * p };
            if start % 2 == 0 {
                start += p;
            }
            let mut j = start;
            while j < hi {
                seg[((j - lo) / 2) as usize] = false;
                j += 2 * p;
            }
        }
        for (i, &b) in seg[..len].iter().enumerate() {
            if b && lo + 2 * i as u64 <= x {
                count += 1;
            }
        }
        lo = hi + hi.is_multiple_of(2) as u64;
    }
    count
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let s = d.trailing_zeros();
    d >>= s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

const MR_BASES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Primality test. Deterministic below 2^64; above that, Miller-Rabin with
/// 24 fixed prime bases (error probability below 4^-24 per composite).
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for &p in MR_BASES.iter() {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'witness: for &a in MR_BASES.iter() {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Floor of the square root.
pub fn isqrt(n: &BigUint) -> BigUint {
    n.sqrt()
}

/// Floor of the k-th root.
pub fn nth_root(n: &BigUint, k: u32) -> BigUint {
    n.nth_root(k)
}

/// Exponent of `p` in `n`; `n` must be nonzero and `p > 1`.
pub fn valuation(n: &BigUint, p: &BigUint) -> u32 {
    assert!(!n.is_zero(), "valuation of zero");
    assert!(p > &BigUint::one(), "valuation base must exceed 1");
    let mut v = 0;
    let mut m = n.clone();
    // square the divisor while it keeps dividing, then walk back down
    let mut powers = vec![p.clone()];
    loop {
        let (q, r) = m.div_rem(powers.last().unwrap());
        if !r.is_zero() {
            break;
        }
        m = q;
        v += 1 << (powers.len() - 1);
        let next = powers.last().unwrap() * powers.last().unwrap();
        if next > m {
            break;
        }
        powers.push(next);
    }
    while let Some(pk) = powers.pop() {
        let (q, r) = m.div_rem(&pk);
        if r.is_zero() {
            m = q;
            v += 1 << powers.len();
        }
    }
    v
}

/// Removes from `a` every prime that divides `b`.
pub fn strip_common(a: &BigUint, b: &BigUint) -> BigUint {
    let mut a = a.clone();
    let mut g = a.gcd(b);
    while !g.is_one() && !a.is_zero() {
        a /= &g;
        g = a.gcd(&g);
    }
    a
}

/// Jacobi symbol (a | n) for odd positive n.
pub fn jacobi(a: &BigInt, n: &BigUint) -> i32 {
    assert!(n.is_odd(), "jacobi symbol needs an odd modulus");
    let mut n = n.clone();
    let nn = BigInt::from(n.clone());
    let mut a = a.mod_floor(&nn).to_biguint().unwrap();
    let mut t = 1;
    while !a.is_zero() {
        while a.is_even() {
            a >>= 1;
            let r = (&n % 8u32).to_u32().unwrap();
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if (&a % 4u32).to_u32() == Some(3) && (&n % 4u32).to_u32() == Some(3) {
            t = -t;
        }
        a %= &n;
    }
    if n.is_one() {
        t
    } else {
        0
    }
}

/// A square root of `a` modulo an odd prime `p` (Tonelli-Shanks).
pub fn sqrt_mod_prime(a: &BigInt, p: &BigUint) -> Option<BigUint> {
    let pi = BigInt::from(p.clone());
    let a = a.mod_floor(&pi).to_biguint().unwrap();
    if a.is_zero() {
        return Some(BigUint::zero());
    }
    if p == &BigUint::from(2u32) {
        return Some(a);
    }
    if jacobi(&BigInt::from(a.clone()), p) != 1 {
        return None;
    }
    let one = BigUint::one();
    let pm1 = p - &one;
    let s = pm1.trailing_zeros().unwrap();
    let q = &pm1 >> s;
    if s == 1 {
        return Some(a.modpow(&((p + &one) >> 2), p));
    }
    let mut z = BigUint::from(2u32);
    while jacobi(&BigInt::from(z.clone()), p) != -1 {
        z += 1u32;
    }
    let mut m = s;
    let mut c = z.modpow(&q, p);
    let mut t = a.modpow(&q, p);
    let mut r = a.modpow(&((&q + &one) >> 1), p);
    while !t.is_one() {
        let mut i = 0;
        let mut tt = t.clone();
        while !tt.is_one() {
            tt = &tt * &tt % p;
            i += 1;
        }
        let mut b = c.clone();
        for _ in 0..(m - i - 1) {
            b = &b * &b % p;
        }
        m = i;
        c = &b * &b % p;
        t = &t * &c % p;
        r = &r * &b % p;
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn sieve_matches_trial_division() {
        let s = PrimeSieve::new(2000);
        for n in 0..=2000 {
            assert_eq!(s.is_prime(n), naive_prime(n), "{n}");
        }
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn prime_counts() {
        assert_eq!(count_primes(10), 4);
        assert_eq!(count_primes(100), 25);
        assert_eq!(count_primes(1_000_000), 78498);
        for x in 0..500 {
            assert_eq!(count_primes(x), (0..=x).filter(|&n| naive_prime(n)).count() as u64, "{x}");
        }
    }

    #[test]
    fn miller_rabin() {
        for n in 0..5000u64 {
            assert_eq!(is_prime_u64(n), naive_prime(n), "{n}");
        }
        // strong pseudoprime to bases 2..37 products of small order
        assert!(!is_prime_u64(3_215_031_751));
        assert!(is_prime_u64(1_436_582_649_813_763));
        let m127 = (BigUint::one() << 127) - 1u32;
        assert!(is_prime(&m127));
        assert!(!is_prime(&(&m127 * 3u32)));
    }

    #[test]
    fn valuations_and_roots() {
        let n = BigUint::from(2u32).pow(37) * 3u32;
        assert_eq!(valuation(&n, &BigUint::from(2u32)), 37);
        assert_eq!(valuation(&n, &BigUint::from(3u32)), 1);
        assert_eq!(valuation(&n, &BigUint::from(5u32)), 0);
        assert_eq!(isqrt(&BigUint::from(29241u32)), BigUint::from(171u32));
        assert_eq!(nth_root(&BigUint::from(1000u32), 3), BigUint::from(10u32));
        assert_eq!(strip_common(&BigUint::from(2 * 2 * 3 * 7u32), &BigUint::from(6u32)), BigUint::from(7u32));
    }

    #[test]
    fn jacobi_and_sqrt() {
        for p in [3u32, 5, 7, 11, 13, 17, 97, 101] {
            let pb = BigUint::from(p);
            for a in 0..p {
                let is_res = (1..p).any(|x| x * x % p == a);
                let j = jacobi(&BigInt::from(a), &pb);
                assert_eq!(j, if a == 0 { 0 } else if is_res { 1 } else { -1 }, "{a} mod {p}");
                if let Some(r) = sqrt_mod_prime(&BigInt::from(a), &pb) {
                    assert_eq!(&r * &r % &pb, BigUint::from(a));
                } else {
                    assert!(!is_res && a != 0);
                }
            }
        }
    }
}
