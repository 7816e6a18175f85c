//! Integer arithmetic base layer: primality, sieves, multiplicative functions,
//! and exact rational helpers used throughout the crate.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use num::BigUint;

use crate::error::{Error, Result};

/// Deterministic Miller-Rabin witnesses covering every u64.
const MR_BASES: [u64; 7] = [2, 325, 9375, 28178, 450775, 9780504, 1795265022];

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic primality test for the full u64 range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for &a in &MR_BASES {
        let a = a % n;
        if a == 0 {
            continue;
        }
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

/// Least prime factor of n. Returns n itself when n is prime.
///
/// Precondition: n >= 2.
pub fn smallest_prime_factor(n: u64) -> u64 {
    debug_assert!(n >= 2);
    for p in [2u64, 3, 5] {
        if n % p == 0 {
            return p;
        }
    }
    if is_prime(n) {
        return n;
    }
    // Wheel mod 30 starting at 7; a composite survivor of the checks above
    // has a factor below sqrt(n).
    const WHEEL: [u64; 8] = [4, 2, 4, 2, 4, 6, 2, 6];
    let mut p = 7u64;
    let mut i = 0usize;
    while p * p <= n {
        if n % p == 0 {
            return p;
        }
        p += WHEEL[i];
        i = (i + 1) % 8;
    }
    n
}

/// Primes in [2, limit] by a simple sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primality and smallest-prime-factor table for the interval [lo, hi).
///
/// The spf entry is 0 when the value is 0, 1, or prime; otherwise it is the
/// least prime factor.
pub struct PrimeTable {
    lo: u64,
    prime: Vec<bool>,
    spf: Vec<u32>,
}

/// Internal segment length used while sieving large intervals.
const SEGMENT: u64 = 1 << 22;

/// Sieve the interval [lo, hi), producing primality plus least-factor data.
///
/// Preconditions: lo < hi and hi - lo small enough to hold two tables in
/// memory; the base sieve needs primes up to sqrt(hi).
pub fn sieve_range(lo: u64, hi: u64) -> Result<PrimeTable> {
    if lo >= hi {
        return Err(Error::InvalidParams(format!(
            "empty sieve range [{lo}, {hi})"
        )));
    }
    let len = (hi - lo) as usize;
    let root = (hi as f64).sqrt() as u64 + 1;
    let base = primes_up_to(root);
    let mut prime = vec![true; len];
    let mut spf = vec![0u32; len];
    let mut seg_lo = lo;
    while seg_lo < hi {
        let seg_hi = (seg_lo + SEGMENT).min(hi);
        for &p in &base {
            if p * p >= seg_hi {
                break;
            }
            let start = p.max(seg_lo.div_ceil(p)) * p;
            let start = start.max(p * p);
            let mut m = start;
            while m < seg_hi {
                let idx = (m - lo) as usize;
                prime[idx] = false;
                if spf[idx] == 0 {
                    spf[idx] = p as u32;
                }
                m += p;
            }
        }
        seg_lo = seg_hi;
    }
    for n in lo..hi.min(2) {
        prime[(n - lo) as usize] = false;
    }
    Ok(PrimeTable { lo, prime, spf })
}

impl PrimeTable {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.lo + self.prime.len() as u64
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= self.lo && n < self.hi()
    }

    /// Primality of n, which must lie inside the table.
    pub fn is_prime(&self, n: u64) -> bool {
        self.prime[(n - self.lo) as usize]
    }

    /// Least prime factor of n inside the table (n itself when prime).
    pub fn spf(&self, n: u64) -> u64 {
        let e = self.spf[(n - self.lo) as usize];
        if e != 0 {
            return e as u64;
        }
        n
    }

    /// Number of primes in the inclusive range [a, b], clipped to the table.
    pub fn count_primes(&self, a: u64, b: u64) -> usize {
        let a = a.max(self.lo);
        let b = b.min(self.hi().saturating_sub(1));
        if a > b {
            return 0;
        }
        (a..=b).filter(|&n| self.is_prime(n)).count()
    }
}

fn factor_squarefree_parts(mut n: u64) -> Option<Vec<u64>> {
    // Distinct prime factors if n is squarefree, None otherwise.
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return None;
            }
            out.push(p);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    Some(out)
}

/// Mobius function.
pub fn mobius(n: u64) -> i64 {
    if n == 0 {
        return 0;
    }
    if n == 1 {
        return 1;
    }
    match factor_squarefree_parts(n) {
        None => 0,
        Some(ps) => {
            if ps.len() % 2 == 0 {
                1
            } else {
                -1
            }
        }
    }
}

/// Euler totient.
pub fn euler_phi(mut n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut phi = n;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            phi -= phi / p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

pub fn is_squarefree(n: u64) -> bool {
    n > 0 && factor_squarefree_parts(n).is_some()
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num::integer::gcd(a, b)
}

/// Product of all primes <= x.
pub fn primorial(x: u64) -> BigUint {
    let mut acc = BigUint::one();
    for p in primes_up_to(x) {
        acc *= BigUint::from(p);
    }
    acc
}

/// Product of all primes <= x as a u64.
///
/// Errors when the product overflows (first at x >= 53).
pub fn primorial_u64(x: u64) -> Result<u64> {
    primorial(x).to_u64().ok_or_else(|| {
        Error::InvalidParams(format!("primorial({x}) does not fit in 64 bits"))
    })
}

/// Exact rational from an i64.
pub fn ratio_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact rational n/d.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// n! as a BigInt.
pub fn factorial(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// Parse "a/b", a decimal like "0.05", or a plain integer into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidParams(format!("cannot parse rational from {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let num: BigInt = a.trim().parse().map_err(|_| bad())?;
        let den: BigInt = b.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((a, b)) = s.split_once('.') {
        if b.is_empty() || !b.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let int: BigInt = if a.is_empty() || a == "-" {
            BigInt::zero()
        } else {
            a.parse().map_err(|_| bad())?
        };
        let frac: BigInt = b.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(b.len() as u32);
        let neg = a.starts_with('-');
        let whole = &int * &scale + if neg { -&frac } else { frac.clone() };
        return Ok(BigRational::new(whole, scale));
    }
    let num: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(num))
}

/// Render a rational as "num/den".
pub fn ratio_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn ratio_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Best rational approximation to x with denominator <= max_den, via
/// continued-fraction convergents.
pub fn rationalize(x: f64, max_den: u64) -> BigRational {
    assert!(max_den >= 1);
    if !x.is_finite() {
        return BigRational::zero();
    }
    let neg = x < 0.0;
    let mut x = x.abs();
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let cap = BigInt::from(max_den);
    for _ in 0..64 {
        let a = x.floor();
        let ai = BigInt::from(a as i64);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        if q2 > cap {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = x - a;
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    if q1.is_zero() {
        return BigRational::zero();
    }
    let out = BigRational::new(p1, q1);
    if neg {
        -out
    } else {
        out
    }
}

/// Ceiling of a positive rational as u64.
pub fn ratio_ceil_u64(q: &BigRational) -> Result<u64> {
    if q.is_negative() {
        return Err(Error::InvalidParams("expected a non-negative rational".into()));
    }
    q.ceil()
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::InvalidParams("rational ceiling does not fit in u64".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_prime_trial(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2u64;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn primality_matches_trial_division_small() {
        for n in 0..5000 {
            assert_eq!(is_prime(n), is_prime_trial(n), "n = {n}");
        }
    }

    #[test]
    fn primality_known_values() {
        assert!(is_prime(2));
        assert!(is_prime(1_000_000_007));
        assert!(is_prime(18_446_744_073_709_551_557)); // 2^64 - 59
        assert!(!is_prime(1));
        assert!(!is_prime(561)); // Carmichael
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
        assert!(!is_prime(18_446_744_073_709_551_615));
    }

    #[test]
    fn spf_queries() {
        assert_eq!(smallest_prime_factor(2), 2);
        assert_eq!(smallest_prime_factor(91), 7);
        assert_eq!(smallest_prime_factor(97), 97);
        assert_eq!(smallest_prime_factor(1_000_003), 1_000_003);
        assert_eq!(smallest_prime_factor(18_446_744_073_709_551_557), 18_446_744_073_709_551_557);
        assert_eq!(smallest_prime_factor(3_215_031_751), 151);
        for n in 2..2000u64 {
            let p = smallest_prime_factor(n);
            assert_eq!(n % p, 0);
            assert!(is_prime(p));
            assert!((2..p).all(|d| n % d != 0));
        }
    }

    #[test]
    fn sieve_range_agrees_with_per_element_checks() {
        let t = sieve_range(0, 3000).unwrap();
        for n in 0..3000u64 {
            assert_eq!(t.is_prime(n), is_prime_trial(n), "n = {n}");
            if n >= 2 && !t.is_prime(n) {
                assert_eq!(t.spf(n), smallest_prime_factor(n));
            }
            if n >= 2 && t.is_prime(n) {
                assert_eq!(t.spf(n), n);
            }
        }
    }

    #[test]
    fn sieve_range_high_window() {
        let lo = 1_000_000_000u64;
        let t = sieve_range(lo, lo + 1000).unwrap();
        for n in lo..lo + 1000 {
            assert_eq!(t.is_prime(n), is_prime(n), "n = {n}");
            if !t.is_prime(n) {
                let p = t.spf(n);
                assert_eq!(n % p, 0);
                assert_eq!(p, smallest_prime_factor(n));
            }
        }
    }

    #[test]
    fn sieve_rejects_empty_range() {
        assert!(sieve_range(10, 10).is_err());
    }

    #[test]
    fn mobius_values_and_sum() {
        assert_eq!(mobius(1), 1);
        assert_eq!(mobius(2), -1);
        assert_eq!(mobius(4), 0);
        assert_eq!(mobius(6), 1);
        assert_eq!(mobius(30), -1);
        // sum_{d | n} mu(d) = [n = 1]
        for n in 1..=10_000u64 {
            let mut s = 0i64;
            let mut d = 1;
            while d * d <= n {
                if n % d == 0 {
                    s += mobius(d);
                    if d != n / d {
                        s += mobius(n / d);
                    }
                }
                d += 1;
            }
            assert_eq!(s, i64::from(n == 1), "n = {n}");
        }
    }

    #[test]
    fn phi_values() {
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(2), 1);
        assert_eq!(euler_phi(30), 8);
        assert_eq!(euler_phi(210), 48);
        for n in 1..500u64 {
            let direct = (1..=n).filter(|&a| gcd(a, n) == 1).count() as u64;
            assert_eq!(euler_phi(n), direct, "n = {n}");
        }
    }

    #[test]
    fn primorials() {
        assert_eq!(primorial_u64(1).unwrap(), 1);
        assert_eq!(primorial_u64(2).unwrap(), 2);
        assert_eq!(primorial_u64(5).unwrap(), 30);
        assert_eq!(primorial_u64(7).unwrap(), 210);
        assert_eq!(primorial_u64(13).unwrap(), 30030);
        assert_eq!(primorial_u64(47).unwrap(), 614_889_782_588_491_410);
        assert!(primorial_u64(53).is_err());
        assert_eq!(primorial(10), BigUint::from(210u32));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("0.05").unwrap(), ratio(1, 20));
        assert_eq!(parse_rational("-0.25").unwrap(), ratio(-1, 4));
        assert_eq!(parse_rational("3").unwrap(), ratio_int(3));
        assert_eq!(parse_rational(" 2/4 ").unwrap(), ratio(1, 2));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn rationalize_continued_fractions() {
        assert_eq!(rationalize(0.5, 1_000_000), ratio(1, 2));
        assert_eq!(rationalize(-0.75, 1_000_000), ratio(-3, 4));
        let pi = rationalize(std::f64::consts::PI, 1000);
        assert_eq!(pi, ratio(355, 113));
        // Last convergent with denominator q <= cap has error < 1/(q*cap).
        let x = 0.123456789;
        let q = rationalize(x, 1_000_000);
        let den = q.denom().to_f64().unwrap();
        assert!((ratio_to_f64(&q) - x).abs() < 1.0 / (den * 1e6));
    }

    #[test]
    fn rational_invariants() {
        let q = ratio(6, -8);
        assert_eq!(q, ratio(-3, 4));
        assert!(q.denom() > &BigInt::zero());
        assert_eq!(ratio_string(&ratio(10, 4)), "5/2");
    }

    #[test]
    fn ceil_helper() {
        assert_eq!(ratio_ceil_u64(&ratio(5, 2)).unwrap(), 3);
        assert_eq!(ratio_ceil_u64(&ratio(4, 2)).unwrap(), 2);
        assert!(ratio_ceil_u64(&ratio(-1, 2)).is_err());
    }
}
