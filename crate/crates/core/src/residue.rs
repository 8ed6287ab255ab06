//! Integer and residue-class primitives: prime table, trial-division
//! factorization, p-adic valuation, the divisor-count function and
//! `lcm(1..N)`.
//!
//! Naturals are unsigned 64-bit throughout; anything that would overflow
//! returns an error instead of wrapping.

use std::fmt;
use std::str::FromStr;

use once_cell::sync::Lazy;

use crate::error::{Error, Result};

/// Bound of the precomputed prime table.
pub const PRIME_TABLE_BOUND: u64 = 1_000_000;

static SMALL_PRIMES: Lazy<Vec<u64>> = Lazy::new(|| primes_upto(PRIME_TABLE_BOUND));

/// Default prime list for odd-exponent counting: all primes up to 10^4.
static RT_PRIMES: Lazy<Vec<u64>> = Lazy::new(|| primes_upto(10_000));

pub fn default_rt_primes() -> &'static [u64] {
    &RT_PRIMES
}

/// Sieve of Eratosthenes.
pub fn primes_upto(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            out.push(p as u64);
            let mut q = p * p;
            while q <= n {
                composite[q] = true;
                q += p;
            }
        }
    }
    out
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b.max(1);
    }
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm_checked(a: u64, b: u64) -> Result<u64> {
    if a == 0 || b == 0 {
        return Err(Error::Invalid("lcm of zero".into()));
    }
    (a / gcd(a, b))
        .checked_mul(b)
        .ok_or(Error::Overflow("lcm"))
}

pub fn pow_checked(base: u64, exp: u32) -> Result<u64> {
    base.checked_pow(exp).ok_or(Error::Overflow("pow"))
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).map_or(true, |s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).map_or(false, |s| s <= n) {
        r += 1;
    }
    r
}

/// Deterministic primality by trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in SMALL_PRIMES.iter() {
        if p * p > n {
            return true;
        }
        if n % p == 0 {
            return n == p;
        }
    }
    // Table exhausted: continue with odd candidates.
    let mut d = PRIME_TABLE_BOUND | 1;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization of `n >= 2`; returns `(prime, exponent)` pairs in
/// increasing prime order. Empty for `n <= 1`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    for &p in SMALL_PRIMES.iter() {
        if p * p > n {
            break;
        }
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if n > 1 {
        if n <= PRIME_TABLE_BOUND * PRIME_TABLE_BOUND {
            out.push((n, 1));
        } else {
            let mut d = PRIME_TABLE_BOUND | 1;
            while d * d <= n {
                if n % d == 0 {
                    let mut e = 0;
                    while n % d == 0 {
                        n /= d;
                        e += 1;
                    }
                    out.push((d, e));
                }
                d += 2;
            }
            if n > 1 {
                out.push((n, 1));
            }
        }
    }
    out
}

/// p-adic valuation without the primality check; `p >= 2`, `n >= 1`.
#[inline]
pub(crate) fn valuation_raw(mut n: u64, p: u64) -> u32 {
    debug_assert!(p >= 2 && n >= 1);
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

/// Largest e with p^e | n. Errors on n = 0 or composite p.
pub fn valuation(n: u64, p: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::Invalid("valuation of 0".into()));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(valuation_raw(n, p))
}

/// Number of divisors via the exponent product formula.
pub fn tau(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::Invalid("tau of 0".into()));
    }
    let mut t: u64 = 1;
    for (_, e) in factorize(n) {
        t = t
            .checked_mul(e as u64 + 1)
            .ok_or(Error::Overflow("tau"))?;
    }
    Ok(t)
}

/// Number of distinct prime factors.
pub fn omega(n: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::Invalid("omega of 0".into()));
    }
    Ok(factorize(n).len() as u32)
}

/// lcm(1, 2, ..., n); first overflows 64 bits at n = 47.
pub fn lcm_upto(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::Invalid("lcm_upto(0)".into()));
    }
    let mut l: u64 = 1;
    for k in 2..=n {
        l = lcm_checked(l, k)?;
    }
    Ok(l)
}

/// Product of each prime of `n` taken once per odd exponent, i.e. the
/// squarefree kernel with n / result a perfect square.
pub fn squarefree_part(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::Invalid("squarefree part of 0".into()));
    }
    let mut s: u64 = 1;
    for (p, e) in factorize(n) {
        if e % 2 == 1 {
            s = s.checked_mul(p).ok_or(Error::Overflow("squarefree part"))?;
        }
    }
    Ok(s)
}

/// The residue class r + (m) = { n : n = r (mod m) }, kept with 0 <= r < m.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueClass {
    modulus: u64,
    residue: u64,
}

impl ResidueClass {
    pub fn new(residue: u64, modulus: u64) -> Result<ResidueClass> {
        if modulus == 0 {
            return Err(Error::Invalid("residue class with modulus 0".into()));
        }
        Ok(ResidueClass {
            residue: residue % modulus,
            modulus,
        })
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn contains(&self, n: u64) -> bool {
        n % self.modulus == self.residue
    }

    /// Image under multiplication by `a >= 1`: (a r) + (a m).
    pub fn scale(&self, a: u64) -> Result<ResidueClass> {
        if a == 0 {
            return Err(Error::Invalid("scale factor must be >= 1".into()));
        }
        let m = self
            .modulus
            .checked_mul(a)
            .ok_or(Error::Overflow("class scale"))?;
        Ok(ResidueClass {
            residue: self.residue * a,
            modulus: m,
        })
    }
}

impl fmt::Display for ResidueClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+({})", self.residue, self.modulus)
    }
}

impl FromStr for ResidueClass {
    type Err = Error;

    /// Parses the "r+(m)" notation.
    fn from_str(s: &str) -> Result<ResidueClass> {
        let bad = || Error::Parse {
            pos: 0,
            msg: format!("expected residue class r+(m), got {s:?}"),
        };
        let s = s.trim();
        let (r, rest) = s.split_once('+').ok_or_else(bad)?;
        let rest = rest.strip_prefix('(').ok_or_else(bad)?;
        let m = rest.strip_suffix(')').ok_or_else(bad)?;
        let r: u64 = r.trim().parse().map_err(|_| bad())?;
        let m: u64 = m.trim().parse().map_err(|_| bad())?;
        ResidueClass::new(r, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_class_examples() {
        let c = ResidueClass::new(1, 3).unwrap();
        assert_eq!(c.scale(2).unwrap(), ResidueClass::new(2, 6).unwrap());
        let c = ResidueClass::new(5, 7).unwrap();
        assert_eq!(c.scale(1).unwrap(), c);
        let c = ResidueClass::new(2, 4).unwrap();
        assert_eq!(c.scale(5).unwrap(), ResidueClass::new(10, 20).unwrap());
    }

    #[test]
    fn scale_composes() {
        let c = ResidueClass::new(3, 5).unwrap();
        for a in 1..20u64 {
            for b in 1..20u64 {
                assert_eq!(
                    c.scale(b).unwrap().scale(a).unwrap(),
                    c.scale(a * b).unwrap()
                );
            }
        }
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(12, 2).unwrap(), 2);
        assert_eq!(valuation(7, 2).unwrap(), 0);
        assert_eq!(valuation(8, 2).unwrap(), 3);
        assert!(valuation(0, 2).is_err());
        assert!(valuation(12, 4).is_err());
    }

    #[test]
    fn valuation_matches_repeated_division() {
        for n in 1..2000u64 {
            for p in [2u64, 3, 5, 7] {
                // Oracle: divide out p one step at a time.
                let mut m = n;
                let mut e = 0;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                assert_eq!(valuation(n, p).unwrap(), e);
            }
        }
    }

    #[test]
    fn tau_examples_and_oracle() {
        assert_eq!(tau(1).unwrap(), 1);
        assert_eq!(tau(12).unwrap(), 6);
        assert_eq!(tau(36).unwrap(), 9);
        for n in 1..=10_000u64 {
            let count = (1..=n).filter(|d| n % d == 0).count() as u64;
            assert_eq!(tau(n).unwrap(), count);
        }
    }

    #[test]
    fn lcm_upto_examples_and_chain() {
        assert_eq!(lcm_upto(1).unwrap(), 1);
        assert_eq!(lcm_upto(6).unwrap(), 60);
        assert_eq!(lcm_upto(10).unwrap(), 2520);
        // Oracle: pairwise lcm fold.
        let mut l: u64 = 1;
        for n in 2..=20 {
            l = l / gcd(l, n) * n;
            assert_eq!(lcm_upto(n).unwrap(), l);
        }
        for n in 1..46 {
            let a = lcm_upto(n).unwrap();
            let b = lcm_upto(n + 1).unwrap();
            assert_eq!(b % a, 0, "divisibility chain at {n}");
        }
        assert!(lcm_upto(47).is_err());
    }

    #[test]
    fn primality_and_factorization() {
        assert!(is_prime(2) && is_prime(97) && is_prime(999_983));
        assert!(!is_prime(1) && !is_prime(91));
        for n in 2..5000u64 {
            let f = factorize(n);
            let back: u64 = f
                .iter()
                .map(|&(p, e)| p.pow(e))
                .product();
            assert_eq!(back, n);
            for &(p, _) in &f {
                assert!(is_prime(p));
            }
        }
    }

    #[test]
    fn squarefree_part_small() {
        assert_eq!(squarefree_part(1).unwrap(), 1);
        assert_eq!(squarefree_part(4).unwrap(), 1);
        assert_eq!(squarefree_part(12).unwrap(), 3);
        assert_eq!(squarefree_part(18).unwrap(), 2);
    }

    #[test]
    fn class_display_roundtrip() {
        let c = ResidueClass::new(3, 8).unwrap();
        let back: ResidueClass = c.to_string().parse().unwrap();
        assert_eq!(back, c);
    }
}
