//! Smallest-prime-factor sieve, factorization and prime-power smoothness.
//!
//! "Smooth" here is the strengthened notion: every exact prime-power divisor
//! `p^a || n` must satisfy `p^a <= y`, not just the primes.

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

/// A prime power `p^a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub struct PrimePower {
    pub p: u64,
    pub a: u32,
}

impl PrimePower {
    pub fn value(&self) -> u64 {
        self.p.pow(self.a)
    }
}

/// Smallest-prime-factor table for `[2, limit]`. Built once, then read-only.
pub struct FactorSieve {
    limit: u64,
    spf: Vec<u32>,
}

impl FactorSieve {
    pub fn new(limit: u64) -> Self {
        let limit = limit.max(2);
        assert!(limit <= u32::MAX as u64, "sieve limit exceeds u32 range");
        let n = (limit + 1) as usize;
        let mut spf = vec![0u32; n];
        for i in 2..n {
            if spf[i] == 0 {
                let mut j = i;
                while j < n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Self { limit, spf }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn check_range(&self, n: u64) -> Result<()> {
        if n > self.limit {
            return Err(Error::OutOfSieveRange {
                n,
                limit: self.limit,
            });
        }
        Ok(())
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit && self.spf[n as usize] as u64 == n
    }

    /// Complete sorted factorization; empty for n = 1.
    pub fn factorize(&self, n: u64) -> Result<Vec<PrimePower>> {
        if n == 0 {
            return Err(Error::InvalidInput("cannot factorize 0".into()));
        }
        self.check_range(n)?;
        let mut out = Vec::new();
        let mut n = n;
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut a = 0u32;
            while n % p == 0 {
                n /= p;
                a += 1;
            }
            out.push(PrimePower { p, a });
        }
        Ok(out)
    }

    /// The maximal `p^a` over exact prime-power divisors of n (n >= 2).
    pub fn largest_prime_power_factor(&self, n: u64) -> Result<PrimePower> {
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "largest_prime_power_factor needs n >= 2, got {n}"
            )));
        }
        Ok(self
            .factorize(n)?
            .into_iter()
            .max_by_key(|pp| pp.value())
            .unwrap())
    }

    /// True iff every exact prime-power divisor `p^a || n` has `p^a <= y`.
    pub fn is_smooth(&self, n: u64, y: u64) -> Result<bool> {
        if n == 1 {
            return Ok(true);
        }
        self.check_range(n)?;
        let mut n = n;
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut q = 1u64;
            while n % p == 0 {
                n /= p;
                q *= p;
            }
            if q > y {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Exact count of prime-power-smooth integers, `psi'(N, y) = |S(N, y)|`.
    pub fn psi_prime(&self, n: u64, y: u64) -> Result<u64> {
        self.check_range(n)?;
        let mut count = 0u64;
        for k in 1..=n {
            if self.is_smooth(k, y)? {
                count += 1;
            }
        }
        Ok(count)
    }

    /// Ordinary smooth count `psi(N, y)` (primes only), for double counting.
    pub fn psi(&self, n: u64, y: u64) -> Result<u64> {
        self.check_range(n)?;
        let mut count = 0u64;
        'outer: for k in 1..=n {
            let mut m = k;
            while m > 1 {
                let p = self.spf[m as usize] as u64;
                if p > y {
                    continue 'outer;
                }
                while m % p == 0 {
                    m /= p;
                }
            }
            count += 1;
        }
        Ok(count)
    }

    /// All primes p with `lo < p < hi` (strict) not dividing `coprime_to`.
    pub fn primes_in(&self, lo: f64, hi: f64, coprime_to: u64) -> Vec<u64> {
        let start = if lo < 2.0 { 2 } else { lo.floor() as u64 + 1 };
        let end = hi.ceil() as u64;
        (start..end.min(self.limit + 1))
            .filter(|&p| (p as f64) > lo && (p as f64) < hi)
            .filter(|&p| self.is_prime(p))
            .filter(|&p| coprime_to % p != 0)
            .collect()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        (2..=self.limit).filter(move |&p| self.is_prime(p))
    }

    /// Factors a big integer by trial division against the sieve's primes.
    /// Every prime factor must be within the sieve limit.
    pub fn factorize_big(&self, n: &BigUint) -> Result<Vec<PrimePower>> {
        let mut out = Vec::new();
        let mut n = n.clone();
        for p in self.primes() {
            if n.is_one() {
                break;
            }
            let bp = BigUint::from(p);
            let mut a = 0u32;
            while (&n % &bp) == BigUint::ZERO {
                n /= &bp;
                a += 1;
            }
            if a > 0 {
                out.push(PrimePower { p, a });
            }
        }
        if !n.is_one() {
            return Err(Error::OutOfSieveRange {
                n: u64::MAX,
                limit: self.limit,
            });
        }
        Ok(out)
    }
}

/// `lcm(1..=y)` as a product of maximal prime powers `p^a <= y`.
pub fn lcm_up_to(y: u64) -> BigUint {
    let mut acc = BigUint::one();
    if y < 2 {
        return acc;
    }
    let sieve = FactorSieve::new(y);
    for p in sieve.primes() {
        let mut q = p;
        while q <= y / p {
            q *= p;
        }
        acc *= BigUint::from(q);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn sieve() -> FactorSieve {
        FactorSieve::new(10_000)
    }

    #[test]
    fn factorize_examples() {
        let s = sieve();
        let f = s.factorize(12).unwrap();
        assert_eq!(f, vec![PrimePower { p: 2, a: 2 }, PrimePower { p: 3, a: 1 }]);
        assert!(s.factorize(1).unwrap().is_empty());
        assert_eq!(s.factorize(97).unwrap(), vec![PrimePower { p: 97, a: 1 }]);
        assert!(s.factorize(20_000).is_err());
    }

    #[test]
    fn factorize_recomposes() {
        let s = sieve();
        for n in 2..2000u64 {
            let prod: u64 = s.factorize(n).unwrap().iter().map(|pp| pp.value()).product();
            assert_eq!(prod, n);
        }
    }

    #[test]
    fn largest_prime_power_examples() {
        let s = sieve();
        assert_eq!(s.largest_prime_power_factor(12).unwrap().value(), 4);
        assert_eq!(s.largest_prime_power_factor(18).unwrap().value(), 9);
        assert_eq!(s.largest_prime_power_factor(7).unwrap().value(), 7);
        assert!(s.largest_prime_power_factor(1).is_err());
    }

    #[test]
    fn smoothness_examples() {
        let s = sieve();
        assert!(s.is_smooth(6, 3).unwrap());
        assert!(!s.is_smooth(4, 3).unwrap());
        assert!(s.is_smooth(1, 1).unwrap());
    }

    #[test]
    fn smoothness_matches_largest_pp() {
        let s = sieve();
        for n in 2..3000u64 {
            for y in [2, 3, 7, 25, 100] {
                assert_eq!(
                    s.is_smooth(n, y).unwrap(),
                    s.largest_prime_power_factor(n).unwrap().value() <= y
                );
            }
        }
    }

    #[test]
    fn psi_prime_examples() {
        let s = sieve();
        assert_eq!(s.psi_prime(10, 3).unwrap(), 4); // {1, 2, 3, 6}
        assert_eq!(s.psi_prime(50, 50).unwrap(), 50);
        assert_eq!(s.psi_prime(10, 1).unwrap(), 1);
    }

    #[test]
    fn psi_prime_below_psi() {
        let s = sieve();
        for (n, y) in [(10_000u64, 10u64), (10_000, 50), (5000, 7)] {
            assert!(s.psi_prime(n, y).unwrap() <= s.psi(n, y).unwrap());
        }
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(lcm_up_to(10).to_u64().unwrap(), 2520);
        assert_eq!(lcm_up_to(1).to_u64().unwrap(), 1);
        assert_eq!(lcm_up_to(4).to_u64().unwrap(), 12);
    }

    #[test]
    fn lcm_divisibility() {
        let y = 30u64;
        let p = lcm_up_to(y);
        for k in 1..=y {
            assert_eq!(&p % BigUint::from(k), BigUint::ZERO, "lcm not divisible by {k}");
        }
        for q in [31u64, 37, 41] {
            assert_ne!(&p % BigUint::from(q), BigUint::ZERO);
        }
    }

    #[test]
    fn primes_in_strict_bounds() {
        let s = sieve();
        assert_eq!(s.primes_in(7.14, 14.29, 7), vec![11, 13]);
        assert!(s.primes_in(2.0, 3.0, 1).is_empty());
        assert_eq!(s.primes_in(1.0, 10.0, 6), vec![5, 7]);
    }

    #[test]
    fn factorize_big_roundtrip() {
        let s = sieve();
        let n = BigUint::from(2u64).pow(5) * BigUint::from(9973u64) * BigUint::from(625u64);
        let f = s.factorize_big(&n).unwrap();
        let mut prod = BigUint::one();
        for pp in &f {
            prod *= BigUint::from(pp.p).pow(pp.a);
        }
        assert_eq!(prod, n);
    }
}
