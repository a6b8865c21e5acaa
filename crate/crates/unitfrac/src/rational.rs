//! Exact rational arithmetic over harmonic intervals.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Reduced arbitrary-precision rational. `num_rational` keeps the gcd
/// invariant after every operation.
pub type BigRat = num_rational::BigRational;

pub fn rat(num: i64, den: i64) -> BigRat {
    BigRat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_u64(n: u64) -> BigRat {
    BigRat::from_integer(BigInt::from(n))
}

/// Reciprocal `1/n` as an exact rational.
pub fn unit(n: u64) -> BigRat {
    BigRat::new(BigInt::one(), BigInt::from(n))
}

/// Parses "a/b" or an integer string; rejects decimals and b = 0.
pub fn parse_rational(s: &str) -> Result<BigRat> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::InvalidInput(format!("not a rational: {s:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::InvalidInput(format!("not a rational: {s:?}")))?;
    if den.is_zero() {
        return Err(Error::InvalidInput(format!("zero denominator: {s:?}")));
    }
    Ok(BigRat::new(num, den))
}

pub fn format_rational(r: &BigRat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &BigRat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Denominator of a reduced rational as an unsigned integer.
pub fn denom_uint(r: &BigRat) -> BigUint {
    r.denom().magnitude().clone()
}

/// Closed integer interval `[lo, hi]` of unit fraction denominators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct HarmonicInterval {
    pub lo: u64,
    pub hi: u64,
}

impl HarmonicInterval {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo == 0 || lo > hi {
            return Err(Error::InvalidInput(format!(
                "invalid harmonic interval [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// The paper's open interval `(n, cn)` normalized to closed bounds.
    /// The convention is recorded in every cleanup trace.
    pub fn open(n: u64, c: f64) -> Result<Self> {
        let hi = (c * n as f64).ceil() as u64;
        if hi < n + 2 {
            return Err(Error::InvalidInput(format!(
                "open interval ({n}, {c}*{n}) contains no integers"
            )));
        }
        Self::new(n + 1, hi - 1)
    }

    pub fn contains(&self, n: u64) -> bool {
        self.lo <= n && n <= self.hi
    }

    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false // lo <= hi by construction
    }
}

// Balanced divide-and-conquer sum; a left fold blows up gcd work on the
// growing denominator.
fn sum_tree(terms: &[u64]) -> BigRat {
    match terms.len() {
        0 => BigRat::zero(),
        1 => unit(terms[0]),
        n => {
            let (a, b) = terms.split_at(n / 2);
            sum_tree(a) + sum_tree(b)
        }
    }
}

/// Exact `sum of 1/n` over the interval, skipping `excluded`.
pub fn harmonic_sum(interval: HarmonicInterval, excluded: &BTreeSet<u64>) -> BigRat {
    let terms: Vec<u64> = (interval.lo..=interval.hi)
        .filter(|n| !excluded.contains(n))
        .collect();
    sum_tree(&terms)
}

/// Exact reciprocal sum over an arbitrary set of denominators.
pub fn reciprocal_sum(terms: &[u64]) -> BigRat {
    sum_tree(terms)
}

/// `sum of 1/n` over `[lo, hi]`, zero when the range is empty.
pub fn harmonic_sum_range(lo: u64, hi: u64) -> BigRat {
    if lo > hi || lo == 0 {
        return BigRat::zero();
    }
    let terms: Vec<u64> = (lo..=hi).collect();
    sum_tree(&terms)
}

/// Smallest `M >= N` with `sum_{N<=n<=M} 1/n >= r`. The returned M then
/// automatically satisfies `sum <= r + 1/M` since the sum over `[N, M-1]`
/// is below r.
pub fn find_m(r: &BigRat, n: u64) -> Result<u64> {
    if !r.is_positive() {
        return Err(Error::InvalidInput("r must be positive".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput("N must be at least 2".into()));
    }
    // Gallop to an upper bound, then binary search. Each probe is a fresh
    // balanced sum, keeping intermediate numerators small.
    let mut hi = n;
    while harmonic_sum_range(n, hi) < *r {
        hi = hi.saturating_mul(2).max(hi + 1);
    }
    let mut lo = n; // invariant: sum over [n, hi] >= r, sum over [n, lo-1] < r
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if harmonic_sum_range(n, mid) >= *r {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Observed growth exponent `log(M/N)`, to compare against r.
pub fn ratio_to_growth(m: u64, n: u64) -> f64 {
    (m as f64 / n as f64).ln()
}
