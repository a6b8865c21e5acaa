//! Constructive residue-class prime-subset selection.
//!
//! The existence proof works through exponential sums; here the same
//! statement is realized by exact dynamic programming over residues mod n:
//! among subsets of the pool whose reciprocal residues hit the target, the
//! one of minimal cardinality, ties broken by lexicographically smallest
//! prime list.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::primes::{FactorSieve, PrimePower};
use crate::rational::{reciprocal_sum, BigRat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ResidueTarget {
    pub modulus: u64,
    pub residue: u64,
}

impl ResidueTarget {
    pub fn new(modulus: u64, residue: u64) -> Result<Self> {
        if modulus < 2 || residue >= modulus {
            return Err(Error::InvalidInput(format!(
                "invalid residue target {residue} mod {modulus}"
            )));
        }
        Ok(Self { modulus, residue })
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SubsetSelection {
    pub chosen: Vec<u64>,
    pub achieved: u64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CorollarySelection {
    pub q: PrimePower,
    pub s: u64,
    pub primes: Vec<u64>,
    pub denominators: Vec<u64>,
}

impl CorollarySelection {
    /// Reciprocal budget of the selected denominators.
    pub fn reciprocal_sum(&self) -> BigRat {
        reciprocal_sum(&self.denominators)
    }
}

/// Inverse of b mod n via extended Euclid.
pub fn mod_inverse(b: u64, n: u64) -> Result<u64> {
    let (mut r0, mut r1) = (n as i128, (b % n) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return Err(Error::NotInvertible { b, n });
    }
    Ok(t0.rem_euclid(n as i128) as u64)
}

/// Least residue of `a * b^{-1} mod n` in absolute value: the representative
/// in `(-n/2, n/2]`.
pub fn least_residue(a: i64, b: i64, n: u64) -> Result<i64> {
    if n < 2 {
        return Err(Error::InvalidInput("least_residue needs n >= 2".into()));
    }
    let b_mod = (b.rem_euclid(n as i64)) as u64;
    let inv = mod_inverse(b_mod, n)?;
    let a_mod = (a.rem_euclid(n as i64)) as u64;
    let z = (a_mod as u128 * inv as u128 % n as u128) as u64;
    // shift class representative into (-n/2, n/2]
    if z <= n / 2 {
        Ok(z as i64)
    } else {
        Ok(z as i64 - n as i64)
    }
}

const DP_ENTRY_CAP: usize = 50_000_000;

/// Minimal-cardinality subsets over a suffix-indexed DP table.
/// `counts[j][res]` = least number of items from `items[j..]` whose weights
/// sum to `res` mod n, or u16::MAX.
fn suffix_min_counts(weights: &[u64], n: u64) -> Result<Vec<Vec<u16>>> {
    let n_us = n as usize;
    let rows = weights.len() + 1;
    if rows * n_us > DP_ENTRY_CAP {
        return Err(Error::InvalidInput(format!(
            "residue DP table {rows}x{n_us} exceeds cap"
        )));
    }
    let mut table = vec![vec![u16::MAX; n_us]; rows];
    table[weights.len()][0] = 0;
    for j in (0..weights.len()).rev() {
        let w = weights[j] as usize;
        for res in 0..n_us {
            let skip = table[j + 1][res];
            let prev = (res + n_us - w) % n_us;
            let take = table[j + 1][prev].saturating_add(1);
            table[j][res] = skip.min(take);
        }
    }
    Ok(table)
}

fn reconstruct(
    items: &[u64],
    weights: &[u64],
    n: u64,
    table: &[Vec<u16>],
    target: u64,
) -> Vec<usize> {
    let n_us = n as usize;
    let mut need = target as usize;
    let mut k = table[0][need];
    let mut chosen = Vec::new();
    let _ = items;
    for j in 0..weights.len() {
        if k == 0 {
            break;
        }
        // Including the smallest feasible item first yields the
        // lexicographically smallest list among minimal subsets.
        let prev = (need + n_us - weights[j] as usize) % n_us;
        if table[j + 1][prev].saturating_add(1) == k {
            chosen.push(j);
            need = prev;
            k -= 1;
        }
    }
    chosen
}

/// Subset of `pool` whose reciprocals sum to `target.residue` mod modulus.
/// Pool must be sorted ascending with every element coprime to the modulus.
pub fn find_prime_subset(pool: &[u64], target: ResidueTarget) -> Result<SubsetSelection> {
    let n = target.modulus;
    if target.residue == 0 {
        return Ok(SubsetSelection {
            chosen: Vec::new(),
            achieved: 0,
        });
    }
    let weights: Vec<u64> = pool
        .iter()
        .map(|&p| mod_inverse(p % n, n))
        .collect::<Result<_>>()?;
    let table = suffix_min_counts(&weights, n)?;
    if table[0][target.residue as usize] == u16::MAX {
        let reachable = table[0].iter().filter(|&&c| c != u16::MAX).count();
        return Err(Error::ResidueUnreachable {
            modulus: n,
            target: target.residue,
            pool_size: pool.len(),
            reachable,
        });
    }
    let idx = reconstruct(pool, &weights, n, &table, target.residue);
    let chosen: Vec<u64> = idx.iter().map(|&j| pool[j]).collect();
    let achieved = chosen
        .iter()
        .map(|&p| mod_inverse(p % n, n).unwrap() as u128)
        .sum::<u128>()
        % n as u128;
    debug_assert_eq!(achieved as u64, target.residue);
    Ok(SubsetSelection {
        chosen,
        achieved: achieved as u64,
    })
}

/// log(q) clamped away from zero; the raw formula degenerates for q < e.
fn log_q(q: u64) -> f64 {
    (q as f64).ln().max(1.0)
}

/// Smallest s above `N / (q log^{3+delta} q)` that is y-smooth and coprime
/// to q, scanning up to `cap`.
pub fn construct_s(
    sieve: &FactorSieve,
    q: PrimePower,
    n: u64,
    delta: f64,
    y: u64,
    cap: u64,
) -> Result<u64> {
    construct_s_from(sieve, q, n, delta, y, cap, 0)
}

fn construct_s_from(
    sieve: &FactorSieve,
    q: PrimePower,
    n: u64,
    delta: f64,
    y: u64,
    cap: u64,
    above: u64,
) -> Result<u64> {
    let qv = q.value();
    let threshold = n as f64 / (qv as f64 * log_q(qv).powf(3.0 + delta));
    let mut s = (threshold.floor() as u64 + 1).max(1).max(above + 1);
    while s <= cap {
        if s % q.p != 0 && sieve.is_smooth(s, y)? {
            return Ok(s);
        }
        s += 1;
    }
    Err(Error::NoSmoothCandidate {
        q: qv,
        threshold,
        cap,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct CorollaryConfig {
    pub delta: f64,
    /// Smoothness bound for s (and, with `strict_cofactors`, for the whole
    /// cofactor m_i = s * r_i); defaults to q - 1.
    pub smooth_bound: Option<u64>,
    /// Require the full cofactor m_i = s * r_i to be smooth. The interval
    /// cleanup descent needs this; the standalone selection does not.
    pub strict_cofactors: bool,
    /// How many successive s(q) candidates to try when the prime pool for
    /// the smallest one cannot reach the residue.
    pub s_retries: u32,
}

impl Default for CorollaryConfig {
    fn default() -> Self {
        Self {
            delta: 0.5,
            smooth_bound: None,
            strict_cofactors: false,
            s_retries: 1,
        }
    }
}

/// Builds denominators `n_i = q * s * r_i` in the open interval `(lo, hi)`
/// whose cofactors satisfy `sum 1/(s r_i) = target (mod q)`.
///
/// `banned` excludes denominators already removed by an outer caller.
pub fn corollary_select(
    sieve: &FactorSieve,
    q: PrimePower,
    target_residue: u64,
    lo: u64,
    hi: u64,
    cfg: &CorollaryConfig,
    banned: &BTreeSet<u64>,
) -> Result<CorollarySelection> {
    let qv = q.value();
    if target_residue >= qv {
        return Err(Error::InvalidInput(format!(
            "target residue {target_residue} not reduced mod {qv}"
        )));
    }
    if target_residue == 0 {
        return Ok(CorollarySelection {
            q,
            s: 1,
            primes: Vec::new(),
            denominators: Vec::new(),
        });
    }
    let y = cfg.smooth_bound.unwrap_or(qv - 1);
    let mut last_err = None;
    let mut s_floor = 0u64;
    for _ in 0..cfg.s_retries.max(1) {
        let s = match construct_s_from(sieve, q, lo, cfg.delta, y, hi, s_floor) {
            Ok(s) => s,
            Err(e) => {
                last_err = Some(e);
                break;
            }
        };
        s_floor = s;
        let qs = qv.saturating_mul(s);
        if qs == 0 || qs >= hi {
            last_err = Some(Error::NoSmoothCandidate {
                q: qv,
                threshold: lo as f64 / qs as f64,
                cap: hi,
            });
            break;
        }
        let pool: Vec<u64> = sieve
            .primes_in(lo as f64 / qs as f64, hi as f64 / qs as f64, qv)
            .into_iter()
            .filter(|&r| {
                let cofactor_ok = if cfg.strict_cofactors {
                    s.checked_mul(r).is_some_and(|m| {
                        m <= sieve.limit() && sieve.is_smooth(m, y).unwrap_or(false)
                    })
                } else {
                    true
                };
                cofactor_ok
                    && qs
                        .checked_mul(r)
                        .is_some_and(|d| d > lo && d < hi && !banned.contains(&d))
            })
            .collect();
        // sum 1/(s r_i) = target (mod q)  <=>  sum 1/r_i = s * target (mod q)
        let scaled = (s as u128 * target_residue as u128 % qv as u128) as u64;
        match find_prime_subset(&pool, ResidueTarget::new(qv, scaled)?) {
            Ok(sel) => {
                let denominators: Vec<u64> = sel.chosen.iter().map(|&r| qs * r).collect();
                return Ok(CorollarySelection {
                    q,
                    s,
                    primes: sel.chosen,
                    denominators,
                });
            }
            Err(e) => last_err = Some(e),
        }
        // The residue subset-sum only needs cofactors invertible mod q, not
        // prime ones. When the prime pool is too thin to reach the target,
        // retry with every cofactor r coprime to the base prime whose smooth
        // part s*r still stays strictly below q in prime-power terms.
        let wide: Vec<u64> = (1..=hi / qs)
            .filter(|&r| r % q.p != 0)
            .filter(|&r| {
                s.checked_mul(r).is_some_and(|m| {
                    m <= sieve.limit() && sieve.is_smooth(m, y).unwrap_or(false)
                })
            })
            .filter(|&r| {
                qs.checked_mul(r)
                    .is_some_and(|d| d > lo && d < hi && !banned.contains(&d))
            })
            .collect();
        if wide.len() > pool.len() {
            if let Ok(sel) = find_prime_subset(&wide, ResidueTarget::new(qv, scaled)?) {
                let denominators: Vec<u64> = sel.chosen.iter().map(|&r| qs * r).collect();
                return Ok(CorollarySelection {
                    q,
                    s,
                    primes: sel.chosen,
                    denominators,
                });
            }
        }
    }
    Err(last_err.unwrap_or(Error::Infeasible("corollary selection failed".into())))
}
