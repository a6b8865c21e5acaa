//! Interval cleanup: remove denominators so that the residual fraction's
//! denominator has only small prime-power factors.
//!
//! First pass drops every term whose largest prime-power factor exceeds
//! `large_threshold`; then a descent over the remaining offending prime
//! powers `q` (largest first) removes corollary-selected denominators
//! `q*s*r_i` whose cofactor congruence cancels `q` from the residual.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::primes::{FactorSieve, PrimePower};
use crate::rational::{harmonic_sum, BigRat, HarmonicInterval};
use crate::residue::{corollary_select, mod_inverse, CorollaryConfig};

#[derive(Debug, Clone, serde::Serialize)]
pub struct CleanupStage {
    pub q: PrimePower,
    /// s(q) used for this stage; absent for skipped stages.
    pub s: Option<u64>,
    pub removed: Vec<u64>,
    /// True when q did not divide the residual denominator (no-op branch).
    pub skipped: bool,
    /// True when the congruence selection had no reachable subset and the
    /// stage fell back to removing every remaining multiple of q.
    pub fallback: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CleanupTrace {
    pub interval: HarmonicInterval,
    /// Convention marker: the paper's open ranges are normalized to this
    /// closed interval.
    pub convention: &'static str,
    pub small_bound: u64,
    pub large_threshold: u64,
    pub removed: Vec<u64>,
    pub stages: Vec<CleanupStage>,
    #[serde(serialize_with = "ser_rat")]
    pub residual: BigRat,
    #[serde(serialize_with = "ser_rat")]
    pub budget: BigRat,
    pub complete: bool,
    pub failure: Option<String>,
}

fn ser_rat<S: serde::Serializer>(r: &BigRat, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::rational::format_rational(r))
}

impl CleanupTrace {
    /// One line per stage, suitable for logs.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "interval [{}, {}] ({}) large_threshold={} small_bound={}\n",
            self.interval.lo, self.interval.hi, self.convention, self.large_threshold,
            self.small_bound
        ));
        out.push_str(&format!(
            "large-pp removals: {:?}\n",
            self.removed_at_large_stage()
        ));
        for st in &self.stages {
            if st.skipped {
                out.push_str(&format!("stage q={} skipped\n", st.q.value()));
            } else {
                out.push_str(&format!(
                    "stage q={} s={:?}{} removed {:?}\n",
                    st.q.value(),
                    st.s,
                    if st.fallback { " (fallback)" } else { "" },
                    st.removed
                ));
            }
        }
        out.push_str(&format!(
            "residual digits: {}/{} complete={}\n",
            self.residual.numer().to_string().len(),
            self.residual.denom().to_string().len(),
            self.complete
        ));
        out
    }

    fn removed_at_large_stage(&self) -> Vec<u64> {
        let staged: BTreeSet<u64> = self
            .stages
            .iter()
            .flat_map(|s| s.removed.iter().copied())
            .collect();
        self.removed
            .iter()
            .copied()
            .filter(|d| !staged.contains(d))
            .collect()
    }
}

/// All terms of the open interval `(n, cn)` whose largest prime-power factor
/// exceeds `threshold`, plus the exact residual sum of the kept terms.
pub fn remove_large_pp_terms(
    sieve: &FactorSieve,
    n: u64,
    c: f64,
    threshold: u64,
) -> Result<(Vec<u64>, BigRat)> {
    let interval = HarmonicInterval::open(n, c)?;
    remove_large_pp_in(sieve, interval, threshold)
}

pub fn remove_large_pp_in(
    sieve: &FactorSieve,
    interval: HarmonicInterval,
    threshold: u64,
) -> Result<(Vec<u64>, BigRat)> {
    if threshold < 2 {
        return Err(Error::InvalidInput("threshold must be >= 2".into()));
    }
    let mut removed = Vec::new();
    for d in interval.lo..=interval.hi {
        if sieve.largest_prime_power_factor(d)?.value() > threshold {
            removed.push(d);
        }
    }
    let excl: BTreeSet<u64> = removed.iter().copied().collect();
    let residual = harmonic_sum(interval, &excl);
    Ok((removed, residual))
}

/// Exact sum of `1/n` over `n in (N, cN]` counted once per exact prime-power
/// divisor above `threshold`, against the main term
/// `alpha log(c) loglog(N) / log(N)` with `alpha = (log N - log threshold)/loglog N`.
pub fn lemma2_sum(
    sieve: &FactorSieve,
    n: u64,
    c: f64,
    threshold: u64,
) -> Result<(BigRat, f64)> {
    let hi = (c * n as f64).floor() as u64;
    let mut terms = Vec::new();
    for m in n + 1..=hi {
        for pp in sieve.factorize(m)? {
            if pp.value() > threshold {
                terms.push(m);
            }
        }
    }
    let exact = crate::rational::reciprocal_sum(&terms);
    let ln_n = (n as f64).ln();
    let alpha = (ln_n - (threshold as f64).ln()) / ln_n.ln();
    let main_term = alpha * c.ln() * ln_n.ln() / ln_n;
    Ok((exact, main_term))
}

#[derive(Debug, Clone)]
pub struct CleanupConfig {
    pub delta: f64,
    pub s_retries: u32,
}

impl Default for CleanupConfig {
    fn default() -> Self {
        Self {
            delta: 0.5,
            s_retries: 24,
        }
    }
}

/// Prop-1 cleanup over the open interval `(n, cn)`.
pub fn cleanup(
    sieve: &FactorSieve,
    n: u64,
    c: f64,
    small_bound: u64,
    large_threshold: u64,
    cfg: &CleanupConfig,
) -> Result<CleanupTrace> {
    let interval = HarmonicInterval::open(n, c)?;
    cleanup_interval(sieve, interval, small_bound, large_threshold, cfg)
}

/// Cleanup over an explicit closed interval.
pub fn cleanup_interval(
    sieve: &FactorSieve,
    interval: HarmonicInterval,
    small_bound: u64,
    large_threshold: u64,
    cfg: &CleanupConfig,
) -> Result<CleanupTrace> {
    if small_bound < 2 || small_bound > large_threshold {
        return Err(Error::InvalidInput(format!(
            "need 2 <= small_bound <= large_threshold, got {small_bound}, {large_threshold}"
        )));
    }
    if interval.hi > sieve.limit() {
        return Err(Error::OutOfSieveRange {
            n: interval.hi,
            limit: sieve.limit(),
        });
    }
    let (mut removed_list, mut residual) =
        remove_large_pp_in(sieve, interval, large_threshold)?;
    let mut removed: BTreeSet<u64> = removed_list.iter().copied().collect();

    // Prime powers in (small_bound, large_threshold], largest first.
    let mut descent: Vec<PrimePower> = Vec::new();
    for p in sieve.primes() {
        if p > large_threshold {
            break;
        }
        let mut a = 1u32;
        while let Some(v) = p.checked_pow(a) {
            if v > large_threshold {
                break;
            }
            if v > small_bound {
                descent.push(PrimePower { p, a });
            }
            a += 1;
        }
    }
    descent.sort_by_key(|pp| std::cmp::Reverse(pp.value()));

    let divides = |residual: &BigRat, qv: u64| {
        (residual.denom().magnitude() % BigUint::from(qv)).is_zero()
    };

    // Worklist over the descent list: always re-attack the largest prime
    // power still dividing the residual denominator. A stage's removals can
    // resurrect a smaller-or-larger prime power that was already cleared by
    // cancellation, so a single descending pass is not enough; every applied
    // stage removes at least one term, which bounds the loop.
    let mut stages: Vec<CleanupStage> = Vec::new();
    let mut recorded_noop = vec![false; descent.len()];
    let mut failure = None;
    let mut i = 0;
    let mut guard = interval.len() as usize + descent.len() + 8;
    while i < descent.len() {
        guard -= 1;
        if guard == 0 {
            failure = Some("descent did not settle".into());
            break;
        }
        if !residual.is_zero() {
            if let Some(j) = (0..i).find(|&j| divides(&residual, descent[j].value())) {
                i = j;
            }
        }
        let q = descent[i];
        let qv = q.value();
        if residual.is_zero() || !divides(&residual, qv) {
            if !recorded_noop[i] {
                recorded_noop[i] = true;
                stages.push(CleanupStage {
                    q,
                    s: None,
                    removed: Vec::new(),
                    skipped: true,
                    fallback: false,
                });
            }
            i += 1;
            continue;
        }
        recorded_noop[i] = true;
        match run_stage(sieve, interval, q, &residual, cfg, &removed) {
            Ok(sel) => {
                for &d in &sel.denominators {
                    removed.insert(d);
                    removed_list.push(d);
                    residual -= crate::rational::unit(d);
                }
                // descent invariant: q must be gone from the denominator
                debug_assert!(
                    (residual.denom().magnitude() % BigUint::from(qv)) != BigUint::zero()
                );
                stages.push(CleanupStage {
                    q,
                    s: Some(sel.s),
                    removed: sel.denominators,
                    skipped: false,
                    fallback: false,
                });
            }
            Err(
                Error::NoSmoothCandidate { .. }
                | Error::ResidueUnreachable { .. }
                | Error::NotInvertible { .. },
            ) => {
                // Short intervals starve the congruence pool for large q;
                // dropping every remaining multiple of q preserves the
                // descent invariant at a higher budget cost.
                let multiples: Vec<u64> = (interval.lo..=interval.hi)
                    .filter(|d| d % qv == 0 && !removed.contains(d))
                    .collect();
                for &d in &multiples {
                    removed.insert(d);
                    removed_list.push(d);
                    residual -= crate::rational::unit(d);
                }
                debug_assert!(
                    (residual.denom().magnitude() % BigUint::from(qv)) != BigUint::zero()
                );
                stages.push(CleanupStage {
                    q,
                    s: None,
                    removed: multiples,
                    skipped: false,
                    fallback: true,
                });
            }
            Err(e) => {
                failure = Some(
                    Error::CleanupStage {
                        q: qv,
                        source: Box::new(e),
                    }
                    .to_string(),
                );
                break;
            }
        }
    }

    removed_list.sort_unstable();
    let budget = harmonic_sum(interval, &BTreeSet::new()) - residual.clone();
    let complete = failure.is_none();
    Ok(CleanupTrace {
        interval,
        convention: "closed [lo, hi]; open paper ranges normalized to [n+1, ceil(cn)-1]",
        small_bound,
        large_threshold,
        removed: removed_list,
        stages,
        residual,
        budget,
        complete,
        failure,
    })
}

fn run_stage(
    sieve: &FactorSieve,
    interval: HarmonicInterval,
    q: PrimePower,
    residual: &BigRat,
    cfg: &CleanupConfig,
    removed: &BTreeSet<u64>,
) -> Result<crate::residue::CorollarySelection> {
    let qv = q.value();
    let qb = BigUint::from(qv);
    let denom = residual.denom().magnitude();
    let cofactor = denom / &qb; // v = q * cofactor, q exactly divides v here
    let numer = residual.numer().magnitude();
    if residual.is_negative() {
        return Err(Error::Infeasible("negative residual in cleanup".into()));
    }
    // target = f * (v/q)^{-1} mod q, the residue the cofactor congruence
    // must hit so that q cancels from the residual denominator
    let f_mod = (numer % &qb).to_u64().unwrap();
    let g_mod = (&cofactor % &qb).to_u64().unwrap();
    let target = (f_mod as u128 * mod_inverse(g_mod, qv)? as u128 % qv as u128) as u64;
    let ccfg = CorollaryConfig {
        delta: cfg.delta,
        smooth_bound: Some(qv - 1),
        strict_cofactors: true,
        s_retries: cfg.s_retries,
    };
    corollary_select(
        sieve,
        q,
        target,
        interval.lo - 1,
        interval.hi + 1,
        &ccfg,
        removed,
    )
}
