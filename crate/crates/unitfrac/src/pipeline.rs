//! End-to-end construction: find `M`, clean up the interval `[N, M]`, and
//! close the remaining gap `a/b` with smooth denominators above `M`.
//!
//! Every stage works in exact rationals; `decompose` re-verifies its own
//! output before returning (hard gate).

use std::collections::BTreeSet;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cleanup::{cleanup_interval, CleanupConfig, CleanupTrace};
use crate::error::{Error, Result};
use crate::primes::FactorSieve;
use crate::rational::{
    find_m, format_rational, harmonic_sum, rational_to_f64, unit, BigRat, HarmonicInterval,
};
use crate::smooth::{enumerate_smooth, select_cm, solve_reciprocal_subset, SearchConfig};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Largest prime power allowed to survive the cleanup removal pass;
    /// defaults to a scale-dependent heuristic near 2M/log M.
    pub large_threshold: Option<u64>,
    /// Descent floor; the default of 10 keeps the residual denominator
    /// 10-smooth so the gap stage can work at a small smoothness bound.
    pub small_bound: Option<u64>,
    /// Smoothness bound for the gap-filling stage; the default covers the
    /// residual denominator automatically.
    pub smooth_y: Option<u64>,
    /// Infeasibility cap: no denominator beyond max_ratio * N.
    pub max_ratio: f64,
    pub node_budget: u64,
    pub widen_attempts: u32,
    pub s_retries: u32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0 / 6.0,
            delta: 0.5,
            large_threshold: None,
            small_bound: None,
            smooth_y: None,
            max_ratio: 1000.0,
            node_budget: 2_000_000,
            widen_attempts: 5,
            s_retries: 24,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Decomposition {
    #[serde(serialize_with = "ser_rat")]
    pub r: BigRat,
    pub n: u64,
    pub m: u64,
    pub terms: Vec<u64>,
    pub k: usize,
    pub max_term: u64,
    /// x_k / N.
    pub ratio: f64,
    /// ratio / e^r - 1, the excess over the asymptotic floor.
    pub excess: f64,
    pub interval_terms: usize,
    pub smooth_terms: usize,
    pub smooth_y: u64,
    #[serde(skip)]
    pub cleanup: CleanupTrace,
}

fn ser_rat<S: serde::Serializer>(r: &BigRat, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

impl Decomposition {
    pub fn render_text(&self) -> String {
        let mut out = format!(
            "r = {} with N = {}: k = {} terms, max = {}, ratio = {:.4}\n",
            format_rational(&self.r),
            self.n,
            self.k,
            self.max_term,
            self.ratio
        );
        out.push_str(&format!(
            "interval stage [N, {}]: {} terms; smooth stage: {} terms (y = {})\n",
            self.m, self.interval_terms, self.smooth_terms, self.smooth_y
        ));
        out.push_str("terms: ");
        out.push_str(
            &self
                .terms
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        );
        out.push('\n');
        out
    }
}

fn default_large_threshold(m: u64) -> u64 {
    let t = (2.0 * m as f64 / (m as f64).ln().max(1.0)).floor() as u64;
    t.max(2)
}

pub fn decompose(
    sieve: &FactorSieve,
    r: &BigRat,
    n: u64,
    cfg: &PipelineConfig,
) -> Result<Decomposition> {
    if !r.is_positive() {
        return Err(Error::InvalidInput("r must be positive".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput("N must be at least 2".into()));
    }
    if !(0.0 < cfg.epsilon && cfg.epsilon < 0.25) {
        return Err(Error::InvalidInput("need 0 < epsilon < 1/4".into()));
    }
    let m = find_m(r, n)?;
    if m > sieve.limit() {
        return Err(Error::OutOfSieveRange {
            n: m,
            limit: sieve.limit(),
        });
    }
    let interval = HarmonicInterval::new(n, m)?;

    let large_threshold = cfg.large_threshold.unwrap_or_else(|| default_large_threshold(m));
    let small_bound = cfg
        .small_bound
        .unwrap_or_else(|| 10.min(large_threshold))
        .min(large_threshold);
    let ccfg = CleanupConfig {
        delta: cfg.delta,
        s_retries: cfg.s_retries,
    };
    let trace = cleanup_interval(sieve, interval, small_bound.max(2), large_threshold, &ccfg)?;
    if !trace.complete {
        return Err(Error::Infeasible(format!(
            "cleanup did not complete: {}",
            trace.failure.as_deref().unwrap_or("unknown")
        )));
    }

    let removed: BTreeSet<u64> = trace.removed.iter().copied().collect();
    let mut kept: Vec<u64> = (interval.lo..=interval.hi)
        .filter(|d| !removed.contains(d))
        .collect();
    let mut residual = trace.residual.clone();

    // find_M guarantees the full interval sum overshoots r by at most 1/M,
    // so dropping the largest kept term always rebalances below r.
    while &residual > r {
        let d = kept
            .pop()
            .ok_or_else(|| Error::Infeasible("interval emptied while rebalancing".into()))?;
        residual -= unit(d);
    }
    let ab = r - &residual;
    debug_assert!(!ab.is_negative());

    let mut terms = kept;
    let mut smooth_count = 0usize;
    let mut y = small_bound.max(2);
    if !ab.is_zero() {
        let mut y0 = 2;
        for pp in sieve.factorize_big(ab.denom().magnitude())? {
            y0 = y0.max(pp.value());
        }
        y0 = y0.max(cfg.smooth_y.unwrap_or(0)).max(10);

        let cap = ((cfg.max_ratio * n as f64) as u64)
            .min(sieve.limit())
            .max(m + 2);
        let lo = m + 1;
        let scfg = SearchConfig {
            node_budget: cfg.node_budget,
        };
        // If the exact target is unreachable at the covering smoothness
        // bound, raise y (more members, more mass) before giving up; within
        // each y, widen hi geometrically.
        let mut solved = None;
        let mut last_err: Option<Error> = None;
        y = y0;
        'search: while y <= y0.saturating_mul(8).max(64) {
            let mut hi = match select_cm(sieve, lo, &ab, y, cap) {
                Ok(h) => h,
                Err(Error::SmoothSumInfeasible { .. }) => cap,
                Err(e) => return Err(e),
            };
            for _ in 0..cfg.widen_attempts.max(1) {
                let si = enumerate_smooth(sieve, lo, hi, y)?;
                match solve_reciprocal_subset(&si, &ab, &scfg) {
                    Ok(subset) => {
                        solved = Some(subset);
                        break 'search;
                    }
                    Err(
                        e @ (Error::NoSubset { .. }
                        | Error::TargetNotSmooth { .. }
                        | Error::BudgetExceeded { .. }),
                    ) => {
                        last_err = Some(e);
                    }
                    Err(e) => return Err(e),
                }
                if hi >= cap {
                    break;
                }
                hi = hi.saturating_mul(2).min(cap);
            }
            y = (y * 3 / 2).max(y + 1);
        }
        let subset = solved.ok_or_else(|| {
            Error::Infeasible(format!(
                "smooth stage exhausted (hi cap {cap}, y up to {y}): {}",
                last_err
                    .map(|e| e.to_string())
                    .unwrap_or_else(|| "no attempt".into())
            ))
        })?;
        smooth_count = subset.len();
        terms.extend(subset);
    }

    terms.sort_unstable();
    let k = terms.len();
    let max_term = *terms
        .last()
        .ok_or_else(|| Error::Infeasible("empty decomposition".into()))?;
    let ratio = max_term as f64 / n as f64;
    let d = Decomposition {
        r: r.clone(),
        n,
        m,
        interval_terms: k - smooth_count,
        smooth_terms: smooth_count,
        smooth_y: y,
        terms,
        k,
        max_term,
        ratio,
        excess: ratio / rational_to_f64(r).exp() - 1.0,
        cleanup: trace,
    };
    // hard verification gate
    let report = verify(r, n, &d.terms, None);
    if !report.ok {
        return Err(Error::Infeasible(format!(
            "internal verification failed: {:?}",
            report.errors
        )));
    }
    Ok(d)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub sum_matches: bool,
    pub distinct: bool,
    pub in_range: bool,
    #[serde(serialize_with = "ser_rat")]
    pub sum: BigRat,
    pub k: usize,
    pub max_term: u64,
    pub ratio: f64,
    pub excess: f64,
    pub errors: Vec<String>,
}

pub fn verify(r: &BigRat, n: u64, terms: &[u64], max_ratio: Option<f64>) -> VerifyReport {
    let mut errors = Vec::new();
    let sum: BigRat = terms.iter().map(|&t| unit(t)).sum();
    let sum_matches = &sum == r;
    if !sum_matches {
        errors.push(format!(
            "sum {} differs from target {}",
            format_rational(&sum),
            format_rational(r)
        ));
    }
    let distinct = terms.windows(2).all(|w| w[0] < w[1]) && !terms.is_empty();
    if !distinct {
        errors.push("terms not strictly increasing (duplicate or unsorted)".into());
    }
    let max_term = terms.iter().copied().max().unwrap_or(0);
    let min_term = terms.iter().copied().min().unwrap_or(0);
    let mut in_range = min_term >= n && terms.iter().all(|&t| t >= 2);
    if !in_range {
        errors.push(format!("smallest term {min_term} below N = {n}"));
    }
    let ratio = if n > 0 { max_term as f64 / n as f64 } else { f64::NAN };
    if let Some(cap) = max_ratio {
        if ratio > cap {
            in_range = false;
            errors.push(format!("ratio {ratio:.3} above cap {cap}"));
        }
    }
    VerifyReport {
        ok: errors.is_empty(),
        sum_matches,
        distinct,
        in_range,
        sum,
        k: terms.len(),
        max_term,
        ratio,
        excess: ratio / rational_to_f64(r).exp() - 1.0,
        errors,
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TightnessReport {
    pub largest_prime: u64,
    pub x_k: u64,
    pub bound: f64,
    /// p * log(x_k) / x_k, the raw quantity compared against slack.
    pub raw: f64,
    pub passes: bool,
}

/// The largest prime dividing any term must stay below
/// `slack * x_k / log(x_k)`.
pub fn tightness_check(sieve: &FactorSieve, terms: &[u64], slack: f64) -> Result<TightnessReport> {
    if terms.is_empty() {
        return Err(Error::InvalidInput("tightness_check needs terms".into()));
    }
    if slack < 1.0 {
        return Err(Error::InvalidInput("slack must be >= 1".into()));
    }
    let x_k = *terms.iter().max().unwrap();
    let mut largest_prime = 1u64;
    for &t in terms {
        for pp in sieve.factorize(t)? {
            largest_prime = largest_prime.max(pp.p);
        }
    }
    let log_xk = (x_k as f64).ln().max(f64::MIN_POSITIVE);
    let bound = slack * x_k as f64 / log_xk;
    Ok(TightnessReport {
        largest_prime,
        x_k,
        bound,
        raw: largest_prime as f64 * log_xk / x_k as f64,
        passes: (largest_prime as f64) <= bound,
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MinRatioResult {
    pub ratio: f64,
    pub witness: Vec<u64>,
}

/// Exhaustive minimum of `x_k / x_1` over subsets of `[n, x_max]` with
/// reciprocal sum `r`. Oracle-grade: exact integer weights over an lcm.
pub fn min_ratio_bruteforce(r: &BigRat, n: u64, x_max: u64) -> Result<MinRatioResult> {
    if !r.is_positive() || n < 2 || x_max < n {
        return Err(Error::InvalidInput(
            "need r > 0, N >= 2, x_max >= N".into(),
        ));
    }
    if x_max - n > 60 {
        return Err(Error::InvalidInput(
            "brute force limited to x_max - N <= 60".into(),
        ));
    }
    let mut best: Option<(f64, Vec<u64>)> = None;
    for lo in n..=x_max {
        if let Some((best_ratio, _)) = &best {
            if lo as f64 / lo as f64 >= *best_ratio && *best_ratio <= 1.0 {
                break;
            }
        }
        for hi in lo..=x_max {
            let ratio = hi as f64 / lo as f64;
            if let Some((best_ratio, _)) = &best {
                if ratio >= *best_ratio {
                    continue;
                }
            }
            if let Some(w) = subset_with_endpoints(r, lo, hi)? {
                best = Some((ratio, w));
                break; // larger hi at this lo only worsens the ratio
            }
        }
    }
    let (ratio, witness) = best.ok_or_else(|| {
        Error::Infeasible(format!("no subset of [{n}, {x_max}] sums to {}", format_rational(r)))
    })?;
    Ok(MinRatioResult { ratio, witness })
}

/// Subset of [lo, hi] containing both endpoints with reciprocal sum r.
fn subset_with_endpoints(r: &BigRat, lo: u64, hi: u64) -> Result<Option<Vec<u64>>> {
    let mut l: u128 = 1;
    for d in lo..=hi {
        let g = num_integer::Integer::gcd(&l, &(d as u128));
        l = (l / g)
            .checked_mul(d as u128)
            .ok_or_else(|| Error::InvalidInput("lcm overflow; shrink x_max".into()))?;
    }
    let target_rat = r * BigRat::from_integer(l.into());
    if !target_rat.denom().is_one() {
        return Ok(None);
    }
    let Some(target) = target_rat.numer().magnitude().to_u128() else {
        return Ok(None);
    };
    let members: Vec<u64> = (lo..=hi).collect();
    let weights: Vec<u128> = members.iter().map(|&d| l / d as u128).collect();
    let mut suffix = vec![0u128; weights.len() + 1];
    for i in (0..weights.len()).rev() {
        suffix[i] = suffix[i + 1] + weights[i];
    }
    // both endpoints are mandatory when lo < hi
    let mut mandatory = weights[0];
    if hi > lo {
        mandatory += weights[weights.len() - 1];
    }
    if mandatory > target {
        return Ok(None);
    }
    let inner_target = target - mandatory;
    let inner = if hi > lo { &members[1..members.len() - 1] } else { &members[0..0] };
    let inner_w = if hi > lo { &weights[1..weights.len() - 1] } else { &weights[0..0] };
    let mut chosen = Vec::new();
    if dfs_u128(inner, inner_w, inner_target, 0, &mut chosen) {
        let mut out = vec![lo];
        out.extend(chosen);
        if hi > lo {
            out.push(hi);
        }
        out.sort_unstable();
        return Ok(Some(out));
    }
    Ok(None)
}

fn dfs_u128(members: &[u64], weights: &[u128], target: u128, i: usize, chosen: &mut Vec<u64>) -> bool {
    if target == 0 {
        return true;
    }
    if i >= members.len() {
        return false;
    }
    let rest: u128 = weights[i..].iter().sum();
    if target > rest {
        return false;
    }
    if weights[i] <= target {
        chosen.push(members[i]);
        if dfs_u128(members, weights, target - weights[i], i + 1, chosen) {
            return true;
        }
        chosen.pop();
    }
    dfs_u128(members, weights, target, i + 1, chosen)
}

/// The three-stage recomposition identity:
/// `harmonic_sum([N, M]) - budget + smooth-stage sum = r` with the ceded
/// rebalance terms folded into the budget.
pub fn recomposition_holds(d: &Decomposition) -> bool {
    let interval = HarmonicInterval::new(d.n, d.m).unwrap();
    let full = harmonic_sum(interval, &BTreeSet::new());
    let kept: BigRat = d
        .terms
        .iter()
        .filter(|&&t| t <= d.m)
        .map(|&t| unit(t))
        .sum();
    let smooth: BigRat = d
        .terms
        .iter()
        .filter(|&&t| t > d.m)
        .map(|&t| unit(t))
        .sum();
    let budget = full - kept;
    let interval_sum = harmonic_sum(interval, &BTreeSet::new());
    interval_sum - budget + smooth == d.r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn sieve() -> FactorSieve {
        FactorSieve::new(200_000)
    }

    #[test]
    fn decompose_unit_at_two() {
        let s = sieve();
        let d = decompose(&s, &rat(1, 1), 2, &PipelineConfig::default()).unwrap();
        let sum: BigRat = d.terms.iter().map(|&t| unit(t)).sum();
        assert_eq!(sum, rat(1, 1));
        assert!(d.terms[0] >= 2);
        assert!(recomposition_holds(&d));
    }

    #[test]
    fn decompose_half_at_ten() {
        let s = sieve();
        let d = decompose(&s, &rat(1, 2), 10, &PipelineConfig::default()).unwrap();
        let sum: BigRat = d.terms.iter().map(|&t| unit(t)).sum();
        assert_eq!(sum, rat(1, 2));
        assert!(d.terms.iter().all(|&t| t >= 10));
        assert!(d.terms.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn decompose_exact_interval_sum() {
        let s = sieve();
        let interval = HarmonicInterval::new(10, 20).unwrap();
        let r = harmonic_sum(interval, &std::collections::BTreeSet::new());
        let mut cfg = PipelineConfig::default();
        cfg.large_threshold = Some(19); // keep every term
        cfg.small_bound = Some(19); // and skip the descent entirely
        let d = decompose(&s, &r, 10, &cfg).unwrap();
        assert_eq!(d.terms, (10..=20).collect::<Vec<_>>());
        assert_eq!(d.smooth_terms, 0);
    }

    #[test]
    fn verify_examples() {
        assert!(verify(&rat(1, 1), 2, &[2, 3, 6], None).ok);
        let bad = verify(&rat(1, 1), 2, &[2, 3], None);
        assert!(!bad.ok && !bad.sum_matches);
        let dup = verify(&rat(1, 1), 2, &[2, 2, 3], None);
        assert!(!dup.ok && !dup.distinct);
    }

    #[test]
    fn tightness_examples() {
        let s = sieve();
        let rep = tightness_check(&s, &[2, 3, 6], 1.0).unwrap();
        assert_eq!(rep.largest_prime, 3);
        assert!((rep.x_k as f64 / (rep.x_k as f64).ln() - 3.35).abs() < 0.01);
        assert!(rep.passes);
        // a bare prime fails, as it must
        let rep = tightness_check(&s, &[101], 2.0).unwrap();
        assert!(!rep.passes);
    }

    #[test]
    fn min_ratio_examples() {
        let res = min_ratio_bruteforce(&rat(1, 1), 2, 12).unwrap();
        assert_eq!(res.witness, vec![2, 3, 6]);
        assert!((res.ratio - 3.0).abs() < 1e-12);
        let res = min_ratio_bruteforce(&rat(1, 7), 7, 7).unwrap();
        assert_eq!(res.witness, vec![7]);
        assert_eq!(res.ratio, 1.0);
        assert!(min_ratio_bruteforce(&rat(5, 1), 2, 10).is_err());
    }

    #[test]
    fn min_ratio_trivial_bound() {
        for n in [2u64, 3, 4] {
            let res = min_ratio_bruteforce(&rat(1, 1), n, n + 40).unwrap();
            assert!(res.ratio >= std::f64::consts::E, "N={n}: {}", res.ratio);
        }
    }

    #[test]
    fn decompose_grid_mostly_succeeds() {
        let s = sieve();
        let targets = [rat(1, 1), rat(1, 2), rat(2, 3), rat(3, 4)];
        let mut ok = 0;
        let mut total = 0;
        for r in &targets {
            for n in 2..=20u64 {
                total += 1;
                if decompose(&s, r, n, &PipelineConfig::default()).is_ok() {
                    ok += 1;
                }
            }
        }
        assert!(
            ok * 10 >= total * 8,
            "only {ok}/{total} grid cells succeeded"
        );
    }
}
