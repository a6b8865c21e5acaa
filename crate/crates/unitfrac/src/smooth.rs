//! Prime-power-smooth integers in `[M, hi]` and exact reciprocal subset sums.
//!
//! The exponential-sum count is replaced as the primary mechanism by an
//! exact convolution: every member divides `P = lcm(1..=y)`, so a subset's
//! reciprocal sum equals `a/b` iff the integer weights `P/m_j` sum to
//! `aP/b`. The float `A(h)` evaluation is kept as a diagnostic mirroring
//! the analytic proof.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::primes::{lcm_up_to, FactorSieve};
use crate::rational::{rational_to_f64, unit, BigRat};

#[derive(Debug, Clone, serde::Serialize)]
pub struct SmoothInterval {
    pub m: u64,
    pub hi: u64,
    pub y: u64,
    pub members: Vec<u64>,
    #[serde(skip)]
    pub p_lcm: BigUint,
}

impl SmoothInterval {
    /// Builds the interval from an explicit member list (instance files).
    pub fn from_members(m: u64, hi: u64, y: u64, members: Vec<u64>) -> Self {
        Self {
            m,
            hi,
            y,
            members,
            p_lcm: lcm_up_to(y),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn reciprocal_sum(&self) -> BigRat {
        crate::rational::reciprocal_sum(&self.members)
    }

    /// Plain-text instance form: header "M hi y", one member per line.
    pub fn render_instance(&self) -> String {
        let mut out = format!("{} {} {}\n", self.m, self.hi, self.y);
        for m in &self.members {
            out.push_str(&format!("{m}\n"));
        }
        out
    }

    pub fn parse_instance(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty instance file".into()))?;
        let parts: Vec<u64> = header
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::InvalidInput(format!("bad instance header {header:?}")))
            })
            .collect::<Result<_>>()?;
        let [m, hi, y] = parts[..] else {
            return Err(Error::InvalidInput(format!(
                "instance header needs 'M hi y', got {header:?}"
            )));
        };
        let mut members = Vec::new();
        for l in lines {
            members.push(
                l.trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad member line {l:?}")))?,
            );
        }
        members.sort_unstable();
        Ok(Self::from_members(m, hi, y, members))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    ExactConvolution,
    FloatExponential,
    BruteForce,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RepresentationCount {
    pub count: u128,
    pub method: CountMethod,
    pub l: usize,
    pub p_digits: usize,
}

/// All prime-power-smooth integers in `[m, hi]`.
pub fn enumerate_smooth(sieve: &FactorSieve, m: u64, hi: u64, y: u64) -> Result<SmoothInterval> {
    if m > hi {
        return Err(Error::InvalidInput(format!("need M <= hi ({m} > {hi})")));
    }
    let mut members = Vec::new();
    for n in m..=hi {
        if sieve.is_smooth(n, y)? {
            members.push(n);
        }
    }
    Ok(SmoothInterval::from_members(m, hi, y, members))
}

/// Smallest `hi >= lo` at which the smooth reciprocal sum over `[lo, hi]`
/// first reaches `2 * ab`, scanning up to `cap`.
pub fn select_cm(sieve: &FactorSieve, lo: u64, ab: &BigRat, y: u64, cap: u64) -> Result<u64> {
    if !ab.is_positive() {
        return Err(Error::InvalidInput("select_cm target must be positive".into()));
    }
    let goal = ab * BigRat::from_integer(2.into());
    let mut sum = BigRat::zero();
    for n in lo..=cap.min(sieve.limit()) {
        if sieve.is_smooth(n, y)? {
            sum += unit(n);
            if sum >= goal {
                return Ok(n);
            }
        }
    }
    Err(Error::SmoothSumInfeasible { cap })
}

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub node_budget: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            node_budget: 20_000_000,
        }
    }
}

/// Depth-first branch-and-bound for a subset of members whose reciprocals
/// sum exactly to `ab`. Members are explored in increasing order (largest
/// reciprocal first, the classic greedy direction), pruned by suffix sums
/// and by divisibility of the target by the gcd of the remaining weights.
/// First solution in canonical order is returned, so the result is
/// deterministic.
pub fn solve_reciprocal_subset(
    si: &SmoothInterval,
    ab: &BigRat,
    cfg: &SearchConfig,
) -> Result<Vec<u64>> {
    if ab.is_zero() {
        return Ok(Vec::new());
    }
    if !ab.is_positive() {
        return Err(Error::InvalidInput("target must be nonnegative".into()));
    }
    // Integerize over L = lcm(members): weight(m) = L/m, target = ab * L.
    let mut l = BigUint::one();
    for &m in &si.members {
        let m = BigUint::from(m);
        let g = num_integer::Integer::gcd(&l, &m);
        l = l / g * m;
    }
    let target_rat = ab * BigRat::from_integer(l.clone().into());
    if !target_rat.denom().is_one() {
        return Err(Error::TargetNotSmooth {
            denom: ab.denom().to_string(),
        });
    }
    let target = target_rat.numer().magnitude().clone();

    let mut asc = si.members.clone();
    asc.sort_unstable();
    let weights: Vec<BigUint> = asc.iter().map(|&m| &l / BigUint::from(m)).collect();
    let mut suffix = vec![BigUint::zero(); weights.len() + 1];
    let mut suffix_gcd = vec![BigUint::zero(); weights.len() + 1];
    for i in (0..weights.len()).rev() {
        suffix[i] = &suffix[i + 1] + &weights[i];
        suffix_gcd[i] = num_integer::Integer::gcd(&suffix_gcd[i + 1], &weights[i]);
    }
    if target > suffix[0] {
        return Err(Error::NoSubset {
            members: si.members.len(),
        });
    }

    let mut chosen: Vec<u64> = Vec::new();
    let mut nodes = 0u64;
    let found = dfs(
        &asc,
        &weights,
        &suffix,
        &suffix_gcd,
        0,
        target,
        &mut chosen,
        &mut nodes,
        cfg.node_budget,
    )?;
    if !found {
        return Err(Error::NoSubset {
            members: si.members.len(),
        });
    }
    chosen.sort_unstable();
    // hard assert: the result re-sums exactly to the target
    let check: BigRat = chosen.iter().map(|&m| unit(m)).sum();
    assert_eq!(&check, ab, "subset re-summation mismatch");
    Ok(chosen)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    members: &[u64],
    weights: &[BigUint],
    suffix: &[BigUint],
    suffix_gcd: &[BigUint],
    i: usize,
    target: BigUint,
    chosen: &mut Vec<u64>,
    nodes: &mut u64,
    budget: u64,
) -> Result<bool> {
    if target.is_zero() {
        return Ok(true);
    }
    *nodes += 1;
    if *nodes > budget {
        return Err(Error::BudgetExceeded { budget });
    }
    if i >= members.len() || target > suffix[i] {
        return Ok(false);
    }
    // every reachable remainder is a multiple of the remaining gcd
    if !(&target % &suffix_gcd[i]).is_zero() {
        return Ok(false);
    }
    if weights[i] <= target {
        chosen.push(members[i]);
        let rest = &target - &weights[i];
        if dfs(
            members, weights, suffix, suffix_gcd, i + 1, rest, chosen, nodes, budget,
        )? {
            return Ok(true);
        }
        chosen.pop();
    }
    dfs(
        members, weights, suffix, suffix_gcd, i + 1, target, chosen, nodes, budget,
    )
}

const CONVOLUTION_CAP: u64 = 100_000_000;

/// Exact count of subsets with reciprocal sum `ab`, by convolution of the
/// indicator polynomial over integer weight sums. Requires every prime-power
/// factor of the target denominator to be at most y (so that b | P).
pub fn count_representations(
    si: &SmoothInterval,
    ab: &BigRat,
    cap: Option<u64>,
) -> Result<RepresentationCount> {
    let cap = cap.unwrap_or(CONVOLUTION_CAP);
    let p = &si.p_lcm;
    let p_digits = p.to_string().len();
    if ab.is_negative() {
        return Ok(RepresentationCount {
            count: 0,
            method: CountMethod::ExactConvolution,
            l: si.len(),
            p_digits,
        });
    }
    for &m in &si.members {
        if (p % BigUint::from(m)) != BigUint::zero() {
            return Err(Error::InvalidInput(format!(
                "member {m} does not divide P = lcm(1..={})",
                si.y
            )));
        }
    }
    let target_rat = ab * BigRat::from_integer(p.clone().into());
    if !target_rat.denom().is_one() {
        return Err(Error::TargetNotSmooth {
            denom: ab.denom().to_string(),
        });
    }
    let p64 = p.to_u64().ok_or(Error::ConvolutionCapExceeded {
        needed: u128::MAX,
        cap,
    })?;
    if p64 > cap {
        return Err(Error::ConvolutionCapExceeded {
            needed: p64 as u128,
            cap,
        });
    }
    let weights: Vec<u64> = si.members.iter().map(|&m| p64 / m).collect();
    let target = match target_rat.numer().magnitude().to_u64() {
        Some(t) => t,
        None => {
            // heavier than any reachable sum
            return Ok(RepresentationCount {
                count: 0,
                method: CountMethod::ExactConvolution,
                l: si.len(),
                p_digits,
            });
        }
    };

    // Sparse DP over exact integer sums; states bounded by 2^l and by the
    // total weight.
    let mut dp: HashMap<u64, u128> = HashMap::new();
    dp.insert(0, 1);
    for &w in &weights {
        let snapshot: Vec<(u64, u128)> = dp.iter().map(|(&k, &v)| (k, v)).collect();
        for (k, v) in snapshot {
            let nk = k + w;
            if nk <= target {
                *dp.entry(nk).or_insert(0) += v;
            }
            if dp.len() as u64 > cap {
                return Err(Error::ConvolutionCapExceeded {
                    needed: dp.len() as u128,
                    cap,
                });
            }
        }
    }
    let count = dp.get(&target).copied().unwrap_or(0);
    Ok(RepresentationCount {
        count,
        method: CountMethod::ExactConvolution,
        l: si.len(),
        p_digits,
    })
}

/// Brute-force subset enumeration; the oracle for the convolution count.
pub fn count_bruteforce(si: &SmoothInterval, ab: &BigRat) -> Result<RepresentationCount> {
    let l = si.len();
    if l > 25 {
        return Err(Error::InvalidInput(format!(
            "brute force limited to 25 members, got {l}"
        )));
    }
    let mut count: u128 = 0;
    for mask in 0u64..(1 << l) {
        let mut sum = BigRat::zero();
        for (j, &m) in si.members.iter().enumerate() {
            if mask >> j & 1 == 1 {
                sum += unit(m);
            }
        }
        if &sum == ab {
            count += 1;
        }
    }
    Ok(RepresentationCount {
        count,
        method: CountMethod::BruteForce,
        l,
        p_digits: si.p_lcm.to_string().len(),
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundDiagnostics {
    pub l: usize,
    /// |A(0)| which must equal 2^l.
    pub a0: f64,
    pub two_pow_l: f64,
    /// min over integer |h| < M/2 of Re(e(-ah/b) A(h)).
    pub min_re_small_h: f64,
    /// max over sampled M/2 <= |h| <= P/2 of |A(h)| / 2^l.
    pub max_ratio_large_h: f64,
    pub samples: u64,
}

fn a_of_h(members: &[u64], h: f64) -> (f64, f64) {
    let mut re = 1.0f64;
    let mut im = 0.0f64;
    for &m in members {
        let theta = 2.0 * std::f64::consts::PI * (h / m as f64);
        let (s, c) = theta.sin_cos();
        let (fr, fi) = (1.0 + c, s);
        let (nr, ni) = (re * fr - im * fi, re * fi + im * fr);
        re = nr;
        im = ni;
    }
    (re, im)
}

/// Float evaluation of the exponential-sum ingredients: nonnegativity of
/// `Re(e(-ah/b) A(h))` for small h and decay of `|A(h)|` at sampled large h.
pub fn bound_diagnostics(si: &SmoothInterval, ab: &BigRat, samples: u64) -> BoundDiagnostics {
    let l = si.len();
    let two_pow_l = 2f64.powi(l as i32);
    let ab_f = rational_to_f64(ab);

    let (a0, _) = a_of_h(&si.members, 0.0);
    let mut min_re = f64::INFINITY;
    let half_m = (si.m as i64) / 2;
    for h in -(half_m.max(0))..=half_m.max(0) {
        if si.m as i64 <= 2 * h.abs() && h != 0 {
            continue; // strict |h| < M/2
        }
        let (ar, ai) = a_of_h(&si.members, h as f64);
        let theta = -2.0 * std::f64::consts::PI * ab_f * h as f64;
        let re = ar * theta.cos() - ai * theta.sin();
        min_re = min_re.min(re);
    }

    let p_f = si.p_lcm.to_f64().unwrap_or(f64::MAX);
    let lo = si.m as f64 / 2.0;
    let hi = (p_f / 2.0).min(1e15);
    let mut max_ratio = 0.0f64;
    let n = samples.max(1);
    for k in 0..n {
        let h = if hi > lo {
            lo + (hi - lo) * (k as f64 + 0.5) / n as f64
        } else {
            lo
        };
        let h = h.round();
        let (ar, ai) = a_of_h(&si.members, h);
        max_ratio = max_ratio.max(ar.hypot(ai) / two_pow_l);
    }
    BoundDiagnostics {
        l,
        a0,
        two_pow_l,
        min_re_small_h: min_re,
        max_ratio_large_h: max_ratio,
        samples: n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma4Outcome {
    Case1,
    Case2,
    Violation,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Lemma4Report {
    pub m: u64,
    pub y: u64,
    pub h: f64,
    pub outcome: Lemma4Outcome,
    pub members: usize,
    pub non_dividing: usize,
    pub needed_for_case1: u64,
}

fn divides_integer_in(m: f64, lo: f64, hi: f64) -> bool {
    // multiple k*m strictly inside (lo, hi) for some integer k
    let k_hi = (hi / m).ceil() - 1.0;
    k_hi * m > lo
}

/// Lemma-4 dichotomy at desk scale: with `I = (h - M^{3/4}, h + M^{3/4})`,
/// either many short-interval smooth members divide no integer of I, or
/// some integer of I is divisible by `lcm(1..=floor(M^{1/4-eps}))`.
pub fn lemma4_check(
    sieve: &FactorSieve,
    m: u64,
    h: f64,
    epsilon: f64,
    kappa: f64,
) -> Result<Lemma4Report> {
    if !(0.0 < epsilon && epsilon < 0.125) {
        return Err(Error::InvalidInput("lemma4 needs 0 < epsilon < 1/8".into()));
    }
    let y = (m as f64).powf(0.25 - epsilon).floor().max(2.0) as u64;
    let hi = ((1.0 + 1.0 / (m as f64).ln()) * m as f64).floor() as u64;
    let si = enumerate_smooth(sieve, m, hi, y)?;
    let b = (m as f64).powf(0.75);
    let (lo_i, hi_i) = (h - b, h + b);
    let non_dividing = si
        .members
        .iter()
        .filter(|&&mem| !divides_integer_in(mem as f64, lo_i, hi_i))
        .count();
    let needed = (kappa * b).ceil() as u64;
    let outcome = if non_dividing as u64 >= needed {
        Lemma4Outcome::Case1
    } else {
        let p = lcm_up_to(y).to_f64().unwrap_or(f64::MAX);
        if divides_integer_in(p, lo_i, hi_i) {
            Lemma4Outcome::Case2
        } else {
            Lemma4Outcome::Violation
        }
    };
    Ok(Lemma4Report {
        m,
        y,
        h,
        outcome,
        members: si.len(),
        non_dividing,
        needed_for_case1: needed,
    })
}
