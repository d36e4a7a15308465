//! Candidate-function machinery for the OCS-based algorithm.
//!
//! A candidate function for a given `d` is a non-decreasing tabulated
//! sequence `f(0..=L)` with `f(0) = 1` satisfying, for every `m` in
//! `1..=d-1` and every non-decreasing index sequence `l_1 <= ... <= l_m`,
//!
//! ```text
//!     1 + (f(l_1) + ... + f(l_m)) / (d - m)  >=  prod_i f(l_i + 1) / f(l_i).
//! ```
//!
//! Feasibility buys the per-server guarantee: a server of current degree
//! `l` is unmatched with probability at most `1/f(l)`, so maximizing `f`
//! maximizes the competitive ratio `1 - 1/f(k)`. The module provides the
//! pointwise-optimal function `f*` via its recurrence, two known feasible
//! families, an exhaustive feasibility checker, and the certified
//! lower-bound series `g_d` built from the one-dimensional minimization of
//! `alpha(x, t) = ((1 + x t)/(1 - t))^(1/t)`.

use crate::{Error, Result};

/// A tabulated candidate function.
///
/// `values[l]` is `f(l)` for `l` in `0..=levels`. When `top_infinite` is
/// set, the selection rule of the OCS engine treats the top level as having
/// infinite weight (the two-way semi-OCS mode for `d = 2`); the stored top
/// value stays finite so the feasibility checker always sees finite data.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateFunction {
    d: usize,
    values: Vec<f64>,
    top_infinite: bool,
}

impl CandidateFunction {
    pub fn new(d: usize, values: Vec<f64>, top_infinite: bool) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParam(format!("candidate function needs d >= 2, got {d}")));
        }
        if values.is_empty() || values[0] != 1.0 {
            return Err(Error::InvalidParam("candidate function needs f(0) = 1".into()));
        }
        for w in values.windows(2) {
            if !w[1].is_finite() || w[1] < w[0] {
                return Err(Error::InvalidParam(
                    "candidate values must be finite and non-decreasing".into(),
                ));
            }
        }
        Ok(CandidateFunction { d, values, top_infinite })
    }

    /// The degree bound the function was built for.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Top tabulated level `L`.
    pub fn levels(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, l: usize) -> f64 {
        self.values[l]
    }

    /// True when the engine must treat level `l` as infinite weight.
    pub fn is_infinite_level(&self, l: usize) -> bool {
        self.top_infinite && l == self.levels()
    }

    pub fn top_infinite(&self) -> bool {
        self.top_infinite
    }
}

/// The pointwise-optimal candidate function `f*`, tabulated to `levels`.
///
/// `f*(0) = 1` and `f*(l) = f*(l-1) * min_{1<=m<d} (1 + m f*(l-1)/(d-m))^(1/m)`;
/// each level scans all `m`, so the table costs `O(levels * d)`.
pub fn optimal_candidate(d: usize, levels: usize) -> Result<CandidateFunction> {
    if d < 2 {
        return Err(Error::InvalidParam(format!("optimal candidate needs d >= 2, got {d}")));
    }
    let mut values = Vec::with_capacity(levels + 1);
    values.push(1.0);
    for l in 1..=levels {
        let prev = values[l - 1];
        let mut best = f64::INFINITY;
        for m in 1..d {
            let ratio = (1.0 + m as f64 * prev / (d - m) as f64).powf(1.0 / m as f64);
            if ratio < best {
                best = ratio;
            }
        }
        let next = prev * best;
        if !next.is_finite() {
            return Err(Error::InvalidParam(format!(
                "f*_{d}({l}) exceeds the f64 range; the table stops at level {}",
                l - 1
            )));
        }
        values.push(next);
    }
    CandidateFunction::new(d, values, false)
}

/// The geometric candidate `f(l) = (d/(d-1))^l`.
pub fn geometric_candidate(d: usize, levels: usize) -> Result<CandidateFunction> {
    if d < 2 {
        return Err(Error::InvalidParam(format!("geometric candidate needs d >= 2, got {d}")));
    }
    let base = d as f64 / (d - 1) as f64;
    let values = (0..=levels).map(|l| base.powi(l as i32)).collect();
    CandidateFunction::new(d, values, false)
}

/// The cubic-exponent candidate `f(l) = exp(l/d + l^2/(2d^2) + 0.179 l^3/d^3)`.
pub fn ghhnyz_candidate(d: usize, levels: usize) -> Result<CandidateFunction> {
    if d < 2 {
        return Err(Error::InvalidParam(format!("ghhnyz candidate needs d >= 2, got {d}")));
    }
    let df = d as f64;
    let values = (0..=levels)
        .map(|l| {
            let x = l as f64;
            (x / df + x * x / (2.0 * df * df) + 0.179 * x * x * x / (df * df * df)).exp()
        })
        .collect();
    CandidateFunction::new(d, values, false)
}

/// The trivially feasible constant function `f ≡ 1`.
pub fn constant_candidate(d: usize, levels: usize) -> Result<CandidateFunction> {
    CandidateFunction::new(d, vec![1.0; levels + 1], false)
}

/// The two-way semi-OCS weights for `d = 2`: `f(l) = 2^(2^l - 1)` with the
/// top level treated as infinite by the engine. With `levels = 1` this is
/// the plain `f(0) = 1, f(1) = +inf` mode.
pub fn semi_ocs_candidate(levels: usize) -> Result<CandidateFunction> {
    let values = (0..=levels as u32)
        .map(|l| {
            let e = (2f64).powi(l as i32) - 1.0;
            (2f64).powf(e.min(1000.0))
        })
        .collect();
    CandidateFunction::new(2, values, true)
}

/// Verification mode for [`verify_candidate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    /// Only the all-equal sequences `(l, ..., l)` — necessary conditions.
    Fast,
    /// Every non-decreasing sequence with entries up to `l_max`.
    Exhaustive,
}

/// One violated feasibility constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintViolation {
    pub m: usize,
    pub sequence: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Cap on the largest exhaustive enumeration: `C(l_max + d - 1, d - 1)`.
pub const VERIFY_ENUM_CAP: u128 = 10_000_000;

/// Relative slack absorbing float rounding in constraints that hold with
/// equality at the optimum.
const VERIFY_SLACK: f64 = 1e-9;

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Checks the feasibility constraints for `f` with entries up to `l_max`.
///
/// Needs `f` tabulated to `l_max + 1` since constraints read `f(l_i + 1)`.
/// Each violation reports the constraint's `m`, the index sequence, and
/// both sides.
pub fn verify_candidate(
    f: &CandidateFunction,
    l_max: usize,
    mode: VerifyMode,
) -> Result<Vec<ConstraintViolation>> {
    if f.levels() < l_max + 1 {
        return Err(Error::TabulationTooShort { needed: l_max + 1, have: f.levels() });
    }
    let d = f.d();
    if mode == VerifyMode::Exhaustive {
        let worst = binomial((l_max + d - 1) as u128, (d - 1) as u128);
        if worst > VERIFY_ENUM_CAP {
            return Err(Error::BudgetExceeded(format!(
                "exhaustive verification would check C({}, {}) = {worst} sequences (cap {VERIFY_ENUM_CAP})",
                l_max + d - 1,
                d - 1
            )));
        }
    }
    let mut violations = Vec::new();
    let check = |seq: &[usize], violations: &mut Vec<ConstraintViolation>| {
        let m = seq.len();
        let lhs = 1.0 + seq.iter().map(|&l| f.value(l)).sum::<f64>() / (d - m) as f64;
        let rhs: f64 = seq.iter().map(|&l| f.value(l + 1) / f.value(l)).product();
        if rhs > lhs + VERIFY_SLACK * lhs.max(1.0) {
            violations.push(ConstraintViolation { m, sequence: seq.to_vec(), lhs, rhs });
        }
    };
    match mode {
        VerifyMode::Fast => {
            for m in 1..d {
                for l in 0..=l_max {
                    check(&vec![l; m], &mut violations);
                }
            }
        }
        VerifyMode::Exhaustive => {
            let mut seq = Vec::new();
            for m in 1..d {
                enumerate_nondecreasing(l_max, m, 0, &mut seq, &mut |s| check(s, &mut violations));
            }
        }
    }
    Ok(violations)
}

fn enumerate_nondecreasing(
    l_max: usize,
    remaining: usize,
    start: usize,
    seq: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if remaining == 0 {
        visit(seq);
        return;
    }
    for l in start..=l_max {
        seq.push(l);
        enumerate_nondecreasing(l_max, remaining - 1, l, seq, visit);
        seq.pop();
    }
}

/// `alpha(x, t) = ((1 + x t) / (1 - t))^(1/t)` for `t` in `(0, 1)`.
pub fn alpha(x: f64, t: f64) -> f64 {
    (((x * t).ln_1p() - (-t).ln_1p()) / t).exp()
}

/// Sign of `d/dt log alpha(x, t)`; `alpha` is log-convex in `t`, so the
/// sign changes at most once.
fn alpha_log_derivative_sign(x: f64, t: f64) -> f64 {
    let h = (x * t).ln_1p() - (-t).ln_1p();
    let hp = x / (1.0 + x * t) + 1.0 / (1.0 - t);
    t * hp - h
}

/// Parameters of the certified minimization of `alpha(x, .)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinAlphaParams {
    /// Width of the excluded edge intervals `(0, eps)` and `(1-eps, 1)`.
    pub eps_edge: f64,
    /// Binary-search stopping width on the middle interval.
    pub bs_precision: f64,
    /// Slack subtracted from the middle-interval value; justified by the
    /// derivative bound `1e9 * bs_precision < error_margin` for `x < 10`.
    pub error_margin: f64,
}

impl Default for MinAlphaParams {
    fn default() -> Self {
        MinAlphaParams { eps_edge: 1e-6, bs_precision: 1e-15, error_margin: 1e-6 }
    }
}

/// Certified minimum of `alpha(u, .)` over the middle interval
/// `[eps, 1-eps]`: a binary search on the derivative sign (valid by
/// log-convexity) brackets the minimizer to width `bs_precision`, the
/// right endpoint is evaluated, and `error_margin` is subtracted; the
/// derivative bound `1e9` (valid for `u < 10`) makes the result a true
/// lower bound of the interval minimum.
fn certified_interior_min(u: f64, params: &MinAlphaParams) -> f64 {
    let mut lo = params.eps_edge;
    let mut hi = 1.0 - params.eps_edge;
    let delta = if alpha_log_derivative_sign(u, lo) >= 0.0 {
        alpha(u, lo)
    } else if alpha_log_derivative_sign(u, hi) <= 0.0 {
        alpha(u, hi)
    } else {
        while hi - lo > params.bs_precision {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if alpha_log_derivative_sign(u, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        alpha(u, hi)
    };
    delta - params.error_margin
}

/// A certified lower bound on `min over t in (0,1)` of `alpha(x, t)`.
///
/// The interval splits into three parts. On `(0, eps)` the value is at
/// least `(1 + eps x)^(1/eps)`; on `(1-eps, 1)` it is at least `1e6`, which
/// dominates the first bound; the middle interval is handled by the
/// binary-search minimizer. The result never exceeds the true minimum.
/// Only valid for `x` in `[1, 10)`, where the derivative bound holds.
pub fn min_alpha_certified(x: f64, params: &MinAlphaParams) -> Result<f64> {
    if !(1.0..10.0).contains(&x) {
        return Err(Error::InvalidParam(format!(
            "certified minimization needs x in [1, 10), got {x}"
        )));
    }
    let eps = params.eps_edge;
    let edge = ((eps * x).ln_1p() / eps).exp();
    Ok(edge.min(certified_interior_min(x, params)))
}

/// A certified lower bound on `min over t in (0,1)` of
/// `(1 + x t / (1 - t))^(1/t)`, the growth factor the optimal-candidate
/// recurrence relaxes to under the substitution `t = m/d`. Valid for `x`
/// in `[1, 11)`.
///
/// Since `1 + x t/(1-t) = (1 + (x-1) t)/(1 - t)`, this is the minimum of
/// `alpha(x-1, .)`; the left-edge bound keeps the `1/(1-t)` factor as
/// `(1/(1-t))^(1/t) >= e`, which the plain edge bound of
/// [`min_alpha_certified`] drops.
fn min_growth_factor_certified(x: f64, params: &MinAlphaParams) -> f64 {
    let u = x - 1.0;
    let eps = params.eps_edge;
    let edge = std::f64::consts::E * ((eps * u).ln_1p() / eps).exp();
    edge.min(certified_interior_min(u, params))
}

/// The certified lower-bound series `g_d(0..=levels)` for `f*_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct GBoundSeries {
    pub d: usize,
    pub values: Vec<f64>,
    pub eps_edge: f64,
    pub bs_precision: f64,
    pub error_margin: f64,
    /// True iff every level's minimization ran the certified procedure
    /// with its input in `[1, 10)`.
    pub certified: bool,
}

/// Computes `g_d(l) = g_d(l-1) * m(g_d(l-1))^(1/d)` with `m(x)` the
/// certified minimum of `(1 + x t/(1-t))^(1/t)`, so that `g_d` really
/// lower-bounds `f*_d` level by level.
///
/// Levels whose input reaches 10 reuse the last certified minimizer value
/// as an uncertified heuristic and clear the `certified` flag.
pub fn g_bound(d: usize, levels: usize) -> Result<GBoundSeries> {
    g_bound_with(d, levels, &MinAlphaParams::default())
}

pub fn g_bound_with(d: usize, levels: usize, params: &MinAlphaParams) -> Result<GBoundSeries> {
    if d < 2 {
        return Err(Error::InvalidParam(format!("g bound needs d >= 2, got {d}")));
    }
    let mut values = Vec::with_capacity(levels + 1);
    values.push(1.0);
    let mut certified = true;
    let mut last_min = None;
    for l in 1..=levels {
        let x = values[l - 1];
        let m = if x < 10.0 {
            let m = min_growth_factor_certified(x, params);
            last_min = Some(m);
            m
        } else {
            certified = false;
            last_min.expect("first level always certifiable since g(0) = 1")
        };
        values.push(x * m.powf(1.0 / d as f64));
    }
    Ok(GBoundSeries {
        d,
        values,
        eps_edge: params.eps_edge,
        bs_precision: params.bs_precision,
        error_margin: params.error_margin,
        certified,
    })
}
