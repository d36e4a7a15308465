//! Closed-form competitive-ratio bounds and the comparison tables.

use crate::candidate::optimal_candidate;
use crate::{Error, Result};

/// RANKING upper bound on d-regular graphs from the general adversary:
/// `gamma(d) = 1 - (d-1)/(2d-1) * (1 - 1/d)^d`.
pub fn gamma(d: usize) -> f64 {
    assert!(d >= 2, "gamma needs d >= 2");
    let df = d as f64;
    1.0 - (df - 1.0) / (2.0 * df - 1.0) * (1.0 - 1.0 / df).powi(d as i32)
}

/// Upper bound on every randomized algorithm from the two-phase adversary.
///
/// `eta(d) = 1 - sum_{i > ceil(d/2)} (i - ceil(d/2))/d * C(d,i) p^(d-i) (1-p)^i`
/// with `p = floor(d/2)/d`. Binomials go through log-factorials so large
/// `d` does not overflow.
pub fn eta(d: usize) -> f64 {
    assert!(d >= 2, "eta needs d >= 2");
    let half_up = d.div_ceil(2);
    let p = (d / 2) as f64 / d as f64;
    let mut ln_fact = vec![0.0; d + 1];
    for i in 1..=d {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let mut loss = 0.0;
    for i in half_up + 1..=d {
        let ln_binom = ln_fact[d] - ln_fact[i] - ln_fact[d - i];
        let ln_term = ln_binom + (d - i) as f64 * p.ln() + i as f64 * (1.0 - p).ln();
        loss += (i - half_up) as f64 / d as f64 * ln_term.exp();
    }
    1.0 - loss
}

/// RANKING upper bound on (k,d)-bounded graphs:
/// `1 - (1 - 1/d)^k (d-1) / (k + d - 1)`. At `k = d` this is `gamma(d)`.
pub fn kd_ranking_ub(k: usize, d: usize) -> f64 {
    assert!(d >= 2 && k >= d, "kd ranking bound needs k >= d >= 2");
    let df = d as f64;
    1.0 - (1.0 - 1.0 / df).powi(k as i32) * (df - 1.0) / (k as f64 + df - 1.0)
}

/// OCS lower bound on (k,d)-bounded graphs: `1 - 1/f*_d(k)`.
///
/// For `d = 2` the framework is beaten by the optimal two-way semi-OCS,
/// whose per-server guarantee gives `1 - 2^-(2^k - 1)`; that convention is
/// what the comparison table's `d = 2` column uses.
pub fn kd_ocs_lb(k: usize, d: usize) -> Result<f64> {
    if d < 2 || k < d {
        return Err(Error::InvalidParam(format!(
            "kd ocs bound needs k >= d >= 2, got k = {k}, d = {d}"
        )));
    }
    if d == 2 {
        let exponent = (2f64).powi(k as i32) - 1.0;
        return Ok(1.0 - (-exponent * std::f64::consts::LN_2).exp());
    }
    let f = optimal_candidate(d, k)?;
    Ok(1.0 - 1.0 / f.value(k))
}

/// Rounds a lower bound down to 4 decimals, the safe display convention
/// for lower-bound tables.
pub fn floor4(x: f64) -> f64 {
    (x * 1e4 + 1e-9).floor() / 1e4
}

/// Rounds an upper bound up to 4 decimals, the safe display convention for
/// upper-bound tables.
pub fn ceil4(x: f64) -> f64 {
    (x * 1e4 - 1e-9).ceil() / 1e4
}

/// The d-th harmonic number by direct summation.
pub fn harmonic(d: usize) -> f64 {
    (1..=d).map(|i| 1.0 / i as f64).sum()
}

/// The marking-based ratio `1 - 2 sqrt(H_d / d)`, clamped at 0.
pub fn marking_ratio(d: usize) -> f64 {
    assert!(d >= 1);
    (1.0 - 2.0 * (harmonic(d) / d as f64).sqrt()).max(0.0)
}

/// The deterministic-optimal ratio `1 - (1 - 1/d)^k`, shared by High-Degree
/// and Random on (k,d)-bounded graphs.
pub fn high_degree_ratio(k: usize, d: usize) -> f64 {
    assert!(d >= 1);
    1.0 - (1.0 - 1.0 / d as f64).powi(k as i32)
}

/// Printed upper bounds for RANKING on the layered small-d instances; used
/// in place of `gamma(d)` for `d` in `2..=6` where they are stronger.
pub const SMALL_D_RANKING_UB: [(usize, f64); 5] =
    [(2, 0.8264), (3, 0.8251), (4, 0.8228), (5, 0.8223), (6, 0.8219)];

/// Best published RANKING upper bound for each d: the layered-instance
/// value for `d <= 6`, `gamma(d)` beyond.
pub fn ranking_ub(d: usize) -> f64 {
    for &(dd, v) in &SMALL_D_RANKING_UB {
        if dd == d {
            return v.min(gamma(d));
        }
    }
    gamma(d)
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRow {
    pub d: usize,
    pub k: usize,
    /// `1 - 1/f*_d(k)` (semi-OCS convention at d = 2).
    pub ocs_lb: f64,
    pub ranking_ub: f64,
    /// `1 - (1 - 1/d)^k`.
    pub high_degree: f64,
    /// `1 - 2 sqrt(H_d/d)` clamped at 0.
    pub marking_cw18: f64,
    /// `eta(d)` when `k = d`; no general bound applies for `k > d`, so 1.
    pub general_ub: f64,
}

/// The `(d,d)` row for one `d`.
pub fn bounds_row(d: usize) -> Result<BoundsRow> {
    Ok(BoundsRow {
        d,
        k: d,
        ocs_lb: kd_ocs_lb(d, d)?,
        ranking_ub: ranking_ub(d),
        high_degree: high_degree_ratio(d, d),
        marking_cw18: marking_ratio(d),
        general_ub: eta(d),
    })
}

/// A `(k,d)` row with `k > d`.
pub fn bounds_row_kd(k: usize, d: usize) -> Result<BoundsRow> {
    if k <= d {
        return Err(Error::InvalidParam(format!(
            "kd row needs k > d, got k = {k}, d = {d}"
        )));
    }
    Ok(BoundsRow {
        d,
        k,
        ocs_lb: kd_ocs_lb(k, d)?,
        ranking_ub: kd_ranking_ub(k, d),
        high_degree: high_degree_ratio(k, d),
        marking_cw18: marking_ratio(d),
        general_ub: 1.0,
    })
}

/// One row per d in `d_min..=d_max`.
pub fn bounds_table(d_min: usize, d_max: usize) -> Result<Vec<BoundsRow>> {
    if d_min < 2 || d_max < d_min {
        return Err(Error::InvalidParam(format!(
            "bounds table needs 2 <= d_min <= d_max, got {d_min}..{d_max}"
        )));
    }
    (d_min..=d_max).map(bounds_row).collect()
}
