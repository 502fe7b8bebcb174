//! Closed-form tail asymptotics and decay-rate diagnostics.
//!
//! All three tails share the exponential factor
//! `(2√ρ/(1+ρ))^{2j} = z0^{-j}` exactly; they differ in the algebraic and
//! stretched-exponential corrections:
//!
//! ```text
//! P(δ=j)  ~  4/(1-ρ) · e^{2(1+ρ)/(1-ρ)} · √((8/3)(π/2)^{5/3})
//!            · j^{-5/6} e^{-3(π/2)^{2/3} j^{1/3}} z0^{-j}
//! P(b=j)  ~  (1+ρ)/(ρ(1-ρ)√π) · j^{-3/2} z0^{-j}
//! P(b̃=j)  ~  4(1+ρ)/((1-ρ)³√π) · j^{-5/2} z0^{-j}
//! ```
//!
//! and the moments obey
//! `μ_n ~ 2e (2√ρ/(1+ρ))^n n^{-5/6} √(8π^{5/3}/3) e^{-π^{2/3} n^{1/3}}`.
//! Everything is evaluated in log-space; the prefactor exponent
//! 2(1+ρ)/(1-ρ) alone overflows a naive product near saturation.

use std::f64::consts::PI;

use crate::error::Error;
use crate::model::QueueParameters;
use crate::pmf::Pmf;
use crate::Result;

/// One row of an exact-versus-asymptote comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticReport {
    pub index: usize,
    pub exact: f64,
    pub asymptote: f64,
    /// exact / asymptote.
    pub ratio: f64,
    /// Local log-slope of the exact table, log p_{j+1} - log p_j.
    pub log_gap_per_index: f64,
}

/// log of the subexponential factor r(j) of the delta tail.
pub fn log_delta_r(params: &QueueParameters, j: usize) -> f64 {
    let j_f = j as f64;
    -(5.0 / 6.0) * j_f.ln() - 3.0 * (PI / 2.0).powf(2.0 / 3.0) * j_f.cbrt()
        + 2.0 * j_f * params.support_bound().ln()
}

/// log P(δ=j) along the asymptote.
pub fn log_delta_asymptote(params: &QueueParameters, j: usize) -> f64 {
    let rho = params.rho();
    let prefactor = (4.0 / (1.0 - rho)).ln()
        + 2.0 * (1.0 + rho) / (1.0 - rho)
        + 0.5 * ((8.0 / 3.0).ln() + (5.0 / 3.0) * (PI / 2.0).ln());
    prefactor + log_delta_r(params, j)
}

/// Tail asymptote of the common alpha/delta distribution.
pub fn delta_asymptote(params: &QueueParameters, j: usize) -> f64 {
    log_delta_asymptote(params, j).exp()
}

/// Asymptote of the even moments of dψ; odd indices are identically zero
/// and rejected.
pub fn moment_asymptote(params: &QueueParameters, n: usize) -> Result<f64> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("moment asymptote defined for even n >= 2, got {n}"),
        });
    }
    let n_f = n as f64;
    let log = 2f64.ln() + 1.0 + n_f * params.support_bound().ln() - (5.0 / 6.0) * n_f.ln()
        + 0.5 * ((8.0 / 3.0).ln() + (5.0 / 3.0) * PI.ln())
        - PI.powf(2.0 / 3.0) * n_f.cbrt();
    Ok(log.exp())
}

/// log P(b=j) along the Darboux asymptote of the residual busy period.
pub fn log_b_asymptote(params: &QueueParameters, j: usize) -> f64 {
    let rho = params.rho();
    let j_f = j as f64;
    ((1.0 + rho) / (rho * (1.0 - rho))).ln() - 0.5 * PI.ln() - 1.5 * j_f.ln()
        + 2.0 * j_f * params.support_bound().ln()
}

pub fn b_asymptote(params: &QueueParameters, j: usize) -> f64 {
    log_b_asymptote(params, j).exp()
}

/// log P(b̃=j) along its tail asymptote.
pub fn log_btilde_asymptote(params: &QueueParameters, j: usize) -> f64 {
    let rho = params.rho();
    let j_f = j as f64;
    (4.0 * (1.0 + rho)).ln() - 3.0 * (1.0 - rho).ln() - 0.5 * PI.ln() - 2.5 * j_f.ln()
        - j_f * params.z0().ln()
}

pub fn btilde_asymptote(params: &QueueParameters, j: usize) -> f64 {
    log_btilde_asymptote(params, j).exp()
}

/// Exact-versus-asymptote rows for a pmf over `window`, with the pmf's
/// local log-slope attached.
pub fn asymptote_report(
    pmf: &Pmf,
    asymptote: impl Fn(usize) -> f64,
    window: std::ops::RangeInclusive<usize>,
) -> Result<Vec<AsymptoticReport>> {
    let (lo, hi) = (*window.start(), *window.end());
    if hi > pmf.max_index() {
        return Err(Error::Capacity {
            requested: hi,
            capacity: pmf.max_index(),
        });
    }
    let mut rows = Vec::with_capacity(hi - lo + 1);
    for j in lo..=hi {
        let exact = pmf.prob(j);
        let asym = asymptote(j);
        let next = pmf.prob(j + 1);
        let log_gap = if next > 0.0 && exact > 0.0 {
            (next / exact).ln()
        } else {
            f64::NAN
        };
        rows.push(AsymptoticReport {
            index: j,
            exact,
            asymptote: asym,
            ratio: exact / asym,
            log_gap_per_index: log_gap,
        });
    }
    Ok(rows)
}

/// Per-index decay comparison of the delta and b-tilde tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub index: usize,
    pub p_delta: f64,
    pub p_btilde: f64,
    /// P(δ=j) / P(b̃=j).
    pub ratio: f64,
    pub slope_delta: f64,
    pub slope_btilde: f64,
}

/// Result of [`decay_diagnostics`].
#[derive(Debug, Clone, PartialEq)]
pub struct DecayDiagnostics {
    pub rows: Vec<DecayRow>,
    /// The shared theoretical rate log(4ρ/(1+ρ)²).
    pub decay_rate: f64,
    /// Whether P(δ=j)/P(b̃=j) decreases strictly across the window.
    pub ratio_strictly_decreasing: bool,
}

/// Compares the two tails over `window`: local log-slopes (forward
/// difference, backward at the last index) and the δ/b̃ ratio sequence.
pub fn decay_diagnostics(
    delta: &Pmf,
    btilde: &Pmf,
    params: &QueueParameters,
    window: std::ops::RangeInclusive<usize>,
) -> Result<DecayDiagnostics> {
    let (lo, hi) = (*window.start(), *window.end());
    if hi < lo + 2 {
        return Err(Error::DiagnosticsWindow(format!(
            "need at least 3 indices, got [{lo}, {hi}]"
        )));
    }
    if hi + 1 > delta.max_index() || hi + 1 > btilde.max_index() {
        return Err(Error::DiagnosticsWindow(format!(
            "window end {hi}+1 beyond table range ({}, {})",
            delta.max_index(),
            btilde.max_index()
        )));
    }
    const UNDERFLOW: f64 = 1e-290;
    for j in lo..=hi + 1 {
        if delta.prob(j) < UNDERFLOW || btilde.prob(j) < UNDERFLOW {
            return Err(Error::DiagnosticsWindow(format!(
                "entries at j={j} below usable magnitude"
            )));
        }
    }
    let slope = |pmf: &Pmf, j: usize| -> f64 {
        if j < hi {
            (pmf.prob(j + 1) / pmf.prob(j)).ln()
        } else {
            (pmf.prob(j) / pmf.prob(j - 1)).ln()
        }
    };
    let mut rows = Vec::with_capacity(hi - lo + 1);
    let mut decreasing = true;
    let mut prev_ratio = f64::INFINITY;
    for j in lo..=hi {
        let p_delta = delta.prob(j);
        let p_btilde = btilde.prob(j);
        let ratio = p_delta / p_btilde;
        if ratio >= prev_ratio {
            decreasing = false;
        }
        prev_ratio = ratio;
        rows.push(DecayRow {
            index: j,
            p_delta,
            p_btilde,
            ratio,
            slope_delta: slope(delta, j),
            slope_btilde: slope(btilde, j),
        });
    }
    Ok(DecayDiagnostics {
        rows,
        decay_rate: params.decay_rate(),
        ratio_strictly_decreasing: decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(rho: f64) -> QueueParameters {
        QueueParameters::new(rho).unwrap()
    }

    #[test]
    fn log_r_assembles_from_components() {
        // Direct assembly at rho = 0.5, j = 8.
        let p = params(0.5);
        let expected = -(5.0 / 6.0) * 8f64.ln() - 3.0 * (PI / 2.0).powf(2.0 / 3.0) * 2.0
            + 16.0 * p.support_bound().ln();
        assert_relative_eq!(log_delta_r(&p, 8), expected, max_relative = 1e-14);
    }

    #[test]
    fn log_space_matches_direct_product_where_it_fits() {
        for rho in [0.2, 0.5, 0.6] {
            let p = params(rho);
            let s = p.support_bound();
            for j in [1usize, 5, 12, 30] {
                let j_f = j as f64;
                let direct = 4.0 / (1.0 - rho)
                    * (2.0 * (1.0 + rho) / (1.0 - rho)).exp()
                    * ((8.0 / 3.0) * (PI / 2.0).powf(5.0 / 3.0)).sqrt()
                    * j_f.powf(-5.0 / 6.0)
                    * (-3.0 * (PI / 2.0).powf(2.0 / 3.0) * j_f.cbrt()).exp()
                    * s.powi(2 * j as i32);
                assert_relative_eq!(delta_asymptote(&p, j), direct, max_relative = 1e-12);

                let direct_b = (1.0 + rho) / (rho * (1.0 - rho) * PI.sqrt())
                    * j_f.powf(-1.5)
                    * s.powi(2 * j as i32);
                assert_relative_eq!(b_asymptote(&p, j), direct_b, max_relative = 1e-12);

                let direct_bt = 4.0 * (1.0 + rho) / ((1.0 - rho).powi(3) * PI.sqrt())
                    * j_f.powf(-2.5)
                    * p.z0().powi(-(j as i32));
                assert_relative_eq!(btilde_asymptote(&p, j), direct_bt, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn all_three_tails_share_the_exponential_factor() {
        // (2√ρ/(1+ρ))^{2j} = z0^{-j}: the log-asymptote differences over j
        // must all equal the decay rate up to algebraic corrections.
        for rho in [0.2, 0.5, 0.8] {
            let p = params(rho);
            assert_relative_eq!(
                2.0 * p.support_bound().ln(),
                -p.z0().ln(),
                max_relative = 1e-13
            );
            let j = 1000usize;
            for logf in [
                log_delta_asymptote(&p, 2 * j) - log_delta_asymptote(&p, j),
                log_b_asymptote(&p, 2 * j) - log_b_asymptote(&p, j),
                log_btilde_asymptote(&p, 2 * j) - log_btilde_asymptote(&p, j),
            ] {
                // Dominated by j * decay_rate for large j.
                let per_index = logf / j as f64;
                assert_abs_diff_eq!(per_index, p.decay_rate(), epsilon = 0.05);
            }
        }
    }

    #[test]
    fn moment_asymptote_respects_support_and_parity() {
        let p = params(0.5);
        assert!(moment_asymptote(&p, 3).is_err());
        assert!(moment_asymptote(&p, 0).is_err());
        let s = p.support_bound();
        for n in [10usize, 40, 80] {
            let a = moment_asymptote(&p, n).unwrap();
            assert!(a > 0.0);
            assert!(a < s.powi(n as i32) * 10.0);
        }
    }

    #[test]
    fn delta_asymptote_decay_per_index_approaches_rate() {
        let p = params(0.5);
        let j = 4000usize;
        let gap = log_delta_asymptote(&p, j + 1) - log_delta_asymptote(&p, j);
        assert_abs_diff_eq!(gap, p.decay_rate(), epsilon = 2e-3);
    }

    #[test]
    fn diagnostics_reject_short_or_underflowing_windows() {
        let p = params(0.5);
        let pmf_a = Pmf::new(0, vec![0.5, 0.25, 0.125, 0.0625, 0.03125], 0.03125).unwrap();
        let pmf_b = pmf_a.clone();
        assert!(decay_diagnostics(&pmf_a, &pmf_b, &p, 0..=1).is_err());
        assert!(decay_diagnostics(&pmf_a, &pmf_b, &p, 0..=4).is_err()); // needs j+1
        let d = decay_diagnostics(&pmf_a, &pmf_b, &p, 0..=3).unwrap();
        assert_eq!(d.rows.len(), 4);
        // Identical tables: the ratio is constant, not strictly decreasing.
        assert!(!d.ratio_strictly_decreasing);
        // Geometric halving: every slope is -ln 2.
        for row in &d.rows {
            assert_abs_diff_eq!(row.slope_delta, -(2f64.ln()), epsilon = 1e-12);
        }
    }

    #[test]
    fn asymptote_report_rows_carry_ratios() {
        let p = params(0.5);
        let probs: Vec<f64> = (0..10).map(|j| delta_asymptote(&p, j + 1)).collect();
        let pmf = Pmf::new(1, probs, 0.0).unwrap();
        let rows = asymptote_report(&pmf, |j| delta_asymptote(&p, j), 1..=9).unwrap();
        for row in &rows {
            assert_relative_eq!(row.ratio, 1.0, max_relative = 1e-12);
        }
        assert!(asymptote_report(&pmf, |j| delta_asymptote(&p, j), 1..=11).is_err());
    }
}
