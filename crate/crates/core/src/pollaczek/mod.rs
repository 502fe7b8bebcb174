//! Pollaczek polynomials, their generating functions, and the spectral
//! measure of the processor-sharing transition operator.
//!
//! The eigenvector recurrence of the substochastic operator,
//!
//! ```text
//! (n+1) rho f_{n+1} - (n+1)(1+rho) x f_n + n f_{n-1} = 0,
//! ```
//!
//! is solved by `Q_n(x) = rho^{-n/2} P_n((1+rho)x / (2 sqrt(rho)); 1, 0)`
//! where `P_n(x; a, b)` are the Pollaczek polynomials. The `Q_n` are
//! orthogonal with respect to the measure dψ supported on
//! `[-2 sqrt(rho)/(1+rho), 2 sqrt(rho)/(1+rho)]`, with Hilbert weights
//! `pi_n = (n+1) rho^n`.

mod measure;
mod table;

pub use measure::{
    measure_density_theta, QuadratureSpec, SpectralMeasure, DEFAULT_MASS_TOL,
};
pub use table::{
    build_coefficient_table, moment_cross_check, moments, CoefficientTable, MomentMethod,
    MAX_TABLE_ROWS,
};

use crate::error::Error;
use crate::model::QueueParameters;
use crate::Result;

/// Evaluates `Q_n(x)` by the forward three-term recurrence
/// (numerically stable on the oscillatory region).
pub fn eval_q(n: usize, x: f64, params: &QueueParameters) -> f64 {
    let rho = params.rho();
    let ratio = (1.0 + rho) / rho;
    let mut prev = 0.0f64; // Q_{-1}
    let mut cur = 1.0f64; // Q_0
    for m in 0..n {
        // Q_{m+1} = ratio * x * Q_m - m/((m+1) rho) * Q_{m-1}
        let next = ratio * x * cur - (m as f64 / ((m as f64 + 1.0) * rho)) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// All of `Q_0(x) .. Q_{n_max}(x)` in one recurrence sweep.
pub fn eval_q_upto(n_max: usize, x: f64, params: &QueueParameters) -> Vec<f64> {
    let rho = params.rho();
    let ratio = (1.0 + rho) / rho;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max == 0 {
        return out;
    }
    out.push(ratio * x);
    for m in 1..n_max {
        let next = ratio * x * out[m] - (m as f64 / ((m as f64 + 1.0) * rho)) * out[m - 1];
        out.push(next);
    }
    out
}

/// Evaluates the general Pollaczek polynomial `P_n(x; a, b)` with the
/// recurrence `(n+1) P_{n+1} = ((2n+1+a)x + b) P_n - n P_{n-1}`.
pub fn eval_pollaczek(n: usize, x: f64, a: f64, b: f64) -> f64 {
    let mut prev = 0.0f64;
    let mut cur = 1.0f64;
    for m in 0..n {
        let m_f = m as f64;
        let next = (((2.0 * m_f + 1.0 + a) * x + b) * cur - m_f * prev) / (m_f + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Generating function of `P_n(cos θ; 1, 0)`:
///
/// ```text
/// P(θ, z) = (1 - 2 z cos θ + z²)^{-1/2}
///           · exp( cot θ · arctan( z sin θ / (1 - z cos θ) ) ),
/// ```
///
/// with the limits `(1-z)^{-1} e^{z/(1-z)}` at θ = 0 and
/// `(1+z)^{-1} e^{-z/(1+z)}` at θ = π.
pub fn gen_p(theta: f64, z: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::ThetaRange { theta });
    }
    if theta == 0.0 {
        if z >= 1.0 {
            return Err(Error::Singularity {
                z,
                reason: "theta = 0 limit requires z < 1",
            });
        }
        return Ok((z / (1.0 - z)).exp() / (1.0 - z));
    }
    if theta == std::f64::consts::PI {
        if z <= -1.0 {
            return Err(Error::Singularity {
                z,
                reason: "theta = pi limit requires z > -1",
            });
        }
        return Ok((-z / (1.0 + z)).exp() / (1.0 + z));
    }
    if z.abs() >= 1.0 {
        return Err(Error::Divergence { z, radius: 1.0 });
    }
    let (sin_t, cos_t) = theta.sin_cos();
    let modulus_sq = 1.0 - 2.0 * z * cos_t + z * z;
    let phase = (z * sin_t).atan2(1.0 - z * cos_t);
    Ok(((cos_t / sin_t) * phase).exp() / modulus_sq.sqrt())
}

/// Generating function `Q(x; z) = Σ Q_n(x) zⁿ`, evaluated through the
/// closed form `P(θ, z/√ρ)` with `x = support_bound · cos θ`.
pub fn gen_q(x: f64, z: f64, params: &QueueParameters) -> Result<f64> {
    let sqrt_rho = params.rho().sqrt();
    if z.abs() >= sqrt_rho {
        return Err(Error::Divergence {
            z,
            radius: sqrt_rho,
        });
    }
    let s = params.support_bound();
    if x.abs() >= s {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: format!("must lie in the open support (-{s}, {s}), got {x}"),
        });
    }
    let theta = (x / s).acos();
    gen_p(theta, z / sqrt_rho)
}

/// Phase of `1 - √ρ e^{iθ}`: the continuous branch with
/// `1 - √ρ e^{iθ} = sqrt(1 + ρ - 2 √ρ cos θ) · e^{-i φ(θ)}`,
/// so `φ(0) = φ(π) = 0` and `φ ≥ 0` on `[0, π]`.
pub fn phi(theta: f64, params: &QueueParameters) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::ThetaRange { theta });
    }
    let sqrt_rho = params.rho().sqrt();
    let (sin_t, cos_t) = theta.sin_cos();
    Ok((sqrt_rho * sin_t).atan2(1.0 - sqrt_rho * cos_t))
}
