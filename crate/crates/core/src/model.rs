//! Queue parameters and the deterministic path identities.
//!
//! The embedded jump chain of the M/M/1-PS queue with arrival rate ρ and unit
//! service rate moves at rate 1+ρ. For a tagged customer the event count κ,
//! the residual occupancy ν, the arrival count α and the departure count δ
//! are tied together by
//!
//! ```text
//! alpha + delta = kappa - 1,      alpha - delta = nu - n0,
//! ```
//!
//! so (κ, ν) and (α, δ) are in bijection given n0.

use crate::error::Error;
use crate::Result;

/// Validated load together with the constants every module derives from it.
///
/// `support_bound` is the operator-norm bound 2√ρ/(1+ρ) of the substochastic
/// transition operator (the endpoint of the continuous spectrum), `z0` the
/// branch point (1+ρ)²/(4ρ) of the busy-period generating function, and
/// `decay_rate = -log z0` the common exponential decay rate of the delta and
/// b-tilde tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueParameters {
    rho: f64,
    support_bound: f64,
    z0: f64,
    decay_rate: f64,
}

impl QueueParameters {
    /// Validates the load and derives the spectral constants.
    pub fn new(rho: f64) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 || rho >= 1.0 {
            return Err(Error::InvalidLoad { value: rho });
        }
        let support_bound = 2.0 * rho.sqrt() / (1.0 + rho);
        let z0 = (1.0 + rho) * (1.0 + rho) / (4.0 * rho);
        Ok(Self {
            rho,
            support_bound,
            z0,
            decay_rate: -z0.ln(),
        })
    }

    /// Offered load ρ ∈ (0, 1).
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Spectral support endpoint 2√ρ/(1+ρ) < 1.
    pub fn support_bound(&self) -> f64 {
        self.support_bound
    }

    /// Branch point (1+ρ)²/(4ρ) > 1 of the busy-period root.
    pub fn z0(&self) -> f64 {
        self.z0
    }

    /// Common tail decay rate log(4ρ/(1+ρ)²) < 0.
    pub fn decay_rate(&self) -> f64 {
        self.decay_rate
    }

    /// Probability ρ/(1+ρ) that the next embedded event is an arrival.
    pub fn arrival_prob(&self) -> f64 {
        self.rho / (1.0 + self.rho)
    }

    /// Hilbert weight π_n = (n+1)ρⁿ making the transition operator
    /// self-adjoint.
    pub fn hilbert_weight(&self, n: usize) -> f64 {
        (n as f64 + 1.0) * self.rho.powi(n as i32)
    }
}

/// Validates a load value; alias for [`QueueParameters::new`].
pub fn validate_params(rho: f64) -> Result<QueueParameters> {
    QueueParameters::new(rho)
}

/// Truncation policy for the infinite sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationConfig {
    /// Target tail mass for truncated distributions.
    pub epsilon: f64,
    /// Hard cap on the outer summation index.
    pub n_cap: usize,
    /// Relative tolerance for tails of infinite series.
    pub series_tol: f64,
}

impl TruncationConfig {
    pub fn new(epsilon: f64, n_cap: usize, series_tol: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: format!("must be positive, got {epsilon}"),
            });
        }
        if n_cap == 0 {
            return Err(Error::InvalidParameter {
                name: "n_cap",
                reason: "must be at least 1".into(),
            });
        }
        if !(series_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "series_tol",
                reason: format!("must be positive, got {series_tol}"),
            });
        }
        Ok(Self {
            epsilon,
            n_cap,
            series_tol,
        })
    }

    /// Smallest N with stationary tail mass Σ_{n>N} (1-ρ)ρⁿ = ρ^{N+1} ≤ ε,
    /// clamped to `n_cap`.
    pub fn outer_range(&self, rho: f64) -> usize {
        let needed = (self.epsilon.ln() / rho.ln()).ceil();
        if !needed.is_finite() || needed < 1.0 {
            return 1;
        }
        (needed as usize).min(self.n_cap)
    }
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            n_cap: 200,
            series_tol: 1e-12,
        }
    }
}

/// Recovers (alpha, delta) from a path summary (n0, kappa, nu).
///
/// Rejects combinations that violate the parity or sign constraints of a
/// realizable path.
pub fn alpha_delta_from_path(n0: u64, kappa: u64, nu: u64) -> Result<(u64, u64)> {
    let fail = |reason| Error::InconsistentPath {
        n0,
        kappa,
        nu,
        reason,
    };
    if kappa < 1 {
        return Err(fail("kappa must be at least 1"));
    }
    // alpha = (kappa + nu - n0 - 1)/2, delta = (kappa - nu + n0 - 1)/2.
    let twice_alpha = (kappa + nu) as i64 - n0 as i64 - 1;
    let twice_delta = kappa as i64 - nu as i64 + n0 as i64 - 1;
    if twice_alpha < 0 || twice_delta < 0 {
        return Err(fail("event counts would be negative"));
    }
    if twice_alpha % 2 != 0 {
        return Err(fail("kappa + nu - n0 - 1 must be even"));
    }
    Ok((twice_alpha as u64 / 2, twice_delta as u64 / 2))
}

/// Inverse of [`alpha_delta_from_path`]: kappa = alpha + delta + 1,
/// nu = n0 + alpha - delta.
pub fn path_from_alpha_delta(n0: u64, alpha: u64, delta: u64) -> Result<(u64, u64)> {
    let kappa = alpha + delta + 1;
    let nu = n0 as i64 + alpha as i64 - delta as i64;
    if nu < 0 {
        return Err(Error::InconsistentPath {
            n0,
            kappa,
            nu: 0,
            reason: "delta exceeds n0 + alpha",
        });
    }
    Ok((kappa, nu as u64))
}
