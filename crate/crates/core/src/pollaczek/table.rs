//! Triangular coefficient table of the Q polynomials and the moment
//! sequence of dψ, computed in extended precision.
//!
//! Writing `Q_n(x) = Σ_k l_{n,k} x^k`, the recurrence gives
//!
//! ```text
//! l_{n,k} = (1+ρ)/ρ · l_{n-1,k-1} · 1{1 ≤ k ≤ n}
//!         - (n-1)/(nρ) · l_{n-2,k} · 1{0 ≤ k ≤ n-2},
//! ```
//!
//! with `l_{0,0} = 1`, `l_{1,1} = (1+ρ)/ρ`, `l_{1,0} = 0`, and the moments
//! follow from `∫ Q_n dψ = 0` (n ≥ 1):
//!
//! ```text
//! μ_n = -(1/l_{n,n}) Σ_{k<n} l_{n,k} μ_k,        μ_0 = 1.
//! ```
//!
//! Both recursions alternate in sign with coefficients growing like
//! ((1+ρ)/ρ)ⁿ while the moments shrink below support_boundⁿ, so everything
//! here runs in fixed-point scalars whose resolution is sized to the table
//! and doubled until the recursion moments agree with an independent
//! quadrature.

use crate::error::Error;
use crate::extprec::{ExtCtx, ExtReal};
use crate::model::QueueParameters;
use crate::pollaczek::measure::{QuadratureSpec, SpectralMeasure};
use crate::Result;

/// Hard cap on stored coefficient rows.
pub const MAX_TABLE_ROWS: usize = 4096;

/// Escalation attempts before giving up on the moment cross-check.
const MAX_ESCALATIONS: u32 = 3;

/// Cross-check tolerances: strict for the low moments, relative-only beyond.
const STRICT_RANGE: usize = 40;
const STRICT_REL_TOL: f64 = 1e-10;
const LOOSE_REL_TOL: f64 = 1e-8;

/// Coefficients `l_{n,k}` for rows `0..=2·n_max` and moments
/// `μ_0..μ_{2·n_max}`, in extended precision with f64 views.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    rho: f64,
    n_max: usize,
    ctx: ExtCtx,
    coeffs: Vec<Vec<ExtReal>>,
    moments: Vec<ExtReal>,
    moments_f64: Vec<f64>,
}

impl CoefficientTable {
    /// Builds rows `0..=2·n_max` at an automatically sized precision,
    /// without the quadrature cross-check.
    pub fn build(params: &QueueParameters, n_max: usize) -> Result<Self> {
        let scale = auto_scale_bits(params, n_max);
        Self::build_with_precision(params, n_max, scale)
    }

    /// Builds and escalates precision (doubling the scale) until the
    /// recursion moments agree with quadrature moments from an internal
    /// refined rule.
    pub fn build_checked(params: &QueueParameters, n_max: usize) -> Result<Self> {
        let check_measure = SpectralMeasure::build(
            params,
            QuadratureSpec {
                panels: 96,
                order: 24,
                theta_min: 4e-3,
            },
        )?;
        let mut scale = auto_scale_bits(params, n_max);
        let mut last_err = None;
        for _ in 0..=MAX_ESCALATIONS {
            let table = Self::build_with_precision(params, n_max, scale)?;
            match moment_cross_check(&table, &check_measure, 2 * n_max) {
                Ok(()) => return Ok(table),
                Err(e) => last_err = Some(e),
            }
            scale *= 2;
        }
        Err(last_err.expect("escalation loop ran at least once"))
    }

    /// Builds rows `0..=2·n_max` at an explicit fixed-point scale.
    pub fn build_with_precision(
        params: &QueueParameters,
        n_max: usize,
        scale_bits: u32,
    ) -> Result<Self> {
        let rows = 2 * n_max;
        if rows + 1 > MAX_TABLE_ROWS {
            return Err(Error::Capacity {
                requested: rows,
                capacity: MAX_TABLE_ROWS - 1,
            });
        }
        let rho = params.rho();
        let ctx = ExtCtx::new(scale_bits);
        let rho_ext = ctx.from_f64(rho);
        let ratio = ctx.div(&ctx.from_f64(1.0).add(&rho_ext), &rho_ext);

        let mut coeffs: Vec<Vec<ExtReal>> = Vec::with_capacity(rows + 1);
        coeffs.push(vec![ctx.from_f64(1.0)]);
        if rows >= 1 {
            coeffs.push(vec![ctx.zero(), ratio.clone()]);
        }
        for n in 2..=rows {
            let mut row = vec![ctx.zero(); n + 1];
            // (n-1)/(n rho)
            let damp = ctx.div(
                &ctx.from_f64((n - 1) as f64),
                &ctx.mul(&ctx.from_f64(n as f64), &rho_ext),
            );
            let mut k = n % 2; // parity: l_{n,k} = 0 for n-k odd
            while k <= n {
                let mut v = ctx.zero();
                if k >= 1 {
                    v = ctx.mul(&ratio, &coeffs[n - 1][k - 1]);
                }
                if k <= n - 2 {
                    v = v.sub(&ctx.mul(&damp, &coeffs[n - 2][k]));
                }
                row[k] = v;
                k += 2;
            }
            coeffs.push(row);
        }

        let mut moments: Vec<ExtReal> = Vec::with_capacity(rows + 1);
        moments.push(ctx.from_f64(1.0));
        for n in 1..=rows {
            if n % 2 == 1 {
                moments.push(ctx.zero());
                continue;
            }
            let mut sum = ctx.zero();
            let mut k = 0;
            while k < n {
                sum = ctx.mul_add(&sum, &coeffs[n][k], &moments[k]);
                k += 2;
            }
            moments.push(ctx.div(&sum.neg(), &coeffs[n][n]));
        }
        let moments_f64 = moments.iter().map(|m| ctx.to_f64(m)).collect();

        Ok(Self {
            rho,
            n_max,
            ctx,
            coeffs,
            moments,
            moments_f64,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Moment budget: moments are stored for indices `0..=2·n_max`.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Highest stored coefficient row (= 2·n_max).
    pub fn rows(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Fixed-point resolution of the underlying scalars.
    pub fn precision_bits(&self) -> u32 {
        self.ctx.scale_bits()
    }

    /// `l_{n,k}` as f64 (saturates for entries beyond f64 range).
    pub fn coeff_f64(&self, n: usize, k: usize) -> Result<f64> {
        let row = self.coeffs.get(n).ok_or(Error::Capacity {
            requested: n,
            capacity: self.rows(),
        })?;
        if k > n {
            return Ok(0.0);
        }
        Ok(self.ctx.to_f64(&row[k]))
    }

    /// `μ_n` as f64.
    pub fn moment_f64(&self, n: usize) -> Result<f64> {
        self.moments_f64.get(n).copied().ok_or(Error::Capacity {
            requested: n,
            capacity: self.moments_f64.len() - 1,
        })
    }

    /// All stored moments as f64.
    pub fn moments_f64(&self) -> &[f64] {
        &self.moments_f64
    }

    /// Evaluates `Σ_k l_{n,k} x^k` by Horner's rule in extended precision.
    pub fn eval_table_polynomial(&self, n: usize, x: f64) -> Result<f64> {
        let row = self.coeffs.get(n).ok_or(Error::Capacity {
            requested: n,
            capacity: self.rows(),
        })?;
        let x_ext = self.ctx.from_f64(x);
        let mut acc = self.ctx.zero();
        for k in (0..=n).rev() {
            acc = self.ctx.mul(&acc, &x_ext).add(&row[k]);
        }
        Ok(self.ctx.to_f64(&acc))
    }

    pub(crate) fn ctx(&self) -> &ExtCtx {
        &self.ctx
    }

    pub(crate) fn coeff_ext(&self, n: usize, k: usize) -> &ExtReal {
        &self.coeffs[n][k]
    }

    pub(crate) fn moment_ext(&self, n: usize) -> &ExtReal {
        &self.moments[n]
    }
}

/// Spec-shaped constructor alias.
pub fn build_coefficient_table(n_max: usize, params: &QueueParameters) -> Result<CoefficientTable> {
    CoefficientTable::build(params, n_max)
}

/// Which route computes the moment sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    /// Triangular-coefficient recursion (extended precision).
    Recursion,
    /// Direct quadrature of `∫ xⁿ dψ`.
    Quadrature,
}

/// Moments `μ_0..μ_{n_upto}` by the chosen method.
pub fn moments(
    n_upto: usize,
    method: MomentMethod,
    table: &CoefficientTable,
    measure: &SpectralMeasure,
) -> Result<Vec<f64>> {
    if measure.rho() != table.rho() {
        return Err(Error::InvalidParameter {
            name: "measure",
            reason: format!(
                "load mismatch: table at {}, measure at {}",
                table.rho(),
                measure.rho()
            ),
        });
    }
    match method {
        MomentMethod::Recursion => {
            if n_upto >= table.moments_f64().len() {
                return Err(Error::Capacity {
                    requested: n_upto,
                    capacity: table.moments_f64().len() - 1,
                });
            }
            Ok(table.moments_f64()[..=n_upto].to_vec())
        }
        MomentMethod::Quadrature => Ok(measure.moments_upto(n_upto)),
    }
}

/// Verifies the recursion moments against quadrature moments, failing with
/// the first offending index.
pub fn moment_cross_check(
    table: &CoefficientTable,
    measure: &SpectralMeasure,
    n_upto: usize,
) -> Result<()> {
    let rec = moments(n_upto, MomentMethod::Recursion, table, measure)?;
    let quad = moments(n_upto, MomentMethod::Quadrature, table, measure)?;
    for (n, (&r, &q)) in rec.iter().zip(&quad).enumerate() {
        let rel = if n <= STRICT_RANGE {
            STRICT_REL_TOL
        } else {
            LOOSE_REL_TOL
        };
        let tol = rel * q.abs().max(if n <= STRICT_RANGE { 1.0 } else { 1e-300 });
        if (r - q).abs() > tol {
            return Err(Error::PrecisionEscalation {
                index: n,
                recursion: r,
                quadrature: q,
                bits: table.precision_bits(),
            });
        }
    }
    Ok(())
}

/// Fixed-point scale sized to the table: resolution below the smallest
/// moment plus one bit per row of cancellation headroom.
fn auto_scale_bits(params: &QueueParameters, n_max: usize) -> u32 {
    let rows = (2 * n_max).max(1) as f64;
    let small = rows * (1.0 / params.support_bound()).log2() + 64.0;
    let headroom = rows + 192.0;
    let bits = (small + headroom).ceil() as u32;
    bits.next_multiple_of(64).max(512)
}
