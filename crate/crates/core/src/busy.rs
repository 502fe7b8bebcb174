//! The residual busy-period approximation.
//!
//! When the tagged customer arrives, each of the N_0 customers present plus
//! the tagged one opens an independent busy period, so with β(z) the
//! generating function of customers served in one busy period,
//! `E(z^B | N_0 = n) = β(z)^{n+1}` and the stationary mix gives
//! `B(z) = (1-ρ)β(z)/(1-ρβ(z))`. The approximation picks the tagged
//! customer's rank b-tilde uniformly among the B customers served.
//!
//! `P(b = ℓ)` is evaluated for ℓ ≥ 1; the ℓ = 0 instance of the displayed
//! series would be (1-ρ)/ρ (above one for light loads) because the geometric
//! sum identity `(z^k - z)/(z-1) = Σ_{ℓ=1}^{k-1} z^ℓ` behind it starts at
//! ℓ = 1, so the normalizing reading sets P(b = 0) = 0: the residual busy
//! period always serves at least the tagged customer.

use crate::error::Error;
use crate::model::QueueParameters;
use crate::pmf::Pmf;
use crate::pollaczek::measure::gauss_legendre;
use crate::Result;

/// Closed-form busy-period model with series truncation controls.
#[derive(Debug, Clone)]
pub struct BusyPeriodModel {
    params: QueueParameters,
    series_tol: f64,
    k_cap: usize,
}

impl BusyPeriodModel {
    pub fn new(params: QueueParameters) -> Self {
        Self {
            params,
            series_tol: 1e-16,
            k_cap: 100_000,
        }
    }

    pub fn with_series_controls(
        params: QueueParameters,
        series_tol: f64,
        k_cap: usize,
    ) -> Result<Self> {
        if !(series_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "series_tol",
                reason: format!("must be positive, got {series_tol}"),
            });
        }
        if k_cap < 1 {
            return Err(Error::InvalidParameter {
                name: "k_cap",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self {
            params,
            series_tol,
            k_cap,
        })
    }

    pub fn params(&self) -> &QueueParameters {
        &self.params
    }

    /// Generating function of customers served in one busy period:
    /// β(z) = (1+ρ)/(2ρ) · (1 - √(1 - z/z0)).
    pub fn beta_gen(&self, z: f64) -> Result<f64> {
        let z0 = self.params.z0();
        if z > z0 {
            return Err(Error::BranchCut { z, z0 });
        }
        let rho = self.params.rho();
        Ok((1.0 + rho) / (2.0 * rho) * (1.0 - (1.0 - z / z0).max(0.0).sqrt()))
    }

    /// Generating function of customers served in the residual busy period,
    /// B(z) = (1-ρ)β(z)/(1-ρβ(z)). Regular at z = 1 in this form; the pole
    /// ρβ(z) = 1 cannot occur on [0, z0] since ρβ(z0) = (1+ρ)/2 < 1.
    pub fn b_gen(&self, z: f64) -> Result<f64> {
        let rho = self.params.rho();
        let beta = self.beta_gen(z)?;
        let denom = 1.0 - rho * beta;
        if denom <= 0.0 {
            return Err(Error::Singularity {
                z,
                reason: "rho * beta(z) reached 1",
            });
        }
        Ok((1.0 - rho) * beta / denom)
    }

    /// Distribution of `b`, the number of customers served in the residual
    /// busy period: for ℓ ≥ 1,
    /// `P(b=ℓ) = (1-ρ)/(ρ(1+ρ)) Σ_{k≥ℓ} C(2k,k) ρ^k / ((k+1)(1+ρ)^{2k})`,
    /// and P(b=0) = 0 (see the module notes).
    pub fn b_pmf(&self, l_max: usize) -> Result<Pmf> {
        if l_max < 1 {
            return Err(Error::InvalidParameter {
                name: "l_max",
                reason: "must be at least 1".into(),
            });
        }
        let (terms, tail_bound) = self.central_terms(l_max)?;
        let prefactor = (1.0 - self.params.rho()) / (self.params.rho() * (1.0 + self.params.rho()));
        // Suffix sums T(ℓ) = Σ_{k ≥ ℓ} g_k, accumulated from the top.
        let mut probs = vec![0.0f64; l_max + 1];
        let mut suffix = tail_bound;
        for k in (1..terms.len()).rev() {
            suffix += terms[k];
            if k <= l_max {
                probs[k] = prefactor * suffix;
            }
        }
        let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0);
        Pmf::new(0, probs, tail)
    }

    /// Distribution of the rank of a uniformly chosen customer among the B
    /// served: `P(b̃=j) = Σ_{k≥j+1} P(b=k)/k`.
    pub fn btilde_pmf(&self, j_max: usize) -> Result<Pmf> {
        // Work from the full b-distribution out to where its own series was
        // truncated, so the rank suffix sums see the whole support.
        let (terms, tail_bound) = self.central_terms(j_max + 1)?;
        let k_top = terms.len() - 1;
        let prefactor = (1.0 - self.params.rho()) / (self.params.rho() * (1.0 + self.params.rho()));
        let mut b_suffix = tail_bound;
        let mut rank_suffix = 0.0f64;
        let mut probs = vec![0.0f64; j_max + 1];
        for k in (1..=k_top).rev() {
            b_suffix += terms[k];
            rank_suffix += prefactor * b_suffix / k as f64; // P(b=k)/k
            if k - 1 <= j_max {
                probs[k - 1] = rank_suffix;
            }
        }
        let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0);
        Pmf::new(0, probs, tail)
    }

    /// Generating function of b̃ through the integral
    /// `E z^{b̃} = ∫₀¹ (B(t) - B(zt)) / (t (1-z)) dt`.
    /// The integrand tends to the finite limit B'(0) at t → 0; Gauss nodes
    /// stay interior so no special casing is needed.
    pub fn btilde_gen(&self, z: f64, quad_points: usize) -> Result<f64> {
        if !(0.0..1.0).contains(&z) {
            return Err(Error::InvalidParameter {
                name: "z",
                reason: format!("must lie in [0, 1), got {z}"),
            });
        }
        if quad_points < 2 {
            return Err(Error::InvalidParameter {
                name: "quad_points",
                reason: "need at least 2 quadrature points".into(),
            });
        }
        let (nodes, weights) = gauss_legendre(quad_points);
        let mut total = 0.0;
        for (t, w) in nodes.iter().zip(&weights) {
            let t = 0.5 * (t + 1.0); // map [-1,1] -> [0,1]
            let integrand = (self.b_gen(t)? - self.b_gen(z * t)?) / (t * (1.0 - z));
            total += 0.5 * w * integrand;
        }
        Ok(total)
    }

    /// Terms g_k = C(2k,k) ρ^k / ((k+1)(1+ρ)^{2k}) for k = 0..=K, where K is
    /// set by the relative series tolerance (but at least `min_k`), plus a
    /// geometric bound on the dropped tail.
    fn central_terms(&self, min_k: usize) -> Result<(Vec<f64>, f64)> {
        let rho = self.params.rho();
        let x = rho / ((1.0 + rho) * (1.0 + rho)); // C(2k,k) x^k / (k+1)
        let ratio_limit = 4.0 * x; // = 1/z0 < 1
        let mut terms = vec![1.0f64];
        let mut acc = 1.0f64;
        let mut k = 0usize;
        loop {
            // g_{k+1}/g_k = 2(2k+1)/(k+2) · x, increasing toward 1/z0.
            let ratio = 2.0 * (2.0 * k as f64 + 1.0) / (k as f64 + 2.0) * x;
            let next = terms[k] * ratio;
            terms.push(next);
            acc += next;
            k += 1;
            if k >= min_k && next < self.series_tol * acc {
                break;
            }
            if k >= self.k_cap {
                return Err(Error::Truncation {
                    target: self.series_tol,
                    achieved: next / acc,
                    cap: self.k_cap,
                });
            }
        }
        let last = *terms.last().unwrap();
        let tail_bound = last * ratio_limit / (1.0 - ratio_limit);
        Ok((terms, tail_bound))
    }
}
