//! The orthogonality measure dψ and quadrature against it.
//!
//! In the θ-parametrization `x = support_bound · cos θ` the density
//!
//! ```text
//! dψ/dθ = sin θ / cosh(π cot θ / 2) · exp( cot θ (θ - π/2) )
//! ```
//!
//! is load-independent; ρ only enters through the x-mapping. The density
//! decays like `2e·θ·exp(-π/θ)` as θ → 0 (and symmetrically at π), so the
//! composite Gauss rule refines panels geometrically toward both endpoints
//! and drops the sliver below `theta_min`, where the density underflows f64.

use std::f64::consts::PI;

use crate::error::Error;
use crate::model::QueueParameters;
use crate::Result;

/// Total-mass defect beyond which quadrature construction is rejected.
pub const DEFAULT_MASS_TOL: f64 = 1e-6;

/// Composite Gauss-Legendre layout for integrals against dψ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Total number of panels across [0, π].
    pub panels: usize,
    /// Gauss-Legendre order per panel.
    pub order: usize,
    /// Endpoint cutoff; the density is below f64 underflow for θ < π/745.
    pub theta_min: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            panels: 64,
            order: 20,
            theta_min: 4e-3,
        }
    }
}

/// Density dψ/dθ, evaluated in log-space so the cosh never overflows.
/// Defined as 0 at both endpoints.
pub fn measure_density_theta(theta: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::ThetaRange { theta });
    }
    if theta == 0.0 || theta == PI {
        return Ok(0.0);
    }
    let (sin_t, cos_t) = theta.sin_cos();
    let cot = cos_t / sin_t;
    let half_pi_cot = 0.5 * PI * cot;
    // log cosh(u) = |u| + log1p(e^{-2|u|}) - log 2
    let log_cosh = half_pi_cot.abs() + (-2.0 * half_pi_cot.abs()).exp().ln_1p() - 2f64.ln();
    let log_density = sin_t.ln() + cot * (theta - PI / 2.0) - log_cosh;
    Ok(log_density.exp())
}

/// One quadrature node against dψ.
#[derive(Debug, Clone, Copy)]
pub struct MeasureNode {
    /// Angle in (0, π).
    pub theta: f64,
    /// Spectral coordinate `support_bound · cos θ`.
    pub x: f64,
    /// Gauss weight times dψ/dθ: `∫ f dψ ≈ Σ w_psi · f`.
    pub w_psi: f64,
    /// Plain Gauss weight for dθ integrals on the same grid.
    pub w_theta: f64,
}

/// The spectral measure of the transition operator: support, densities in
/// both parametrizations, and a quadrature rule over the support.
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    rho: f64,
    support_bound: f64,
    spec: QuadratureSpec,
    nodes: Vec<MeasureNode>,
}

impl SpectralMeasure {
    /// Builds the composite rule and verifies `∫ dψ = 1` within
    /// [`DEFAULT_MASS_TOL`].
    pub fn build(params: &QueueParameters, spec: QuadratureSpec) -> Result<Self> {
        if spec.panels < 1 {
            return Err(Error::InvalidParameter {
                name: "panels",
                reason: "must be at least 1".into(),
            });
        }
        if spec.order < 2 {
            return Err(Error::InvalidParameter {
                name: "order",
                reason: "must be at least 2".into(),
            });
        }
        if !(spec.theta_min > 0.0 && spec.theta_min < PI / 4.0) {
            return Err(Error::InvalidParameter {
                name: "theta_min",
                reason: format!("must lie in (0, pi/4), got {}", spec.theta_min),
            });
        }
        let (gl_nodes, gl_weights) = gauss_legendre(spec.order);
        let per_half = spec.panels.div_ceil(2);
        let shrink = (spec.theta_min / (PI / 2.0)).powf(1.0 / per_half as f64);

        // Geometric edges from pi/2 down to theta_min, mirrored onto the
        // upper half.
        let mut edges = Vec::with_capacity(per_half + 1);
        let mut e = PI / 2.0;
        edges.push(e);
        for _ in 0..per_half {
            e *= shrink;
            edges.push(e);
        }
        *edges.last_mut().unwrap() = spec.theta_min;

        let support_bound = params.support_bound();
        let mut nodes = Vec::with_capacity(2 * per_half * spec.order);
        for w in edges.windows(2) {
            let (hi, lo) = (w[0], w[1]);
            let center = 0.5 * (hi + lo);
            let half = 0.5 * (hi - lo);
            for (t, gw) in gl_nodes.iter().zip(&gl_weights) {
                for theta in [center + half * t, PI - (center + half * t)] {
                    let w_theta = gw * half;
                    let density = measure_density_theta(theta)?;
                    nodes.push(MeasureNode {
                        theta,
                        x: support_bound * theta.cos(),
                        w_psi: w_theta * density,
                        w_theta,
                    });
                }
            }
        }
        nodes.sort_by(|a, b| a.theta.total_cmp(&b.theta));

        let measure = Self {
            rho: params.rho(),
            support_bound,
            spec,
            nodes,
        };
        let mass = measure.total_mass();
        if (mass - 1.0).abs() > DEFAULT_MASS_TOL {
            return Err(Error::QuadratureDiagnostic(format!(
                "total mass {mass} deviates from 1 by {:e} (panels={}, order={})",
                (mass - 1.0).abs(),
                spec.panels,
                spec.order
            )));
        }
        Ok(measure)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Support endpoints `(-2√ρ/(1+ρ), 2√ρ/(1+ρ))`.
    pub fn support(&self) -> (f64, f64) {
        (-self.support_bound, self.support_bound)
    }

    pub fn spec(&self) -> QuadratureSpec {
        self.spec
    }

    pub fn nodes(&self) -> &[MeasureNode] {
        &self.nodes
    }

    /// Density dψ/dx at `x` inside the support.
    pub fn density_x(&self, x: f64) -> Result<f64> {
        if x.abs() > self.support_bound {
            return Err(Error::InvalidParameter {
                name: "x",
                reason: format!(
                    "outside the support [-{0}, {0}]",
                    self.support_bound
                ),
            });
        }
        let theta = (x / self.support_bound).clamp(-1.0, 1.0).acos();
        if theta == 0.0 || theta == PI {
            return Ok(f64::INFINITY * 0.0 + 0.0); // endpoints carry no mass
        }
        // dψ/dx = (dψ/dθ) / |dx/dθ|, |dx/dθ| = support_bound · sin θ.
        Ok(measure_density_theta(theta)? / (self.support_bound * theta.sin()))
    }

    /// `∫ f(θ, x) dψ` over the support.
    pub fn integrate(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .map(|n| n.w_psi * f(n.theta, n.x))
            .sum()
    }

    /// `∫ f(θ, x) dθ` on the same grid (plain Lebesgue weight).
    pub fn integrate_dtheta(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .map(|n| n.w_theta * f(n.theta, n.x))
            .sum()
    }

    /// `∫ dψ`, which the construction pins to 1.
    pub fn total_mass(&self) -> f64 {
        self.nodes.iter().map(|n| n.w_psi).sum()
    }

    /// Moments `∫ xⁿ dψ` for n = 0..=n_max, one power sweep per node.
    pub fn moments_upto(&self, n_max: usize) -> Vec<f64> {
        let mut out = vec![0.0f64; n_max + 1];
        for node in &self.nodes {
            let mut pow = 1.0;
            for slot in out.iter_mut() {
                *slot += node.w_psi * pow;
                pow *= node.x;
            }
        }
        out
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub(crate) fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0f64;
    let mut cur = x;
    for k in 1..n {
        let k_f = k as f64;
        let next = ((2.0 * k_f + 1.0) * x * cur - k_f * prev) / (k_f + 1.0);
        prev = cur;
        cur = next;
    }
    let deriv = n as f64 * (x * cur - prev) / (x * x - 1.0);
    (cur, deriv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pollaczek::{eval_pollaczek, eval_q};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(rho: f64) -> QueueParameters {
        QueueParameters::new(rho).unwrap()
    }

    fn default_measure(rho: f64) -> SpectralMeasure {
        SpectralMeasure::build(&params(rho), QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn density_is_one_at_right_angle() {
        assert_abs_diff_eq!(
            measure_density_theta(PI / 2.0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn density_vanishes_at_endpoints() {
        assert_eq!(measure_density_theta(0.0).unwrap(), 0.0);
        assert_eq!(measure_density_theta(PI).unwrap(), 0.0);
        // Exponential decay dominates well before the endpoints.
        assert!(measure_density_theta(0.01).unwrap() < 1e-130);
    }

    #[test]
    fn density_reference_value() {
        // sin(pi/4)/cosh(pi/2) * exp(pi/4 - pi/2), evaluated directly.
        let expected = (PI / 4.0).sin() / (PI / 2.0).cosh() * (PI / 4.0 - PI / 2.0).exp();
        assert_relative_eq!(
            measure_density_theta(PI / 4.0).unwrap(),
            expected,
            max_relative = 1e-13
        );
        assert_abs_diff_eq!(expected, 0.128487, epsilon = 1e-6);
    }

    #[test]
    fn density_is_symmetric_about_right_angle() {
        for theta in [0.3, 0.8, 1.2] {
            assert_relative_eq!(
                measure_density_theta(theta).unwrap(),
                measure_density_theta(PI - theta).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn density_rejects_out_of_range() {
        assert!(measure_density_theta(-0.1).is_err());
        assert!(measure_density_theta(PI + 0.1).is_err());
    }

    #[test]
    fn x_density_consistent_with_theta_density() {
        let m = default_measure(0.5);
        let s = params(0.5).support_bound();
        for theta in [0.4f64, 1.0, 2.0, 2.7] {
            let x = s * theta.cos();
            assert_relative_eq!(
                m.density_x(x).unwrap() * s * theta.sin(),
                measure_density_theta(theta).unwrap(),
                max_relative = 1e-12
            );
        }
        assert!(m.density_x(s * 1.01).is_err());
    }

    #[test]
    fn total_mass_is_one() {
        for rho in [0.2, 0.5, 0.8] {
            let m = default_measure(rho);
            assert_abs_diff_eq!(m.total_mass(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn first_moment_vanishes_by_symmetry() {
        let m = default_measure(0.5);
        let mu1 = m.integrate(|_, x| x);
        assert_abs_diff_eq!(mu1, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn q1_normalization_matches_hilbert_weight() {
        // ∫ Q_1² dψ = 1/pi_1 = 1/(2 rho); at rho = 0.5 this is 1.
        for rho in [0.2, 0.5, 0.8] {
            let p = params(rho);
            let m = default_measure(rho);
            let val = m.integrate(|_, x| {
                let q1 = eval_q(1, x, &p);
                q1 * q1
            });
            assert_relative_eq!(val, 1.0 / (2.0 * rho), max_relative = 1e-9);
        }
    }

    #[test]
    fn pollaczek_normalization_condition() {
        // ∫_{-1}^{1} P_n P_m w dx = δ_{mn}/(2n+2) for (a, b) = (1, 0),
        // evaluated as (1/2) ∫ P_n P_m dψ(θ) on the same grid.
        let m = default_measure(0.5);
        for n in 0..=20usize {
            for mm in n..=20usize {
                let val = 0.5
                    * m.integrate(|theta, _| {
                        eval_pollaczek(n, theta.cos(), 1.0, 0.0)
                            * eval_pollaczek(mm, theta.cos(), 1.0, 0.0)
                    });
                let expected = if n == mm { 1.0 / (2.0 * n as f64 + 2.0) } else { 0.0 };
                assert_abs_diff_eq!(val, expected, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (nodes, weights) = gauss_legendre(8);
        // Degree-15 polynomial x^14 integrates to 2/15.
        let val: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(14))
            .sum();
        assert_relative_eq!(val, 2.0 / 15.0, max_relative = 1e-13);
        let mass: f64 = weights.iter().sum();
        assert_relative_eq!(mass, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn build_rejects_bad_specs() {
        let p = params(0.5);
        assert!(SpectralMeasure::build(
            &p,
            QuadratureSpec {
                panels: 0,
                order: 20,
                theta_min: 4e-3
            }
        )
        .is_err());
        assert!(SpectralMeasure::build(
            &p,
            QuadratureSpec {
                panels: 64,
                order: 1,
                theta_min: 4e-3
            }
        )
        .is_err());
    }
}
