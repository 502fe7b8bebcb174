//! Brute-force oracle: the truncated absorbed chain, iterated exactly.
//!
//! The embedded chain on {-1, 0, 1, ...} moves up with probability
//! ρ/(1+ρ), down with n/((n+1)(1+ρ)) and absorbs (the tagged departure)
//! with 1/((n+1)(1+ρ)). Truncation drops the upward transition at the cap
//! so the leaked mass is an exact one-sided bound on every probability
//! reported here. This module deliberately uses nothing but vector
//! iteration and a tridiagonal solve; it is the ground truth the spectral
//! formulas are validated against.

use crate::error::Error;
use crate::model::{alpha_delta_from_path, QueueParameters, TruncationConfig};
use crate::pmf::Pmf;
use crate::Result;

/// Hard cap on absorption steps before the iteration reports failure.
const STEP_CAP: usize = 1 << 22;

/// Residual unabsorbed mass at which distribution iterations stop.
const RESIDUAL_TARGET: f64 = 1e-13;

/// The sub-stochastic transition structure truncated at `state_cap`.
#[derive(Debug, Clone)]
pub struct TruncatedChain {
    rho: f64,
    state_cap: usize,
    up: f64,
    down: Vec<f64>,
    absorb: Vec<f64>,
}

impl TruncatedChain {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Largest retained state M.
    pub fn state_cap(&self) -> usize {
        self.state_cap
    }

    pub fn up(&self) -> f64 {
        self.up
    }

    pub fn down(&self, n: usize) -> f64 {
        self.down[n]
    }

    pub fn absorb(&self, n: usize) -> f64 {
        self.absorb[n]
    }

    /// One sub-stochastic step `dst = src · A`; returns the mass leaked
    /// through the dropped upward transition at the cap.
    fn step(&self, src: &[f64], dst: &mut [f64]) -> f64 {
        let m_cap = self.state_cap;
        for (m, d) in dst.iter_mut().enumerate() {
            let from_below = if m >= 1 { src[m - 1] * self.up } else { 0.0 };
            let from_above = if m + 1 <= m_cap {
                src[m + 1] * self.down[m + 1]
            } else {
                0.0
            };
            *d = from_below + from_above;
        }
        src[m_cap] * self.up
    }
}

/// Builds the truncated chain with states 0..=m.
pub fn build_chain(params: &QueueParameters, m: usize) -> Result<TruncatedChain> {
    if m < 1 {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: "state cap must be at least 1".into(),
        });
    }
    let rho = params.rho();
    let one_plus = 1.0 + rho;
    let down = (0..=m)
        .map(|n| n as f64 / ((n as f64 + 1.0) * one_plus))
        .collect();
    let absorb = (0..=m).map(|n| 1.0 / ((n as f64 + 1.0) * one_plus)).collect();
    Ok(TruncatedChain {
        rho,
        state_cap: m,
        up: rho / one_plus,
        down,
        absorb,
    })
}

/// Smallest power of two M with stationary tail mass ρ^M < 1e-14
/// (horizon leak is then far below 1e-12 for any start below M/2).
pub fn default_state_cap(params: &QueueParameters) -> usize {
    let needed = (1e-14f64.ln() / params.rho().ln()).ceil().max(1.0) as usize;
    needed.next_power_of_two().max(64)
}

/// Convenience: chain truncated at the default cap.
pub fn auto_chain(params: &QueueParameters) -> TruncatedChain {
    build_chain(params, default_state_cap(params)).expect("default cap is positive")
}

/// Joint table P(κ = k, ν = m | N_0 = n0) for k = 1..=k_max.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    n0: usize,
    rows: Vec<Vec<f64>>,
    residual: f64,
    leak: f64,
}

impl JointDistribution {
    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn k_max(&self) -> usize {
        self.rows.len()
    }

    pub fn prob(&self, k: usize, m: usize) -> f64 {
        if k < 1 || k > self.rows.len() {
            return 0.0;
        }
        self.rows[k - 1].get(m).copied().unwrap_or(0.0)
    }

    /// Unabsorbed mass still inside the chain after `k_max` steps.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Mass lost through the truncation cap.
    pub fn leak(&self) -> f64 {
        self.leak
    }

    pub fn absorbed_mass(&self) -> f64 {
        self.rows.iter().map(|r| r.iter().sum::<f64>()).sum()
    }

    /// Marginal of κ; tail records residual plus leak.
    pub fn kappa_pmf(&self) -> Result<Pmf> {
        let probs = self.rows.iter().map(|r| r.iter().sum()).collect();
        Pmf::new(1, probs, self.residual + self.leak)
    }

    /// Marginal of ν.
    pub fn nu_pmf(&self) -> Result<Pmf> {
        let width = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut probs = vec![0.0; width];
        for row in &self.rows {
            for (m, p) in row.iter().enumerate() {
                probs[m] += p;
            }
        }
        Pmf::new(0, probs, self.residual + self.leak)
    }
}

/// Drives the absorbed chain from `n0`, invoking `visit(k, m, prob)` for
/// every absorption event with positive probability, until the unabsorbed
/// mass falls below `residual_target` (or `k_max` steps, if given).
fn for_each_absorption(
    chain: &TruncatedChain,
    n0: usize,
    k_max: Option<usize>,
    residual_target: f64,
    mut visit: impl FnMut(usize, usize, f64),
) -> Result<(f64, f64)> {
    let cap = chain.state_cap;
    if 2 * n0 > cap {
        return Err(Error::EnlargeStateCap(format!(
            "start state {n0} above half the cap {cap}"
        )));
    }
    let mut cur = vec![0.0f64; cap + 1];
    let mut next = vec![0.0f64; cap + 1];
    cur[n0] = 1.0;
    let mut remaining = 1.0f64;
    let mut leaked = 0.0f64;
    let mut k = 1usize;
    loop {
        for (m, &u) in cur.iter().enumerate() {
            if u > 0.0 {
                let p = u * chain.absorb[m];
                visit(k, m, p);
                remaining -= p;
            }
        }
        if let Some(limit) = k_max {
            if k >= limit {
                break;
            }
        } else if remaining <= residual_target {
            break;
        }
        if k >= STEP_CAP {
            return Err(Error::Truncation {
                target: residual_target,
                achieved: remaining,
                cap: STEP_CAP,
            });
        }
        let step_leak = chain.step(&cur, &mut next);
        leaked += step_leak;
        remaining -= step_leak;
        std::mem::swap(&mut cur, &mut next);
        k += 1;
    }
    Ok((remaining.max(0.0), leaked))
}

/// Joint distribution by explicit vector-matrix iteration.
pub fn oracle_joint(chain: &TruncatedChain, n0: usize, k_max: usize) -> Result<JointDistribution> {
    let mut rows = vec![vec![0.0f64; chain.state_cap + 1]; k_max];
    let (residual, leak) = for_each_absorption(chain, n0, Some(k_max), 0.0, |k, m, p| {
        rows[k - 1][m] = p;
    })?;
    Ok(JointDistribution {
        n0,
        rows,
        residual,
        leak,
    })
}

/// ν-distribution through the resolvent: solve (I - A)ᵀ y = e_{n0} and
/// weight by the absorption probabilities. No horizon truncation at all.
pub fn oracle_nu(chain: &TruncatedChain, n0: usize) -> Result<Pmf> {
    let cap = chain.state_cap;
    if 2 * n0 > cap {
        return Err(Error::EnlargeStateCap(format!(
            "start state {n0} above half the cap {cap}"
        )));
    }
    let n = cap + 1;
    // (I - A)ᵀ: unit diagonal, sub-diagonal -up, super-diagonal -down[i+1].
    let mut c = vec![0.0f64; n];
    let mut d = vec![0.0f64; n];
    c[0] = -chain.down[1];
    d[0] = if n0 == 0 { 1.0 } else { 0.0 };
    for i in 1..n {
        let denom = 1.0 - (-chain.up) * c[i - 1];
        c[i] = if i + 1 < n { -chain.down[i + 1] / denom } else { 0.0 };
        let rhs = if i == n0 { 1.0 } else { 0.0 };
        d[i] = (rhs - (-chain.up) * d[i - 1]) / denom;
    }
    let mut y = vec![0.0f64; n];
    y[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        y[i] = d[i] - c[i] * y[i + 1];
    }
    let probs: Vec<f64> = y
        .iter()
        .enumerate()
        .map(|(m, v)| v * chain.absorb[m])
        .collect();
    let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    Pmf::new(0, probs, tail)
}

/// ν-distribution by marginalizing the horizon iteration; the independent
/// cross-check of [`oracle_nu`].
pub fn oracle_nu_via_marginal(chain: &TruncatedChain, n0: usize) -> Result<Pmf> {
    let mut probs = vec![0.0f64; chain.state_cap + 1];
    let (residual, leak) = for_each_absorption(chain, n0, None, RESIDUAL_TARGET, |_, m, p| {
        probs[m] += p;
    })?;
    Pmf::new(0, probs, residual + leak)
}

/// κ-distribution truncated at `k_max` events.
pub fn oracle_kappa(chain: &TruncatedChain, n0: usize, k_max: usize) -> Result<Pmf> {
    let mut probs = vec![0.0f64; k_max];
    let (residual, leak) = for_each_absorption(chain, n0, Some(k_max), 0.0, |k, _, p| {
        probs[k - 1] += p;
    })?;
    Pmf::new(1, probs, residual + leak)
}

/// Stationary-mixed distributions of α and δ: the joint pushed through the
/// path identities, mixed over a geometric N_0 truncated at
/// `trunc.epsilon`.
pub fn oracle_alpha_delta(
    chain: &TruncatedChain,
    j_max: usize,
    trunc: &TruncationConfig,
) -> Result<(Pmf, Pmf)> {
    let rho = chain.rho;
    let n0_range = trunc.outer_range(rho);
    if 2 * n0_range > chain.state_cap {
        return Err(Error::EnlargeStateCap(format!(
            "mixing needs start states up to {n0_range}, cap is {}",
            chain.state_cap
        )));
    }
    let mut alpha = vec![0.0f64; j_max + 1];
    let mut delta = vec![0.0f64; j_max + 1];
    for n0 in 0..=n0_range {
        let weight = (1.0 - rho) * rho.powi(n0 as i32);
        for_each_absorption(chain, n0, None, RESIDUAL_TARGET, |k, m, p| {
            if p == 0.0 {
                return;
            }
            let (a, dl) = alpha_delta_from_path(n0 as u64, k as u64, m as u64)
                .expect("chain absorption events satisfy the path identities");
            if (a as usize) <= j_max {
                alpha[a as usize] += weight * p;
            }
            if (dl as usize) <= j_max {
                delta[dl as usize] += weight * p;
            }
        })?;
    }
    let alpha_tail = (1.0 - alpha.iter().sum::<f64>()).max(0.0);
    let delta_tail = (1.0 - delta.iter().sum::<f64>()).max(0.0);
    Ok((
        Pmf::new(0, alpha, alpha_tail)?,
        Pmf::new(0, delta, delta_tail)?,
    ))
}

/// Stationary ν: resolvent route mixed over the geometric N_0.
pub fn stationary_nu(chain: &TruncatedChain, trunc: &TruncationConfig) -> Result<Pmf> {
    let rho = chain.rho;
    let n0_range = trunc.outer_range(rho);
    let mut probs = vec![0.0f64; chain.state_cap + 1];
    for n0 in 0..=n0_range {
        let weight = (1.0 - rho) * rho.powi(n0 as i32);
        let nu = oracle_nu(chain, n0)?;
        for (m, p) in nu.entries() {
            probs[m] += weight * p;
        }
    }
    let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    Pmf::new(0, probs, tail)
}

/// P(W_{n0} > y): the κ-mixture of Erlang tails at rate 1 + ρ, with the
/// Poisson terms advanced incrementally across k.
pub fn oracle_sojourn_tail(chain: &TruncatedChain, n0: usize, y: f64) -> Result<f64> {
    if y < 0.0 {
        return Err(Error::InvalidParameter {
            name: "y",
            reason: format!("must be nonnegative, got {y}"),
        });
    }
    if y == 0.0 {
        return Ok(1.0);
    }
    let rate_y = (1.0 + chain.rho) * y;
    let kappa = kappa_until_residual(chain, n0, RESIDUAL_TARGET)?;
    let mut poisson_term = (-rate_y).exp();
    let mut erlang_tail = poisson_term; // P(Erlang(1) > y) = e^{-λy}
    let mut total = 0.0f64;
    for (k, p) in kappa.entries() {
        total += p * erlang_tail;
        // advance: tail for k+1 adds the (λy)^k / k! term
        poisson_term *= rate_y / k as f64;
        erlang_tail += poisson_term;
    }
    Ok(total + kappa.tail_mass().min(1.0) * erlang_tail.min(1.0))
}

/// κ-distribution iterated until the unabsorbed residual drops below
/// `residual_target`.
pub fn kappa_until_residual(
    chain: &TruncatedChain,
    n0: usize,
    residual_target: f64,
) -> Result<Pmf> {
    let mut probs = Vec::new();
    let (residual, leak) = for_each_absorption(chain, n0, None, residual_target, |k, _, p| {
        if probs.len() < k {
            probs.resize(k, 0.0);
        }
        probs[k - 1] += p;
    })?;
    Pmf::new(1, probs, residual + leak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(rho: f64) -> QueueParameters {
        QueueParameters::new(rho).unwrap()
    }

    #[test]
    fn coefficients_match_definitions() {
        let chain = build_chain(&params(0.5), 16).unwrap();
        assert_relative_eq!(chain.absorb(0), 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(chain.up(), 1.0 / 3.0, max_relative = 1e-15);
        assert_eq!(chain.down(0), 0.0);
        // n = 1: absorb = down = up = 1/3.
        assert_relative_eq!(chain.absorb(1), 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(chain.down(1), 1.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn interior_rows_are_stochastic() {
        for rho in [0.2, 0.5, 0.8] {
            let chain = build_chain(&params(rho), 32).unwrap();
            for n in 0..32 {
                let total = chain.absorb(n) + chain.down(n) + chain.up();
                assert_relative_eq!(total, 1.0, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn detailed_balance_against_hilbert_weights() {
        let p = params(0.6);
        let chain = build_chain(&p, 64).unwrap();
        for n in 0..63usize {
            let lhs = chain.up() * p.hilbert_weight(n);
            let rhs = chain.down(n + 1) * p.hilbert_weight(n + 1);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
        }
    }

    #[test]
    fn joint_first_steps_by_hand() {
        let chain = auto_chain(&params(0.5));
        let joint = oracle_joint(&chain, 0, 8).unwrap();
        // Absorption at the first event leaves nu = n0.
        assert_relative_eq!(joint.prob(1, 0), 2.0 / 3.0, max_relative = 1e-14);
        // After one non-absorbing step from 0 the state is 1:
        // P(kappa=2, nu=1) = (1/3)(1/3), zero elsewhere.
        assert_relative_eq!(joint.prob(2, 1), 1.0 / 9.0, max_relative = 1e-14);
        for m in [0usize, 2, 3, 4] {
            assert_eq!(joint.prob(2, m), 0.0);
        }
    }

    #[test]
    fn joint_mass_bookkeeping_closes() {
        let chain = build_chain(&params(0.5), 400).unwrap();
        let joint = oracle_joint(&chain, 3, 400).unwrap();
        let total = joint.absorbed_mass() + joint.residual() + joint.leak();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn joint_parity_support() {
        let chain = auto_chain(&params(0.4));
        let n0 = 2;
        let joint = oracle_joint(&chain, n0, 30).unwrap();
        for k in 1..=30usize {
            for m in 0..=20usize {
                let diff = m.abs_diff(n0);
                let possible = (k - 1) % 2 == diff % 2 && k >= 1 + diff;
                if !possible {
                    assert_eq!(joint.prob(k, m), 0.0, "parity leak at k={k}, m={m}");
                }
            }
        }
    }

    #[test]
    fn resolvent_and_marginal_nu_agree() {
        let chain = auto_chain(&params(0.5));
        for n0 in 0..=5 {
            let a = oracle_nu(&chain, n0).unwrap();
            let b = oracle_nu_via_marginal(&chain, n0).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-10, "n0 = {n0}");
        }
    }

    #[test]
    fn kappa_starts_at_absorption_probability() {
        let chain = auto_chain(&params(0.5));
        let kappa = oracle_kappa(&chain, 0, 50).unwrap();
        assert_relative_eq!(kappa.prob(1), 2.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn stationary_nu_is_geometric() {
        for rho in [0.2, 0.5, 0.8] {
            let chain = auto_chain(&params(rho));
            let trunc = TruncationConfig::new(1e-12, 400, 1e-12).unwrap();
            let nu = stationary_nu(&chain, &trunc).unwrap();
            for m in 0..=10usize {
                let expected = (1.0 - rho) * rho.powi(m as i32);
                assert_abs_diff_eq!(nu.prob(m), expected, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn alpha_and_delta_match_in_distribution() {
        for rho in [0.2, 0.5] {
            let chain = auto_chain(&params(rho));
            let trunc = TruncationConfig::new(1e-10, 400, 1e-12).unwrap();
            let (alpha, delta) = oracle_alpha_delta(&chain, 30, &trunc).unwrap();
            assert!(
                alpha.max_abs_diff(&delta) < 1e-9,
                "alpha vs delta at rho={rho}"
            );
            assert!(delta.tail_mass() < 1e-6, "tail at rho={rho}");
        }
    }

    #[test]
    fn delta_mean_matches_rho_over_one_minus_rho() {
        let chain = auto_chain(&params(0.5));
        let trunc = TruncationConfig::new(1e-10, 400, 1e-12).unwrap();
        let (_, delta) = oracle_alpha_delta(&chain, 60, &trunc).unwrap();
        assert_abs_diff_eq!(delta.mean(), 1.0, epsilon = 1e-4);
    }

    #[test]
    fn doubling_the_cap_leaves_probabilities_fixed() {
        let p = params(0.5);
        let small = build_chain(&p, default_state_cap(&p)).unwrap();
        let large = build_chain(&p, 2 * default_state_cap(&p)).unwrap();
        for n0 in [0usize, 3] {
            let a = oracle_nu(&small, n0).unwrap();
            let b = oracle_nu(&large, n0).unwrap();
            for m in 0..=30 {
                assert_abs_diff_eq!(a.prob(m), b.prob(m), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn sojourn_tail_edges() {
        let chain = auto_chain(&params(0.5));
        assert_eq!(oracle_sojourn_tail(&chain, 0, 0.0).unwrap(), 1.0);
        assert_eq!(oracle_sojourn_tail(&chain, 7, 0.0).unwrap(), 1.0);
        assert!(oracle_sojourn_tail(&chain, 0, -1.0).is_err());
        // Light traffic: the PS queue degenerates to a lone M/M/1 customer.
        let light = auto_chain(&params(0.01));
        let tail = oracle_sojourn_tail(&light, 0, 1.0).unwrap();
        assert_abs_diff_eq!(tail, (-1.0f64).exp(), epsilon = 2e-2);
    }

    #[test]
    fn sojourn_tail_decreases() {
        let chain = auto_chain(&params(0.5));
        let mut prev = 1.0;
        for i in 1..=10 {
            let y = i as f64 * 0.7;
            let t = oracle_sojourn_tail(&chain, 2, y).unwrap();
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn start_state_above_half_cap_is_rejected() {
        let chain = build_chain(&params(0.5), 10).unwrap();
        assert!(matches!(
            oracle_nu(&chain, 6),
            Err(Error::EnlargeStateCap(_))
        ));
    }

    #[test]
    fn kappa_mean_matches_closed_form() {
        // E kappa = (1+rho)/(1-rho).
        let chain = auto_chain(&params(0.5));
        let trunc = TruncationConfig::new(1e-10, 400, 1e-12).unwrap();
        let mut mean = 0.0;
        for n0 in 0..=trunc.outer_range(0.5) {
            let w = 0.5 * 0.5f64.powi(n0 as i32);
            mean += w * kappa_until_residual(&chain, n0, 1e-13).unwrap().mean();
        }
        assert_abs_diff_eq!(mean, 3.0, epsilon = 1e-4);
    }
}
