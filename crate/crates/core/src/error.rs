//! Error type shared by all modules.

use thiserror::Error;

/// Errors surfaced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Load outside the stability region (0, 1) or non-finite.
    #[error("load must satisfy 0 < rho < 1, got {value}")]
    InvalidLoad { value: f64 },

    /// A parameter failed its domain constraint.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// (n0, kappa, nu) do not describe a realizable tagged-customer path.
    #[error("inconsistent path (n0={n0}, kappa={kappa}, nu={nu}): {reason}")]
    InconsistentPath {
        n0: u64,
        kappa: u64,
        nu: u64,
        reason: &'static str,
    },

    /// A probability table violated its invariants.
    #[error("invalid probability table: {0}")]
    InvalidPmf(String),

    /// A requested index exceeds what a precomputed table covers.
    #[error("requested index {requested} exceeds capacity {capacity}")]
    Capacity { requested: usize, capacity: usize },

    /// A truncated sum could not reach its target tail mass.
    #[error("truncation target {target:e} unreachable at cap {cap}; achieved {achieved:e}")]
    Truncation {
        target: f64,
        achieved: f64,
        cap: usize,
    },

    /// The quadrature rule failed its total-mass self check.
    #[error("quadrature self-check failed: {0}")]
    QuadratureDiagnostic(String),

    /// Recursion and quadrature moments disagree beyond tolerance even at the
    /// highest configured precision.
    #[error(
        "moment cross-check failed at index {index}: recursion {recursion:e} vs \
         quadrature {quadrature:e} at {bits} mantissa bits"
    )]
    PrecisionEscalation {
        index: usize,
        recursion: f64,
        quadrature: f64,
        bits: u32,
    },

    /// Angle outside [0, pi].
    #[error("theta = {theta} outside [0, pi]")]
    ThetaRange { theta: f64 },

    /// Generating-function argument at or beyond a singularity.
    #[error("generating function singular at z = {z}: {reason}")]
    Singularity { z: f64, reason: &'static str },

    /// Series argument outside the disc of convergence.
    #[error("series divergent at z = {z}: requires |z| < {radius}")]
    Divergence { z: f64, radius: f64 },

    /// Argument beyond the branch point of the busy-period root.
    #[error("z = {z} beyond the branch point z0 = {z0}")]
    BranchCut { z: f64, z0: f64 },

    /// The truncated chain is too small for the requested computation.
    #[error("state cap too small: {0}; enlarge the chain")]
    EnlargeStateCap(String),

    /// Decay diagnostics asked over an unusable index window.
    #[error("diagnostics window unusable: {0}")]
    DiagnosticsWindow(String),
}
