//! Tagged-customer analysis of the M/M/1 processor-sharing queue.
//!
//! A tagged customer arriving at a stationary M/M/1-PS queue with load ρ sees
//! `n0` customers in service. While it is served, `alpha` further customers
//! arrive and `delta` customers depart; it leaves at the `kappa`-th event of
//! the embedded jump chain with `nu` customers behind. This crate computes the
//! distributions of these quantities by four independent routes:
//!
//! - spectral formulas built on the Pollaczek polynomials `Q_n` and their
//!   orthogonality measure dψ ([`pollaczek`], [`spectral`]),
//! - a truncated absorbed Markov chain iterated exactly ([`markov`]),
//! - a seeded Monte Carlo simulator of the embedded chain ([`sim`]),
//! - closed-form busy-period approximations and tail asymptotics
//!   ([`busy`], [`asymptotics`]).
//!
//! The routes are interchangeable estimators of the common alpha/delta
//! distribution and are registered by name in [`estimators`]; [`validate`]
//! cross-checks them against each other.

pub mod asymptotics;
pub mod busy;
pub mod error;
pub mod estimators;
pub mod markov;
pub mod model;
pub mod pmf;
pub mod pollaczek;
pub mod sim;
pub mod spectral;
pub mod validate;

pub(crate) mod extprec;

pub use error::Error;
pub use model::{alpha_delta_from_path, QueueParameters, TruncationConfig};
pub use pmf::Pmf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
