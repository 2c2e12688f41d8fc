//! Sum-capacity bounds for binary CDMA systems with near-far power
//! fluctuation.
//!
//! The library evaluates the asymptotic lower bound, the conjectured upper
//! bound, and the replica (Tanaka) upper bound for the per-user sum capacity
//! of a binary CDMA system whose received amplitudes fluctuate around one
//! with Gaussian spread `rho`, solves the underlying replica fixed point,
//! validates the Marchenko–Pastur spectral facts the bounds rest on, and
//! cross-checks everything against an exact-density Monte-Carlo mutual
//! information estimate at small system sizes.
//!
//! Modules:
//! - [`scalar`]: entropies, BPSK capacity, Gauss–Hermite quadrature.
//! - [`spectral`]: ±1 signature matrices, Gram spectra, Marchenko–Pastur law.
//! - [`tanaka`]: replica fixed point and the Tanaka capacity formula.
//! - [`bounds`]: the headline capacity bounds and parameter conversions.
//! - [`mi`]: finite-size Monte-Carlo mutual information oracle.

pub mod bounds;
pub mod error;
pub mod mi;
pub mod scalar;
pub mod spectral;
pub mod tanaka;

pub use error::{Error, Result};
