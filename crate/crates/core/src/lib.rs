//! Pivotal-variable detection (PVD) and two-stage covariance estimation for
//! high-dimensional factor models.
//!
//! The library estimates a p×p covariance matrix Σ = 𝔹 + Σ_u, where the
//! low-rank part 𝔹 = BBᵀ comes from a small number of latent factors that
//! load on a subset J of "pivotal" variables, and Σ_u is sparse. The
//! workflow is:
//!
//! 1. screen for pivotal variables with the row-energy statistic and a
//!    ridge-ratio estimate of |J| ([`pvd`]),
//! 2. fit a low-rank + sparse model on the detected block with LOREC
//!    ([`lorec`]) or POET ([`poet`]),
//! 3. threshold the remaining entries and reassemble the full estimate
//!    ([`pipeline`]).
//!
//! [`simlab`] holds the generative models, evaluation metrics and the
//! seeded Monte-Carlo runner used by the reproduction commands, and
//! [`selftest`] runs the end-to-end acceptance checks.

pub mod error;
pub mod linalg;
pub mod lorec;
pub mod moments;
pub mod pipeline;
pub mod poet;
pub mod pvd;
pub mod selftest;
pub mod simlab;
pub mod thresholding;

pub use error::{Error, Result};
pub use linalg::{EigenDecomposition, SymMatrix};
pub use moments::DataMatrix;
pub use pipeline::CovEstimate;
pub use pvd::{PvdConfig, PvdResult};
