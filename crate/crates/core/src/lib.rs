//! Monte Carlo and spectral toolkit for trace statistics of one-dimensional
//! random Schrodinger operators `H = -1/2 d^2/dx^2 + V + xi` on the full line,
//! the half-line, or a bounded interval, where `xi` is stationary Gaussian
//! noise described by a covariance kernel.
//!
//! The crate has two independent routes to the same observables:
//!
//! * a path-sampling route ([`feynman_kac`]) that never samples the noise:
//!   Gaussian functionals of Brownian bridge local times give the mean and
//!   variance of the semigroup trace directly;
//! * a matrix route ([`spectrum`]) that discretizes the operator, samples the
//!   noise on the grid, and diagonalizes.
//!
//! Supporting modules: [`noise`] (covariance models and their bilinear form on
//! step functions), [`domain`] (transition kernels with reflecting images),
//! [`paths`] (bridge and free-path samplers, local times, survival weights),
//! [`localtime`] (occupation-norm scaling studies), [`airy`] (Airy function,
//! Airy kernel and closed-form edge-variance benchmarks), and [`rigidity`]
//! (exponent fits, growth thresholds, and report assembly).

pub mod airy;
pub mod domain;
pub mod error;
pub mod feynman_kac;
pub mod localtime;
pub mod noise;
pub mod paths;
pub mod potential;
pub mod rigidity;
pub mod rng;
pub mod scan;
pub mod spectrum;
pub mod stats;
pub mod stepfn;

pub use error::{Error, Result};
pub use stepfn::StepFunction;
