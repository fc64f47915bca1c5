//! Adaptive recovery of signals observed in complex Gaussian noise on `Z^d`.
//!
//! The estimator fits, at each anchor, a filter minimising the sup-norm of
//! the residual's finite Fourier transform under an `l1` bound on the
//! filter's own transform. Around it sit the field algebra, the min-max
//! solver, certificate constructions for structured signal classes and a
//! Monte Carlo harness.

pub mod adaptive;
pub mod error;
pub mod field;
pub mod harness;
pub mod signals;
pub mod solver;

pub use adaptive::{denoise_point, predict_point, risk_bound, DenoiseSetup, Estimate, Mode};
pub use error::{Error, Result};
pub use field::{convolve, dft, idft, norm, star_norm, Field, Filter, FilterKind, GridBox, Norm, Spectrum};
pub use solver::{solve, Instance, SolveResult, SolverOptions};
