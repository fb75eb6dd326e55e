//! Minimal excess test loss of `tau`-overfitting linear models.
//!
//! A linear model trained to a fraction `tau` of the noise floor cannot
//! generalize arbitrarily well: its expected excess loss is at least
//! `sigma^2 (n/p)(1 - sqrt(tau))^2`, and under Marchenko–Pastur asymptotics
//! the exact minimal value has a closed analytic form. This crate computes
//! both sides of that story:
//!
//! * [`mp`] — the analytic layer: MP density, Stieltjes transform and
//!   derivative, the fixed-point inversion `lambda^2 m'(-lambda) = tau`, the
//!   asymptotic minimal excess loss, and every lower bound (universal,
//!   legacy, small-`tau`).
//! * [`solver`] — the exact per-instance layer: whitening, spectral
//!   decomposition of the Gram matrix, and root-finding on the Lagrange
//!   multiplier, plus an independent brute-force oracle for small problems.
//! * [`sim`] — seeded Monte Carlo experiments comparing the empirical
//!   minimum against the analytic value and the bounds, and the analytic
//!   figure/curve tables.
//! * [`ineq`] — standalone numeric verifiers for the scalar inequalities
//!   behind the proofs (AM–HM, Chebyshev sum, the `g >= 1` function, the
//!   deterministic spectrum bound and its invalid-variant counterexample).
//! * [`quad`] — adaptive Gauss–Kronrod quadrature, the independent oracle
//!   route for all closed forms.
//! * [`rng`] — the pinned generator stack (SplitMix64 seeding,
//!   xoshiro256++, Box–Muller) that makes every experiment reproducible.
//!
//! The crate is `no_std` (with `alloc`): all numerics live here, while IO,
//! CSV, and the command-line interface live in the companion `overfit-cli`
//! crate.
//!
//! ```
//! use overfit_core::mp::{analytic_excess_loss, AspectRatio, OverfitFraction};
//!
//! let tau = OverfitFraction::new(0.5).unwrap();
//! let gamma = AspectRatio::new(1.0).unwrap();
//! // At the interpolation peak: 1/(4 tau) + tau/4 - 1/2 = 0.125.
//! let loss = analytic_excess_loss(tau, gamma, 1.0).unwrap().finite().unwrap();
//! assert!((loss - 0.125).abs() < 1e-8);
//! ```

#![no_std]
#![warn(missing_docs)]
// `!(x > 0.0)` is the NaN-rejecting comparison idiom used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ineq;
pub mod mp;
pub mod quad;
pub mod rng;
pub mod sim;
pub mod solver;

pub use mp::{AspectRatio, ExcessValue, MpModel, OverfitFraction};
pub use sim::{ExcessLossReport, ExperimentConfig};
pub use solver::{ProblemInstance, ProjectedNoise, SolveResult, SolveStatus, Spectrum};
