//! Closed-form Marchenko–Pastur analytics.
//!
//! Everything here is a function of the aspect ratio `gamma = lim n/p` and
//! the overfit fraction `tau` (training loss over the noise floor). The
//! central objects are the Stieltjes transform of the MP law and its
//! derivative, evaluated on the negative real axis:
//!
//! ```text
//! m(-z; gamma)  = int 1/(s + z)   dMP_gamma(s)
//! m'(-z; gamma) = int 1/(s + z)^2 dMP_gamma(s)
//! ```
//!
//! from which the constraint function `f(lambda) = lambda^2 m'(-lambda)`,
//! the excess-loss kernel `E(lambda) = m(-lambda) - lambda m'(-lambda)`, and
//! the asymptotic minimal excess loss `sigma^2 gamma E(f^-1(tau))` follow.
//!
//! # Numerical form
//!
//! With `u = 1 - gamma + z` and `S = sqrt(u^2 + 4 gamma z)`, the textbook
//! expression `m = (-u + S) / (2 gamma z)` loses all precision for small `z`
//! when `u > 0`. The implementations below use the algebraically equivalent
//! forms
//!
//! ```text
//! m  = 2 / (S + u)                            (u >= 0)
//! m' = 2 (S + u + 2 gamma) / (S (S + u)^2)    (u >= 0)
//! E  = 2 / (S (S + u + 2 gamma))              (all u)
//! ```
//!
//! which are subtraction-free, plus mirrored branches for `u < 0`. Each is
//! cross-checked against adaptive quadrature of the density in the test
//! suite; the quadrature route is also exported because it is the
//! independent oracle for the verification command.

use alloc::vec::Vec;
use core::f64::consts::PI;
use libm::{asin, cbrt, cos, fabs, sin, sqrt};
use thiserror::Error;

use crate::quad;

/// Relative tolerance used for the built-in density quadratures.
const QUAD_REL_TOL: f64 = 1e-11;
/// Absolute tolerance floor for the built-in density quadratures.
const QUAD_ABS_TOL: f64 = 1e-13;
/// Subdivision budget for the built-in density quadratures.
const QUAD_MAX_SPLIT: usize = 400;

/// Fixed-point solve: stop when `|f(lambda) - tau|` drops below this.
const FIXED_POINT_RESIDUAL_TOL: f64 = 1e-12;
/// Fixed-point solve: stop when the bracket shrinks below `tol * (1 + lambda)`.
const FIXED_POINT_WIDTH_TOL: f64 = 1e-14;

/// Errors from the Marchenko–Pastur layer.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MpError {
    /// Aspect ratio outside `(0, inf)`.
    #[error("aspect ratio must be positive and finite, got {0}")]
    InvalidGamma(f64),
    /// Overfit fraction outside `[0, 1]`.
    #[error("overfit fraction must lie in [0, 1], got {0}")]
    InvalidTau(f64),
    /// Noise floor must be positive.
    #[error("sigma^2 must be positive, got {0}")]
    InvalidSigma2(f64),
    /// Stieltjes transforms are only evaluated on the negative real axis.
    #[error("argument must be positive, got {0}")]
    NonPositiveArgument(f64),
    /// No `lambda >= 0` satisfies the fixed point: `tau` is below the mass of
    /// the zero atom, where the excess loss is infinite.
    #[error("tau = {tau} lies below the zero-eigenvalue mass {atom}: no fixed point exists")]
    InfeasibleTau {
        /// Requested overfit fraction.
        tau: f64,
        /// Mass of the atom at zero, `(1 - 1/gamma)_+`.
        atom: f64,
    },
    /// `E(0, gamma)` diverges (or degenerates) at and above the
    /// interpolation peak; callers must take the quadrature route instead.
    #[error("excess integral diverges at lambda = 0 for gamma = {gamma} >= 1")]
    DivergentAtZero {
        /// Aspect ratio at which the evaluation was attempted.
        gamma: f64,
    },
    /// The peak closed form has a `1/(4 tau)` pole at `tau = 0`.
    #[error("the excess loss at the interpolation peak diverges as tau -> 0")]
    PeakDivergence,
    /// The small-tau bound is only stated for `gamma < 1`, `tau <= 1 - gamma`.
    #[error("(tau = {tau}, gamma = {gamma}) outside the domain of the small-tau bound")]
    SmallTauOutOfDomain {
        /// Requested overfit fraction.
        tau: f64,
        /// Requested aspect ratio.
        gamma: f64,
    },
}

/// Limiting sample-to-parameter ratio `gamma = lim n/p`, positive and finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AspectRatio(f64);

impl AspectRatio {
    /// Validate `gamma > 0` and finite.
    pub fn new(gamma: f64) -> Result<Self, MpError> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(Self(gamma))
        } else {
            Err(MpError::InvalidGamma(gamma))
        }
    }

    /// The ratio as a plain float.
    pub fn get(self) -> f64 {
        self.0
    }
}

/// Training loss divided by the noise floor, in `[0, 1]`.
/// `tau = 0` is interpolation, `tau = 1` is training at the noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverfitFraction(f64);

impl OverfitFraction {
    /// Validate `0 <= tau <= 1`.
    pub fn new(tau: f64) -> Result<Self, MpError> {
        if (0.0..=1.0).contains(&tau) {
            Ok(Self(tau))
        } else {
            Err(MpError::InvalidTau(tau))
        }
    }

    /// The fraction as a plain float.
    pub fn get(self) -> f64 {
        self.0
    }
}

/// The MP(gamma) law: support endpoints and the mass of the atom at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpModel {
    gamma: AspectRatio,
    support_lo: f64,
    support_hi: f64,
    atom_at_zero: f64,
}

impl MpModel {
    /// Build the law for a given aspect ratio.
    pub fn new(gamma: AspectRatio) -> Self {
        let g = gamma.get();
        let root = sqrt(g);
        Self {
            gamma,
            support_lo: (1.0 - root) * (1.0 - root),
            support_hi: (1.0 + root) * (1.0 + root),
            atom_at_zero: (1.0 - 1.0 / g).max(0.0),
        }
    }

    /// Aspect ratio of the law.
    pub fn gamma(&self) -> AspectRatio {
        self.gamma
    }

    /// Lower edge of the continuous support, `(1 - sqrt(gamma))^2`.
    pub fn support_lo(&self) -> f64 {
        self.support_lo
    }

    /// Upper edge of the continuous support, `(1 + sqrt(gamma))^2`.
    pub fn support_hi(&self) -> f64 {
        self.support_hi
    }

    /// Mass of the point mass at zero, `(1 - 1/gamma)_+`.
    pub fn atom_at_zero(&self) -> f64 {
        self.atom_at_zero
    }
}

/// Mass of the atom at zero for a bare ratio, `(1 - 1/gamma)_+`.
pub fn atom_mass(gamma: AspectRatio) -> f64 {
    (1.0 - 1.0 / gamma.get()).max(0.0)
}

/// Solution of `f(lambda, gamma) = tau`.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointSolution {
    /// The multiplier; `f64::INFINITY` exactly when `tau = 1`.
    pub lambda_star: f64,
    /// Overfit fraction the solve targeted.
    pub tau: OverfitFraction,
    /// Aspect ratio the solve targeted.
    pub gamma: AspectRatio,
    /// Achieved `|f(lambda_star) - tau|`.
    pub residual: f64,
}

/// A loss value that may be the divergence sentinel. Kept as an explicit
/// variant (never an IEEE infinity in serialized output).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExcessValue {
    /// Finite loss value.
    Finite(f64),
    /// The `+inf` sentinel of the infeasible regime.
    Infinite,
}

impl ExcessValue {
    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            ExcessValue::Finite(v) => Some(v),
            ExcessValue::Infinite => None,
        }
    }

    /// Collapse to an `f64`, mapping the sentinel to IEEE infinity.
    pub fn to_f64(self) -> f64 {
        match self {
            ExcessValue::Finite(v) => v,
            ExcessValue::Infinite => f64::INFINITY,
        }
    }
}

/// Which form of the universal lower bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVariant {
    /// `sigma^2 (n/p) (1 - sqrt(tau))^2` — the canonical bound.
    Sqrt,
    /// `sigma^2 (n/p) (1 - tau^(1/3))^4` — superseded earlier form, kept for
    /// comparison; pointwise dominated by [`BoundVariant::Sqrt`].
    CubeRootLegacy,
}

/// Closed forms saturate to their leading asymptote beyond this argument;
/// the dropped `O(1/z)` corrections are below f64 resolution there.
const ASYMPTOTE_Z: f64 = 1e100;

/// `u = 1 - gamma + z` and `S = sqrt(u^2 + 4 gamma z)`, the two quantities
/// every closed form below is built from. Callers keep `z` below
/// [`ASYMPTOTE_Z`] so `u^2` cannot overflow on the `u >= 0` paths.
#[inline]
fn edge_terms(z: f64, gamma: f64) -> (f64, f64) {
    let u = 1.0 - gamma + z;
    let s = sqrt(u * u + 4.0 * gamma * z);
    (u, s)
}

/// `u/gamma` and `S/gamma` for the `u < 0` regime (`gamma > 1 + z`), where
/// the normalized quantities satisfy `-1 < u/gamma < 0` and
/// `S/gamma < sqrt(5)`, so nothing can overflow for any valid `gamma`.
#[inline]
fn edge_terms_normalized(z: f64, gamma: f64) -> (f64, f64) {
    let un = (1.0 - gamma + z) / gamma;
    let sn = sqrt(un * un + 4.0 * z / gamma);
    (un, sn)
}

/// Density of the continuous part of MP(gamma) at `x`.
///
/// Returns `(1 / (gamma 2 pi x)) sqrt((b - x)(x - a))` inside the support and
/// `0` outside. The atom at zero is *not* included; read it from
/// [`MpModel::atom_at_zero`].
pub fn mp_density(x: f64, model: &MpModel) -> f64 {
    if x <= 0.0 || x < model.support_lo || x > model.support_hi {
        return 0.0;
    }
    let gamma = model.gamma.get();
    sqrt((model.support_hi - x) * (x - model.support_lo)) / (gamma * 2.0 * PI * x)
}

/// Stieltjes transform `m(-z; gamma)` for `z > 0`.
///
/// Equals `int 1/(s + z) dMP_gamma(s)` including the atom contribution
/// `(1 - 1/gamma)_+ / z`.
pub fn stieltjes_m(z: f64, gamma: AspectRatio) -> Result<f64, MpError> {
    if !(z > 0.0) {
        return Err(MpError::NonPositiveArgument(z));
    }
    let g = gamma.get();
    if z >= ASYMPTOTE_Z {
        // m ~ (total mass)/z; the mean/z^2 correction is below resolution.
        return Ok(1.0 / z);
    }
    if 1.0 - g + z >= 0.0 {
        let (u, s) = edge_terms(z, g);
        Ok(2.0 / (s + u))
    } else {
        let (un, sn) = edge_terms_normalized(z, g);
        Ok((sn - un) / (2.0 * z))
    }
}

/// Derivative of the Stieltjes transform, `m'(-z; gamma)` for `z > 0`.
///
/// Equals `int 1/(s + z)^2 dMP_gamma(s)`; strictly positive.
pub fn stieltjes_m_prime(z: f64, gamma: AspectRatio) -> Result<f64, MpError> {
    if !(z > 0.0) {
        return Err(MpError::NonPositiveArgument(z));
    }
    let g = gamma.get();
    if z >= ASYMPTOTE_Z {
        return Ok(1.0 / (z * z));
    }
    if 1.0 - g + z >= 0.0 {
        let (u, s) = edge_terms(z, g);
        Ok(2.0 * (s + u + 2.0 * g) / (s * (s + u) * (s + u)))
    } else {
        let (un, sn) = edge_terms_normalized(z, g);
        let d = sn - un;
        Ok((sn + un + 2.0) * d * d / (8.0 * z * z * sn))
    }
}

/// Constraint function `f(lambda, gamma) = lambda^2 m'(-lambda; gamma)`.
///
/// Equals `int (lambda / (s + lambda))^2 dMP_gamma(s)`: continuous, strictly
/// increasing in `lambda`, with `f(0) = (1 - 1/gamma)_+` and `f(inf) = 1`.
pub fn f_constraint(lambda: f64, gamma: AspectRatio) -> f64 {
    let g = gamma.get();
    if lambda == 0.0 {
        return atom_mass(gamma);
    }
    if lambda >= ASYMPTOTE_Z {
        // f = 1 - O(1/lambda) rounds to 1 long before this threshold.
        return 1.0;
    }
    debug_assert!(lambda > 0.0, "f_constraint requires lambda >= 0");
    if 1.0 - g + lambda >= 0.0 {
        let (u, s) = edge_terms(lambda, g);
        // Evaluate as 2 r^2 (S + u + 2 gamma)/S with r = lambda/(S + u):
        // every factor stays inside f64 range down to subnormal lambda,
        // where the direct lambda^2/(S (S + u)^2) form underflows to 0/0.
        let r = lambda / (s + u);
        2.0 * r * r * ((s + u + 2.0 * g) / s)
    } else {
        // lambda^2 cancels against the 1/z^2 of m'; exact down to lambda = 0.
        let (un, sn) = edge_terms_normalized(lambda, g);
        let d = sn - un;
        (sn + un + 2.0) * d * d / (8.0 * sn)
    }
}

/// Excess-loss kernel `E(lambda, gamma) = m(-lambda) - lambda m'(-lambda)`.
///
/// Equals `int s/(s + lambda)^2 dMP_gamma(s)`, to which the atom contributes
/// nothing; computed via the subtraction-free identity
/// `E = 2 / (S (S + u + 2 gamma))`.
///
/// Errors with [`MpError::DivergentAtZero`] for `lambda = 0, gamma >= 1`:
/// at `gamma = 1` the integral truly diverges at the lower edge, and for
/// `gamma > 1` the closed form degenerates to `0/0` (use
/// [`excess_e_quadrature`] for the boundary value).
pub fn excess_e(lambda: f64, gamma: AspectRatio) -> Result<f64, MpError> {
    let g = gamma.get();
    if lambda == 0.0 && g >= 1.0 {
        return Err(MpError::DivergentAtZero { gamma: g });
    }
    if !(lambda >= 0.0) {
        return Err(MpError::NonPositiveArgument(lambda));
    }
    let (u, s) = edge_terms(lambda, g);
    Ok(2.0 / (s * (s + u + 2.0 * g)))
}

/// Solve the fixed point `f(lambda, gamma) = tau` by bracketing bisection.
///
/// `lambda = 0` is returned exactly at `tau = (1 - 1/gamma)_+` and the
/// `+inf` sentinel exactly at `tau = 1`; below the atom mass the fixed point
/// does not exist and [`MpError::InfeasibleTau`] is returned.
pub fn solve_fixed_point(
    tau: OverfitFraction,
    gamma: AspectRatio,
) -> Result<FixedPointSolution, MpError> {
    let t = tau.get();
    let atom = atom_mass(gamma);
    if t < atom {
        return Err(MpError::InfeasibleTau { tau: t, atom });
    }
    if t == 1.0 {
        return Ok(FixedPointSolution {
            lambda_star: f64::INFINITY,
            tau,
            gamma,
            residual: 0.0,
        });
    }
    if t == atom {
        return Ok(FixedPointSolution {
            lambda_star: 0.0,
            tau,
            gamma,
            residual: 0.0,
        });
    }

    // Bracket: double from 1 until f(hi) >= tau. f -> 1 like 1 - O(1/lambda),
    // so this terminates in well under 100 doublings for any tau < 1.
    let mut hi = 1.0;
    let mut doublings = 0;
    while f_constraint(hi, gamma) < t {
        hi *= 2.0;
        doublings += 1;
        assert!(doublings < 200, "fixed-point bracket failed to close");
    }
    let mut lo = 0.0;
    let mut mid = 0.5 * hi;
    let mut residual = f64::INFINITY;
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let value = f_constraint(mid, gamma);
        residual = fabs(value - t);
        if residual <= FIXED_POINT_RESIDUAL_TOL
            || (hi - lo) <= FIXED_POINT_WIDTH_TOL * (1.0 + mid)
        {
            break;
        }
        if value < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(FixedPointSolution {
        lambda_star: mid,
        tau,
        gamma,
        residual,
    })
}

/// Asymptotic minimal excess loss `sigma^2 gamma E(f^-1(tau, gamma), gamma)`.
///
/// Returns the `+inf` sentinel when `tau` is below the zero-atom mass (and at
/// the `tau = 0, gamma = 1` pole), `0` at `tau = 1`, and the finite
/// fixed-point value otherwise. At the `tau = atom` boundary for `gamma > 1`
/// the `lambda -> 0` limit is taken by quadrature over the bulk.
pub fn analytic_excess_loss(
    tau: OverfitFraction,
    gamma: AspectRatio,
    sigma2: f64,
) -> Result<ExcessValue, MpError> {
    if !(sigma2 > 0.0) {
        return Err(MpError::InvalidSigma2(sigma2));
    }
    let g = gamma.get();
    let t = tau.get();
    let atom = atom_mass(gamma);
    if t < atom {
        return Ok(ExcessValue::Infinite);
    }
    if t == 1.0 {
        return Ok(ExcessValue::Finite(0.0));
    }
    if t == atom {
        // Boundary of feasibility: lambda_star = 0.
        return if g < 1.0 {
            Ok(ExcessValue::Finite(sigma2 * g * excess_e(0.0, gamma)?))
        } else if g == 1.0 {
            // Interpolation at the peak: the 1/(4 tau) pole.
            Ok(ExcessValue::Infinite)
        } else {
            Ok(ExcessValue::Finite(
                sigma2 * g * excess_e_quadrature(0.0, gamma),
            ))
        };
    }
    let sol = solve_fixed_point(tau, gamma)?;
    Ok(ExcessValue::Finite(
        sigma2 * g * excess_e(sol.lambda_star, gamma)?,
    ))
}

/// Universal lower bound on the expected excess loss of a `tau`-overfitting
/// linear model with `n` samples and `p` features.
pub fn universal_bound(
    tau: OverfitFraction,
    n: usize,
    p: usize,
    sigma2: f64,
    variant: BoundVariant,
) -> f64 {
    universal_bound_ratio(tau, n as f64 / p as f64, sigma2, variant)
}

/// [`universal_bound`] with the sample-to-parameter ratio supplied directly
/// (used on asymptotic grids where `n/p := gamma`).
pub fn universal_bound_ratio(
    tau: OverfitFraction,
    ratio: f64,
    sigma2: f64,
    variant: BoundVariant,
) -> f64 {
    let t = tau.get();
    match variant {
        BoundVariant::Sqrt => {
            let factor = 1.0 - sqrt(t);
            sigma2 * ratio * factor * factor
        }
        BoundVariant::CubeRootLegacy => {
            let factor = 1.0 - cbrt(t);
            let sq = factor * factor;
            sigma2 * ratio * sq * sq
        }
    }
}

/// Small-`tau` lower bound `sigma^2 gamma/(1-gamma) (1 - sqrt(tau/(1-gamma)))^2`,
/// stated for `gamma in (0, 1)` and `tau in [0, 1 - gamma]` only.
pub fn small_tau_bound(
    tau: OverfitFraction,
    gamma: AspectRatio,
    sigma2: f64,
) -> Result<f64, MpError> {
    let g = gamma.get();
    let t = tau.get();
    if g >= 1.0 || t > 1.0 - g {
        return Err(MpError::SmallTauOutOfDomain { tau: t, gamma: g });
    }
    let factor = 1.0 - sqrt(t / (1.0 - g));
    Ok(sigma2 * g / (1.0 - g) * factor * factor)
}

/// Exact excess loss at the interpolation peak `gamma = 1`:
/// `sigma^2 (1/(4 tau) + tau/4 - 1/2)`. Diverges at `tau = 0`.
pub fn peak_excess_loss(tau: OverfitFraction, sigma2: f64) -> Result<f64, MpError> {
    let t = tau.get();
    if t == 0.0 {
        return Err(MpError::PeakDivergence);
    }
    Ok(sigma2 * (1.0 / (4.0 * t) + t / 4.0 - 0.5))
}

/// One grid point of [`monotonicity_diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityPoint {
    /// Aspect ratio of the grid point.
    pub gamma: f64,
    /// `E(f^-1(tau, gamma), gamma)`, or `None` when `(tau, gamma)` is
    /// infeasible and the point was skipped.
    pub excess: Option<f64>,
}

/// Evaluate `E(f^-1(tau, gamma), gamma)` along a gamma grid.
///
/// The caller asserts strict increase along the sorted grid; infeasible
/// pairs are recorded with `excess: None` rather than aborting the sweep.
pub fn monotonicity_diagnostic(
    tau: OverfitFraction,
    gamma_grid: &[AspectRatio],
) -> Vec<MonotonicityPoint> {
    gamma_grid
        .iter()
        .map(|&gamma| {
            let g = gamma.get();
            let t = tau.get();
            let atom = atom_mass(gamma);
            let excess = if t < atom {
                None
            } else if t == 1.0 {
                Some(0.0)
            } else if t == atom {
                if g < 1.0 {
                    excess_e(0.0, gamma).ok()
                } else if g == 1.0 {
                    None // tau = 0 at the peak: diverges
                } else {
                    Some(excess_e_quadrature(0.0, gamma))
                }
            } else {
                solve_fixed_point(tau, gamma)
                    .and_then(|sol| excess_e(sol.lambda_star, gamma))
                    .ok()
            };
            MonotonicityPoint { gamma: g, excess }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Quadrature route: integrals of the density, independent of the closed forms
// above. Used by the verification suites as an oracle and at the tau = atom
// boundary for gamma > 1 where the closed form for E degenerates.
// ---------------------------------------------------------------------------

/// Integrate `weight(s) rho(s) ds` over the continuous support, where `rho`
/// is the MP density. The substitution `s = a + (b - a) sin^2(theta)`
/// removes both square-root edge singularities:
///
/// ```text
/// rho(s) ds = (b - a)^2 sin^2(theta) cos^2(theta) / (pi gamma s) dtheta
/// ```
fn integrate_weighted_density<F: Fn(f64) -> f64>(model: &MpModel, weight: F) -> f64 {
    integrate_weighted_density_upto(model, weight, core::f64::consts::FRAC_PI_2)
}

/// As [`integrate_weighted_density`] but stopping at `theta_hi`, i.e. an
/// integral over `[a, a + (b - a) sin^2(theta_hi)]`.
fn integrate_weighted_density_upto<F: Fn(f64) -> f64>(
    model: &MpModel,
    weight: F,
    theta_hi: f64,
) -> f64 {
    let a = model.support_lo;
    let width = model.support_hi - model.support_lo;
    let g = model.gamma.get();
    let integrand = move |theta: f64| {
        let sin_t = sin(theta);
        let cos_t = cos(theta);
        let sin_sq = sin_t * sin_t;
        let x = a + width * sin_sq;
        // At gamma = 1 the lower edge sits at 0 and sin^2/x cancels exactly.
        let base = if a == 0.0 {
            width * cos_t * cos_t / (PI * g)
        } else {
            width * width * sin_sq * cos_t * cos_t / (PI * g * x)
        };
        base * weight(x)
    };
    quad::integrate(integrand, 0.0, theta_hi, QUAD_REL_TOL, QUAD_ABS_TOL, QUAD_MAX_SPLIT).value
}

/// Total mass of the continuous part, `int rho`. Adding the atom mass must
/// give 1; the verification suite asserts this.
pub fn density_mass(model: &MpModel) -> f64 {
    integrate_weighted_density(model, |_| 1.0)
}

/// Quadrature evaluation of the Stieltjes transform: bulk integral of
/// `1/(s + z)` plus the atom contribution `(1 - 1/gamma)_+ / z`.
pub fn stieltjes_m_quadrature(z: f64, gamma: AspectRatio) -> Result<f64, MpError> {
    if !(z > 0.0) {
        return Err(MpError::NonPositiveArgument(z));
    }
    let model = MpModel::new(gamma);
    let bulk = integrate_weighted_density(&model, |s| 1.0 / (s + z));
    Ok(bulk + model.atom_at_zero() / z)
}

/// Quadrature evaluation of the Stieltjes derivative: bulk integral of
/// `1/(s + z)^2` plus the atom contribution `(1 - 1/gamma)_+ / z^2`.
pub fn stieltjes_m_prime_quadrature(z: f64, gamma: AspectRatio) -> Result<f64, MpError> {
    if !(z > 0.0) {
        return Err(MpError::NonPositiveArgument(z));
    }
    let model = MpModel::new(gamma);
    let bulk = integrate_weighted_density(&model, |s| 1.0 / ((s + z) * (s + z)));
    Ok(bulk + model.atom_at_zero() / (z * z))
}

/// Quadrature evaluation of `E(lambda, gamma) = int s/(s + lambda)^2 rho(s) ds`
/// over the bulk (the atom contributes nothing). Finite at `lambda = 0` for
/// `gamma > 1`, where the closed form degenerates.
pub fn excess_e_quadrature(lambda: f64, gamma: AspectRatio) -> f64 {
    let model = MpModel::new(gamma);
    integrate_weighted_density(&model, |s| {
        let denom = s + lambda;
        s / (denom * denom)
    })
}

/// Cumulative distribution function of MP(gamma) at `x`, atom included.
pub fn mp_cdf(x: f64, model: &MpModel) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x <= model.support_lo {
        return model.atom_at_zero;
    }
    if x >= model.support_hi {
        return 1.0;
    }
    let width = model.support_hi - model.support_lo;
    let theta_hi = asin(sqrt((x - model.support_lo) / width));
    model.atom_at_zero + integrate_weighted_density_upto(model, |_| 1.0, theta_hi)
}

/// Kolmogorov distance between the empirical CDF of `sorted_eigenvalues`
/// (ascending) and the MP(gamma) CDF.
pub fn kolmogorov_distance(sorted_eigenvalues: &[f64], model: &MpModel) -> f64 {
    let n = sorted_eigenvalues.len();
    assert!(n > 0, "empty spectrum");
    let mut worst = 0.0f64;
    for (i, &x) in sorted_eigenvalues.iter().enumerate() {
        debug_assert!(i == 0 || sorted_eigenvalues[i - 1] <= x, "not sorted");
        let theory = mp_cdf(x, model);
        let below = i as f64 / n as f64;
        let above = (i + 1) as f64 / n as f64;
        worst = worst.max(fabs(theory - below)).max(fabs(theory - above));
    }
    worst
}
