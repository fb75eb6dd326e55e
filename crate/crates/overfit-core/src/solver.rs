//! Exact per-instance minimal excess linear loss.
//!
//! For a regression instance with features `Phi`, covariance `Sigma`, targets
//! `y` and optimal coefficient `beta_star`, the minimal excess linear loss of
//! `tau`-overfitting models is the value of
//!
//! ```text
//! min ||b||^2   s.t.   (1/n) ||W b - xi||^2 <= tau sigma^2
//! ```
//!
//! with whitened features `W = Phi Sigma^(-1/2)` and total noise
//! `xi = y - Phi beta_star`. Diagonalizing `G = W W^T / p` with eigenvalues
//! `lambda_1 >= ... >= lambda_n` and noise coordinates `c_i = <u_i, xi>`
//! reduces the problem to one dimension: the dual-optimal point at ridge
//! scale `lambda` has residual `(1/n) sum (lambda/(lambda_i + lambda))^2 c_i^2`
//! and squared norm `(1/p) sum lambda_i/(lambda_i + lambda)^2 c_i^2`, so the
//! solver only needs a bisection on `lambda` to make the constraint active.
//!
//! The multiplier solved here makes the *realized* residual active. The
//! eigenvalue-only multiplier (unit coefficients) used by the asymptotic
//! analysis is available separately as [`eigenvalue_only_multiplier`].

use alloc::vec::Vec;
use libm::{fabs, sqrt};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::ineq;
use crate::mp::OverfitFraction;
use crate::quad::neumaier_sum;
use crate::rng::Xoshiro256PlusPlus;

/// Eigenvalues at or below `RANK_TOL * lambda_1` count as zero.
const RANK_TOL: f64 = 1e-10;
/// Reject covariances with `min_eig < COND_TOL * max_eig`.
const COND_TOL: f64 = 1e-12;
/// Absolute slack on residual-ratio comparisons, to keep feasibility
/// decisions from flapping at the boundary.
const RATIO_SLACK: f64 = 1e-12;
/// Bisection tolerance on the achieved residual ratio.
const RATIO_TOL: f64 = 1e-12;

/// Errors from the per-instance solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    /// Inconsistent matrix/vector dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    /// Covariance is not symmetric positive definite to working precision.
    #[error("covariance ill-conditioned: min eigenvalue {min_eig:e} vs max {max_eig:e}")]
    IllConditioned {
        /// Smallest covariance eigenvalue.
        min_eig: f64,
        /// Largest covariance eigenvalue.
        max_eig: f64,
    },
    /// Symmetric eigendecomposition did not converge.
    #[error("eigendecomposition failed to converge for a {size}x{size} matrix")]
    EigenFailed {
        /// Matrix dimension.
        size: usize,
    },
    /// An eigenvalue was negative beyond the clamp tolerance.
    #[error("eigenvalue {value:e} at index {index} is negative beyond tolerance")]
    NegativeEigenvalue {
        /// Position in the descending spectrum.
        index: usize,
        /// Offending value.
        value: f64,
    },
    /// The spectrum does not have exactly `n - min(n, p)` zero eigenvalues.
    #[error("rank assumption violated: expected {expected_zeros} zero eigenvalues, found {found_zeros}")]
    RankViolation {
        /// `n - min(n, p)`.
        expected_zeros: usize,
        /// Number of eigenvalues at or below the rank tolerance.
        found_zeros: usize,
    },
    /// No coefficient vector achieves the requested training ratio.
    #[error("infeasible: minimum achievable residual ratio is {min_ratio}")]
    Infeasible {
        /// `residual_ratio(0)`, the unremovable kernel fraction.
        min_ratio: f64,
    },
    /// The brute-force oracle is exponential in `p` and refuses large `p`.
    #[error("brute-force oracle supports p <= 3, got p = {p}")]
    OracleUnsupported {
        /// Requested feature count.
        p: usize,
    },
    /// Invalid scalar parameter.
    #[error("parameter {name} = {value} out of range")]
    BadParameter {
        /// Which parameter.
        name: &'static str,
        /// Offending value.
        value: f64,
    },
}

/// A sampled regression problem.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    /// Number of samples.
    pub n: usize,
    /// Number of features.
    pub p: usize,
    /// Noise floor `sigma^2`.
    pub sigma2: f64,
    /// Feature matrix, `n x p`.
    pub features: DMatrix<f64>,
    /// Population feature covariance, `p x p` symmetric positive definite.
    pub covariance: DMatrix<f64>,
    /// Targets, length `n`.
    pub targets: DVector<f64>,
    /// Optimal linear coefficient, length `p`.
    pub beta_star: DVector<f64>,
}

impl ProblemInstance {
    /// Validate dimensions and the noise floor.
    pub fn new(
        features: DMatrix<f64>,
        covariance: DMatrix<f64>,
        targets: DVector<f64>,
        beta_star: DVector<f64>,
        sigma2: f64,
    ) -> Result<Self, SolverError> {
        let n = features.nrows();
        let p = features.ncols();
        if n == 0 || p == 0 {
            return Err(SolverError::DimensionMismatch("empty feature matrix"));
        }
        if covariance.nrows() != p || covariance.ncols() != p {
            return Err(SolverError::DimensionMismatch("covariance must be p x p"));
        }
        if targets.len() != n {
            return Err(SolverError::DimensionMismatch("targets must have length n"));
        }
        if beta_star.len() != p {
            return Err(SolverError::DimensionMismatch("beta_star must have length p"));
        }
        if !(sigma2 > 0.0) {
            return Err(SolverError::BadParameter {
                name: "sigma2",
                value: sigma2,
            });
        }
        Ok(Self {
            n,
            p,
            sigma2,
            features,
            covariance,
            targets,
            beta_star,
        })
    }
}

/// Descending spectrum of the whitened Gram matrix `G = W W^T / p`, with the
/// trailing block clamped to exact zeros at the rank tolerance.
#[derive(Debug, Clone)]
pub struct Spectrum {
    values: Vec<f64>,
    expected_rank: usize,
    zero_count: usize,
    clamped_negatives: usize,
}

impl Spectrum {
    /// Build from raw (unsorted) eigenvalues of an `n x n` Gram matrix whose
    /// source had `p` columns. Sorts descending, clamps tiny negatives to
    /// zero, and zeroes everything at or below `1e-10 * lambda_1`.
    pub fn new(mut values: Vec<f64>, p: usize) -> Result<Self, SolverError> {
        let n = values.len();
        if n == 0 || p == 0 {
            return Err(SolverError::DimensionMismatch("empty spectrum"));
        }
        values.sort_unstable_by(|a, b| b.total_cmp(a));
        let top = values[0].max(0.0);
        let floor = RANK_TOL * top.max(1.0);
        let mut clamped_negatives = 0;
        for (i, v) in values.iter_mut().enumerate() {
            if *v < -floor {
                return Err(SolverError::NegativeEigenvalue {
                    index: i,
                    value: *v,
                });
            }
            if *v < 0.0 {
                clamped_negatives += 1;
                *v = 0.0;
            } else if *v <= RANK_TOL * top {
                *v = 0.0;
            }
        }
        let zero_count = values.iter().filter(|&&v| v == 0.0).count();
        Ok(Self {
            values,
            expected_rank: n.min(p),
            zero_count,
            clamped_negatives,
        })
    }

    /// Eigenvalues, nonincreasing, trailing zeros exact.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Spectrum length `n`.
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Expected rank `min(n, p)` from the source dimensions.
    pub fn expected_rank(&self) -> usize {
        self.expected_rank
    }

    /// Number of eigenvalues clamped to zero.
    pub fn zero_count(&self) -> usize {
        self.zero_count
    }

    /// How many strictly negative values were clamped (rounding artifacts).
    pub fn clamped_negatives(&self) -> usize {
        self.clamped_negatives
    }

    /// Whether the zero block has exactly the size the rank assumption
    /// requires, `n - min(n, p)`.
    pub fn rank_consistent(&self) -> bool {
        self.zero_count == self.n() - self.expected_rank
    }
}

/// Noise coordinates in the eigenbasis of `G`, ordered like [`Spectrum`].
#[derive(Debug, Clone)]
pub struct ProjectedNoise {
    coeffs: Vec<f64>,
    total_sq_norm: f64,
}

impl ProjectedNoise {
    /// Build from coefficients; the recorded total is `||xi||^2` and must
    /// match `sum c_i^2` (orthonormal basis).
    pub fn new(coeffs: Vec<f64>, total_sq_norm: f64) -> Self {
        Self {
            coeffs,
            total_sq_norm,
        }
    }

    /// Build synthetic noise directly from coefficients.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        let total = neumaier_sum(coeffs.iter().map(|c| c * c));
        Self::new(coeffs, total)
    }

    /// Coefficients `c_i = <u_i, xi>`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `||xi||^2`.
    pub fn total_sq_norm(&self) -> f64 {
        self.total_sq_norm
    }
}

/// How the optimum was attained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// The training constraint is active at `lambda_star`.
    ConstraintActive,
    /// `b = 0` already satisfies the constraint; the loss is zero.
    InteriorZero,
    /// Even interpolation on the range of `W` cannot reach `tau`.
    Infeasible,
}

/// Outcome of a per-instance solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveResult {
    /// Minimal excess linear loss.
    pub excess_lin_loss: f64,
    /// Multiplier at the optimum; `+inf` for [`SolveStatus::InteriorZero`]
    /// (the dual point `b(lambda)` vanishes as `lambda -> inf`).
    pub lambda_star: f64,
    /// Achieved training residual over `sigma^2`.
    pub achieved_train_ratio: f64,
    /// Status of the constraint at the optimum.
    pub status: SolveStatus,
}

/// Symmetric eigendecomposition sorted descending.
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns.
fn sym_eig_desc(matrix: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>), SolverError> {
    let size = matrix.nrows();
    let eig = nalgebra::linalg::SymmetricEigen::try_new(matrix, f64::EPSILON, 50_000)
        .ok_or(SolverError::EigenFailed { size })?;
    let mut order: Vec<usize> = (0..size).collect();
    let values = eig.eigenvalues;
    order.sort_unstable_by(|&i, &j| values[j].total_cmp(&values[i]));
    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut basis = DMatrix::zeros(size, size);
    for (dst, &src) in order.iter().enumerate() {
        basis.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((sorted_values, basis))
}

/// Symmetric matrix power via eigendecomposition, rejecting indefinite or
/// ill-conditioned inputs (condition numbers above `1 / COND_TOL`).
fn sym_pow(matrix: &DMatrix<f64>, exponent: f64) -> Result<DMatrix<f64>, SolverError> {
    let (values, basis) = sym_eig_desc(matrix.clone())?;
    let max_eig = values[0];
    let min_eig = *values.last().expect("nonempty");
    if !(min_eig > 0.0) || min_eig < COND_TOL * max_eig {
        return Err(SolverError::IllConditioned { min_eig, max_eig });
    }
    let mut scaled = basis.clone();
    for (j, &d) in values.iter().enumerate() {
        let mut col = scaled.column_mut(j);
        col *= libm::pow(d, exponent);
    }
    Ok(scaled * basis.transpose())
}

/// Symmetric inverse square root of a positive definite matrix.
fn sym_inv_sqrt(matrix: &DMatrix<f64>) -> Result<DMatrix<f64>, SolverError> {
    sym_pow(matrix, -0.5)
}

/// Symmetric square root of a positive definite matrix (sampling helper).
pub(crate) fn sym_sqrt(matrix: &DMatrix<f64>) -> Result<DMatrix<f64>, SolverError> {
    sym_pow(matrix, 0.5)
}

/// Whiten an instance: `W = Phi Sigma^(-1/2)` via the symmetric inverse
/// square root, and `xi = y - Phi beta_star`.
pub fn whiten(instance: &ProblemInstance) -> Result<(DMatrix<f64>, DVector<f64>), SolverError> {
    let p = instance.p;
    let xi = &instance.targets - &instance.features * &instance.beta_star;
    if instance.covariance.is_identity(0.0) {
        // Whitening is the identity map; keep it exact.
        return Ok((instance.features.clone(), xi));
    }
    // Symmetry check before trusting the eigendecomposition.
    let scale = instance.covariance.amax().max(1.0);
    for i in 0..p {
        for j in (i + 1)..p {
            if fabs(instance.covariance[(i, j)] - instance.covariance[(j, i)]) > 1e-8 * scale {
                return Err(SolverError::DimensionMismatch("covariance not symmetric"));
            }
        }
    }
    let inv_sqrt = sym_inv_sqrt(&instance.covariance)?;
    let w = &instance.features * inv_sqrt;
    Ok((w, xi))
}

/// Spectral data of `G = W W^T / p` together with the noise coordinates
/// `c_i = u_i^T xi` in matching (descending-eigenvalue) order.
pub fn spectrum_of(
    w: &DMatrix<f64>,
    xi: &DVector<f64>,
) -> Result<(Spectrum, ProjectedNoise), SolverError> {
    let n = w.nrows();
    let p = w.ncols();
    if xi.len() != n {
        return Err(SolverError::DimensionMismatch("xi must have length n"));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::BadParameter {
            name: "w",
            value: f64::NAN,
        });
    }
    let mut gram = w * w.transpose() / (p as f64);
    // Symmetrize to keep the eigensolver honest against rounding.
    let gram_t = gram.transpose();
    gram = (gram + gram_t) * 0.5;
    let trace: f64 = gram.diagonal().iter().sum();
    let (values, basis) = sym_eig_desc(gram)?;
    let spectrum = Spectrum::new(values, p)?;
    debug_assert!(
        fabs(neumaier_sum(spectrum.eigenvalues().iter().copied()) - trace)
            <= 1e-8 * (1.0 + fabs(trace)),
        "eigenvalue sum drifted from the trace"
    );
    let coeffs: Vec<f64> = (0..n).map(|i| basis.column(i).dot(xi)).collect();
    let noise = ProjectedNoise::new(coeffs, xi.norm_squared());
    Ok((spectrum, noise))
}

/// Training residual over `sigma^2` of the dual point at scale `lambda`:
/// `(1/(n sigma^2)) sum (lambda/(lambda_i + lambda))^2 c_i^2`.
///
/// Zero eigenvalues contribute their full `c_i^2` for every `lambda`
/// (including `lambda = 0`, the `(0/(0+0))^2 = 1` convention): that part of
/// the noise lies outside the range of `W` and cannot be removed.
/// Nondecreasing in `lambda`.
pub fn residual_ratio(
    lambda: f64,
    spectrum: &Spectrum,
    noise: &ProjectedNoise,
    n: usize,
    sigma2: f64,
) -> f64 {
    let total = neumaier_sum(
        spectrum
            .eigenvalues()
            .iter()
            .zip(noise.coeffs())
            .map(|(&eig, &c)| {
                let weight = if eig == 0.0 || lambda == f64::INFINITY {
                    1.0
                } else if lambda == 0.0 {
                    0.0
                } else {
                    let r = lambda / (eig + lambda);
                    r * r
                };
                weight * c * c
            }),
    );
    total / (n as f64 * sigma2)
}

/// Squared norm of the dual-optimal point at scale `lambda`:
/// `(1/p) sum lambda_i/(lambda_i + lambda)^2 c_i^2`.
///
/// Zero eigenvalues contribute nothing; at `lambda = 0` the positive part
/// degenerates to `(1/p) sum c_i^2 / lambda_i`, the minimum-norm
/// interpolator on the range of `W`. Nonincreasing in `lambda`. Equals the
/// excess linear loss whenever the constraint is active at `lambda`.
pub fn ridge_dual_point(
    lambda: f64,
    spectrum: &Spectrum,
    noise: &ProjectedNoise,
    p: usize,
) -> f64 {
    if lambda == f64::INFINITY {
        return 0.0;
    }
    let total = neumaier_sum(
        spectrum
            .eigenvalues()
            .iter()
            .zip(noise.coeffs())
            .map(|(&eig, &c)| {
                if eig == 0.0 {
                    0.0
                } else {
                    let denom = eig + lambda;
                    eig / (denom * denom) * c * c
                }
            }),
    );
    total / p as f64
}

/// Solve the per-instance problem given precomputed spectral data.
///
/// The expensive eigendecomposition is shared across `tau` values this way;
/// [`solve_min_excess`] is the one-shot wrapper.
pub fn solve_from_spectrum(
    spectrum: &Spectrum,
    noise: &ProjectedNoise,
    n: usize,
    p: usize,
    sigma2: f64,
    tau: OverfitFraction,
) -> Result<SolveResult, SolverError> {
    if !spectrum.rank_consistent() {
        return Err(SolverError::RankViolation {
            expected_zeros: n - n.min(p),
            found_zeros: spectrum.zero_count(),
        });
    }
    let t = tau.get();
    let ratio_at_infinity = residual_ratio(f64::INFINITY, spectrum, noise, n, sigma2);
    // Training at the noise level never binds in the theory (f(inf) = 1,
    // b(inf) = 0), even though the realized noise energy exceeds n sigma^2
    // about half the time at finite n. Fix the convention: tau = 1 is the
    // zero-loss case exactly.
    if t == 1.0 {
        return Ok(SolveResult {
            excess_lin_loss: 0.0,
            lambda_star: f64::INFINITY,
            achieved_train_ratio: ratio_at_infinity.min(1.0),
            status: SolveStatus::InteriorZero,
        });
    }
    if ratio_at_infinity <= t + RATIO_SLACK {
        return Ok(SolveResult {
            excess_lin_loss: 0.0,
            lambda_star: f64::INFINITY,
            achieved_train_ratio: ratio_at_infinity,
            status: SolveStatus::InteriorZero,
        });
    }
    let ratio_at_zero = residual_ratio(0.0, spectrum, noise, n, sigma2);
    if ratio_at_zero > t + RATIO_SLACK {
        return Err(SolverError::Infeasible {
            min_ratio: ratio_at_zero,
        });
    }

    let lambda_star = if t <= ratio_at_zero + RATIO_SLACK {
        // Boundary: only interpolation on the range of W reaches tau.
        0.0
    } else {
        let mut hi = spectrum.eigenvalues()[0].max(1.0);
        let mut doublings = 0;
        while residual_ratio(hi, spectrum, noise, n, sigma2) < t {
            hi *= 2.0;
            doublings += 1;
            assert!(doublings < 400, "residual bracket failed to close");
        }
        let mut lo = 0.0;
        let mut mid = 0.5 * hi;
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let value = residual_ratio(mid, spectrum, noise, n, sigma2);
            if fabs(value - t) <= RATIO_TOL || (hi - lo) <= 1e-15 * (1.0 + mid) {
                break;
            }
            if value < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        mid
    };

    let achieved = residual_ratio(lambda_star, spectrum, noise, n, sigma2);
    let loss = ridge_dual_point(lambda_star, spectrum, noise, p);

    // Diagnostics: the deterministic spectrum bound must hold for the
    // eigenvalue-only multiplier whenever it exists.
    #[cfg(debug_assertions)]
    if let Ok((lhs, rhs)) = ineq::deterministic_bound_check(spectrum.eigenvalues(), t) {
        debug_assert!(
            lhs >= rhs - 1e-9,
            "deterministic bound violated: {lhs} < {rhs}"
        );
    }

    Ok(SolveResult {
        excess_lin_loss: loss,
        lambda_star,
        achieved_train_ratio: achieved,
        status: SolveStatus::ConstraintActive,
    })
}

/// Minimal excess linear loss of `tau`-overfitting models on an instance.
pub fn solve_min_excess(
    instance: &ProblemInstance,
    tau: OverfitFraction,
) -> Result<SolveResult, SolverError> {
    let (w, xi) = whiten(instance)?;
    let (spectrum, noise) = spectrum_of(&w, &xi)?;
    solve_from_spectrum(
        &spectrum,
        &noise,
        instance.n,
        instance.p,
        instance.sigma2,
        tau,
    )
}

/// The eigenvalue-only multiplier `(1/n) sum (lambda/(lambda_i + lambda))^2 = tau`
/// (unit noise coefficients) — the analytical device of the asymptotic
/// theory, exposed as a diagnostic next to the realized-residual solve.
pub fn eigenvalue_only_multiplier(
    spectrum: &Spectrum,
    tau: OverfitFraction,
) -> Result<f64, SolverError> {
    ineq::solve_unit_fixed_point(spectrum.eigenvalues(), tau.get()).map_err(|_| {
        SolverError::Infeasible {
            min_ratio: spectrum.zero_count() as f64 / spectrum.n() as f64,
        }
    })
}

// ---------------------------------------------------------------------------
// Brute-force oracle: direct primal minimization for p <= 3, sharing no code
// with the spectral route above.
// ---------------------------------------------------------------------------

/// Solve a small (k <= 4) linear system by Gaussian elimination with
/// partial pivoting. Matrix in row-major order.
fn solve_small(a: &mut [f64], b: &mut [f64], k: usize) -> Option<()> {
    for col in 0..k {
        let mut pivot = col;
        for row in (col + 1)..k {
            if fabs(a[row * k + col]) > fabs(a[pivot * k + col]) {
                pivot = row;
            }
        }
        if a[pivot * k + col] == 0.0 {
            return None;
        }
        if pivot != col {
            for j in 0..k {
                a.swap(col * k + j, pivot * k + j);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * k + col];
        for row in (col + 1)..k {
            let factor = a[row * k + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for j in col..k {
                a[row * k + j] -= factor * a[col * k + j];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..k).rev() {
        let mut acc = b[col];
        for j in (col + 1)..k {
            acc -= a[col * k + j] * b[j];
        }
        b[col] = acc / a[col * k + col];
    }
    Some(())
}

/// `||W b - xi||^2` without any spectral machinery.
fn residual_sq(w: &DMatrix<f64>, xi: &DVector<f64>, b: &[f64]) -> f64 {
    let n = w.nrows();
    let p = w.ncols();
    let mut total = 0.0;
    for i in 0..n {
        let mut r = -xi[i];
        for j in 0..p {
            r += w[(i, j)] * b[j];
        }
        total += r * r;
    }
    total
}

/// Projection of `x` onto the affine set `{b : W b = xi}` (the `r_sq -> 0`
/// limit), `b = x - W^T (W W^T)^-1 (W x - xi)`. Only called when the set is
/// known nonempty; for `n > 3` (overdetermined but consistent) the set is
/// the single least-squares point, which the caller passes in.
fn project_onto_affine(
    w: &DMatrix<f64>,
    xi: &DVector<f64>,
    x: &[f64],
    ls_anchor: &[f64],
    out: &mut [f64],
) {
    let n = w.nrows();
    let p = x.len();
    if n > 3 {
        out.copy_from_slice(ls_anchor);
        return;
    }
    let xv = DVector::from_column_slice(x);
    let defect = w * &xv - xi;
    let mut outer = [0.0f64; 9];
    for i in 0..n {
        for j in 0..n {
            outer[i * n + j] = w.row(i).dot(&w.row(j));
        }
    }
    let shift = 1e-13 * (0..n).map(|i| outer[i * n + i]).fold(1e-300, f64::max);
    for i in 0..n {
        outer[i * n + i] += shift;
    }
    let mut rhs = [0.0f64; 3];
    for i in 0..n {
        rhs[i] = defect[i];
    }
    if solve_small(&mut outer[..n * n], &mut rhs[..n], n).is_none() {
        out.copy_from_slice(ls_anchor);
        return;
    }
    let correction = w.transpose() * DVector::from_column_slice(&rhs[..n]);
    for j in 0..p {
        out[j] = x[j] - correction[j];
    }
}

/// Projection of `x` onto `{b : ||W b - xi||^2 <= r_sq}` via bisection on
/// the projection multiplier, each step a dense p x p solve. Falls back to
/// the affine projection when `r_sq` sits at the reachability floor, where
/// finite multipliers would need numerically singular systems.
#[allow(clippy::too_many_arguments)]
fn project_onto_constraint(
    w: &DMatrix<f64>,
    xi: &DVector<f64>,
    gram: &[f64],
    wt_xi: &[f64],
    x: &[f64],
    ls_anchor: &[f64],
    r_sq: f64,
    out: &mut [f64],
) {
    let p = x.len();
    if residual_sq(w, xi, x) <= r_sq {
        out.copy_from_slice(x);
        return;
    }
    // b(mu) = (I + mu W^T W)^-1 (x + mu W^T xi); residual decreasing in mu.
    let eval = |mu: f64, out: &mut [f64]| -> bool {
        let mut a = [0.0f64; 16];
        let mut rhs = [0.0f64; 4];
        for i in 0..p {
            for j in 0..p {
                a[i * p + j] = mu * gram[i * p + j] + if i == j { 1.0 } else { 0.0 };
            }
            rhs[i] = x[i] + mu * wt_xi[i];
        }
        if solve_small(&mut a[..p * p], &mut rhs[..p], p).is_none() {
            return false;
        }
        out.copy_from_slice(&rhs[..p]);
        true
    };
    // Beyond this the I term drowns in rounding and the solve degrades.
    const MU_MAX: f64 = 1e12;
    let mut hi = 1.0;
    let mut buf = [0.0f64; 4];
    loop {
        if eval(hi, &mut buf[..p]) && residual_sq(w, xi, &buf[..p]) <= r_sq {
            break;
        }
        hi *= 2.0;
        if hi > MU_MAX {
            project_onto_affine(w, xi, x, ls_anchor, out);
            return;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !eval(mid, &mut buf[..p]) {
            lo = mid;
            continue;
        }
        if residual_sq(w, xi, &buf[..p]) > r_sq {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !eval(hi, &mut buf[..p]) {
        buf[..p].copy_from_slice(x);
    }
    out.copy_from_slice(&buf[..p]);
}

/// Independent primal oracle for [`solve_min_excess`], valid for `p <= 3`.
///
/// Route: direct least-squares feasibility check, projected gradient descent
/// on `||b||^2` with exact projections onto the constraint set, then a
/// shrinking grid sweep of `grid_resolution` points per axis around the
/// incumbent. No eigendecomposition anywhere.
pub fn brute_force_oracle(
    instance: &ProblemInstance,
    tau: OverfitFraction,
    grid_resolution: usize,
) -> Result<f64, SolverError> {
    let p = instance.p;
    if p > 3 {
        return Err(SolverError::OracleUnsupported { p });
    }
    let n = instance.n;
    let (w, xi) = whiten(instance)?;
    let r_sq = n as f64 * tau.get() * instance.sigma2;

    // Same tau = 1 convention as the spectral solver.
    if tau.get() == 1.0 {
        return Ok(0.0);
    }
    // b = 0 feasible: the zero model already tau-overfits.
    if xi.norm_squared() <= r_sq + RATIO_SLACK * n as f64 * instance.sigma2 {
        return Ok(0.0);
    }

    // Dense normal equations (+ tiny Tikhonov shift for rank-deficient W)
    // give the least-squares point and the minimum achievable residual.
    let mut gram = [0.0f64; 9];
    let mut wt_xi = [0.0f64; 3];
    for i in 0..p {
        for j in 0..p {
            gram[i * p + j] = w.column(i).dot(&w.column(j));
        }
        wt_xi[i] = w.column(i).dot(&xi);
    }
    let shift = 1e-13 * (0..p).map(|i| gram[i * p + i]).fold(1e-300, f64::max);
    let mut ls = [0.0f64; 3];
    {
        let mut a = [0.0f64; 9];
        a[..p * p].copy_from_slice(&gram[..p * p]);
        for i in 0..p {
            a[i * p + i] += shift;
        }
        let mut rhs = [0.0f64; 3];
        rhs[..p].copy_from_slice(&wt_xi[..p]);
        if solve_small(&mut a[..p * p], &mut rhs[..p], p).is_none() {
            return Err(SolverError::EigenFailed { size: p });
        }
        ls[..p].copy_from_slice(&rhs[..p]);
    }
    let min_residual = residual_sq(&w, &xi, &ls[..p]);
    if min_residual > r_sq + 1e-9 * (1.0 + r_sq) {
        // No grid point (indeed no point at all) can satisfy the constraint.
        return Err(SolverError::Infeasible {
            min_ratio: min_residual / (n as f64 * instance.sigma2),
        });
    }

    // Projected gradient descent from the feasible least-squares anchor:
    // the gradient step contracts toward the origin, the projection pulls
    // back into the constraint set.
    let mut b = [0.0f64; 3];
    b[..p].copy_from_slice(&ls[..p]);
    let mut stepped = [0.0f64; 3];
    for _ in 0..300 {
        for j in 0..p {
            stepped[j] = 0.5 * b[j];
        }
        let mut projected = [0.0f64; 3];
        project_onto_constraint(
            &w,
            &xi,
            &gram[..p * p],
            &wt_xi[..p],
            &stepped[..p],
            &ls[..p],
            r_sq,
            &mut projected[..p],
        );
        b[..p].copy_from_slice(&projected[..p]);
    }
    let mut best = neumaier_sum(b[..p].iter().map(|v| v * v));

    // Grid sweep around the incumbent at shrinking scales; any feasible
    // grid point with a smaller norm replaces it.
    let res = grid_resolution.max(3);
    let scale0 = sqrt(best).max(1e-6);
    for level in 1..=4 {
        let scale = scale0 * libm::pow(10.0, -(level as f64));
        let mut candidate = [0.0f64; 3];
        let steps = res as i64;
        let mut index = [0i64; 3];
        loop {
            for j in 0..p {
                let frac = index[j] as f64 / (steps - 1) as f64;
                candidate[j] = b[j] + scale * (2.0 * frac - 1.0);
            }
            if residual_sq(&w, &xi, &candidate[..p]) <= r_sq {
                let norm = neumaier_sum(candidate[..p].iter().map(|v| v * v));
                if norm < best {
                    best = norm;
                }
            }
            // Odometer over the p-dimensional grid.
            let mut j = 0;
            loop {
                if j == p {
                    break;
                }
                index[j] += 1;
                if index[j] < steps {
                    break;
                }
                index[j] = 0;
                j += 1;
            }
            if j == p {
                break;
            }
        }
    }
    Ok(best)
}

/// Monte Carlo check of the noise quadratic-form identity: draws `xi` with
/// i.i.d. mean-zero variance-`sigma2` Gaussian entries and returns the
/// empirical mean of `xi^T A xi` next to `sigma^2 Tr(A)`. One generator
/// stream seeded with `seed` drives all trials.
pub fn noise_quadratic_check(
    a: &DMatrix<f64>,
    sigma2: f64,
    trials: usize,
    seed: u64,
) -> (f64, f64) {
    assert!(trials >= 1, "at least one trial required");
    assert!(a.is_square(), "A must be square");
    let n = a.nrows();
    let sigma = sqrt(sigma2);
    let mut rng = Xoshiro256PlusPlus::from_seed(seed);
    let mut xi = DVector::zeros(n);
    let mut values = Vec::with_capacity(trials);
    for _ in 0..trials {
        for i in 0..n {
            xi[i] = sigma * rng.normal();
        }
        values.push((a * &xi).dot(&xi));
    }
    let mc_mean = neumaier_sum(values.iter().copied()) / trials as f64;
    let trace_value = sigma2 * a.diagonal().iter().sum::<f64>();
    (mc_mean, trace_value)
}
