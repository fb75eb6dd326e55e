//! Numeric verifiers for the scalar inequalities behind the lower bound.
//!
//! Each check returns both sides of its inequality so callers (tests and the
//! `verify` command) can assert the ordering and dump counterexamples. The
//! central object is
//!
//! ```text
//! g(x) = sqrt((1/n) sum a_i/(a_i+x)^2) sqrt((1/n) sum a_i)
//!      + sqrt((1/n) sum (x/(a_i+x))^2)
//! ```
//!
//! for nonincreasing `a_1 >= ... >= a_n >= 0`: `g` is nonincreasing with
//! limit 1, hence `g(x) >= 1`, which rearranges into the deterministic
//! spectrum bound checked by [`deterministic_bound_check`].

use alloc::vec::Vec;
use libm::{fabs, sqrt};
use thiserror::Error;

use crate::quad::neumaier_sum;

/// Errors from inequality-lab inputs.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum IneqError {
    /// Sequence empty or without a positive entry.
    #[error("sample must contain at least one strictly positive value")]
    NoPositiveEntry,
    /// Sequence not sorted as required.
    #[error("sequence violates the required sort order at index {0}")]
    SortOrder(usize),
    /// A strictly-positive-input check received a nonpositive value.
    #[error("value at index {0} must be strictly positive, got {1}")]
    NonPositiveValue(usize, f64),
    /// Negative entry where nonnegative values are required.
    #[error("value at index {0} must be nonnegative, got {1}")]
    NegativeValue(usize, f64),
    /// Scalar argument outside its stated range.
    #[error("argument {name} = {value} outside its stated range")]
    ArgumentRange {
        /// Which argument.
        name: &'static str,
        /// Offending value.
        value: f64,
    },
    /// Mismatched sequence lengths.
    #[error("sequences must have equal length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    /// The unit-coefficient fixed point has no solution at this `tau`.
    #[error("tau = {tau} below the zero-eigenvalue fraction {kernel_fraction}")]
    Infeasible {
        /// Requested fraction.
        tau: f64,
        /// Fraction of zero eigenvalues, the infimum of the constraint.
        kernel_fraction: f64,
    },
}

/// A nonincreasing nonnegative eigenvalue sample together with the scalar
/// `x >= 0` at which `g` is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSample {
    values: Vec<f64>,
    x: f64,
}

impl EigenSample {
    /// Validate: nonincreasing, nonnegative, at least one positive, `x >= 0`.
    pub fn new(values: Vec<f64>, x: f64) -> Result<Self, IneqError> {
        if !values.iter().any(|&v| v > 0.0) {
            return Err(IneqError::NoPositiveEntry);
        }
        for (i, &v) in values.iter().enumerate() {
            if v < 0.0 || !v.is_finite() {
                return Err(IneqError::NegativeValue(i, v));
            }
            if i > 0 && values[i - 1] < v {
                return Err(IneqError::SortOrder(i));
            }
        }
        if !(x >= 0.0) {
            return Err(IneqError::ArgumentRange {
                name: "x",
                value: x,
            });
        }
        Ok(Self { values, x })
    }

    /// The eigenvalues, nonincreasing.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The scalar argument.
    pub fn x(&self) -> f64 {
        self.x
    }
}

/// Evaluate `g` on a sample. Satisfies `g(x) >= 1`, nonincreasing in `x`,
/// with `g(x) -> 1` as `x -> inf`; `+inf` when `x = 0` meets a zero entry.
pub fn g_function(sample: &EigenSample) -> f64 {
    let n = sample.values.len() as f64;
    let x = sample.x;
    let mut sum_a = 0.0;
    let mut sum_shrink = 0.0;
    let mut sum_residual = 0.0;
    for &a in &sample.values {
        sum_a += a;
        if a + x == 0.0 {
            // a = x = 0: the 1/a factor diverges; the residual term has
            // limit 1 along a = 0, x -> 0+.
            sum_shrink = f64::INFINITY;
            sum_residual += 1.0;
        } else {
            sum_shrink += a / ((a + x) * (a + x));
            let r = x / (a + x);
            sum_residual += r * r;
        }
    }
    sqrt(sum_shrink / n) * sqrt(sum_a / n) + sqrt(sum_residual / n)
}

/// AM–HM inequality: returns `(sum 1/x_i, n^2 / sum x_i)`; the left side is
/// never smaller.
pub fn am_hm_check(values: &[f64]) -> Result<(f64, f64), IneqError> {
    if values.is_empty() {
        return Err(IneqError::NoPositiveEntry);
    }
    for (i, &v) in values.iter().enumerate() {
        if !(v > 0.0) {
            return Err(IneqError::NonPositiveValue(i, v));
        }
    }
    let n = values.len() as f64;
    let lhs = neumaier_sum(values.iter().map(|&v| 1.0 / v));
    let rhs = n * n / neumaier_sum(values.iter().copied());
    Ok((lhs, rhs))
}

/// Chebyshev's sum inequality for `a` nondecreasing and `b` nonincreasing:
/// returns `((1/n) sum a_i b_i, ((1/n) sum a_i)((1/n) sum b_i))`; the left
/// side is never larger.
pub fn chebyshev_sum_check(a: &[f64], b: &[f64]) -> Result<(f64, f64), IneqError> {
    if a.len() != b.len() {
        return Err(IneqError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(IneqError::NoPositiveEntry);
    }
    for i in 1..a.len() {
        if a[i - 1] > a[i] {
            return Err(IneqError::SortOrder(i));
        }
        if b[i - 1] < b[i] {
            return Err(IneqError::SortOrder(i));
        }
    }
    let n = a.len() as f64;
    let lhs = neumaier_sum(a.iter().zip(b).map(|(&x, &y)| x * y)) / n;
    let rhs = (neumaier_sum(a.iter().copied()) / n) * (neumaier_sum(b.iter().copied()) / n);
    Ok((lhs, rhs))
}

/// Mean constraint value `(1/n) sum (lam/(a_i + lam))^2` on bare eigenvalues
/// (unit noise coefficients). Zero eigenvalues contribute 1 for any
/// `lam >= 0`, matching the unremovable kernel residual.
pub fn unit_residual_fraction(eigenvalues: &[f64], lam: f64) -> f64 {
    let n = eigenvalues.len() as f64;
    let total = neumaier_sum(eigenvalues.iter().map(|&a| {
        if a == 0.0 || lam == f64::INFINITY {
            1.0
        } else {
            let r = lam / (a + lam);
            r * r
        }
    }));
    total / n
}

/// Solve the unit-coefficient fixed point
/// `(1/n) sum (lam/(a_i + lam))^2 = tau` by bracketing bisection.
///
/// Returns `0` exactly at `tau =` kernel fraction and `+inf` at `tau = 1`;
/// errors when `tau` is below the kernel fraction.
pub fn solve_unit_fixed_point(eigenvalues: &[f64], tau: f64) -> Result<f64, IneqError> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(IneqError::ArgumentRange {
            name: "tau",
            value: tau,
        });
    }
    let n = eigenvalues.len();
    if n == 0 {
        return Err(IneqError::NoPositiveEntry);
    }
    let zeros = eigenvalues.iter().filter(|&&a| a == 0.0).count();
    let kernel_fraction = zeros as f64 / n as f64;
    if tau < kernel_fraction {
        return Err(IneqError::Infeasible {
            tau,
            kernel_fraction,
        });
    }
    if tau == kernel_fraction {
        return Ok(0.0);
    }
    if tau == 1.0 {
        return Ok(f64::INFINITY);
    }
    let mut hi = eigenvalues[0].max(1.0);
    let mut doublings = 0;
    while unit_residual_fraction(eigenvalues, hi) < tau {
        hi *= 2.0;
        doublings += 1;
        assert!(doublings < 200, "unit fixed-point bracket failed to close");
    }
    let mut lo = 0.0;
    let mut mid = 0.5 * hi;
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let value = unit_residual_fraction(eigenvalues, mid);
        if fabs(value - tau) <= 1e-13 || (hi - lo) <= 1e-15 * (1.0 + mid) {
            break;
        }
        if value < tau {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Result of [`invalid_bound_counterexample`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Counterexample {
    /// `(1/2) sum a_i/(a_i + lambda_star)^2`.
    pub lhs: f64,
    /// `(1/2) (sum 1/a_i) (1 - sqrt(tau))^2` — the invalid candidate bound.
    pub rhs: f64,
    /// Multiplier solving the two-eigenvalue fixed point.
    pub lambda_star: f64,
}

/// Construct the two-eigenvalue counterexample showing that replacing
/// `n / sum a_i` by `(1/n) sum 1/a_i` in the deterministic bound is invalid.
///
/// Eigenvalues are `(1 - epsilon, epsilon)` sorted descending (the source
/// construction labels them ascending; only the multiset matters). For small
/// `epsilon` the left side stays bounded while the candidate right side
/// blows up like `1/epsilon`, so `lhs < rhs`.
pub fn invalid_bound_counterexample(
    epsilon: f64,
    tau: f64,
) -> Result<Counterexample, IneqError> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(IneqError::ArgumentRange {
            name: "epsilon",
            value: epsilon,
        });
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(IneqError::ArgumentRange {
            name: "tau",
            value: tau,
        });
    }
    let eigenvalues = [1.0 - epsilon, epsilon];
    let lambda_star = solve_unit_fixed_point(&eigenvalues, tau)?;
    let lhs = 0.5
        * eigenvalues
            .iter()
            .map(|&a| a / ((a + lambda_star) * (a + lambda_star)))
            .sum::<f64>();
    let factor = 1.0 - sqrt(tau);
    let rhs = 0.5 * (1.0 / eigenvalues[0] + 1.0 / eigenvalues[1]) * factor * factor;
    Ok(Counterexample {
        lhs,
        rhs,
        lambda_star,
    })
}

/// The deterministic spectrum bound: with `lambda_star` solving the
/// unit-coefficient fixed point at `tau`, returns
/// `((1/n) sum a_i/(a_i + lambda_star)^2, (n / sum a_i)(1 - sqrt(tau))^2)`.
/// The left side is never smaller (up to rounding slack).
pub fn deterministic_bound_check(
    eigenvalues: &[f64],
    tau: f64,
) -> Result<(f64, f64), IneqError> {
    for (i, &a) in eigenvalues.iter().enumerate() {
        if a < 0.0 || !a.is_finite() {
            return Err(IneqError::NegativeValue(i, a));
        }
        if i > 0 && eigenvalues[i - 1] < a {
            return Err(IneqError::SortOrder(i));
        }
    }
    if !eigenvalues.iter().any(|&a| a > 0.0) {
        return Err(IneqError::NoPositiveEntry);
    }
    let lambda_star = solve_unit_fixed_point(eigenvalues, tau)?;
    let n = eigenvalues.len() as f64;
    let lhs = if lambda_star == f64::INFINITY {
        0.0
    } else {
        neumaier_sum(
            eigenvalues
                .iter()
                .filter(|&&a| a > 0.0)
                .map(|&a| a / ((a + lambda_star) * (a + lambda_star))),
        ) / n
    };
    let factor = 1.0 - sqrt(tau);
    let rhs = n / neumaier_sum(eigenvalues.iter().copied()) * factor * factor;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn sample_validation() {
        assert!(EigenSample::new(vec![1.0, 2.0], 0.5).is_err()); // increasing
        assert!(EigenSample::new(vec![0.0, 0.0], 0.5).is_err()); // no positive
        assert!(EigenSample::new(vec![2.0, -1.0], 0.5).is_err());
        assert!(EigenSample::new(vec![2.0, 1.0], -0.5).is_err());
        assert!(EigenSample::new(vec![2.0, 1.0], 0.0).is_ok());
    }

    #[test]
    fn g_equals_one_for_equal_eigenvalues() {
        // All a_i = a: g = a/(a+x) + x/(a+x) = 1 exactly.
        for x in [0.0, 0.3, 1.0, 100.0] {
            let s = EigenSample::new(vec![2.5, 2.5, 2.5], x).unwrap();
            assert!((g_function(&s) - 1.0).abs() < 1e-12, "x {x}");
        }
    }

    #[test]
    fn g_at_zero_reduces_to_am_hm() {
        let values = vec![4.0, 1.0];
        let s = EigenSample::new(values.clone(), 0.0).unwrap();
        let g = g_function(&s);
        let (lhs, _) = am_hm_check(&values).unwrap();
        let expected = sqrt(lhs / 2.0) * sqrt(values.iter().sum::<f64>() / 2.0);
        assert!((g - expected).abs() < 1e-12);
        assert!(g >= 1.0);
    }

    #[test]
    fn g_handles_zero_eigenvalue_at_x_zero() {
        let s = EigenSample::new(vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(g_function(&s), f64::INFINITY);
    }

    #[test]
    fn g_above_one_on_a_spot_check() {
        let s = EigenSample::new(vec![9.0, 4.0, 1.0, 0.25], 3.7).unwrap();
        assert!(g_function(&s) >= 1.0 - 1e-12);
    }

    #[test]
    fn am_hm_cases() {
        // Equal values: equality at n/c.
        let (lhs, rhs) = am_hm_check(&[3.0, 3.0, 3.0]).unwrap();
        assert!((lhs - 1.0).abs() < 1e-15);
        assert!((lhs - rhs).abs() < 1e-15);
        // (1, 4): 1.25 vs 0.8.
        let (lhs, rhs) = am_hm_check(&[1.0, 4.0]).unwrap();
        assert!((lhs - 1.25).abs() < 1e-15);
        assert!((rhs - 0.8).abs() < 1e-15);
        assert!(am_hm_check(&[1.0, 0.0]).is_err());
        assert!(am_hm_check(&[]).is_err());
    }

    #[test]
    fn chebyshev_cases() {
        // Constant b: equality.
        let (lhs, rhs) = chebyshev_sum_check(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).unwrap();
        assert!((lhs - rhs).abs() < 1e-14);
        // a = (1,2), b = (2,1): 2 vs 2.25.
        let (lhs, rhs) = chebyshev_sum_check(&[1.0, 2.0], &[2.0, 1.0]).unwrap();
        assert!((lhs - 2.0).abs() < 1e-15);
        assert!((rhs - 2.25).abs() < 1e-15);
        assert!(chebyshev_sum_check(&[2.0, 1.0], &[2.0, 1.0]).is_err());
        assert!(chebyshev_sum_check(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(chebyshev_sum_check(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn unit_fixed_point_edges() {
        let eig = [2.0, 0.0];
        // Kernel fraction 1/2: tau below it is infeasible, at it lambda = 0.
        assert!(matches!(
            solve_unit_fixed_point(&eig, 0.25),
            Err(IneqError::Infeasible { .. })
        ));
        assert_eq!(solve_unit_fixed_point(&eig, 0.5).unwrap(), 0.0);
        assert_eq!(solve_unit_fixed_point(&eig, 1.0).unwrap(), f64::INFINITY);
        let lam = solve_unit_fixed_point(&eig, 0.75).unwrap();
        let achieved = unit_residual_fraction(&eig, lam);
        assert!((achieved - 0.75).abs() < 1e-12);
    }

    #[test]
    fn counterexample_refutes_invalid_bound() {
        // epsilon = 1e-6, tau = 3/4: lhs stays O(1), rhs ~ (1 - sqrt(3)/2)^2 / (2 eps).
        let c = invalid_bound_counterexample(1e-6, 0.75).unwrap();
        assert!(c.lhs < c.rhs, "lhs {} rhs {}", c.lhs, c.rhs);
        assert!(c.lhs < 1.0);
        assert!(c.rhs > 1e3, "rhs {}", c.rhs);
        assert!((c.lambda_star - 2.414).abs() < 1e-2);

        let c = invalid_bound_counterexample(1e-3, 0.6).unwrap();
        assert!(c.lhs < c.rhs);
    }

    #[test]
    fn counterexample_collapses_to_equality_at_half() {
        // epsilon = 1/2 is the equal-eigenvalue case where both bounds agree.
        let c = invalid_bound_counterexample(0.5, 0.75).unwrap();
        assert!((c.lhs - c.rhs).abs() < 1e-9, "lhs {} rhs {}", c.lhs, c.rhs);
    }

    #[test]
    fn counterexample_rejects_bad_arguments() {
        assert!(invalid_bound_counterexample(0.0, 0.75).is_err());
        assert!(invalid_bound_counterexample(1e-3, 0.0).is_err());
        assert!(invalid_bound_counterexample(1e-3, 1.0).is_err());
    }

    #[test]
    fn deterministic_bound_tight_for_equal_eigenvalues() {
        let (lhs, rhs) = deterministic_bound_check(&[2.0, 2.0, 2.0], 0.36).unwrap();
        assert!((lhs - rhs).abs() < 1e-10, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn deterministic_bound_reduces_to_am_hm_at_kernel_fraction() {
        // tau = kernel fraction forces lambda_star = 0; the bound becomes AM-HM.
        let eig = [4.0, 1.0, 0.0, 0.0];
        let (lhs, rhs) = deterministic_bound_check(&eig, 0.5).unwrap();
        let n = eig.len() as f64;
        let expected_lhs = (1.0 / 4.0 + 1.0) / n;
        assert!((lhs - expected_lhs).abs() < 1e-12);
        let factor = 1.0 - sqrt(0.5);
        assert!((rhs - n / 5.0 * factor * factor).abs() < 1e-12);
        assert!(lhs >= rhs - 1e-12);
    }

    #[test]
    fn deterministic_bound_holds_on_spread_spectra() {
        for tau in [0.1, 0.5, 0.9] {
            let (lhs, rhs) = deterministic_bound_check(&[10.0, 1.0, 0.1], tau).unwrap();
            assert!(lhs >= rhs - 1e-12, "tau {tau}: lhs {lhs} rhs {rhs}");
        }
    }
}
