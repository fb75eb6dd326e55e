//! Adaptive Gauss–Kronrod quadrature on finite intervals.
//!
//! A 7-point Gauss / 15-point Kronrod pair with greedy interval bisection.
//! Integrands with square-root endpoint singularities (the Marchenko–Pastur
//! density edges) are expected to be regularized by the caller via the
//! substitution `x = a + (b - a) * sin^2(theta)` before reaching this module;
//! see [`crate::mp`] for the substituted integrals.

// The tabulated rule constants keep their full published precision.
#![allow(clippy::excessive_precision)]

use alloc::vec::Vec;
use libm::fabs;

/// Positive abscissae of the 15-point Kronrod rule on `[-1, 1]`.
/// Odd indices are the embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// 7-point Gauss weights for nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    /// Estimated value of the integral.
    pub value: f64,
    /// Estimated absolute error.
    pub abs_error: f64,
    /// Number of interval bisections performed.
    pub subdivisions: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Single Gauss–Kronrod 15-point evaluation on `[a, b]`.
///
/// Returns `(kronrod_value, error_estimate)` where the error estimate uses
/// the QUADPACK rescaling of `|K15 - G7|` against the deviation integral.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut res_gauss = WG[3] * f_center;
    let mut res_kronrod = WGK[7] * f_center;
    let mut res_abs = WGK[7] * fabs(f_center);

    let mut samples = [0.0f64; 15];
    samples[7] = f_center;

    for j in 0..7 {
        let abscissa = half * XGK[j];
        let f_lo = f(center - abscissa);
        let f_hi = f(center + abscissa);
        samples[j] = f_lo;
        samples[14 - j] = f_hi;
        res_kronrod += WGK[j] * (f_lo + f_hi);
        res_abs += WGK[j] * (fabs(f_lo) + fabs(f_hi));
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f_lo + f_hi);
        }
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[7] * fabs(f_center - mean);
    for j in 0..7 {
        res_asc += WGK[j] * (fabs(samples[j] - mean) + fabs(samples[14 - j] - mean));
    }

    let value = res_kronrod * half;
    let res_abs = res_abs * fabs(half);
    let res_asc = res_asc * fabs(half);

    let mut err = fabs((res_kronrod - res_gauss) * half);
    if res_asc != 0.0 && err != 0.0 {
        let scale = libm::pow(200.0 * err / res_asc, 1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Adaptively integrate `f` over `[a, b]` to the requested tolerances.
///
/// The interval with the largest error estimate is bisected until the summed
/// error drops below `max(abs_tol, rel_tol * |integral|)` or `max_subdivisions`
/// is exhausted. Smooth integrands converge in a handful of bisections.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            abs_error: 0.0,
            subdivisions: 0,
        };
    }

    let (value, error) = gk15(&f, a, b);
    let mut segments = Vec::with_capacity(64);
    segments.push(Segment {
        a,
        b,
        value,
        error,
    });

    let mut subdivisions = 0;
    loop {
        let total_value: f64 = neumaier_sum(segments.iter().map(|s| s.value));
        let total_error: f64 = segments.iter().map(|s| s.error).sum();
        let target = abs_tol.max(rel_tol * fabs(total_value));
        if total_error <= target || subdivisions >= max_subdivisions {
            return QuadResult {
                value: total_value,
                abs_error: total_error,
                subdivisions,
            };
        }

        // Split the segment with the worst error estimate.
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.error.total_cmp(&y.error))
            .map(|(i, _)| i)
            .expect("segment list is never empty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval at floating-point resolution; give up on it.
            segments.push(seg);
            return QuadResult {
                value: neumaier_sum(segments.iter().map(|s| s.value)),
                abs_error: segments.iter().map(|s| s.error).sum(),
                subdivisions,
            };
        }
        let (lv, le) = gk15(&f, seg.a, mid);
        let (rv, re) = gk15(&f, mid, seg.b);
        segments.push(Segment {
            a: seg.a,
            b: mid,
            value: lv,
            error: le,
        });
        segments.push(Segment {
            a: mid,
            b: seg.b,
            value: rv,
            error: re,
        });
        subdivisions += 1;
    }
}

/// Compensated (Neumaier) summation; order-independent up to f64 rounding
/// of the compensation itself, used wherever sums must not drift.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for v in values {
        let t = sum + v;
        if fabs(sum) >= fabs(v) {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        // K15 integrates degree <= 22 exactly; no subdivision needed.
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-12, 1e-14, 100);
        assert!((r.value - 8.0).abs() < 1e-12);
        assert_eq!(r.subdivisions, 0);
    }

    #[test]
    fn oscillatory_integrand_converges() {
        let r = integrate(|x| libm::cos(10.0 * x), 0.0, core::f64::consts::PI, 1e-12, 1e-14, 500);
        assert!(r.value.abs() < 1e-10, "got {}", r.value);
    }

    #[test]
    fn sqrt_after_substitution() {
        // int_0^1 sqrt(x) dx = 2/3 via x = sin^2(theta), dx = sin(2 theta) dtheta.
        let r = integrate(
            |t| libm::sin(t) * libm::sin(2.0 * t),
            0.0,
            core::f64::consts::FRAC_PI_2,
            1e-13,
            1e-15,
            500,
        );
        assert!((r.value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_interval_is_zero() {
        let r = integrate(|x| x, 1.0, 1.0, 1e-12, 1e-14, 10);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn gauss_weights_sum_to_two() {
        // Embedded rules integrate the constant 1 over [-1, 1] exactly.
        let wg_total: f64 = WG[0] * 2.0 + WG[1] * 2.0 + WG[2] * 2.0 + WG[3];
        let wgk_total: f64 = WGK[..7].iter().map(|w| 2.0 * w).sum::<f64>() + WGK[7];
        assert!((wg_total - 2.0).abs() < 1e-15, "gauss weights: {wg_total}");
        assert!((wgk_total - 2.0).abs() < 1e-15, "kronrod weights: {wgk_total}");
    }

    #[test]
    fn neumaier_handles_cancellation() {
        let s = neumaier_sum([1e16, 1.0, -1e16]);
        assert_eq!(s, 1.0);
    }
}
