//! Property-based invariants over randomized inputs.

use overfit_core::ineq::{
    am_hm_check, chebyshev_sum_check, deterministic_bound_check, g_function, EigenSample,
};
use overfit_core::mp::{f_constraint, stieltjes_m, stieltjes_m_prime, AspectRatio};
use proptest::prelude::*;

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_unstable_by(|a, b| b.total_cmp(a));
    v
}

proptest! {
    #[test]
    fn g_is_at_least_one(
        values in prop::collection::vec(1e-4f64..1e4, 2..50),
        x in 1e-6f64..1e6,
    ) {
        let sample = EigenSample::new(sorted_desc(values), x).unwrap();
        prop_assert!(g_function(&sample) >= 1.0 - 1e-12);
    }

    #[test]
    fn g_is_nonincreasing_in_x(
        values in prop::collection::vec(1e-3f64..1e3, 2..30),
        x0 in 1e-6f64..1e3,
    ) {
        let values = sorted_desc(values);
        let mut last = f64::INFINITY;
        for k in 0..40 {
            let x = x0 * f64::powf(1.3, k as f64);
            let sample = EigenSample::new(values.clone(), x).unwrap();
            let g = g_function(&sample);
            prop_assert!(g <= last + 1e-12, "g increased at x = {x}: {g} > {last}");
            last = g;
        }
    }

    #[test]
    fn am_hm_never_reversed(values in prop::collection::vec(1e-6f64..1e6, 1..50)) {
        let (lhs, rhs) = am_hm_check(&values).unwrap();
        prop_assert!(lhs >= rhs - 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn chebyshev_never_reversed(pairs in prop::collection::vec((0.0f64..1e3, 0.0f64..1e3), 1..50)) {
        let mut a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        a.sort_unstable_by(f64::total_cmp);
        b.sort_unstable_by(|x, y| y.total_cmp(x));
        let (lhs, rhs) = chebyshev_sum_check(&a, &b).unwrap();
        prop_assert!(lhs <= rhs + 1e-9 * rhs.abs().max(1.0));
    }

    #[test]
    fn deterministic_bound_on_random_spectra(
        values in prop::collection::vec(1e-4f64..1e4, 2..50),
        tau in 0.01f64..0.99,
    ) {
        let values = sorted_desc(values);
        let (lhs, rhs) = deterministic_bound_check(&values, tau).unwrap();
        prop_assert!(lhs >= rhs - 1e-12, "lhs {lhs} rhs {rhs} tau {tau}");
    }

    #[test]
    fn constraint_function_increasing(gamma in 0.05f64..5.0, lam in 1e-3f64..1e3) {
        let ga = AspectRatio::new(gamma).unwrap();
        let f_lo = f_constraint(lam, ga);
        let f_hi = f_constraint(lam * 1.01, ga);
        prop_assert!(f_hi > f_lo);
        prop_assert!((0.0..=1.0).contains(&f_lo));
    }

    #[test]
    fn stieltjes_derivative_is_derivative(gamma in 0.05f64..5.0, z in 0.05f64..20.0) {
        let ga = AspectRatio::new(gamma).unwrap();
        let h = 1e-5 * z.max(1.0);
        let fd = (stieltjes_m(z - h, ga).unwrap() - stieltjes_m(z + h, ga).unwrap()) / (2.0 * h);
        let exact = stieltjes_m_prime(z, ga).unwrap();
        prop_assert!(
            (exact - fd).abs() <= 1e-5 * exact.abs().max(1e-8),
            "z {z} gamma {gamma}: {exact} vs {fd}"
        );
    }
}
