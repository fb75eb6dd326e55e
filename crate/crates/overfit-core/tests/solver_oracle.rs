//! Solver-versus-oracle equivalence and the solver's structural invariants
//! on randomly sampled instances.

use nalgebra::{DMatrix, DVector};
use overfit_core::ineq::deterministic_bound_check;
use overfit_core::mp::OverfitFraction;
use overfit_core::rng::Xoshiro256PlusPlus;
use overfit_core::solver::{
    brute_force_oracle, residual_ratio, ridge_dual_point, solve_min_excess, spectrum_of, whiten,
    ProblemInstance, SolveStatus, SolverError,
};

fn tau(t: f64) -> OverfitFraction {
    OverfitFraction::new(t).unwrap()
}

/// Random small instance with i.i.d. Gaussian features and noise.
fn random_instance(rng: &mut Xoshiro256PlusPlus, n: usize, p: usize, sigma: f64) -> ProblemInstance {
    let mut features = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            features[(i, j)] = rng.normal();
        }
    }
    let beta = DVector::from_fn(p, |_, _| rng.normal());
    let noise = DVector::from_fn(n, |_, _| sigma * rng.normal());
    let targets = &features * &beta + noise;
    ProblemInstance::new(features, DMatrix::identity(p, p), targets, beta, sigma * sigma)
        .unwrap()
}

#[test]
fn oracle_equivalence_on_small_instances() {
    let mut rng = Xoshiro256PlusPlus::from_seed(314);
    let taus = [0.0, 0.1, 0.5, 0.9];
    let mut checked = 0;
    for trial in 0..40 {
        let n = 1 + (rng.next_u64() % 3) as usize;
        let p = 1 + (rng.next_u64() % 3) as usize;
        let instance = random_instance(&mut rng, n, p, 1.0);
        for &t in &taus {
            let exact = solve_min_excess(&instance, tau(t));
            let oracle = brute_force_oracle(&instance, tau(t), 15);
            match (exact, oracle) {
                (Ok(result), Ok(value)) => {
                    assert!(
                        (result.excess_lin_loss - value).abs()
                            <= 1e-4 * (1.0 + value.abs()),
                        "trial {trial} n={n} p={p} tau={t}: solver {} oracle {value}",
                        result.excess_lin_loss
                    );
                    checked += 1;
                }
                (Err(SolverError::Infeasible { .. }), Err(SolverError::Infeasible { .. })) => {
                    checked += 1;
                }
                (exact, oracle) => panic!(
                    "trial {trial} n={n} p={p} tau={t}: solver {exact:?} oracle {oracle:?}"
                ),
            }
        }
    }
    assert!(checked >= 120, "only {checked} comparisons ran");
}

#[test]
fn kkt_consistency_on_active_solves() {
    let mut rng = Xoshiro256PlusPlus::from_seed(99);
    for _ in 0..25 {
        let n = 2 + (rng.next_u64() % 6) as usize;
        let p = 2 + (rng.next_u64() % 6) as usize;
        let instance = random_instance(&mut rng, n, p, 1.0);
        let t = 0.05 + 0.5 * rng.uniform();
        if let Ok(result) = solve_min_excess(&instance, tau(t)) {
            if result.status == SolveStatus::ConstraintActive {
                assert!(
                    (result.achieved_train_ratio - t).abs() <= 1e-10,
                    "constraint not active to tolerance: {} vs {t}",
                    result.achieved_train_ratio
                );
                let (w, xi) = whiten(&instance).unwrap();
                let (spectrum, noise) = spectrum_of(&w, &xi).unwrap();
                let loss = ridge_dual_point(result.lambda_star, &spectrum, &noise, p);
                assert_eq!(loss.to_bits(), result.excess_lin_loss.to_bits());
            }
        }
    }
}

#[test]
fn loss_nonincreasing_in_tau() {
    let mut rng = Xoshiro256PlusPlus::from_seed(7);
    for _ in 0..10 {
        let instance = random_instance(&mut rng, 6, 9, 1.0);
        let mut last = f64::INFINITY;
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            let result = solve_min_excess(&instance, tau(t)).unwrap();
            assert!(
                result.excess_lin_loss <= last + 1e-12,
                "loss increased at tau {t}"
            );
            last = result.excess_lin_loss;
        }
        assert_eq!(last, 0.0); // tau = 1
    }
}

#[test]
fn residual_and_ridge_monotone_in_lambda() {
    let mut rng = Xoshiro256PlusPlus::from_seed(55);
    let instance = random_instance(&mut rng, 7, 5, 1.0);
    let (w, xi) = whiten(&instance).unwrap();
    let (spectrum, noise) = spectrum_of(&w, &xi).unwrap();
    let mut last_ratio = residual_ratio(0.0, &spectrum, &noise, 7, 1.0);
    let mut last_norm = f64::INFINITY;
    for k in 0..200 {
        let lam = 1e-4 * f64::powf(1.12, k as f64);
        let ratio = residual_ratio(lam, &spectrum, &noise, 7, 1.0);
        let norm = ridge_dual_point(lam, &spectrum, &noise, 5);
        assert!(ratio >= last_ratio - 1e-14, "ratio decreased at {lam}");
        assert!(norm <= last_norm + 1e-14, "norm increased at {lam}");
        last_ratio = ratio;
        last_norm = norm;
    }
}

#[test]
fn whitening_invariance_under_feature_reparametrization() {
    // (Phi, Sigma, beta) -> (Phi T, T^T Sigma T, T^-1 beta) leaves the
    // problem invariant: same W W^T and same xi.
    let mut rng = Xoshiro256PlusPlus::from_seed(123);
    for _ in 0..8 {
        // n <= p keeps every tau feasible (no kernel residual).
        let n = 4;
        let p = 6;
        let instance = random_instance(&mut rng, n, p, 1.0);
        // Well-conditioned random T = I + 0.3 R.
        let mut t = DMatrix::identity(p, p);
        for i in 0..p {
            for j in 0..p {
                t[(i, j)] += 0.3 * rng.normal();
            }
        }
        let t_inv = t.clone().try_inverse().expect("T invertible");
        let transformed = ProblemInstance::new(
            &instance.features * &t,
            t.transpose() * &instance.covariance * &t,
            instance.targets.clone(),
            &t_inv * &instance.beta_star,
            instance.sigma2,
        )
        .unwrap();
        for &tt in &[0.1, 0.4, 0.8] {
            let a = solve_min_excess(&instance, tau(tt)).unwrap();
            let b = solve_min_excess(&transformed, tau(tt)).unwrap();
            assert!(
                (a.excess_lin_loss - b.excess_lin_loss).abs()
                    <= 1e-8 * (1.0 + a.excess_lin_loss),
                "invariance broken at tau {tt}: {} vs {}",
                a.excess_lin_loss,
                b.excess_lin_loss
            );
        }
    }
}

#[test]
fn deterministic_bound_holds_on_sampled_spectra() {
    let mut rng = Xoshiro256PlusPlus::from_seed(808);
    for _ in 0..50 {
        let n = 2 + (rng.next_u64() % 8) as usize;
        let p = 2 + (rng.next_u64() % 8) as usize;
        let instance = random_instance(&mut rng, n, p, 1.0);
        let (w, xi) = whiten(&instance).unwrap();
        let (spectrum, _) = spectrum_of(&w, &xi).unwrap();
        for &t in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            match deterministic_bound_check(spectrum.eigenvalues(), t) {
                Ok((lhs, rhs)) => assert!(
                    lhs >= rhs - 1e-12,
                    "deterministic bound violated: {lhs} < {rhs} (tau {t})"
                ),
                Err(_) => {
                    // tau below the kernel fraction: nothing to check.
                }
            }
        }
    }
}

#[test]
fn rank_assumption_holds_on_gaussian_instances() {
    let mut rng = Xoshiro256PlusPlus::from_seed(17);
    for (n, p) in [(6, 3), (3, 6), (5, 5)] {
        let instance = random_instance(&mut rng, n, p, 1.0);
        let (w, xi) = whiten(&instance).unwrap();
        let (spectrum, noise) = spectrum_of(&w, &xi).unwrap();
        assert!(spectrum.rank_consistent());
        assert_eq!(spectrum.zero_count(), n - n.min(p));
        // Projection onto the full eigenbasis preserves the noise norm.
        let sq: f64 = noise.coeffs().iter().map(|c| c * c).sum();
        assert!((sq - noise.total_sq_norm()).abs() <= 1e-8 * (1.0 + sq));
    }
}
