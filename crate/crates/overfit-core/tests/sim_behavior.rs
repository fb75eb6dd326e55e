//! Experiment-level behavior: reproducibility, the infeasibility regime,
//! spectral convergence to the MP law, and correlated-feature sampling.

use nalgebra::DMatrix;
use overfit_core::mp::{kolmogorov_distance, AspectRatio, MpModel, OverfitFraction};
use overfit_core::sim::{
    run_experiment, sample_instance, BetaStarSpec, ExperimentConfig, FeatureDist, NoiseDist,
};
use overfit_core::solver::{spectrum_of, whiten};

fn tau(t: f64) -> OverfitFraction {
    OverfitFraction::new(t).unwrap()
}

fn config(n: usize, p: usize, trials: usize, taus: &[f64]) -> ExperimentConfig {
    ExperimentConfig {
        n,
        p,
        sigma: 1.0,
        tau_grid: taus.iter().map(|&t| tau(t)).collect(),
        trials,
        master_seed: 42,
        feature_dist: FeatureDist::GaussianIid,
        noise_dist: NoiseDist::Gaussian,
        beta_star_spec: BetaStarSpec::Zero,
    }
}

#[test]
fn identical_configs_reproduce_bit_identical_reports() {
    let c = config(12, 24, 8, &[0.2, 0.7]);
    let a = run_experiment(&c).unwrap();
    let b = run_experiment(&c).unwrap();
    for (x, y) in a.reports.iter().zip(&b.reports) {
        assert_eq!(x.mc_mean.to_bits(), y.mc_mean.to_bits());
        assert_eq!(x.mc_stderr.to_bits(), y.mc_stderr.to_bits());
        assert_eq!(x.infeasible_count, y.infeasible_count);
    }
}

#[test]
fn infeasible_fraction_grows_with_n_in_overparameterized_regime() {
    // gamma = n/p = 2, tau = 0.3 < 1 - p/n - margin: the kernel holds about
    // half the noise energy, far above tau, so infeasibility dominates and
    // sharpens as n grows.
    let taus = [0.3];
    let small = run_experiment(&config(30, 15, 60, &taus)).unwrap();
    let large = run_experiment(&config(120, 60, 60, &taus)).unwrap();
    let f_small = small.reports[0].infeasible_count as f64 / 60.0;
    let f_large = large.reports[0].infeasible_count as f64 / 60.0;
    assert!(f_large >= 0.95, "large-n fraction {f_large}");
    assert!(f_large >= f_small - 1e-12);
}

#[test]
fn empirical_spectrum_converges_to_mp() {
    // Half the acceptance-scale problem keeps this test fast; the full
    // n = 500, p = 1000 case runs in the acceptance suite.
    let c = config(250, 500, 1, &[0.5]);
    let instance = sample_instance(&c, 0).unwrap();
    let (w, xi) = whiten(&instance).unwrap();
    let (spectrum, _) = spectrum_of(&w, &xi).unwrap();
    let mut eigs: Vec<f64> = spectrum.eigenvalues().to_vec();
    eigs.reverse(); // ascending
    let model = MpModel::new(AspectRatio::new(0.5).unwrap());
    let distance = kolmogorov_distance(&eigs, &model);
    assert!(distance < 0.07, "KS distance {distance}");
}

#[test]
fn correlated_features_record_their_covariance() {
    // AR(1) covariance; the solver whitens it away, so the excess loss
    // matches the isotropic configuration's statistics in distribution.
    let p = 6;
    let rho: f64 = 0.6;
    let cov = DMatrix::from_fn(p, p, |i, j| rho.powi((i as i32 - j as i32).abs()));
    let mut c = config(4, p, 6, &[0.3]);
    c.feature_dist = FeatureDist::GaussianCovariance(cov.clone());
    c.beta_star_spec = BetaStarSpec::UnitSphereRandom;
    let instance = sample_instance(&c, 0).unwrap();
    assert_eq!(instance.covariance, cov);
    let out = run_experiment(&c).unwrap();
    assert!(out.trial_errors.is_empty());
    assert!(out.reports[0].mc_mean.is_finite());
}

#[test]
fn peak_monte_carlo_tracks_closed_form() {
    // Interpolation peak n = p: the mean excess loss at tau = 1/2 should sit
    // near 1/(4 tau) + tau/4 - 1/2 = 1/8 (finite-n deviation allowed).
    let c = config(200, 200, 200, &[0.5]);
    let out = run_experiment(&c).unwrap();
    let report = &out.reports[0];
    assert!(
        (report.mc_mean - 0.125).abs() <= 0.15 * 0.125,
        "mc_mean {} deviates more than 15% from 0.125",
        report.mc_mean
    );
    assert_eq!(report.infeasible_count, 0);
}

#[test]
fn no_experiment_violates_the_universal_bound() {
    use overfit_core::sim::violates_universal_bound;
    for (n, p) in [(20, 40), (30, 30), (24, 96)] {
        let out = run_experiment(&config(n, p, 40, &[0.1, 0.4, 0.8, 1.0])).unwrap();
        for report in &out.reports {
            assert!(
                !violates_universal_bound(report),
                "bound violated at n={n} p={p} tau={}",
                report.tau
            );
        }
    }
}

#[test]
fn heavy_tailed_noise_runs_clean() {
    let mut c = config(10, 20, 6, &[0.25]);
    c.noise_dist = NoiseDist::StudentT { dof: 5 };
    let out = run_experiment(&c).unwrap();
    assert!(out.trial_errors.is_empty());
    assert!(out.reports[0].mc_mean.is_finite());

    c.noise_dist = NoiseDist::RademacherScaled;
    let out = run_experiment(&c).unwrap();
    assert!(out.trial_errors.is_empty());
}
