//! Seeded Monte Carlo experiments and analytic curve tables.
//!
//! An experiment samples regression instances, runs the per-instance solver
//! at every `tau` in the grid, and aggregates the losses next to the
//! analytic value and the lower bounds. Everything is deterministic given
//! the configuration: trial `i` draws from a generator seeded by
//! [`crate::rng::trial_seed`], and the per-instance draw order is fixed as
//!
//! 1. features, row-major (`n * p` values, one per matrix entry),
//! 2. `beta_star` (`p` values, only for the random-direction spec),
//! 3. noise (`n` values).
//!
//! Trials are independent; they may run on any number of threads as long as
//! per-trial results are collected by trial index and fed to [`aggregate`],
//! whose reductions are fixed-order and compensated.

use alloc::vec::Vec;
use libm::sqrt;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::mp::{
    analytic_excess_loss, small_tau_bound, universal_bound, universal_bound_ratio,
    AspectRatio, BoundVariant, ExcessValue, MpError, OverfitFraction,
};
use crate::quad::neumaier_sum;
use crate::rng::{trial_seed, Xoshiro256PlusPlus};
use crate::solver::{
    self, solve_from_spectrum, spectrum_of, whiten, ProblemInstance, SolveStatus, SolverError,
};

/// Configuration errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    /// A structurally invalid configuration.
    #[error("invalid config: {0}")]
    InvalidConfig(&'static str),
    /// Propagated solver failure.
    #[error(transparent)]
    Solver(#[from] SolverError),
    /// Propagated analytic-layer failure.
    #[error(transparent)]
    Mp(#[from] MpError),
}

/// Feature sampling scheme.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureDist {
    /// I.i.d. standard normal entries; recorded covariance is the identity.
    GaussianIid,
    /// Rows `Sigma^(1/2) z` for i.i.d. standard normal `z`; the matrix is the
    /// recorded covariance.
    GaussianCovariance(DMatrix<f64>),
}

/// Noise sampling scheme; every variant is scaled to variance `sigma^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseDist {
    /// Gaussian noise.
    Gaussian,
    /// Student-t with integer `dof >= 5` (finite `4 + eta` moments with
    /// `eta = 1/2` at the default `dof = 5`), rescaled to variance `sigma^2`.
    StudentT {
        /// Degrees of freedom.
        dof: u32,
    },
    /// `+sigma` or `-sigma` with equal probability.
    RademacherScaled,
}

/// How the optimal coefficient vector is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaStarSpec {
    /// `beta_star = 0`: targets are pure noise.
    Zero,
    /// Uniform random direction on the unit sphere.
    UnitSphereRandom,
}

/// Full description of a Monte Carlo experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Samples per instance.
    pub n: usize,
    /// Features per instance.
    pub p: usize,
    /// Noise standard deviation.
    pub sigma: f64,
    /// Overfit fractions to solve at.
    pub tau_grid: Vec<OverfitFraction>,
    /// Instances to draw.
    pub trials: usize,
    /// Master seed; trial `i` uses `trial_seed(master_seed, i)`.
    pub master_seed: u64,
    /// Feature scheme.
    pub feature_dist: FeatureDist,
    /// Noise scheme.
    pub noise_dist: NoiseDist,
    /// Coefficient scheme.
    pub beta_star_spec: BetaStarSpec,
}

impl ExperimentConfig {
    /// Check the invariants that are not enforced by construction.
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n == 0 || self.p == 0 {
            return Err(SimError::InvalidConfig("n and p must be positive"));
        }
        if !(self.sigma > 0.0) {
            return Err(SimError::InvalidConfig("sigma must be positive"));
        }
        if self.trials == 0 {
            return Err(SimError::InvalidConfig("trials must be >= 1"));
        }
        if self.tau_grid.is_empty() {
            return Err(SimError::InvalidConfig("tau grid must be nonempty"));
        }
        if let NoiseDist::StudentT { dof } = self.noise_dist {
            // The moment condition needs dof > 4.5; integer dof >= 5.
            if dof < 5 {
                return Err(SimError::InvalidConfig("student-t dof must be >= 5"));
            }
        }
        if let FeatureDist::GaussianCovariance(cov) = &self.feature_dist {
            if cov.nrows() != self.p || cov.ncols() != self.p {
                return Err(SimError::InvalidConfig("covariance must be p x p"));
            }
        }
        Ok(())
    }

    /// Sample-to-parameter ratio `n/p`.
    pub fn gamma(&self) -> f64 {
        self.n as f64 / self.p as f64
    }
}

/// Per-`tau` outcome of a single trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrialOutcome {
    /// Solved; the minimal excess linear loss.
    Loss(f64),
    /// The kernel residual exceeds `tau sigma^2`: no model qualifies.
    Infeasible,
}

/// One row of the experiment summary: everything known about one `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcessLossReport {
    /// Overfit fraction.
    pub tau: f64,
    /// `n / p`.
    pub gamma: f64,
    /// Mean loss over completed (feasible, error-free) trials; NaN when none.
    pub mc_mean: f64,
    /// Standard error of the mean; 0 with fewer than two completed trials.
    pub mc_stderr: f64,
    /// Trials whose kernel residual exceeded `tau sigma^2`.
    pub infeasible_count: usize,
    /// Asymptotic value at `gamma = n/p`, or the divergence sentinel.
    pub analytic_value: ExcessValue,
    /// Universal bound, canonical square-root form.
    pub universal_bound_sqrt: f64,
    /// Universal bound, superseded cube-root form.
    pub universal_bound_legacy: f64,
    /// Small-`tau` bound when `(tau, gamma)` is inside its stated domain.
    pub small_tau_bound: Option<f64>,
}

/// Everything an experiment produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    /// One report per `tau` in grid order.
    pub reports: Vec<ExcessLossReport>,
    /// Trials that failed with a solver error, excluded from every report.
    pub trial_errors: Vec<(usize, SolverError)>,
}

/// Draw the instance for `trial_index`. Deterministic given
/// `(config.master_seed, trial_index)`.
pub fn sample_instance(
    config: &ExperimentConfig,
    trial_index: usize,
) -> Result<ProblemInstance, SimError> {
    config.validate()?;
    if trial_index >= config.trials {
        return Err(SimError::InvalidConfig("trial index out of range"));
    }
    let mut rng = Xoshiro256PlusPlus::from_seed(trial_seed(config.master_seed, trial_index as u64));
    let n = config.n;
    let p = config.p;

    // Fill row-major explicitly: the documented draw order must not depend
    // on the matrix storage layout.
    let mut raw = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            raw[(i, j)] = rng.normal();
        }
    }

    let (features, covariance) = match &config.feature_dist {
        FeatureDist::GaussianIid => (raw, DMatrix::identity(p, p)),
        FeatureDist::GaussianCovariance(cov) => {
            let root = solver::sym_sqrt(cov)?;
            (raw * &root, cov.clone())
        }
    };

    let beta_star = match config.beta_star_spec {
        BetaStarSpec::Zero => DVector::zeros(p),
        BetaStarSpec::UnitSphereRandom => {
            let mut v = DVector::from_fn(p, |_, _| 0.0);
            for i in 0..p {
                v[i] = rng.normal();
            }
            let norm = v.norm();
            if norm > 0.0 {
                v /= norm;
            }
            v
        }
    };

    let sigma = config.sigma;
    let mut noise = DVector::zeros(n);
    match config.noise_dist {
        NoiseDist::Gaussian => {
            for i in 0..n {
                noise[i] = sigma * rng.normal();
            }
        }
        NoiseDist::StudentT { dof } => {
            // Rescale to variance sigma^2: Var(t_dof) = dof/(dof - 2).
            let scale = sigma * sqrt((dof as f64 - 2.0) / dof as f64);
            for i in 0..n {
                noise[i] = scale * rng.student_t(dof);
            }
        }
        NoiseDist::RademacherScaled => {
            for i in 0..n {
                noise[i] = sigma * rng.rademacher();
            }
        }
    }

    let targets = &features * &beta_star + noise;
    Ok(ProblemInstance::new(
        features,
        covariance,
        targets,
        beta_star,
        sigma * sigma,
    )?)
}

/// Run one trial: sample, whiten, decompose once, then solve every `tau`.
pub fn run_trial(
    config: &ExperimentConfig,
    trial_index: usize,
) -> Result<Vec<TrialOutcome>, SimError> {
    let instance = sample_instance(config, trial_index)?;
    let (w, xi) = whiten(&instance)?;
    let (spectrum, noise) = spectrum_of(&w, &xi)?;
    let mut outcomes = Vec::with_capacity(config.tau_grid.len());
    for &tau in &config.tau_grid {
        match solve_from_spectrum(
            &spectrum,
            &noise,
            instance.n,
            instance.p,
            instance.sigma2,
            tau,
        ) {
            Ok(result) => {
                debug_assert!(
                    result.status != SolveStatus::Infeasible,
                    "infeasible must surface as an error"
                );
                outcomes.push(TrialOutcome::Loss(result.excess_lin_loss));
            }
            Err(SolverError::Infeasible { .. }) => outcomes.push(TrialOutcome::Infeasible),
            Err(other) => return Err(other.into()),
        }
    }
    Ok(outcomes)
}

/// Reduce per-trial outcomes (indexed by trial) into per-`tau` reports.
///
/// The reduction order is fixed by trial index and uses compensated sums, so
/// the result is bit-identical no matter how the trials were scheduled.
pub fn aggregate(
    config: &ExperimentConfig,
    per_trial: &[Result<Vec<TrialOutcome>, SimError>],
) -> Result<ExperimentOutput, SimError> {
    config.validate()?;
    let sigma2 = config.sigma * config.sigma;
    let gamma_value = config.gamma();
    let gamma = AspectRatio::new(gamma_value)?;

    let mut trial_errors = Vec::new();
    for (index, outcome) in per_trial.iter().enumerate() {
        if let Err(err) = outcome {
            let solver_error = match err {
                SimError::Solver(e) => e.clone(),
                _ => return Err(err.clone()),
            };
            trial_errors.push((index, solver_error));
        }
    }

    let mut reports = Vec::with_capacity(config.tau_grid.len());
    for (k, &tau) in config.tau_grid.iter().enumerate() {
        let mut losses = Vec::with_capacity(per_trial.len());
        let mut infeasible_count = 0usize;
        for outcome in per_trial.iter().flatten() {
            match outcome[k] {
                TrialOutcome::Loss(v) => losses.push(v),
                TrialOutcome::Infeasible => infeasible_count += 1,
            }
        }
        let completed = losses.len();
        let (mc_mean, mc_stderr) = if completed == 0 {
            (f64::NAN, 0.0)
        } else {
            let mean = neumaier_sum(losses.iter().copied()) / completed as f64;
            let stderr = if completed < 2 {
                0.0
            } else {
                let ss = neumaier_sum(losses.iter().map(|&x| (x - mean) * (x - mean)));
                sqrt(ss / (completed as f64 * (completed - 1) as f64))
            };
            (mean, stderr)
        };
        reports.push(ExcessLossReport {
            tau: tau.get(),
            gamma: gamma_value,
            mc_mean,
            mc_stderr,
            infeasible_count,
            analytic_value: analytic_excess_loss(tau, gamma, sigma2)?,
            universal_bound_sqrt: universal_bound(tau, config.n, config.p, sigma2, BoundVariant::Sqrt),
            universal_bound_legacy: universal_bound(
                tau,
                config.n,
                config.p,
                sigma2,
                BoundVariant::CubeRootLegacy,
            ),
            small_tau_bound: small_tau_bound(tau, gamma, sigma2).ok(),
        });
    }
    Ok(ExperimentOutput {
        reports,
        trial_errors,
    })
}

/// Run the whole experiment sequentially.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, SimError> {
    config.validate()?;
    let per_trial: Vec<Result<Vec<TrialOutcome>, SimError>> = (0..config.trials)
        .map(|i| run_trial(config, i))
        .collect();
    aggregate(config, &per_trial)
}

/// The testable form of the expectation bound: flags a report whose Monte
/// Carlo mean sits more than three standard errors *below* the universal
/// square-root bound.
pub fn violates_universal_bound(report: &ExcessLossReport) -> bool {
    report.mc_mean.is_finite()
        && report.mc_mean < report.universal_bound_sqrt - 3.0 * report.mc_stderr
}

// ---------------------------------------------------------------------------
// Analytic curve tables (no sampling).
// ---------------------------------------------------------------------------

/// One row of a per-gamma curve table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    /// Overfit fraction.
    pub tau: f64,
    /// Asymptotic minimal excess loss (or the divergence sentinel).
    pub analytic: ExcessValue,
    /// Universal bound, square-root form, with `n/p := gamma`.
    pub universal_sqrt: f64,
    /// Universal bound, legacy cube-root form.
    pub universal_legacy: f64,
    /// Small-`tau` bound inside its stated domain.
    pub small_tau: Option<f64>,
}

/// Evaluate the full bound family along a `tau` grid at fixed `gamma`.
pub fn curve_rows(
    gamma: AspectRatio,
    taus: &[OverfitFraction],
    sigma2: f64,
) -> Result<Vec<CurveRow>, SimError> {
    taus.iter()
        .map(|&tau| {
            Ok(CurveRow {
                tau: tau.get(),
                analytic: analytic_excess_loss(tau, gamma, sigma2)?,
                universal_sqrt: universal_bound_ratio(tau, gamma.get(), sigma2, BoundVariant::Sqrt),
                universal_legacy: universal_bound_ratio(
                    tau,
                    gamma.get(),
                    sigma2,
                    BoundVariant::CubeRootLegacy,
                ),
                small_tau: small_tau_bound(tau, gamma, sigma2).ok(),
            })
        })
        .collect()
}

/// Which figure family to tabulate.
#[derive(Debug, Clone, PartialEq)]
pub enum FigureMode {
    /// Loss and universal bound against `tau`, one table per `gamma`.
    Fig1a {
        /// Fixed aspect ratios.
        gammas: Vec<f64>,
        /// Abscissa grid.
        taus: Vec<f64>,
    },
    /// Loss and universal bound against `1/gamma`, one table per `tau`.
    Fig1b {
        /// Fixed overfit fractions.
        taus: Vec<f64>,
        /// Abscissa grid of `1/gamma` values.
        inv_gammas: Vec<f64>,
    },
    /// Loss and small-`tau` bound against `tau`, one table per `gamma < 1`.
    Fig2 {
        /// Fixed aspect ratios, each below 1.
        gammas: Vec<f64>,
        /// Abscissa grid.
        taus: Vec<f64>,
    },
}

/// One abscissa of a figure table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigurePoint {
    /// Abscissa (`tau` or `1/gamma` depending on the mode).
    pub x: f64,
    /// Asymptotic minimal excess loss.
    pub analytic: ExcessValue,
    /// The bound curve of the mode; `None` where out of domain.
    pub bound: Option<f64>,
}

/// A figure table: one fixed parameter, many abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    /// The fixed `gamma` (fig1a, fig2) or fixed `tau` (fig1b).
    pub fixed: f64,
    /// Rows in grid order.
    pub points: Vec<FigurePoint>,
}

/// Tabulate the analytic figure curves; pure computation, no sampling.
pub fn figure_curves(mode: &FigureMode, sigma2: f64) -> Result<Vec<FigureTable>, SimError> {
    match mode {
        FigureMode::Fig1a { gammas, taus } => gammas
            .iter()
            .map(|&g| {
                let gamma = AspectRatio::new(g)?;
                let points = taus
                    .iter()
                    .map(|&t| {
                        let tau = OverfitFraction::new(t)?;
                        Ok(FigurePoint {
                            x: t,
                            analytic: analytic_excess_loss(tau, gamma, sigma2)?,
                            bound: Some(universal_bound_ratio(
                                tau,
                                g,
                                sigma2,
                                BoundVariant::Sqrt,
                            )),
                        })
                    })
                    .collect::<Result<Vec<_>, SimError>>()?;
                Ok(FigureTable { fixed: g, points })
            })
            .collect(),
        FigureMode::Fig1b { taus, inv_gammas } => taus
            .iter()
            .map(|&t| {
                let tau = OverfitFraction::new(t)?;
                let points = inv_gammas
                    .iter()
                    .map(|&inv_g| {
                        if !(inv_g > 0.0) {
                            return Err(SimError::InvalidConfig("1/gamma must be positive"));
                        }
                        let g = 1.0 / inv_g;
                        let gamma = AspectRatio::new(g)?;
                        Ok(FigurePoint {
                            x: inv_g,
                            analytic: analytic_excess_loss(tau, gamma, sigma2)?,
                            bound: Some(universal_bound_ratio(
                                tau,
                                g,
                                sigma2,
                                BoundVariant::Sqrt,
                            )),
                        })
                    })
                    .collect::<Result<Vec<_>, SimError>>()?;
                Ok(FigureTable { fixed: t, points })
            })
            .collect(),
        FigureMode::Fig2 { gammas, taus } => gammas
            .iter()
            .map(|&g| {
                if !(g > 0.0 && g < 1.0) {
                    return Err(SimError::InvalidConfig("fig2 requires gamma in (0, 1)"));
                }
                let gamma = AspectRatio::new(g)?;
                let points = taus
                    .iter()
                    .map(|&t| {
                        let tau = OverfitFraction::new(t)?;
                        Ok(FigurePoint {
                            x: t,
                            analytic: analytic_excess_loss(tau, gamma, sigma2)?,
                            bound: small_tau_bound(tau, gamma, sigma2).ok(),
                        })
                    })
                    .collect::<Result<Vec<_>, SimError>>()?;
                Ok(FigureTable { fixed: g, points })
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn base_config() -> ExperimentConfig {
        ExperimentConfig {
            n: 8,
            p: 16,
            sigma: 1.0,
            tau_grid: vec![
                OverfitFraction::new(0.25).unwrap(),
                OverfitFraction::new(1.0).unwrap(),
            ],
            trials: 4,
            master_seed: 42,
            feature_dist: FeatureDist::GaussianIid,
            noise_dist: NoiseDist::Gaussian,
            beta_star_spec: BetaStarSpec::Zero,
        }
    }

    #[test]
    fn validation_catches_bad_configs() {
        let mut c = base_config();
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = base_config();
        c.noise_dist = NoiseDist::StudentT { dof: 4 };
        assert!(c.validate().is_err());
        let mut c = base_config();
        c.feature_dist = FeatureDist::GaussianCovariance(DMatrix::identity(3, 3));
        assert!(c.validate().is_err());
        assert!(base_config().validate().is_ok());
    }

    #[test]
    fn iid_features_record_identity_covariance() {
        let inst = sample_instance(&base_config(), 0).unwrap();
        assert_eq!(inst.covariance, DMatrix::identity(16, 16));
        assert_eq!(inst.n, 8);
        assert_eq!(inst.p, 16);
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = base_config();
        let a = sample_instance(&c, 2).unwrap();
        let b = sample_instance(&c, 2).unwrap();
        assert_eq!(a.features, b.features);
        assert_eq!(a.targets, b.targets);
        // A different trial draws different data.
        let other = sample_instance(&c, 3).unwrap();
        assert_ne!(a.features, other.features);
    }

    #[test]
    fn gaussian_noise_variance() {
        let mut c = base_config();
        c.n = 100_000;
        c.p = 1;
        c.sigma = 2.0;
        c.trials = 1;
        let inst = sample_instance(&c, 0).unwrap();
        // beta_star = 0, so targets are the raw noise.
        let var = inst.targets.iter().map(|v| v * v).sum::<f64>() / c.n as f64;
        assert!((3.9..=4.1).contains(&var), "var {var}");
    }

    #[test]
    fn student_t_noise_is_rescaled_to_sigma2() {
        let mut c = base_config();
        c.n = 200_000;
        c.p = 1;
        c.sigma = 1.5;
        c.trials = 1;
        c.noise_dist = NoiseDist::StudentT { dof: 5 };
        let inst = sample_instance(&c, 0).unwrap();
        let var = inst.targets.iter().map(|v| v * v).sum::<f64>() / c.n as f64;
        assert!((var - 2.25).abs() < 0.15, "var {var}");
    }

    #[test]
    fn rademacher_noise_has_exact_magnitude() {
        let mut c = base_config();
        c.noise_dist = NoiseDist::RademacherScaled;
        c.sigma = 0.7;
        let inst = sample_instance(&c, 0).unwrap();
        for v in inst.targets.iter() {
            assert!((v.abs() - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_sphere_beta_has_unit_norm() {
        let mut c = base_config();
        c.beta_star_spec = BetaStarSpec::UnitSphereRandom;
        let inst = sample_instance(&c, 1).unwrap();
        assert!((inst.beta_star.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tau_one_reports_zero_loss() {
        let out = run_experiment(&base_config()).unwrap();
        let report = &out.reports[1]; // tau = 1
        assert_eq!(report.mc_mean, 0.0);
        assert_eq!(report.mc_stderr, 0.0);
        assert_eq!(report.infeasible_count, 0);
        assert!(out.trial_errors.is_empty());
    }

    #[test]
    fn reports_are_bit_identical_across_runs() {
        let c = base_config();
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        for (x, y) in a.reports.iter().zip(&b.reports) {
            assert_eq!(x.mc_mean.to_bits(), y.mc_mean.to_bits());
            assert_eq!(x.mc_stderr.to_bits(), y.mc_stderr.to_bits());
            assert_eq!(x.infeasible_count, y.infeasible_count);
        }
    }

    #[test]
    fn aggregation_is_schedule_independent() {
        // Feeding the same per-trial slice to aggregate (as a threaded runner
        // would after index-ordered collection) reproduces run_experiment.
        let c = base_config();
        let per_trial: Vec<_> = (0..c.trials).map(|i| run_trial(&c, i)).collect();
        let direct = run_experiment(&c).unwrap();
        let reduced = aggregate(&c, &per_trial).unwrap();
        for (x, y) in direct.reports.iter().zip(&reduced.reports) {
            assert_eq!(x.mc_mean.to_bits(), y.mc_mean.to_bits());
        }
    }

    #[test]
    fn overparameterized_infeasibility_is_counted() {
        // gamma = n/p = 4 with tau = 0.25 < 1 - p/n = 0.75: the kernel
        // carries about 3/4 of the noise, so trials are typically infeasible.
        let mut c = base_config();
        c.n = 64;
        c.p = 16;
        c.tau_grid = vec![OverfitFraction::new(0.25).unwrap()];
        c.trials = 10;
        let out = run_experiment(&c).unwrap();
        assert!(out.reports[0].infeasible_count >= 9);
        assert_eq!(out.reports[0].analytic_value, ExcessValue::Infinite);
    }

    #[test]
    fn curve_rows_peak_value() {
        let gamma = AspectRatio::new(1.0).unwrap();
        let taus = [OverfitFraction::new(0.5).unwrap(), OverfitFraction::new(1.0).unwrap()];
        let rows = curve_rows(gamma, &taus, 1.0).unwrap();
        assert!((rows[0].analytic.finite().unwrap() - 0.125).abs() < 1e-8);
        assert_eq!(rows[1].analytic, ExcessValue::Finite(0.0));
        assert_eq!(rows[1].universal_sqrt, 0.0);
        assert!(rows[0].small_tau.is_none()); // gamma = 1: out of domain
    }

    #[test]
    fn figure_tables_match_modes() {
        let fig1a = figure_curves(
            &FigureMode::Fig1a {
                gammas: vec![1.0],
                taus: vec![0.5, 1.0],
            },
            1.0,
        )
        .unwrap();
        assert_eq!(fig1a.len(), 1);
        assert!((fig1a[0].points[0].analytic.finite().unwrap() - 0.125).abs() < 1e-8);
        assert_eq!(fig1a[0].points[1].analytic, ExcessValue::Finite(0.0));

        // fig2 at gamma = 1/2, tau = 0: bound and analytic both sigma^2.
        let fig2 = figure_curves(
            &FigureMode::Fig2 {
                gammas: vec![0.5],
                taus: vec![0.0, 0.6],
            },
            1.0,
        )
        .unwrap();
        let p0 = fig2[0].points[0];
        assert!((p0.analytic.finite().unwrap() - 1.0).abs() < 1e-10);
        assert!((p0.bound.unwrap() - 1.0).abs() < 1e-12);
        // tau = 0.6 > 1 - gamma: bound out of domain.
        assert_eq!(fig2[0].points[1].bound, None);

        assert!(figure_curves(
            &FigureMode::Fig2 {
                gammas: vec![1.5],
                taus: vec![0.1],
            },
            1.0,
        )
        .is_err());

        // fig1b: infeasible cells surface the sentinel.
        let fig1b = figure_curves(
            &FigureMode::Fig1b {
                taus: vec![0.25],
                inv_gammas: vec![0.25, 4.0],
            },
            1.0,
        )
        .unwrap();
        assert_eq!(fig1b[0].points[0].analytic, ExcessValue::Infinite); // gamma = 4
        assert!(fig1b[0].points[1].analytic.finite().is_some()); // gamma = 1/4
    }

    #[test]
    fn bound_violation_detector() {
        let mut report = ExcessLossReport {
            tau: 0.25,
            gamma: 0.25,
            mc_mean: 0.05,
            mc_stderr: 0.001,
            infeasible_count: 0,
            analytic_value: ExcessValue::Finite(0.07),
            universal_bound_sqrt: 0.0625,
            universal_bound_legacy: 0.01,
            small_tau_bound: None,
        };
        assert!(violates_universal_bound(&report));
        report.mc_mean = 0.07;
        assert!(!violates_universal_bound(&report));
        report.mc_mean = f64::NAN;
        assert!(!violates_universal_bound(&report));
    }
}
