//! Threaded experiment driver. Trials are independent and deterministic per
//! index, so workers take strided index sets and results are collected into
//! an index-ordered table before the (fixed-order) aggregation — the output
//! is byte-identical for every thread count.

use overfit_core::sim::{aggregate, run_trial, ExperimentConfig, ExperimentOutput, SimError, TrialOutcome};

/// Run all trials on `threads` workers (0 = one per available core) and
/// aggregate. Equivalent to `overfit_core::sim::run_experiment`.
pub fn run_experiment_threaded(
    config: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentOutput, SimError> {
    config.validate()?;
    let workers = if threads == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        threads
    }
    .clamp(1, config.trials.max(1));

    let per_trial: Vec<Result<Vec<TrialOutcome>, SimError>> = if workers == 1 {
        (0..config.trials).map(|i| run_trial(config, i)).collect()
    } else {
        let mut slots: Vec<Option<Result<Vec<TrialOutcome>, SimError>>> =
            (0..config.trials).map(|_| None).collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    scope.spawn(move || {
                        (w..config.trials)
                            .step_by(workers)
                            .map(|i| (i, run_trial(config, i)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for handle in handles {
                for (i, result) in handle.join().expect("worker panicked") {
                    slots[i] = Some(result);
                }
            }
        });
        slots.into_iter().map(|s| s.expect("trial not run")).collect()
    };
    aggregate(config, &per_trial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use overfit_core::mp::OverfitFraction;
    use overfit_core::sim::{run_experiment, BetaStarSpec, FeatureDist, NoiseDist};

    #[test]
    fn thread_count_does_not_change_bytes() {
        let config = ExperimentConfig {
            n: 10,
            p: 20,
            sigma: 1.0,
            tau_grid: vec![OverfitFraction::new(0.3).unwrap()],
            trials: 12,
            master_seed: 7,
            feature_dist: FeatureDist::GaussianIid,
            noise_dist: NoiseDist::Gaussian,
            beta_star_spec: BetaStarSpec::Zero,
        };
        let sequential = run_experiment(&config).unwrap();
        for workers in [1, 2, 5] {
            let threaded = run_experiment_threaded(&config, workers).unwrap();
            for (a, b) in sequential.reports.iter().zip(&threaded.reports) {
                assert_eq!(a.mc_mean.to_bits(), b.mc_mean.to_bits());
                assert_eq!(a.mc_stderr.to_bits(), b.mc_stderr.to_bits());
                assert_eq!(a.infeasible_count, b.infeasible_count);
            }
        }
    }
}
