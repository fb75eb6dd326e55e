//! The `verify` command: property suites over the inequality lab, the
//! Stieltjes layer, the bound family, and the solver, with one PASS/FAIL
//! line per check and a counterexample dump on failure.

use nalgebra::{DMatrix, DVector};
use overfit_core::ineq::{
    am_hm_check, chebyshev_sum_check, deterministic_bound_check, g_function,
    invalid_bound_counterexample, EigenSample,
};
use overfit_core::mp::{
    analytic_excess_loss, density_mass, f_constraint, kolmogorov_distance,
    monotonicity_diagnostic, peak_excess_loss, small_tau_bound, stieltjes_m,
    stieltjes_m_prime, stieltjes_m_prime_quadrature, stieltjes_m_quadrature,
    universal_bound_ratio, AspectRatio, BoundVariant, ExcessValue, MpModel, OverfitFraction,
};
use overfit_core::rng::Xoshiro256PlusPlus;
use overfit_core::sim::{sample_instance, BetaStarSpec, ExperimentConfig, FeatureDist, NoiseDist};
use overfit_core::solver::{
    brute_force_oracle, noise_quadratic_check, solve_min_excess, spectrum_of, whiten,
    ProblemInstance, SolveStatus, SolverError,
};

/// Which suites to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// Every suite below.
    All,
    /// g-function, AM-HM, Chebyshev, deterministic bound, counterexample.
    Inequalities,
    /// Closed forms against quadrature, limit laws, monotonicities.
    Stieltjes,
    /// Bound dominance, tightness, peak agreement, gamma-monotonicity.
    Bounds,
    /// Oracle equivalence, KKT, invariances, noise identity, MP convergence.
    Solver,
}

struct Check {
    name: &'static str,
    outcome: Result<(), String>,
}

fn gamma(g: f64) -> AspectRatio {
    AspectRatio::new(g).unwrap()
}

fn tau(t: f64) -> OverfitFraction {
    OverfitFraction::new(t).unwrap()
}

fn log_uniform(rng: &mut Xoshiro256PlusPlus, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.uniform()).exp()
}

fn random_sorted_sample(rng: &mut Xoshiro256PlusPlus, max_len: usize) -> Vec<f64> {
    let len = 2 + (rng.next_u64() as usize) % (max_len - 1);
    let mut values: Vec<f64> = (0..len).map(|_| log_uniform(rng, 1e-4, 1e4)).collect();
    values.sort_unstable_by(|a, b| b.total_cmp(a));
    values
}

fn inequality_checks(seed: u64, samples: usize) -> Vec<Check> {
    let mut checks = Vec::new();

    checks.push(Check {
        name: "g_function >= 1 on random eigenvalue samples",
        outcome: (|| {
            let mut rng = Xoshiro256PlusPlus::from_seed(seed);
            for i in 0..samples {
                let values = random_sorted_sample(&mut rng, 50);
                let x = log_uniform(&mut rng, 1e-6, 1e6);
                let sample = EigenSample::new(values.clone(), x).map_err(|e| e.to_string())?;
                let g = g_function(&sample);
                if g < 1.0 - 1e-12 {
                    return Err(format!(
                        "sample {i}: g = {g} < 1 at x = {x}, values = {values:?}"
                    ));
                }
            }
            Ok(())
        })(),
    });

    checks.push(Check {
        name: "g_function nonincreasing along x grids",
        outcome: (|| {
            let mut rng = Xoshiro256PlusPlus::from_seed(seed ^ 0xA5A5);
            for i in 0..200 {
                let values = random_sorted_sample(&mut rng, 30);
                let x0 = log_uniform(&mut rng, 1e-6, 1.0);
                let mut last = f64::INFINITY;
                for k in 0..40 {
                    let x = x0 * f64::powf(1.5, k as f64);
                    let sample =
                        EigenSample::new(values.clone(), x).map_err(|e| e.to_string())?;
                    let g = g_function(&sample);
                    if g > last + 1e-12 {
                        return Err(format!(
                            "sample {i}: g increased at x = {x}: {g} > {last}, values = {values:?}"
                        ));
                    }
                    last = g;
                }
            }
            Ok(())
        })(),
    });

    checks.push(Check {
        name: "AM-HM inequality sweep",
        outcome: (|| {
            let mut rng = Xoshiro256PlusPlus::from_seed(seed ^ 0x5A5A);
            for i in 0..samples {
                let len = 1 + (rng.next_u64() as usize) % 49;
                let values: Vec<f64> = (0..len).map(|_| log_uniform(&mut rng, 1e-6, 1e6)).collect();
                let (lhs, rhs) = am_hm_check(&values).map_err(|e| e.to_string())?;
                if lhs < rhs - 1e-12 * rhs.abs().max(1.0) {
                    return Err(format!("sample {i}: {lhs} < {rhs}, values = {values:?}"));
                }
            }
            Ok(())
        })(),
    });

    checks.push(Check {
        name: "Chebyshev sum inequality sweep",
        outcome: (|| {
            let mut rng = Xoshiro256PlusPlus::from_seed(seed ^ 0x3C3C);
            for i in 0..samples {
                let len = 1 + (rng.next_u64() as usize) % 49;
                let mut a: Vec<f64> = (0..len).map(|_| 1e3 * rng.uniform()).collect();
                let mut b: Vec<f64> = (0..len).map(|_| 1e3 * rng.uniform()).collect();
                a.sort_unstable_by(f64::total_cmp);
                b.sort_unstable_by(|x, y| y.total_cmp(x));
                let (lhs, rhs) = chebyshev_sum_check(&a, &b).map_err(|e| e.to_string())?;
                if lhs > rhs + 1e-9 * rhs.abs().max(1.0) {
                    return Err(format!("sample {i}: {lhs} > {rhs}"));
                }
            }
            Ok(())
        })(),
    });

    checks.push(Check {
        name: "deterministic spectrum bound sweep",
        outcome: (|| {
            let mut rng = Xoshiro256PlusPlus::from_seed(seed ^ 0x77);
            for i in 0..1000 {
                let values = random_sorted_sample(&mut rng, 50);
                for &t in &[0.1, 0.3, 0.5, 0.7, 0.9] {
                    let (lhs, rhs) =
                        deterministic_bound_check(&values, t).map_err(|e| e.to_string())?;
                    if lhs < rhs - 1e-12 {
                        return Err(format!(
                            "spectrum {i} tau {t}: {lhs} < {rhs}, values = {values:?}"
                        ));
                    }
                }
            }
            Ok(())
        })(),
    });

    checks.push(Check {
        name: "invalid bound variant refuted by counterexample",
        outcome: (|| {
            let c = invalid_bound_counterexample(1e-6, 0.75).map_err(|e| e.to_string())?;
            if c.lhs >= c.rhs {
                return Err(format!(
                    "construction failed: lhs {} >= rhs {} (lambda* {})",
                    c.lhs, c.rhs, c.lambda_star
                ));
            }
            for eps in [1e-3, 1e-4, 1e-5] {
                for t in [0.6, 0.7, 0.8, 0.9] {
                    let c = invalid_bound_counterexample(eps, t).map_err(|e| e.to_string())?;
                    if c.lhs >= c.rhs {
                        return Err(format!(
                            "eps {eps} tau {t}: lhs {} >= rhs {}",
                            c.lhs, c.rhs
                        ));
                    }
                }
            }
            Ok(())
        })(),
    });

    checks
}

fn stieltjes_checks(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();

    checks.push(Check {
        name: "closed forms match density quadrature",
        outcome: (|| {
            let mut rng = Xoshiro256PlusPlus::from_seed(seed ^ 0x1111);
            for i in 0..50 {
                let z = log_uniform(&mut rng, 1e-3, 10.0);
                let g = log_uniform(&mut rng, 0.05, 5.0);
                let ga = gamma(g);
                let m = stieltjes_m(z, ga).map_err(|e| e.to_string())?;
                let mq = stieltjes_m_quadrature(z, ga).map_err(|e| e.to_string())?;
                if (m - mq).abs() > 1e-7 * m.abs() {
                    return Err(format!("point {i} (z={z}, gamma={g}): m {m} vs quad {mq}"));
                }
                let mp = stieltjes_m_prime(z, ga).map_err(|e| e.to_string())?;
                let mpq = stieltjes_m_prime_quadrature(z, ga).map_err(|e| e.to_string())?;
                if (mp - mpq).abs() > 1e-7 * mp.abs() {
                    return Err(format!("point {i} (z={z}, gamma={g}): m' {mp} vs quad {mpq}"));
                }
            }
            Ok(())
        })(),
    });

    checks.push(Check {
        name: "limit laws at z -> 0",
        outcome: (|| {
            for g in [0.1, 0.5, 0.9] {
                let m = stieltjes_m(1e-8, gamma(g)).map_err(|e| e.to_string())?;
                let want = 1.0 / (1.0 - g);
                if (m - want).abs() > 1e-4 * want {
                    return Err(format!("gamma {g}: m {m} vs {want}"));
                }
                let mp = stieltjes_m_prime(1e-8, gamma(g)).map_err(|e| e.to_string())?;
                let want = 1.0 / (1.0 - g).powi(3);
                if (mp - want).abs() > 1e-4 * want {
                    return Err(format!("gamma {g}: m' {mp} vs {want}"));
                }
            }
            Ok(())
        })(),
    });

    checks.push(Check {
        name: "constraint function strictly increasing in lambda",
        outcome: (|| {
            for g in [0.1, 0.9, 1.0, 2.5] {
                let ga = gamma(g);
                let mut last = f_constraint(0.0, ga);
                for k in 1..150 {
                    let lam = 1e-3 * f64::powf(1.15, k as f64);
                    let f = f_constraint(lam, ga);
                    if f <= last {
                        return Err(format!("gamma {g}: f flat/decreasing at lambda {lam}"));
                    }
                    last = f;
                }
            }
            Ok(())
        })(),
    });

    checks.push(Check {
        name: "Stieltjes transform increasing in gamma",
        outcome: (|| {
            for z in [0.05, 0.7, 3.0] {
                let mut last = 0.0;
                for k in 0..60 {
                    let g = 0.05 + 0.1 * k as f64;
                    let m = stieltjes_m(z, gamma(g)).map_err(|e| e.to_string())?;
                    if m <= last {
                        return Err(format!("z {z}: m not increasing at gamma {g}"));
                    }
                    last = m;
                }
            }
            Ok(())
        })(),
    });

    checks.push(Check {
        name: "density plus atom normalizes to one",
        outcome: (|| {
            for g in [0.25, 1.0, 4.0] {
                let model = MpModel::new(gamma(g));
                let mass = model.atom_at_zero() + density_mass(&model);
                if (mass - 1.0).abs() > 1e-9 {
                    return Err(format!("gamma {g}: total mass {mass}"));
                }
            }
            Ok(())
        })(),
    });

    checks
}

fn bound_checks() -> Vec<Check> {
    let mut checks = Vec::new();

    checks.push(Check {
        name: "bound dominance on the 50x50 grid",
        outcome: (|| {
            for i in 0..50 {
                let t = i as f64 / 49.0;
                for j in 0..50 {
                    let g = 0.02 + (5.0 - 0.02) * j as f64 / 49.0;
                    let ga = gamma(g);
                    let t_of = tau(t);
                    let analytic = match analytic_excess_loss(t_of, ga, 1.0)
                        .map_err(|e| e.to_string())?
                    {
                        ExcessValue::Finite(v) => v,
                        ExcessValue::Infinite => continue,
                    };
                    let sqrt_b = universal_bound_ratio(t_of, g, 1.0, BoundVariant::Sqrt);
                    let legacy = universal_bound_ratio(t_of, g, 1.0, BoundVariant::CubeRootLegacy);
                    if analytic < sqrt_b - 1e-10 {
                        return Err(format!(
                            "tau {t} gamma {g}: analytic {analytic} < sqrt bound {sqrt_b}"
                        ));
                    }
                    if sqrt_b < legacy - 1e-10 {
                        return Err(format!("tau {t} gamma {g}: sqrt < legacy"));
                    }
                    if let Ok(small) = small_tau_bound(t_of, ga, 1.0) {
                        if analytic < small - 1e-10 {
                            return Err(format!(
                                "tau {t} gamma {g}: analytic {analytic} < small-tau {small}"
                            ));
                        }
                    }
                }
            }
            Ok(())
        })(),
    });

    checks.push(Check {
        name: "universal bound tight as gamma -> 0",
        outcome: (|| {
            let g = 1e-4;
            for t in [0.0, 0.25, 0.64, 1.0] {
                let v = analytic_excess_loss(tau(t), gamma(g), 1.0)
                    .map_err(|e| e.to_string())?
                    .finite()
                    .ok_or("unexpected divergence")?;
                let want = (1.0 - t.sqrt()) * (1.0 - t.sqrt());
                if (v / g - want).abs() > 1e-3 {
                    return Err(format!("tau {t}: {} vs {want}", v / g));
                }
            }
            Ok(())
        })(),
    });

    checks.push(Check {
        name: "peak closed form matches fixed-point pipeline",
        outcome: (|| {
            for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
                let peak = peak_excess_loss(tau(t), 1.0).map_err(|e| e.to_string())?;
                let pipe = analytic_excess_loss(tau(t), gamma(1.0), 1.0)
                    .map_err(|e| e.to_string())?
                    .finite()
                    .ok_or("unexpected divergence")?;
                if (peak - pipe).abs() > 1e-8 {
                    return Err(format!("tau {t}: {peak} vs {pipe}"));
                }
            }
            Ok(())
        })(),
    });

    checks.push(Check {
        name: "excess kernel increasing in gamma at fixed tau",
        outcome: (|| {
            let grid: Vec<AspectRatio> = (1..=9).map(|k| gamma(k as f64 / 10.0)).collect();
            for t in [0.25, 0.5, 0.75] {
                let points = monotonicity_diagnostic(tau(t), &grid);
                let mut last = 0.0;
                for p in &points {
                    let v = p.excess.ok_or("unexpected infeasible point")?;
                    if v <= last {
                        return Err(format!("tau {t}: not increasing at gamma {}", p.gamma));
                    }
                    last = v;
                }
            }
            Ok(())
        })(),
    });

    checks.push(Check {
        name: "sqrt variant dominates legacy variant pointwise",
        outcome: (|| {
            for k in 0..=1000 {
                let t = tau(k as f64 / 1000.0);
                let s = universal_bound_ratio(t, 1.0, 1.0, BoundVariant::Sqrt);
                let l = universal_bound_ratio(t, 1.0, 1.0, BoundVariant::CubeRootLegacy);
                if s < l - 1e-15 {
                    return Err(format!("violated at tau {}", t.get()));
                }
            }
            Ok(())
        })(),
    });

    checks
}

fn solver_checks(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();

    fn random_instance(
        rng: &mut Xoshiro256PlusPlus,
        n: usize,
        p: usize,
    ) -> ProblemInstance {
        let mut features = DMatrix::zeros(n, p);
        for i in 0..n {
            for j in 0..p {
                features[(i, j)] = rng.normal();
            }
        }
        let beta = DVector::from_fn(p, |_, _| rng.normal());
        let noise = DVector::from_fn(n, |_, _| rng.normal());
        let targets = &features * &beta + noise;
        ProblemInstance::new(features, DMatrix::identity(p, p), targets, beta, 1.0).unwrap()
    }

    checks.push(Check {
        name: "spectral solver matches brute-force oracle",
        outcome: (|| {
            let mut rng = Xoshiro256PlusPlus::from_seed(seed ^ 0xBEEF);
            for i in 0..25 {
                let n = 1 + (rng.next_u64() % 3) as usize;
                let p = 1 + (rng.next_u64() % 3) as usize;
                let instance = random_instance(&mut rng, n, p);
                for &t in &[0.0, 0.1, 0.5, 0.9] {
                    match (
                        solve_min_excess(&instance, tau(t)),
                        brute_force_oracle(&instance, tau(t), 15),
                    ) {
                        (Ok(solved), Ok(oracle)) => {
                            if (solved.excess_lin_loss - oracle).abs()
                                > 1e-4 * (1.0 + oracle.abs())
                            {
                                return Err(format!(
                                    "instance {i} (n={n}, p={p}, tau={t}): solver {} oracle {oracle}",
                                    solved.excess_lin_loss
                                ));
                            }
                        }
                        (
                            Err(SolverError::Infeasible { .. }),
                            Err(SolverError::Infeasible { .. }),
                        ) => {}
                        (a, b) => {
                            return Err(format!(
                                "instance {i} (n={n}, p={p}, tau={t}): disagree {a:?} vs {b:?}"
                            ))
                        }
                    }
                }
            }
            Ok(())
        })(),
    });

    checks.push(Check {
        name: "active constraint sits exactly at tau",
        outcome: (|| {
            let mut rng = Xoshiro256PlusPlus::from_seed(seed ^ 0xCAFE);
            for _ in 0..20 {
                let instance = random_instance(&mut rng, 5, 8);
                let t = 0.05 + 0.6 * rng.uniform();
                let solved = solve_min_excess(&instance, tau(t)).map_err(|e| e.to_string())?;
                if solved.status == SolveStatus::ConstraintActive
                    && (solved.achieved_train_ratio - t).abs() > 1e-10
                {
                    return Err(format!(
                        "ratio {} != tau {t}",
                        solved.achieved_train_ratio
                    ));
                }
            }
            Ok(())
        })(),
    });

    checks.push(Check {
        name: "noise quadratic form matches sigma^2 trace",
        outcome: (|| {
            let a = DMatrix::identity(10, 10);
            let (mc, trace) = noise_quadratic_check(&a, 1.0, 100_000, seed);
            let se = (20.0f64 / 100_000.0).sqrt();
            if (mc - trace).abs() > 3.0 * se {
                return Err(format!("mc {mc} vs trace {trace} (3se = {})", 3.0 * se));
            }
            Ok(())
        })(),
    });

    checks.push(Check {
        name: "empirical spectrum close to MP law",
        outcome: (|| {
            let config = ExperimentConfig {
                n: 250,
                p: 500,
                sigma: 1.0,
                tau_grid: vec![tau(0.5)],
                trials: 1,
                master_seed: seed,
                feature_dist: FeatureDist::GaussianIid,
                noise_dist: NoiseDist::Gaussian,
                beta_star_spec: BetaStarSpec::Zero,
            };
            let instance = sample_instance(&config, 0).map_err(|e| e.to_string())?;
            let (w, xi) = whiten(&instance).map_err(|e| e.to_string())?;
            let (spectrum, _) = spectrum_of(&w, &xi).map_err(|e| e.to_string())?;
            let mut eigs = spectrum.eigenvalues().to_vec();
            eigs.reverse();
            let model = MpModel::new(gamma(0.5));
            let d = kolmogorov_distance(&eigs, &model);
            if d > 0.07 {
                return Err(format!("KS distance {d}"));
            }
            Ok(())
        })(),
    });

    checks
}

/// Run the selected suites. Returns the process exit code: 0 all pass,
/// 4 on any failure (with the failing sample printed).
pub fn run(suite: Suite, seed: u64, samples: usize, self_test_fail: bool) -> i32 {
    let mut checks = Vec::new();
    if matches!(suite, Suite::All | Suite::Inequalities) {
        checks.extend(inequality_checks(seed, samples));
    }
    if matches!(suite, Suite::All | Suite::Stieltjes) {
        checks.extend(stieltjes_checks(seed));
    }
    if matches!(suite, Suite::All | Suite::Bounds) {
        checks.extend(bound_checks());
    }
    if matches!(suite, Suite::All | Suite::Solver) {
        checks.extend(solver_checks(seed));
    }
    if self_test_fail {
        checks.push(Check {
            name: "self-test failure injection",
            outcome: Err("injected failure: counterexample dump path exercised".to_string()),
        });
    }

    let mut failures = 0;
    for check in &checks {
        match &check.outcome {
            Ok(()) => println!("PASS {}", check.name),
            Err(message) => {
                failures += 1;
                println!("FAIL {}", check.name);
                println!("     {message}");
            }
        }
    }
    println!(
        "verify: {} passed, {} failed ({} checks)",
        checks.len() - failures,
        failures,
        checks.len()
    );
    if failures > 0 {
        4
    } else {
        0
    }
}
