//! `overfit` — curves, bounds, Monte Carlo experiments, and verification
//! suites for the minimal excess loss of tau-overfitting linear models.
//!
//! Exit codes: 0 success, 2 usage error, 3 empirical bound violation,
//! 4 verification failure.

// `!(x > 0.0)` is the NaN-rejecting comparison idiom used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod covspec;
mod csvfmt;
mod grid;
mod plotscript;
mod runner;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use overfit_core::mp::{
    analytic_excess_loss, small_tau_bound, universal_bound_ratio, AspectRatio, BoundVariant,
    OverfitFraction,
};
use overfit_core::sim::{
    curve_rows, figure_curves, violates_universal_bound, BetaStarSpec, ExperimentConfig,
    FeatureDist, FigureMode, NoiseDist,
};

use csvfmt::{excess17, float17, opt17, param, table};
use plotscript::PlotSpec;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 2;
const EXIT_BOUND_VIOLATION: u8 = 3;
const EXIT_VERIFY_FAILED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "overfit",
    version,
    about = "Minimal excess test loss of tau-overfitting linear models",
    after_help = "Seeds: the OVERFIT_SEED environment variable, when set, overrides --seed.\n\
                  Grids: numeric list flags accept `a,b,c` or `start:stop:count` (inclusive)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    /// CSV files only.
    Csv,
    /// CSV files plus a matplotlib script referencing them.
    #[value(name = "csv+plotscript", alias = "csv-plotscript")]
    CsvPlotscript,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FeatureDistArg {
    /// I.i.d. standard normal features.
    GaussianIid,
    /// Gaussian features with the covariance given by --cov.
    GaussianCov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NoiseDistArg {
    /// Gaussian noise.
    Gaussian,
    /// Student-t noise (see --dof), rescaled to variance sigma^2.
    StudentT,
    /// Sign noise at +-sigma.
    Rademacher,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BetaStarArg {
    /// beta* = 0.
    Zero,
    /// Uniform random unit vector.
    UnitSphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FigureModeArg {
    /// Loss and universal bound vs tau, one CSV per gamma.
    Fig1a,
    /// Loss and universal bound vs 1/gamma, one CSV per tau.
    Fig1b,
    /// Loss and small-tau bound vs tau, one CSV per gamma < 1.
    Fig2,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic excess-loss curve with every bound, one CSV per gamma.
    Curve {
        /// Aspect ratios gamma = n/p (list or range).
        #[arg(long)]
        gamma: String,
        /// Overfit fractions tau in [0, 1] (list or range).
        #[arg(long)]
        tau: String,
        /// Noise floor sigma^2.
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        /// Output directory.
        #[arg(long, default_value = "./out")]
        out: PathBuf,
        /// Output format.
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Evaluate the analytic value and every bound at one point (stdout CSV).
    Bounds {
        /// Overfit fraction tau in [0, 1].
        #[arg(long)]
        tau: f64,
        /// Aspect ratio gamma = n/p (alternative to --n/--p).
        #[arg(long)]
        gamma: Option<f64>,
        /// Sample count (with --p).
        #[arg(long)]
        n: Option<usize>,
        /// Feature count (with --n).
        #[arg(long)]
        p: Option<usize>,
        /// Noise floor sigma^2.
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
    },
    /// Seeded Monte Carlo experiment; one CSV row per tau.
    Simulate {
        /// Samples per instance.
        #[arg(long)]
        n: usize,
        /// Features per instance.
        #[arg(long)]
        p: usize,
        /// Overfit fractions (list or range).
        #[arg(long)]
        tau: String,
        /// Noise standard deviation.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Number of instances.
        #[arg(long, default_value_t = 500)]
        trials: usize,
        /// Master seed (OVERFIT_SEED overrides).
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Feature distribution.
        #[arg(long, value_enum, default_value_t = FeatureDistArg::GaussianIid)]
        feature_dist: FeatureDistArg,
        /// Covariance spec for --feature-dist gaussian-cov:
        /// identity | ar1:<rho> | diag:<v,..> | @<file.csv>.
        #[arg(long)]
        cov: Option<String>,
        /// Noise distribution.
        #[arg(long, value_enum, default_value_t = NoiseDistArg::Gaussian)]
        noise_dist: NoiseDistArg,
        /// Student-t degrees of freedom (>= 5).
        #[arg(long, default_value_t = 5)]
        dof: u32,
        /// Optimal coefficient spec.
        #[arg(long, value_enum, default_value_t = BetaStarArg::Zero)]
        beta_star: BetaStarArg,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Output directory.
        #[arg(long, default_value = "./out")]
        out: PathBuf,
        /// Output format.
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Run the property-verification suites.
    Verify {
        /// Which suite to run.
        #[arg(long, value_enum, default_value_t = verify::Suite::All)]
        suite: verify::Suite,
        /// Seed for the randomized sweeps (OVERFIT_SEED overrides).
        #[arg(long, default_value_t = 20240801)]
        seed: u64,
        /// Sample count for the large sweeps.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Inject one failing check to exercise the failure reporting path.
        #[arg(long, default_value_t = false)]
        self_test_fail: bool,
    },
    /// Analytic figure tables (and optional plot script).
    Figures {
        /// Figure family.
        #[arg(long, value_enum)]
        mode: FigureModeArg,
        /// Fixed gammas for fig1a/fig2 (list or range).
        #[arg(long)]
        gamma: Option<String>,
        /// Tau grid for fig1a/fig2, or fixed taus for fig1b.
        #[arg(long)]
        tau: Option<String>,
        /// 1/gamma grid for fig1b (list or range).
        #[arg(long)]
        inv_gamma: Option<String>,
        /// Noise floor sigma^2.
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        /// Output directory.
        #[arg(long, default_value = "./out")]
        out: PathBuf,
        /// Output format.
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
}

/// A usage-level error: message plus exit code 2.
struct UsageError(String);

impl<T: std::fmt::Display> From<T> for UsageError {
    fn from(value: T) -> Self {
        UsageError(value.to_string())
    }
}

fn effective_seed(flag_seed: u64) -> Result<u64, UsageError> {
    match std::env::var("OVERFIT_SEED") {
        Ok(text) => text
            .parse::<u64>()
            .map_err(|_| UsageError(format!("OVERFIT_SEED is not a u64: `{text}`"))),
        Err(_) => Ok(flag_seed),
    }
}

fn parse_taus(spec: &str) -> Result<Vec<OverfitFraction>, UsageError> {
    grid::parse_grid(spec)?
        .into_iter()
        .map(|t| OverfitFraction::new(t).map_err(UsageError::from))
        .collect()
}

fn parse_gammas(spec: &str) -> Result<Vec<AspectRatio>, UsageError> {
    grid::parse_grid(spec)?
        .into_iter()
        .map(|g| AspectRatio::new(g).map_err(UsageError::from))
        .collect()
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, UsageError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| UsageError(format!("cannot create output dir {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| UsageError(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn cmd_curve(
    gamma: &str,
    tau: &str,
    sigma2: f64,
    out: &Path,
    format: OutputFormat,
) -> Result<u8, UsageError> {
    if !(sigma2 > 0.0) {
        return Err(UsageError("sigma2 must be positive".into()));
    }
    let gammas = parse_gammas(gamma)?;
    let taus = parse_taus(tau)?;
    let mut specs = Vec::new();
    for &g in &gammas {
        let rows = curve_rows(g, &taus, sigma2)?;
        let formatted: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    float17(r.tau),
                    excess17(r.analytic),
                    float17(r.universal_sqrt),
                    float17(r.universal_legacy),
                    opt17(r.small_tau),
                ]
            })
            .collect();
        let name = format!("curve_gamma_{}.csv", param(g.get()));
        let csv = table(
            "tau,analytic_excess,universal_sqrt,universal_legacy,small_tau_bound",
            &formatted,
        );
        let path = write_file(out, &name, &csv)?;
        println!("wrote {}", path.display());
        specs.push(PlotSpec {
            file: name,
            label: format!("gamma={}", param(g.get())),
        });
    }
    if format == OutputFormat::CsvPlotscript {
        let script = plotscript::script(
            "minimal excess loss vs tau",
            "tau",
            &[("analytic_excess", "-"), ("universal_sqrt", "--")],
            &specs,
            true,
        );
        let path = write_file(out, "plot_curve.py", &script)?;
        println!("wrote {}", path.display());
    }
    Ok(EXIT_OK)
}

fn cmd_bounds(
    tau: f64,
    gamma: Option<f64>,
    n: Option<usize>,
    p: Option<usize>,
    sigma2: f64,
) -> Result<u8, UsageError> {
    if !(sigma2 > 0.0) {
        return Err(UsageError("sigma2 must be positive".into()));
    }
    let ratio = match (gamma, n, p) {
        (Some(g), None, None) => g,
        (None, Some(n), Some(p)) => {
            if p == 0 {
                return Err(UsageError("p must be positive".into()));
            }
            n as f64 / p as f64
        }
        _ => {
            return Err(UsageError(
                "provide either --gamma or both --n and --p".into(),
            ))
        }
    };
    let gamma = AspectRatio::new(ratio)?;
    let tau = OverfitFraction::new(tau)?;
    let analytic = analytic_excess_loss(tau, gamma, sigma2)?;
    let row = vec![
        float17(tau.get()),
        float17(gamma.get()),
        excess17(analytic),
        float17(universal_bound_ratio(tau, ratio, sigma2, BoundVariant::Sqrt)),
        float17(universal_bound_ratio(
            tau,
            ratio,
            sigma2,
            BoundVariant::CubeRootLegacy,
        )),
        opt17(small_tau_bound(tau, gamma, sigma2).ok()),
    ];
    print!(
        "{}",
        table(
            "tau,gamma,analytic,universal_sqrt,universal_legacy,small_tau_bound",
            &[row]
        )
    );
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    n: usize,
    p: usize,
    tau: &str,
    sigma: f64,
    trials: usize,
    seed: u64,
    feature_dist: FeatureDistArg,
    cov: Option<&str>,
    noise_dist: NoiseDistArg,
    dof: u32,
    beta_star: BetaStarArg,
    threads: usize,
    out: &Path,
    format: OutputFormat,
) -> Result<u8, UsageError> {
    let master_seed = effective_seed(seed)?;
    let tau_grid = parse_taus(tau)?;
    let feature_dist = match feature_dist {
        FeatureDistArg::GaussianIid => {
            if cov.is_some() {
                return Err(UsageError(
                    "--cov requires --feature-dist gaussian-cov".into(),
                ));
            }
            FeatureDist::GaussianIid
        }
        FeatureDistArg::GaussianCov => {
            let spec = cov.unwrap_or("identity");
            FeatureDist::GaussianCovariance(covspec::parse_cov(spec, p)?)
        }
    };
    let noise_dist = match noise_dist {
        NoiseDistArg::Gaussian => NoiseDist::Gaussian,
        NoiseDistArg::StudentT => NoiseDist::StudentT { dof },
        NoiseDistArg::Rademacher => NoiseDist::RademacherScaled,
    };
    let beta_star_spec = match beta_star {
        BetaStarArg::Zero => BetaStarSpec::Zero,
        BetaStarArg::UnitSphere => BetaStarSpec::UnitSphereRandom,
    };
    let config = ExperimentConfig {
        n,
        p,
        sigma,
        tau_grid,
        trials,
        master_seed,
        feature_dist,
        noise_dist,
        beta_star_spec,
    };
    config.validate()?;

    let output = runner::run_experiment_threaded(&config, threads)?;
    for (trial, error) in &output.trial_errors {
        eprintln!("trial {trial}: solver error: {error}");
    }

    let rows: Vec<Vec<String>> = output
        .reports
        .iter()
        .map(|r| {
            vec![
                float17(r.tau),
                float17(r.gamma),
                float17(r.mc_mean),
                float17(r.mc_stderr),
                r.infeasible_count.to_string(),
                excess17(r.analytic_value),
                float17(r.universal_bound_sqrt),
                float17(r.universal_bound_legacy),
            ]
        })
        .collect();
    let csv = table(
        "tau,gamma,mc_mean,mc_stderr,infeasible_count,analytic,universal_sqrt,universal_legacy",
        &rows,
    );
    let name = format!("simulate_n{n}_p{p}.csv");
    let path = write_file(out, &name, &csv)?;
    println!("wrote {}", path.display());

    if format == OutputFormat::CsvPlotscript {
        let script = plotscript::script(
            "Monte Carlo excess loss vs tau",
            "tau",
            &[
                ("mc_mean", "o-"),
                ("analytic", "-"),
                ("universal_sqrt", "--"),
            ],
            &[PlotSpec {
                file: name,
                label: format!("n={n} p={p}"),
            }],
            true,
        );
        let path = write_file(out, "plot_simulate.py", &script)?;
        println!("wrote {}", path.display());
    }

    let mut violated = false;
    for report in &output.reports {
        if violates_universal_bound(report) {
            eprintln!(
                "bound violation at tau {}: mc_mean {} < universal bound {} - 3 stderr",
                report.tau, report.mc_mean, report.universal_bound_sqrt
            );
            violated = true;
        }
    }
    Ok(if violated { EXIT_BOUND_VIOLATION } else { EXIT_OK })
}

fn cmd_figures(
    mode: FigureModeArg,
    gamma: Option<&str>,
    tau: Option<&str>,
    inv_gamma: Option<&str>,
    sigma2: f64,
    out: &Path,
    format: OutputFormat,
) -> Result<u8, UsageError> {
    if !(sigma2 > 0.0) {
        return Err(UsageError("sigma2 must be positive".into()));
    }
    let raw_taus = |default: &str, spec: Option<&str>| -> Result<Vec<f64>, UsageError> {
        let parsed = grid::parse_grid(spec.unwrap_or(default))?;
        for &t in &parsed {
            OverfitFraction::new(t)?;
        }
        Ok(parsed)
    };
    let raw_gammas = |default: &str, spec: Option<&str>| -> Result<Vec<f64>, UsageError> {
        let parsed = grid::parse_grid(spec.unwrap_or(default))?;
        for &g in &parsed {
            AspectRatio::new(g)?;
        }
        Ok(parsed)
    };

    let (core_mode, x_column, bound_column, file_stem): (FigureMode, &str, &str, &str) = match mode
    {
        FigureModeArg::Fig1a => (
            FigureMode::Fig1a {
                gammas: raw_gammas("0.25,0.5,1,2", gamma)?,
                taus: raw_taus("0:1:101", tau)?,
            },
            "tau",
            "universal_sqrt",
            "fig1a_gamma",
        ),
        FigureModeArg::Fig1b => (
            FigureMode::Fig1b {
                taus: raw_taus("0.1,0.25,0.5", tau)?,
                inv_gammas: grid::parse_grid(inv_gamma.unwrap_or("0.25:8:64"))?,
            },
            "inv_gamma",
            "universal_sqrt",
            "fig1b_tau",
        ),
        FigureModeArg::Fig2 => (
            FigureMode::Fig2 {
                gammas: raw_gammas("0.25,0.5,0.75", gamma)?,
                taus: raw_taus("0:0.6:61", tau)?,
            },
            "tau",
            "small_tau_bound",
            "fig2_gamma",
        ),
    };
    let tables = figure_curves(&core_mode, sigma2)?;
    let header = format!("{x_column},analytic_excess,{bound_column}");
    let mut specs = Vec::new();
    for t in &tables {
        let rows: Vec<Vec<String>> = t
            .points
            .iter()
            .map(|pt| vec![float17(pt.x), excess17(pt.analytic), opt17(pt.bound)])
            .collect();
        let name = format!("{file_stem}_{}.csv", param(t.fixed));
        let path = write_file(out, &name, &table(&header, &rows))?;
        println!("wrote {}", path.display());
        specs.push(PlotSpec {
            file: name,
            label: format!("{file_stem}={}", param(t.fixed)),
        });
    }
    if format == OutputFormat::CsvPlotscript {
        let script = plotscript::script(
            "analytic excess-loss figures",
            x_column,
            &[("analytic_excess", "-"), (bound_column, "--")],
            &specs,
            true,
        );
        let name = match mode {
            FigureModeArg::Fig1a => "plot_fig1a.py",
            FigureModeArg::Fig1b => "plot_fig1b.py",
            FigureModeArg::Fig2 => "plot_fig2.py",
        };
        let path = write_file(out, name, &script)?;
        println!("wrote {}", path.display());
    }
    Ok(EXIT_OK)
}

fn run(cli: Cli) -> Result<u8, UsageError> {
    match cli.command {
        Command::Curve {
            gamma,
            tau,
            sigma2,
            out,
            format,
        } => cmd_curve(&gamma, &tau, sigma2, &out, format),
        Command::Bounds {
            tau,
            gamma,
            n,
            p,
            sigma2,
        } => cmd_bounds(tau, gamma, n, p, sigma2),
        Command::Simulate {
            n,
            p,
            tau,
            sigma,
            trials,
            seed,
            feature_dist,
            cov,
            noise_dist,
            dof,
            beta_star,
            threads,
            out,
            format,
        } => cmd_simulate(
            n,
            p,
            &tau,
            sigma,
            trials,
            seed,
            feature_dist,
            cov.as_deref(),
            noise_dist,
            dof,
            beta_star,
            threads,
            &out,
            format,
        ),
        Command::Verify {
            suite,
            seed,
            samples,
            self_test_fail,
        } => {
            let seed = effective_seed(seed)?;
            Ok(if verify::run(suite, seed, samples, self_test_fail) == 0 {
                EXIT_OK
            } else {
                EXIT_VERIFY_FAILED
            })
        }
        Command::Figures {
            mode,
            gamma,
            tau,
            inv_gamma,
            sigma2,
            out,
            format,
        } => cmd_figures(
            mode,
            gamma.as_deref(),
            tau.as_deref(),
            inv_gamma.as_deref(),
            sigma2,
            &out,
            format,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse(); // clap exits with 2 on flag errors
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(UsageError(message)) => {
            eprintln!("error: {message}");
            eprintln!("run `overfit --help` for usage");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
