//! Command-line front end: run either inverter on a built-in or
//! user-supplied problem, evaluate saved models, and drive the full
//! benchmark suite.
//!
//! Exit codes: 0 success, 1 configuration error, 2 run error,
//! 3 resource exhaustion (box or grid budget).

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use setinv::bench::{
    evaluate_accuracy, grid_testset, oracle_labels, problem_defaults, run_benchmark, Classifier,
    SuiteConfig,
};
use setinv::models::{integrate_lv, ForwardModel, LvParams};
use setinv::sivia::default_epsilon;
use setinv::{
    builtin_problem, plot, run_oasis, sivia_invert, Error, OasisConfig, ProblemSpec, Result,
    SvmModel, DEFAULT_BOX_BUDGET,
};

#[derive(Parser)]
#[command(name = "setinv", about = "Set inversion: compute pre-images of boxes under nonlinear maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ProblemArg {
    /// Built-in problem name (see `setinv list`).
    #[arg(long, conflicts_with = "spec")]
    problem: Option<String>,
    /// JSON file with a full problem description.
    #[arg(long)]
    spec: Option<PathBuf>,
}

impl ProblemArg {
    fn resolve(&self) -> Result<ProblemSpec> {
        match (&self.problem, &self.spec) {
            (Some(name), None) => builtin_problem(name),
            (None, Some(path)) => {
                let spec: ProblemSpec = serde_json::from_reader(File::open(path)?)?;
                // Re-run the constructor checks on deserialized input.
                ProblemSpec::new(spec.forward, spec.target, spec.state_space)
            }
            _ => Err(Error::Config("give exactly one of --problem or --spec".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in problems.
    List,
    /// Invert with the active-sampling SVM method.
    Oasis {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        n_init: Option<usize>,
        #[arg(long)]
        n_total: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory for samples.csv, log.csv, model.json and,
        /// for 2D problems, SVG plots.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Invert with the interval bisection baseline.
    Sivia {
        #[command(flatten)]
        problem: ProblemArg,
        /// Bisection stops at this box width (default depends on the
        /// state-space dimension).
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_BOX_BUDGET)]
        budget: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Score a saved SVM model on the ground-truth grid.
    Eval {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Run the benchmark suite and write a CSV report.
    Bench {
        /// Comma-separated problem names; default is every built-in.
        #[arg(long, value_delimiter = ',')]
        problems: Vec<String>,
        #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 3, 4, 5])]
        seeds: Vec<u64>,
        #[arg(long)]
        skip_oasis: bool,
        #[arg(long)]
        skip_sivia: bool,
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
    },
    /// Plot one predator–prey trajectory as SVG.
    PlotLv {
        #[arg(long, default_value_t = 1.0)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        #[arg(long, default_value_t = 1.0)]
        p3: f64,
        #[arg(long)]
        p4: f64,
        #[arg(long, default_value_t = 50.0)]
        u0: f64,
        #[arg(long, default_value_t = 50.0)]
        v0: f64,
        #[arg(long, default_value_t = 20.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value = "trajectory.svg")]
        out: PathBuf,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::List => {
            for name in setinv::BUILTIN_PROBLEMS {
                let spec = builtin_problem(name)?;
                println!("{name}: {} in {}D", spec.forward.name(), spec.input_dim());
            }
        }
        Command::Oasis {
            problem,
            n_init,
            n_total,
            seed,
            out,
        } => {
            let spec = problem.resolve()?;
            let defaults = problem_defaults_or(&spec, problem.problem.as_deref());
            let config = OasisConfig::new(
                n_init.unwrap_or(defaults.0),
                n_total.unwrap_or(defaults.1),
                seed,
            );
            let run = run_oasis(&spec, &config)?;
            std::fs::create_dir_all(&out)?;
            run.write_samples_csv(create(&out.join("samples.csv"))?)?;
            run.write_log_csv(create(&out.join("log.csv"))?)?;
            run.final_model.save_json(create(&out.join("model.json"))?)?;
            if spec.input_dim() == 2 {
                plot::plot_samples_svg(&run.samples, &spec.state_space, create(&out.join("samples.svg"))?)?;
                plot::plot_region_svg(&run.final_model, &spec, 301, create(&out.join("region.svg"))?)?;
            }
            println!(
                "{} samples, {} support vectors, gamma {:.4}; wrote {}",
                run.samples.len(),
                run.final_model.n_support(),
                run.final_gamma,
                out.display()
            );
        }
        Command::Sivia {
            problem,
            epsilon,
            budget,
            out,
        } => {
            let spec = problem.resolve()?;
            let eps = epsilon.unwrap_or_else(|| default_epsilon(&spec.state_space));
            let sp = sivia_invert(&spec, eps, budget)?;
            std::fs::create_dir_all(&out)?;
            sp.write_csv(create(&out.join("subpaving.csv"))?)?;
            if spec.input_dim() == 2 {
                plot::plot_subpaving_svg(&sp, create(&out.join("subpaving.svg"))?)?;
            }
            println!(
                "epsilon {eps}: {} inner, {} uncertain, {} outer boxes; wrote {}",
                sp.inner.len(),
                sp.uncertain.len(),
                sp.outer.len(),
                out.display()
            );
        }
        Command::Eval {
            problem,
            model,
            resolution,
        } => {
            let spec = problem.resolve()?;
            let model = SvmModel::load_json(File::open(model)?)?;
            let res = match resolution {
                Some(r) => r,
                None => match problem.problem.as_deref().map(problem_defaults) {
                    Some(Ok(d)) => d.resolution,
                    _ => 301,
                },
            };
            let grid = grid_testset(&spec.state_space, res)?;
            let labels = oracle_labels(&spec, &grid)?;
            let eval = evaluate_accuracy(&Classifier::Svm(&model), &labels, &grid)?;
            println!("{}", serde_json::to_string_pretty(&eval)?);
        }
        Command::Bench {
            problems,
            seeds,
            skip_oasis,
            skip_sivia,
            out,
        } => {
            let suite = SuiteConfig {
                problems: if problems.is_empty() {
                    setinv::BUILTIN_PROBLEMS.iter().map(|s| s.to_string()).collect()
                } else {
                    problems
                },
                seeds,
                run_oasis: !skip_oasis,
                run_sivia: !skip_sivia,
            };
            let report = run_benchmark(&suite)?;
            report.write_csv(create(&out)?)?;
            for row in &report.rows {
                println!(
                    "{:<14} {:<13} seed {:<4} {:<8} acc {}",
                    row.problem,
                    row.method,
                    row.seed.map(|s| s.to_string()).unwrap_or_else(|| "-".into()),
                    row.status.split(':').next().unwrap_or(""),
                    row.accuracy.map(|a| format!("{a:.4}")).unwrap_or_else(|| "-".into()),
                );
            }
            println!("wrote {}", out.display());
        }
        Command::PlotLv {
            p1,
            p2,
            p3,
            p4,
            u0,
            v0,
            horizon,
            dt,
            out,
        } => {
            let params = LvParams { p1, p2, p3, p4 };
            let traj = integrate_lv(&params, u0, v0, horizon, dt)?;
            plot::plot_lv_trajectory_svg(&traj, create(&out)?)?;
            println!("min prey {:.4}; wrote {}", traj.min_prey, out.display());
        }
    }
    Ok(())
}

/// (n_init, n_total) defaults: registry values for a known name, else a
/// generic budget scaled by the model kind.
fn problem_defaults_or(spec: &ProblemSpec, name: Option<&str>) -> (usize, usize) {
    if let Some(Ok(d)) = name.map(problem_defaults) {
        return (d.n_init, d.n_total);
    }
    match spec.forward {
        ForwardModel::LotkaVolterraMinPrey { .. } => (400, 800),
        _ => (100, 500),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(1)
        }
        Err(e @ (Error::BoxBudgetExceeded { .. } | Error::GridBudgetExceeded { .. })) => {
            eprintln!("resource error: {e}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
