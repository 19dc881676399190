use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pinsvm_cli::bench::{
    emit_report, grid_search, run_table_experiment, tau_grid, tau_sweep, GridSpec, KernelKind,
    RowOutcome, TableConfig,
};
use pinsvm_cli::io::{load_csv, load_libsvm};
use pinsvm_cli::{model_file, CliError};
use pinsvm_core::data::{normalize_minmax, Dataset};
use pinsvm_core::dual::Formulation;
use pinsvm_core::loss::Tau;
use pinsvm_core::model::{predict, train, TrainConfig};
use pinsvm_core::solver::SolverConfig;

/// Pinball-loss SVM trainer and benchmark harness.
#[derive(Parser)]
#[command(name = "pinsvm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write it to a model file.
    Train(TrainCmd),
    /// Predict labels for a dataset with a saved model.
    Predict(PredictCmd),
    /// Cross-validated grid search for (C0, q) at tau = 0.
    Grid(GridCmd),
    /// Accuracy sweep over tau values and formulations.
    Sweep(SweepCmd),
    /// Full per-dataset experiment: grid search plus best-tau comparison.
    Table(TableCmd),
}

#[derive(Args)]
struct DataArgs {
    /// Training data file (.csv or sparse libsvm format).
    #[arg(long)]
    data: PathBuf,
    /// 0-based label column for CSV input; defaults to the last column.
    #[arg(long)]
    label_col: Option<usize>,
}

#[derive(Args)]
struct KernelArgs {
    /// Kernel family.
    #[arg(long, default_value = "linear")]
    kernel: KernelKind,
    /// RBF width q (ignored for the linear kernel).
    #[arg(long, default_value_t = 1.0)]
    q: f64,
}

#[derive(Args)]
struct SolverArgs {
    /// KKT stopping tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Pair-update budget.
    #[arg(long, default_value_t = 10_000_000)]
    max_iter: u64,
    /// Seed for splits, folds, and tie-breaking.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct TrainCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Penalty parameter C0.
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    /// Pinball asymmetry in [-1, 1].
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tau: f64,
    /// Dual formulation to solve.
    #[arg(long, default_value = "unified")]
    formulation: Formulation,
    /// Disable per-class penalty weighting.
    #[arg(long)]
    no_weighting: bool,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictCmd {
    /// Saved model file.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Where to write one predicted label per line (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Cross-validation folds.
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Comma-separated C0 candidates (default: powers of two, 2^-7..2^7).
    #[arg(long, value_delimiter = ',')]
    c_values: Option<Vec<f64>>,
    /// Comma-separated q candidates (default: powers of two, 2^-7..2^7).
    #[arg(long, value_delimiter = ',')]
    q_values: Option<Vec<f64>>,
    #[arg(long)]
    no_weighting: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SweepCmd {
    #[command(flatten)]
    data: DataArgs,
    /// Held-out test data file.
    #[arg(long)]
    test: PathBuf,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    /// Explicit comma-separated tau values; overrides --tau-step.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    taus: Option<Vec<f64>>,
    /// Step of the default tau grid over [-1, 1].
    #[arg(long, default_value_t = 0.1)]
    tau_step: f64,
    /// Formulations to sweep.
    #[arg(long, value_delimiter = ',', default_values = ["unified", "legacy-pos", "incorrect-neg"])]
    formulations: Vec<Formulation>,
    /// Skip min-max normalization (fitted on train, applied to both sets).
    #[arg(long)]
    no_normalize: bool,
    #[arg(long)]
    no_weighting: bool,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output CSV report.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TableCmd {
    /// Dataset names (monk1/monk2/monk3 are generated; others load from
    /// --data-dir).
    #[arg(long, value_delimiter = ',', required = true)]
    datasets: Vec<String>,
    /// Directory containing <name>.csv or <name>.libsvm files.
    #[arg(long, default_value = ".")]
    data_dir: PathBuf,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0.1)]
    tau_step: f64,
    #[arg(long)]
    no_weighting: bool,
    #[command(flatten)]
    solver: SolverArgs,
    /// Optional text report output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_dataset(args: &DataArgs) -> Result<Dataset, CliError> {
    load_any(&args.data, args.label_col)
}

fn load_any(path: &Path, label_col: Option<usize>) -> Result<Dataset, CliError> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let col = match label_col {
            Some(c) => c,
            None => last_csv_column(path)?,
        };
        load_csv(path, col)
    } else {
        load_libsvm(path)
    }
}

fn last_csv_column(path: &Path) -> Result<usize, CliError> {
    let content = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    content
        .lines()
        .find(|l| !l.trim().is_empty())
        .map(|l| l.split(',').count() - 1)
        .ok_or_else(|| CliError::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "no samples".into(),
        })
}

fn cmd_train(cmd: &TrainCmd) -> Result<(), CliError> {
    let data = load_dataset(&cmd.data)?;
    let tau = Tau::new(cmd.tau)?;
    let kernel = cmd.kernel.kernel.spec(cmd.kernel.q)?;
    let cfg = TrainConfig::new(cmd.c0, tau, kernel)
        .with_formulation(cmd.formulation)
        .with_weighting(!cmd.no_weighting)
        .with_solver(cmd.solver.config());
    let model = train(&data, &cfg)?;
    model_file::save(&model, &cmd.out)?;
    let diag = model.diagnostics();
    println!(
        "trained {} on {} samples: objective={:.6e} iterations={} kkt={:.3e} converged={}",
        cmd.formulation.name(),
        data.len(),
        diag.objective,
        diag.iterations,
        diag.kkt_residual,
        diag.converged,
    );
    if let Some(cap) = diag.upper_cap {
        println!(
            "legacy negative-tau box capped at {cap:.1e}*C_i; cap reached: {}",
            diag.cap_reached
        );
    }
    println!("model written to {}", cmd.out.display());
    Ok(())
}

fn cmd_predict(cmd: &PredictCmd) -> Result<(), CliError> {
    let model = model_file::load(&cmd.model)?;
    let data = load_dataset(&cmd.data)?;
    let mut lines = String::new();
    let mut correct = 0usize;
    for i in 0..data.len() {
        let label = predict(&model, data.row(i))?;
        if label == data.labels()[i] {
            correct += 1;
        }
        lines.push_str(if label > 0.0 { "+1\n" } else { "-1\n" });
    }
    match &cmd.out {
        Some(path) => std::fs::write(path, &lines).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?,
        None => print!("{lines}"),
    }
    println!(
        "accuracy {:.4} ({correct}/{} correct)",
        correct as f64 / data.len() as f64,
        data.len()
    );
    Ok(())
}

fn cmd_grid(cmd: &GridCmd) -> Result<(), CliError> {
    let data = load_dataset(&cmd.data)?;
    let (norm, _, _) = normalize_minmax(&data, &data)?;
    let mut grid = GridSpec::default();
    if let Some(c) = &cmd.c_values {
        grid.c_values = c.clone();
    }
    if let Some(q) = &cmd.q_values {
        grid.q_values = q.clone();
    }
    let (c0, q) = grid_search(
        &norm,
        &grid,
        cmd.kernel.kernel,
        !cmd.no_weighting,
        cmd.folds,
        cmd.solver.seed,
        cmd.solver.config(),
    )?;
    match cmd.kernel.kernel {
        KernelKind::Linear => println!("best C0={c0}"),
        KernelKind::Rbf => println!("best C0={c0} q={q}"),
    }
    Ok(())
}

fn cmd_sweep(cmd: &SweepCmd) -> Result<(), CliError> {
    let raw_train = load_dataset(&cmd.data)?;
    let raw_test = load_any(&cmd.test, cmd.data.label_col)?;
    let (train_set, test_set) = if cmd.no_normalize {
        (raw_train, raw_test)
    } else {
        let (a, b, _) = normalize_minmax(&raw_train, &raw_test)?;
        (a, b)
    };
    let taus = match &cmd.taus {
        Some(ts) => ts.clone(),
        None => tau_grid(cmd.tau_step),
    };
    let result = tau_sweep(
        &train_set,
        &test_set,
        cmd.c0,
        cmd.kernel.q,
        cmd.kernel.kernel,
        &taus,
        &cmd.formulations,
        !cmd.no_weighting,
        cmd.solver.config(),
    )?;
    emit_report(&result, &cmd.out)?;
    for &f in &cmd.formulations {
        if let Some((acc, tau)) = result.best_for(f) {
            println!("{:<14} best accuracy {:.4} at tau={}", f.name(), acc, tau);
        }
    }
    let failures = result
        .rows
        .iter()
        .filter(|r| matches!(r.outcome, RowOutcome::Failed { .. }))
        .count();
    if failures > 0 {
        eprintln!("{failures} sweep rows failed; see report");
    }
    println!("report written to {}", cmd.out.display());
    Ok(())
}

fn cmd_table(cmd: &TableCmd) -> Result<(), CliError> {
    let config = TableConfig {
        kernel_kind: cmd.kernel.kernel,
        grid: GridSpec::default(),
        folds: cmd.folds,
        tau_step: cmd.tau_step,
        seed: cmd.solver.seed,
        weighting: !cmd.no_weighting,
        solver: cmd.solver.config(),
        data_dir: cmd.data_dir.clone(),
    };
    let report = run_table_experiment(&cmd.datasets, &config)?;
    print!("{report}");
    if let Some(path) = &cmd.out {
        std::fs::write(path, report.to_string()).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are not usage errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match &cli.command {
        Command::Train(cmd) => cmd_train(cmd),
        Command::Predict(cmd) => cmd_predict(cmd),
        Command::Grid(cmd) => cmd_grid(cmd),
        Command::Sweep(cmd) => cmd_sweep(cmd),
        Command::Table(cmd) => cmd_table(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_infeasible() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
