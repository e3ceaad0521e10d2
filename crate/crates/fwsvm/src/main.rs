//! Command-line front end: fit single models, predict, run the experiment
//! harness, and sweep C grids. Everything runs in `f64`.
//!
//! Exit codes: 0 ok, 1 usage, 2 data error, 3 I/O.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fwsvm::bench::experiment::{
    fit_model, report_csv, run_experiment, sweep_c, sweep_csv, BenchAlgo, BenchError,
    ExperimentConfig, KernelChoice,
};
use fwsvm::data::{parse_libsvm, scale_features, DataError, Dataset};
use fwsvm::fw::StopRule;
use fwsvm::model::{ModelError, TrainedModel};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "fwsvm", version, about = "Frank-Wolfe kernel SVM trainer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model on a LibSVM-format file
    Train(TrainArgs),
    /// Predict labels for a LibSVM-format file with a saved model
    Predict(PredictArgs),
    /// Run a repeated train/test comparison from a config file
    Experiment(ExperimentArgs),
    /// Per-fold validation sweep over a C grid
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Linear,
    Rbf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Fw,
    Mfw,
}

impl From<AlgoArg> for BenchAlgo {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Fw => BenchAlgo::Fw,
            AlgoArg::Mfw => BenchAlgo::Mfw,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Training data in LibSVM format
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "linear")]
    kernel: KernelArg,
    /// RBF bandwidth (required for --kernel rbf)
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long = "C", default_value_t = 1.0)]
    c: f64,
    #[arg(long, value_enum, default_value = "mfw")]
    algo: AlgoArg,
    #[arg(long, default_value_t = 1e-5)]
    epsilon: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    /// Index of the initial vertex
    #[arg(long, default_value_t = 0)]
    init: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the model file
    #[arg(long)]
    model_out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Input data in LibSVM format (labels are scored when present)
    #[arg(long)]
    data: PathBuf,
    /// Where to write predicted labels, one per line
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Plain-text key=value config file
    #[arg(long)]
    config: PathBuf,
    /// Directory for the result CSV
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "mfw")]
    algo: AlgoArg,
    /// Comma-separated C values
    #[arg(long)]
    grid: String,
    #[arg(long, value_enum, default_value = "linear")]
    kernel: KernelArg,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 1e-5)]
    epsilon: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

enum CliError {
    Usage(String),
    Data(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Io(m) => m,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Io(io) => CliError::Io(io.to_string()),
            BenchError::Config(m) => CliError::Usage(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn kernel_choice(kernel: KernelArg, sigma: Option<f64>) -> Result<(KernelChoice, Option<f64>), CliError> {
    match kernel {
        KernelArg::Linear => Ok((KernelChoice::Linear, None)),
        KernelArg::Rbf => match sigma {
            Some(s) if s > 0.0 => Ok((KernelChoice::Rbf, Some(s))),
            Some(s) => Err(CliError::Usage(format!("sigma must be positive, got {s}"))),
            None => Err(CliError::Usage("--kernel rbf requires --sigma".into())),
        },
    }
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let (choice, sigma) = kernel_choice(args.kernel, args.sigma)?;
    if args.c <= 0.0 {
        return Err(CliError::Usage(format!("C must be positive, got {}", args.c)));
    }
    let _ = args.seed;
    let ds: Dataset<f64> = parse_libsvm(&read_file(&args.data)?)?;
    if args.init >= ds.len() {
        return Err(CliError::Usage(format!(
            "--init {} out of range for {} patterns",
            args.init,
            ds.len()
        )));
    }
    let (scaled, _, params) = scale_features(&ds, &ds)?;
    let spec = match choice {
        KernelChoice::Linear => fwsvm::KernelSpec::linear(args.c),
        KernelChoice::Rbf => fwsvm::KernelSpec::rbf(sigma.unwrap(), args.c),
    };
    let stop = StopRule {
        epsilon: args.epsilon,
        max_iter: args.max_iter,
        refresh_every: 50_000,
    };
    let (mut model, reason) = fit_model(&scaled, spec, args.algo.into(), &stop, args.init)?;
    model.scaling = Some(params);
    write_file(&args.model_out, &model.to_text())?;
    println!(
        "trained {} on {} patterns: {} SVs, {} iterations, gap {:.3e} ({:?})",
        model.algo.as_str(),
        ds.len(),
        model.num_svs(),
        model.iterations,
        model.final_gap,
        reason
    );
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let model = TrainedModel::<f64>::from_text(&read_file(&args.model)?)?;
    let ds: Dataset<f64> = parse_libsvm(&read_file(&args.data)?)?;
    let scored = match &model.scaling {
        Some(params) => params.apply(&ds)?,
        None => ds.clone(),
    };
    let mut out = String::new();
    let mut correct = 0usize;
    for i in 0..scored.len() {
        let label = model.predict(scored.pattern(i))?;
        out.push_str(if label == 1 { "+1\n" } else { "-1\n" });
        if label == ds.label(i) {
            correct += 1;
        }
    }
    write_file(&args.out, &out)?;
    println!(
        "predicted {} patterns, accuracy {:.2}%",
        scored.len(),
        100.0 * correct as f64 / scored.len() as f64
    );
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let cfg = ExperimentConfig::from_text(&read_file(&args.config)?)?;
    let report = run_experiment(&cfg)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.out_dir.display())))?;
    let out_path = args.out_dir.join(format!("{}.csv", cfg.name));
    write_file(&out_path, &report_csv(&report))?;
    println!("wrote {}", out_path.display());
    for agg in report.aggregates() {
        let ratios = match (agg.acc_ratio, agg.svs_ratio, agg.iters_ratio) {
            (Some(a), Some(s), Some(i)) => {
                format!(" | vs fw: acc {a:.2}% svs {s:.2}% iters {i:.2}%")
            }
            _ => String::new(),
        };
        println!(
            "{:<12} acc {:.2} +/- {:.2}  svs {:.1} +/- {:.1}  iters {:.1} +/- {:.1}{}",
            agg.algo.as_str(),
            agg.acc_mean,
            agg.acc_std,
            agg.svs_mean,
            agg.svs_std,
            agg.iters_mean,
            agg.iters_std,
            ratios
        );
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let (choice, sigma) = kernel_choice(args.kernel, args.sigma)?;
    let grid: Vec<f64> = args
        .grid
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("bad --grid {:?}", args.grid)))?;
    if grid.is_empty() || grid.iter().any(|&c| c <= 0.0) {
        return Err(CliError::Usage("--grid needs positive C values".into()));
    }
    let ds: Dataset<f64> = parse_libsvm(&read_file(&args.data)?)?;
    let mut cfg = ExperimentConfig::new("sweep", fwsvm::bench::DataSource::Path(args.data));
    cfg.kernel = choice;
    cfg.c_grid = grid;
    if let Some(s) = sigma {
        cfg.sigma_grid = vec![s];
    }
    cfg.folds = args.folds;
    cfg.epsilon = args.epsilon;
    cfg.max_iter = args.max_iter;
    cfg.seed = args.seed;
    let rows = sweep_c(&ds, &cfg, args.algo.into())?;
    write_file(&args.out, &sweep_csv(args.algo.into(), &rows))?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
