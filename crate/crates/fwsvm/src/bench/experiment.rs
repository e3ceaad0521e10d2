//! Experiment harness: CV grid search, repeated train/test comparisons,
//! C-sweeps and CSV reporting. Orchestration runs in `f64`.

use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::data::{
    holdout_split, kfold_split, parse_libsvm, scale_features, DataError, Dataset,
};
use crate::fw::{train_fw, StopRule, TerminationReason};
use crate::kernel::{KernelSpec, LabeledKernelView};
use crate::mfw::train_mfw;
use crate::model::{AlgoTag, ModelError, TrainedModel};

use super::synth::gaussian_blobs;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("config: {0}")]
    Config(String),
    #[error("sv_overlap: both models have empty support")]
    EmptyUnion,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Algorithms the harness can compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BenchAlgo {
    Fw,
    Mfw,
    /// M-FW with the regularization parameter pinned to `C = 1`.
    MfwFixedC,
}

impl BenchAlgo {
    pub fn as_str(&self) -> &'static str {
        match self {
            BenchAlgo::Fw => "fw",
            BenchAlgo::Mfw => "mfw",
            BenchAlgo::MfwFixedC => "mfw_fixed_c",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fw" => Some(BenchAlgo::Fw),
            "mfw" => Some(BenchAlgo::Mfw),
            "mfw_fixed_c" => Some(BenchAlgo::MfwFixedC),
            _ => None,
        }
    }
}

/// Kernel family; the bandwidth comes from the search grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    Linear,
    Rbf,
}

impl KernelChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelChoice::Linear => "linear",
            KernelChoice::Rbf => "rbf",
        }
    }

    fn spec(&self, c: f64, sigma: Option<f64>) -> KernelSpec<f64> {
        match self {
            KernelChoice::Linear => KernelSpec::linear(c),
            KernelChoice::Rbf => KernelSpec::rbf(sigma.expect("rbf needs sigma"), c),
        }
    }
}

/// Where the corpus comes from.
#[derive(Debug, Clone)]
pub enum DataSource {
    Path(PathBuf),
    Synthetic {
        n: usize,
        d: usize,
        separation: f64,
    },
}

/// Full experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub source: DataSource,
    pub kernel: KernelChoice,
    pub c_grid: Vec<f64>,
    pub sigma_grid: Vec<f64>,
    pub folds: usize,
    pub epsilon: f64,
    pub max_iter: usize,
    pub algorithms: Vec<BenchAlgo>,
    pub seed: u64,
    pub repetitions: usize,
}

impl ExperimentConfig {
    /// Defaults: 11-point log grid over [1e-5, 1e5] for C, epsilon 1e-5.
    pub fn new(name: &str, source: DataSource) -> Self {
        ExperimentConfig {
            name: name.to_string(),
            source,
            kernel: KernelChoice::Linear,
            c_grid: log_grid(1e-5, 1e5, 11),
            sigma_grid: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            folds: 10,
            epsilon: 1e-5,
            max_iter: 1_000_000,
            algorithms: vec![BenchAlgo::Fw, BenchAlgo::Mfw],
            seed: 0,
            repetitions: 10,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.c_grid.is_empty() {
            return Err(BenchError::Config("empty C grid".into()));
        }
        if self.kernel == KernelChoice::Rbf && self.sigma_grid.is_empty() {
            return Err(BenchError::Config("empty sigma grid".into()));
        }
        if self.repetitions < 1 {
            return Err(BenchError::Config("repetitions must be >= 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(BenchError::Config("no algorithms selected".into()));
        }
        Ok(())
    }

    /// Parse a plain-text `key=value` config file.
    pub fn from_text(text: &str) -> Result<Self, BenchError> {
        let mut cfg = ExperimentConfig::new("experiment", DataSource::Synthetic {
            n: 600,
            d: 8,
            separation: 2.0,
        });
        let mut n = 600usize;
        let mut d = 8usize;
        let mut sep = 2.0f64;
        let mut path: Option<PathBuf> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                BenchError::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| BenchError::Config(format!("line {}: bad {what}", lineno + 1));
            match key {
                "name" => cfg.name = value.to_string(),
                "data" => {
                    if value != "synth" {
                        path = Some(PathBuf::from(value));
                    }
                }
                "synth_n" => n = value.parse().map_err(|_| bad("synth_n"))?,
                "synth_d" => d = value.parse().map_err(|_| bad("synth_d"))?,
                "synth_sep" => sep = value.parse().map_err(|_| bad("synth_sep"))?,
                "kernel" => {
                    cfg.kernel = match value {
                        "linear" => KernelChoice::Linear,
                        "rbf" => KernelChoice::Rbf,
                        _ => return Err(bad("kernel")),
                    }
                }
                "c_grid" => cfg.c_grid = parse_grid(value).ok_or_else(|| bad("c_grid"))?,
                "sigma_grid" => {
                    cfg.sigma_grid = parse_grid(value).ok_or_else(|| bad("sigma_grid"))?
                }
                "folds" => cfg.folds = value.parse().map_err(|_| bad("folds"))?,
                "epsilon" => cfg.epsilon = value.parse().map_err(|_| bad("epsilon"))?,
                "max_iter" => cfg.max_iter = value.parse().map_err(|_| bad("max_iter"))?,
                "algos" => {
                    cfg.algorithms = value
                        .split(',')
                        .map(|s| BenchAlgo::parse(s.trim()))
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| bad("algos"))?;
                }
                "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
                "repetitions" => cfg.repetitions = value.parse().map_err(|_| bad("repetitions"))?,
                other => {
                    return Err(BenchError::Config(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        cfg.source = match path {
            Some(p) => DataSource::Path(p),
            None => DataSource::Synthetic {
                n,
                d,
                separation: sep,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load or generate the corpus.
    pub fn load_dataset(&self) -> Result<Dataset<f64>, BenchError> {
        match &self.source {
            DataSource::Path(p) => {
                let text = std::fs::read_to_string(p)?;
                Ok(parse_libsvm(&text)?)
            }
            DataSource::Synthetic { n, d, separation } => {
                Ok(gaussian_blobs(*n, *d, *separation, self.seed))
            }
        }
    }
}

/// Evenly log-spaced grid from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && lo > 0.0 && hi > lo);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (llo + (lhi - llo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn parse_grid(s: &str) -> Option<Vec<f64>> {
    let vals: Option<Vec<f64>> = s.split(',').map(|t| t.trim().parse().ok()).collect();
    vals.filter(|v| !v.is_empty())
}

/// Train one model on an already-scaled dataset.
pub fn fit_model(
    ds_scaled: &Dataset<f64>,
    spec: KernelSpec<f64>,
    algo: BenchAlgo,
    stop: &StopRule<f64>,
    i0: usize,
) -> Result<(TrainedModel<f64>, TerminationReason), BenchError> {
    let view = LabeledKernelView::new(ds_scaled, spec);
    let (alpha, iterations, gap, reason, tag) = match algo {
        BenchAlgo::Fw => {
            let candidates: Vec<usize> = (0..ds_scaled.len()).collect();
            let out = train_fw(&view, stop, i0, &candidates);
            (out.alpha, out.iterations, out.final_gap, out.reason, AlgoTag::Fw)
        }
        BenchAlgo::Mfw | BenchAlgo::MfwFixedC => {
            let out = train_mfw(&view, stop, i0);
            (out.alpha, out.iterations, out.final_gap, out.reason, AlgoTag::Mfw)
        }
    };
    let model = TrainedModel::from_alpha(ds_scaled, &alpha, spec, None, tag, iterations, gap)?;
    Ok((model, reason))
}

fn cv_accuracy(
    ds: &Dataset<f64>,
    cfg: &ExperimentConfig,
    algo: BenchAlgo,
    c: f64,
    sigma: Option<f64>,
    stop: &StopRule<f64>,
) -> Result<f64, BenchError> {
    let plan = kfold_split(ds, cfg.folds, cfg.seed)?;
    let mut acc_sum = 0.0;
    for f in 0..cfg.folds {
        let train = ds.subset(&plan.train_indices(f));
        let val = ds.subset(&plan.test_indices(f));
        let (train_s, val_s, _) = scale_features(&train, &val)?;
        let (model, _) = fit_model(&train_s, cfg.kernel.spec(c, sigma), algo, stop, 0)?;
        acc_sum += model.accuracy(&val_s)?;
    }
    Ok(acc_sum / cfg.folds as f64)
}

/// One grid-search evaluation.
#[derive(Debug, Clone)]
pub struct CvCell {
    pub c: f64,
    pub sigma: Option<f64>,
    pub accuracy: f64,
}

/// K-fold CV over the hyper-parameter grid; ties break to the smallest C,
/// then the smallest sigma. For `mfw_fixed_c`, C is pinned to 1 and only
/// sigma is searched (no search at all for the linear kernel).
pub fn grid_search_cv(
    ds: &Dataset<f64>,
    cfg: &ExperimentConfig,
    algo: BenchAlgo,
) -> Result<(f64, Option<f64>, Vec<CvCell>), BenchError> {
    cfg.validate()?;
    if ds.len() < cfg.folds {
        return Err(BenchError::Config(format!(
            "dataset of {} rows is too small for {} folds",
            ds.len(),
            cfg.folds
        )));
    }
    let stop = StopRule {
        epsilon: cfg.epsilon,
        max_iter: cfg.max_iter,
        refresh_every: 50_000,
    };
    let c_grid: Vec<f64> = if algo == BenchAlgo::MfwFixedC {
        vec![1.0]
    } else {
        cfg.c_grid.clone()
    };
    let sigma_grid: Vec<Option<f64>> = match cfg.kernel {
        KernelChoice::Linear => vec![None],
        KernelChoice::Rbf => cfg.sigma_grid.iter().map(|&s| Some(s)).collect(),
    };
    if algo == BenchAlgo::MfwFixedC && cfg.kernel == KernelChoice::Linear {
        return Ok((1.0, None, Vec::new()));
    }
    let mut table = Vec::new();
    let mut best: Option<(f64, Option<f64>, f64)> = None;
    for &c in &c_grid {
        for &sigma in &sigma_grid {
            let acc = cv_accuracy(ds, cfg, algo, c, sigma, &stop)?;
            table.push(CvCell {
                c,
                sigma,
                accuracy: acc,
            });
            let better = match best {
                None => true,
                Some((bc, bs, bacc)) => {
                    acc > bacc
                        || (acc == bacc
                            && (c < bc || (c == bc && sigma.unwrap_or(0.0) < bs.unwrap_or(0.0))))
                }
            };
            if better {
                best = Some((c, sigma, acc));
            }
        }
    }
    let (c, sigma, _) = best.expect("grids are nonempty");
    Ok((c, sigma, table))
}

/// One train/test result.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub dataset: String,
    pub kernel: String,
    pub algo: BenchAlgo,
    pub rep: usize,
    pub c: f64,
    pub sigma: Option<f64>,
    pub accuracy: f64,
    pub svs: usize,
    pub iterations: usize,
    pub gap: f64,
    pub reason: TerminationReason,
}

/// Per-algorithm aggregate over repetitions.
#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub algo: BenchAlgo,
    pub acc_mean: f64,
    pub acc_std: f64,
    pub svs_mean: f64,
    pub svs_std: f64,
    pub iters_mean: f64,
    pub iters_std: f64,
    /// Geometric-mean ratios vs the `fw` baseline, as percentages.
    pub acc_ratio: Option<f64>,
    pub svs_ratio: Option<f64>,
    pub iters_ratio: Option<f64>,
}

/// Collected rows plus aggregates.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub rows: Vec<ResultRow>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn geo_mean_ratio(num: &[f64], den: &[f64]) -> Option<f64> {
    if num.len() != den.len() || num.is_empty() {
        return None;
    }
    let mut acc = 0.0;
    for (&a, &b) in num.iter().zip(den) {
        if a <= 0.0 || b <= 0.0 {
            return None;
        }
        acc += (a / b).ln();
    }
    Some(100.0 * (acc / num.len() as f64).exp())
}

impl ExperimentReport {
    /// Mean +/- std per algorithm, plus geometric-mean ratios vs `fw`
    /// matched by repetition.
    pub fn aggregates(&self) -> Vec<AggregateRow> {
        let mut algos: Vec<BenchAlgo> = self.rows.iter().map(|r| r.algo).collect();
        algos.sort_unstable();
        algos.dedup();
        let series = |algo: BenchAlgo| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
            let mut rows: Vec<&ResultRow> = self.rows.iter().filter(|r| r.algo == algo).collect();
            rows.sort_by_key(|r| r.rep);
            (
                rows.iter().map(|r| r.accuracy).collect(),
                rows.iter().map(|r| r.svs as f64).collect(),
                rows.iter().map(|r| r.iterations as f64).collect(),
            )
        };
        let baseline = algos
            .iter()
            .find(|&&a| a == BenchAlgo::Fw)
            .map(|&a| series(a));
        algos
            .into_iter()
            .map(|algo| {
                let (acc, svs, iters) = series(algo);
                let (acc_mean, acc_std) = mean_std(&acc);
                let (svs_mean, svs_std) = mean_std(&svs);
                let (iters_mean, iters_std) = mean_std(&iters);
                let (acc_ratio, svs_ratio, iters_ratio) = match &baseline {
                    Some((bacc, bsvs, biters)) => (
                        geo_mean_ratio(&acc, bacc),
                        geo_mean_ratio(&svs, bsvs),
                        geo_mean_ratio(&iters, biters),
                    ),
                    None => (None, None, None),
                };
                AggregateRow {
                    algo,
                    acc_mean,
                    acc_std,
                    svs_mean,
                    svs_std,
                    iters_mean,
                    iters_std,
                    acc_ratio,
                    svs_ratio,
                    iters_ratio,
                }
            })
            .collect()
    }
}

fn reason_str(reason: TerminationReason) -> &'static str {
    match reason {
        TerminationReason::Converged => "converged",
        TerminationReason::IterationCap => "iteration_cap",
    }
}

/// Serialize rows to the fixed-column CSV (sorted, LF endings).
pub fn report_csv(report: &ExperimentReport) -> String {
    let mut rows = report.rows.clone();
    rows.sort_by(|a, b| {
        (&a.dataset, &a.kernel, a.algo, a.rep).cmp(&(&b.dataset, &b.kernel, b.algo, b.rep))
    });
    let mut out = String::from("dataset,kernel,algo,rep,C,sigma,acc,svs,iters,gap,reason\n");
    for r in &rows {
        let sigma = r.sigma.map_or(String::new(), |s| format!("{s}"));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.dataset,
            r.kernel,
            r.algo.as_str(),
            r.rep,
            r.c,
            sigma,
            r.accuracy,
            r.svs,
            r.iterations,
            r.gap,
            reason_str(r.reason)
        );
    }
    out
}

/// Write the report CSV to `path`.
pub fn emit_report(report: &ExperimentReport, path: &std::path::Path) -> Result<(), BenchError> {
    std::fs::write(path, report_csv(report))?;
    Ok(())
}

/// Full protocol: per repetition, split 90/10, tune by CV on the training
/// side, refit and score on the held-out side.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, BenchError> {
    cfg.validate()?;
    let ds = cfg.load_dataset()?;
    let stop = StopRule {
        epsilon: cfg.epsilon,
        max_iter: cfg.max_iter,
        refresh_every: 50_000,
    };
    let mut rows = Vec::new();
    for rep in 0..cfg.repetitions {
        let (train_idx, test_idx) = holdout_split(&ds, 0.1, cfg.seed.wrapping_add(rep as u64));
        let train = ds.subset(&train_idx);
        let test = ds.subset(&test_idx);
        for &algo in &cfg.algorithms {
            let (c, sigma, _) = grid_search_cv(&train, cfg, algo)?;
            let (train_s, test_s, _) = scale_features(&train, &test)?;
            let spec = cfg.kernel.spec(c, sigma);
            let (model, reason) = fit_model(&train_s, spec, algo, &stop, 0)?;
            rows.push(ResultRow {
                dataset: cfg.name.clone(),
                kernel: cfg.kernel.as_str().to_string(),
                algo,
                rep,
                c,
                sigma,
                accuracy: model.accuracy(&test_s)?,
                svs: model.num_svs(),
                iterations: model.iterations,
                gap: model.final_gap,
                reason,
            });
        }
    }
    Ok(ExperimentReport { rows })
}

/// One row of a C-sweep: per-C, per-fold validation statistics.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub c: f64,
    pub fold: usize,
    pub accuracy: f64,
    pub svs: usize,
    pub iterations: usize,
}

/// Validation sweep over the C grid, one row per (C, fold).
pub fn sweep_c(
    ds: &Dataset<f64>,
    cfg: &ExperimentConfig,
    algo: BenchAlgo,
) -> Result<Vec<SweepRow>, BenchError> {
    cfg.validate()?;
    let stop = StopRule {
        epsilon: cfg.epsilon,
        max_iter: cfg.max_iter,
        refresh_every: 50_000,
    };
    let sigma = match cfg.kernel {
        KernelChoice::Linear => None,
        KernelChoice::Rbf => Some(cfg.sigma_grid[0]),
    };
    let plan = kfold_split(ds, cfg.folds, cfg.seed)?;
    let mut rows = Vec::new();
    for &c in &cfg.c_grid {
        for f in 0..cfg.folds {
            let train = ds.subset(&plan.train_indices(f));
            let val = ds.subset(&plan.test_indices(f));
            let (train_s, val_s, _) = scale_features(&train, &val)?;
            let (model, _) = fit_model(&train_s, cfg.kernel.spec(c, sigma), algo, &stop, 0)?;
            rows.push(SweepRow {
                c,
                fold: f,
                accuracy: model.accuracy(&val_s)?,
                svs: model.num_svs(),
                iterations: model.iterations,
            });
        }
    }
    Ok(rows)
}

/// Plot-ready CSV for a sweep.
pub fn sweep_csv(algo: BenchAlgo, rows: &[SweepRow]) -> String {
    let mut out = String::from("algo,C,fold,acc,svs,iters\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            algo.as_str(),
            r.c,
            r.fold,
            r.accuracy,
            r.svs,
            r.iterations
        );
    }
    out
}

/// Jaccard overlap of the support-vector index sets, in percent.
pub fn sv_overlap(a: &TrainedModel<f64>, b: &TrainedModel<f64>) -> Result<f64, BenchError> {
    let sa: std::collections::BTreeSet<usize> = a.sv_indices.iter().copied().collect();
    let sb: std::collections::BTreeSet<usize> = b.sv_indices.iter().copied().collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return Err(BenchError::EmptyUnion);
    }
    let inter = sa.intersection(&sb).count();
    Ok(100.0 * inter as f64 / union as f64)
}
