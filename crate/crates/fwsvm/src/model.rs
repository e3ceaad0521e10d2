//! Trained-model packaging: prediction, primal recovery, objectives and
//! plain-text (de)serialization.
//!
//! The decision function is `F(x) = sum_i beta_i k(x_i, x)` with
//! `beta_i = alpha_i y_i` and no bias term: the underlying formulation has
//! none (`rho` is a margin variable, not an offset). The `(1/C)` diagonal
//! shift belongs to training only and never enters prediction.

use std::fmt::Write as _;

use thiserror::Error;

use crate::data::{Dataset, ScalingParams, SparseVector};
use crate::float::Float;
use crate::kernel::{KernelKind, KernelSpec, LabeledKernelView};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("empty support: no coefficient is positive")]
    EmptySupport,
    #[error("dimension mismatch: model expects {expected}, input has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("model file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported model file version {0:?}")]
    BadMagic(String),
}

/// Which training algorithm produced a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgoTag {
    Fw,
    Mfw,
    Wsvm,
}

impl AlgoTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlgoTag::Fw => "fw",
            AlgoTag::Mfw => "mfw",
            AlgoTag::Wsvm => "wsvm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fw" => Some(AlgoTag::Fw),
            "mfw" => Some(AlgoTag::Mfw),
            "wsvm" => Some(AlgoTag::Wsvm),
            _ => None,
        }
    }
}

/// Packaged dual solution: support vectors, signed coefficients and the
/// metadata needed to predict on raw inputs.
#[derive(Debug, Clone)]
pub struct TrainedModel<F> {
    pub algo: AlgoTag,
    pub kernel: KernelSpec<F>,
    pub scaling: Option<ScalingParams<F>>,
    pub dim: usize,
    pub sv_indices: Vec<usize>,
    /// `beta_i = alpha_i y_i`; sign matches the label.
    pub sv_coeffs: Vec<F>,
    pub sv_patterns: Vec<SparseVector<F>>,
    pub iterations: usize,
    pub final_gap: F,
}

impl<F: Float> TrainedModel<F> {
    /// Assemble a model from a converged dual vector over `ds`.
    pub fn from_alpha(
        ds: &Dataset<F>,
        alpha: &[F],
        kernel: KernelSpec<F>,
        scaling: Option<ScalingParams<F>>,
        algo: AlgoTag,
        iterations: usize,
        final_gap: F,
    ) -> Result<Self, ModelError> {
        let mut sv_indices = Vec::new();
        let mut sv_coeffs = Vec::new();
        let mut sv_patterns = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if a > F::zero() {
                sv_indices.push(i);
                sv_coeffs.push(a * F::real(ds.label(i) as f64));
                sv_patterns.push(ds.pattern(i).clone());
            }
        }
        if sv_indices.is_empty() {
            return Err(ModelError::EmptySupport);
        }
        Ok(TrainedModel {
            algo,
            kernel,
            scaling,
            dim: ds.dim(),
            sv_indices,
            sv_coeffs,
            sv_patterns,
            iterations,
            final_gap,
        })
    }

    pub fn num_svs(&self) -> usize {
        self.sv_indices.len()
    }

    /// Decision value `F(x) = sum_i beta_i k(x_i, x)`; `x` must already be
    /// scaled with the model's scaling parameters.
    pub fn decision_value(&self, x: &SparseVector<F>) -> Result<F, ModelError> {
        let max = x.max_index().map_or(0, |i| i + 1);
        if max > self.dim {
            return Err(ModelError::DimensionMismatch {
                expected: self.dim,
                found: max,
            });
        }
        let mut acc = F::zero();
        for (beta, sv) in self.sv_coeffs.iter().zip(&self.sv_patterns) {
            acc = acc + *beta * self.kernel.eval(sv, x);
        }
        Ok(acc)
    }

    /// Predicted label; the tie `F(x) = 0` maps to `+1`.
    pub fn predict(&self, x: &SparseVector<F>) -> Result<i8, ModelError> {
        let v = self.decision_value(x)?;
        Ok(if v < F::zero() { -1 } else { 1 })
    }

    /// Fraction of correct predictions on `ds` (already scaled), in percent.
    pub fn accuracy(&self, ds: &Dataset<F>) -> Result<f64, ModelError> {
        let mut correct = 0usize;
        for i in 0..ds.len() {
            if self.predict(ds.pattern(i))? == ds.label(i) {
                correct += 1;
            }
        }
        Ok(100.0 * correct as f64 / ds.len() as f64)
    }

    /// Serialize to the plain-text model format.
    pub fn to_text(&self) -> String {
        let mut out = String::from("fwsvm-model v1\n");
        let _ = writeln!(out, "algo {}", self.algo.as_str());
        match self.kernel.kind {
            KernelKind::Linear => out.push_str("kernel linear\n"),
            KernelKind::Rbf { sigma } => {
                let _ = writeln!(out, "kernel rbf {sigma}");
            }
        }
        let _ = writeln!(out, "c {}", self.kernel.c);
        let _ = writeln!(out, "dim {}", self.dim);
        let _ = writeln!(out, "iterations {}", self.iterations);
        let _ = writeln!(out, "gap {}", self.final_gap);
        match &self.scaling {
            Some(params) => {
                let _ = writeln!(out, "scaling {}", params.ranges().len());
                for &(lo, hi) in params.ranges() {
                    let _ = writeln!(out, "{lo} {hi}");
                }
            }
            None => out.push_str("scaling 0\n"),
        }
        let _ = writeln!(out, "nsv {}", self.num_svs());
        for ((idx, beta), sv) in self
            .sv_indices
            .iter()
            .zip(&self.sv_coeffs)
            .zip(&self.sv_patterns)
        {
            let _ = write!(out, "{idx} {beta}");
            for &(j, v) in sv.entries() {
                let _ = write!(out, " {}:{}", j + 1, v);
            }
            out.push('\n');
        }
        out
    }

    /// Parse the plain-text model format.
    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        let mut lines = text.lines().enumerate();
        let mut next = |expect: &str| -> Result<(usize, String), ModelError> {
            lines
                .next()
                .map(|(n, l)| (n + 1, l.to_string()))
                .ok_or_else(|| ModelError::Parse {
                    line: 0,
                    msg: format!("missing {expect}"),
                })
        };
        let (_, magic) = next("magic")?;
        if magic.trim() != "fwsvm-model v1" {
            return Err(ModelError::BadMagic(magic));
        }
        let field = |line: usize, l: &str, key: &str| -> Result<String, ModelError> {
            l.strip_prefix(key)
                .map(|rest| rest.trim().to_string())
                .ok_or_else(|| ModelError::Parse {
                    line,
                    msg: format!("expected {key:?}"),
                })
        };
        let parse_f = |line: usize, s: &str| -> Result<F, ModelError> {
            s.parse::<f64>()
                .map(F::real)
                .map_err(|_| ModelError::Parse {
                    line,
                    msg: format!("bad number {s:?}"),
                })
        };
        let (ln, l) = next("algo")?;
        let algo = AlgoTag::parse(&field(ln, &l, "algo ")?).ok_or(ModelError::Parse {
            line: ln,
            msg: "unknown algo tag".into(),
        })?;
        let (ln, l) = next("kernel")?;
        let kspec = field(ln, &l, "kernel ")?;
        let (ln2, l2) = next("c")?;
        let c = parse_f(ln2, &field(ln2, &l2, "c ")?)?;
        let kernel = if kspec == "linear" {
            KernelSpec::linear(c)
        } else if let Some(sig) = kspec.strip_prefix("rbf ") {
            KernelSpec::rbf(parse_f(ln, sig.trim())?, c)
        } else {
            return Err(ModelError::Parse {
                line: ln,
                msg: "unknown kernel kind".into(),
            });
        };
        let (ln, l) = next("dim")?;
        let dim: usize = field(ln, &l, "dim ")?.parse().map_err(|_| ModelError::Parse {
            line: ln,
            msg: "bad dim".into(),
        })?;
        let (ln, l) = next("iterations")?;
        let iterations: usize =
            field(ln, &l, "iterations ")?
                .parse()
                .map_err(|_| ModelError::Parse {
                    line: ln,
                    msg: "bad iterations".into(),
                })?;
        let (ln, l) = next("gap")?;
        let final_gap = parse_f(ln, &field(ln, &l, "gap ")?)?;
        let (ln, l) = next("scaling")?;
        let n_scale: usize = field(ln, &l, "scaling ")?
            .parse()
            .map_err(|_| ModelError::Parse {
                line: ln,
                msg: "bad scaling count".into(),
            })?;
        let mut ranges = Vec::with_capacity(n_scale);
        for _ in 0..n_scale {
            let (ln, l) = next("scaling range")?;
            let mut parts = l.split_whitespace();
            let lo = parse_f(ln, parts.next().unwrap_or(""))?;
            let hi = parse_f(ln, parts.next().unwrap_or(""))?;
            ranges.push((lo, hi));
        }
        let scaling = if n_scale > 0 {
            Some(ScalingParams::from_ranges(ranges))
        } else {
            None
        };
        let (ln, l) = next("nsv")?;
        let nsv: usize = field(ln, &l, "nsv ")?.parse().map_err(|_| ModelError::Parse {
            line: ln,
            msg: "bad nsv".into(),
        })?;
        let mut sv_indices = Vec::with_capacity(nsv);
        let mut sv_coeffs = Vec::with_capacity(nsv);
        let mut sv_patterns = Vec::with_capacity(nsv);
        for _ in 0..nsv {
            let (ln, l) = next("sv line")?;
            let mut parts = l.split_whitespace();
            let idx: usize = parts
                .next()
                .unwrap_or("")
                .parse()
                .map_err(|_| ModelError::Parse {
                    line: ln,
                    msg: "bad sv index".into(),
                })?;
            let beta = parse_f(ln, parts.next().unwrap_or(""))?;
            let mut entries = Vec::new();
            for tok in parts {
                let (j, v) = tok.split_once(':').ok_or_else(|| ModelError::Parse {
                    line: ln,
                    msg: format!("expected idx:val, got {tok:?}"),
                })?;
                let j: usize = j.parse().map_err(|_| ModelError::Parse {
                    line: ln,
                    msg: "bad sv feature index".into(),
                })?;
                entries.push((j - 1, parse_f(ln, v)?));
            }
            sv_indices.push(idx);
            sv_coeffs.push(beta);
            sv_patterns.push(SparseVector::new(entries));
        }
        Ok(TrainedModel {
            algo,
            kernel,
            scaling,
            dim,
            sv_indices,
            sv_coeffs,
            sv_patterns,
            iterations,
            final_gap,
        })
    }
}

/// Primal variables recovered from a converged dual solution.
#[derive(Debug, Clone)]
pub struct PrimalVars<F> {
    /// Dense weight vector; materialized for the linear kernel only.
    pub w: Option<Vec<F>>,
    pub rho: F,
    /// Slacks `xi = alpha / C`.
    pub xi: Vec<F>,
}

/// Recover `w = Z alpha`, `xi = alpha / C` and `rho` (mean of the gradient
/// over the support, where all active constraints coincide at the optimum).
pub fn recover_primal<F: Float>(
    view: &LabeledKernelView<'_, F>,
    alpha: &[F],
) -> Result<PrimalVars<F>, ModelError> {
    let ds = view.dataset();
    let n = ds.len();
    let support: Vec<usize> = (0..n).filter(|&i| alpha[i] > F::zero()).collect();
    if support.is_empty() {
        return Err(ModelError::EmptySupport);
    }
    let c = view.spec().c;
    let xi: Vec<F> = alpha.iter().map(|&a| a / c).collect();
    let w = match view.spec().kind {
        KernelKind::Linear => {
            let mut w = vec![F::zero(); ds.dim()];
            for &i in &support {
                let y = F::real(ds.label(i) as f64);
                for &(j, v) in ds.pattern(i).entries() {
                    w[j] = w[j] + alpha[i] * y * v;
                }
            }
            Some(w)
        }
        KernelKind::Rbf { .. } => None,
    };
    // g_i = w.z_i + alpha_i / C = rho on active constraints at the optimum
    let mut rho = F::zero();
    for &i in &support {
        let col = view.column(i);
        let gi = alpha
            .iter()
            .zip(col.iter())
            .filter(|(&a, _)| a > F::zero())
            .map(|(&a, &k)| a * k)
            .fold(F::zero(), |acc, x| acc + x);
        rho = rho + gi;
    }
    rho = rho / F::real(support.len() as f64);
    Ok(PrimalVars { w, rho, xi })
}

/// Dual objective `alpha' Khat alpha / 2`, via support columns only.
pub fn dual_objective<F: Float>(view: &LabeledKernelView<'_, F>, alpha: &[F]) -> F {
    let mut acc = F::zero();
    for (i, &a) in alpha.iter().enumerate() {
        if a > F::zero() {
            let col = view.column(i);
            let gi = alpha
                .iter()
                .zip(col.iter())
                .filter(|(&aj, _)| aj > F::zero())
                .map(|(&aj, &k)| aj * k)
                .fold(F::zero(), |acc2, x| acc2 + x);
            acc = acc + a * gi;
        }
    }
    acc * F::real(0.5)
}

/// Primal objective `||w||^2 / 2 - rho + (C/2) sum xi^2` (linear kernel).
pub fn primal_objective<F: Float>(pv: &PrimalVars<F>, c: F) -> F {
    let w = pv.w.as_ref().expect("primal objective needs a linear-kernel w");
    let wn: F = w.iter().map(|&x| x * x).fold(F::zero(), |a, x| a + x);
    let xin: F = pv.xi.iter().map(|&x| x * x).fold(F::zero(), |a, x| a + x);
    wn * F::real(0.5) - pv.rho + c * F::real(0.5) * xin
}
