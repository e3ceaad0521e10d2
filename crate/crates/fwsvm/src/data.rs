//! LibSVM-format parsing, feature scaling and deterministic splits.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::float::Float;

/// Errors from parsing and dataset manipulation.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("empty input")]
    EmptyInput,
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: label {found:?} is not one of +1/1/-1")]
    BadLabel { line: usize, found: String },
    #[error("line {line}: feature indices must be strictly increasing")]
    NonIncreasingIndex { line: usize },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("fold count {k} out of range for {n} patterns")]
    FoldCountOutOfRange { k: usize, n: usize },
}

/// Sparse feature vector with strictly increasing 0-based indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector<F> {
    entries: Vec<(usize, F)>,
}

impl<F: Float> SparseVector<F> {
    /// Build from `(index, value)` pairs; indices must be strictly increasing.
    pub fn new(entries: Vec<(usize, F)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        SparseVector { entries }
    }

    pub fn entries(&self) -> &[(usize, F)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(i, _)| i)
    }

    /// Sparse dot product over the intersection of index sets.
    pub fn dot(&self, other: &Self) -> F {
        let mut acc = F::zero();
        let (mut a, mut b) = (0, 0);
        while a < self.entries.len() && b < other.entries.len() {
            let (ia, va) = self.entries[a];
            let (ib, vb) = other.entries[b];
            match ia.cmp(&ib) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc = acc + va * vb;
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }

    /// Squared Euclidean distance over the union of index sets.
    pub fn squared_distance(&self, other: &Self) -> F {
        let mut acc = F::zero();
        let (mut a, mut b) = (0, 0);
        while a < self.entries.len() || b < other.entries.len() {
            let ia = self.entries.get(a).map(|&(i, _)| i);
            let ib = other.entries.get(b).map(|&(i, _)| i);
            let d = match (ia, ib) {
                (Some(i), Some(j)) if i == j => {
                    let d = self.entries[a].1 - other.entries[b].1;
                    a += 1;
                    b += 1;
                    d
                }
                (Some(i), Some(j)) if i < j => {
                    let d = self.entries[a].1;
                    a += 1;
                    d
                }
                (Some(_), Some(_)) | (None, Some(_)) => {
                    let d = other.entries[b].1;
                    b += 1;
                    d
                }
                (Some(_), None) => {
                    let d = self.entries[a].1;
                    a += 1;
                    d
                }
                (None, None) => unreachable!(),
            };
            acc = acc + d * d;
        }
        acc
    }

    /// Dense value at `index` (implicit zeros included).
    pub fn get(&self, index: usize) -> F {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => F::zero(),
        }
    }
}

/// Training corpus: sparse patterns with binary labels.
#[derive(Debug, Clone)]
pub struct Dataset<F> {
    patterns: Vec<SparseVector<F>>,
    labels: Vec<i8>,
    dim: usize,
}

impl<F: Float> Dataset<F> {
    /// Assemble a dataset; `dim` grows to cover every index if needed.
    pub fn new(patterns: Vec<SparseVector<F>>, labels: Vec<i8>, dim: usize) -> Self {
        assert_eq!(patterns.len(), labels.len());
        assert!(labels.iter().all(|&y| y == 1 || y == -1));
        let max_idx = patterns.iter().filter_map(|p| p.max_index()).max();
        let dim = dim.max(max_idx.map_or(0, |i| i + 1));
        Dataset {
            patterns,
            labels,
            dim,
        }
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pattern(&self, i: usize) -> &SparseVector<F> {
        &self.patterns[i]
    }

    pub fn patterns(&self) -> &[SparseVector<F>] {
        &self.patterns
    }

    pub fn label(&self, i: usize) -> i8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    /// New dataset holding the listed rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset<F> {
        Dataset {
            patterns: indices.iter().map(|&i| self.patterns[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            dim: self.dim,
        }
    }
}

/// Parse LibSVM text: `<label> <idx>:<val> ...` per line, 1-based indices.
pub fn parse_libsvm<F: Float>(text: &str) -> Result<Dataset<F>, DataError> {
    let mut patterns = Vec::new();
    let mut labels = Vec::new();
    let mut dim = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let label_tok = fields.next().expect("non-empty line has a first token");
        let label = match label_tok {
            "+1" | "1" | "+1.0" | "1.0" => 1i8,
            "-1" | "-1.0" => -1i8,
            other => {
                return Err(DataError::BadLabel {
                    line,
                    found: other.to_string(),
                })
            }
        };
        let mut entries: Vec<(usize, F)> = Vec::new();
        for tok in fields {
            let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| DataError::Malformed {
                line,
                msg: format!("expected idx:val, got {tok:?}"),
            })?;
            let idx: usize = idx_s.parse().map_err(|_| DataError::Malformed {
                line,
                msg: format!("bad feature index {idx_s:?}"),
            })?;
            if idx == 0 {
                return Err(DataError::Malformed {
                    line,
                    msg: "feature indices are 1-based".into(),
                });
            }
            let val: f64 = val_s.parse().map_err(|_| DataError::Malformed {
                line,
                msg: format!("bad feature value {val_s:?}"),
            })?;
            let idx0 = idx - 1;
            if let Some(&(last, _)) = entries.last() {
                if idx0 <= last {
                    return Err(DataError::NonIncreasingIndex { line });
                }
            }
            entries.push((idx0, F::real(val)));
            dim = dim.max(idx0 + 1);
        }
        patterns.push(SparseVector::new(entries));
        labels.push(label);
    }
    if patterns.is_empty() {
        return Err(DataError::EmptyInput);
    }
    Ok(Dataset {
        patterns,
        labels,
        dim,
    })
}

/// Serialize back to LibSVM text (1-based indices, `%+d` labels,
/// shortest round-trip decimals).
pub fn serialize_libsvm<F: Float>(ds: &Dataset<F>) -> String {
    let mut out = String::new();
    for i in 0..ds.len() {
        let _ = write!(out, "{:+}", ds.label(i));
        for &(idx, val) in ds.pattern(i).entries() {
            let _ = write!(out, " {}:{}", idx + 1, val);
        }
        out.push('\n');
    }
    out
}

/// Per-feature (min, max) over the fitting set.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingParams<F> {
    ranges: Vec<(F, F)>,
}

impl<F: Float> ScalingParams<F> {
    /// Record the per-feature range of `ds`, implicit zeros included.
    pub fn fit(ds: &Dataset<F>) -> Self {
        let d = ds.dim();
        let mut ranges = vec![(F::infinity(), F::neg_infinity()); d];
        for p in ds.patterns() {
            let mut cursor = 0usize;
            for &(idx, val) in p.entries() {
                // features absent from this row carry an implicit zero
                for r in ranges.iter_mut().take(idx).skip(cursor) {
                    r.0 = r.0.min(F::zero());
                    r.1 = r.1.max(F::zero());
                }
                ranges[idx].0 = ranges[idx].0.min(val);
                ranges[idx].1 = ranges[idx].1.max(val);
                cursor = idx + 1;
            }
            for r in ranges.iter_mut().skip(cursor) {
                r.0 = r.0.min(F::zero());
                r.1 = r.1.max(F::zero());
            }
        }
        if ds.is_empty() {
            for r in ranges.iter_mut() {
                *r = (F::zero(), F::zero());
            }
        }
        ScalingParams { ranges }
    }

    pub fn from_ranges(ranges: Vec<(F, F)>) -> Self {
        assert!(ranges.iter().all(|&(lo, hi)| lo <= hi));
        ScalingParams { ranges }
    }

    pub fn ranges(&self) -> &[(F, F)] {
        &self.ranges
    }

    fn map_value(&self, idx: usize, v: F) -> F {
        let (lo, hi) = self.ranges[idx];
        if lo == hi {
            F::zero()
        } else {
            // affine map sending [lo, hi] to [-1, 1]; no clamping outside
            -F::one() + F::real(2.0) * (v - lo) / (hi - lo)
        }
    }

    /// Apply the fitted map to every feature of `ds` (implicit zeros become
    /// explicit entries when their image is nonzero).
    pub fn apply(&self, ds: &Dataset<F>) -> Result<Dataset<F>, DataError> {
        if ds.dim() > self.ranges.len() {
            return Err(DataError::DimensionMismatch {
                expected: self.ranges.len(),
                found: ds.dim(),
            });
        }
        let d = self.ranges.len();
        let patterns = ds
            .patterns()
            .iter()
            .map(|p| {
                let mut entries = Vec::with_capacity(d);
                for idx in 0..d {
                    let mapped = self.map_value(idx, p.get(idx));
                    if mapped != F::zero() {
                        entries.push((idx, mapped));
                    }
                }
                SparseVector::new(entries)
            })
            .collect();
        Ok(Dataset {
            patterns,
            labels: ds.labels.clone(),
            dim: d,
        })
    }
}

/// Fit scaling on `fit`, apply the same map to both sets.
#[allow(clippy::type_complexity)]
pub fn scale_features<F: Float>(
    fit: &Dataset<F>,
    apply: &Dataset<F>,
) -> Result<(Dataset<F>, Dataset<F>, ScalingParams<F>), DataError> {
    if fit.dim() != apply.dim() {
        return Err(DataError::DimensionMismatch {
            expected: fit.dim(),
            found: apply.dim(),
        });
    }
    let params = ScalingParams::fit(fit);
    let fit_scaled = params.apply(fit)?;
    let apply_scaled = params.apply(apply)?;
    Ok((fit_scaled, apply_scaled, params))
}

/// Deterministic k-fold assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<usize>,
    seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fold_of(&self, pattern: usize) -> usize {
        self.assignments[pattern]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    /// Indices held out in fold `f`, ascending.
    pub fn test_indices(&self, f: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == f)
            .collect()
    }

    /// Indices kept for training in fold `f`, ascending.
    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != f)
            .collect()
    }
}

/// Shuffled balanced k-fold split, deterministic for a fixed seed.
pub fn kfold_split<F: Float>(ds: &Dataset<F>, k: usize, seed: u64) -> Result<FoldPlan, DataError> {
    let n = ds.len();
    if k < 2 || k > n {
        return Err(DataError::FoldCountOutOfRange { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut assignments = vec![0usize; n];
    for (pos, &idx) in order.iter().enumerate() {
        assignments[idx] = pos % k;
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}

/// Shuffled train/test split with `test_fraction` of the rows (at least one)
/// held out. Deterministic for a fixed seed.
pub fn holdout_split<F: Float>(
    ds: &Dataset<F>,
    test_fraction: f64,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let n = ds.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    let mut test: Vec<usize> = order[..n_test].to_vec();
    let mut train: Vec<usize> = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    (train, test)
}
