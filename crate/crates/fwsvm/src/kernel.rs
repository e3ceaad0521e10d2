//! Kernel evaluation and the regularized labeled kernel matrix.
//!
//! The training matrix is `Khat[i][j] = y_i y_j k(x_i, x_j) + (1/C) [i = j]`.
//! It is exposed entrywise and columnwise; full materialization is reserved
//! for small instances (oracles and tests). Columns are cached with LRU
//! eviction since the pairwise step touches at most three columns per
//! iteration but revisits hot vertices.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::data::{Dataset, SparseVector};
use crate::float::Float;

/// Kernel function selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind<F> {
    Linear,
    /// Gaussian kernel `exp(-||x - x'||^2 / (2 sigma^2))`.
    Rbf { sigma: F },
}

/// Kernel plus the regularization constant that shifts the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec<F> {
    pub kind: KernelKind<F>,
    pub c: F,
}

impl<F: Float> KernelSpec<F> {
    pub fn new(kind: KernelKind<F>, c: F) -> Self {
        assert!(c > F::zero() && c.is_finite(), "C must be positive finite");
        if let KernelKind::Rbf { sigma } = kind {
            assert!(sigma > F::zero(), "sigma must be positive");
        }
        KernelSpec { kind, c }
    }

    pub fn linear(c: F) -> Self {
        Self::new(KernelKind::Linear, c)
    }

    pub fn rbf(sigma: F, c: F) -> Self {
        Self::new(KernelKind::Rbf { sigma }, c)
    }

    /// Evaluate the raw (unlabeled) kernel.
    pub fn eval(&self, x: &SparseVector<F>, x2: &SparseVector<F>) -> F {
        match self.kind {
            KernelKind::Linear => x.dot(x2),
            KernelKind::Rbf { sigma } => {
                let d2 = x.squared_distance(x2);
                (-d2 / (F::real(2.0) * sigma * sigma)).exp()
            }
        }
    }
}

struct ColumnCache<F> {
    budget: usize,
    slots: HashMap<usize, (Arc<Vec<F>>, u64)>,
    tick: u64,
    computed: u64,
}

/// On-demand view of the labeled, diagonally shifted kernel matrix.
pub struct LabeledKernelView<'a, F> {
    data: &'a Dataset<F>,
    spec: KernelSpec<F>,
    cache: Mutex<ColumnCache<F>>,
}

impl<'a, F: Float> LabeledKernelView<'a, F> {
    /// Default cache budget: `min(N, 4096)` columns.
    pub fn new(data: &'a Dataset<F>, spec: KernelSpec<F>) -> Self {
        let budget = data.len().min(4096);
        Self::with_budget(data, spec, budget)
    }

    pub fn with_budget(data: &'a Dataset<F>, spec: KernelSpec<F>, budget: usize) -> Self {
        LabeledKernelView {
            data,
            spec,
            cache: Mutex::new(ColumnCache {
                budget,
                slots: HashMap::new(),
                tick: 0,
                computed: 0,
            }),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dataset(&self) -> &'a Dataset<F> {
        self.data
    }

    pub fn spec(&self) -> &KernelSpec<F> {
        &self.spec
    }

    /// Total columns computed so far (cache misses), for cost accounting.
    pub fn columns_computed(&self) -> u64 {
        self.cache.lock().unwrap().computed
    }

    /// Single entry of `Khat`.
    pub fn entry(&self, i: usize, j: usize) -> F {
        assert!(i < self.len() && j < self.len(), "index out of range");
        let yi = F::real(self.data.label(i) as f64);
        let yj = F::real(self.data.label(j) as f64);
        let mut v = yi * yj * self.spec.eval(self.data.pattern(i), self.data.pattern(j));
        if i == j {
            v = v + self.spec.c.recip();
        }
        v
    }

    fn compute_column(&self, i: usize) -> Vec<F> {
        let n = self.len();
        let yi = F::real(self.data.label(i) as f64);
        let xi = self.data.pattern(i);
        let mut col = Vec::with_capacity(n);
        for j in 0..n {
            let yj = F::real(self.data.label(j) as f64);
            let mut v = yi * yj * self.spec.eval(xi, self.data.pattern(j));
            if i == j {
                v = v + self.spec.c.recip();
            }
            col.push(v);
        }
        col
    }

    /// Column `i` of `Khat`, cached. Repeated calls return bitwise-identical
    /// vectors; eviction is least-recently-used.
    pub fn column(&self, i: usize) -> Arc<Vec<F>> {
        assert!(i < self.len(), "index out of range");
        {
            let mut cache = self.cache.lock().unwrap();
            if cache.budget == 0 {
                cache.computed += 1;
                drop(cache);
                return Arc::new(self.compute_column(i));
            }
            cache.tick += 1;
            let tick = cache.tick;
            if let Some(slot) = cache.slots.get_mut(&i) {
                slot.1 = tick;
                return Arc::clone(&slot.0);
            }
        }
        // compute outside the lock; a racing miss recomputes identical data
        let col = Arc::new(self.compute_column(i));
        let mut cache = self.cache.lock().unwrap();
        cache.computed += 1;
        cache.tick += 1;
        let tick = cache.tick;
        if cache.slots.len() >= cache.budget {
            if let Some((&lru, _)) = cache.slots.iter().min_by_key(|(_, (_, t))| *t) {
                cache.slots.remove(&lru);
            }
        }
        cache.slots.insert(i, (Arc::clone(&col), tick));
        col
    }

    /// Full `Khat`, row-major. Guarded: only meant for small instances.
    pub fn materialize(&self) -> Vec<Vec<F>> {
        let n = self.len();
        assert!(n <= 2000, "materialization is restricted to N <= 2000");
        (0..n).map(|i| self.compute_column(i)).collect()
    }
}
