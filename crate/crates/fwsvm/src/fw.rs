//! Pairwise Frank-Wolfe over the probability simplex for `f(a) = a'Khat a / 2`.
//!
//! Each iteration moves mass from the away vertex (largest gradient entry on
//! the support) to the forward vertex (smallest gradient entry), with the
//! exact line-search step clamped to stay feasible. The gradient `g = Khat a`
//! is maintained incrementally from the two touched columns and refreshed
//! periodically; convergence is certified against a recomputed gradient.

use crate::float::Float;
use crate::kernel::LabeledKernelView;

/// Stopping parameters for a solver run.
#[derive(Debug, Clone, Copy)]
pub struct StopRule<F> {
    /// Gap threshold.
    pub epsilon: F,
    /// Iteration cap.
    pub max_iter: usize,
    /// Recompute `g = Khat a` from scratch every this many iterations.
    pub refresh_every: usize,
}

impl<F: Float> StopRule<F> {
    pub fn new(epsilon: F, max_iter: usize) -> Self {
        assert!(epsilon > F::zero(), "epsilon must be positive");
        assert!(max_iter >= 1, "max_iter must be at least 1");
        StopRule {
            epsilon,
            max_iter,
            refresh_every: 50_000,
        }
    }
}

impl<F: Float> Default for StopRule<F> {
    fn default() -> Self {
        StopRule::new(F::real(1e-5), 1_000_000)
    }
}

/// Why a solver run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    Converged,
    IterationCap,
}

/// One iteration record.
#[derive(Debug, Clone, Copy)]
pub struct TraceRecord<F> {
    pub iter: usize,
    pub objective: F,
    pub gap: F,
    pub step: F,
    pub forward: usize,
    pub away: usize,
    pub support: usize,
}

/// Downsampled per-iteration history of a run.
#[derive(Debug, Clone)]
pub struct IterationTrace<F> {
    records: Vec<TraceRecord<F>>,
    stride: usize,
}

impl<F: Float> IterationTrace<F> {
    pub fn new(stride: usize) -> Self {
        IterationTrace {
            records: Vec::new(),
            stride: stride.max(1),
        }
    }

    pub fn push(&mut self, rec: TraceRecord<F>) {
        if rec.iter.is_multiple_of(self.stride) {
            self.records.push(rec);
        }
    }

    pub fn records(&self) -> &[TraceRecord<F>] {
        &self.records
    }
}

impl<F: Float> Default for IterationTrace<F> {
    fn default() -> Self {
        IterationTrace::new(1)
    }
}

/// Dual iterate: coefficients on the (candidate-restricted) simplex plus the
/// maintained gradient.
#[derive(Debug, Clone)]
pub struct SolverState<F> {
    alpha: Vec<F>,
    grad: Vec<F>,
    candidates: Vec<usize>,
    is_candidate: Vec<bool>,
    pub iter: usize,
    pub last_gap: F,
}

impl<F: Float> SolverState<F> {
    pub fn alpha(&self) -> &[F] {
        &self.alpha
    }

    pub fn grad(&self) -> &[F] {
        &self.grad
    }

    /// Candidate indices, ascending.
    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn is_candidate(&self, i: usize) -> bool {
        self.is_candidate[i]
    }

    /// Indices with strictly positive coefficient.
    pub fn support(&self) -> Vec<usize> {
        (0..self.alpha.len())
            .filter(|&i| self.alpha[i] > F::zero())
            .collect()
    }

    pub fn support_size(&self) -> usize {
        self.alpha.iter().filter(|&&a| a > F::zero()).count()
    }

    /// Objective `a'Khat a / 2 = a.g / 2` via the maintained gradient.
    pub fn objective(&self) -> F {
        let mut acc = F::zero();
        for (&a, &g) in self.alpha.iter().zip(&self.grad) {
            if a > F::zero() {
                acc = acc + a * g;
            }
        }
        acc * F::real(0.5)
    }

    /// Grow the candidate set by one index.
    pub fn add_candidate(&mut self, i: usize) {
        if !self.is_candidate[i] {
            self.is_candidate[i] = true;
            let pos = self.candidates.partition_point(|&c| c < i);
            self.candidates.insert(pos, i);
        }
    }

    /// Recompute `g = Khat a` from scratch off the support columns.
    pub fn refresh_gradient(&mut self, view: &LabeledKernelView<'_, F>) {
        let n = self.alpha.len();
        let mut g = vec![F::zero(); n];
        for i in 0..n {
            let a = self.alpha[i];
            if a > F::zero() {
                let col = view.column(i);
                for (gj, &kj) in g.iter_mut().zip(col.iter()) {
                    *gj = *gj + a * kj;
                }
            }
        }
        self.grad = g;
    }
}

/// Start at vertex `i0` of the simplex over `candidates`.
pub fn init_state<F: Float>(
    view: &LabeledKernelView<'_, F>,
    i0: usize,
    candidates: &[usize],
) -> SolverState<F> {
    assert!(
        candidates.contains(&i0),
        "initial vertex must be a candidate"
    );
    let n = view.len();
    let mut is_candidate = vec![false; n];
    let mut sorted: Vec<usize> = candidates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for &c in &sorted {
        assert!(c < n, "candidate out of range");
        is_candidate[c] = true;
    }
    let mut alpha = vec![F::zero(); n];
    alpha[i0] = F::one();
    let grad = view.column(i0).as_slice().to_vec();
    SolverState {
        alpha,
        grad,
        candidates: sorted,
        is_candidate,
        iter: 0,
        last_gap: F::zero(),
    }
}

/// Forward node `s` (smallest gradient over candidates) and away node `v`
/// (largest gradient over the support). Ties break to the lowest index.
pub fn select_pair<F: Float>(state: &SolverState<F>) -> (usize, usize) {
    let mut s = None;
    let mut v = None;
    for &i in &state.candidates {
        let g = state.grad[i];
        match s {
            None => s = Some((i, g)),
            Some((_, gs)) if g < gs => s = Some((i, g)),
            _ => {}
        }
        if state.alpha[i] > F::zero() {
            match v {
                None => v = Some((i, g)),
                Some((_, gv)) if g > gv => v = Some((i, g)),
                _ => {}
            }
        }
    }
    let (s, _) = s.expect("candidate set is nonempty");
    let (v, _) = v.expect("simplex invariant keeps the support nonempty");
    (s, v)
}

/// FW gap `delta = g_v - g_s = -g.d`.
pub fn fw_gap<F: Float>(state: &SolverState<F>, s: usize, v: usize) -> F {
    state.grad[v] - state.grad[s]
}

/// Exact line-search step `min(max(delta / d'Khat d, 0), alpha_v)` for
/// `d = e_s - e_v`.
pub fn optimal_step<F: Float>(
    view: &LabeledKernelView<'_, F>,
    state: &SolverState<F>,
    s: usize,
    v: usize,
    gap: F,
) -> F {
    if s == v {
        return F::zero();
    }
    let col_s = view.column(s);
    let col_v = view.column(v);
    // d'Khat d = K_ss - 2 K_sv + K_vv > 0 from the (1/C) I shift
    let curvature = col_s[s] - F::real(2.0) * col_s[v] + col_v[v];
    let unclamped = (gap / curvature).max(F::zero());
    unclamped.min(state.alpha[v])
}

/// Move `gamma` of mass from `v` to `s`, updating the gradient from the two
/// columns. `gamma = alpha_v` zeroes `alpha_v` exactly.
pub fn apply_step<F: Float>(
    view: &LabeledKernelView<'_, F>,
    state: &mut SolverState<F>,
    s: usize,
    v: usize,
    gamma: F,
) {
    debug_assert!(gamma >= F::zero() && gamma <= state.alpha[v]);
    if gamma > F::zero() && s != v {
        let exhausted = gamma == state.alpha[v];
        state.alpha[s] = state.alpha[s] + gamma;
        state.alpha[v] = if exhausted {
            F::zero()
        } else {
            state.alpha[v] - gamma
        };
        let col_s = view.column(s);
        let col_v = view.column(v);
        for ((g, &ks), &kv) in state.grad.iter_mut().zip(col_s.iter()).zip(col_v.iter()) {
            *g = *g + gamma * (ks - kv);
        }
    }
    state.iter += 1;
}

/// Result of a solver run.
#[derive(Debug, Clone)]
pub struct FwOutcome<F> {
    pub alpha: Vec<F>,
    pub trace: IterationTrace<F>,
    pub reason: TerminationReason,
    pub iterations: usize,
    pub final_gap: F,
}

/// Pairwise Frank-Wolfe over the simplex restricted to `candidates`.
///
/// Convergence (`gap <= epsilon`) is re-verified against a gradient
/// recomputed from scratch before being reported.
pub fn train_fw<F: Float>(
    view: &LabeledKernelView<'_, F>,
    stop: &StopRule<F>,
    i0: usize,
    candidates: &[usize],
) -> FwOutcome<F> {
    let mut state = init_state(view, i0, candidates);
    let mut trace = IterationTrace::default();
    let reason = loop {
        let (s, v) = select_pair(&state);
        let gap = fw_gap(&state, s, v);
        state.last_gap = gap;
        if gap <= stop.epsilon {
            state.refresh_gradient(view);
            let (s2, v2) = select_pair(&state);
            let gap2 = fw_gap(&state, s2, v2);
            state.last_gap = gap2;
            if gap2 <= stop.epsilon {
                break TerminationReason::Converged;
            }
            continue;
        }
        if state.iter >= stop.max_iter {
            break TerminationReason::IterationCap;
        }
        let gamma = optimal_step(view, &state, s, v, gap);
        apply_step(view, &mut state, s, v, gamma);
        trace.push(TraceRecord {
            iter: state.iter,
            objective: state.objective(),
            gap,
            step: gamma,
            forward: s,
            away: v,
            support: state.support_size(),
        });
        if state.iter.is_multiple_of(stop.refresh_every) {
            state.refresh_gradient(view);
        }
    };
    FwOutcome {
        alpha: state.alpha.clone(),
        trace,
        reason,
        iterations: state.iter,
        final_gap: state.last_gap,
    }
}
