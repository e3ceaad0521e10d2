//! Modified Frank-Wolfe: online working-set activation grafted onto the
//! pairwise step, plus the general positive-weight W-SVM solver.
//!
//! Patterns split into working vectors (binary weight 1) and idle vectors
//! (weight 0, coefficient pinned at zero). Each iteration may activate the
//! idle vector with the smallest strictly negative gradient entry, then runs
//! one pairwise step restricted to the working set. Termination requires a
//! small gap and no activation in the same iteration.

use thiserror::Error;

use crate::float::Float;
use crate::fw::{
    apply_step, fw_gap, init_state, optimal_step, select_pair, FwOutcome, IterationTrace,
    SolverState, StopRule, TerminationReason, TraceRecord,
};
use crate::kernel::LabeledKernelView;

/// Monotone nondecreasing set of activated (working) indices.
#[derive(Debug, Clone)]
pub struct WorkingSet {
    members: Vec<usize>,
    mask: Vec<bool>,
    activation_log: Vec<(usize, usize)>,
}

impl WorkingSet {
    pub fn singleton(n: usize, i0: usize) -> Self {
        assert!(i0 < n);
        let mut mask = vec![false; n];
        mask[i0] = true;
        WorkingSet {
            members: vec![i0],
            mask,
            activation_log: Vec::new(),
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask[i]
    }

    /// `(iteration, index)` pairs, in activation order.
    pub fn activation_log(&self) -> &[(usize, usize)] {
        &self.activation_log
    }

    fn activate(&mut self, iter: usize, i: usize) {
        debug_assert!(!self.mask[i]);
        self.mask[i] = true;
        let pos = self.members.partition_point(|&m| m < i);
        self.members.insert(pos, i);
        self.activation_log.push((iter, i));
    }
}

/// Activate the idle index with the smallest gradient entry if that entry is
/// strictly below `threshold` (0 by default per the activation rule).
/// Returns the activated index, if any.
pub fn try_activate<F: Float>(
    state: &mut SolverState<F>,
    ws: &mut WorkingSet,
    threshold: F,
) -> Option<usize> {
    let n = state.alpha().len();
    if ws.len() >= n {
        return None;
    }
    let mut best: Option<(usize, F)> = None;
    for i in 0..n {
        if ws.contains(i) {
            continue;
        }
        let g = state.grad()[i];
        match best {
            None => best = Some((i, g)),
            Some((_, gb)) if g < gb => best = Some((i, g)),
            _ => {}
        }
    }
    let (u, gu) = best.expect("guard ensures an idle index exists");
    if gu < threshold {
        ws.activate(state.iter, u);
        state.add_candidate(u);
        Some(u)
    } else {
        None
    }
}

/// Result of a modified Frank-Wolfe run.
#[derive(Debug, Clone)]
pub struct MfwOutcome<F> {
    pub alpha: Vec<F>,
    pub working_set: WorkingSet,
    pub trace: IterationTrace<F>,
    pub reason: TerminationReason,
    pub iterations: usize,
    pub final_gap: F,
}

/// Modified Frank-Wolfe with the default strict activation threshold of 0.
pub fn train_mfw<F: Float>(
    view: &LabeledKernelView<'_, F>,
    stop: &StopRule<F>,
    i0: usize,
) -> MfwOutcome<F> {
    train_mfw_with_threshold(view, stop, i0, F::zero())
}

/// Modified Frank-Wolfe with a configurable activation threshold.
pub fn train_mfw_with_threshold<F: Float>(
    view: &LabeledKernelView<'_, F>,
    stop: &StopRule<F>,
    i0: usize,
    threshold: F,
) -> MfwOutcome<F> {
    let n = view.len();
    let mut ws = WorkingSet::singleton(n, i0);
    let mut state = init_state(view, i0, &[i0]);
    let mut trace = IterationTrace::default();
    let reason = loop {
        let changed = try_activate(&mut state, &mut ws, threshold).is_some();
        let (s, v) = select_pair(&state);
        let gap = fw_gap(&state, s, v);
        state.last_gap = gap;
        if gap <= stop.epsilon && !changed {
            // certify against a recomputed gradient: both the gap and the
            // absence of an activation candidate must survive the refresh
            state.refresh_gradient(view);
            let (s2, v2) = select_pair(&state);
            let gap2 = fw_gap(&state, s2, v2);
            state.last_gap = gap2;
            let idle_min = (0..n)
                .filter(|&i| !ws.contains(i))
                .map(|i| state.grad()[i])
                .fold(F::infinity(), F::min);
            if gap2 <= stop.epsilon && idle_min >= threshold {
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
    MfwOutcome {
        alpha: state.alpha().to_vec(),
        working_set: ws,
        trace,
        reason,
        iterations: state.iter,
        final_gap: state.last_gap,
    }
}

/// Errors from the weighted solver.
#[derive(Debug, Error)]
pub enum WsvmError {
    #[error("weight t[{index}] = {value} is not strictly positive")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("weight vector length {found} does not match N = {expected}")]
    LengthMismatch { expected: usize, found: usize },
}

/// Per-pattern positive weights for the constraint `sum t_i a_i = 1`.
#[derive(Debug, Clone)]
pub struct WeightVector<F> {
    t: Vec<F>,
}

impl<F: Float> WeightVector<F> {
    pub fn new(t: Vec<F>) -> Result<Self, WsvmError> {
        for (i, &w) in t.iter().enumerate() {
            if !w.is_finite() || w <= F::zero() {
                return Err(WsvmError::NonPositiveWeight {
                    index: i,
                    value: w.to_f64_lossy(),
                });
            }
        }
        Ok(WeightVector { t })
    }

    pub fn uniform(n: usize) -> Self {
        WeightVector {
            t: vec![F::one(); n],
        }
    }

    pub fn weights(&self) -> &[F] {
        &self.t
    }
}

/// Pairwise Frank-Wolfe over the weighted simplex `{a >= 0, sum t_i a_i = 1}`,
/// whose vertices are `e_i / t_i`. With `t = 1` this reduces exactly to the
/// standard solver.
pub fn train_wsvm<F: Float>(
    view: &LabeledKernelView<'_, F>,
    t: &WeightVector<F>,
    stop: &StopRule<F>,
    i0: usize,
) -> Result<FwOutcome<F>, WsvmError> {
    let n = view.len();
    if t.t.len() != n {
        return Err(WsvmError::LengthMismatch {
            expected: n,
            found: t.t.len(),
        });
    }
    let t = &t.t;
    let mut alpha = vec![F::zero(); n];
    alpha[i0] = t[i0].recip();
    let col0 = view.column(i0);
    let mut grad: Vec<F> = col0.iter().map(|&k| k * alpha[i0]).collect();
    let mut iter = 0usize;
    let mut last_gap;
    let mut trace = IterationTrace::default();

    let refresh = |alpha: &[F], grad: &mut Vec<F>| {
        let mut g = vec![F::zero(); n];
        for (i, &a) in alpha.iter().enumerate() {
            if a > F::zero() {
                let col = view.column(i);
                for (gj, &kj) in g.iter_mut().zip(col.iter()) {
                    *gj = *gj + a * kj;
                }
            }
        }
        *grad = g;
    };
    // forward/away over the scaled gradient g_i / t_i; ties to lowest index
    let pick = |alpha: &[F], grad: &[F]| {
        let mut s = (0usize, F::infinity());
        let mut v = (0usize, F::neg_infinity());
        for i in 0..n {
            let gs = grad[i] / t[i];
            if gs < s.1 {
                s = (i, gs);
            }
            if alpha[i] > F::zero() && gs > v.1 {
                v = (i, gs);
            }
        }
        (s.0, v.0)
    };

    let reason = loop {
        let (s, v) = pick(&alpha, &grad);
        let gap = grad[v] / t[v] - grad[s] / t[s];
        last_gap = gap;
        if gap <= stop.epsilon {
            refresh(&alpha, &mut grad);
            let (s2, v2) = pick(&alpha, &grad);
            let gap2 = grad[v2] / t[v2] - grad[s2] / t[s2];
            last_gap = gap2;
            if gap2 <= stop.epsilon {
                break TerminationReason::Converged;
            }
            continue;
        }
        if iter >= stop.max_iter {
            break TerminationReason::IterationCap;
        }
        // d = e_s / t_s - e_v / t_v; step clamped so alpha_v stays nonnegative
        let col_s = view.column(s);
        let col_v = view.column(v);
        let (ts, tv) = (t[s], t[v]);
        let curvature = col_s[s] / (ts * ts) - F::real(2.0) * col_s[v] / (ts * tv)
            + col_v[v] / (tv * tv);
        let gamma = (gap / curvature).max(F::zero()).min(alpha[v] * tv);
        if gamma > F::zero() && s != v {
            let exhausted = gamma == alpha[v] * tv;
            alpha[s] = alpha[s] + gamma / ts;
            alpha[v] = if exhausted {
                F::zero()
            } else {
                alpha[v] - gamma / tv
            };
            for ((g, &ks), &kv) in grad.iter_mut().zip(col_s.iter()).zip(col_v.iter()) {
                *g = *g + gamma * (ks / ts - kv / tv);
            }
        }
        iter += 1;
        let objective = F::real(0.5)
            * alpha
                .iter()
                .zip(&grad)
                .map(|(&a, &g)| a * g)
                .fold(F::zero(), |acc, x| acc + x);
        trace.push(TraceRecord {
            iter,
            objective,
            gap,
            step: gamma,
            forward: s,
            away: v,
            support: alpha.iter().filter(|&&a| a > F::zero()).count(),
        });
        if iter.is_multiple_of(stop.refresh_every) {
            refresh(&alpha, &mut grad);
        }
    };
    Ok(FwOutcome {
        alpha,
        trace,
        reason,
        iterations: iter,
        final_gap: last_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{parse_libsvm, Dataset};
    use crate::fw::train_fw;
    use crate::kernel::KernelSpec;

    fn toy2() -> Dataset<f64> {
        parse_libsvm("+1 1:1\n-1 1:-1").unwrap()
    }

    /// Khat = [[2, -0.8], [-0.8, 1.65]].
    fn toy_activate() -> Dataset<f64> {
        parse_libsvm("+1 1:1\n-1 1:0.8 2:0.1").unwrap()
    }

    fn toy3() -> Dataset<f64> {
        parse_libsvm("+1 1:1\n+1 2:1\n+1 1:2 2:2").unwrap()
    }

    #[test]
    fn activation_on_negative_gradient() {
        let ds = toy_activate();
        let view = LabeledKernelView::new(&ds, KernelSpec::linear(1.0));
        let mut ws = WorkingSet::singleton(2, 0);
        let mut state = init_state(&view, 0, &[0]);
        assert_eq!(state.grad(), &[2.0, -0.8]);
        assert_eq!(try_activate(&mut state, &mut ws, 0.0), Some(1));
        assert!(ws.contains(1));
        assert_eq!(ws.activation_log(), &[(0, 1)]);
    }

    #[test]
    fn no_activation_on_nonnegative_gradient() {
        let ds = toy2();
        let view = LabeledKernelView::new(&ds, KernelSpec::linear(1.0));
        let mut ws = WorkingSet::singleton(2, 0);
        let mut state = init_state(&view, 0, &[0]);
        assert_eq!(state.grad(), &[2.0, 1.0]);
        assert_eq!(try_activate(&mut state, &mut ws, 0.0), None);
        assert_eq!(ws.len(), 1);
    }

    #[test]
    fn full_working_set_is_noop() {
        let ds = toy2();
        let view = LabeledKernelView::new(&ds, KernelSpec::linear(1.0));
        let mut ws = WorkingSet::singleton(2, 0);
        let mut state = init_state(&view, 0, &[0]);
        ws.activate(0, 1);
        state.add_candidate(1);
        assert_eq!(try_activate(&mut state, &mut ws, 0.0), None);
    }

    #[test]
    fn mfw_toy2_stops_at_vertex() {
        let ds = toy2();
        let view = LabeledKernelView::new(&ds, KernelSpec::linear(1.0));
        let out = train_mfw(&view, &StopRule::new(1e-9, 1000), 0);
        assert_eq!(out.reason, TerminationReason::Converged);
        assert_eq!(out.alpha, vec![1.0, 0.0]);
        assert_eq!(out.working_set.members(), &[0]);
        // contrast with the unrestricted solver
        let fw = train_fw(&view, &StopRule::new(1e-9, 1000), 0, &[0, 1]);
        assert_eq!(fw.alpha, vec![0.5, 0.5]);
    }

    #[test]
    fn mfw_toy_activate_exact_rationals() {
        let ds = toy_activate();
        let view = LabeledKernelView::new(&ds, KernelSpec::linear(1.0));
        let out = train_mfw(&view, &StopRule::new(1e-9, 1000), 0);
        assert_eq!(out.reason, TerminationReason::Converged);
        assert!((out.alpha[0] - 7.0 / 15.0).abs() < 1e-12);
        assert!((out.alpha[1] - 8.0 / 15.0).abs() < 1e-12);
        assert_eq!(out.working_set.members(), &[0, 1]);
    }

    #[test]
    fn mfw_restricted_fw_agrees() {
        let ds = toy3();
        let view = LabeledKernelView::new(&ds, KernelSpec::linear(1.0));
        let stop = StopRule::new(1e-10, 100_000);
        let out = train_mfw(&view, &stop, 2);
        let fw = train_fw(&view, &stop, 2, out.working_set.members());
        for (&a, &b) in out.alpha.iter().zip(&fw.alpha) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn activation_soundness_from_log() {
        let ds = parse_libsvm::<f64>(
            "+1 1:0.9 2:0.1\n-1 1:-0.7 2:0.4\n+1 2:1\n-1 1:0.2 2:-0.8\n+1 1:0.5 2:0.5",
        )
        .unwrap();
        let view = LabeledKernelView::new(&ds, KernelSpec::linear(2.0));
        let out = train_mfw(&view, &StopRule::new(1e-10, 100_000), 0);
        // every activated index had to pass the strict negativity check, and
        // activations happen at nondecreasing iterations
        let log = out.working_set.activation_log();
        for w in log.windows(2) {
            assert!(w[0].0 <= w[1].0);
        }
        assert!(out.working_set.len() == log.len() + 1);
    }

    #[test]
    fn wsvm_uniform_weights_reduce_to_fw() {
        let ds = toy2();
        let view = LabeledKernelView::new(&ds, KernelSpec::linear(1.0));
        let stop = StopRule::new(1e-10, 1000);
        let w = train_wsvm(&view, &WeightVector::uniform(2), &stop, 0).unwrap();
        let f = train_fw(&view, &stop, 0, &[0, 1]);
        for (&a, &b) in w.alpha.iter().zip(&f.alpha) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn wsvm_single_point_forced_by_constraint() {
        let ds = parse_libsvm::<f64>("+1 1:1").unwrap();
        let view = LabeledKernelView::new(&ds, KernelSpec::linear(1.0));
        let t = WeightVector::new(vec![2.0]).unwrap();
        let out = train_wsvm(&view, &t, &StopRule::default(), 0).unwrap();
        assert_eq!(out.alpha, vec![0.5]);
        assert_eq!(out.reason, TerminationReason::Converged);
    }

    #[test]
    fn wsvm_rejects_nonpositive_weights() {
        assert!(WeightVector::<f64>::new(vec![1.0, 0.0]).is_err());
        assert!(WeightVector::<f64>::new(vec![1.0, -2.0]).is_err());
    }

    #[test]
    fn wsvm_kkt_at_termination() {
        let ds = toy3();
        let view = LabeledKernelView::new(&ds, KernelSpec::linear(1.0));
        let t = WeightVector::new(vec![1.0, 1.0, 10.0]).unwrap();
        let out = train_wsvm(&view, &t, &StopRule::new(1e-10, 100_000), 0).unwrap();
        // lambda = min_i g_i / t_i; support entries sit on it, others above
        let mat = view.materialize();
        let n = ds.len();
        let g: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| mat[i][j] * out.alpha[j]).sum())
            .collect();
        let lambda = (0..n)
            .map(|i| g[i] / t.weights()[i])
            .fold(f64::INFINITY, f64::min);
        for ((&gi, &ti), &ai) in g.iter().zip(t.weights()).zip(&out.alpha) {
            let scaled = gi / ti;
            assert!(scaled >= lambda - 1e-6);
            if ai > 0.0 {
                assert!((scaled - lambda).abs() <= 1e-6);
            }
        }
    }
}
