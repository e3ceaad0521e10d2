//! Projected-gradient oracle for small instances.
//!
//! Independent of the Frank-Wolfe path: minimizes `a'K a / 2` over the
//! (weighted) simplex by projected gradient descent with step `1/lambda_max`,
//! using the sort-and-threshold Euclidean projection. Used by tests as a
//! ground-truth solver; restricted to materialized matrices.

use crate::float::Float;
use crate::kernel::LabeledKernelView;

/// Euclidean projection onto `{a >= 0, sum a_i = 1}` (sort-and-threshold).
pub fn project_simplex<F: Float>(v: &[F]) -> Vec<F> {
    let mut sorted: Vec<F> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));
    let mut cumsum = F::zero();
    let mut theta = F::zero();
    let mut rho = 0usize;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum = cumsum + u;
        let cand = (cumsum - F::one()) / F::real((k + 1) as f64);
        if u - cand > F::zero() {
            theta = cand;
            rho = k + 1;
        }
    }
    debug_assert!(rho > 0);
    v.iter().map(|&x| (x - theta).max(F::zero())).collect()
}

/// Projection onto the weighted simplex `{a >= 0, sum t_i a_i = 1}` by the
/// change of variables `b_i = t_i a_i`.
pub fn project_weighted_simplex<F: Float>(v: &[F], t: &[F]) -> Vec<F> {
    let b: Vec<F> = v.iter().zip(t).map(|(&x, &w)| x * w).collect();
    project_simplex(&b)
        .iter()
        .zip(t)
        .map(|(&bi, &w)| bi / w)
        .collect()
}

fn power_iteration<F: Float>(k: &[Vec<F>], iters: usize) -> F {
    let n = k.len();
    let mut v = vec![F::one() / F::real(n as f64); n];
    let mut lambda = F::one();
    for _ in 0..iters {
        let mut kv = vec![F::zero(); n];
        for i in 0..n {
            let mut acc = F::zero();
            for j in 0..n {
                acc = acc + k[i][j] * v[j];
            }
            kv[i] = acc;
        }
        let norm = kv.iter().map(|&x| x * x).fold(F::zero(), |a, x| a + x).sqrt();
        if norm == F::zero() {
            break;
        }
        lambda = norm;
        for (vi, &k) in v.iter_mut().zip(&kv) {
            *vi = k / norm;
        }
    }
    lambda
}

/// Projected gradient on the materialized matrix until the sup-norm change
/// drops below `tol`.
pub fn oracle_solve_matrix<F: Float>(kmat: &[Vec<F>], tol: F) -> Vec<F> {
    let n = kmat.len();
    let eta = power_iteration(kmat, 200).recip();
    let mut alpha = vec![F::one() / F::real(n as f64); n];
    for _ in 0..5_000_000usize {
        let mut step = vec![F::zero(); n];
        for i in 0..n {
            let mut g = F::zero();
            for j in 0..n {
                g = g + kmat[i][j] * alpha[j];
            }
            step[i] = alpha[i] - eta * g;
        }
        let next = project_simplex(&step);
        let delta = alpha
            .iter()
            .zip(&next)
            .map(|(&a, &b)| (a - b).abs())
            .fold(F::zero(), F::max);
        alpha = next;
        if delta <= tol {
            break;
        }
    }
    alpha
}

/// Weighted-simplex variant via `b_i = t_i a_i`, which rescales the matrix to
/// `M_ij = K_ij / (t_i t_j)`.
pub fn oracle_solve_weighted_matrix<F: Float>(kmat: &[Vec<F>], t: &[F], tol: F) -> Vec<F> {
    let n = kmat.len();
    let scaled: Vec<Vec<F>> = (0..n)
        .map(|i| (0..n).map(|j| kmat[i][j] / (t[i] * t[j])).collect())
        .collect();
    oracle_solve_matrix(&scaled, tol)
        .iter()
        .zip(t)
        .map(|(&b, &w)| b / w)
        .collect()
}

/// Oracle entry point over a kernel view; materializes the matrix, so it is
/// restricted to small instances.
pub fn oracle_solve<F: Float>(view: &LabeledKernelView<'_, F>, tol: F) -> Vec<F> {
    assert!(view.len() <= 64, "oracle is restricted to N <= 64");
    oracle_solve_matrix(&view.materialize(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::parse_libsvm;
    use crate::kernel::KernelSpec;

    #[test]
    fn projection_hand_example() {
        // theta = 0.25
        let p = project_simplex(&[1.2f64, 0.3]);
        assert!((p[0] - 0.95).abs() < 1e-12);
        assert!((p[1] - 0.05).abs() < 1e-12);
    }

    #[test]
    fn projection_fixes_vertices() {
        let p = project_simplex(&[0.0f64, 1.0, 0.0]);
        assert_eq!(p, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn projection_feasibility() {
        let p = project_simplex(&[-3.0f64, 0.2, 5.0, 0.4]);
        let sum: f64 = p.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn oracle_toy3_matches_kkt_hand_check() {
        // Khat = [[2,0,2],[0,2,2],[2,2,9]]; optimum (0.5, 0.5, 0), g = (1,1,2)
        let ds = parse_libsvm::<f64>("+1 1:1\n+1 2:1\n+1 1:2 2:2").unwrap();
        let view = LabeledKernelView::new(&ds, KernelSpec::linear(1.0));
        let alpha = oracle_solve(&view, 1e-10);
        assert!((alpha[0] - 0.5).abs() < 1e-6);
        assert!((alpha[1] - 0.5).abs() < 1e-6);
        assert!(alpha[2].abs() < 1e-6);
    }

    #[test]
    fn weighted_projection_satisfies_constraint() {
        let t = [1.0f64, 2.0, 0.5];
        let p = project_weighted_simplex(&[0.3, 0.9, -1.0], &t);
        let sum: f64 = p.iter().zip(&t).map(|(&a, &w)| a * w).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
    }
}
