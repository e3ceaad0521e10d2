//! Randomized property checks for the parsing, splitting, projection and
//! kernel layers.

use proptest::prelude::*;

use fwsvm::bench::oracle::project_simplex;
use fwsvm::data::{kfold_split, parse_libsvm, serialize_libsvm, Dataset, SparseVector};
use fwsvm::kernel::{KernelSpec, LabeledKernelView};

fn arb_dataset() -> impl Strategy<Value = Dataset<f64>> {
    let row = (
        prop::bool::ANY,
        prop::collection::btree_map(0usize..8, -10.0f64..10.0, 0..5),
    );
    prop::collection::vec(row, 1..12).prop_map(|rows| {
        let mut patterns = Vec::new();
        let mut labels = Vec::new();
        for (pos, vals) in rows {
            let entries: Vec<(usize, f64)> =
                vals.into_iter().filter(|&(_, v)| v != 0.0).collect();
            patterns.push(SparseVector::new(entries));
            labels.push(if pos { 1i8 } else { -1 });
        }
        Dataset::new(patterns, labels, 8)
    })
}

proptest! {
    #[test]
    fn libsvm_round_trip_is_stable(ds in arb_dataset()) {
        let text = serialize_libsvm(&ds);
        let parsed: Dataset<f64> = parse_libsvm(&text).unwrap();
        prop_assert_eq!(serialize_libsvm(&parsed), text);
        prop_assert_eq!(parsed.len(), ds.len());
        prop_assert_eq!(parsed.labels(), ds.labels());
    }

    #[test]
    fn kfold_is_a_partition(n in 2usize..40, k in 2usize..10, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let ds: Dataset<f64> = parse_libsvm(&"+1 1:1\n".repeat(n)).unwrap();
        let plan = kfold_split(&ds, k, seed).unwrap();
        let mut all: Vec<usize> = (0..k).flat_map(|f| plan.test_indices(f)).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        let sizes: Vec<usize> = (0..k).map(|f| plan.test_indices(f).len()).collect();
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
    }

    #[test]
    fn simplex_projection_is_feasible(v in prop::collection::vec(-5.0f64..5.0, 1..10)) {
        let p = project_simplex(&v);
        let sum: f64 = p.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        // projection never reorders: larger inputs get no smaller outputs
        for i in 0..v.len() {
            for j in 0..v.len() {
                if v[i] >= v[j] {
                    prop_assert!(p[i] >= p[j] - 1e-12);
                }
            }
        }
    }

    #[test]
    fn khat_is_symmetric_with_shifted_diagonal(
        ds in arb_dataset(),
        c in 0.1f64..10.0,
        rbf in prop::bool::ANY,
        sigma in 0.3f64..3.0,
    ) {
        let spec = if rbf { KernelSpec::rbf(sigma, c) } else { KernelSpec::linear(c) };
        let view = LabeledKernelView::new(&ds, spec);
        for i in 0..ds.len() {
            let col = view.column(i);
            for j in 0..ds.len() {
                prop_assert_eq!(col[j], view.entry(j, i));
            }
            let self_k = spec.eval(ds.pattern(i), ds.pattern(i));
            prop_assert!((col[i] - self_k - 1.0 / c).abs() < 1e-12);
        }
    }
}
