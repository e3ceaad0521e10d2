//! Seeded synthetic benchmark data: two Gaussian blobs with configurable
//! overlap, so the harness and acceptance tests run hermetically.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{Dataset, SparseVector};
use crate::float::Float;

/// Two unit-variance Gaussians in `d` dimensions whose means are
/// `separation` apart; labels alternate `+1 / -1` along the row order.
pub fn gaussian_blobs<F: Float>(n: usize, d: usize, separation: f64, seed: u64) -> Dataset<F> {
    assert!(n >= 2 && d >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0f64, 1.0).expect("valid parameters");
    // mean offset per coordinate so the means are `separation` apart overall
    let shift = separation / (2.0 * (d as f64).sqrt());
    let mut patterns = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y: i8 = if i % 2 == 0 { 1 } else { -1 };
        let mut entries = Vec::with_capacity(d);
        for j in 0..d {
            let v = normal.sample(&mut rng) + f64::from(y) * shift;
            if v != 0.0 {
                entries.push((j, F::real(v)));
            }
        }
        patterns.push(SparseVector::new(entries));
        labels.push(y);
    }
    Dataset::new(patterns, labels, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_balanced() {
        let a: Dataset<f64> = gaussian_blobs(100, 4, 2.0, 9);
        let b: Dataset<f64> = gaussian_blobs(100, 4, 2.0, 9);
        assert_eq!(a.labels(), b.labels());
        for i in 0..a.len() {
            assert_eq!(a.pattern(i), b.pattern(i));
        }
        let pos = a.labels().iter().filter(|&&y| y == 1).count();
        assert_eq!(pos, 50);
        assert_eq!(a.dim(), 4);
    }

    #[test]
    fn separation_moves_class_means() {
        let ds: Dataset<f64> = gaussian_blobs(2000, 3, 4.0, 1);
        let mut mean_pos = 0.0;
        let mut mean_neg = 0.0;
        for i in 0..ds.len() {
            let s: f64 = ds.pattern(i).entries().iter().map(|&(_, v)| v).sum();
            if ds.label(i) == 1 {
                mean_pos += s;
            } else {
                mean_neg += s;
            }
        }
        assert!(mean_pos / 1000.0 > mean_neg / 1000.0 + 1.0);
    }
}
