//! Synthetic inputs shared by the benchmarks.

use nucs_core::{ClassDifficultyTable, FeatureMatrix, ScoredDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `classes` classes of `per_class` samples with uniform scores and
/// `dim`-dimensional features centered on a per-class axis.
pub fn dataset(classes: usize, per_class: usize, dim: usize, seed: u64) -> ScoredDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = classes * per_class;
    let labels: Vec<usize> = (0..n).map(|i| i / per_class).collect();
    let scores: Vec<f64> = labels
        .iter()
        .map(|&c| 1.0 + c as f64 * 0.01 + rng.random::<f64>())
        .collect();
    let data: Vec<f32> = (0..n * dim)
        .map(|k| {
            let (i, d) = (k / dim, k % dim);
            let center = if d == labels[i] % dim { 2.0 } else { 0.0 };
            center + rng.random_range(-1.0f32..1.0)
        })
        .collect();
    let ids = (0..n).map(|i| format!("{i:08}")).collect();
    ScoredDataset::new(
        ids,
        labels,
        scores,
        Some(FeatureMatrix::new(n, dim, data).unwrap()),
    )
    .unwrap()
}

/// Long-tailed class table with random difficulties.
pub fn table(classes: usize, seed: u64) -> ClassDifficultyTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts: Vec<usize> = (0..classes)
        .map(|c| (5000.0 * 0.97f64.powi(c as i32)) as usize + 5)
        .collect();
    let s: Vec<f64> = (0..classes).map(|_| rng.random_range(0.5..2.0)).collect();
    ClassDifficultyTable::from_parts(&counts, &s, 0.05).unwrap()
}
