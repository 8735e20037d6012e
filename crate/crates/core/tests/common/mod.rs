#![allow(dead_code)]

use nucs_core::{FeatureMatrix, ScoredDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Gaussian blobs around well-separated class centers, with scores drawn
/// per class from `N(5 + shift_c, 1)` so they stay positive.
pub fn blobs(per_class: &[usize], dim: usize, score_shift: &[f64], seed: u64) -> ScoredDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.3).unwrap();
    let score = Normal::new(0.0, 1.0).unwrap();
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut scores = Vec::new();
    let mut data = Vec::new();
    for (c, &n) in per_class.iter().enumerate() {
        for i in 0..n {
            ids.push(format!("c{c}-{i:05}"));
            labels.push(c);
            scores.push(5.0 + score.sample(&mut rng) + score_shift.get(c).copied().unwrap_or(0.0));
            for d in 0..dim {
                let center = if d % per_class.len() == c { 3.0 } else { 0.0 };
                data.push((center + noise.sample(&mut rng)) as f32);
            }
        }
    }
    let fm = FeatureMatrix::new(ids.len(), dim, data).unwrap();
    ScoredDataset::new(ids, labels, scores, Some(fm)).unwrap()
}

/// Random labels and scores, no features. Scores are rounded to a few
/// values so ties are common.
pub fn tied_scores(n: usize, classes: usize, seed: u64) -> ScoredDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..n)
        .map(|i| {
            if i < classes {
                i
            } else {
                rng.random_range(0..classes)
            }
        })
        .collect();
    let scores: Vec<f64> = (0..n)
        .map(|_| f64::from(rng.random_range(0..6u8)) * 0.5)
        .collect();
    let ids: Vec<String> = (0..n)
        .map(|_| format!("{:08x}", rng.random::<u32>()))
        .collect();
    let mut uniq = ids.clone();
    uniq.sort();
    uniq.dedup();
    let ids = if uniq.len() == n {
        ids
    } else {
        (0..n).map(|i| format!("x{i}")).collect()
    };
    ScoredDataset::new(ids, labels, scores, None).unwrap()
}
