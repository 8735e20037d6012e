//! Per-class global difficulty and score transforms.

use serde::Serialize;

use crate::dataset::ScoredDataset;
use crate::error::{NucsError, Result};

/// Offset that keeps normalized AUM scores strictly positive.
pub const AUM_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassDifficulty {
    pub count: usize,
    pub difficulty: f64,
}

/// Sample count `N_j` and winsorized difficulty `S_j` for every class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassDifficultyTable {
    classes: Vec<ClassDifficulty>,
    gamma: f64,
}

impl ClassDifficultyTable {
    pub fn new(classes: Vec<ClassDifficulty>, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if classes.is_empty() {
            return Err(NucsError::DegenerateTable("no classes".into()));
        }
        for (class, c) in classes.iter().enumerate() {
            if c.count == 0 {
                return Err(NucsError::EmptyClass { class });
            }
            if !c.difficulty.is_finite() {
                return Err(NucsError::DegenerateTable(format!(
                    "class {class} difficulty is not finite"
                )));
            }
        }
        Ok(Self { classes, gamma })
    }

    pub fn from_parts(counts: &[usize], difficulties: &[f64], gamma: f64) -> Result<Self> {
        if counts.len() != difficulties.len() {
            return Err(NucsError::DimensionMismatch(format!(
                "{} counts, {} difficulties",
                counts.len(),
                difficulties.len()
            )));
        }
        Self::new(
            counts
                .iter()
                .zip(difficulties)
                .map(|(&count, &difficulty)| ClassDifficulty { count, difficulty })
                .collect(),
            gamma,
        )
    }

    pub fn classes(&self) -> &[ClassDifficulty] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn counts(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.count).collect()
    }

    pub fn difficulties(&self) -> Vec<f64> {
        self.classes.iter().map(|c| c.difficulty).collect()
    }

    pub fn total(&self) -> usize {
        self.classes.iter().map(|c| c.count).sum()
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..0.5).contains(&gamma) {
        return Err(NucsError::param(
            "gamma",
            format!("must lie in [0, 0.5), got {gamma}"),
        ));
    }
    Ok(())
}

/// Winsorized average of ascending-sorted scores.
///
/// With `k = floor(gamma * n)` and 1-based order statistics `s_1..s_n`:
/// `(sum_{i=k+1}^{n-k} s_i + k*s_{k+1} + k*s_{n-k}) / n`.
pub fn winsorized_mean(sorted: &[f64], gamma: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    let k = (gamma * n as f64).floor() as usize;
    // gamma < 0.5 keeps the interior [k, n-k) non-empty
    let interior: f64 = sorted[k..n - k].iter().sum();
    let low = k as f64 * sorted[k];
    let high = k as f64 * sorted[n - k - 1];
    (interior + low + high) / n as f64
}

/// Computes `S_j` for every class of `ds`.
pub fn winsorized_class_difficulty(ds: &ScoredDataset, gamma: f64) -> Result<ClassDifficultyTable> {
    check_gamma(gamma)?;
    let scores = ds.scores();
    let classes = (0..ds.num_classes())
        .map(|j| {
            let sorted: Vec<f64> = ds.ranked_class(j).iter().map(|&i| scores[i]).collect();
            ClassDifficulty {
                count: sorted.len(),
                difficulty: winsorized_mean(&sorted, gamma),
            }
        })
        .collect();
    ClassDifficultyTable::new(classes, gamma)
}

/// Sample standard deviation (divisor `Y - 1`) of the class difficulties
/// divided by their mean.
pub fn coefficient_of_variation(table: &ClassDifficultyTable) -> Result<f64> {
    let y = table.len();
    if y < 2 {
        return Err(NucsError::DegenerateTable(
            "coefficient of variation needs at least two classes".into(),
        ));
    }
    let values = table.difficulties();
    let mean = values.iter().sum::<f64>() / y as f64;
    if mean == 0.0 {
        return Err(NucsError::DegenerateTable("mean difficulty is zero".into()));
    }
    let var = values.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (y - 1) as f64;
    Ok(var.sqrt() / mean.abs())
}

/// Flips AUM polarity so higher means harder, and shifts to strictly
/// positive values: `max(raw) - raw_i + eps`.
pub fn normalize_aum_scores(raw: &[f64]) -> Vec<f64> {
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    raw.iter().map(|r| max - r + AUM_EPSILON).collect()
}

/// Row-wise mean of per-epoch error norms (samples x epochs).
pub fn combine_epoch_errors(per_epoch: &[Vec<f64>]) -> Result<Vec<f64>> {
    let epochs = per_epoch.first().map_or(0, Vec::len);
    if epochs == 0 {
        return Err(NucsError::param("per_epoch_l2_errors", "matrix is empty"));
    }
    per_epoch
        .iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != epochs {
                return Err(NucsError::DimensionMismatch(format!(
                    "row {i} has {} epochs, expected {epochs}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(NucsError::NonFinite { id: i.to_string() });
            }
            Ok(row.iter().sum::<f64>() / epochs as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Clamp the k lowest/highest values to the nearest kept order
    /// statistic, then take the plain mean.
    fn clamp_then_mean(values: &[f64], gamma: f64) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let k = (gamma * n as f64).floor() as usize;
        let (lo, hi) = (v[k], v[n - 1 - k]);
        v.iter().map(|x| x.clamp(lo, hi)).sum::<f64>() / n as f64
    }

    fn class_ds(scores: Vec<f64>) -> ScoredDataset {
        let n = scores.len();
        ScoredDataset::new(
            (0..n).map(|i| format!("x{i}")).collect(),
            vec![0; n],
            scores,
            None,
        )
        .unwrap()
    }

    #[test]
    fn constant_scores() {
        for gamma in [0.0, 0.05, 0.3] {
            let t = winsorized_class_difficulty(&class_ds(vec![2.5; 17]), gamma).unwrap();
            assert_eq!(t.classes()[0].difficulty, 2.5);
        }
    }

    #[test]
    fn one_to_ten_is_plain_mean() {
        let t = winsorized_class_difficulty(&class_ds((1..=10).map(f64::from).collect()), 0.05)
            .unwrap();
        assert_eq!(t.classes()[0].difficulty, 5.5);
    }

    #[test]
    fn outlier_is_clamped() {
        let mut s: Vec<f64> = (1..=20).map(f64::from).collect();
        s[19] = 1000.0;
        let got = winsorized_class_difficulty(&class_ds(s.clone()), 0.05)
            .unwrap()
            .classes()[0]
            .difficulty;
        // k = 1: 1 -> 2 and 1000 -> 19
        assert_relative_eq!(got, clamp_then_mean(&s, 0.05), max_relative = 1e-12);
        assert_relative_eq!(
            got,
            (210.0 - 20.0 + 19.0 - 1.0 + 2.0) / 20.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rejects_bad_gamma() {
        assert!(winsorized_class_difficulty(&class_ds(vec![1.0]), 0.5).is_err());
        assert!(winsorized_class_difficulty(&class_ds(vec![1.0]), -0.1).is_err());
    }

    #[test]
    fn cv_examples() {
        let t = ClassDifficultyTable::from_parts(&[1, 1], &[1.0, 3.0], 0.0).unwrap();
        assert_relative_eq!(
            coefficient_of_variation(&t).unwrap(),
            std::f64::consts::SQRT_2 / 2.0,
            max_relative = 1e-15
        );
        let t = ClassDifficultyTable::from_parts(&[3, 4, 5], &[0.7; 3], 0.0).unwrap();
        assert!(coefficient_of_variation(&t).unwrap().abs() < 1e-15);
        let t = ClassDifficultyTable::from_parts(&[3, 4], &[-1.0, 1.0], 0.0).unwrap();
        assert!(matches!(
            coefficient_of_variation(&t),
            Err(NucsError::DegenerateTable(_))
        ));
    }

    #[test]
    fn cv_matches_two_pass_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let s: Vec<f64> = (0..100).map(|_| rng.random_range(0.1..10.0)).collect();
        let t = ClassDifficultyTable::from_parts(&[1; 100], &s, 0.0).unwrap();
        let mut mean = 0.0;
        for v in &s {
            mean += v;
        }
        mean /= 100.0;
        let mut ss = 0.0;
        for v in &s {
            ss += (v - mean) * (v - mean);
        }
        let oracle = (ss / 99.0).sqrt() / mean;
        assert!((coefficient_of_variation(&t).unwrap() - oracle).abs() <= 1e-12);
    }

    #[test]
    fn aum_normalization() {
        let out = normalize_aum_scores(&[-2.0, 0.0, 3.0]);
        assert_eq!(out, vec![5.0 + AUM_EPSILON, 3.0 + AUM_EPSILON, AUM_EPSILON]);
        assert_eq!(normalize_aum_scores(&[4.0; 3]), vec![AUM_EPSILON; 3]);
    }

    #[test]
    fn epoch_errors() {
        assert_eq!(
            combine_epoch_errors(&[vec![0.2, 0.4]]).unwrap()[0],
            0.30000000000000004
        );
        assert_eq!(
            combine_epoch_errors(&[vec![0.5], vec![0.25]]).unwrap(),
            vec![0.5, 0.25]
        );
        assert_eq!(
            combine_epoch_errors(&vec![vec![0.0; 3]; 2]).unwrap(),
            vec![0.0; 2]
        );
        assert!(combine_epoch_errors(&[]).is_err());
        assert!(combine_epoch_errors(&[vec![]]).is_err());
    }

    proptest! {
        #[test]
        fn bounded_by_class_extremes(
            s in prop::collection::vec(-50.0f64..50.0, 1..200),
            gamma in 0.0f64..0.49,
        ) {
            let mut sorted = s.clone();
            sorted.sort_by(f64::total_cmp);
            let w = winsorized_mean(&sorted, gamma);
            prop_assert!(w >= sorted[0] - 1e-9 && w <= sorted[sorted.len() - 1] + 1e-9);
            prop_assert!((w - clamp_then_mean(&s, gamma)).abs() <= 1e-12 * (1.0 + w.abs()) * 50.0);
        }

        #[test]
        fn gamma_zero_is_mean(s in prop::collection::vec(0.0f64..10.0, 1..300)) {
            let mut sorted = s.clone();
            sorted.sort_by(f64::total_cmp);
            let mean = sorted.iter().sum::<f64>() / s.len() as f64;
            prop_assert!((winsorized_mean(&sorted, 0.0) - mean).abs() <= 1e-12);
        }

        #[test]
        fn robust_to_top_outlier(
            s in prop::collection::vec(0.0f64..10.0, 40..120),
            blowup in 1.0f64..1e6,
        ) {
            let before = winsorized_class_difficulty(&class_ds(s.clone()), 0.05).unwrap();
            let mut bumped = s.clone();
            let top = (0..s.len()).max_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
            bumped[top] += blowup;
            let after = winsorized_class_difficulty(&class_ds(bumped), 0.05).unwrap();
            prop_assert_eq!(before.classes()[0].difficulty, after.classes()[0].difficulty);
        }

        #[test]
        fn shuffle_invariant(s in prop::collection::vec(0.0f64..10.0, 1..100), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = s.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = winsorized_class_difficulty(&class_ds(s), 0.05).unwrap();
            let b = winsorized_class_difficulty(&class_ds(shuffled), 0.05).unwrap();
            prop_assert_eq!(a.classes()[0].difficulty.to_bits(), b.classes()[0].difficulty.to_bits());
        }

        #[test]
        fn aum_reverses_rank(raw in prop::collection::vec(-100.0f64..100.0, 1..50)) {
            let out = normalize_aum_scores(&raw);
            prop_assert!(out.iter().all(|v| *v > 0.0));
            let argmax_out = (0..out.len()).max_by(|&a, &b| out[a].total_cmp(&out[b]).then(b.cmp(&a))).unwrap();
            let argmin_in = (0..raw.len()).min_by(|&a, &b| raw[a].total_cmp(&raw[b])).unwrap();
            prop_assert_eq!(raw[argmax_out], raw[argmin_in]);
        }
    }
}
