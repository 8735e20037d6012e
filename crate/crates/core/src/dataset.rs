//! The dataset universe selection operates on.
//!
//! Samples are identified by opaque string ids. Class labels are dense
//! indices in `[0, Y)`; the original label tokens are kept in
//! [`ScoredDataset::class_names`] so files can be written back verbatim.

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{NucsError, Result};

/// Slack added before flooring products of decimal fractions and counts.
pub(crate) const FLOOR_SLACK: f64 = 1e-9;

pub(crate) fn floor_count(x: f64) -> usize {
    (x + FLOOR_SLACK).floor().max(0.0) as usize
}

/// Dense row-major `f32` feature matrix, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if cols == 0 {
            return Err(NucsError::DimensionMismatch(
                "feature matrix must have at least one column".into(),
            ));
        }
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(NucsError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(NucsError::DimensionMismatch(format!(
                "row {bad} has {} columns, expected {cols}",
                rows[bad].len()
            )));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// New matrix holding the given rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        FeatureMatrix {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }
}

/// Validated collection of scored, labelled samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDataset {
    ids: Vec<String>,
    labels: Vec<usize>,
    scores: Vec<f64>,
    features: Option<FeatureMatrix>,
    class_names: Vec<String>,
    /// Per class, sample indices sorted ascending by (score, id).
    ranked: Vec<Vec<usize>>,
}

impl ScoredDataset {
    /// Builds a dataset from dense labels. Class names default to the
    /// decimal class index.
    pub fn new(
        ids: Vec<String>,
        labels: Vec<usize>,
        scores: Vec<f64>,
        features: Option<FeatureMatrix>,
    ) -> Result<Self> {
        let num_classes = labels.iter().max().map_or(0, |m| m + 1);
        let class_names = (0..num_classes).map(|c| c.to_string()).collect();
        Self::with_class_names(ids, labels, scores, features, class_names)
    }

    pub fn with_class_names(
        ids: Vec<String>,
        labels: Vec<usize>,
        scores: Vec<f64>,
        features: Option<FeatureMatrix>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(NucsError::param("dataset", "needs at least one sample"));
        }
        if labels.len() != n || scores.len() != n {
            return Err(NucsError::DimensionMismatch(format!(
                "{n} ids, {} labels, {} scores",
                labels.len(),
                scores.len()
            )));
        }
        let mut seen = HashSet::with_capacity(n);
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(NucsError::DuplicateId(id.clone()));
            }
        }
        for (id, s) in ids.iter().zip(&scores) {
            if !s.is_finite() {
                return Err(NucsError::NonFinite { id: id.clone() });
            }
        }
        let num_classes = class_names.len();
        let mut ranked = vec![Vec::new(); num_classes];
        for (i, &y) in labels.iter().enumerate() {
            let bucket = ranked.get_mut(y).ok_or_else(|| {
                NucsError::DimensionMismatch(format!(
                    "label {y} out of range for {num_classes} classes"
                ))
            })?;
            bucket.push(i);
        }
        if let Some(class) = ranked.iter().position(Vec::is_empty) {
            return Err(NucsError::EmptyClass { class });
        }
        if let Some(fm) = &features {
            if fm.rows() != n {
                return Err(NucsError::DimensionMismatch(format!(
                    "feature matrix has {} rows for {n} samples",
                    fm.rows()
                )));
            }
            if let Some(pos) = fm.as_slice().iter().position(|v| !v.is_finite()) {
                return Err(NucsError::NonFinite {
                    id: ids[pos / fm.cols()].clone(),
                });
            }
        }
        for members in &mut ranked {
            members.sort_by(|&a, &b| rank_order(&scores, &ids, a, b));
        }
        Ok(Self {
            ids,
            labels,
            scores,
            features,
            class_names,
            ranked,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.ranked.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn features(&self) -> Option<&FeatureMatrix> {
        self.features.as_ref()
    }

    pub fn require_features(&self) -> Result<&FeatureMatrix> {
        self.features.as_ref().ok_or(NucsError::MissingFeatures)
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_counts(&self) -> Vec<usize> {
        self.ranked.iter().map(Vec::len).collect()
    }

    /// Sample indices of `class`, sorted ascending by (score, id).
    pub fn ranked_class(&self, class: usize) -> &[usize] {
        &self.ranked[class]
    }

    /// Sample indices sorted ascending by (score, id) over the whole set.
    pub fn ranked_all(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| rank_order(&self.scores, &self.ids, a, b));
        order
    }

    /// Replaces the scores, keeping ids, labels and features.
    pub fn with_scores(&self, scores: Vec<f64>) -> Result<Self> {
        Self::with_class_names(
            self.ids.clone(),
            self.labels.clone(),
            scores,
            self.features.clone(),
            self.class_names.clone(),
        )
    }

    /// Restricts the dataset to `indices` (kept in the given order).
    /// Classes keep their indices; a class left empty is an error.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::with_class_names(
            indices.iter().map(|&i| self.ids[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i]).collect(),
            indices.iter().map(|&i| self.scores[i]).collect(),
            self.features.as_ref().map(|f| f.select_rows(indices)),
            self.class_names.clone(),
        )
    }
}

pub(crate) fn rank_order(scores: &[f64], ids: &[String], a: usize, b: usize) -> Ordering {
    scores[a]
        .total_cmp(&scores[b])
        .then_with(|| ids[a].cmp(&ids[b]))
}

/// Subsamples each class to a geometric size schedule so that the ratio of
/// the first to the last class size is roughly `imbalance_factor`.
///
/// Class `k` (1-based, in class-index order) keeps `floor(N_k * mu^(k-1))`
/// samples with `mu = I^(1/(1-Y))`, drawn uniformly under `seed`. Retained
/// samples keep their original relative order.
pub fn make_long_tailed(
    ds: &ScoredDataset,
    imbalance_factor: f64,
    seed: u64,
) -> Result<ScoredDataset> {
    let classes = ds.num_classes();
    if classes < 2 {
        return Err(NucsError::param(
            "imbalance_factor",
            "long-tailed subsampling needs at least two classes",
        ));
    }
    if !(imbalance_factor >= 1.0 && imbalance_factor.is_finite()) {
        return Err(NucsError::param(
            "imbalance_factor",
            format!("must be >= 1, got {imbalance_factor}"),
        ));
    }
    let mu = imbalance_factor.powf(1.0 / (1.0 - classes as f64));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; ds.len()];
    for class in 0..classes {
        let mut members = ds.ranked_class(class).to_vec();
        members.sort_unstable();
        let target = floor_count(members.len() as f64 * mu.powi(class as i32));
        if target == 0 {
            return Err(NucsError::EmptyClass { class });
        }
        for pos in rand::seq::index::sample(&mut rng, members.len(), target) {
            keep[members[pos]] = true;
        }
    }
    let retained: Vec<usize> = (0..ds.len()).filter(|&i| keep[i]).collect();
    ds.subset(&retained)
}
