//! Closed-form ridge regression used as a cheap proxy for ranking window
//! candidates, plus per-class bias metrics.
//!
//! Multi-class targets are one-hot columns; prediction is the argmax of the
//! linear scores with ties going to the lowest class index.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::dataset::ScoredDataset;
use crate::error::{NucsError, Result};
use crate::linalg::{cholesky, cholesky_solve, Matrix};
use crate::selection::{BiasMetrics, CoresetSelection, ProxyScores};
use crate::window::WindowCandidate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RidgeSolver {
    /// Primal `d x d` system unless there are fewer samples than features.
    #[default]
    Auto,
    Primal,
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeConfig {
    pub lambda: f64,
    /// Append a constant-1 feature. It is penalized like every other weight.
    pub bias: bool,
    pub solver: RidgeSolver,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            bias: true,
            solver: RidgeSolver::Auto,
        }
    }
}

impl RidgeConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(NucsError::param(
                "lambda",
                format!("must be > 0, got {}", self.lambda),
            ));
        }
        Ok(())
    }
}

/// Fitted weights, `(d [+1]) x Y`; the bias row is last when present.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    weights: Matrix,
    bias: bool,
}

impl RidgeModel {
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn has_bias(&self) -> bool {
        self.bias
    }

    pub fn num_classes(&self) -> usize {
        self.weights.cols()
    }

    pub fn input_dim(&self) -> usize {
        self.weights.rows() - usize::from(self.bias)
    }

    fn predict_with<F: Fn(usize) -> f64>(&self, feature: F) -> usize {
        let classes = self.num_classes();
        let dim = self.input_dim();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for c in 0..classes {
            let mut s = if self.bias {
                self.weights.get(dim, c)
            } else {
                0.0
            };
            for f in 0..dim {
                s += feature(f) * self.weights.get(f, c);
            }
            if s > best_score {
                best = c;
                best_score = s;
            }
        }
        best
    }

    pub fn predict_row(&self, x: &[f64]) -> usize {
        self.predict_with(|f| x[f])
    }

    pub fn predict_row_f32(&self, x: &[f32]) -> usize {
        self.predict_with(|f| f64::from(x[f]))
    }
}

/// Feature rows of `indices` as an `f64` matrix.
pub fn feature_matrix(ds: &ScoredDataset, indices: &[usize]) -> Result<Matrix> {
    let fm = ds.require_features()?;
    let mut data = Vec::with_capacity(indices.len() * fm.cols());
    for &i in indices {
        data.extend(fm.row(i).iter().map(|&v| f64::from(v)));
    }
    Matrix::from_vec(indices.len(), fm.cols(), data)
}

fn design_row(x: &Matrix, i: usize, bias: bool, out: &mut Vec<f64>) {
    out.clear();
    out.extend_from_slice(x.row(i));
    if bias {
        out.push(1.0);
    }
}

/// Solves `(XᵀX + λI) W = XᵀY` for one-hot `Y`.
pub fn fit_ridge(
    x: &Matrix,
    labels: &[usize],
    num_classes: usize,
    cfg: &RidgeConfig,
) -> Result<RidgeModel> {
    cfg.validate()?;
    let n = x.rows();
    if n == 0 {
        return Err(NucsError::param(
            "features",
            "ridge fit needs at least one row",
        ));
    }
    if labels.len() != n {
        return Err(NucsError::DimensionMismatch(format!(
            "{n} feature rows, {} labels",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= num_classes) {
        return Err(NucsError::DimensionMismatch(format!(
            "label {bad} out of range for {num_classes} classes"
        )));
    }
    let p = x.cols() + usize::from(cfg.bias);

    // normal-equation pieces, always needed for the residual check
    let mut gram = Matrix::zeros(p, p);
    let mut rhs = Matrix::zeros(p, num_classes);
    let mut phi = Vec::with_capacity(p);
    for (i, &y) in labels.iter().enumerate() {
        design_row(x, i, cfg.bias, &mut phi);
        for (a, &va) in phi.iter().enumerate() {
            if va == 0.0 {
                continue;
            }
            for (b, &vb) in phi[..=a].iter().enumerate() {
                gram.add_at(a, b, va * vb);
            }
            rhs.add_at(a, y, va);
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram.set(b, a, gram.get(a, b));
        }
        gram.add_at(a, a, cfg.lambda);
    }

    let use_dual = match cfg.solver {
        RidgeSolver::Auto => n < p,
        RidgeSolver::Primal => false,
        RidgeSolver::Dual => true,
    };
    let weights = if use_dual {
        solve_dual(x, labels, num_classes, cfg)?
    } else {
        let l = cholesky(&gram)?;
        let mut w = rhs.clone();
        cholesky_solve(&l, &mut w);
        w
    };

    let residual = gram.matmul(&weights)?;
    let mut worst: f64 = 0.0;
    for (r, b) in residual.as_slice().iter().zip(rhs.as_slice()) {
        worst = worst.max((r - b).abs());
    }
    if worst.is_nan() || worst > 1e-6 * (1.0 + rhs.max_abs()) {
        return Err(NucsError::Numeric(format!(
            "ridge residual {worst:e} exceeds tolerance"
        )));
    }
    Ok(RidgeModel {
        weights,
        bias: cfg.bias,
    })
}

/// `W = Φᵀ (ΦΦᵀ + λI)⁻¹ Y`.
fn solve_dual(
    x: &Matrix,
    labels: &[usize],
    num_classes: usize,
    cfg: &RidgeConfig,
) -> Result<Matrix> {
    let n = x.rows();
    let p = x.cols() + usize::from(cfg.bias);
    let mut phi = Matrix::zeros(n, p);
    let mut row = Vec::with_capacity(p);
    for i in 0..n {
        design_row(x, i, cfg.bias, &mut row);
        for (j, v) in row.iter().enumerate() {
            phi.set(i, j, *v);
        }
    }
    let mut kernel = phi.matmul(&phi.transpose())?;
    for i in 0..n {
        kernel.add_at(i, i, cfg.lambda);
    }
    let l = cholesky(&kernel)?;
    let mut coef = Matrix::zeros(n, num_classes);
    for (i, &y) in labels.iter().enumerate() {
        coef.set(i, y, 1.0);
    }
    cholesky_solve(&l, &mut coef);
    phi.transpose().matmul(&coef)
}

/// Predicted class of every sample in `ds`.
pub fn predict(model: &RidgeModel, ds: &ScoredDataset) -> Result<Vec<usize>> {
    let fm = ds.require_features()?;
    if fm.cols() != model.input_dim() {
        return Err(NucsError::DimensionMismatch(format!(
            "model expects {} features, dataset has {}",
            model.input_dim(),
            fm.cols()
        )));
    }
    Ok((0..ds.len())
        .map(|i| model.predict_row_f32(fm.row(i)))
        .collect())
}

/// Fraction of `ds` classified correctly by `model`.
pub fn proxy_accuracy(model: &RidgeModel, ds: &ScoredDataset) -> Result<f64> {
    let pred = predict(model, ds)?;
    let correct = pred.iter().zip(ds.labels()).filter(|(p, y)| p == y).count();
    Ok(correct as f64 / ds.len() as f64)
}

/// Fits ridge on the selected samples of `ds`.
pub fn fit_selection(
    ds: &ScoredDataset,
    selection: &CoresetSelection,
    cfg: &RidgeConfig,
) -> Result<RidgeModel> {
    let x = feature_matrix(ds, &selection.indices)?;
    let labels: Vec<usize> = selection.indices.iter().map(|&i| ds.labels()[i]).collect();
    fit_ridge(&x, &labels, ds.num_classes(), cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxyResult {
    /// `(k, accuracy)` ascending in k.
    pub scores: ProxyScores,
    pub chosen_k: f64,
}

/// Scores every candidate by ridge proxy accuracy on the full dataset and
/// returns the best one. Ties go to the larger endpoint. Candidates with
/// identical sample sets are solved once.
pub fn choose_optimal_window(
    candidates: &[WindowCandidate],
    ds: &ScoredDataset,
    cfg: &RidgeConfig,
) -> Result<(f64, CoresetSelection, ProxyResult)> {
    if candidates.is_empty() {
        return Err(NucsError::param("candidates", "need at least one window"));
    }
    ds.require_features()?;

    let mut slot_of: HashMap<&[usize], usize> = HashMap::new();
    let mut unique: Vec<&CoresetSelection> = Vec::new();
    let slots: Vec<usize> = candidates
        .iter()
        .map(|c| {
            *slot_of
                .entry(c.selection.indices.as_slice())
                .or_insert_with(|| {
                    unique.push(&c.selection);
                    unique.len() - 1
                })
        })
        .collect();

    let accuracies = unique
        .par_iter()
        .map(|sel| fit_selection(ds, sel, cfg).and_then(|m| proxy_accuracy(&m, ds)))
        .collect::<Result<Vec<f64>>>()?;

    let mut best = 0;
    for i in 1..candidates.len() {
        let (a, b) = (accuracies[slots[i]], accuracies[slots[best]]);
        if a > b || (a == b && candidates[i].k > candidates[best].k) {
            best = i;
        }
    }
    let mut scores: Vec<(f64, f64)> = candidates
        .iter()
        .zip(&slots)
        .map(|(c, &s)| (c.k, accuracies[s]))
        .collect();
    scores.sort_by(|a, b| a.0.total_cmp(&b.0));
    let chosen = &candidates[best];
    Ok((
        chosen.k,
        chosen.selection.clone(),
        ProxyResult {
            scores: ProxyScores(scores),
            chosen_k: chosen.k,
        },
    ))
}

/// Worst-class recall and the spread between the best and worst class.
pub fn bias_metrics(
    predictions: &[usize],
    labels: &[usize],
    num_classes: usize,
) -> Result<BiasMetrics> {
    if predictions.len() != labels.len() || labels.is_empty() {
        return Err(NucsError::DimensionMismatch(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let mut support = vec![0usize; num_classes];
    let mut hits = vec![0usize; num_classes];
    for (&p, &y) in predictions.iter().zip(labels) {
        if y >= num_classes {
            return Err(NucsError::DimensionMismatch(format!(
                "label {y} out of range for {num_classes} classes"
            )));
        }
        support[y] += 1;
        if p == y {
            hits[y] += 1;
        }
    }
    if let Some(class) = support.iter().position(|&s| s == 0) {
        return Err(NucsError::EmptyClass { class });
    }
    let recalls: Vec<f64> = hits
        .iter()
        .zip(&support)
        .map(|(&h, &s)| h as f64 / s as f64)
        .collect();
    let wca = recalls.iter().copied().fold(f64::INFINITY, f64::min);
    let best = recalls.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BiasMetrics {
        wca,
        diff: best - wca,
        accuracy: hits.iter().sum::<usize>() as f64 / labels.len() as f64,
    })
}
