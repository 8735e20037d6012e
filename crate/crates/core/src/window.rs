//! Contiguous intra-class windows over difficulty-ranked samples.

use crate::budget::{AllocationStrategy, BudgetPlan};
use crate::dataset::{floor_count, ScoredDataset};
use crate::error::{NucsError, Result};
use crate::selection::{CoresetSelection, Method, SelectionParams};

/// Window endpoints `{0, t, 2t, ...} ∪ {1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowGrid {
    step: f64,
    endpoints: Vec<f64>,
}

impl WindowGrid {
    pub fn new(step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 1.0) {
            return Err(NucsError::param(
                "step",
                format!("must lie in (0, 1], got {step}"),
            ));
        }
        let mut endpoints = Vec::new();
        let mut i = 0u32;
        loop {
            // snap to 12 decimals so 3 * 0.1 reads back as 0.3
            let k = (f64::from(i) * step * 1e12).round() / 1e12;
            if k >= 1.0 - 1e-9 {
                break;
            }
            endpoints.push(k);
            i += 1;
        }
        endpoints.push(1.0);
        Ok(Self { step, endpoints })
    }

    /// A grid holding the single endpoint `k`.
    pub fn fixed(k: f64) -> Result<Self> {
        check_k(k)?;
        Ok(Self {
            step: 1.0,
            endpoints: vec![k],
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn endpoints(&self) -> &[f64] {
        &self.endpoints
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&k) {
        return Err(NucsError::param(
            "k",
            format!("must lie in [0, 1], got {k}"),
        ));
    }
    Ok(())
}

/// Half-open rank range `[start, end)` for a class of `class_size` samples
/// with budget `budget` at endpoint `k`. When the window would start before
/// rank 0 it is moved to `[0, budget)`.
pub fn window_bounds(class_size: usize, budget: usize, k: f64) -> (usize, usize) {
    let end = floor_count(k * class_size as f64).min(class_size);
    if end < budget {
        (0, budget)
    } else {
        (end - budget, end)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowCandidate {
    pub k: f64,
    pub selection: CoresetSelection,
    /// Index of the earlier candidate with an identical selection, if any.
    pub duplicate_of: Option<usize>,
}

fn check_plan(ds: &ScoredDataset, plan: &BudgetPlan) -> Result<()> {
    let counts = ds.class_counts();
    if plan.budgets().len() != counts.len() {
        return Err(NucsError::DimensionMismatch(format!(
            "plan has {} classes, dataset {}",
            plan.budgets().len(),
            counts.len()
        )));
    }
    for (class, (&b, &n)) in plan.budgets().iter().zip(&counts).enumerate() {
        if b > n {
            return Err(NucsError::param(
                "plan",
                format!("class {class} budget {b} exceeds its {n} samples"),
            ));
        }
    }
    Ok(())
}

fn window_method(plan: &BudgetPlan) -> Method {
    match plan.strategy() {
        AllocationStrategy::NonUniform => Method::Nucs,
        AllocationStrategy::Uniform => Method::Bws,
    }
}

fn window_starts(ds: &ScoredDataset, plan: &BudgetPlan, k: f64) -> Vec<(usize, usize)> {
    (0..ds.num_classes())
        .map(|j| window_bounds(ds.ranked_class(j).len(), plan.budgets()[j], k))
        .collect()
}

fn selection_from_bounds(
    ds: &ScoredDataset,
    plan: &BudgetPlan,
    bounds: &[(usize, usize)],
    k: f64,
) -> CoresetSelection {
    let mut indices = Vec::with_capacity(plan.total());
    for (j, &(start, end)) in bounds.iter().enumerate() {
        indices.extend_from_slice(&ds.ranked_class(j)[start..end]);
    }
    let params = SelectionParams {
        alpha: plan.alpha(),
        k: Some(k),
        ..SelectionParams::default()
    };
    CoresetSelection::from_indices(ds, indices, window_method(plan), params)
}

/// Selects, per class, the `b_j` samples ranked `[floor(k N_j) - b_j, floor(k N_j))`.
/// Classes appear in index order, each in ascending difficulty.
pub fn select_window(ds: &ScoredDataset, plan: &BudgetPlan, k: f64) -> Result<CoresetSelection> {
    check_k(k)?;
    check_plan(ds, plan)?;
    Ok(selection_from_bounds(
        ds,
        plan,
        &window_starts(ds, plan, k),
        k,
    ))
}

/// One candidate per grid endpoint. Consecutive endpoints whose windows
/// coincide in every class are flagged as duplicates of the first.
pub fn enumerate_windows(
    ds: &ScoredDataset,
    plan: &BudgetPlan,
    grid: &WindowGrid,
) -> Result<Vec<WindowCandidate>> {
    check_plan(ds, plan)?;
    let mut out: Vec<WindowCandidate> = Vec::with_capacity(grid.endpoints().len());
    let mut prev: Option<(Vec<(usize, usize)>, usize)> = None;
    for &k in grid.endpoints() {
        let bounds = window_starts(ds, plan, k);
        let duplicate_of = match &prev {
            Some((b, rep)) if *b == bounds => Some(*rep),
            _ => None,
        };
        if duplicate_of.is_none() {
            prev = Some((bounds.clone(), out.len()));
        }
        out.push(WindowCandidate {
            k,
            selection: selection_from_bounds(ds, plan, &bounds, k),
            duplicate_of,
        });
    }
    Ok(out)
}
