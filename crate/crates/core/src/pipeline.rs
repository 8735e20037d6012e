//! End-to-end windowed selection: class difficulty, budgets, candidate
//! windows and the ridge proxy choosing the endpoint.

use crate::budget::{allocate_nonuniform, allocate_uniform, BudgetPlan};
use crate::dataset::ScoredDataset;
use crate::difficulty::{winsorized_class_difficulty, ClassDifficultyTable};
use crate::error::Result;
use crate::ridge::{choose_optimal_window, ProxyResult, RidgeConfig};
use crate::selection::{CoresetSelection, Method};
use crate::window::{enumerate_windows, select_window, WindowGrid};

/// Winsorization fraction used when none is given.
pub const DEFAULT_GAMMA: f64 = 0.05;
/// Window step used when none is given.
pub const DEFAULT_STEP: f64 = 0.1;
/// Ridge regularization used when none is given.
pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSearch {
    pub table: ClassDifficultyTable,
    pub plan: BudgetPlan,
    pub proxy: ProxyResult,
    pub selection: CoresetSelection,
}

fn search(
    ds: &ScoredDataset,
    table: ClassDifficultyTable,
    plan: BudgetPlan,
    grid: &WindowGrid,
    cfg: &RidgeConfig,
    method: Method,
) -> Result<WindowSearch> {
    let candidates = enumerate_windows(ds, &plan, grid)?;
    let (_, mut selection, proxy) = choose_optimal_window(&candidates, ds, cfg)?;
    selection.method = method;
    selection.params.step = Some(grid.step());
    selection.params.lambda = Some(cfg.lambda);
    Ok(WindowSearch {
        table,
        plan,
        proxy,
        selection,
    })
}

/// Full NUCS: winsorized difficulty, non-uniform budgets, windows over the
/// grid, ridge proxy picks `k*`.
pub fn run_nucs(
    ds: &ScoredDataset,
    alpha: f64,
    gamma: f64,
    grid: &WindowGrid,
    cfg: &RidgeConfig,
) -> Result<WindowSearch> {
    let table = winsorized_class_difficulty(ds, gamma)?;
    let plan = allocate_nonuniform(&table, alpha)?;
    let mut out = search(ds, table, plan, grid, cfg, Method::Nucs)?;
    out.selection.params.gamma = Some(gamma);
    Ok(out)
}

/// Same search on class-proportional budgets.
pub fn run_bws(
    ds: &ScoredDataset,
    alpha: f64,
    grid: &WindowGrid,
    cfg: &RidgeConfig,
) -> Result<WindowSearch> {
    let table = winsorized_class_difficulty(ds, 0.0)?;
    let plan = allocate_uniform(&table, alpha)?;
    search(ds, table, plan, grid, cfg, Method::Bws)
}

/// NUCS at a caller-fixed endpoint `k`, without the proxy. Features are not
/// needed.
pub fn run_nucs_fixed_k(
    ds: &ScoredDataset,
    alpha: f64,
    gamma: f64,
    k: f64,
) -> Result<(ClassDifficultyTable, BudgetPlan, CoresetSelection)> {
    let table = winsorized_class_difficulty(ds, gamma)?;
    let plan = allocate_nonuniform(&table, alpha)?;
    let mut selection = select_window(ds, &plan, k)?;
    selection.method = Method::NucsO;
    selection.params.gamma = Some(gamma);
    Ok((table, plan, selection))
}
