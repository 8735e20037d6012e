//! Class-aware coreset selection from per-sample difficulty scores.
//!
//! Classes receive budgets in proportion to their robust difficulty, each
//! class contributes a contiguous window of its difficulty ranking, and a
//! ridge-regression proxy on frozen embeddings picks the window position.

pub mod baselines;
pub mod budget;
pub mod dataset;
pub mod difficulty;
pub mod error;
pub mod gaussian;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod ridge;
pub mod selection;
pub mod window;

pub use budget::{
    allocate_nonuniform, allocate_uniform, coreset_size, AllocationStrategy, BudgetPlan,
};
pub use dataset::{make_long_tailed, FeatureMatrix, ScoredDataset};
pub use difficulty::{winsorized_class_difficulty, ClassDifficulty, ClassDifficultyTable};
pub use error::{ErrorKind, NucsError, Result};
pub use gaussian::{Allocation, GaussianTwoClassModel, Regime};
pub use ridge::{RidgeConfig, RidgeModel, RidgeSolver};
pub use selection::{
    BiasMetrics, ClassRow, CoresetSelection, Method, ProxyScores, RunReport, SelectionParams,
};
pub use window::{WindowCandidate, WindowGrid};
