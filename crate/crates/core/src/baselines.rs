//! Reference selectors: random, hardest-first (EL2N), moderate, CCS, BWS
//! and class-proportional CCS.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::budget::{allocate_uniform, coreset_size, BudgetPlan};
use crate::dataset::{floor_count, rank_order, ScoredDataset};
use crate::difficulty::winsorized_class_difficulty;
use crate::error::{NucsError, Result};
use crate::pipeline::run_bws;
use crate::ridge::RidgeConfig;
use crate::selection::{CoresetSelection, Method, SelectionParams};
use crate::window::WindowGrid;

/// Stratum count used when none is given.
pub const DEFAULT_CCS_BINS: usize = 50;

fn nonempty_budget(n: usize, alpha: f64) -> Result<usize> {
    let budget = coreset_size(n, alpha)?;
    if budget == 0 {
        return Err(NucsError::param(
            "alpha",
            format!("leaves an empty coreset for {n} samples"),
        ));
    }
    Ok(budget)
}

fn proportional_plan(ds: &ScoredDataset, alpha: f64) -> Result<BudgetPlan> {
    allocate_uniform(&winsorized_class_difficulty(ds, 0.0)?, alpha)
}

/// `m` items drawn uniformly without replacement from `pool`, returned in
/// pool order.
fn sample_from(rng: &mut ChaCha8Rng, pool: &[usize], m: usize) -> Vec<usize> {
    let mut picks = rand::seq::index::sample(rng, pool.len(), m).into_vec();
    picks.sort_unstable();
    picks.into_iter().map(|p| pool[p]).collect()
}

pub fn select_random(ds: &ScoredDataset, alpha: f64, seed: u64) -> Result<CoresetSelection> {
    let budget = nonempty_budget(ds.len(), alpha)?;
    let pool: Vec<usize> = (0..ds.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = sample_from(&mut rng, &pool, budget);
    let params = SelectionParams {
        alpha,
        seed: Some(seed),
        ..SelectionParams::default()
    };
    Ok(CoresetSelection::from_indices(
        ds,
        indices,
        Method::Random,
        params,
    ))
}

/// The `floor((1 - alpha) N)` highest-scored samples, hardest first. Equal
/// scores are ordered by id.
pub fn select_hard(ds: &ScoredDataset, alpha: f64) -> Result<CoresetSelection> {
    let budget = nonempty_budget(ds.len(), alpha)?;
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.sort_by(|&a, &b| {
        ds.scores()[b]
            .total_cmp(&ds.scores()[a])
            .then_with(|| ds.ids()[a].cmp(&ds.ids()[b]))
    });
    order.truncate(budget);
    let params = SelectionParams {
        alpha,
        ..SelectionParams::default()
    };
    Ok(CoresetSelection::from_indices(
        ds,
        order,
        Method::El2nHard,
        params,
    ))
}

/// Coverage-centric stratified sampling within `members`: drop the
/// `floor(beta * |members|)` hardest, bin the rest by score into `bins`
/// equal-width strata, and spread `budget` over the strata smallest-first.
fn ccs_within(
    ds: &ScoredDataset,
    members: &[usize],
    budget: usize,
    beta: f64,
    bins: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let scores = ds.scores();
    let mut ranked = members.to_vec();
    ranked.sort_by(|&a, &b| rank_order(scores, ds.ids(), a, b));
    let cut = floor_count(beta * members.len() as f64);
    ranked.truncate(members.len() - cut);
    if budget > ranked.len() {
        return Err(NucsError::BudgetExceedsPool {
            budget,
            pool: ranked.len(),
        });
    }
    if budget == 0 {
        return Ok(Vec::new());
    }

    let lo = scores[ranked[0]];
    let hi = scores[ranked[ranked.len() - 1]];
    let width = (hi - lo) / bins as f64;
    let mut strata: Vec<Vec<usize>> = vec![Vec::new(); bins];
    for &i in &ranked {
        let b = if width > 0.0 {
            (((scores[i] - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        strata[b].push(i);
    }
    for s in &mut strata {
        s.sort_unstable();
    }

    let mut order: Vec<usize> = (0..bins).filter(|&b| !strata[b].is_empty()).collect();
    order.sort_by_key(|&b| (strata[b].len(), b));
    let mut take = vec![0usize; bins];
    let mut remaining = budget;
    for (pos, &b) in order.iter().enumerate() {
        let share = remaining / (order.len() - pos);
        take[b] = strata[b].len().min(share);
        remaining -= take[b];
    }
    // spill whatever the floor shares left over into strata with room
    for &b in &order {
        if remaining == 0 {
            break;
        }
        let extra = (strata[b].len() - take[b]).min(remaining);
        take[b] += extra;
        remaining -= extra;
    }

    let mut picked = Vec::with_capacity(budget);
    for &b in &order {
        picked.extend(sample_from(rng, &strata[b], take[b]));
    }
    picked.sort_unstable();
    Ok(picked)
}

fn check_ccs_params(beta: f64, bins: usize) -> Result<()> {
    if !(0.0..1.0).contains(&beta) {
        return Err(NucsError::param(
            "beta",
            format!("must lie in [0, 1), got {beta}"),
        ));
    }
    if bins == 0 {
        return Err(NucsError::param("bins", "must be at least 1"));
    }
    Ok(())
}

pub fn select_ccs(
    ds: &ScoredDataset,
    alpha: f64,
    beta: f64,
    bins: usize,
    seed: u64,
) -> Result<CoresetSelection> {
    check_ccs_params(beta, bins)?;
    let budget = nonempty_budget(ds.len(), alpha)?;
    let all: Vec<usize> = (0..ds.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = ccs_within(ds, &all, budget, beta, bins, &mut rng)?;
    let params = SelectionParams {
        alpha,
        beta: Some(beta),
        bins: Some(bins),
        seed: Some(seed),
        ..SelectionParams::default()
    };
    Ok(CoresetSelection::from_indices(
        ds,
        indices,
        Method::Ccs,
        params,
    ))
}

/// Class-proportional CCS: uniform class budgets, CCS inside each class.
pub fn select_ccs_cp(
    ds: &ScoredDataset,
    alpha: f64,
    beta: f64,
    bins: usize,
    seed: u64,
) -> Result<CoresetSelection> {
    check_ccs_params(beta, bins)?;
    nonempty_budget(ds.len(), alpha)?;
    let plan = proportional_plan(ds, alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::with_capacity(plan.total());
    for (class, &b) in plan.budgets().iter().enumerate() {
        let mut members = ds.ranked_class(class).to_vec();
        members.sort_unstable();
        picked.extend(ccs_within(ds, &members, b, beta, bins, &mut rng)?);
    }
    picked.sort_unstable();
    let params = SelectionParams {
        alpha,
        beta: Some(beta),
        bins: Some(bins),
        seed: Some(seed),
        ..SelectionParams::default()
    };
    Ok(CoresetSelection::from_indices(
        ds,
        picked,
        Method::CcsCp,
        params,
    ))
}

/// Per class, keeps the proportional budget of samples whose distance to
/// the class centroid is closest to the class median distance.
pub fn select_moderate(ds: &ScoredDataset, alpha: f64) -> Result<CoresetSelection> {
    let fm = ds.require_features()?;
    nonempty_budget(ds.len(), alpha)?;
    let plan = proportional_plan(ds, alpha)?;
    let dim = fm.cols();
    let mut indices = Vec::with_capacity(plan.total());
    for (class, &b) in plan.budgets().iter().enumerate() {
        let mut members = ds.ranked_class(class).to_vec();
        members.sort_unstable();
        let mut centroid = vec![0.0f64; dim];
        for &i in &members {
            for (c, v) in centroid.iter_mut().zip(fm.row(i)) {
                *c += f64::from(*v);
            }
        }
        for c in &mut centroid {
            *c /= members.len() as f64;
        }
        let dist: Vec<f64> = members
            .iter()
            .map(|&i| {
                fm.row(i)
                    .iter()
                    .zip(&centroid)
                    .map(|(v, c)| (f64::from(*v) - c).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let median = median(&dist);
        let mut order: Vec<usize> = (0..members.len()).collect();
        order.sort_by(|&a, &b| {
            (dist[a] - median)
                .abs()
                .total_cmp(&(dist[b] - median).abs())
                .then_with(|| ds.ids()[members[a]].cmp(&ds.ids()[members[b]]))
        });
        indices.extend(order.into_iter().take(b).map(|p| members[p]));
    }
    let params = SelectionParams {
        alpha,
        ..SelectionParams::default()
    };
    Ok(CoresetSelection::from_indices(
        ds,
        indices,
        Method::Moderate,
        params,
    ))
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Windowed selection on class-proportional budgets with the ridge proxy
/// choosing the endpoint.
pub fn select_bws(
    ds: &ScoredDataset,
    alpha: f64,
    grid: &WindowGrid,
    cfg: &RidgeConfig,
) -> Result<CoresetSelection> {
    Ok(run_bws(ds, alpha, grid, cfg)?.selection)
}
