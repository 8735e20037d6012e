//! Per-class integer selection budgets.
//!
//! Both strategies share one path: real-valued targets proportional to a
//! per-class weight, iterated capping at `N_j`, then largest-remainder
//! integerization so the budgets sum to `floor((1 - alpha) N)` exactly.

use serde::Serialize;

use crate::dataset::floor_count;
use crate::difficulty::ClassDifficultyTable;
use crate::error::{NucsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AllocationStrategy {
    /// Weight `S_j * N_j`.
    NonUniform,
    /// Weight `N_j`: the same selection rate in every class.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetPlan {
    budgets: Vec<usize>,
    alpha: f64,
    strategy: AllocationStrategy,
}

impl BudgetPlan {
    pub fn budgets(&self) -> &[usize] {
        &self.budgets
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn strategy(&self) -> AllocationStrategy {
        self.strategy
    }

    pub fn total(&self) -> usize {
        self.budgets.iter().sum()
    }
}

/// Coreset size `floor((1 - alpha) N)`.
pub fn coreset_size(n: usize, alpha: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(NucsError::param(
            "alpha",
            format!("must lie in [0, 1), got {alpha}"),
        ));
    }
    Ok(floor_count((1.0 - alpha) * n as f64).min(n))
}

/// Budgets proportional to `S_j N_j`, capped at `N_j`.
pub fn allocate_nonuniform(table: &ClassDifficultyTable, alpha: f64) -> Result<BudgetPlan> {
    let mut weights = Vec::with_capacity(table.len());
    for (class, c) in table.classes().iter().enumerate() {
        if c.difficulty <= 0.0 {
            return Err(NucsError::NonPositiveDifficulty {
                class,
                value: c.difficulty,
            });
        }
        weights.push(c.difficulty * c.count as f64);
    }
    allocate_weighted(
        &table.counts(),
        &weights,
        alpha,
        AllocationStrategy::NonUniform,
    )
}

/// Class-proportional budgets (`B N_j / N`).
pub fn allocate_uniform(table: &ClassDifficultyTable, alpha: f64) -> Result<BudgetPlan> {
    let counts = table.counts();
    let weights: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
    allocate_weighted(&counts, &weights, alpha, AllocationStrategy::Uniform)
}

const SNAP: f64 = 1e-9;

fn allocate_weighted(
    counts: &[usize],
    weights: &[f64],
    alpha: f64,
    strategy: AllocationStrategy,
) -> Result<BudgetPlan> {
    let classes = counts.len();
    let n: usize = counts.iter().sum();
    let budget = coreset_size(n, alpha)?;
    if budget < classes {
        return Err(NucsError::BudgetBelowClassCount { budget, classes });
    }

    let targets = capped_targets(counts, weights, budget);
    let capped: Vec<bool> = targets
        .iter()
        .zip(counts)
        .map(|(&r, &c)| r >= c as f64)
        .collect();

    let mut budgets: Vec<usize> = targets
        .iter()
        .zip(counts)
        .map(|(&r, &c)| (r.floor() as usize).min(c))
        .collect();
    let mut remainder_order: Vec<usize> = (0..classes).filter(|&j| !capped[j]).collect();
    remainder_order.sort_by(|&a, &b| {
        let fa = targets[a] - targets[a].floor();
        let fb = targets[b] - targets[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut missing = budget - budgets.iter().sum::<usize>();
    while missing > 0 {
        let before = missing;
        for &j in &remainder_order {
            if missing == 0 {
                break;
            }
            if budgets[j] < counts[j] {
                budgets[j] += 1;
                missing -= 1;
            }
        }
        if missing == before {
            // only reachable if every class is full, which budget <= N rules out
            return Err(NucsError::Numeric("budget integerization stalled".into()));
        }
    }

    // every class keeps at least one sample
    while let Some(empty) = budgets.iter().position(|&b| b == 0) {
        let donor = (0..classes)
            .filter(|&j| budgets[j] >= 2)
            .max_by(|&a, &b| {
                budgets[a]
                    .cmp(&budgets[b])
                    .then(weights[b].total_cmp(&weights[a]))
                    .then(a.cmp(&b))
            })
            .ok_or(NucsError::BudgetBelowClassCount { budget, classes })?;
        budgets[donor] -= 1;
        budgets[empty] = 1;
    }

    Ok(BudgetPlan {
        budgets,
        alpha,
        strategy,
    })
}

/// Real-valued targets after iterated proportional capping.
fn capped_targets(counts: &[usize], weights: &[f64], budget: usize) -> Vec<f64> {
    let classes = counts.len();
    let mut fixed = vec![false; classes];
    let mut targets = vec![0.0; classes];
    loop {
        let remaining = budget as f64
            - (0..classes)
                .filter(|&j| fixed[j])
                .map(|j| counts[j] as f64)
                .sum::<f64>();
        let free_weight: f64 = (0..classes)
            .filter(|&j| !fixed[j])
            .map(|j| weights[j])
            .sum();
        let mut newly_capped = false;
        for j in 0..classes {
            if fixed[j] {
                targets[j] = counts[j] as f64;
                continue;
            }
            let mut r = remaining * weights[j] / free_weight;
            let nearest = r.round();
            if (r - nearest).abs() <= SNAP * nearest.max(1.0) {
                r = nearest;
            }
            targets[j] = r;
        }
        for j in 0..classes {
            if !fixed[j] && targets[j] > counts[j] as f64 {
                fixed[j] = true;
                newly_capped = true;
            }
        }
        if !newly_capped {
            for j in 0..classes {
                if fixed[j] {
                    targets[j] = counts[j] as f64;
                }
            }
            return targets;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(counts: &[usize], s: &[f64]) -> ClassDifficultyTable {
        ClassDifficultyTable::from_parts(counts, s, 0.05).unwrap()
    }

    #[test]
    fn symmetric_split() {
        let p = allocate_nonuniform(&table(&[100, 100], &[2.0, 2.0]), 0.5).unwrap();
        assert_eq!(p.budgets(), &[50, 50]);
    }

    #[test]
    fn proportional_to_difficulty() {
        let p = allocate_nonuniform(&table(&[100, 100], &[1.0, 3.0]), 0.5).unwrap();
        assert_eq!(p.budgets(), &[25, 75]);
    }

    #[test]
    fn cap_and_redistribute() {
        let p = allocate_nonuniform(&table(&[100, 100], &[1.0, 9.0]), 0.2).unwrap();
        assert_eq!(p.budgets(), &[60, 100]);
        assert_eq!(p.total(), 160);
    }

    #[test]
    fn cascading_caps() {
        // first pass caps class 0 only; the redistribution then overflows class 1
        let p = allocate_nonuniform(&table(&[10, 10, 100], &[5.0, 4.0, 0.1]), 0.8).unwrap();
        assert_eq!(p.total(), 24);
        assert_eq!(p.budgets(), &[10, 10, 4]);
    }

    #[test]
    fn uniform_examples() {
        let p = allocate_uniform(&table(&[100, 50], &[1.0, 9.0]), 0.5).unwrap();
        assert_eq!(p.budgets(), &[50, 25]);
        let p = allocate_uniform(&table(&[7, 7, 7], &[1.0, 2.0, 3.0]), 0.5).unwrap();
        let (lo, hi) = (
            p.budgets().iter().min().unwrap(),
            p.budgets().iter().max().unwrap(),
        );
        assert!(hi - lo <= 1);
        assert_eq!(p.total(), 10);
    }

    #[test]
    fn long_tail_rates() {
        let counts: Vec<usize> = (0..20)
            .map(|k| (500.0 * 0.85f64.powi(k)) as usize)
            .collect();
        let s = vec![1.0; 20];
        let p = allocate_uniform(&table(&counts, &s), 0.7).unwrap();
        for (b, n) in p.budgets().iter().zip(&counts) {
            let rate = *b as f64 / *n as f64;
            assert!((rate - 0.3).abs() <= 1.0 / *n as f64 + 1e-12, "{b}/{n}");
        }
    }

    #[test]
    fn every_class_gets_one() {
        let p = allocate_nonuniform(&table(&[1000, 5, 5], &[10.0, 0.001, 0.001]), 0.9).unwrap();
        assert_eq!(p.budgets(), &[99, 1, 1]);
        assert_eq!(p.total(), 101);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            allocate_nonuniform(&table(&[1, 1, 1], &[1.0; 3]), 0.5),
            Err(NucsError::BudgetBelowClassCount {
                budget: 1,
                classes: 3
            })
        ));
        assert!(matches!(
            allocate_nonuniform(&table(&[4, 4], &[1.0, 0.0]), 0.5),
            Err(NucsError::NonPositiveDifficulty { class: 1, .. })
        ));
        assert!(allocate_uniform(&table(&[4, 4], &[1.0, 1.0]), 1.0).is_err());
    }

    #[test]
    fn coreset_size_guards_decimal_rounding() {
        assert_eq!(coreset_size(1000, 0.9).unwrap(), 100);
        assert_eq!(coreset_size(10, 0.7).unwrap(), 3);
        assert_eq!(coreset_size(200, 0.2).unwrap(), 160);
        assert_eq!(coreset_size(7, 0.0).unwrap(), 7);
    }

    /// Independent largest-remainder reference for the uncapped case.
    fn largest_remainder(weights: &[f64], budget: usize) -> Vec<usize> {
        let total: f64 = weights.iter().sum();
        let quotas: Vec<f64> = weights.iter().map(|w| budget as f64 * w / total).collect();
        let mut out: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let mut idx: Vec<usize> = (0..weights.len()).collect();
        idx.sort_by(|&a, &b| {
            (quotas[b] - quotas[b].floor())
                .partial_cmp(&(quotas[a] - quotas[a].floor()))
                .unwrap()
                .then(a.cmp(&b))
        });
        let short = budget - out.iter().sum::<usize>();
        for &j in idx.iter().take(short) {
            out[j] += 1;
        }
        out
    }

    #[test]
    fn cifar_scale_matches_largest_remainder() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let counts = vec![500usize; 100];
        let s: Vec<f64> = (0..100).map(|_| rng.random_range(0.5..1.5)).collect();
        let p = allocate_nonuniform(&table(&counts, &s), 0.5).unwrap();
        let weights: Vec<f64> = s.iter().map(|v| v * 500.0).collect();
        assert_eq!(p.total(), 25_000);
        assert_eq!(p.budgets(), largest_remainder(&weights, 25_000).as_slice());
    }

    prop_compose! {
        fn arb_table()(classes in 2usize..30)
            (counts in prop::collection::vec(1usize..400, classes),
             s in prop::collection::vec(0.01f64..10.0, classes)) -> (Vec<usize>, Vec<f64>) {
            (counts, s)
        }
    }

    proptest! {
        #[test]
        fn conservation_and_bounds((counts, s) in arb_table(), alpha in 0.01f64..0.99) {
            let n: usize = counts.iter().sum();
            let t = table(&counts, &s);
            let b = coreset_size(n, alpha).unwrap();
            prop_assume!(b >= counts.len());
            for plan in [allocate_nonuniform(&t, alpha).unwrap(), allocate_uniform(&t, alpha).unwrap()] {
                prop_assert_eq!(plan.total(), b);
                for (bj, nj) in plan.budgets().iter().zip(&counts) {
                    prop_assert!(*bj >= 1 && bj <= nj);
                }
            }
        }

        #[test]
        fn scale_invariant((counts, s) in arb_table(), alpha in 0.01f64..0.99, c in 0.001f64..1000.0) {
            let n: usize = counts.iter().sum();
            prop_assume!(coreset_size(n, alpha).unwrap() >= counts.len());
            let scaled: Vec<f64> = s.iter().map(|v| v * c).collect();
            let a = allocate_nonuniform(&table(&counts, &s), alpha).unwrap();
            let b = allocate_nonuniform(&table(&counts, &scaled), alpha).unwrap();
            prop_assert_eq!(a.budgets(), b.budgets());
        }

        #[test]
        fn harder_gets_more(classes in 2usize..20, nj in 5usize..200,
                            s in prop::collection::vec(0.01f64..10.0, 20), alpha in 0.01f64..0.99) {
            let counts = vec![nj; classes];
            let s = &s[..classes];
            prop_assume!(coreset_size(nj * classes, alpha).unwrap() >= classes);
            let plan = allocate_nonuniform(&table(&counts, s), alpha).unwrap();
            let bud = plan.budgets();
            for a in 0..classes {
                for b in 0..classes {
                    if s[a] > s[b] && bud[a] < nj && bud[b] < nj {
                        prop_assert!(bud[a] >= bud[b], "S {} > {} but b {} < {}", s[a], s[b], bud[a], bud[b]);
                    }
                }
            }
        }

        #[test]
        fn huge_difficulty_saturates(counts in prop::collection::vec(10usize..100, 2..8)) {
            let mut s = vec![1.0; counts.len()];
            s[0] = 1e9;
            let plan = allocate_nonuniform(&table(&counts, &s), 0.5).unwrap();
            // every other class still keeps one unit; zero-budget raises take
            // from the largest budget, so the hard class donates at most one
            // unit per other class
            let b = plan.budgets();
            let others = counts.len() - 1;
            let room = plan.total() - others;
            prop_assert!(b.iter().all(|&x| x >= 1));
            prop_assert!(b[0] <= counts[0].min(room));
            prop_assert!(b[0] + others >= counts[0].min(room));
            prop_assert!(b.iter().all(|&x| x <= b[0]) || b[0] == counts[0]);
        }
    }
}
