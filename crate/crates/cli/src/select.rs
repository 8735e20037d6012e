use nucs_core::baselines::{
    select_ccs, select_ccs_cp, select_hard, select_moderate, select_random,
};
use nucs_core::io::{load_dataset, save_report, save_selection};
use nucs_core::pipeline::{run_bws, run_nucs, run_nucs_fixed_k};
use nucs_core::ridge::{bias_metrics, fit_selection, predict};
use nucs_core::{
    winsorized_class_difficulty, BiasMetrics, ClassRow, CoresetSelection, Method, ProxyScores,
    RidgeConfig, RunReport, ScoredDataset, WindowGrid,
};

use crate::config::{RunConfig, SelectArgs};
use crate::CliError;

pub fn run(args: &SelectArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args)?;
    let ds = load_dataset(&cfg.labels, &cfg.scores, cfg.features.as_deref())?;
    let ridge = RidgeConfig::with_lambda(cfg.lambda);

    let (selection, chosen_k, proxy_scores) = match cfg.method {
        Method::Nucs | Method::Bws => {
            let grid = WindowGrid::new(cfg.step)?;
            let run = if cfg.method == Method::Nucs {
                run_nucs(&ds, cfg.alpha, cfg.gamma, &grid, &ridge)?
            } else {
                run_bws(&ds, cfg.alpha, &grid, &ridge)?
            };
            (run.selection, Some(run.proxy.chosen_k), run.proxy.scores)
        }
        Method::NucsO => {
            let k = cfg.k_fixed.expect("validated by RunConfig");
            let (_, _, sel) = run_nucs_fixed_k(&ds, cfg.alpha, cfg.gamma, k)?;
            (sel, Some(k), ProxyScores::default())
        }
        Method::Random => (
            select_random(&ds, cfg.alpha, cfg.seed)?,
            None,
            ProxyScores::default(),
        ),
        Method::El2nHard => (select_hard(&ds, cfg.alpha)?, None, ProxyScores::default()),
        Method::Moderate => (
            select_moderate(&ds, cfg.alpha)?,
            None,
            ProxyScores::default(),
        ),
        Method::Ccs => (
            select_ccs(&ds, cfg.alpha, cfg.beta, cfg.bins, cfg.seed)?,
            None,
            ProxyScores::default(),
        ),
        Method::CcsCp => (
            select_ccs_cp(&ds, cfg.alpha, cfg.beta, cfg.bins, cfg.seed)?,
            None,
            ProxyScores::default(),
        ),
    };

    let report = RunReport {
        class_table: class_table(&ds, &selection, cfg.gamma)?,
        chosen_k,
        proxy_scores,
        metrics: coreset_metrics(&ds, &selection, &ridge)?,
        params: cfg.to_json(),
    };
    save_selection(&selection, &cfg.out)?;
    save_report(&report, &cfg.report)?;
    Ok(())
}

fn class_table(
    ds: &ScoredDataset,
    selection: &CoresetSelection,
    gamma: f64,
) -> Result<Vec<ClassRow>, CliError> {
    let table = winsorized_class_difficulty(ds, gamma)?;
    Ok(table
        .classes()
        .iter()
        .enumerate()
        .map(|(class, c)| ClassRow {
            class,
            label: ds.class_names()[class].clone(),
            count: c.count,
            difficulty: c.difficulty,
            budget: selection.per_class_counts[class],
        })
        .collect())
}

/// Recall metrics of a ridge proxy trained on the coreset and scored on the
/// whole dataset. Needs features.
fn coreset_metrics(
    ds: &ScoredDataset,
    selection: &CoresetSelection,
    ridge: &RidgeConfig,
) -> Result<Option<BiasMetrics>, CliError> {
    if ds.features().is_none() {
        return Ok(None);
    }
    let model = fit_selection(ds, selection, ridge)?;
    let pred = predict(&model, ds)?;
    Ok(Some(bias_metrics(&pred, ds.labels(), ds.num_classes())?))
}
