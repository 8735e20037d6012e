use nucs_core::gaussian::{
    error_rate, monte_carlo_error, optimal_constrained, optimal_threshold, Regime,
};
use nucs_core::io::write_atomic;
use nucs_core::{GaussianTwoClassModel, NucsError};
use rayon::prelude::*;
use serde_json::json;

use crate::config::SimulateArgs;
use crate::CliError;

struct Row {
    f0: f64,
    t: f64,
    closed: f64,
    mc: f64,
    regime: Regime,
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    if args.points < 2 {
        return Err(CliError::Config(format!(
            "--points must be at least 2, got {}",
            args.points
        )));
    }
    if args.mc_samples == 0 {
        return Err(CliError::Config("--mc-samples must be at least 1".into()));
    }
    let model = GaussianTwoClassModel::new(args.mu0, args.mu1, args.sigma0, args.sigma1, args.f)?;
    let (lo, hi) = model.feasible_f0();
    let last = args.points - 1;

    let rows = (0..args.points)
        .into_par_iter()
        .map(|i| {
            let f0 = if i == last {
                hi
            } else {
                lo + (hi - lo) * i as f64 / last as f64
            };
            let t = optimal_threshold(&model, f0)?;
            let f1 = 2.0 * model.f() - f0;
            let regime = if f0 >= 1.0 {
                Regime::Cap0
            } else if f1 >= 1.0 {
                Regime::Cap1
            } else {
                Regime::Interior
            };
            Ok(Row {
                f0,
                t,
                closed: error_rate(&model, t, f0)?,
                mc: monte_carlo_error(
                    &model,
                    t,
                    f0,
                    args.mc_samples,
                    args.seed.wrapping_add(i as u64),
                )?,
                regime,
            })
        })
        .collect::<Result<Vec<Row>, NucsError>>()?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| {
        CliError::Core(NucsError::Malformed {
            path: args.out.clone(),
            reason: e.to_string(),
        })
    };
    w.write_record(["f0", "t", "E_closed", "E_mc", "regime"])
        .map_err(csv_err)?;
    for r in &rows {
        w.write_record([
            r.f0.to_string(),
            r.t.to_string(),
            r.closed.to_string(),
            r.mc.to_string(),
            r.regime.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Config(format!("cannot buffer sweep: {e}")))?;
    write_atomic(&args.out, &bytes)?;

    let best = optimal_constrained(&model);
    let summary = json!({
        "t": best.t,
        "f0": best.f0,
        "f1": best.f1,
        "regime": best.regime,
        "error": best.error(&model),
        "swapped": model.swapped(),
    });
    println!("{summary}");
    Ok(())
}
