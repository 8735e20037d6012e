use std::collections::{HashMap, HashSet};

use nucs_core::io::{densify_labels, load_selection_ids, read_label_csv};
use nucs_core::ridge::bias_metrics;
use nucs_core::NucsError;

use crate::config::EvaluateArgs;
use crate::CliError;

pub fn run(args: &EvaluateArgs) -> Result<(), CliError> {
    let truth = read_label_csv(&args.labels)?;
    let preds = read_label_csv(&args.predictions)?;
    let truth_of = unique_map(&truth)?;
    let pred_of = unique_map(&preds)?;

    let ids: Vec<&str> = match &args.selection {
        Some(path) => {
            let ids = load_selection_ids(path)?;
            let mut seen = HashSet::new();
            for id in &ids {
                if !seen.insert(id.as_str()) {
                    return Err(NucsError::DuplicateId(id.clone()).into());
                }
                if !truth_of.contains_key(id.as_str()) {
                    return Err(mismatch(id, &args.labels));
                }
            }
            ids.iter()
                .map(|id| *truth_of.get_key_value(id.as_str()).unwrap().0)
                .collect()
        }
        None => {
            if let Some((id, _)) = preds
                .iter()
                .find(|(id, _)| !truth_of.contains_key(id.as_str()))
            {
                return Err(mismatch(id, &args.labels));
            }
            truth.iter().map(|(id, _)| id.as_str()).collect()
        }
    };

    let tokens: Vec<String> = ids.iter().map(|id| truth_of[id].to_string()).collect();
    let (labels, names) = densify_labels(&tokens);
    let class_of: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(c, n)| (n.as_str(), c))
        .collect();
    let mut predicted = Vec::with_capacity(ids.len());
    for id in &ids {
        let token = pred_of
            .get(id)
            .ok_or_else(|| mismatch(id, &args.predictions))?;
        // tokens never seen among the true labels can only be wrong
        predicted.push(class_of.get(token).copied().unwrap_or(usize::MAX));
    }
    let metrics = bias_metrics(&predicted, &labels, names.len())?;
    println!(
        "{}",
        serde_json::to_string(&metrics).expect("plain struct serializes")
    );
    Ok(())
}

fn unique_map(rows: &[(String, String)]) -> Result<HashMap<&str, &str>, CliError> {
    let mut map = HashMap::with_capacity(rows.len());
    for (id, label) in rows {
        if map.insert(id.as_str(), label.as_str()).is_some() {
            return Err(NucsError::DuplicateId(id.clone()).into());
        }
    }
    Ok(map)
}

fn mismatch(id: &str, missing_from: &std::path::Path) -> CliError {
    NucsError::IdMismatch(format!("id `{id}` missing from {}", missing_from.display())).into()
}
