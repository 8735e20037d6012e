//! File formats: labels/scores CSV, the `NUCSFM01` feature binary with its
//! `.ids` sidecar, selection CSV and report JSON.
//!
//! Every writer goes through a temp file in the target directory followed by
//! a rename, so readers never observe a half-written file.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureMatrix, ScoredDataset};
use crate::error::{NucsError, Result};
use crate::selection::{CoresetSelection, RunReport};

pub const FEATURE_MAGIC: &[u8; 8] = b"NUCSFM01";
const HEADER_LEN: usize = 8 + 8 + 8;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| NucsError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| NucsError::io(path, e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| NucsError::io(path, e))?;
    tmp.persist(path)
        .map_err(|e| NucsError::io(path, e.error))?;
    Ok(())
}

/// Path of the id sidecar for a feature binary: `<path>.ids`.
pub fn ids_sidecar(path: &Path) -> PathBuf {
    let mut s: OsString = path.as_os_str().to_owned();
    s.push(".ids");
    PathBuf::from(s)
}

#[derive(Debug, Deserialize, Serialize)]
struct LabelRow {
    id: String,
    label: String,
}

#[derive(Debug, Deserialize, Serialize)]
struct ScoreRow {
    id: String,
    score: f64,
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| NucsError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn check_header(rdr: &mut csv::Reader<fs::File>, path: &Path, expected: &[&str]) -> Result<()> {
    let headers = rdr.headers().map_err(|e| NucsError::csv(path, e))?;
    if headers.iter().ne(expected.iter().copied()) {
        return Err(NucsError::Malformed {
            path: path.to_owned(),
            reason: format!("expected header `{}`", expected.join(",")),
        });
    }
    Ok(())
}

/// Reads an `id,label` CSV, returning rows in file order.
pub fn read_label_csv(path: &Path) -> Result<Vec<(String, String)>> {
    let mut rdr = csv_reader(path)?;
    check_header(&mut rdr, path, &["id", "label"])?;
    rdr.deserialize::<LabelRow>()
        .map(|r| {
            r.map(|row| (row.id, row.label))
                .map_err(|e| NucsError::csv(path, e))
        })
        .collect()
}

/// Reads an `id,score` CSV.
pub fn read_score_csv(path: &Path) -> Result<Vec<(String, f64)>> {
    let mut rdr = csv_reader(path)?;
    check_header(&mut rdr, path, &["id", "score"])?;
    rdr.deserialize::<ScoreRow>()
        .map(|r| {
            r.map(|row| (row.id, row.score))
                .map_err(|e| NucsError::csv(path, e))
        })
        .collect()
}

/// Densifies label tokens to `[0, Y)` in order of first appearance.
pub fn densify_labels(tokens: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut names = Vec::new();
    let labels = tokens
        .iter()
        .map(|t| {
            *index.entry(t.as_str()).or_insert_with(|| {
                names.push(t.clone());
                names.len() - 1
            })
        })
        .collect();
    (labels, names)
}

/// Reads a feature binary and its id sidecar.
pub fn read_features(path: &Path) -> Result<(FeatureMatrix, Vec<String>)> {
    let bytes = fs::read(path).map_err(|e| NucsError::io(path, e))?;
    let malformed = |reason: String| NucsError::Malformed {
        path: path.to_owned(),
        reason,
    };
    if bytes.len() < HEADER_LEN || &bytes[..8] != FEATURE_MAGIC {
        return Err(malformed("missing NUCSFM01 header".into()));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let expected = rows
        .checked_mul(cols)
        .and_then(|v| v.checked_mul(4))
        .and_then(|v| v.checked_add(HEADER_LEN as u64));
    if expected != Some(bytes.len() as u64) {
        return Err(NucsError::DimensionMismatch(format!(
            "{}: header declares {rows}x{cols} but file holds {} bytes",
            path.display(),
            bytes.len()
        )));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let matrix = FeatureMatrix::new(rows as usize, cols as usize, data)?;

    let sidecar = ids_sidecar(path);
    let text = fs::read_to_string(&sidecar).map_err(|e| NucsError::io(&sidecar, e))?;
    let ids: Vec<String> = text
        .lines()
        .map(|l| l.trim_end_matches('\r').to_owned())
        .filter(|l| !l.is_empty())
        .collect();
    if ids.len() != matrix.rows() {
        return Err(NucsError::DimensionMismatch(format!(
            "{} lists {} ids for {} rows",
            sidecar.display(),
            ids.len(),
            matrix.rows()
        )));
    }
    Ok((matrix, ids))
}

pub fn write_features(path: &Path, matrix: &FeatureMatrix, ids: &[String]) -> Result<()> {
    if ids.len() != matrix.rows() {
        return Err(NucsError::DimensionMismatch(format!(
            "{} ids for {} rows",
            ids.len(),
            matrix.rows()
        )));
    }
    let mut bytes = Vec::with_capacity(HEADER_LEN + matrix.as_slice().len() * 4);
    bytes.extend_from_slice(FEATURE_MAGIC);
    bytes.extend_from_slice(&(matrix.rows() as u64).to_le_bytes());
    bytes.extend_from_slice(&(matrix.cols() as u64).to_le_bytes());
    for v in matrix.as_slice() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    write_atomic(path, &bytes)?;
    let mut sidecar = String::new();
    for id in ids {
        sidecar.push_str(id);
        sidecar.push('\n');
    }
    write_atomic(&ids_sidecar(path), sidecar.as_bytes())
}

fn duplicate_check<'a>(ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(NucsError::DuplicateId(id.to_owned()));
        }
    }
    Ok(())
}

/// Loads and joins the labels, scores and optional feature files by id.
/// Sample order follows the labels file.
pub fn load_dataset(
    labels_path: &Path,
    scores_path: &Path,
    features_path: Option<&Path>,
) -> Result<ScoredDataset> {
    let label_rows = read_label_csv(labels_path)?;
    duplicate_check(label_rows.iter().map(|(id, _)| id.as_str()))?;
    let score_rows = read_score_csv(scores_path)?;
    duplicate_check(score_rows.iter().map(|(id, _)| id.as_str()))?;

    let score_of: HashMap<&str, f64> = score_rows.iter().map(|(id, s)| (id.as_str(), *s)).collect();
    if score_of.len() != label_rows.len() {
        return Err(NucsError::IdMismatch(format!(
            "{} has {} ids, {} has {}",
            labels_path.display(),
            label_rows.len(),
            scores_path.display(),
            score_of.len()
        )));
    }
    let mut scores = Vec::with_capacity(label_rows.len());
    for (id, _) in &label_rows {
        let s = score_of.get(id.as_str()).ok_or_else(|| {
            NucsError::IdMismatch(format!("id `{id}` missing from {}", scores_path.display()))
        })?;
        scores.push(*s);
    }

    let features = match features_path {
        None => None,
        Some(fp) => {
            let (matrix, feat_ids) = read_features(fp)?;
            duplicate_check(feat_ids.iter().map(String::as_str))?;
            if feat_ids.len() != label_rows.len() {
                return Err(NucsError::IdMismatch(format!(
                    "{} has {} ids, {} has {}",
                    labels_path.display(),
                    label_rows.len(),
                    fp.display(),
                    feat_ids.len()
                )));
            }
            let row_of: HashMap<&str, usize> = feat_ids
                .iter()
                .enumerate()
                .map(|(r, id)| (id.as_str(), r))
                .collect();
            let order = label_rows
                .iter()
                .map(|(id, _)| {
                    row_of.get(id.as_str()).copied().ok_or_else(|| {
                        NucsError::IdMismatch(format!("id `{id}` missing from {}", fp.display()))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Some(matrix.select_rows(&order))
        }
    };

    let (ids, tokens): (Vec<String>, Vec<String>) = label_rows.into_iter().unzip();
    let (labels, class_names) = densify_labels(&tokens);
    ScoredDataset::with_class_names(ids, labels, scores, features, class_names)
}

/// Writes a dataset in the three-file layout read by [`load_dataset`].
pub fn save_dataset(
    ds: &ScoredDataset,
    labels_path: &Path,
    scores_path: &Path,
    features_path: Option<&Path>,
) -> Result<()> {
    let mut labels = csv::Writer::from_writer(Vec::new());
    let mut scores = csv::Writer::from_writer(Vec::new());
    for i in 0..ds.len() {
        labels
            .serialize(LabelRow {
                id: ds.ids()[i].clone(),
                label: ds.class_names()[ds.labels()[i]].clone(),
            })
            .map_err(|e| NucsError::csv(labels_path, e))?;
        scores
            .serialize(ScoreRow {
                id: ds.ids()[i].clone(),
                score: ds.scores()[i],
            })
            .map_err(|e| NucsError::csv(scores_path, e))?;
    }
    write_atomic(labels_path, &finish_csv(labels, labels_path)?)?;
    write_atomic(scores_path, &finish_csv(scores, scores_path)?)?;
    if let (Some(fp), Some(fm)) = (features_path, ds.features()) {
        write_features(fp, fm, ds.ids())?;
    }
    Ok(())
}

fn finish_csv(w: csv::Writer<Vec<u8>>, path: &Path) -> Result<Vec<u8>> {
    w.into_inner()
        .map_err(|e| NucsError::io(path, e.into_error()))
}

/// Writes the selection CSV (`id` header, one id per row, selection order).
pub fn save_selection(sel: &CoresetSelection, out_path: &Path) -> Result<()> {
    if sel.selected_ids.is_empty() {
        return Err(NucsError::param(
            "selection",
            "refusing to write an empty selection",
        ));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id"])
        .map_err(|e| NucsError::csv(out_path, e))?;
    for id in &sel.selected_ids {
        w.write_record([id])
            .map_err(|e| NucsError::csv(out_path, e))?;
    }
    write_atomic(out_path, &finish_csv(w, out_path)?)
}

pub fn load_selection_ids(path: &Path) -> Result<Vec<String>> {
    let mut rdr = csv_reader(path)?;
    check_header(&mut rdr, path, &["id"])?;
    rdr.records()
        .map(|r| {
            r.map(|rec| rec[0].to_owned())
                .map_err(|e| NucsError::csv(path, e))
        })
        .collect()
}

pub fn save_report(report: &RunReport, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
