#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nucs_core::io::save_dataset;
use nucs_core::{FeatureMatrix, ScoredDataset};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const BIN: &str = env!("CARGO_BIN_EXE_nucs");

/// Separated Gaussian clusters in `dim` dimensions. Class `c` has
/// `per_class[c]` samples with difficulty scores `N(5 + shift[c], 1)`.
pub fn clusters(per_class: &[usize], dim: usize, shift: &[f64], seed: u64) -> ScoredDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.5).unwrap();
    let unit = Normal::new(0.0, 1.0).unwrap();
    let (mut ids, mut labels, mut scores, mut data) = (vec![], vec![], vec![], vec![]);
    for (c, &n) in per_class.iter().enumerate() {
        for i in 0..n {
            ids.push(format!("img-{c}-{i:05}"));
            labels.push(c);
            scores.push(5.0 + shift.get(c).copied().unwrap_or(0.0) + unit.sample(&mut rng));
            for d in 0..dim {
                let center = if d % per_class.len() == c { 4.0 } else { 0.0 };
                data.push((center + noise.sample(&mut rng)) as f32);
            }
        }
    }
    let names = (0..per_class.len()).map(|c| format!("class_{c}")).collect();
    let fm = FeatureMatrix::new(ids.len(), dim, data).unwrap();
    ScoredDataset::with_class_names(ids, labels, scores, Some(fm), names).unwrap()
}

pub struct Files {
    pub dir: tempfile::TempDir,
    pub labels: PathBuf,
    pub scores: PathBuf,
    pub features: PathBuf,
}

impl Files {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

pub fn write(ds: &ScoredDataset) -> Files {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.csv");
    let scores = dir.path().join("scores.csv");
    let features = dir.path().join("features.bin");
    save_dataset(ds, &labels, &scores, Some(&features)).unwrap();
    Files {
        dir,
        labels,
        scores,
        features,
    }
}

pub fn nucs(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

pub fn nucs_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(BIN)
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// `select` with the dataset flags filled in.
pub fn select(files: &Files, tag: &str, extra: &[&str]) -> (Output, PathBuf, PathBuf) {
    let out = files.path(&format!("{tag}.csv"));
    let report = files.path(&format!("{tag}.json"));
    let mut args = vec![
        "select",
        "--labels",
        p(&files.labels),
        "--scores",
        p(&files.scores),
        "--features",
        p(&files.features),
        "--out",
        p(&out),
        "--report",
        p(&report),
    ];
    args.extend_from_slice(extra);
    let output = nucs(&args);
    (output, out, report)
}
