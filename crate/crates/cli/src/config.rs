use std::path::{Path, PathBuf};

use clap::Args;
use nucs_core::baselines::DEFAULT_CCS_BINS;
use nucs_core::pipeline::{DEFAULT_GAMMA, DEFAULT_LAMBDA, DEFAULT_STEP};
use nucs_core::Method;
use serde::Deserialize;
use serde_json::json;

use crate::CliError;

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// CSV with header `id,label`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// CSV with header `id,score`; higher means harder.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Binary feature matrix with an `.ids` sidecar.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Fraction of the data to prune, in (0, 1).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub method: Option<String>,
    /// Winsorization fraction per tail.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Spacing of the window endpoint grid.
    #[arg(long)]
    pub step: Option<f64>,
    /// Ridge regularization of the proxy.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// CCS hard cutoff rate.
    #[arg(long)]
    pub beta: Option<f64>,
    /// CCS stratum count.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Window endpoint for `nucs-o`.
    #[arg(long)]
    pub k_fixed: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Selection CSV to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report JSON to write.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// TOML file supplying any of the above; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    labels: Option<PathBuf>,
    scores: Option<PathBuf>,
    features: Option<PathBuf>,
    alpha: Option<f64>,
    method: Option<String>,
    gamma: Option<f64>,
    step: Option<f64>,
    lambda: Option<f64>,
    beta: Option<f64>,
    bins: Option<usize>,
    k_fixed: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    report: Option<PathBuf>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
        // paths in the file are relative to the file itself
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.labels,
            &mut cfg.scores,
            &mut cfg.features,
            &mut cfg.out,
            &mut cfg.report,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Effective settings for `select` after merging flags, config file and
/// defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub method: Method,
    pub alpha: f64,
    pub gamma: f64,
    pub step: f64,
    pub lambda: f64,
    pub beta: f64,
    pub bins: usize,
    pub k_fixed: Option<f64>,
    pub seed: u64,
    pub labels: PathBuf,
    pub scores: PathBuf,
    pub features: Option<PathBuf>,
    pub out: PathBuf,
    pub report: PathBuf,
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("missing required setting --{flag}")))
}

fn check(ok: bool, flag: &str, rule: &str, value: impl std::fmt::Display) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "--{flag} must be {rule}, got {value}"
        )))
    }
}

impl RunConfig {
    pub fn resolve(args: &SelectArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let method_name = args
            .method
            .clone()
            .or(file.method)
            .unwrap_or_else(|| "nucs".into());
        let method = method_name
            .parse::<Method>()
            .map_err(|_| CliError::Config(format!("unknown method `{method_name}`")))?;
        let cfg = RunConfig {
            method,
            alpha: required(args.alpha.or(file.alpha), "alpha")?,
            gamma: args.gamma.or(file.gamma).unwrap_or(DEFAULT_GAMMA),
            step: args.step.or(file.step).unwrap_or(DEFAULT_STEP),
            lambda: args.lambda.or(file.lambda).unwrap_or(DEFAULT_LAMBDA),
            beta: args.beta.or(file.beta).unwrap_or(0.0),
            bins: args.bins.or(file.bins).unwrap_or(DEFAULT_CCS_BINS),
            k_fixed: args.k_fixed.or(file.k_fixed),
            seed: args.seed.or(file.seed).unwrap_or(0),
            labels: required(args.labels.clone().or(file.labels), "labels")?,
            scores: required(args.scores.clone().or(file.scores), "scores")?,
            features: args.features.clone().or(file.features),
            out: required(args.out.clone().or(file.out), "out")?,
            report: required(args.report.clone().or(file.report), "report")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        check(
            self.alpha > 0.0 && self.alpha < 1.0,
            "alpha",
            "in (0, 1)",
            self.alpha,
        )?;
        check(
            (0.0..0.5).contains(&self.gamma),
            "gamma",
            "in [0, 0.5)",
            self.gamma,
        )?;
        check(
            self.step > 0.0 && self.step <= 1.0,
            "step",
            "in (0, 1]",
            self.step,
        )?;
        check(
            self.lambda > 0.0 && self.lambda.is_finite(),
            "lambda",
            "positive",
            self.lambda,
        )?;
        check(
            (0.0..1.0).contains(&self.beta),
            "beta",
            "in [0, 1)",
            self.beta,
        )?;
        check(self.bins >= 1, "bins", "at least 1", self.bins)?;
        match (self.method, self.k_fixed) {
            (Method::NucsO, None) => Err(CliError::Config("method nucs-o needs --k-fixed".into())),
            (Method::NucsO, Some(k)) => check((0.0..=1.0).contains(&k), "k-fixed", "in [0, 1]", k),
            (m, Some(_)) => Err(CliError::Config(format!(
                "--k-fixed only applies to nucs-o, not {m}"
            ))),
            (_, None) => Ok(()),
        }
    }

    /// Settings echoed into the report. Output paths are left out so two
    /// runs differing only in destination produce identical reports.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "method": self.method.as_str(),
            "alpha": self.alpha,
            "gamma": self.gamma,
            "step": self.step,
            "lambda": self.lambda,
            "beta": self.beta,
            "bins": self.bins,
            "k_fixed": self.k_fixed,
            "seed": self.seed,
            "labels": self.labels.display().to_string(),
            "scores": self.scores.display().to_string(),
            "features": self.features.as_ref().map(|p| p.display().to_string()),
        })
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub mu0: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub mu1: f64,
    #[arg(long)]
    pub sigma0: f64,
    #[arg(long)]
    pub sigma1: f64,
    /// Overall selection rate, in (0, 1].
    #[arg(long = "f")]
    pub f: f64,
    /// Number of f0 values in the sweep.
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Monte Carlo draws per class for the `E_mc` column.
    #[arg(long, default_value_t = 100_000)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sweep CSV to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// CSV with header `id,label` holding the true labels.
    #[arg(long)]
    pub labels: PathBuf,
    /// CSV with header `id,label` holding predicted labels.
    #[arg(long)]
    pub predictions: PathBuf,
    /// Selection CSV; when given only these ids are evaluated.
    #[arg(long)]
    pub selection: Option<PathBuf>,
}
