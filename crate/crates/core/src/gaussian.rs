//! Two-class Gaussian model of per-class selection rates: each class keeps
//! a fraction `f_i` of its samples and a threshold `t` separates them.
//!
//! The error of threshold `t` under rates `(f0, 2f - f0)` is
//! `E(t, f0) = f0 Φ((μ0 - t)/σ0) + (2f - f0) Φ((t - μ1)/σ1)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{NucsError, Result};

/// Tolerance on `f0` feasibility checks, so closed-form rates that land a
/// few ulps outside `[lo, hi]` are still accepted.
const RATE_SLACK: f64 = 1e-12;
const SCAN_POINTS: usize = 4001;
const GOLDEN_TOL: f64 = 1e-10;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTwoClassModel {
    mu0: f64,
    mu1: f64,
    sigma0: f64,
    sigma1: f64,
    f: f64,
    swapped: bool,
}

impl GaussianTwoClassModel {
    /// Classes are relabeled so that `μ0 <= μ1`; `swapped()` reports it.
    pub fn new(mu0: f64, mu1: f64, sigma0: f64, sigma1: f64, f: f64) -> Result<Self> {
        for (name, v) in [("mu0", mu0), ("mu1", mu1)] {
            if !v.is_finite() {
                return Err(NucsError::param(name, format!("must be finite, got {v}")));
            }
        }
        for (name, v) in [("sigma0", sigma0), ("sigma1", sigma1)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(NucsError::param(name, format!("must be positive, got {v}")));
            }
        }
        if !(f > 0.0 && f <= 1.0) {
            return Err(NucsError::param(
                "f",
                format!("must lie in (0, 1], got {f}"),
            ));
        }
        Ok(if mu0 > mu1 {
            Self {
                mu0: mu1,
                mu1: mu0,
                sigma0: sigma1,
                sigma1: sigma0,
                f,
                swapped: true,
            }
        } else {
            Self {
                mu0,
                mu1,
                sigma0,
                sigma1,
                f,
                swapped: false,
            }
        })
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma1
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn swapped(&self) -> bool {
        self.swapped
    }

    /// `[max(0, 2f - 1), min(1, 2f)]`.
    pub fn feasible_f0(&self) -> (f64, f64) {
        ((2.0 * self.f - 1.0).max(0.0), (2.0 * self.f).min(1.0))
    }

    /// Per-class misclassification probabilities at threshold `t`.
    pub fn class_errors(&self, t: f64) -> (f64, f64) {
        (
            normal_cdf((self.mu0 - t) / self.sigma0),
            normal_cdf((t - self.mu1) / self.sigma1),
        )
    }

    fn check_f0(&self, f0: f64) -> Result<()> {
        let (lo, hi) = self.feasible_f0();
        if !(f0 >= lo - RATE_SLACK && f0 <= hi + RATE_SLACK) {
            return Err(NucsError::InfeasibleRate { f0, lo, hi });
        }
        Ok(())
    }

    fn error_unchecked(&self, t: f64, f0: f64) -> f64 {
        let (e0, e1) = self.class_errors(t);
        f0 * e0 + (2.0 * self.f - f0) * e1
    }

    /// Bracket wide enough that both densities are negligible outside it.
    fn threshold_bracket(&self) -> (f64, f64) {
        let spread = 8.0 * self.sigma0.max(self.sigma1);
        (self.mu0 - spread, self.mu1 + spread)
    }

    fn interior_rates(&self) -> (f64, f64) {
        // f1 first, then f0 by difference: equal deviations give f0 == f
        // exactly and σ = (1, 2), f = 0.3 gives f0 == 0.2 to the last bit
        let f1 = 2.0 * self.f * (self.sigma1 / (self.sigma0 + self.sigma1));
        (2.0 * self.f - f1, f1)
    }
}

pub fn error_rate(model: &GaussianTwoClassModel, t: f64, f0: f64) -> Result<f64> {
    model.check_f0(f0)?;
    Ok(model.error_unchecked(t, f0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Interior,
    Cap0,
    Cap1,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Interior => "interior",
            Regime::Cap0 => "cap0",
            Regime::Cap1 => "cap1",
        }
    }

    /// Regime the capping rule assigns to `model`.
    pub fn of(model: &GaussianTwoClassModel) -> Self {
        let (f0, f1) = model.interior_rates();
        if f0 > 1.0 {
            Regime::Cap0
        } else if f1 > 1.0 {
            Regime::Cap1
        } else {
            Regime::Interior
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Allocation {
    pub t: f64,
    pub f0: f64,
    pub f1: f64,
    pub regime: Regime,
}

impl Allocation {
    pub fn error(&self, model: &GaussianTwoClassModel) -> f64 {
        model.error_unchecked(self.t, self.f0)
    }
}

/// Closed-form stationary point: `t* = (σ1 μ0 + σ0 μ1) / (σ0 + σ1)` and
/// `f0* = 2f σ0 / (σ0 + σ1)`. Fails when either rate would exceed 1.
pub fn optimal_interior(model: &GaussianTwoClassModel) -> Result<Allocation> {
    let (f0, f1) = model.interior_rates();
    if f0 > 1.0 || f1 > 1.0 {
        return Err(NucsError::NotInterior { f0, f1 });
    }
    let (s0, s1) = (model.sigma0, model.sigma1);
    let t = (s1 * model.mu0 + s0 * model.mu1) / (s0 + s1);
    Ok(Allocation {
        t,
        f0,
        f1,
        regime: Regime::Interior,
    })
}

/// Threshold minimizing `E(·, f0)`: a dense scan of the bracket locates the
/// basin, golden-section search refines it. `E` need not be unimodal in `t`
/// when the deviations differ, so the scan comes first. When `f0` sits at 0
/// or `2f` the infimum is approached at an end of the bracket.
pub fn optimal_threshold(model: &GaussianTwoClassModel, f0: f64) -> Result<f64> {
    model.check_f0(f0)?;
    let (lo, hi) = model.threshold_bracket();
    let h = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let at = |i: usize| lo + h * i as f64;
    let e = |t: f64| model.error_unchecked(t, f0);
    let mut best = 0;
    let mut best_e = e(at(0));
    for i in 1..SCAN_POINTS {
        let v = e(at(i));
        if v < best_e {
            best = i;
            best_e = v;
        }
    }
    let a = at(best.saturating_sub(1));
    let b = at((best + 1).min(SCAN_POINTS - 1));
    let t = golden_min(e, a, b, GOLDEN_TOL);
    Ok(if e(t) <= best_e { t } else { at(best) })
}

fn golden_min(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while (b - a).abs() > tol {
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    0.5 * (a + b)
}

/// Rates from the capping rule; in the capped regimes the saturated class
/// keeps rate 1, the other takes `2f - 1`, and `t` is re-optimized for the
/// fixed rates. In the interior the closed form is returned unchanged.
pub fn optimal_constrained(model: &GaussianTwoClassModel) -> Allocation {
    let two_f = 2.0 * model.f;
    let (f0, f1) = match Regime::of(model) {
        Regime::Interior => {
            return optimal_interior(model).expect("interior regime has feasible rates");
        }
        Regime::Cap0 => (1.0, two_f - 1.0),
        Regime::Cap1 => (two_f - 1.0, 1.0),
    };
    let t = optimal_threshold(model, f0).expect("capped rates are feasible");
    Allocation {
        t,
        f0,
        f1,
        regime: Regime::of(model),
    }
}

/// Empirical error of threshold `t`: `round(f_i n)` draws per class,
/// weighted like `E` so it converges to `error_rate(model, t, f0)`.
pub fn monte_carlo_error(
    model: &GaussianTwoClassModel,
    t: f64,
    f0: f64,
    n_per_class: usize,
    seed: u64,
) -> Result<f64> {
    if n_per_class == 0 {
        return Err(NucsError::param("n_per_class", "must be at least 1"));
    }
    model.check_f0(f0)?;
    let f1 = 2.0 * model.f - f0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut term = |mu: f64, sigma: f64, rate: f64, wrong: &dyn Fn(f64) -> bool| -> f64 {
        let n = (rate * n_per_class as f64).round() as usize;
        if n == 0 {
            return 0.0;
        }
        let dist = Normal::new(mu, sigma).expect("validated deviation");
        let miss = (0..n).filter(|_| wrong(dist.sample(&mut rng))).count();
        rate * miss as f64 / n as f64
    };
    let e0 = term(model.mu0, model.sigma0, f0, &|x| x > t);
    let e1 = term(model.mu1, model.sigma1, f1, &|x| x <= t);
    Ok(e0 + e1)
}
