//! Fitting the shifted-exponential income law to cumulative quantile data.
//!
//! The model is `P(t >= x) = exp(-(x - mu)/theta)` on `x >= mu`. Taking logs
//! gives the line `y = slope*x + intercept` with `slope = -1/theta` and
//! `intercept = mu/theta`, so the two parameters are recovered from an OLS
//! fit as `theta = -1/slope` and `mu = -intercept/slope`.
//!
//! Real quantile tables deviate from the line in two places: a heavy upper
//! tail (the very top incomes decay slower than exponentially) and a lower
//! region below the support edge `mu`. Two truncation strategies are
//! provided:
//!
//! * [`fit_two_stage`] — drop upper points by maximizing adjusted R², then
//!   drop points below the implied `mu`, then refit once.
//! * [`fit_corollary1`] — iterate lower truncation to a fixed point: the
//!   accepted window starts exactly at the first threshold at or above its
//!   own fitted `mu`, and its points are negatively correlated.

use serde::Serialize;
use thiserror::Error;

use crate::dataset::{CumulativeSample, QuantileRow};
use crate::regress::{ols_fit, pearson, RegressError, RegressionSummary};

/// Errors from the fitting pipeline.
#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    /// A cumulative fraction of zero has no logarithm.
    #[error("cannot take the log of a zero fraction at threshold {threshold}")]
    ZeroFraction { threshold: f64 },
    /// Not enough points to run the requested truncation search.
    #[error("too few points: got {n}, need at least {min}")]
    TooFewPoints { n: usize, min: usize },
    /// The fitted log-fraction slope is nonnegative, so the data do not
    /// decay; no exponential law exists for them.
    #[error(
        "fitted slope {slope} is not negative: the points do not fit a \
         decaying exponential law"
    )]
    NotExponentialDecay { slope: f64 },
    /// Lower truncation at the estimated support edge removed every point.
    #[error("estimated support edge {mu} is above every threshold; nothing left to fit")]
    AllPointsBelowMu { mu: f64 },
    /// No tail window of the data has Pearson correlation below the
    /// acceptance margin, so the iterative estimator cannot start (or
    /// continue); the sample does not fit a decaying exponential law.
    #[error(
        "no tail window shows the required negative income/log-fraction \
         correlation; the sample does not fit a decaying exponential law"
    )]
    NoNegativeCorrelation,
    /// The iterative estimator hit its iteration cap without reaching a
    /// fixed point.
    #[error("lower-truncation loop did not converge within {iterations} iterations")]
    NonConvergent { iterations: usize },
    /// Parameters that do not describe a valid law.
    #[error("invalid law: theta {theta} must be > 0 and mu {mu} must be >= 0")]
    InvalidLaw { theta: f64, mu: f64 },
    /// A structurally invalid [`TruncationConfig`].
    #[error("invalid truncation config: {reason}")]
    InvalidConfig { reason: String },
    /// An underlying regression failure.
    #[error("regression failed: {0}")]
    Regression(#[from] RegressError),
}

/// The shifted-exponential law `P(t >= x) = exp(-(x - mu)/theta)`.
///
/// `theta` is the decay scale (mean income in excess of `mu`); `mu` is the
/// support edge. Fit results construct this directly so that pathological
/// estimates (e.g. a slightly negative `mu` on noisy data) stay
/// representable; use [`ExponentialLaw::new`] where validity is required.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentialLaw {
    /// Decay scale, > 0 for a valid law.
    pub theta: f64,
    /// Support edge, >= 0 for a valid law.
    pub mu: f64,
}

impl ExponentialLaw {
    /// Constructs a validated law: `theta > 0` and `mu >= 0`.
    pub fn new(theta: f64, mu: f64) -> Result<Self, FitError> {
        if theta.is_nan() || mu.is_nan() || theta <= 0.0 || mu < 0.0 {
            return Err(FitError::InvalidLaw { theta, mu });
        }
        Ok(Self { theta, mu })
    }

    /// The model fraction of the population at or above income `x`
    /// (1 below the support edge).
    pub fn frac_at_or_above(&self, x: f64) -> f64 {
        if x <= self.mu {
            1.0
        } else {
            (-(x - self.mu) / self.theta).exp()
        }
    }

    /// Mean income under the law: `mu + theta`.
    pub fn mean(&self) -> f64 {
        self.mu + self.theta
    }
}

/// Which truncation strategy a fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FitMode {
    /// Max-adjusted-R² upper cut, then one lower cut at the implied `mu`.
    TwoStage,
    /// Iterated lower truncation to a fixed point with a negative-correlation
    /// acceptance test.
    Corollary1,
}

/// Tuning knobs for the truncation searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationConfig {
    /// Minimum number of points any upper-truncated fit may keep (>= 3).
    pub min_points: usize,
    /// Largest fraction of the sample the upper cut may remove, in (0, 1).
    pub max_upper_drop_frac: f64,
    /// Iteration cap for the fixed-point mode (>= 1).
    pub max_iterations: usize,
    /// Strategy selector.
    pub mode: FitMode,
    /// Acceptance margin for the iterative mode: a tail window qualifies
    /// only when its Pearson correlation is strictly below this value.
    /// Must be <= 0; the default 0 demands strictly negative correlation.
    pub corr_margin: f64,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self {
            min_points: 5,
            max_upper_drop_frac: 0.5,
            max_iterations: 20,
            mode: FitMode::TwoStage,
            corr_margin: 0.0,
        }
    }
}

impl TruncationConfig {
    /// Checks the structural invariants of the configuration.
    pub fn validate(&self) -> Result<(), FitError> {
        if self.min_points < 3 {
            return Err(FitError::InvalidConfig {
                reason: format!("min_points must be >= 3, got {}", self.min_points),
            });
        }
        if !(self.max_upper_drop_frac > 0.0 && self.max_upper_drop_frac < 1.0) {
            return Err(FitError::InvalidConfig {
                reason: format!(
                    "max_upper_drop_frac must lie in (0, 1), got {}",
                    self.max_upper_drop_frac
                ),
            });
        }
        if self.max_iterations == 0 {
            return Err(FitError::InvalidConfig {
                reason: "max_iterations must be >= 1".to_owned(),
            });
        }
        if self.corr_margin.is_nan() || self.corr_margin > 0.0 {
            return Err(FitError::InvalidConfig {
                reason: format!("corr_margin must be <= 0, got {}", self.corr_margin),
            });
        }
        Ok(())
    }
}

/// A completed fit: the law, the regression it came from, and where the
/// truncation cuts landed.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    /// The fitted law (`theta = -1/slope`, `mu = -intercept/slope`).
    pub law: ExponentialLaw,
    /// OLS diagnostics of the final retained window.
    pub summary: RegressionSummary,
    /// Index of the first retained point in the threshold-sorted sample.
    pub lower_index: usize,
    /// Number of points removed from the top of the sample.
    pub upper_drop_count: usize,
    /// Population fraction below the first retained threshold.
    pub frac_below_xmin: f64,
    /// Population fraction above the last retained threshold.
    pub frac_above_xmax: f64,
    /// First retained threshold.
    pub x_min: f64,
    /// Last retained threshold.
    pub x_max: f64,
    /// Number of lower-truncation rounds performed.
    pub iterations: usize,
    /// Every intermediate `mu` estimate, in order.
    pub mu_history: Vec<f64>,
}

/// Log-transforms cumulative rows into `(threshold, ln fraction)` points.
///
/// # Errors
///
/// [`FitError::ZeroFraction`] when a fraction is zero (its log diverges);
/// negative fractions are rejected the same way since they cannot arise from
/// a validated sample.
pub fn log_transform(rows: &[QuantileRow]) -> Result<Vec<(f64, f64)>, FitError> {
    rows.iter()
        .map(|row| {
            if row.frac_at_or_above <= 0.0 {
                Err(FitError::ZeroFraction {
                    threshold: row.threshold,
                })
            } else {
                Ok((row.threshold, row.frac_at_or_above.ln()))
            }
        })
        .collect()
}

fn split(points: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>) {
    points.iter().copied().unzip()
}

/// Scans every admissible upper drop count and returns the one whose OLS fit
/// on the remaining prefix has the largest adjusted R².
///
/// Drop counts range over `0 ..= min(floor(max_upper_drop_frac * n),
/// n - min_points)`; ties go to the smaller drop (retain maximal data).
pub fn upper_truncate_max_r2(
    points: &[(f64, f64)],
    cfg: &TruncationConfig,
) -> Result<(usize, RegressionSummary), FitError> {
    cfg.validate()?;
    let n = points.len();
    if n < cfg.min_points {
        return Err(FitError::TooFewPoints {
            n,
            min: cfg.min_points,
        });
    }
    let (xs, ys) = split(points);
    let max_drop = ((cfg.max_upper_drop_frac * n as f64).floor() as usize).min(n - cfg.min_points);
    let mut best: Option<(usize, RegressionSummary)> = None;
    for drop in 0..=max_drop {
        let summary = ols_fit(&xs[..n - drop], &ys[..n - drop])?;
        let improves = match &best {
            None => true,
            Some((_, incumbent)) => summary.r2_adj > incumbent.r2_adj,
        };
        if improves {
            best = Some((drop, summary));
        }
    }
    Ok(best.expect("scan visits drop 0"))
}

/// Index of the first retained point, paired with the retained tail.
pub type LowerCut<'a> = (usize, &'a [(f64, f64)]);

/// Splits off the points below `mu`: returns the index of the first
/// threshold at or above `mu` and the retained tail.
///
/// When `mu` is below the smallest threshold the cut is a no-op
/// (`start_index` 0).
pub fn lower_truncate(points: &[(f64, f64)], mu: f64) -> Result<LowerCut<'_>, FitError> {
    let start = points.partition_point(|p| p.0 < mu);
    if start == points.len() {
        return Err(FitError::AllPointsBelowMu { mu });
    }
    Ok((start, &points[start..]))
}

/// The core of a fit before sample-level bookkeeping is attached.
#[derive(Debug)]
struct PointsFit {
    summary: RegressionSummary,
    lower_index: usize,
    upper_drop_count: usize,
    iterations: usize,
    mu_history: Vec<f64>,
}

fn mu_estimate(summary: &RegressionSummary) -> f64 {
    -summary.intercept / summary.slope
}

fn two_stage_points(points: &[(f64, f64)], cfg: &TruncationConfig) -> Result<PointsFit, FitError> {
    let (drop, stage1) = upper_truncate_max_r2(points, cfg)?;
    if stage1.slope >= 0.0 {
        return Err(FitError::NotExponentialDecay {
            slope: stage1.slope,
        });
    }
    let mu1 = mu_estimate(&stage1);
    let kept = &points[..points.len() - drop];
    let (start, retained) = lower_truncate(kept, mu1)?;
    if retained.len() < 3 {
        return Err(FitError::TooFewPoints {
            n: retained.len(),
            min: 3,
        });
    }
    let (xs, ys) = split(retained);
    let summary = ols_fit(&xs, &ys)?;
    if summary.slope >= 0.0 {
        return Err(FitError::NotExponentialDecay {
            slope: summary.slope,
        });
    }
    let mu_final = mu_estimate(&summary);
    Ok(PointsFit {
        summary,
        lower_index: start,
        upper_drop_count: drop,
        iterations: 1,
        mu_history: vec![mu1, mu_final],
    })
}

fn corollary1_points(points: &[(f64, f64)], cfg: &TruncationConfig) -> Result<PointsFit, FitError> {
    cfg.validate()?;
    let n = points.len();
    if n < 3 {
        return Err(FitError::TooFewPoints { n, min: 3 });
    }
    let (xs, ys) = split(points);
    // A window qualifies when it is large enough to regress on and its
    // correlation clears the margin. Degenerate windows never qualify.
    let qualifies = |l: usize| -> bool {
        n - l >= 3 && matches!(pearson(&xs[l..], &ys[l..]), Ok(r) if r < cfg.corr_margin)
    };
    let scan_from = |start: usize| (start..=n - 3).find(|&l| qualifies(l));

    let mut window = scan_from(0).ok_or(FitError::NoNegativeCorrelation)?;
    let mut mu_history = Vec::new();
    for iteration in 1..=cfg.max_iterations {
        let summary = ols_fit(&xs[window..], &ys[window..])?;
        let mu = mu_estimate(&summary);
        mu_history.push(mu);
        let cut = points.partition_point(|p| p.0 < mu);
        if cut == n {
            return Err(FitError::AllPointsBelowMu { mu });
        }
        if cut == window {
            // Fixed point: the window starts exactly at the first threshold
            // at or above its own mu estimate, and its correlation already
            // cleared the margin when the window was chosen.
            return Ok(PointsFit {
                summary,
                lower_index: window,
                upper_drop_count: 0,
                iterations: iteration,
                mu_history,
            });
        }
        window = scan_from(cut).ok_or(FitError::NoNegativeCorrelation)?;
    }
    Err(FitError::NonConvergent {
        iterations: cfg.max_iterations,
    })
}

fn assemble(sample: &CumulativeSample, points: &[(f64, f64)], core: PointsFit) -> FitResult {
    let x_min = points[core.lower_index].0;
    let x_max = points[points.len() - 1 - core.upper_drop_count].0;
    let law = ExponentialLaw {
        theta: -1.0 / core.summary.slope,
        mu: mu_estimate(&core.summary),
    };
    FitResult {
        law,
        summary: core.summary,
        lower_index: core.lower_index,
        upper_drop_count: core.upper_drop_count,
        frac_below_xmin: 1.0 - sample.frac_at_or_above(x_min),
        frac_above_xmax: sample.frac_at_or_above(x_max),
        x_min,
        x_max,
        iterations: core.iterations,
        mu_history: core.mu_history,
    }
}

/// Two-stage fit: log-transform, upper cut by max adjusted R², lower cut at
/// the implied support edge, one refit.
pub fn fit_two_stage(
    sample: &CumulativeSample,
    cfg: &TruncationConfig,
) -> Result<FitResult, FitError> {
    let points = log_transform(sample.points())?;
    let core = two_stage_points(&points, cfg)?;
    Ok(assemble(sample, &points, core))
}

/// Iterative lower-truncation fit.
///
/// Starting from the smallest window whose correlation clears the margin,
/// the loop regresses, computes `mu`, moves the window start to the first
/// threshold at or above `mu` (re-scanning forward if that window's
/// correlation fails the margin), and accepts once the window reproduces its
/// own start index. On acceptance both conditions hold: the window's
/// correlation is below the margin, and its `mu` lies strictly above the
/// threshold before the window and at or below its first threshold.
///
/// The sample is used as supplied; callers aware of a heavy upper tail
/// should remove it before calling (see [`fit_two_stage`] for the automated
/// alternative).
pub fn fit_corollary1(
    sample: &CumulativeSample,
    cfg: &TruncationConfig,
) -> Result<FitResult, FitError> {
    let points = log_transform(sample.points())?;
    let core = corollary1_points(&points, cfg)?;
    Ok(assemble(sample, &points, core))
}

/// Dispatches on `cfg.mode`.
pub fn fit(sample: &CumulativeSample, cfg: &TruncationConfig) -> Result<FitResult, FitError> {
    match cfg.mode {
        FitMode::TwoStage => fit_two_stage(sample, cfg),
        FitMode::Corollary1 => fit_corollary1(sample, cfg),
    }
}
