//! Simple linear regression with full diagnostics, from scratch.
//!
//! Everything downstream of this module — the truncation fits, the
//! cross-country regression, the correlation tests in the allocation
//! simulator — consumes a [`RegressionSummary`], so the diagnostics are
//! computed once, here, and nowhere else.
//!
//! All sums are centered (deviations from the mean) for numerical stability.
//! Two-sided p-values come from the Student t distribution via the
//! regularized incomplete beta function in [`crate::special`].

use serde::Serialize;
use thiserror::Error;

use crate::special::regularized_incomplete_beta;

/// Smallest p-value ever returned. Exact zeros are clamped here so that
/// downstream code may take logarithms of p-values without guards.
const MIN_P_VALUE: f64 = 1e-300;

/// Errors from the regression routines.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegressError {
    /// The two input slices have different lengths.
    #[error("input length mismatch: {xs} x-values vs {ys} y-values")]
    LengthMismatch { xs: usize, ys: usize },
    /// Fewer points than the routine can fit a two-parameter line to.
    #[error("too few points: got {n}, need at least {min}")]
    TooFewPoints { n: usize, min: usize },
    /// All x-values are equal, so no slope is identifiable.
    #[error("degenerate x-values: zero variance")]
    DegenerateX,
    /// All y-values are equal, so the correlation is undefined.
    #[error("degenerate y-values: zero variance")]
    DegenerateY,
    /// Degrees of freedom smaller than one.
    #[error("invalid degrees of freedom: must be >= 1")]
    InvalidDf,
}

/// Ordinary-least-squares fit of `y = slope * x + intercept`, with the
/// diagnostics usually reported alongside it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionSummary {
    /// Estimated slope.
    pub slope: f64,
    /// Estimated intercept.
    pub intercept: f64,
    /// Standard error of the slope.
    pub se_slope: f64,
    /// Standard error of the intercept.
    pub se_intercept: f64,
    /// t-statistic of the slope (slope / se_slope).
    pub t_slope: f64,
    /// t-statistic of the intercept.
    pub t_intercept: f64,
    /// Two-sided p-value of the slope, df = n - 2.
    pub p_slope: f64,
    /// Two-sided p-value of the intercept, df = n - 2.
    pub p_intercept: f64,
    /// Coefficient of determination.
    pub r2: f64,
    /// Adjusted R² with two estimated parameters: 1 - (1 - r2)(n-1)/(n-2).
    pub r2_adj: f64,
    /// Pearson correlation between x and y.
    pub pearson_r: f64,
    /// Number of points.
    pub n: usize,
    /// Residual variance estimate, SSE / (n - 2).
    pub residual_variance: f64,
}

/// Fits `y = slope * x + intercept` by ordinary least squares and returns the
/// full diagnostic summary.
///
/// Requires at least three points (so the residual variance has at least one
/// degree of freedom) and non-constant `xs`. Constant `ys` are permitted: the
/// fit is then the exact horizontal line, reported with `r2 = 1`, zero
/// residual variance, and `pearson_r = 0` (no correlation is measurable).
///
/// # Errors
///
/// [`RegressError::LengthMismatch`], [`RegressError::TooFewPoints`] (n < 3),
/// or [`RegressError::DegenerateX`] when all x-values coincide.
pub fn ols_fit(xs: &[f64], ys: &[f64]) -> Result<RegressionSummary, RegressError> {
    if xs.len() != ys.len() {
        return Err(RegressError::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    let n = xs.len();
    if n < 3 {
        return Err(RegressError::TooFewPoints { n, min: 3 });
    }

    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;

    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(RegressError::DegenerateX);
    }

    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    // Residual sum of squares from the residuals themselves (not the
    // algebraic shortcut syy - slope * sxy), so the orthogonality identities
    // sum(e) = sum(x e) = 0 hold as tightly as the coefficients allow.
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();

    let df = (n - 2) as f64;
    let residual_variance = sse / df;
    let se_slope = (residual_variance / sxx).sqrt();
    let se_intercept = (residual_variance * (1.0 / nf + mean_x * mean_x / sxx)).sqrt();

    let (r2, pearson_r) = if syy == 0.0 {
        // Constant response: the horizontal line fits exactly, and no
        // correlation is defined; report the conventional (1, 0) pair.
        (1.0, 0.0)
    } else {
        ((1.0 - sse / syy).clamp(0.0, 1.0), sxy / (sxx * syy).sqrt())
    };
    let r2_adj = 1.0 - (1.0 - r2) * (nf - 1.0) / (nf - 2.0);

    let t_slope = t_statistic(slope, se_slope);
    let t_intercept = t_statistic(intercept, se_intercept);
    let p_slope = student_t_pvalue(t_slope, n - 2)?;
    let p_intercept = student_t_pvalue(t_intercept, n - 2)?;

    Ok(RegressionSummary {
        slope,
        intercept,
        se_slope,
        se_intercept,
        t_slope,
        t_intercept,
        p_slope,
        p_intercept,
        r2,
        r2_adj,
        pearson_r,
        n,
        residual_variance,
    })
}

/// Coefficient over standard error, with the exact-fit convention that a zero
/// coefficient over a zero standard error is "no evidence", t = 0.
fn t_statistic(coef: f64, se: f64) -> f64 {
    if se > 0.0 {
        coef / se
    } else if coef == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(coef)
    }
}

/// Pearson correlation coefficient between `xs` and `ys`.
///
/// # Errors
///
/// As [`ols_fit`], plus [`RegressError::DegenerateY`] when all y-values
/// coincide (the correlation is 0/0 there).
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, RegressError> {
    if xs.len() != ys.len() {
        return Err(RegressError::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    let n = xs.len();
    if n < 3 {
        return Err(RegressError::TooFewPoints { n, min: 3 });
    }

    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(RegressError::DegenerateX);
    }
    if syy == 0.0 {
        return Err(RegressError::DegenerateY);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p-value of a Student t statistic: `P(|T_df| >= |t|)`.
///
/// Uses the identity `P(|T| >= t) = I_{df/(df+t^2)}(df/2, 1/2)` with the
/// regularized incomplete beta function. Values below 1e-300 are clamped so
/// the result is always a usable positive probability.
///
/// # Errors
///
/// [`RegressError::InvalidDf`] when `df` is zero.
pub fn student_t_pvalue(t: f64, df: usize) -> Result<f64, RegressError> {
    if df == 0 {
        return Err(RegressError::InvalidDf);
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let dff = df as f64;
    let x = dff / (dff + t * t);
    let p = regularized_incomplete_beta(dff / 2.0, 0.5, x);
    Ok(p.clamp(MIN_P_VALUE, 1.0))
}
