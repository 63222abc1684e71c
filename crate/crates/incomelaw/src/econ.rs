//! Economic quantities derived from a fitted law.
//!
//! Two things live here: the Gini coefficient of the shifted-exponential
//! law, `G = 1 / (2 (1 + mu/theta))`, and a cross-country regression of the
//! support edge `mu` on unemployment compensation, run against an embedded
//! 26-country, 4-year European panel (all values in EUR, compensation
//! already exchange-rate adjusted).

use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::expofit::ExponentialLaw;
use crate::regress::{ols_fit, RegressError, RegressionSummary};

/// Embedded panel: one row per country-year.
const PANEL_CSV: &str = include_str!("../data/country_mu_uc.csv");

/// Errors from the derived-quantity calculations.
#[derive(Debug, Error, PartialEq)]
pub enum EconError {
    /// A law outside the valid parameter region.
    #[error("invalid law: theta {theta} must be > 0 and mu {mu} must be >= 0")]
    InvalidLaw { theta: f64, mu: f64 },
    /// Not enough panel rows for the requested year.
    #[error("too few rows for a regression: got {n}, need at least {min}")]
    TooFewPoints { n: usize, min: usize },
    /// Nonpositive exchange rate.
    #[error("exchange rate must be positive, got {rate}")]
    InvalidRate { rate: f64 },
    /// An underlying regression failure.
    #[error("regression failed: {0}")]
    Regression(#[from] RegressError),
}

/// One embedded panel row: a country-year with its fitted support edge and
/// exchange-rate-adjusted unemployment compensation, both in EUR.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountryEconRow {
    /// ISO 3166-1 alpha-3 country code.
    pub code: String,
    /// Calendar year.
    pub year: i32,
    /// Fitted support edge (marginal labor-capital return), EUR.
    pub mu: f64,
    /// Adjusted annual unemployment compensation, EUR.
    pub uc_adjusted: f64,
}

/// A Gini coefficient of a shifted-exponential law; always in (0, 0.5].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GiniValue {
    /// The coefficient, `1 / (2 (1 + mu/theta))`.
    pub g: f64,
}

/// Gini coefficient of the law: `G = 1 / (2 (1 + mu/theta))`.
///
/// Strictly decreasing in `mu/theta`, equal to 0.5 exactly when `mu = 0`
/// (the pure exponential) and approaching 0 as the support edge dominates
/// the decay scale.
///
/// # Errors
///
/// [`EconError::InvalidLaw`] unless `theta > 0` and `mu >= 0`.
pub fn gini_from_fit(law: &ExponentialLaw) -> Result<GiniValue, EconError> {
    if law.theta.is_nan() || law.mu.is_nan() || law.theta <= 0.0 || law.mu < 0.0 {
        return Err(EconError::InvalidLaw {
            theta: law.theta,
            mu: law.mu,
        });
    }
    Ok(GiniValue {
        g: 1.0 / (2.0 * (1.0 + law.mu / law.theta)),
    })
}

/// OLS of `mu` on `uc_adjusted` over the rows of one year, with full
/// diagnostics.
///
/// # Errors
///
/// [`EconError::TooFewPoints`] when the year has fewer than 3 rows.
pub fn cross_country_regression(
    rows: &[CountryEconRow],
    year: i32,
) -> Result<RegressionSummary, EconError> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.year == year)
        .map(|r| (r.uc_adjusted, r.mu))
        .unzip();
    if xs.len() < 3 {
        return Err(EconError::TooFewPoints {
            n: xs.len(),
            min: 3,
        });
    }
    Ok(ols_fit(&xs, &ys)?)
}

/// Converts unemployment compensation from local currency units to EUR:
/// `uc_lcu / lcu_rate`.
pub fn adjust_uc(uc_lcu: f64, lcu_rate: f64) -> Result<f64, EconError> {
    if lcu_rate.is_nan() || lcu_rate <= 0.0 {
        return Err(EconError::InvalidRate { rate: lcu_rate });
    }
    Ok(uc_lcu / lcu_rate)
}

/// The embedded 26-country panel (2011–2014), parsed once on first use.
pub fn embedded_rows() -> &'static [CountryEconRow] {
    static ROWS: OnceLock<Vec<CountryEconRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        PANEL_CSV
            .lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let mut fields = line.split(',');
                let mut next = || fields.next().expect("embedded panel row has 4 fields");
                CountryEconRow {
                    code: next().to_owned(),
                    year: next().parse().expect("embedded panel year parses"),
                    mu: next().parse().expect("embedded panel mu parses"),
                    uc_adjusted: next().parse().expect("embedded panel uc parses"),
                }
            })
            .collect()
    })
}

/// The years present in the embedded panel.
pub const PANEL_YEARS: [i32; 4] = [2011, 2012, 2013, 2014];
