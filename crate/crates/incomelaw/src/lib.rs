//! Fitting and analysis of shifted-exponential income distributions.
//!
//! The bulk of personal income in a population follows a two-parameter
//! exponential law: the fraction of people earning at least `x` is
//! `P(t >= x) = exp(-(x - mu) / theta)` for `x >= mu`, where `mu` is the
//! support edge (the lowest income observed in the market) and `theta` is the
//! decay scale (the mean income in excess of `mu`). On a log scale the law is
//! a straight line, which makes ordinary least squares the natural estimator —
//! provided the sample is first truncated to the range where the law holds.
//!
//! The crate is organised around that pipeline:
//!
//! * [`dataset`] — ingestion, validation, and normalization of cumulative
//!   quantile tables (threshold, fraction at-or-above).
//! * [`regress`] — ordinary least squares with full diagnostics (standard
//!   errors, t-statistics, two-sided p-values, R², adjusted R², Pearson r),
//!   implemented from scratch for reproducibility.
//! * [`expofit`] — the two truncation-based estimators of `(theta, mu)`: a
//!   two-stage cut (max-adjusted-R² upper cut, then a lower cut at the implied
//!   support edge) and an iterative lower-truncation loop that accepts only a
//!   self-consistent estimate.
//! * [`allocsim`] — exact enumeration, multiplicity counting, and uniform
//!   sampling of integer income allocations; the combinatorial ground truth
//!   behind the exponential shape.
//! * [`econ`] — quantities derived from a fitted law: the Gini coefficient and
//!   a cross-country regression of the support edge on unemployment
//!   compensation, with an embedded 26-country panel.
//!
//! # Example
//!
//! ```
//! use incomelaw::{econ, expofit, CumulativeSample, Period, QuantileRow, TruncationConfig};
//!
//! // Five exact points of the law with decay scale 10_000 and support edge 5_000.
//! let rows: Vec<QuantileRow> = [0.9_f64, 0.7, 0.5, 0.3, 0.1]
//!     .iter()
//!     .map(|&p| QuantileRow {
//!         threshold: 5_000.0 + 10_000.0 * (1.0 / p).ln(),
//!         frac_at_or_above: p,
//!     })
//!     .collect();
//! let sample = CumulativeSample::new(rows, "EUR", Period::Annual)?;
//!
//! let fit = expofit::fit(&sample, &TruncationConfig::default())?;
//! assert!((fit.law.theta - 10_000.0).abs() < 1e-6);
//! assert!((fit.law.mu - 5_000.0).abs() < 1e-6);
//!
//! // mu/theta = 0.5 puts the Gini coefficient at exactly 1/3.
//! let gini = econ::gini_from_fit(&fit.law)?;
//! assert!((gini.g - 1.0 / 3.0).abs() < 1e-9);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod allocsim;
pub mod dataset;
pub mod econ;
pub mod expofit;
pub mod regress;

mod special;

#[cfg(test)]
pub(crate) mod testutil;

pub use allocsim::{Allocation, AllocationSpace, Occupancy};
pub use dataset::{ColumnSchema, CountryRecord, CumulativeSample, Period, QuantileRow};
pub use econ::{CountryEconRow, GiniValue};
pub use expofit::{ExponentialLaw, FitMode, FitResult, TruncationConfig};
pub use regress::RegressionSummary;
