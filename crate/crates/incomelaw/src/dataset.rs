//! Ingestion and normalization of cumulative income quantile tables.
//!
//! The canonical in-memory form is a [`CumulativeSample`]: a list of
//! `(threshold, fraction at-or-above)` rows with strictly increasing
//! thresholds and strictly decreasing fractions. Everything the fitting
//! pipeline consumes is validated into this one shape, whether it arrives as
//! a canonical CSV file, a percentile table (cumulative fraction *below* each
//! threshold), or a table in a foreign currency or pay period that needs
//! [`normalize`]-ing first.
//!
//! # File formats
//!
//! Canonical: header `threshold,frac_at_or_above`, comma delimiter, `.`
//! decimal point, no thousands separators, UTF-8. Percentile: header
//! `cum_frac_below,threshold` with the same conventions.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

/// Minimum number of rows in a valid sample. Truncation searches must always
/// leave at least three points for a two-parameter fit with a degrees-of-
/// freedom check, and five rows is the smallest size that guarantees it.
pub const MIN_ROWS: usize = 5;

/// Errors from parsing and validating quantile tables.
#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    /// The file could not be read.
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    /// A column named in the schema is absent from the header row.
    #[error("missing column {name:?} in header {header:?}")]
    MissingColumn { name: String, header: String },
    /// A cell failed to parse as a number.
    #[error("row {row}: cannot parse {field} value {value:?} as a number")]
    BadNumber {
        row: usize,
        field: &'static str,
        value: String,
    },
    /// Thresholds are not strictly increasing once sorted — i.e. duplicates.
    #[error("thresholds not strictly increasing: duplicate threshold {value}")]
    NonMonotoneThresholds { value: f64 },
    /// Fractions do not strictly decrease as thresholds increase.
    ///
    /// A cumulative "fraction at or above" can only shrink as the threshold
    /// rises; data violating this does not fit a decaying cumulative
    /// distribution at all.
    #[error(
        "fractions not strictly decreasing at threshold {threshold}: \
         a rising at-or-above fraction does not fit a decaying cumulative distribution"
    )]
    NonMonotoneFractions { threshold: f64 },
    /// A fraction lies outside (0, 1].
    #[error("fraction {value} out of range: must lie in (0, 1]")]
    FractionOutOfRange { value: f64 },
    /// A threshold is negative.
    #[error("negative threshold {value}: income thresholds must be >= 0")]
    NegativeThreshold { value: f64 },
    /// Fewer data rows than [`MIN_ROWS`].
    #[error("too few rows: got {n}, need at least {min}")]
    TooFewRows { n: usize, min: usize },
    /// A percentile-table input without strictly increasing columns.
    #[error("percentile table not strictly increasing in {what} at row {row}")]
    NonMonotoneInput { what: &'static str, row: usize },
    /// Invalid country record parameters.
    #[error("invalid country record: {reason}")]
    BadRecord { reason: String },
}

/// One row of a cumulative sample: at threshold `threshold`, a fraction
/// `frac_at_or_above` of the population earns at least that much.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantileRow {
    /// Income threshold, in the sample's currency and pay period.
    pub threshold: f64,
    /// Fraction of the population with income at or above the threshold.
    pub frac_at_or_above: f64,
}

/// Pay period of the thresholds in a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Period {
    Annual,
    Monthly,
    Weekly,
}

impl Period {
    /// Multiplier that converts one period's income into annual income.
    pub fn annualization_factor(self) -> f64 {
        match self {
            Period::Annual => 1.0,
            Period::Monthly => 12.0,
            Period::Weekly => 52.0,
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Period::Annual => "annual",
            Period::Monthly => "monthly",
            Period::Weekly => "weekly",
        };
        f.write_str(s)
    }
}

/// A validated cumulative quantile table.
///
/// Invariants, enforced on construction:
/// * thresholds strictly increasing and nonnegative,
/// * fractions strictly decreasing, each in (0, 1],
/// * at least [`MIN_ROWS`] rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulativeSample {
    points: Vec<QuantileRow>,
    /// Currency the thresholds are denominated in (informational tag).
    pub currency_tag: String,
    /// Pay period of the thresholds.
    pub period_tag: Period,
}

impl CumulativeSample {
    /// Validates `points` (already sorted by threshold ascending) and wraps
    /// them into a sample.
    pub fn new(
        points: Vec<QuantileRow>,
        currency_tag: impl Into<String>,
        period_tag: Period,
    ) -> Result<Self, DatasetError> {
        if points.len() < MIN_ROWS {
            return Err(DatasetError::TooFewRows {
                n: points.len(),
                min: MIN_ROWS,
            });
        }
        for row in &points {
            if !(row.frac_at_or_above > 0.0 && row.frac_at_or_above <= 1.0) {
                return Err(DatasetError::FractionOutOfRange {
                    value: row.frac_at_or_above,
                });
            }
            if row.threshold < 0.0 {
                return Err(DatasetError::NegativeThreshold {
                    value: row.threshold,
                });
            }
        }
        for pair in points.windows(2) {
            if pair[1].threshold <= pair[0].threshold {
                return Err(DatasetError::NonMonotoneThresholds {
                    value: pair[1].threshold,
                });
            }
            if pair[1].frac_at_or_above >= pair[0].frac_at_or_above {
                return Err(DatasetError::NonMonotoneFractions {
                    threshold: pair[1].threshold,
                });
            }
        }
        Ok(Self {
            points,
            currency_tag: currency_tag.into(),
            period_tag,
        })
    }

    /// The validated rows, sorted by threshold ascending.
    pub fn points(&self) -> &[QuantileRow] {
        &self.points
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false for a valid sample (at least [`MIN_ROWS`] rows), provided
    /// for interface completeness.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The empirical fraction at-or-above an arbitrary income `x`, linearly
    /// interpolated between the two nearest sampled thresholds and clamped to
    /// the boundary fractions outside the sampled range.
    pub fn frac_at_or_above(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x <= pts[0].threshold {
            return pts[0].frac_at_or_above;
        }
        if x >= pts[pts.len() - 1].threshold {
            return pts[pts.len() - 1].frac_at_or_above;
        }
        // Binary search for the bracketing pair.
        let idx = pts.partition_point(|p| p.threshold < x);
        let (lo, hi) = (&pts[idx - 1], &pts[idx]);
        let w = (x - lo.threshold) / (hi.threshold - lo.threshold);
        lo.frac_at_or_above + w * (hi.frac_at_or_above - lo.frac_at_or_above)
    }
}

/// Maps the canonical column names onto the names used in a particular file.
#[derive(Debug, Clone)]
pub struct ColumnSchema {
    /// Name of the income-threshold column.
    pub threshold: String,
    /// Name of the fraction-at-or-above column.
    pub frac_at_or_above: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self {
            threshold: "threshold".to_owned(),
            frac_at_or_above: "frac_at_or_above".to_owned(),
        }
    }
}

/// Country metadata needed to normalize a sample into annual EUR-style units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountryRecord {
    /// ISO 3166-1 alpha-3 country code.
    pub code: String,
    /// Calendar year of the sample.
    pub year: i32,
    /// Exchange rate, local currency units per target-currency unit.
    pub lcu_rate: f64,
    /// Pay period of the source data.
    pub period: Period,
}

impl CountryRecord {
    /// Validates the code shape (three ASCII uppercase letters) and a
    /// positive exchange rate.
    pub fn new(
        code: impl Into<String>,
        year: i32,
        lcu_rate: f64,
        period: Period,
    ) -> Result<Self, DatasetError> {
        let code = code.into();
        if code.len() != 3 || !code.bytes().all(|b| b.is_ascii_uppercase()) {
            return Err(DatasetError::BadRecord {
                reason: format!("country code {code:?} is not ISO 3166-1 alpha-3"),
            });
        }
        if lcu_rate.is_nan() || lcu_rate <= 0.0 {
            return Err(DatasetError::BadRecord {
                reason: format!("exchange rate must be positive, got {lcu_rate}"),
            });
        }
        Ok(Self {
            code,
            year,
            lcu_rate,
            period,
        })
    }

    /// The annualization factor implied by the record's pay period
    /// (1, 12, or 52).
    pub fn period_factor(&self) -> f64 {
        self.period.annualization_factor()
    }
}

/// Reads a canonical-format file into a validated sample.
///
/// The file must have a header row containing the two columns named by
/// `schema` (extra columns are ignored). Rows are sorted by threshold before
/// validation, so unsorted source tables are accepted; duplicated thresholds
/// are not.
///
/// # Errors
///
/// [`DatasetError::Io`], [`DatasetError::MissingColumn`],
/// [`DatasetError::BadNumber`], and every validation error of
/// [`CumulativeSample::new`].
pub fn ingest(path: &Path, schema: &ColumnSchema) -> Result<CumulativeSample, DatasetError> {
    let text = fs::read_to_string(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ingest_str(&text, schema)
}

/// [`ingest`] over in-memory text; the parsing half of the round-trip with
/// [`emit`].
pub fn ingest_str(text: &str, schema: &ColumnSchema) -> Result<CumulativeSample, DatasetError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let names: Vec<&str> = header.split(',').map(str::trim).collect();

    let col = |name: &str| -> Result<usize, DatasetError> {
        names
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| DatasetError::MissingColumn {
                name: name.to_owned(),
                header: header.to_owned(),
            })
    };
    let threshold_col = col(&schema.threshold)?;
    let frac_col = col(&schema.frac_at_or_above)?;

    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let cell = |idx: usize, field: &'static str| -> Result<f64, DatasetError> {
            let raw = fields.get(idx).copied().unwrap_or("");
            raw.parse::<f64>().map_err(|_| DatasetError::BadNumber {
                row: lineno + 2, // 1-based, counting the header
                field,
                value: raw.to_owned(),
            })
        };
        rows.push(QuantileRow {
            threshold: cell(threshold_col, "threshold")?,
            frac_at_or_above: cell(frac_col, "frac_at_or_above")?,
        });
    }

    rows.sort_by(|a, b| a.threshold.total_cmp(&b.threshold));
    CumulativeSample::new(rows, "", Period::Annual)
}

/// Serializes a sample back to canonical CSV text.
///
/// Numbers are printed with Rust's shortest round-trip float formatting, so
/// `ingest_str(&emit(&s)) == s` bit for bit.
pub fn emit(sample: &CumulativeSample) -> String {
    let mut out = String::from("threshold,frac_at_or_above\n");
    for row in sample.points() {
        out.push_str(&format!("{},{}\n", row.threshold, row.frac_at_or_above));
    }
    out
}

/// Builds a sample from a percentile table: pairs of
/// `(cumulative population fraction below, threshold)`.
///
/// Each output row keeps the threshold and complements the fraction:
/// `frac_at_or_above = 1 - cum_frac_below`.
///
/// # Errors
///
/// [`DatasetError::NonMonotoneInput`] when either column fails to strictly
/// increase, [`DatasetError::FractionOutOfRange`] for fractions outside
/// (0, 1), plus the validation errors of [`CumulativeSample::new`].
pub fn from_percentile_table(percentiles: &[(f64, f64)]) -> Result<CumulativeSample, DatasetError> {
    for (i, pair) in percentiles.windows(2).enumerate() {
        if pair[1].0 <= pair[0].0 {
            return Err(DatasetError::NonMonotoneInput {
                what: "cum_frac_below",
                row: i + 1,
            });
        }
        if pair[1].1 <= pair[0].1 {
            return Err(DatasetError::NonMonotoneInput {
                what: "threshold",
                row: i + 1,
            });
        }
    }
    for &(cum, _) in percentiles {
        if !(cum > 0.0 && cum < 1.0) {
            return Err(DatasetError::FractionOutOfRange { value: cum });
        }
    }
    let rows = percentiles
        .iter()
        .map(|&(cum, threshold)| QuantileRow {
            threshold,
            frac_at_or_above: 1.0 - cum,
        })
        .collect();
    CumulativeSample::new(rows, "", Period::Annual)
}

/// Converts a sample into annual units of the target currency: every
/// threshold becomes `threshold * period_factor / lcu_rate`, fractions are
/// untouched, and the period tag becomes [`Period::Annual`].
pub fn normalize(
    sample: &CumulativeSample,
    rec: &CountryRecord,
) -> Result<CumulativeSample, DatasetError> {
    let factor = rec.period_factor() / rec.lcu_rate;
    let points = sample
        .points()
        .iter()
        .map(|row| QuantileRow {
            threshold: row.threshold * factor,
            frac_at_or_above: row.frac_at_or_above,
        })
        .collect();
    CumulativeSample::new(points, rec.code.clone(), Period::Annual)
}
