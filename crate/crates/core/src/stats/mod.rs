//! Statistical engine: one-way ANOVA, Welch's two-sample t-test,
//! quartile/IQR outlier detection, and the distribution CDFs they need.
//!
//! Everything is generic over the scalar type through [`FloatScalar`];
//! the crate root re-exports `f64` aliases for everyday use. Sample
//! variance uses the n−1 denominator throughout, and all p-values are
//! two-sided.

mod special;

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use special::{f_cdf, incomplete_beta, ln_beta, ln_gamma, t_cdf};

/// Floating-point scalar the statistics are computed over: f32 or f64.
pub trait FloatScalar: Float + FromPrimitive + Debug {}

impl FloatScalar for f32 {}
impl FloatScalar for f64 {}

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("empty sample `{0}`")]
    EmptySample(String),
    #[error("group `{0}` needs at least 2 values")]
    DegenerateGroup(String),
    #[error("need at least {required} values, got {got}")]
    TooFewValues { required: usize, got: usize },
    #[error("need at least 2 groups")]
    TooFewGroups,
    #[error("duplicate group label `{0}`")]
    DuplicateLabel(String),
    #[error("F statistic undefined: zero variance both between and within groups")]
    UndefinedF,
    #[error("t statistic undefined: both samples have zero variance and equal means")]
    UndefinedT,
    #[error("sample `{0}` has zero variance")]
    ZeroVariance(String),
    #[error("quartile bounds require q3 >= q1")]
    InvertedQuartiles,
    #[error("{0}")]
    Domain(&'static str),
    #[error("continued fraction did not converge")]
    NoConvergence,
    #[error("table parse error at line {line}: {reason}")]
    TableParse { line: usize, reason: String },
}

/// A labelled sample of real values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet<T> {
    pub label: String,
    pub values: Vec<T>,
}

impl<T: FloatScalar> SampleSet<T> {
    pub fn new(label: impl Into<String>, values: Vec<T>) -> Self {
        Self { label: label.into(), values }
    }

    pub fn mean(&self) -> Result<T, StatsError> {
        if self.values.is_empty() {
            return Err(StatsError::EmptySample(self.label.clone()));
        }
        Ok(mean(&self.values))
    }

    /// Sample variance with the n−1 denominator.
    pub fn variance(&self) -> Result<T, StatsError> {
        if self.values.len() < 2 {
            return Err(StatsError::DegenerateGroup(self.label.clone()));
        }
        Ok(sample_variance(&self.values))
    }
}

pub fn mean<T: FloatScalar>(values: &[T]) -> T {
    let sum = values.iter().fold(T::zero(), |acc, &v| acc + v);
    sum / T::from_usize(values.len()).unwrap()
}

pub fn sample_variance<T: FloatScalar>(values: &[T]) -> T {
    let m = mean(values);
    let ss = values.iter().fold(T::zero(), |acc, &v| {
        let d = v - m;
        acc + d * d
    });
    ss / T::from_usize(values.len() - 1).unwrap()
}

/// Result of a single-factor analysis of variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult<T> {
    pub f_stat: T,
    pub df_between: usize,
    pub df_within: usize,
    pub p_value: T,
}

/// Classical between/within decomposition over two or more groups.
///
/// p = 1 − F-CDF(f; df_between, df_within). A zero within-group variance
/// with non-zero between-group variance yields an infinite F with p = 0;
/// zero variance on both axes is undefined and rejected.
pub fn one_way_anova<T: FloatScalar>(groups: &[SampleSet<T>]) -> Result<AnovaResult<T>, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups);
    }
    for (i, g) in groups.iter().enumerate() {
        if g.values.len() < 2 {
            return Err(StatsError::DegenerateGroup(g.label.clone()));
        }
        if groups[..i].iter().any(|other| other.label == g.label) {
            return Err(StatsError::DuplicateLabel(g.label.clone()));
        }
    }

    let total_n: usize = groups.iter().map(|g| g.values.len()).sum();
    let grand_sum = groups
        .iter()
        .fold(T::zero(), |acc, g| acc + g.values.iter().fold(T::zero(), |a, &v| a + v));
    let grand_mean = grand_sum / T::from_usize(total_n).unwrap();

    let mut ss_between = T::zero();
    let mut ss_within = T::zero();
    for g in groups {
        let m = mean(&g.values);
        let n = T::from_usize(g.values.len()).unwrap();
        let d = m - grand_mean;
        ss_between = ss_between + n * d * d;
        ss_within = ss_within
            + g.values.iter().fold(T::zero(), |acc, &v| {
                let e = v - m;
                acc + e * e
            });
    }

    let df_between = groups.len() - 1;
    let df_within = total_n - groups.len();
    let ms_between = ss_between / T::from_usize(df_between).unwrap();
    let ms_within = ss_within / T::from_usize(df_within).unwrap();

    let f_stat = if ms_within > T::zero() {
        ms_between / ms_within
    } else if ms_between > T::zero() {
        T::infinity()
    } else {
        return Err(StatsError::UndefinedF);
    };

    let p_value = T::one() - f_cdf(f_stat, T::from_usize(df_between).unwrap(), T::from_usize(df_within).unwrap())?;
    Ok(AnovaResult { f_stat, df_between, df_within, p_value })
}

/// Result of Welch's two-sample t-test (unequal variances).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelchResult<T> {
    pub t_stat: T,
    /// Welch–Satterthwaite degrees of freedom (non-integer in general).
    pub df: T,
    /// Two-sided p-value.
    pub p_value: T,
}

/// Welch's t-test: t = (m_a − m_b) / sqrt(s²_a/n_a + s²_b/n_b), with
/// Welch–Satterthwaite degrees of freedom and a two-sided p-value.
pub fn welch_t_test<T: FloatScalar>(a: &SampleSet<T>, b: &SampleSet<T>) -> Result<WelchResult<T>, StatsError> {
    for s in [a, b] {
        if s.values.len() < 2 {
            return Err(StatsError::DegenerateGroup(s.label.clone()));
        }
    }
    let (ma, mb) = (mean(&a.values), mean(&b.values));
    let (va, vb) = (sample_variance(&a.values), sample_variance(&b.values));
    let (na, nb) = (
        T::from_usize(a.values.len()).unwrap(),
        T::from_usize(b.values.len()).unwrap(),
    );

    let sea = va / na;
    let seb = vb / nb;
    let denom_sq = sea + seb;

    if denom_sq == T::zero() {
        if ma == mb {
            return Err(StatsError::UndefinedT);
        }
        // Degenerate but decidable: identical-variance-free separation.
        let t_stat = if ma > mb { T::infinity() } else { T::neg_infinity() };
        return Ok(WelchResult { t_stat, df: T::one(), p_value: T::zero() });
    }

    let t_stat = (ma - mb) / denom_sq.sqrt();
    let df = denom_sq * denom_sq
        / (sea * sea / (na - T::one()) + seb * seb / (nb - T::one()));
    let two = T::one() + T::one();
    let p_value = two * (T::one() - t_cdf(t_stat.abs(), df)?);
    Ok(WelchResult { t_stat, df, p_value })
}

/// First and third quartile by linear interpolation with inclusive
/// endpoints: positions 0.25·(n−1) and 0.75·(n−1) in the sorted sample.
///
/// ```
/// use qchess_core::stats::quartiles;
///
/// assert_eq!(quartiles(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(), (2.0, 4.0));
/// assert_eq!(quartiles(&[1.0, 2.0, 3.0, 4.0]).unwrap(), (1.75, 3.25));
/// ```
pub fn quartiles<T: FloatScalar>(values: &[T]) -> Result<(T, T), StatsError> {
    if values.len() < 4 {
        return Err(StatsError::TooFewValues { required: 4, got: values.len() });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN sample"));
    Ok((interpolated(&sorted, 0.25), interpolated(&sorted, 0.75)))
}

fn interpolated<T: FloatScalar>(sorted: &[T], q: f64) -> T {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = T::from_f64(pos - lo as f64).unwrap();
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Tukey-fence summary derived from a quartile pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuartileSummary<T> {
    pub q1: T,
    pub q3: T,
    pub iqr: T,
    /// Upper bound q3 + 1.5·IQR.
    pub ub: T,
    /// Lower bound q1 − 1.5·IQR.
    pub lb: T,
}

pub fn outlier_bounds<T: FloatScalar>(q1: T, q3: T) -> Result<QuartileSummary<T>, StatsError> {
    if q3 < q1 {
        return Err(StatsError::InvertedQuartiles);
    }
    let iqr = q3 - q1;
    let k = T::from_f64(1.5).unwrap();
    Ok(QuartileSummary { q1, q3, iqr, ub: q3 + k * iqr, lb: q1 - k * iqr })
}

/// Values strictly outside the Tukey fences, upper sorted descending and
/// lower sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport<T> {
    pub upper_outliers: Vec<T>,
    pub lower_outliers: Vec<T>,
}

pub fn detect_outliers<T: FloatScalar>(values: &[T], summary: &QuartileSummary<T>) -> OutlierReport<T> {
    let mut upper: Vec<T> = values.iter().copied().filter(|&v| v > summary.ub).collect();
    let mut lower: Vec<T> = values.iter().copied().filter(|&v| v < summary.lb).collect();
    upper.sort_by(|a, b| b.partial_cmp(a).expect("non-NaN sample"));
    lower.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN sample"));
    OutlierReport { upper_outliers: upper, lower_outliers: lower }
}

/// Convenience: quartiles, fences and outliers of one sample in a single call.
pub fn outlier_analysis<T: FloatScalar>(
    values: &[T],
) -> Result<(QuartileSummary<T>, OutlierReport<T>), StatsError> {
    let (q1, q3) = quartiles(values)?;
    let summary = outlier_bounds(q1, q3)?;
    let report = detect_outliers(values, &summary);
    Ok((summary, report))
}

/// Parse a delimited table: header row of labels, one column per set.
///
/// Cells are separated by commas, semicolons or tabs. A leading index
/// column labelled `#` (or left blank) is skipped, so an instance-numbered
/// quantity table can be pasted in verbatim. Blank cells are allowed and
/// simply leave that column's sample shorter.
pub fn parse_table<T: FloatScalar>(text: &str) -> Result<Vec<SampleSet<T>>, StatsError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (header_no, header) = lines.next().ok_or(StatsError::TableParse {
        line: 0,
        reason: "empty table".into(),
    })?;
    let sep = detect_separator(header);
    let mut labels: Vec<String> = header.split(sep).map(|s| s.trim().to_string()).collect();
    let skip_first = labels
        .first()
        .map(|l| l.is_empty() || l == "#")
        .unwrap_or(false);
    if skip_first {
        labels.remove(0);
    }
    if labels.is_empty() {
        return Err(StatsError::TableParse { line: header_no, reason: "no column labels".into() });
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(StatsError::DuplicateLabel(l.clone()));
        }
    }

    let mut sets: Vec<SampleSet<T>> = labels
        .into_iter()
        .map(|label| SampleSet { label, values: Vec::new() })
        .collect();
    for (line_no, line) in lines {
        let mut cells: Vec<&str> = line.split(sep).map(str::trim).collect();
        if skip_first && !cells.is_empty() {
            cells.remove(0);
        }
        if cells.len() > sets.len() {
            return Err(StatsError::TableParse {
                line: line_no,
                reason: format!("row has {} cells but header has {} labels", cells.len(), sets.len()),
            });
        }
        for (col, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| StatsError::TableParse {
                line: line_no,
                reason: format!("cannot parse `{cell}` as a number"),
            })?;
            sets[col].values.push(T::from_f64(v).unwrap());
        }
    }
    Ok(sets)
}

fn detect_separator(header: &str) -> char {
    for sep in ['\t', ',', ';'] {
        if header.contains(sep) {
            return sep;
        }
    }
    ','
}
