//! Categorized two-class rating data.
//!
//! Ratings live in `k` ordered categories. Category `i` holds `m[i]`
//! signal-present and `n[i]` signal-absent observations; `M` and `N` are the
//! class totals. Categories that contain no observation at all are dropped on
//! construction (they contribute nothing to the likelihood and would make the
//! likelihood ratio 0/0), while the surviving categories keep their original
//! labels.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Class of a single observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Class {
    /// Signal absent (non-diseased).
    Absent,
    /// Signal present (diseased).
    Present,
}

/// Per-category counts for both classes. The study's sufficient statistic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryCounts {
    labels: Vec<String>,
    m: Vec<u64>,
    n: Vec<u64>,
    m_total: u64,
    n_total: u64,
}

impl CategoryCounts {
    /// Builds counts from per-category vectors, dropping empty categories.
    ///
    /// Labels default to the 1-based category position. Errors with
    /// `MissingClass` when a class has no observations at all.
    pub fn new(m: Vec<u64>, n: Vec<u64>) -> Result<Self> {
        let labels = (1..=m.len().max(n.len())).map(|i| i.to_string()).collect();
        Self::with_labels(labels, m, n)
    }

    /// As [`CategoryCounts::new`] with explicit category labels.
    pub fn with_labels(labels: Vec<String>, m: Vec<u64>, n: Vec<u64>) -> Result<Self> {
        assert_eq!(m.len(), n.len(), "count vectors must have equal length");
        assert_eq!(labels.len(), m.len(), "one label per category");
        let mut kept_labels = Vec::with_capacity(m.len());
        let mut kept_m = Vec::with_capacity(m.len());
        let mut kept_n = Vec::with_capacity(n.len());
        for ((label, mi), ni) in labels.into_iter().zip(m).zip(n) {
            if mi > 0 || ni > 0 {
                kept_labels.push(label);
                kept_m.push(mi);
                kept_n.push(ni);
            }
        }
        let m_total: u64 = kept_m.iter().sum();
        let n_total: u64 = kept_n.iter().sum();
        if m_total == 0 {
            return Err(Error::MissingClass("signal-present"));
        }
        if n_total == 0 {
            return Err(Error::MissingClass("signal-absent"));
        }
        Ok(Self {
            labels: kept_labels,
            m: kept_m,
            n: kept_n,
            m_total,
            n_total,
        })
    }

    /// Number of (non-empty) categories.
    pub fn k(&self) -> usize {
        self.m.len()
    }

    /// Signal-present counts `m_i`.
    pub fn present(&self) -> &[u64] {
        &self.m
    }

    /// Signal-absent counts `n_i`.
    pub fn absent(&self) -> &[u64] {
        &self.n
    }

    /// Total signal-present observations `M`.
    pub fn present_total(&self) -> u64 {
        self.m_total
    }

    /// Total signal-absent observations `N`.
    pub fn absent_total(&self) -> u64 {
        self.n_total
    }

    /// Category labels, in order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Per-category ratio `m_i / n_i` without the `N/M` normalization, the
    /// form rating studies usually tabulate. `+inf` where `n_i = 0`.
    pub fn unnormalized_ratios(&self) -> Vec<f64> {
        self.m
            .iter()
            .zip(&self.n)
            .map(|(&mi, &ni)| {
                if ni == 0 {
                    f64::INFINITY
                } else {
                    mi as f64 / ni as f64
                }
            })
            .collect()
    }

    /// Expands the counts back into one observation per rating, with the
    /// category position as the score. Inverse of [`tabulate`] up to label
    /// renaming.
    pub fn expand(&self) -> ScoreSample {
        let total = (self.m_total + self.n_total) as usize;
        let mut scores = Vec::with_capacity(total);
        let mut classes = Vec::with_capacity(total);
        let mut categories = Vec::with_capacity(total);
        for (idx, (&mi, &ni)) in self.m.iter().zip(&self.n).enumerate() {
            for _ in 0..ni {
                scores.push((idx + 1) as f64);
                classes.push(Class::Absent);
                categories.push(idx);
            }
            for _ in 0..mi {
                scores.push((idx + 1) as f64);
                classes.push(Class::Present);
                categories.push(idx);
            }
        }
        ScoreSample {
            scores,
            classes,
            categories,
            n_categories: self.k(),
        }
    }
}

/// A combined two-class sample of scores with assigned category indices.
///
/// Category indices are 0-based positions in an ordered set of
/// `n_categories` bins and must be order-consistent with the scores: a higher
/// score never sits in a lower category.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSample {
    scores: Vec<f64>,
    classes: Vec<Class>,
    categories: Vec<usize>,
    n_categories: usize,
}

impl ScoreSample {
    /// Builds a sample where each distinct score value is its own category.
    pub fn from_scores(scores: Vec<f64>, classes: Vec<Class>) -> Result<Self> {
        assert_eq!(scores.len(), classes.len());
        if scores.iter().any(|s| s.is_nan()) {
            return Err(Error::InvalidParam("scores must not be NaN".into()));
        }
        let mut distinct: Vec<f64> = scores.clone();
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        distinct.dedup();
        let categories = scores
            .iter()
            .map(|s| distinct.partition_point(|d| d < s))
            .collect();
        Ok(Self {
            scores,
            classes,
            categories,
            n_categories: distinct.len(),
        })
    }

    /// Builds a sample binned by ascending cut points. A score equal to a cut
    /// point falls in the lower bin, so bin `i` is `(edges[i-1], edges[i]]`.
    pub fn from_scores_binned(
        scores: Vec<f64>,
        classes: Vec<Class>,
        edges: &[f64],
    ) -> Result<Self> {
        assert_eq!(scores.len(), classes.len());
        if scores.iter().any(|s| s.is_nan()) {
            return Err(Error::InvalidParam("scores must not be NaN".into()));
        }
        if edges.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParam("bin edges must be ascending".into()));
        }
        let categories = scores
            .iter()
            .map(|s| edges.partition_point(|e| e < s))
            .collect();
        Ok(Self {
            scores,
            classes,
            categories,
            n_categories: edges.len() + 1,
        })
    }

    /// Builds a sample from pre-assigned category indices, checking the
    /// score/category ordering invariant.
    pub fn from_parts(
        scores: Vec<f64>,
        classes: Vec<Class>,
        categories: Vec<usize>,
        n_categories: usize,
    ) -> Result<Self> {
        assert_eq!(scores.len(), classes.len());
        assert_eq!(scores.len(), categories.len());
        if let Some(&c) = categories.iter().find(|&&c| c >= n_categories) {
            return Err(Error::InvalidParam(format!(
                "category index {c} out of range for {n_categories} categories"
            )));
        }
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if scores[i] < scores[j] && categories[i] > categories[j] {
                    return Err(Error::InvalidParam(
                        "category indices must be order-consistent with scores".into(),
                    ));
                }
            }
        }
        Ok(Self {
            scores,
            classes,
            categories,
            n_categories,
        })
    }

    /// As [`ScoreSample::from_parts`] without the quadratic ordering check;
    /// used by the simulator whose binning is monotone by construction.
    pub(crate) fn from_parts_unchecked(
        scores: Vec<f64>,
        classes: Vec<Class>,
        categories: Vec<usize>,
        n_categories: usize,
    ) -> Self {
        Self {
            scores,
            classes,
            categories,
            n_categories,
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn classes(&self) -> &[Class] {
        &self.classes
    }

    /// 0-based category index per observation.
    pub fn categories(&self) -> &[usize] {
        &self.categories
    }
}

/// Counts observations per category and class. Empty categories are dropped;
/// category order is preserved.
pub fn tabulate(sample: &ScoreSample) -> Result<CategoryCounts> {
    let mut m = vec![0u64; sample.n_categories];
    let mut n = vec![0u64; sample.n_categories];
    for (&cat, &class) in sample.categories.iter().zip(&sample.classes) {
        match class {
            Class::Present => m[cat] += 1,
            Class::Absent => n[cat] += 1,
        }
    }
    CategoryCounts::new(m, n)
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: u64,
    field: &str,
    what: &str,
) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("invalid {what}: {field:?}"),
    })
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

/// Reads a counts file with header `category,diseased,nondiseased`.
///
/// Categories must be integers in strictly ascending order; counts must be
/// non-negative integers. The diseased column is the signal-present count.
pub fn read_counts_csv<P: AsRef<Path>>(path: P) -> Result<CategoryCounts> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(csv_to_io)?;
    {
        let headers = reader.headers().map_err(csv_to_io)?;
        let expect = ["category", "diseased", "nondiseased"];
        let got: Vec<&str> = headers.iter().map(str::trim).collect();
        if got != expect {
            return Err(parse_err(
                path,
                1,
                format!("expected header {expect:?}, got {got:?}"),
            ));
        }
    }
    let mut labels = Vec::new();
    let mut m = Vec::new();
    let mut n = Vec::new();
    let mut prev_category: Option<i64> = None;
    for record in reader.records() {
        let record = record.map_err(csv_to_io)?;
        let line = record_line(&record);
        if record.len() != 3 {
            return Err(parse_err(
                path,
                line,
                format!("expected 3 fields, got {}", record.len()),
            ));
        }
        let category: i64 = parse_field(path, line, &record[0], "category")?;
        if let Some(prev) = prev_category {
            if category == prev {
                return Err(parse_err(path, line, format!("duplicate category {category}")));
            }
            if category < prev {
                return Err(parse_err(
                    path,
                    line,
                    format!("categories must be ascending, {category} after {prev}"),
                ));
            }
        }
        prev_category = Some(category);
        let diseased: i64 = parse_field(path, line, &record[1], "diseased count")?;
        let nondiseased: i64 = parse_field(path, line, &record[2], "nondiseased count")?;
        if diseased < 0 || nondiseased < 0 {
            return Err(parse_err(path, line, "counts must be non-negative"));
        }
        labels.push(record[0].trim().to_string());
        m.push(diseased as u64);
        n.push(nondiseased as u64);
    }
    if labels.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    CategoryCounts::with_labels(labels, m, n)
}

/// Reads a raw-scores file with header `score,label` where label 1 marks
/// signal-present and 0 signal-absent. Scores are binned by their distinct
/// values unless explicit bin edges are supplied.
pub fn read_scores_csv<P: AsRef<Path>>(path: P, edges: Option<&[f64]>) -> Result<ScoreSample> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(csv_to_io)?;
    {
        let headers = reader.headers().map_err(csv_to_io)?;
        let got: Vec<&str> = headers.iter().map(str::trim).collect();
        if got != ["score", "label"] {
            return Err(parse_err(
                path,
                1,
                format!("expected header [\"score\", \"label\"], got {got:?}"),
            ));
        }
    }
    let mut scores = Vec::new();
    let mut classes = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_to_io)?;
        let line = record_line(&record);
        if record.len() != 2 {
            return Err(parse_err(
                path,
                line,
                format!("expected 2 fields, got {}", record.len()),
            ));
        }
        let score: f64 = parse_field(path, line, &record[0], "score")?;
        if score.is_nan() {
            return Err(parse_err(path, line, "score must not be NaN"));
        }
        let class = match record[1].trim() {
            "1" => Class::Present,
            "0" => Class::Absent,
            other => {
                return Err(parse_err(
                    path,
                    line,
                    format!("label must be 0 or 1, got {other:?}"),
                ))
            }
        };
        scores.push(score);
        classes.push(class);
    }
    if scores.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    match edges {
        Some(edges) => ScoreSample::from_scores_binned(scores, classes, edges),
        None => ScoreSample::from_scores(scores, classes),
    }
}

/// Reads one ascending bin edge per line (used with `read_scores_csv`).
pub fn read_bin_edges<P: AsRef<Path>>(path: P) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx as u64 + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let edge: f64 = parse_field(path, line, trimmed, "bin edge")?;
        edges.push(edge);
    }
    if edges.windows(2).any(|w| w[0] > w[1]) {
        return Err(parse_err(path, 1, "bin edges must be ascending"));
    }
    Ok(edges)
}

fn csv_to_io(err: csv::Error) -> Error {
    Error::Io(std::io::Error::other(err))
}
