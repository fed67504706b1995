//! The analysis report: plain-text rendering and the versioned JSON schema.

use serde::{Deserialize, Serialize};

use roc_npmle_core::{CategoryCounts, ConfidenceInterval, PavaResult};

pub const SCHEMA_VERSION: u32 = 1;

/// One AUC variant's numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub auc: f64,
    pub variance_anova: f64,
    pub variance_simple: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

/// One merged category row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergedCategory {
    pub category: usize,
    pub diseased: u64,
    pub nondiseased: u64,
    pub original_categories: String,
}

/// Full output of `analyze`, serialized as-is for `--json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub dataset: String,
    pub alpha: f64,
    pub k: usize,
    pub k_merged: usize,
    pub unconstrained: VariantReport,
    pub constrained: VariantReport,
    pub merged_categories: Vec<MergedCategory>,
    /// 1-based merged category per original category.
    pub index_map: Vec<usize>,
}

impl VariantReport {
    pub fn new(auc: f64, anova: f64, simple: f64, ci: ConfidenceInterval) -> Self {
        Self {
            auc,
            variance_anova: anova,
            variance_simple: simple,
            ci_lower: ci.lower,
            ci_upper: ci.upper,
        }
    }
}

pub fn merged_rows(fit: &PavaResult) -> Vec<MergedCategory> {
    let merged = fit.merged();
    (0..merged.k())
        .map(|i| MergedCategory {
            category: i + 1,
            diseased: merged.present()[i],
            nondiseased: merged.absent()[i],
            original_categories: merged.labels()[i].clone(),
        })
        .collect()
}

/// Formats with 5 significant digits, the precision rating studies report.
pub fn sig5(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let prec = (4 - exp).max(0) as usize;
    format!("{x:.prec$}")
}

/// Comma-separated ratio list with two decimals, `inf` allowed.
pub fn ratio_list(counts: &CategoryCounts) -> String {
    counts
        .unnormalized_ratios()
        .iter()
        .map(|r| {
            if r.is_infinite() {
                "inf".to_string()
            } else {
                format!("{r:.2}")
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn render_text(report: &AnalysisReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("dataset: {}\n", report.dataset));
    out.push_str(&format!(
        "categories: k = {}, pooled k~ = {}\n",
        report.k, report.k_merged
    ));
    out.push_str(&format!(
        "merged categories: {}\n",
        report
            .merged_categories
            .iter()
            .map(|c| c.original_categories.as_str())
            .collect::<Vec<_>>()
            .join(" | ")
    ));
    out.push('\n');
    let level = 100.0 * (1.0 - report.alpha);
    out.push_str(&format!(
        "{:<15}{:<10}{:<13}{:<13}{level:.0}% CI\n",
        "variant", "AUC", "var(anova)", "var(simple)"
    ));
    for (name, v) in [
        ("unconstrained", &report.unconstrained),
        ("constrained", &report.constrained),
    ] {
        out.push_str(&format!(
            "{name:<15}{:<10}{:<13}{:<13}[{}, {}]\n",
            sig5(v.auc),
            sig5(v.variance_anova),
            sig5(v.variance_simple),
            sig5(v.ci_lower),
            sig5(v.ci_upper),
        ));
    }
    out
}
