//! Pool Adjacent Violators: the convexity-constrained NPMLE.
//!
//! Wherever adjacent categories have decreasing likelihood ratios the
//! constrained maximum pools them into one category whose ratio is the
//! pooled `(m_i + m_{i+1}) N / ((n_i + n_{i+1}) M)`, which is the same as
//! adding the two categories' counts. Pooling repeats until the ratio
//! sequence is non-decreasing.

use crate::counts::CategoryCounts;
use crate::roc::{empirical_roc, ratio_gt, RocCurve};

/// Outcome of pooling: merged counts, the original-to-merged category map,
/// and the merged likelihood ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct PavaResult {
    merged: CategoryCounts,
    index_map: Vec<usize>,
    ratios: Vec<f64>,
}

impl PavaResult {
    /// The pooled counts (`k~ <= k` categories). Labels of pooled categories
    /// join the original labels as `first-last`.
    pub fn merged(&self) -> &CategoryCounts {
        &self.merged
    }

    /// For each original category, the 0-based merged category holding it.
    /// Non-decreasing and surjective onto `0..k~`.
    pub fn index_map(&self) -> &[usize] {
        &self.index_map
    }

    /// Merged normalized ratios `w~_i = (m~_i N) / (n~_i M)`, non-decreasing,
    /// `+inf` where `n~_i = 0`.
    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// Number of merged categories `k~`.
    pub fn k_merged(&self) -> usize {
        self.merged.k()
    }
}

struct Block {
    m: u64,
    n: u64,
    start: usize,
}

/// Pools adjacent ratio violations until the ratio sequence is
/// non-decreasing.
///
/// The scan runs left to right; after each pooling the new block is
/// re-checked against its left neighbor immediately. Violations are strict
/// (`w_i > w_{i+1}`), so adjacent equal ratios stay separate categories.
/// Comparisons are exact on the integer counts.
pub fn pava(counts: &CategoryCounts) -> PavaResult {
    let m = counts.present();
    let n = counts.absent();
    let k = counts.k();

    let mut blocks: Vec<Block> = Vec::with_capacity(k);
    for i in 0..k {
        blocks.push(Block {
            m: m[i],
            n: n[i],
            start: i,
        });
        while blocks.len() >= 2 {
            let last = blocks.len() - 1;
            let prev = last - 1;
            if ratio_gt(
                blocks[prev].m,
                blocks[prev].n,
                blocks[last].m,
                blocks[last].n,
            ) {
                blocks[prev].m += blocks[last].m;
                blocks[prev].n += blocks[last].n;
                blocks.pop();
            } else {
                break;
            }
        }
    }

    from_blocks(counts, blocks.iter().map(|b| b.start).collect())
}

/// Assembles a `PavaResult` from ascending block start indices.
fn from_blocks(counts: &CategoryCounts, starts: Vec<usize>) -> PavaResult {
    let k = counts.k();
    let m = counts.present();
    let n = counts.absent();
    let m_total = counts.present_total();
    let n_total = counts.absent_total();
    let labels = counts.labels();

    let mut merged_labels = Vec::with_capacity(starts.len());
    let mut merged_m = Vec::with_capacity(starts.len());
    let mut merged_n = Vec::with_capacity(starts.len());
    let mut index_map = vec![0usize; k];
    let mut ratios = Vec::with_capacity(starts.len());

    for (b, &start) in starts.iter().enumerate() {
        let end = starts.get(b + 1).copied().unwrap_or(k);
        let bm: u64 = m[start..end].iter().sum();
        let bn: u64 = n[start..end].iter().sum();
        merged_m.push(bm);
        merged_n.push(bn);
        merged_labels.push(if end - start == 1 {
            labels[start].clone()
        } else {
            format!("{}-{}", labels[start], labels[end - 1])
        });
        for idx in index_map.iter_mut().take(end).skip(start) {
            *idx = b;
        }
        ratios.push(if bn == 0 {
            f64::INFINITY
        } else {
            (bm as f64 * n_total as f64) / (bn as f64 * m_total as f64)
        });
    }

    let merged = CategoryCounts::with_labels(merged_labels, merged_m, merged_n)
        .expect("pooled blocks are non-empty and keep both class totals");
    PavaResult {
        merged,
        index_map,
        ratios,
    }
}

/// The ROC curve of the pooled counts; convex by construction.
pub fn constrained_roc(result: &PavaResult) -> RocCurve {
    empirical_roc(result.merged())
}

/// The least concave majorant of the empirical curve, computed independently
/// of [`pava`] as a convex hull over the integer cumulative-count vertices.
///
/// Collinear vertices are kept, matching the strict violation rule in
/// [`pava`]: the two routes return identical vertex sets.
pub fn convex_hull_roc(curve: &RocCurve) -> RocCurve {
    let counts = curve.counts();
    let k = counts.k();
    let m = counts.present();
    let n = counts.absent();

    // Integer vertex j accumulates the top j categories, matching the curve
    // orientation. `origin[j]` is the original index of the category whose
    // segment ends at vertex j.
    let mut pts: Vec<(u64, u64)> = Vec::with_capacity(k + 1);
    pts.push((0, 0));
    let mut cm = 0u64;
    let mut cn = 0u64;
    for i in (0..k).rev() {
        cm += m[i];
        cn += n[i];
        pts.push((cn, cm));
    }

    // Upper hull with strict right-turn removal: drop vertex b only when it
    // lies strictly below the chord a-c.
    let cross = |a: (u64, u64), b: (u64, u64), c: (u64, u64)| -> i128 {
        let (ax, ay) = (a.0 as i128, a.1 as i128);
        let (bx, by) = (b.0 as i128, b.1 as i128);
        let (cx, cy) = (c.0 as i128, c.1 as i128);
        (bx - ax) * (cy - by) - (by - ay) * (cx - bx)
    };
    let mut hull: Vec<usize> = Vec::with_capacity(k + 1);
    for j in 0..=k {
        while hull.len() >= 2
            && cross(
                pts[hull[hull.len() - 2]],
                pts[hull[hull.len() - 1]],
                pts[j],
            ) > 0
        {
            hull.pop();
        }
        hull.push(j);
    }

    // Hull spans in curve order cover categories top-down; convert to
    // ascending block starts. The span ending at vertex j covers original
    // categories k-j ..
    let starts: Vec<usize> = hull
        .windows(2)
        .rev()
        .map(|w| k - w[1])
        .collect();
    constrained_roc(&from_blocks(counts, starts))
}
