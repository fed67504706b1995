//! The empirical (unconstrained NPMLE) ROC curve.

use crate::counts::CategoryCounts;

/// Compares two category likelihood ratios `m1/n1 > m2/n2` exactly.
///
/// A ratio with `n = 0` (and `m > 0`) is `+inf`; infinity compares greater
/// than any finite ratio and not greater than another infinity. The `N/M`
/// normalization cancels in the comparison, so raw counts are used. Cross
/// products are taken in `u128` to avoid overflow.
pub(crate) fn ratio_gt(m1: u64, n1: u64, m2: u64, n2: u64) -> bool {
    match (n1 == 0, n2 == 0) {
        (true, true) => false,
        (true, false) => m1 > 0,
        (false, true) => false,
        (false, false) => (m1 as u128) * (n2 as u128) > (m2 as u128) * (n1 as u128),
    }
}

/// An empirical ROC curve with its per-segment likelihood ratios.
///
/// Vertices run from `(0, 0)` (everything called negative; the highest
/// cutoff) to `(1, 1)` (lowest cutoff), so the vertex after `j` steps
/// accumulates the top `j` categories. Ratios, `p` and `q` are indexed by
/// ascending category like the counts: `ratios[i]` is the slope of the
/// segment between vertices `k-i-1` and `k-i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    vertices: Vec<(f64, f64)>,
    ratios: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    counts: CategoryCounts,
}

impl RocCurve {
    /// `(fpr, tpr)` vertices from `(0, 0)` to `(1, 1)`, length `k + 1`.
    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    /// Normalized likelihood ratios `w_i = (m_i/M) / (n_i/N)` by ascending
    /// category; `+inf` where `n_i = 0`.
    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// Category probabilities `p_i = m_i / M` for the signal-present class.
    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// Category probabilities `q_i = n_i / N` for the signal-absent class.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// The counts the curve was built from.
    pub fn counts(&self) -> &CategoryCounts {
        &self.counts
    }
}

/// Builds the empirical ROC curve: `p_i = m_i/M`, `q_i = n_i/N`, vertices at
/// the cumulative class fractions.
///
/// Coordinates come from integer cumulative counts with a single division
/// each, so the last vertex is exactly `(1, 1)` and equal-count curves
/// compare bit-for-bit.
pub fn empirical_roc(counts: &CategoryCounts) -> RocCurve {
    let k = counts.k();
    let m = counts.present();
    let n = counts.absent();
    let m_total = counts.present_total();
    let n_total = counts.absent_total();

    let p: Vec<f64> = m.iter().map(|&mi| mi as f64 / m_total as f64).collect();
    let q: Vec<f64> = n.iter().map(|&ni| ni as f64 / n_total as f64).collect();
    let ratios: Vec<f64> = m
        .iter()
        .zip(n)
        .map(|(&mi, &ni)| {
            if ni == 0 {
                f64::INFINITY
            } else {
                (mi as f64 * n_total as f64) / (ni as f64 * m_total as f64)
            }
        })
        .collect();

    // Vertices traverse categories from the top (most suspicious) down: after
    // j steps the top j categories are called positive.
    let mut vertices = Vec::with_capacity(k + 1);
    let mut cum_m = 0u64;
    let mut cum_n = 0u64;
    vertices.push((0.0, 0.0));
    for i in (0..k).rev() {
        cum_m += m[i];
        cum_n += n[i];
        vertices.push((cum_n as f64 / n_total as f64, cum_m as f64 / m_total as f64));
    }
    RocCurve {
        vertices,
        ratios,
        p,
        q,
        counts: counts.clone(),
    }
}

/// True iff the likelihood ratios are non-decreasing, `w_1 <= ... <= w_k`,
/// i.e. the curve is convex in the proper-ROC sense. Decided exactly on the
/// integer counts; adjacent infinities do not violate.
pub fn is_convex(curve: &RocCurve) -> bool {
    let m = curve.counts.present();
    let n = curve.counts.absent();
    !(0..curve.counts.k().saturating_sub(1))
        .any(|i| ratio_gt(m[i], n[i], m[i + 1], n[i + 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counts::CategoryCounts;
    use approx::assert_abs_diff_eq;

    fn radiologist5() -> CategoryCounts {
        CategoryCounts::new(
            vec![10, 8, 4, 0, 4, 3, 4, 2, 4, 1],
            vec![33, 17, 6, 6, 5, 1, 0, 3, 1, 0],
        )
        .unwrap()
    }

    #[test]
    fn radiologist5_ratios_match_tabulated_values() {
        let curve = empirical_roc(&radiologist5());
        let unnorm = radiologist5().unnormalized_ratios();
        let expected = [
            0.30, 0.47, 0.67, 0.00, 0.80, 3.00, f64::INFINITY, 0.67, 4.00, f64::INFINITY,
        ];
        for (got, want) in unnorm.iter().zip(expected) {
            if want.is_infinite() {
                assert!(got.is_infinite());
            } else {
                assert_abs_diff_eq!(*got, want, epsilon = 0.005);
            }
        }
        // normalized first ratio: (10/40)/(33/72)
        assert_abs_diff_eq!(curve.ratios()[0], 0.25 / (33.0 / 72.0), epsilon = 1e-15);
        assert_abs_diff_eq!(curve.ratios()[0], 0.5455, epsilon = 5e-5);
    }

    #[test]
    fn chance_diagonal() {
        let counts = CategoryCounts::new(vec![1], vec![1]).unwrap();
        let curve = empirical_roc(&counts);
        assert_eq!(curve.vertices(), &[(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(curve.ratios(), &[1.0]);
        assert!(is_convex(&curve));
    }

    #[test]
    fn perfect_separation() {
        let counts = CategoryCounts::new(vec![0, 5], vec![5, 0]).unwrap();
        let curve = empirical_roc(&counts);
        assert_eq!(curve.vertices(), &[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        assert_eq!(curve.ratios()[0], 0.0);
        assert!(curve.ratios()[1].is_infinite());
        assert!(is_convex(&curve));
    }

    #[test]
    fn probabilities_sum_to_one_and_curve_closes() {
        let counts = radiologist5();
        let curve = empirical_roc(&counts);
        let sp: f64 = curve.p().iter().sum();
        let sq: f64 = curve.q().iter().sum();
        assert_abs_diff_eq!(sp, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sq, 1.0, epsilon = 1e-12);
        assert_eq!(*curve.vertices().last().unwrap(), (1.0, 1.0));
        assert_eq!(curve.vertices().len(), counts.k() + 1);
    }

    #[test]
    fn convexity_on_radiologist5() {
        // raw curve has 0.67 followed by 0.00
        assert!(!is_convex(&empirical_roc(&radiologist5())));
        // the pooled counts from the same study are convex
        let merged =
            CategoryCounts::new(vec![10, 12, 4, 9, 4, 1], vec![33, 29, 5, 4, 1, 0]).unwrap();
        assert!(is_convex(&empirical_roc(&merged)));
    }

    #[test]
    fn monotone_vertices() {
        let curve = empirical_roc(&radiologist5());
        for w in curve.vertices().windows(2) {
            assert!(w[1].0 >= w[0].0);
            assert!(w[1].1 >= w[0].1);
        }
    }

    #[test]
    fn ratio_gt_infinity_rules() {
        assert!(ratio_gt(1, 0, 5, 1)); // inf > 5
        assert!(!ratio_gt(1, 0, 2, 0)); // inf not > inf
        assert!(!ratio_gt(5, 1, 1, 0)); // 5 not > inf
        assert!(ratio_gt(2, 3, 1, 2)); // 2/3 > 1/2
        assert!(!ratio_gt(1, 2, 2, 3));
        assert!(!ratio_gt(1, 2, 2, 4)); // equal
        assert!(ratio_gt(1, 2, 0, 5)); // finite > 0
    }
}
