//! The categorical likelihood and an exact oracle for the constrained
//! maximum.
//!
//! The likelihood of categorized ratings is `prod p_i^m_i * q_i^n_i` up to a
//! constant, where `p` and `q` are the category probabilities of the two
//! classes. The constrained NPMLE maximizes it subject to `p_i/q_i`
//! non-decreasing; the maximum always pools contiguous categories, so
//! enumerating all contiguous partitions gives an exact check on PAVA.

use crate::counts::CategoryCounts;
use crate::error::{Error, Result};
use crate::roc::ratio_gt;

/// Largest `k` the oracle accepts; it enumerates `2^(k-1)` partitions.
pub const ORACLE_MAX_K: usize = 20;

/// A log-likelihood value together with the feasibility of its input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodValue {
    /// Natural-log likelihood, dropping the constant multinomial term.
    /// `-inf` when some observed category has zero probability.
    pub loglik: f64,
    /// Whether `p_i / q_i` is non-decreasing over the categories.
    pub convex: bool,
}

/// Evaluates the log-likelihood `sum m_i ln p_i + n_i ln q_i` with the
/// convention `0 * ln 0 = 0`.
///
/// `p` and `q` must sum to one within `1e-9`. An observed category with zero
/// probability yields `loglik = -inf`, not an error.
pub fn log_likelihood(counts: &CategoryCounts, p: &[f64], q: &[f64]) -> LikelihoodValue {
    let k = counts.k();
    assert_eq!(p.len(), k, "p must have one entry per category");
    assert_eq!(q.len(), k, "q must have one entry per category");
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    assert!((sp - 1.0).abs() <= 1e-9, "p must sum to 1, got {sp}");
    assert!((sq - 1.0).abs() <= 1e-9, "q must sum to 1, got {sq}");

    let mut loglik = 0.0;
    for i in 0..k {
        let mi = counts.present()[i];
        let ni = counts.absent()[i];
        if mi > 0 {
            loglik += mi as f64 * p[i].ln();
        }
        if ni > 0 {
            loglik += ni as f64 * q[i].ln();
        }
    }

    // Monotonicity of p_i/q_i by cross-multiplication; (0, 0) categories fit
    // anywhere and are skipped. Ratios that agree to within rounding count as
    // tied, not violating: exact ties computed through different operation
    // orders can differ by an ulp.
    let mut convex = true;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..k {
        if p[i] == 0.0 && q[i] == 0.0 {
            continue;
        }
        if let Some((pp, pq)) = prev {
            let lhs = pp * q[i];
            let rhs = p[i] * pq;
            if lhs > rhs + 1e-12 * (lhs + rhs) {
                convex = false;
                break;
            }
        }
        prev = Some((p[i], q[i]));
    }

    LikelihoodValue { loglik, convex }
}

/// Per-category negative log-likelihood profile
/// `l_i(w) = (m_i + n_i) ln(N + M w) - m_i ln w`, minimized at
/// `w = (m_i N)/(n_i M)`.
///
/// Limits: `l_i(0)` is `n_i ln N` when `m_i = 0` and `+inf` otherwise;
/// `l_i(inf)` is `m_i ln M` when `n_i = 0` and `+inf` otherwise.
pub fn negloglik_components(counts: &CategoryCounts, w: &[f64]) -> Vec<f64> {
    let k = counts.k();
    assert_eq!(w.len(), k, "w must have one entry per category");
    let m_total = counts.present_total() as f64;
    let n_total = counts.absent_total() as f64;
    (0..k)
        .map(|i| {
            let mi = counts.present()[i] as f64;
            let ni = counts.absent()[i] as f64;
            let wi = w[i];
            assert!(wi >= 0.0, "ratios must be non-negative");
            if wi == 0.0 {
                if mi == 0.0 {
                    ni * n_total.ln()
                } else {
                    f64::INFINITY
                }
            } else if wi.is_infinite() {
                if ni == 0.0 {
                    mi * m_total.ln()
                } else {
                    f64::INFINITY
                }
            } else {
                (mi + ni) * (n_total + m_total * wi).ln() - mi * wi.ln()
            }
        })
        .collect()
}

/// Category probabilities induced by a contiguous partition with a common
/// ratio per block.
///
/// For a block `B` with pooled counts `(m~, n~)`, minimizing the profiled
/// negative log-likelihood gives, for each original category `i` in `B`,
/// `p_i = (m_i + n_i) m~ / (M (m~ + n~))` and
/// `q_i = (m_i + n_i) n~ / (N (m~ + n~))`. These formulas stay finite even
/// for blocks with `n~ = 0`.
pub fn induced_pq(counts: &CategoryCounts, index_map: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let k = counts.k();
    assert_eq!(index_map.len(), k, "index map must cover every category");
    let n_blocks = index_map.last().map_or(0, |b| b + 1);
    let mut block_m = vec![0u64; n_blocks];
    let mut block_n = vec![0u64; n_blocks];
    for i in 0..k {
        block_m[index_map[i]] += counts.present()[i];
        block_n[index_map[i]] += counts.absent()[i];
    }
    let m_total = counts.present_total() as f64;
    let n_total = counts.absent_total() as f64;
    let mut p = Vec::with_capacity(k);
    let mut q = Vec::with_capacity(k);
    for i in 0..k {
        let b = index_map[i];
        let t = (counts.present()[i] + counts.absent()[i]) as f64;
        let bt = (block_m[b] + block_n[b]) as f64;
        p.push(t * block_m[b] as f64 / (m_total * bt));
        q.push(t * block_n[b] as f64 / (n_total * bt));
    }
    (p, q)
}

/// The exact constrained maximizer found by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// Original-to-block map of the maximizing partition (ties broken toward
    /// the lexicographically smallest cut pattern).
    pub index_map: Vec<usize>,
    /// Log-likelihood at the maximizer, same normalization as
    /// [`log_likelihood`].
    pub loglik: f64,
}

/// Enumerates every partition of the categories into contiguous blocks,
/// keeps those whose pooled ratios are non-decreasing, and returns the
/// likelihood maximizer.
///
/// Deterministic: among exact ties the smallest cut bitmask wins.
pub fn oracle_constrained_mle(counts: &CategoryCounts) -> Result<OracleSolution> {
    let k = counts.k();
    if k > ORACLE_MAX_K {
        return Err(Error::OracleLimit {
            k,
            max_k: ORACLE_MAX_K,
        });
    }
    let m = counts.present();
    let n = counts.absent();

    let mut best_loglik = f64::NEG_INFINITY;
    let mut best_mask = 0u32;
    let n_masks: u32 = 1 << (k - 1);
    let mut block_bounds: Vec<(usize, usize)> = Vec::with_capacity(k);

    for mask in 0..n_masks {
        // bit j set = cut between categories j and j+1
        block_bounds.clear();
        let mut start = 0usize;
        for j in 0..k - 1 {
            if mask & (1 << j) != 0 {
                block_bounds.push((start, j + 1));
                start = j + 1;
            }
        }
        block_bounds.push((start, k));

        let mut feasible = true;
        let mut prev: Option<(u64, u64)> = None;
        let mut sums: Vec<(u64, u64)> = Vec::with_capacity(block_bounds.len());
        for &(s, e) in &block_bounds {
            let bm: u64 = m[s..e].iter().sum();
            let bn: u64 = n[s..e].iter().sum();
            if let Some((pm, pn)) = prev {
                if ratio_gt(pm, pn, bm, bn) {
                    feasible = false;
                    break;
                }
            }
            prev = Some((bm, bn));
            sums.push((bm, bn));
        }
        if !feasible {
            continue;
        }

        let loglik = partition_loglik(counts, &block_bounds, &sums);
        if loglik > best_loglik {
            best_loglik = loglik;
            best_mask = mask;
        }
    }

    let mut index_map = vec![0usize; k];
    let mut block = 0usize;
    for j in 0..k - 1 {
        index_map[j] = block;
        if best_mask & (1 << j) != 0 {
            block += 1;
        }
    }
    index_map[k - 1] = block;

    Ok(OracleSolution {
        index_map,
        loglik: best_loglik,
    })
}

/// Log-likelihood of a contiguous partition evaluated through the induced
/// per-category probabilities, with the `0 ln 0` terms skipped.
fn partition_loglik(
    counts: &CategoryCounts,
    bounds: &[(usize, usize)],
    sums: &[(u64, u64)],
) -> f64 {
    let m = counts.present();
    let n = counts.absent();
    let m_total = counts.present_total() as f64;
    let n_total = counts.absent_total() as f64;
    let mut loglik = 0.0;
    for (&(s, e), &(bm, bn)) in bounds.iter().zip(sums) {
        let bt = (bm + bn) as f64;
        for i in s..e {
            let t = (m[i] + n[i]) as f64;
            if m[i] > 0 {
                loglik += m[i] as f64 * (t * bm as f64 / (m_total * bt)).ln();
            }
            if n[i] > 0 {
                loglik += n[i] as f64 * (t * bn as f64 / (n_total * bt)).ln();
            }
        }
    }
    loglik
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pava::pava;
    use approx::assert_abs_diff_eq;

    fn radiologist5() -> CategoryCounts {
        CategoryCounts::new(
            vec![10, 8, 4, 0, 4, 3, 4, 2, 4, 1],
            vec![33, 17, 6, 6, 5, 1, 0, 3, 1, 0],
        )
        .unwrap()
    }

    fn empirical_pq(counts: &CategoryCounts) -> (Vec<f64>, Vec<f64>) {
        let m_total = counts.present_total() as f64;
        let n_total = counts.absent_total() as f64;
        (
            counts.present().iter().map(|&v| v as f64 / m_total).collect(),
            counts.absent().iter().map(|&v| v as f64 / n_total).collect(),
        )
    }

    #[test]
    fn single_category_loglik_is_zero() {
        let counts = CategoryCounts::new(vec![3], vec![5]).unwrap();
        let value = log_likelihood(&counts, &[1.0], &[1.0]);
        assert_eq!(value.loglik, 0.0);
        assert!(value.convex);
    }

    #[test]
    fn symmetric_two_category_loglik() {
        let counts = CategoryCounts::new(vec![1, 1], vec![1, 1]).unwrap();
        let value = log_likelihood(&counts, &[0.5, 0.5], &[0.5, 0.5]);
        assert_abs_diff_eq!(value.loglik, 4.0 * 0.5f64.ln(), epsilon = 1e-12);
        assert!(value.convex);
    }

    #[test]
    fn zero_probability_on_observed_category_gives_neg_inf() {
        let counts = CategoryCounts::new(vec![1, 1], vec![1, 1]).unwrap();
        let value = log_likelihood(&counts, &[0.0, 1.0], &[0.5, 0.5]);
        assert_eq!(value.loglik, f64::NEG_INFINITY);
    }

    #[test]
    fn radiologist5_unconstrained_loglik() {
        let counts = radiologist5();
        let (p, q) = empirical_pq(&counts);
        let value = log_likelihood(&counts, &p, &q);
        let direct: f64 = counts
            .present()
            .iter()
            .filter(|&&mi| mi > 0)
            .map(|&mi| mi as f64 * (mi as f64 / 40.0).ln())
            .sum::<f64>()
            + counts
                .absent()
                .iter()
                .filter(|&&ni| ni > 0)
                .map(|&ni| ni as f64 * (ni as f64 / 72.0).ln())
                .sum::<f64>();
        assert_abs_diff_eq!(value.loglik, direct, epsilon = 1e-10);
        assert!(!value.convex);
    }

    #[test]
    fn component_arithmetic() {
        // m=n=1, M=N=2, w=1: (1+1) ln(2+2) - 0
        let counts = CategoryCounts::new(vec![1, 1], vec![1, 1]).unwrap();
        let ell = negloglik_components(&counts, &[1.0, 1.0]);
        assert_abs_diff_eq!(ell[0], 2.0 * 4.0f64.ln(), epsilon = 1e-12);
    }

    /// Golden-section minimizer over w in (lo, hi).
    fn golden_min(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - phi * (hi - lo);
            let b = lo + phi * (hi - lo);
            if f(a) < f(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn component_minimized_at_unconstrained_ratio() {
        let counts = radiologist5();
        let m_total = counts.present_total() as f64;
        let n_total = counts.absent_total() as f64;
        for i in [0usize, 1, 4, 5] {
            let w_bar =
                counts.present()[i] as f64 * n_total / (counts.absent()[i] as f64 * m_total);
            let at = |w: f64| {
                let mut ws = vec![1.0; counts.k()];
                ws[i] = w;
                negloglik_components(&counts, &ws)[i]
            };
            let w_min = golden_min(1e-6, 50.0, at);
            assert_abs_diff_eq!(w_min, w_bar, epsilon = 1e-4);
        }
    }

    #[test]
    fn pooled_component_minimized_at_pooled_ratio() {
        // two categories treated as one block: argmin of l_1(w) + l_2(w)
        let counts = radiologist5();
        let m = counts.present();
        let n = counts.absent();
        let m_total = counts.present_total() as f64;
        let n_total = counts.absent_total() as f64;
        let (i, j) = (1usize, 2usize);
        let pooled = (m[i] + m[j]) as f64 * n_total / ((n[i] + n[j]) as f64 * m_total);
        let at = |w: f64| {
            let mut ws = vec![1.0; counts.k()];
            ws[i] = w;
            ws[j] = w;
            let ell = negloglik_components(&counts, &ws);
            ell[i] + ell[j]
        };
        let w_min = golden_min(1e-6, 50.0, at);
        assert_abs_diff_eq!(w_min, pooled, epsilon = 1e-4);
    }

    #[test]
    fn component_unimodal_by_finite_differences() {
        let counts = CategoryCounts::new(vec![3, 1], vec![2, 1]).unwrap();
        let w_bar = 3.0 * 3.0 / (2.0 * 4.0); // m_i N / (n_i M)
        let at = |w: f64| negloglik_components(&counts, &[w, 1.0])[0];
        let h = 1e-6;
        for w in [w_bar / 8.0, w_bar / 3.0, w_bar * 0.9] {
            assert!(at(w + h) < at(w), "decreasing before the minimum");
        }
        for w in [w_bar * 1.1, w_bar * 3.0, w_bar * 8.0] {
            assert!(at(w + h) > at(w), "increasing after the minimum");
        }
    }

    #[test]
    fn component_limits() {
        let counts = CategoryCounts::new(vec![0, 2, 1], vec![1, 0, 1]).unwrap();
        let ell = negloglik_components(&counts, &[0.0, f64::INFINITY, 1.0]);
        assert_abs_diff_eq!(ell[0], 1.0 * 2.0f64.ln(), epsilon = 1e-12); // n ln N
        assert_abs_diff_eq!(ell[1], 2.0 * 3.0f64.ln(), epsilon = 1e-12); // m ln M
        let inf = negloglik_components(&counts, &[1.0, 1.0, 0.0]);
        assert_eq!(inf[2], f64::INFINITY);
    }

    #[test]
    fn oracle_matches_pava_on_radiologist5() {
        let counts = radiologist5();
        let oracle = oracle_constrained_mle(&counts).unwrap();
        let fit = pava(&counts);
        assert_eq!(oracle.index_map, fit.index_map());

        let (p, q) = induced_pq(&counts, fit.index_map());
        let value = log_likelihood(&counts, &p, &q);
        assert!(value.convex);
        assert_abs_diff_eq!(value.loglik, oracle.loglik, epsilon = 1e-9);
    }

    #[test]
    fn unconstrained_dominates_constrained() {
        let counts = radiologist5();
        let (p, q) = empirical_pq(&counts);
        let unconstrained = log_likelihood(&counts, &p, &q).loglik;
        let oracle = oracle_constrained_mle(&counts).unwrap();
        assert!(unconstrained > oracle.loglik);

        // on convex data the two coincide
        let convex = CategoryCounts::new(vec![1, 2, 6], vec![4, 2, 1]).unwrap();
        let (p, q) = empirical_pq(&convex);
        let unconstrained = log_likelihood(&convex, &p, &q).loglik;
        let oracle = oracle_constrained_mle(&convex).unwrap();
        assert_abs_diff_eq!(unconstrained, oracle.loglik, epsilon = 1e-12);
    }

    #[test]
    fn oracle_single_category() {
        let counts = CategoryCounts::new(vec![3], vec![4]).unwrap();
        let oracle = oracle_constrained_mle(&counts).unwrap();
        assert_eq!(oracle.index_map, vec![0]);
        assert_abs_diff_eq!(oracle.loglik, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn oracle_rejects_large_k() {
        let counts =
            CategoryCounts::new(vec![1; ORACLE_MAX_K + 1], vec![1; ORACLE_MAX_K + 1]).unwrap();
        assert!(matches!(
            oracle_constrained_mle(&counts),
            Err(Error::OracleLimit { k: 21, max_k: 20 })
        ));
    }

    #[test]
    fn induced_pq_sums_to_one() {
        let counts = radiologist5();
        let fit = pava(&counts);
        let (p, q) = induced_pq(&counts, fit.index_map());
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }
}
