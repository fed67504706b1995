//! Nonparametric ROC curve estimation under a monotone likelihood ratio
//! constraint.
//!
//! The library takes ordered categorical rating data from a two-class signal
//! detection experiment and computes
//!
//! * the unconstrained empirical ROC curve and its Mann-Whitney AUC,
//! * the convexity-constrained maximum likelihood ROC curve, obtained by
//!   pooling adjacent categories whose likelihood ratios violate
//!   monotonicity (PAVA),
//! * variance estimates for both AUC variants from a two-way ANOVA
//!   decomposition of the Mann-Whitney kernel, plus Wald intervals,
//! * an exact brute-force likelihood oracle that certifies the constrained
//!   maximum, and
//! * a Monte Carlo harness for bias, variance and coverage experiments.
//!
//! Counts are kept as integers through every curve construction so that
//! vertex coordinates, likelihood-ratio comparisons and AUC values are exact.

pub mod auc;
pub mod counts;
pub mod error;
pub mod likelihood;
pub mod pava;
pub mod roc;
pub mod sim;
pub mod variance;

pub use auc::{auc_constrained, auc_unconstrained, trapezoid_area, AucEstimate, AucVariant};
pub use counts::{read_counts_csv, read_scores_csv, tabulate, CategoryCounts, Class, ScoreSample};
pub use error::{Error, Result};
pub use likelihood::{
    induced_pq, log_likelihood, negloglik_components, oracle_constrained_mle, LikelihoodValue,
    OracleSolution, ORACLE_MAX_K,
};
pub use pava::{constrained_roc, convex_hull_roc, pava, PavaResult};
pub use roc::{empirical_roc, is_convex, RocCurve};
pub use sim::{
    bias_sweep, discretized_auc, draw_sample, model_params, run_experiment, run_sized_cell,
    BiasPoint, BinMode, Family, SimConfig, SimResult,
};
pub use variance::{
    anova_variance, anova_variance_dense, simple_variance, wald_ci, ConfidenceInterval,
    VarianceEstimate, VarianceMethod,
};
