//! Cross-validation fold assignment and classification metrics.

pub mod folds;
pub mod metrics;

pub use folds::{assign_folds, CvSchema, FoldPlan};
pub use metrics::{
    auc, binomial_exceed_p, clopper_pearson, evaluate_predictions, nir, ConfusionCounts, MetricsBundle,
};
