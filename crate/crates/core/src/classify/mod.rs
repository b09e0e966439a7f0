//! Random-forest classification of feature rows and its evaluation.

mod arms;
mod cv;
mod forest;
mod scores;
mod tree;

use thiserror::Error;

use crate::bvh::Label;

pub use arms::{label_set, run_experiment_arms, to_matrix, write_importance_csv, ArmResult, ARM_NAMES};
pub use cv::{monte_carlo_cv, stratified_split, CvConfig, CvResult, CvRun, Stat};
pub use forest::{train_forest, Forest, ForestConfig};
pub use scores::{classification_metrics, per_class, ClassificationScores, ConfusionMatrix};
pub use tree::Tree;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("no samples")]
    EmptyInput,
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("expected {expected} columns or rows, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("forest has no splits; importance is undefined")]
    NoSplits,
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("class {class} has {count} sample(s); need at least 2 to split")]
    ClassTooSmall { class: usize, count: usize },
    #[error("invalid classifier configuration")]
    InvalidConfig,
    #[error("label {0} is not in the class set")]
    UnknownLabel(Label),
    #[error("synthetic and real pools have different label sets")]
    LabelSetMismatch,
}

pub type Result<T> = std::result::Result<T, ClassifyError>;
