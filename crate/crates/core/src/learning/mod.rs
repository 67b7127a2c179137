//! Learned pair scorer: features, bagged CART forest, isotonic calibration,
//! evaluation metrics and random hyperparameter search.

mod calibration;
mod features;
mod forest;
mod metrics;
mod model_io;
mod search;
mod tree;

pub use calibration::{apply_calibrator, fit_isotonic, Calibrator};
pub use features::{featurize_pair, FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
pub use forest::{fit_forest, oob_scores, predict_proba, train_forest, Forest, ForestParams};
pub use metrics::{evaluate, roc_auc, EvalReport};
pub use model_io::{load_model, save_model, ModelBundle, MODEL_FORMAT, MODEL_VERSION};
pub use search::{random_search, sample_params, split_indices, SearchOutcome, SEARCH_GRID};
pub use tree::{Node, Tree};

#[derive(Debug, thiserror::Error)]
pub enum LearnError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("degenerate training data: {0}")]
    Degenerate(String),
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("model format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
