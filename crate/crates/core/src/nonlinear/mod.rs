//! Extraction of non-linear servers and the learners those attacks retrain.

pub mod eat;
pub mod forest;
pub mod iwal;
pub mod svm;
pub mod tree;

pub use eat::{agreement, eat_extract_svm, uniform_extract_svm, EatConfig, EatRound, SvmExtraction};
pub use forest::{rf_train_weighted, RandomForest};
pub use iwal::{
    forest_alternative, importance_weighted_error, iwal_extract, iwal_solve_s, iwal_threshold, tree_alternative,
    IwalConfig, IwalExtraction, IwalModel, IwalStats, Learner, Weighted,
};
pub use svm::{svm_train, KernelSvmModel, SvmParams};
pub use tree::{dt_train_weighted, DecisionTree, Node, TreeParams};
