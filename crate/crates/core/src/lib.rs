//! Correlated logistic regressions (CorrLog) for multilabel classification.
//!
//! Each label gets its own logistic regression and every pair of labels
//! shares one interaction weight, so that conditional on the features the
//! labels form an Ising model:
//!
//! ```text
//! p(y | x) ∝ exp( Σ_i y_i β_iᵀx + Σ_{i<j} α_ij y_i y_j ),   y ∈ {-1,+1}^m
//! ```
//!
//! Training minimises the elastic-net regularised negative log
//! pseudo-likelihood with proximal gradient descent ([`optimizer`]);
//! prediction runs loopy max-product belief propagation ([`inference`]).
//! Independent logistic regressions (ILRs) are available as the
//! uncoupled baseline.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod inference;
pub mod model;
pub mod objective;
pub mod optimizer;
mod stats;

pub use crate::data::{
    export_label_graph, generate_toy, load_dataset, load_model, save_model, DataFormat,
    DatasetSpec, LabelGraph, ModelDocument, Normalization, Preprocessor, ToySpec,
};
pub use crate::error::{CorrLogError, Result};
pub use crate::eval::{
    compute_metrics, cross_validate, cross_validate_raw, paired_t_test, stability_experiment,
    CvResult, MetricsReport, StabilityReport, TTestResult, Trainer,
};
pub use crate::inference::{
    map_bruteforce, margin, margin_loss, predict_map_bp, BeliefState, BpConfig,
};
pub use crate::model::{
    conditional_label_prob, ilrs_label_prob, joint_score, Instance, ModelParams, MultilabelDataset,
};
pub use crate::objective::{
    elastic_net_penalty, full_objective, neg_log_pseudo_likelihood, smooth_gradient,
    smooth_objective, DenseParams, GradientBuffer, RegularizationConfig,
};
pub use crate::optimizer::{
    prox_step, soft_threshold, train_corrlog, train_ilrs, StepPolicy, TrainConfig, TrainTrace,
};
