//! The two-stage procedure: labeled sets and splits, negative sampling,
//! full-batch training with early stopping, grid search, link mining and
//! default prediction.

mod data;
mod grid;
mod stages;
mod train;

pub use data::{sample_negatives, stratified_split, LabeledNodeSet, LabeledPairSet, Split, SplitFractions};
pub use grid::{grid_search, grid_table_tsv, select_cell, GridCell, GridOutcome};
pub use stages::{
    candidate_pairs, node_task_data, pair_task_data, prepare_node_set, prepare_pair_set, run_stage1_mining,
    run_stage2_default, score_pairs, Stage1Output, Stage2Output, TrainedTask, Tuning,
};
pub use train::{
    evaluate, predict, train_task, CandidateScope, EpochRecord, Examples, FeatureScaler, Grid, LabeledExamples,
    TaskData, TrainConfig, TrainTrace, MIN_IMPROVEMENT,
};
