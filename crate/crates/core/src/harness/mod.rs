//! Dataset loading, statement categories and evaluation.

mod categories;
mod dataset;
mod eval;

pub use categories::{categorize, Category};
pub use dataset::{
    load_dataset, load_table, read_instances, sample, Channel, Dataset, DatasetError, Instance,
    Split,
};
pub use eval::{
    evaluate, evaluate_instances, Confusion, EvalReport, InstanceResult, Pipeline, Tally,
    Verification, DEFAULT_TIMEOUT_MS,
};
