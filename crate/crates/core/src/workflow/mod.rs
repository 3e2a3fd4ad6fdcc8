//! Sweep-driven design optimization and S-parameter comparison.

mod design;
mod touchstone;

pub use design::{
    coarse_search, correct_mismatch, evaluate, fine_minimize, run_design, with_dim, CoarseOutcome, CorrectOutcome,
    CorrectSpec, DesignConfig, DesignContext, DesignReport, Evaluation, FineOutcome, FineParam, FineSpec, Objective,
    Stage, StageRecord, SweepParam, SweepSpec,
};
pub use touchstone::{compare_sparams, SparamDeviation, Touchstone};
