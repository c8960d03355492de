//! Multiple-choice causal-relation evaluation.

mod harness;
mod relation;
mod report;
mod sets;
mod suite;

pub use harness::{
    mc_predict, normalize, Condition, Evaluator, FrequencyBucket, FrequencyReport, PairResult, PositionReport,
    PostHocReport, SeenUnseenReport, TaskReport, TieBreak, TIE_TOLERANCE,
};
pub use relation::{EvalRelation, OptionSpec, Order, Task, TestSetKind};
pub use report::EvalReport;
pub use sets::TestSets;
pub use suite::{dominant_order, run_suite, EvalPlan};
