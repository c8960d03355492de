use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::harness::Evaluator;
use super::relation::{Order, Task};
use super::report::EvalReport;
use super::sets::TestSets;
use crate::dataset::Manifest;
use crate::error::Result;
use crate::graph::CausalGraph;
use crate::scenario::RelationKind;
use crate::verbalizer::{Position, TemplateKind};

/// Which reports an evaluation run produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalPlan {
    pub tasks: Vec<Task>,
    pub order: Order,
    /// Limit task test sets to pairs mentioned together in training.
    pub restrict: bool,
    /// Position, post-hoc, frequency and seen/unseen reports. They need a
    /// manifest and are skipped without one.
    pub diagnostics: bool,
    pub buckets: usize,
    /// Dominant training mention order; inferred from the manifest if unset.
    pub train_order: Option<Position>,
}

impl Default for EvalPlan {
    fn default() -> Self {
        EvalPlan {
            tasks: Task::ALL.to_vec(),
            order: Order::Both,
            restrict: false,
            diagnostics: true,
            buckets: 10,
            train_order: None,
        }
    }
}

/// Majority mention order of training temporal statements.
pub fn dominant_order(manifest: &Manifest) -> Position {
    let total = manifest.train.relation_counts.get(&RelationKind::Temporal).copied().unwrap_or(0);
    let yx = manifest.train.yx_counts.get(&RelationKind::Temporal).copied().unwrap_or(0);
    if 2 * yx > total {
        Position::Yx
    } else {
        Position::Xy
    }
}

pub fn run_suite(
    eval: &Evaluator,
    graph: &CausalGraph,
    manifest: Option<&Manifest>,
    plan: &EvalPlan,
) -> Result<EvalReport> {
    let all = TestSets::build(graph);
    let mentioned = manifest.map(|m| all.restrict_to_mentioned(&m.train));
    let sets = match (&mentioned, plan.restrict) {
        (Some(m), true) => m,
        _ => &all,
    };

    let mut test_sets = BTreeMap::new();
    let mut tasks = Vec::new();
    for &task in &plan.tasks {
        for &set in task.sets() {
            let pairs = sets.get(set);
            test_sets.insert(set.to_string(), pairs.len() as u64);
            tasks.push(eval.run_task(task, set, pairs, plan.order)?);
        }
    }

    let mut report = EvalReport {
        provenance: None,
        scorer: eval.scorer().info(),
        tie_break: eval.tie_break(),
        test_sets,
        tasks,
        position: Vec::new(),
        post_hoc: None,
        frequency: None,
        seen_unseen: None,
    };
    let (Some(m), Some(covered), true) = (manifest, &mentioned, plan.diagnostics) else {
        return Ok(report);
    };
    let train_order = plan.train_order.unwrap_or_else(|| dominant_order(m));
    report.test_sets.insert("causal_covered".into(), covered.causal.len() as u64);
    for family in [TemplateKind::Causal, TemplateKind::Unrelated] {
        report.position.push(eval.position_report(&covered.causal, family, train_order)?);
    }
    report.post_hoc = Some(eval.post_hoc_report(&covered.causal)?);
    let freq = m.train.pair_counts_of(RelationKind::Temporal);
    report.frequency = Some(eval.frequency_report(&covered.causal, &freq, plan.buckets, train_order)?);
    if let Some(aug) = &m.augmentation {
        report.seen_unseen = Some(eval.seen_unseen_report(&aug.seen, &aug.unseen)?);
    }
    Ok(report)
}
