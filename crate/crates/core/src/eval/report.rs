use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::harness::{
    Condition, FrequencyReport, PositionReport, PostHocReport, SeenUnseenReport, TaskReport, TieBreak,
};
use super::relation::EvalRelation;
use crate::provenance::Provenance;
use crate::scorer::ScorerInfo;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub scorer: ScorerInfo,
    pub tie_break: TieBreak,
    /// Test-set sizes after any restriction.
    pub test_sets: BTreeMap<String, u64>,
    pub tasks: Vec<TaskReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub position: Vec<PositionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_hoc: Option<PostHocReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<FrequencyReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seen_unseen: Option<SeenUnseenReport>,
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

fn histogram(h: &BTreeMap<EvalRelation, u64>) -> String {
    h.iter().map(|(r, c)| format!("{r}: {c}")).collect::<Vec<_>>().join(", ")
}

fn condition_row(out: &mut String, label: &str, c: &Condition) {
    let _ = writeln!(
        out,
        "| {label} | {} | {} | {} | {} |",
        c.n,
        pct(c.accuracy),
        histogram(&c.histogram),
        c.ties
    );
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# Evaluation report\n");
        let params: Vec<String> = self.scorer.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(out, "Scorer: `{}` {}", self.scorer.name, params.join(" "));
        let _ = writeln!(out, "Tie-break: {:?}\n", self.tie_break);
        if !self.test_sets.is_empty() {
            let sets: Vec<String> = self.test_sets.iter().map(|(k, v)| format!("{k}: {v}")).collect();
            let _ = writeln!(out, "Test sets: {}\n", sets.join(", "));
        }

        if !self.tasks.is_empty() {
            let _ = writeln!(out, "## Tasks\n");
            let _ = writeln!(out, "| task | test set | target | n | accuracy | predictions | ties |");
            let _ = writeln!(out, "|---|---|---|---|---|---|---|");
            for t in &self.tasks {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} | {} |",
                    t.task,
                    t.test_set,
                    t.target,
                    t.n,
                    pct(t.accuracy),
                    histogram(&t.histogram),
                    t.ties
                );
            }
            let _ = writeln!(out, "\nMean relation probabilities:\n");
            let _ = writeln!(
                out,
                "| task | {} |",
                EvalRelation::ALL.map(|r| r.symbol()).join(" | ")
            );
            let _ = writeln!(out, "|---|---|---|---|---|---|");
            for t in &self.tasks {
                let cells: Vec<String> = EvalRelation::ALL
                    .iter()
                    .map(|r| format!("{:.4}", t.mean_probabilities.get(r).copied().unwrap_or(0.0)))
                    .collect();
                let _ = writeln!(out, "| {} ({}) | {} |", t.task, t.test_set, cells.join(" | "));
            }
            out.push('\n');
        }

        for p in &self.position {
            let _ = writeln!(out, "## Mention order ({} options, trained {})\n", p.family, p.train_order);
            let _ = writeln!(out, "| eval order | n | X→Y predicted | predictions | ties |");
            let _ = writeln!(out, "|---|---|---|---|---|");
            condition_row(&mut out, "(X, Y)", &p.xy);
            condition_row(&mut out, "(Y, X)", &p.yx);
            let _ = writeln!(
                out,
                "\nmatched {} / mismatched {} / gap {:+.4}\n",
                pct(p.matched),
                pct(p.mismatched),
                p.gap
            );
        }

        if let Some(ph) = &self.post_hoc {
            let _ = writeln!(out, "## Post hoc\n");
            let _ = writeln!(
                out,
                "X→Y predicted on {} of {} causal pairs (ties {}): {}\n",
                pct(ph.error_rate),
                ph.n,
                ph.ties,
                histogram(&ph.histogram)
            );
        }

        if let Some(f) = &self.frequency {
            let _ = writeln!(out, "## Frequency buckets\n");
            let _ = writeln!(out, "| bucket | n | frequency | matched | mismatched | gap |");
            let _ = writeln!(out, "|---|---|---|---|---|---|");
            for b in &f.buckets {
                let _ = writeln!(
                    out,
                    "| {} | {} | {}..={} | {} | {} | {:+.4} |",
                    b.index,
                    b.n,
                    b.min_frequency,
                    b.max_frequency,
                    pct(b.matched),
                    pct(b.mismatched),
                    b.gap
                );
            }
            out.push('\n');
        }

        if let Some(s) = &self.seen_unseen {
            let _ = writeln!(out, "## Seen / unseen edges\n");
            let _ = writeln!(out, "| subset | n | X→Y predicted | predictions | ties |");
            let _ = writeln!(out, "|---|---|---|---|---|");
            condition_row(&mut out, "seen", &s.seen);
            condition_row(&mut out, "unseen", &s.unseen);
            out.push('\n');
        }
        out
    }
}
