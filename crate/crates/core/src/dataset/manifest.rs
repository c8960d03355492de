use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::DatasetConfig;
use super::record::DatasetRecord;
use crate::error::{Error, Result};
use crate::graph::EventId;
use crate::provenance::Provenance;
use crate::scenario::RelationKind;
use crate::verbalizer::Position;

/// `[a, b, count]`.
pub type PairCount = (EventId, EventId, u64);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub n: usize,
    pub seed: u64,
    pub edges: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateInfo {
    pub name: String,
    pub sha256: String,
}

/// Counts over one split's emitted statements.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitStats {
    pub scenarios: u64,
    /// Half-open scenario id ranges.
    pub ids: Vec<(u64, u64)>,
    pub statements: u64,
    pub resamples: u64,
    pub relation_counts: BTreeMap<RelationKind, u64>,
    /// Statements rendered Y-first, per kind.
    pub yx_counts: BTreeMap<RelationKind, u64>,
    pub template_counts: BTreeMap<String, u64>,
    /// Argument-order counts: `[x, y, c]` for `kind(x, y)`.
    pub pair_counts: BTreeMap<RelationKind, Vec<PairCount>>,
    /// Mention-order counts: `[first, second, c]`.
    pub mention_order: BTreeMap<RelationKind, Vec<PairCount>>,
}

impl SplitStats {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a DatasetRecord>) -> Self {
        let mut stats = SplitStats::default();
        let mut pairs: BTreeMap<RelationKind, BTreeMap<(EventId, EventId), u64>> = BTreeMap::new();
        let mut orders: BTreeMap<RelationKind, BTreeMap<(EventId, EventId), u64>> = BTreeMap::new();
        let mut ids: Vec<u64> = Vec::new();
        for rec in records {
            stats.scenarios += 1;
            stats.resamples += u64::from(rec.resamples);
            ids.push(rec.id);
            for s in &rec.statements {
                stats.statements += 1;
                *stats.relation_counts.entry(s.kind).or_default() += 1;
                *stats.template_counts.entry(s.template.clone()).or_default() += 1;
                if s.position == Position::Yx {
                    *stats.yx_counts.entry(s.kind).or_default() += 1;
                }
                if let Some(y) = s.y {
                    *pairs.entry(s.kind).or_default().entry((s.x, y)).or_default() += 1;
                    let (a, b) = s.mention_order().expect("binary statement");
                    *orders.entry(s.kind).or_default().entry((a, b)).or_default() += 1;
                }
            }
        }
        ids.sort_unstable();
        for id in ids {
            match stats.ids.last_mut() {
                Some((_, end)) if *end == id => *end += 1,
                _ => stats.ids.push((id, id + 1)),
            }
        }
        let flatten = |m: BTreeMap<RelationKind, BTreeMap<(EventId, EventId), u64>>| {
            m.into_iter()
                .map(|(k, v)| (k, v.into_iter().map(|((a, b), c)| (a, b, c)).collect()))
                .collect()
        };
        stats.pair_counts = flatten(pairs);
        stats.mention_order = flatten(orders);
        stats
    }

    pub fn contains_id(&self, id: u64) -> bool {
        self.ids.iter().any(|&(a, b)| (a..b).contains(&id))
    }

    /// Mention-order counts `(first, second) -> c` pooled over `kinds`
    /// (all kinds when `None`).
    pub fn mention_counts(&self, kinds: Option<&[RelationKind]>) -> HashMap<(EventId, EventId), u64> {
        let mut out = HashMap::new();
        for (kind, rows) in &self.mention_order {
            if kinds.is_some_and(|ks| !ks.contains(kind)) {
                continue;
            }
            for &(a, b, c) in rows {
                *out.entry((a, b)).or_default() += c;
            }
        }
        out
    }

    /// Argument-order counts `(x, y) -> c` for one kind.
    pub fn pair_counts_of(&self, kind: RelationKind) -> HashMap<(EventId, EventId), u64> {
        self.pair_counts
            .get(&kind)
            .into_iter()
            .flatten()
            .map(|&(a, b, c)| ((a, b), c))
            .collect()
    }
}

/// Seen/unseen partition written by the explicit-statement augmentation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentationInfo {
    pub seen_fraction: f64,
    pub statements_per_edge: u32,
    pub seen: Vec<(EventId, EventId)>,
    pub unseen: Vec<(EventId, EventId)>,
    /// Unrelated pairs `(x, y)` that received "x cannot cause y".
    pub not_causal: Vec<(EventId, EventId)>,
    pub injected: u64,
    /// Scenarios created because no existing one mentioned both events.
    pub new_scenarios: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub config: DatasetConfig,
    pub graph: GraphInfo,
    pub templates: TemplateInfo,
    pub warnings: Vec<String>,
    pub train: SplitStats,
    pub validation: SplitStats,
    pub augmentation: Option<AugmentationInfo>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
