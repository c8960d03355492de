use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::relation::{EvalRelation, OptionSpec, Order, Task, TestSetKind};
use crate::error::{Error, Result};
use crate::graph::EventId;
use crate::rng;
use crate::scorer::{QueryStatement, ScoreQuery, Scorer};
use crate::verbalizer::{Position, Template, TemplateKind, TemplateLibrary};

/// Relative tolerance under which option probabilities count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    /// First tied option in option order.
    #[default]
    Fixed,
    /// Uniform among tied options, seeded per pair.
    Random(u64),
}

/// Picks the most probable option. Returns its index and whether the
/// maximum was shared.
pub fn mc_predict(probs: &[f64], tie_break: TieBreak, key: u64) -> (usize, bool) {
    assert!(!probs.is_empty(), "no options");
    let max = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..probs.len())
        .filter(|&i| probs[i] >= max - TIE_TOLERANCE * max.abs())
        .collect();
    let pick = match tie_break {
        TieBreak::Fixed => tied[0],
        TieBreak::Random(seed) if tied.len() > 1 => tied[rng::stream(seed, key).random_range(0..tied.len())],
        TieBreak::Random(_) => tied[0],
    };
    (pick, tied.len() > 1)
}

/// Rescales option probabilities to sum to one.
pub fn normalize(probs: &[f64]) -> Vec<f64> {
    let total: f64 = probs.iter().sum();
    probs.iter().map(|p| p / total).collect()
}

fn pair_key(x: EventId, y: EventId) -> u64 {
    (u64::from(x.get()) << 32) | u64::from(y.get())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub x: EventId,
    pub y: EventId,
    pub probabilities: BTreeMap<EvalRelation, f64>,
    pub prediction: EvalRelation,
    pub tie: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: Task,
    pub test_set: TestSetKind,
    pub order: Order,
    pub options: Vec<EvalRelation>,
    pub target: EvalRelation,
    pub n: u64,
    pub correct: u64,
    pub accuracy: f64,
    pub histogram: BTreeMap<EvalRelation, u64>,
    pub ties: u64,
    /// Mean probability of each of the five relations over the test pairs.
    pub mean_probabilities: BTreeMap<EvalRelation, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<PairResult>,
}

/// Three-way predictions over a pair list under one rendering.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub n: u64,
    /// Fraction predicting X→Y.
    pub accuracy: f64,
    pub histogram: BTreeMap<EvalRelation, u64>,
    pub ties: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionReport {
    /// Family used for the two directed options; `causal` normally,
    /// `unrelated` for the probe.
    pub family: TemplateKind,
    /// Dominant mention order of the training data.
    pub train_order: Position,
    pub xy: Condition,
    pub yx: Condition,
    pub matched: f64,
    pub mismatched: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostHocReport {
    pub n: u64,
    /// Fraction of causal pairs predicted X→Y with order-randomized options.
    pub error_rate: f64,
    pub histogram: BTreeMap<EvalRelation, u64>,
    pub ties: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBucket {
    pub index: usize,
    pub n: u64,
    pub min_frequency: u64,
    pub max_frequency: u64,
    pub matched: f64,
    pub mismatched: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub train_order: Position,
    pub buckets: Vec<FrequencyBucket>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeenUnseenReport {
    pub seen: Condition,
    pub unseen: Condition,
}

/// Scores multiple-choice options by averaging a scorer over the templates
/// of each option.
pub struct Evaluator<'a> {
    scorer: &'a dyn Scorer,
    library: TemplateLibrary,
    tie_break: TieBreak,
    keep_pairs: bool,
}

impl<'a> Evaluator<'a> {
    pub fn new(scorer: &'a dyn Scorer) -> Self {
        Evaluator {
            scorer,
            library: TemplateLibrary::canonical(),
            tie_break: TieBreak::Fixed,
            keep_pairs: false,
        }
    }

    pub fn with_library(mut self, library: TemplateLibrary) -> Self {
        self.library = library;
        self
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    /// Keep per-pair results in task reports.
    pub fn keep_pairs(mut self, keep: bool) -> Self {
        self.keep_pairs = keep;
        self
    }

    pub fn tie_break(&self) -> TieBreak {
        self.tie_break
    }

    pub fn scorer(&self) -> &dyn Scorer {
        self.scorer
    }

    fn templates(&self, family: TemplateKind, order: Order) -> Result<Vec<&Template>> {
        let ts: Vec<&Template> = self
            .library
            .of_kind(family)
            .filter(|t| match order {
                Order::Xy => t.position == Position::Xy,
                Order::Yx => t.position == Position::Yx,
                Order::Both => true,
            })
            .collect();
        if ts.is_empty() {
            return Err(Error::Template(format!("no {family} templates for order {order:?}")));
        }
        Ok(ts)
    }

    /// The queries whose mean score is `P(option)` for `(x, y)`.
    pub fn queries(&self, x: EventId, y: EventId, spec: OptionSpec) -> Result<Vec<ScoreQuery>> {
        let (a, b) = spec.relation.args(x, y);
        self.templates(spec.family, spec.order)?
            .into_iter()
            .map(|t| query(t, a, b))
            .collect()
    }

    /// Every distinct query needed for `pairs` × `specs`.
    pub fn plan(&self, pairs: &[(EventId, EventId)], specs: &[OptionSpec]) -> Result<Vec<ScoreQuery>> {
        Ok(self.plan_layout(pairs, specs)?.0)
    }

    fn plan_layout(
        &self,
        pairs: &[(EventId, EventId)],
        specs: &[OptionSpec],
    ) -> Result<(Vec<ScoreQuery>, Vec<Vec<Vec<usize>>>)> {
        let mut unique = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut layout = Vec::with_capacity(pairs.len());
        for &(x, y) in pairs {
            let mut per_spec = Vec::with_capacity(specs.len());
            for &spec in specs {
                let ids = self
                    .queries(x, y, spec)?
                    .into_iter()
                    .map(|q| {
                        *index.entry(q.id.clone()).or_insert_with(|| {
                            unique.push(q);
                            unique.len() - 1
                        })
                    })
                    .collect();
                per_spec.push(ids);
            }
            layout.push(per_spec);
        }
        Ok((unique, layout))
    }

    /// `P(option)` for every pair and option, with all queries sent to the
    /// scorer as one deduplicated batch.
    pub fn score_options(&self, pairs: &[(EventId, EventId)], specs: &[OptionSpec]) -> Result<Vec<Vec<f64>>> {
        let (queries, layout) = self.plan_layout(pairs, specs)?;
        let scores = if queries.is_empty() { Vec::new() } else { self.scorer.score(&queries)? };
        if scores.len() != queries.len() {
            return Err(Error::Scorer(format!(
                "scorer returned {} scores for {} queries",
                scores.len(),
                queries.len()
            )));
        }
        if let Some((q, p)) = queries.iter().zip(&scores).find(|(_, p)| !(**p > 0.0 && **p <= 1.0)) {
            return Err(Error::Scorer(format!("score {p} for `{}` is outside (0, 1]", q.id)));
        }
        Ok(layout
            .into_iter()
            .map(|per_spec| {
                per_spec
                    .into_iter()
                    .map(|ids| ids.iter().map(|&i| scores[i]).sum::<f64>() / ids.len() as f64)
                    .collect()
            })
            .collect())
    }

    pub fn relation_probability(&self, x: EventId, y: EventId, spec: OptionSpec) -> Result<f64> {
        Ok(self.score_options(&[(x, y)], &[spec])?[0][0])
    }

    /// Predictions of `specs` for each pair, returning `(option index, tie)`.
    pub fn predict(&self, pairs: &[(EventId, EventId)], specs: &[OptionSpec]) -> Result<Vec<(usize, bool)>> {
        let probs = self.score_options(pairs, specs)?;
        Ok(pairs
            .iter()
            .zip(&probs)
            .map(|(&(x, y), p)| mc_predict(p, self.tie_break, pair_key(x, y)))
            .collect())
    }

    pub fn run_task(
        &self,
        task: Task,
        set: TestSetKind,
        pairs: &[(EventId, EventId)],
        order: Order,
    ) -> Result<TaskReport> {
        let (options, target) = task.spec(set)?;
        let specs: Vec<OptionSpec> = EvalRelation::ALL.iter().map(|&r| OptionSpec::new(r, order)).collect();
        let probs = self.score_options(pairs, &specs)?;
        let option_idx: Vec<usize> = options
            .iter()
            .map(|o| EvalRelation::ALL.iter().position(|r| r == o).expect("known relation"))
            .collect();

        let mut histogram: BTreeMap<EvalRelation, u64> = options.iter().map(|&o| (o, 0)).collect();
        let mut sums = [0.0f64; 5];
        let mut ties = 0;
        let mut details = Vec::new();
        for (&(x, y), p) in pairs.iter().zip(&probs) {
            let option_probs: Vec<f64> = option_idx.iter().map(|&i| p[i]).collect();
            let (pick, tie) = mc_predict(&option_probs, self.tie_break, pair_key(x, y));
            *histogram.get_mut(&options[pick]).expect("option") += 1;
            ties += u64::from(tie);
            for (s, v) in sums.iter_mut().zip(p) {
                *s += v;
            }
            if self.keep_pairs {
                details.push(PairResult {
                    x,
                    y,
                    probabilities: EvalRelation::ALL.iter().copied().zip(p.iter().copied()).collect(),
                    prediction: options[pick],
                    tie,
                });
            }
        }
        let n = pairs.len() as u64;
        let correct = histogram[&target];
        Ok(TaskReport {
            task,
            test_set: set,
            order,
            options,
            target,
            n,
            correct,
            accuracy: ratio(correct, n),
            histogram,
            ties,
            mean_probabilities: EvalRelation::ALL
                .iter()
                .zip(sums)
                .map(|(&r, s)| (r, if n == 0 { 0.0 } else { s / n as f64 }))
                .collect(),
            pairs: details,
        })
    }

    /// Three-way predictions with the directed options pinned to `order`
    /// and X↮Y always order-randomized.
    pub fn condition(&self, pairs: &[(EventId, EventId)], family: TemplateKind, order: Order) -> Result<Condition> {
        let specs = [
            OptionSpec::new(EvalRelation::Causes, order).with_family(family),
            OptionSpec::new(EvalRelation::CausedBy, order).with_family(family),
            OptionSpec::new(EvalRelation::NoRelation, Order::Both),
        ];
        let mut c = Condition {
            n: pairs.len() as u64,
            histogram: EvalRelation::THREE_WAY.iter().map(|&r| (r, 0)).collect(),
            ..Default::default()
        };
        for (pick, tie) in self.predict(pairs, &specs)? {
            *c.histogram.get_mut(&EvalRelation::THREE_WAY[pick]).expect("option") += 1;
            c.ties += u64::from(tie);
        }
        c.accuracy = ratio(c.histogram[&EvalRelation::Causes], c.n);
        Ok(c)
    }

    /// Accuracy on causal pairs when the options mention events in the
    /// training order versus the opposite order. `family` is
    /// [`TemplateKind::Causal`], or [`TemplateKind::Unrelated`] for the
    /// probe that swaps in relations unconnected to causality.
    pub fn position_report(
        &self,
        pairs: &[(EventId, EventId)],
        family: TemplateKind,
        train_order: Position,
    ) -> Result<PositionReport> {
        let xy = self.condition(pairs, family, Order::Xy)?;
        let yx = self.condition(pairs, family, Order::Yx)?;
        let (matched, mismatched) = if train_order == Position::Yx {
            (yx.accuracy, xy.accuracy)
        } else {
            (xy.accuracy, yx.accuracy)
        };
        Ok(PositionReport {
            family,
            train_order,
            xy,
            yx,
            matched,
            mismatched,
            gap: matched - mismatched,
        })
    }

    pub fn post_hoc_report(&self, pairs: &[(EventId, EventId)]) -> Result<PostHocReport> {
        let c = self.condition(pairs, TemplateKind::Causal, Order::Both)?;
        Ok(PostHocReport {
            n: c.n,
            error_rate: c.accuracy,
            histogram: c.histogram,
            ties: c.ties,
        })
    }

    /// Splits `pairs` into `buckets` equal-size groups by training
    /// frequency (ties ordered by pair) and reports the matched-minus-
    /// mismatched gap in each.
    pub fn frequency_report(
        &self,
        pairs: &[(EventId, EventId)],
        frequency: &HashMap<(EventId, EventId), u64>,
        buckets: usize,
        train_order: Position,
    ) -> Result<FrequencyReport> {
        if buckets == 0 {
            return Err(Error::InvalidArgument("need at least one bucket".into()));
        }
        let mut sorted: Vec<((EventId, EventId), u64)> = pairs
            .iter()
            .map(|&p| (p, frequency.get(&p).copied().unwrap_or(0)))
            .collect();
        sorted.sort_by_key(|&(p, f)| (f, p));
        let n = sorted.len();
        let mut out = Vec::with_capacity(buckets);
        for b in 0..buckets {
            let chunk = &sorted[b * n / buckets..(b + 1) * n / buckets];
            let ps: Vec<(EventId, EventId)> = chunk.iter().map(|&(p, _)| p).collect();
            let r = self.position_report(&ps, TemplateKind::Causal, train_order)?;
            out.push(FrequencyBucket {
                index: b,
                n: ps.len() as u64,
                min_frequency: chunk.first().map_or(0, |c| c.1),
                max_frequency: chunk.last().map_or(0, |c| c.1),
                matched: r.matched,
                mismatched: r.mismatched,
                gap: r.gap,
            });
        }
        Ok(FrequencyReport {
            train_order,
            buckets: out,
        })
    }

    pub fn seen_unseen_report(
        &self,
        seen: &[(EventId, EventId)],
        unseen: &[(EventId, EventId)],
    ) -> Result<SeenUnseenReport> {
        Ok(SeenUnseenReport {
            seen: self.condition(seen, TemplateKind::Causal, Order::Both)?,
            unseen: self.condition(unseen, TemplateKind::Causal, Order::Both)?,
        })
    }
}

fn query(t: &Template, a: EventId, b: EventId) -> Result<ScoreQuery> {
    let (prefix, completion) = t.split_last_mention(a, b)?;
    Ok(ScoreQuery {
        id: format!("{}|{a}|{b}", t.id),
        prefix,
        completion,
        statement: Some(QueryStatement {
            kind: t.kind,
            template_id: t.id.clone(),
            x: a,
            y: b,
            first: if t.position == Position::Yx { b } else { a },
        }),
    })
}

pub(crate) fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}
