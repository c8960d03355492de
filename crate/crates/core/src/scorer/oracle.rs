use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use super::{QueryStatement, ScoreQuery, Scorer, ScorerInfo};
use crate::dataset::Manifest;
use crate::error::{Error, Result};
use crate::graph::{CausalGraph, EventId, Reachability};
use crate::scenario::RelationKind;
use crate::verbalizer::{StatementParser, TemplateKind, TemplateLibrary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OracleName {
    Position,
    PostHoc,
    TemporalPrecedence,
    GroundTruth,
    Uniform,
    ExplicitMemory,
}

impl OracleName {
    pub const ALL: [OracleName; 6] = [
        OracleName::Position,
        OracleName::PostHoc,
        OracleName::TemporalPrecedence,
        OracleName::GroundTruth,
        OracleName::Uniform,
        OracleName::ExplicitMemory,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OracleName::Position => "position",
            OracleName::PostHoc => "post_hoc",
            OracleName::TemporalPrecedence => "temporal_precedence",
            OracleName::GroundTruth => "ground_truth",
            OracleName::Uniform => "uniform",
            OracleName::ExplicitMemory => "explicit_memory",
        }
    }
}

impl fmt::Display for OracleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OracleName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OracleName::ALL.into_iter().find(|n| n.as_str() == s).ok_or_else(|| {
            let names: Vec<_> = OracleName::ALL.iter().map(|n| n.as_str()).collect();
            Error::InvalidArgument(format!("unknown oracle `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

/// Output levels. Only their order matters to multiple-choice predictions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleParams {
    pub p_hi: f64,
    pub p_mid: f64,
    pub p_lo: f64,
    /// Probability of swapping `p_hi` and `p_lo` for a given query,
    /// decided per family and mention order by a seeded hash. Off by default.
    pub flip: f64,
    pub seed: u64,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            p_hi: 0.9,
            p_mid: 0.45,
            p_lo: 0.01,
            flip: 0.0,
            seed: 0,
        }
    }
}

impl OracleParams {
    pub fn validate(self) -> Result<Self> {
        let ok = self.p_hi <= 1.0 && self.p_hi > self.p_mid && self.p_mid > self.p_lo && self.p_lo > 0.0;
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "oracle levels need 1 >= p_hi > p_mid > p_lo > 0, got {} {} {}",
                self.p_hi, self.p_mid, self.p_lo
            )));
        }
        if !(0.0..=1.0).contains(&self.flip) {
            return Err(Error::InvalidArgument(format!("flip {} outside [0, 1]", self.flip)));
        }
        Ok(self)
    }

    /// Reads `p_hi`, `p_mid`, `p_lo`, `flip`, `seed`; other keys are left
    /// for the caller.
    pub fn from_map(params: &BTreeMap<String, String>) -> Result<Self> {
        let mut out = OracleParams::default();
        let num = |k: &str, v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("oracle parameter {k}={v} is not a number")))
        };
        for (k, v) in params {
            match k.as_str() {
                "p_hi" => out.p_hi = num(k, v)?,
                "p_mid" => out.p_mid = num(k, v)?,
                "p_lo" => out.p_lo = num(k, v)?,
                "flip" => out.flip = num(k, v)?,
                "seed" => {
                    out.seed = v
                        .parse()
                        .map_err(|_| Error::InvalidArgument(format!("oracle seed `{v}` is not an integer")))?
                }
                _ => {}
            }
        }
        out.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Level {
    Hi,
    Mid,
    Lo,
}

type Counts = HashMap<(EventId, EventId), u64>;

/// `Some(true)` when `(a, b)` outnumbers `(b, a)`, `None` on a tie.
fn majority(counts: &Counts, a: EventId, b: EventId, min_total: u64) -> Option<bool> {
    let ab = counts.get(&(a, b)).copied().unwrap_or(0);
    let ba = counts.get(&(b, a)).copied().unwrap_or(0);
    if ab + ba < min_total.max(1) || ab == ba {
        None
    } else {
        Some(ab > ba)
    }
}

enum Model {
    Position { counts: Counts, min_count: u64 },
    PostHoc(Counts),
    Precedence(Counts),
    GroundTruth { edges: HashSet<(EventId, EventId)>, reach: Reachability },
    Uniform,
    Memory { causal: HashSet<(EventId, EventId)>, not_causal: HashSet<(EventId, EventId)>, prior: Box<Oracle> },
}

/// Analytic scorers. Each reads the structured statement behind a query,
/// or parses the query text when no structure is attached.
pub struct Oracle {
    name: OracleName,
    params: OracleParams,
    extra: BTreeMap<String, String>,
    model: Model,
    parser: StatementParser,
}

impl Oracle {
    fn new(name: OracleName, params: OracleParams, model: Model) -> Result<Self> {
        Ok(Oracle {
            name,
            params: params.validate()?,
            extra: BTreeMap::new(),
            model,
            parser: StatementParser::new(&TemplateLibrary::canonical())?,
        })
    }

    /// Scores a sentence by whether its mention order agrees with the
    /// majority order of the pair in training text. Pairs seen fewer than
    /// `min_count` times count as unseen. The statement's family is ignored.
    pub fn position(mention_counts: Counts, min_count: u64, params: OracleParams) -> Result<Self> {
        let mut o = Self::new(
            OracleName::Position,
            params,
            Model::Position {
                counts: mention_counts,
                min_count,
            },
        )?;
        o.extra.insert("min_count".into(), min_count.to_string());
        Ok(o)
    }

    /// Believes `temporal(x, y) => x causes y`.
    pub fn post_hoc(temporal_counts: Counts, params: OracleParams) -> Result<Self> {
        Self::new(OracleName::PostHoc, params, Model::PostHoc(temporal_counts))
    }

    /// Believes only `temporal(x, y) => y does not cause x`.
    pub fn temporal_precedence(temporal_counts: Counts, params: OracleParams) -> Result<Self> {
        Self::new(OracleName::TemporalPrecedence, params, Model::Precedence(temporal_counts))
    }

    pub fn ground_truth(graph: &CausalGraph, params: OracleParams) -> Result<Self> {
        let edges = graph.edges().into_iter().collect();
        Self::new(
            OracleName::GroundTruth,
            params,
            Model::GroundTruth {
                edges,
                reach: graph.reachability(),
            },
        )
    }

    pub fn uniform(params: OracleParams) -> Result<Self> {
        Self::new(OracleName::Uniform, params, Model::Uniform)
    }

    /// Recalls explicit causal and non-causal statements verbatim and
    /// defers to `prior` for everything else.
    pub fn explicit_memory(
        causal: impl IntoIterator<Item = (EventId, EventId)>,
        not_causal: impl IntoIterator<Item = (EventId, EventId)>,
        prior: Oracle,
    ) -> Result<Self> {
        let params = prior.params;
        let mut o = Self::new(
            OracleName::ExplicitMemory,
            params,
            Model::Memory {
                causal: causal.into_iter().collect(),
                not_causal: not_causal.into_iter().collect(),
                prior: Box::new(prior),
            },
        )?;
        if let Model::Memory { prior, .. } = &o.model {
            o.extra.insert("prior".into(), prior.name.to_string());
        }
        Ok(o)
    }

    /// Builds a named oracle from training statistics. Extra keys:
    /// `min_count` (position) and `prior` (explicit_memory, default uniform).
    pub fn build(
        name: OracleName,
        params: &BTreeMap<String, String>,
        graph: Option<&CausalGraph>,
        manifest: Option<&Manifest>,
    ) -> Result<Self> {
        let p = OracleParams::from_map(params)?;
        let need_manifest = || {
            manifest.ok_or_else(|| Error::InvalidArgument(format!("oracle:{name} needs a dataset manifest")))
        };
        match name {
            OracleName::Position => {
                let min_count = match params.get("min_count") {
                    Some(v) => v
                        .parse()
                        .map_err(|_| Error::InvalidArgument(format!("min_count `{v}` is not an integer")))?,
                    None => 1,
                };
                Self::position(need_manifest()?.train.mention_counts(None), min_count, p)
            }
            OracleName::PostHoc => Self::post_hoc(need_manifest()?.train.pair_counts_of(RelationKind::Temporal), p),
            OracleName::TemporalPrecedence => {
                Self::temporal_precedence(need_manifest()?.train.pair_counts_of(RelationKind::Temporal), p)
            }
            OracleName::GroundTruth => {
                let g = graph.ok_or_else(|| Error::InvalidArgument("oracle:ground_truth needs a graph".into()))?;
                Self::ground_truth(g, p)
            }
            OracleName::Uniform => Self::uniform(p),
            OracleName::ExplicitMemory => {
                let prior_name: OracleName = params.get("prior").map_or("uniform", String::as_str).parse()?;
                if prior_name == OracleName::ExplicitMemory {
                    return Err(Error::InvalidArgument("explicit_memory cannot be its own prior".into()));
                }
                let mut prior_params = params.clone();
                prior_params.remove("prior");
                let prior = Self::build(prior_name, &prior_params, graph, manifest)?;
                let train = &need_manifest()?.train;
                let keys = |k| train.pair_counts_of(k).into_keys().collect::<Vec<_>>();
                Self::explicit_memory(
                    keys(RelationKind::ExplicitCausal),
                    keys(RelationKind::ExplicitNotCausal),
                    prior,
                )
            }
        }
    }

    pub fn name(&self) -> OracleName {
        self.name
    }

    pub fn params(&self) -> OracleParams {
        self.params
    }

    pub fn probability(&self, q: &QueryStatement) -> f64 {
        let level = match &self.model {
            Model::Memory { causal, not_causal, prior } => {
                let (x, y) = (q.x, q.y);
                let recalled = match q.kind {
                    TemplateKind::Causal if causal.contains(&(x, y)) => Some(Level::Hi),
                    TemplateKind::Causal if causal.contains(&(y, x)) || not_causal.contains(&(x, y)) => {
                        Some(Level::Lo)
                    }
                    TemplateKind::NotCausal if causal.contains(&(x, y)) => Some(Level::Lo),
                    TemplateKind::NotCausal if not_causal.contains(&(x, y)) => Some(Level::Hi),
                    TemplateKind::NoRelation if causal.contains(&(x, y)) || causal.contains(&(y, x)) => {
                        Some(Level::Lo)
                    }
                    _ => None,
                };
                match recalled {
                    Some(l) => l,
                    None => return prior.probability(q),
                }
            }
            model => self.level(model, q),
        };
        let flipped = self.params.flip > 0.0 && unit_hash(self.params.seed, q) < self.params.flip;
        match (level, flipped) {
            (Level::Hi, false) | (Level::Lo, true) => self.params.p_hi,
            (Level::Lo, false) | (Level::Hi, true) => self.params.p_lo,
            (Level::Mid, _) => self.params.p_mid,
        }
    }

    fn level(&self, model: &Model, q: &QueryStatement) -> Level {
        let from = |m: Option<bool>, yes: Level, no: Level| match m {
            Some(true) => yes,
            Some(false) => no,
            None => Level::Mid,
        };
        match model {
            Model::Position { counts, min_count } => {
                from(majority(counts, q.first, q.second(), *min_count), Level::Hi, Level::Lo)
            }
            Model::PostHoc(counts) => match q.kind {
                TemplateKind::Causal => from(majority(counts, q.x, q.y, 1), Level::Hi, Level::Lo),
                _ => Level::Mid,
            },
            Model::Precedence(counts) => match (q.kind, majority(counts, q.x, q.y, 1)) {
                (TemplateKind::Causal, Some(false)) => Level::Lo,
                (TemplateKind::NotCausal, Some(false)) => Level::Hi,
                _ => Level::Mid,
            },
            Model::GroundTruth { edges, reach } => {
                let edge = edges.contains(&(q.x, q.y));
                let truth = match q.kind {
                    TemplateKind::Causal => edge,
                    TemplateKind::NotCausal => !edge,
                    TemplateKind::NoRelation => !reach.related(q.x.vertex(), q.y.vertex()),
                    _ => return Level::Mid,
                };
                if truth {
                    Level::Hi
                } else {
                    Level::Lo
                }
            }
            Model::Uniform => Level::Mid,
            Model::Memory { .. } => unreachable!("handled by probability"),
        }
    }

    fn statement(&self, q: &ScoreQuery) -> Result<QueryStatement> {
        if let Some(s) = &q.statement {
            return Ok(s.clone());
        }
        let parsed = self
            .parser
            .parse(&q.text())
            .map_err(|e| Error::Scorer(format!("oracle:{} cannot read query `{}`: {e}", self.name, q.id)))?;
        let y = parsed
            .y
            .ok_or_else(|| Error::Scorer(format!("query `{}` mentions a single event", q.id)))?;
        Ok(QueryStatement {
            kind: parsed.kind,
            template_id: parsed.template_id,
            x: parsed.x,
            y,
            first: parsed.first,
        })
    }
}

// FNV-1a over the family and the mention order, finished with a splitmix
// step. Template ids are left out: mirrored templates of symmetric families
// render the same text, so a text-only query cannot tell them apart.
fn unit_hash(seed: u64, q: &QueryStatement) -> f64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    let bytes = q
        .kind
        .as_str()
        .bytes()
        .chain(q.first.get().to_le_bytes())
        .chain(q.second().get().to_le_bytes());
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^= h >> 31;
    (h >> 11) as f64 / (1u64 << 53) as f64
}

impl Scorer for Oracle {
    fn info(&self) -> ScorerInfo {
        let mut params = self.extra.clone();
        params.insert("p_hi".into(), self.params.p_hi.to_string());
        params.insert("p_mid".into(), self.params.p_mid.to_string());
        params.insert("p_lo".into(), self.params.p_lo.to_string());
        if self.params.flip > 0.0 {
            params.insert("flip".into(), self.params.flip.to_string());
            params.insert("seed".into(), self.params.seed.to_string());
        }
        ScorerInfo {
            name: format!("oracle:{}", self.name),
            params,
        }
    }

    fn score(&self, queries: &[ScoreQuery]) -> Result<Vec<f64>> {
        queries
            .iter()
            .map(|q| Ok(self.probability(&self.statement(q)?)))
            .collect()
    }
}
