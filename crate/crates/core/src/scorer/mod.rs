//! Scorers return the probability of a query's completion given its prefix.

mod file;
mod http;
mod oracle;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use file::{read_requests, write_requests, FileScorer, ScoreResponse};
pub use http::HttpScorer;
pub use oracle::{Oracle, OracleName, OracleParams};

use crate::error::{Error, Result};
use crate::dataset::Manifest;
use crate::graph::{CausalGraph, EventId};
use crate::verbalizer::TemplateKind;

/// Structured description of the sentence behind a query, available to
/// oracles without parsing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryStatement {
    pub kind: TemplateKind,
    pub template_id: String,
    /// Template slot arguments: the sentence states `kind(x, y)`.
    pub x: EventId,
    pub y: EventId,
    /// Event mentioned first.
    pub first: EventId,
}

impl QueryStatement {
    pub fn second(&self) -> EventId {
        if self.first == self.x {
            self.y
        } else {
            self.x
        }
    }
}

/// `prefix + completion` is a full template rendering; the completion is
/// the final event mention.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreQuery {
    pub id: String,
    pub prefix: String,
    pub completion: String,
    #[serde(skip)]
    pub statement: Option<QueryStatement>,
}

impl ScoreQuery {
    pub fn text(&self) -> String {
        format!("{}{}", self.prefix, self.completion)
    }

    /// Drops the structured description, leaving only text.
    pub fn text_only(&self) -> Self {
        ScoreQuery {
            statement: None,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScorerInfo {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

pub trait Scorer: Send + Sync {
    fn info(&self) -> ScorerInfo;

    /// One probability in (0, 1] per query, in order.
    fn score(&self, queries: &[ScoreQuery]) -> Result<Vec<f64>>;
}

/// `oracle:<name>[?k=v&...]`, `file:<path>`, or `http://host:port[/base]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScorerUri {
    Oracle {
        name: OracleName,
        params: BTreeMap<String, String>,
    },
    File(String),
    Http(String),
}

impl FromStr for ScorerUri {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("oracle:") {
            let (name, query) = rest.split_once('?').unwrap_or((rest, ""));
            let mut params = BTreeMap::new();
            for kv in query.split('&').filter(|kv| !kv.is_empty()) {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidArgument(format!("oracle parameter `{kv}` is not key=value")))?;
                params.insert(k.to_string(), v.to_string());
            }
            Ok(ScorerUri::Oracle {
                name: name.parse()?,
                params,
            })
        } else if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err(Error::InvalidArgument("file: scorer needs a path".into()));
            }
            Ok(ScorerUri::File(path.to_string()))
        } else if s.starts_with("http://") || s.starts_with("https://") {
            Ok(ScorerUri::Http(s.trim_end_matches('/').to_string()))
        } else {
            Err(Error::InvalidArgument(format!(
                "scorer `{s}` must start with oracle:, file:, or http://"
            )))
        }
    }
}

impl ScorerUri {
    /// Instantiates the scorer. Oracles read what they need from the graph
    /// and training manifest.
    pub fn open(&self, graph: Option<&CausalGraph>, manifest: Option<&Manifest>) -> Result<Box<dyn Scorer>> {
        Ok(match self {
            ScorerUri::Oracle { name, params } => Box::new(Oracle::build(*name, params, graph, manifest)?),
            ScorerUri::File(path) => Box::new(FileScorer::load(std::path::Path::new(path))?),
            ScorerUri::Http(url) => Box::new(HttpScorer::new(url)),
        })
    }
}

impl fmt::Display for ScorerUri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScorerUri::Oracle { name, params } => {
                write!(f, "oracle:{name}")?;
                for (i, (k, v)) in params.iter().enumerate() {
                    write!(f, "{}{k}={v}", if i == 0 { '?' } else { '&' })?;
                }
                Ok(())
            }
            ScorerUri::File(p) => write!(f, "file:{p}"),
            ScorerUri::Http(u) => f.write_str(u),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uri_parsing() {
        let u: ScorerUri = "oracle:position?min_count=3&p_hi=0.8".parse().unwrap();
        match &u {
            ScorerUri::Oracle { name, params } => {
                assert_eq!(*name, OracleName::Position);
                assert_eq!(params["min_count"], "3");
            }
            _ => panic!(),
        }
        assert_eq!(u.to_string(), "oracle:position?min_count=3&p_hi=0.8");
        assert_eq!("file:resp.jsonl".parse::<ScorerUri>().unwrap(), ScorerUri::File("resp.jsonl".into()));
        assert_eq!(
            "http://localhost:8000/".parse::<ScorerUri>().unwrap(),
            ScorerUri::Http("http://localhost:8000".into())
        );
        for bad in ["oracle:nope", "file:", "ftp://x", "oracle:uniform?x", "position"] {
            assert!(bad.parse::<ScorerUri>().is_err(), "{bad}");
        }
    }
}
