//! Causal graphs, event-type relation graphs, and the reachability plumbing
//! shared by the samplers and the evaluation harness.

mod causal;
mod dag;
mod file;
mod relation;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use causal::CausalGraph;
pub use dag::{Dag, Reachability};
pub use file::GraphFile;
pub use relation::{EventTypeId, RelationGraph};

use crate::error::{Error, Result};

/// An event in a causal graph. Indices are 1-based and render as `event<N>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct EventId(u32);

impl EventId {
    pub fn new(index: u32) -> Result<Self> {
        if index == 0 {
            return Err(Error::InvalidArgument("event indices start at 1".into()));
        }
        Ok(EventId(index))
    }

    /// Event for a 0-based vertex position.
    pub fn from_vertex(vertex: usize) -> Self {
        EventId(vertex as u32 + 1)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// 0-based vertex position.
    pub fn vertex(self) -> usize {
        self.0 as usize - 1
    }

    pub fn label(self) -> String {
        self.to_string()
    }
}

impl TryFrom<u32> for EventId {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        EventId::new(value)
    }
}

impl From<EventId> for u32 {
    fn from(id: EventId) -> u32 {
        id.0
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "event{}", self.0)
    }
}

/// A causal graph together with the relation graph typed over it.
#[derive(Clone, Debug)]
pub struct GraphPair {
    pub causal: CausalGraph,
    pub relation: RelationGraph,
}

impl GraphPair {
    /// Generates both graphs from one seed. The causal graph uses stream 0 of
    /// the seeded generator and the relation graph uses stream 1.
    pub fn generate(n: usize, seed: u64) -> Result<Self> {
        let causal = CausalGraph::generate(n, seed)?;
        let mut rng = crate::rng::stream(seed, 1);
        let relation = RelationGraph::generate(&causal, &mut rng);
        Ok(GraphPair { causal, relation })
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile::from_pair(self)
    }

    /// Canonical JSON (one line plus trailing newline). Its hash identifies
    /// the graph in dataset manifests.
    pub fn to_json(&self) -> String {
        self.to_json_with(None)
    }

    pub fn to_json_with(&self, provenance: Option<crate::provenance::Provenance>) -> String {
        let mut file = self.to_file();
        file.provenance = provenance;
        let mut s = serde_json::to_string(&file).expect("graph file serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        file.into_pair()
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_labels() {
        assert_eq!(EventId::new(84).unwrap().to_string(), "event84");
        assert_eq!(EventId::from_vertex(0).get(), 1);
        assert_eq!(EventId::new(7).unwrap().vertex(), 6);
        assert!(EventId::new(0).is_err());
    }

    #[test]
    fn zero_event_rejected_on_deserialize() {
        assert!(serde_json::from_str::<EventId>("0").is_err());
        assert_eq!(serde_json::from_str::<EventId>("5").unwrap().get(), 5);
    }
}
