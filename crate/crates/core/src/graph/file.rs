use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CausalGraph, EventId, GraphPair, RelationGraph};
use crate::error::{Error, Result};
use crate::provenance::Provenance;

/// On-disk form of a [`GraphPair`]. Edge lists are sorted and `type_of`
/// maps each event index to its type position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub n: usize,
    pub seed: u64,
    pub roots: Vec<EventId>,
    pub edges: Vec<(EventId, EventId)>,
    pub types: Vec<usize>,
    pub type_of: BTreeMap<u32, usize>,
}

impl GraphFile {
    pub fn from_pair(pair: &GraphPair) -> Self {
        let causal = &pair.causal;
        GraphFile {
            provenance: None,
            n: causal.n(),
            seed: causal.seed(),
            roots: causal.roots().to_vec(),
            edges: causal.edges(),
            types: (0..pair.relation.type_count()).collect(),
            type_of: causal
                .events()
                .map(|e| (e.get(), pair.relation.type_of(e).0))
                .collect(),
        }
    }

    pub fn into_pair(self) -> Result<GraphPair> {
        let causal = CausalGraph::from_parts(self.n, self.seed, self.roots, &self.edges)?;
        if self.types != (0..self.types.len()).collect::<Vec<_>>() {
            return Err(Error::InvalidGraph("types must list positions 0..k in order".into()));
        }
        if self.type_of.len() != self.n || self.type_of.keys().any(|&k| k == 0 || k as usize > self.n) {
            return Err(Error::InvalidGraph("type_of must cover exactly events 1..=n".into()));
        }
        let type_of: Vec<usize> = self.type_of.into_values().collect();
        let relation = RelationGraph::from_types(&causal, self.types.len(), type_of)?;
        Ok(GraphPair { causal, relation })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_stable() {
        let pair = GraphPair::generate(100, 11).unwrap();
        let json = pair.to_json();
        let back = GraphPair::from_json(&json).unwrap();
        assert_eq!(back.causal, pair.causal);
        assert_eq!(back.relation, pair.relation);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn generation_is_byte_deterministic() {
        assert_eq!(
            GraphPair::generate(100, 5).unwrap().to_json(),
            GraphPair::generate(100, 5).unwrap().to_json()
        );
    }

    #[test]
    fn tampered_files_are_rejected() {
        let pair = GraphPair::generate(20, 3).unwrap();
        let mut file = pair.to_file();
        let (u, v) = file.edges[0];
        file.edges.push((v, u));
        assert!(file.clone().into_pair().is_err());

        let mut file = pair.to_file();
        file.type_of.remove(&1);
        assert!(file.into_pair().is_err());

        let mut file = pair.to_file();
        for t in file.type_of.values_mut() {
            *t = 0;
        }
        file.types = vec![0];
        assert!(file.into_pair().is_err());
    }
}
