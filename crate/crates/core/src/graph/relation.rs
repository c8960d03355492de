use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CausalGraph, Dag, EventId, Reachability};
use crate::error::{Error, Result};

/// Position of an event type in the temporal order of types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventTypeId(pub usize);

/// Event-type graph: events of one type co-occur, and a type edge `a -> b`
/// means every event of type `a` precedes every event of type `b`.
#[derive(Clone, Debug)]
pub struct RelationGraph {
    type_of: Vec<EventTypeId>,
    types: Dag,
    reach: Reachability,
}

impl PartialEq for RelationGraph {
    fn eq(&self, other: &Self) -> bool {
        self.type_of == other.type_of && self.types == other.types
    }
}

impl RelationGraph {
    /// Assigns a type to every event of `causal`.
    ///
    /// Events are visited in topological order (smallest label first). Each
    /// event takes a uniformly chosen existing type strictly between the
    /// largest type of its ancestors and the smallest type of its typed
    /// descendants; when that range is empty a fresh type is inserted just
    /// after the ancestors' largest type.
    pub fn generate<R: Rng + ?Sized>(causal: &CausalGraph, rng: &mut R) -> Self {
        let dag = causal.dag();
        let n = dag.len();
        let reach = causal.reachability();
        let order = dag.topological_order().expect("causal graph is acyclic");
        let mut type_of: Vec<Option<usize>> = vec![None; n];
        let mut count = 0usize;

        for v in order {
            let alpha = reach.ancestors(v).filter_map(|a| type_of[a]).max();
            let beta = reach.descendants(v).filter_map(|d| type_of[d]).min();
            let lo = alpha.map_or(0, |a| a + 1);
            let hi = beta.unwrap_or(count);
            let w = if lo < hi {
                rng.random_range(lo..hi)
            } else {
                for t in type_of.iter_mut().flatten() {
                    if *t >= lo {
                        *t += 1;
                    }
                }
                count += 1;
                lo
            };
            type_of[v] = Some(w);
        }

        let type_of: Vec<usize> = type_of.into_iter().map(|t| t.expect("every event typed")).collect();
        Self::from_assignment(dag, count, type_of).expect("generated types respect causal order")
    }

    /// Builds the type graph from an explicit assignment and checks that it
    /// is a linear extension of causal ancestry.
    pub fn from_types(causal: &CausalGraph, count: usize, type_of: Vec<usize>) -> Result<Self> {
        if type_of.len() != causal.n() {
            return Err(Error::InvalidGraph(format!(
                "type map covers {} events, graph has {}",
                type_of.len(),
                causal.n()
            )));
        }
        if let Some(t) = type_of.iter().find(|&&t| t >= count) {
            return Err(Error::InvalidGraph(format!("type {t} out of range 0..{count}")));
        }
        let graph = Self::from_assignment(causal.dag(), count, type_of)?;
        let violations = graph.violations(causal);
        if !violations.is_empty() {
            return Err(Error::InvalidGraph(violations.join("; ")));
        }
        Ok(graph)
    }

    fn from_assignment(dag: &Dag, count: usize, type_of: Vec<usize>) -> Result<Self> {
        let edges: BTreeSet<(usize, usize)> = dag
            .edges()
            .map(|(u, v)| (type_of[u], type_of[v]))
            .collect();
        let edges: Vec<(usize, usize)> = edges.into_iter().collect();
        let types = Dag::from_edges(count, &edges)?;
        let reach = Reachability::new(&types);
        Ok(RelationGraph {
            type_of: type_of.into_iter().map(EventTypeId).collect(),
            types,
            reach,
        })
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    pub fn type_of(&self, event: EventId) -> EventTypeId {
        self.type_of[event.vertex()]
    }

    pub fn type_map(&self) -> &[EventTypeId] {
        &self.type_of
    }

    /// Type-level adjacency.
    pub fn type_dag(&self) -> &Dag {
        &self.types
    }

    /// Two events co-occur when they share a type.
    pub fn co_occur(&self, a: EventId, b: EventId) -> bool {
        self.type_of(a) == self.type_of(b)
    }

    /// True iff the type of `a` is a strict ancestor of the type of `b`.
    pub fn precedes(&self, a: EventId, b: EventId) -> bool {
        self.reach.reaches(self.type_of(a).0, self.type_of(b).0)
    }

    pub fn type_ancestors(&self, t: EventTypeId) -> Result<Vec<EventTypeId>> {
        Ok(self.types.ancestors(t.0)?.into_iter().map(EventTypeId).collect())
    }

    pub fn type_descendants(&self, t: EventTypeId) -> Result<Vec<EventTypeId>> {
        Ok(self.types.descendants(t.0)?.into_iter().map(EventTypeId).collect())
    }

    pub fn violations(&self, causal: &CausalGraph) -> Vec<String> {
        let mut out = Vec::new();
        let reach = causal.reachability();
        for a in 0..causal.n() {
            for d in reach.descendants(a) {
                if self.type_of[a] >= self.type_of[d] {
                    out.push(format!(
                        "{} has type {} but its descendant {} has type {}",
                        EventId::from_vertex(a),
                        self.type_of[a].0,
                        EventId::from_vertex(d),
                        self.type_of[d].0
                    ));
                }
            }
        }
        for (u, v) in causal.dag().edges() {
            if !self.types.has_edge(self.type_of[u].0, self.type_of[v].0) {
                out.push(format!("type edge missing for causal edge {u}->{v}"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(i: u32) -> EventId {
        EventId::new(i).unwrap()
    }

    #[test]
    fn chain_gets_increasing_types() {
        let g = CausalGraph::from_parts(3, 0, vec![ev(1)], &[(ev(1), ev(2)), (ev(2), ev(3))]).unwrap();
        let mut rng = crate::rng::stream(0, 1);
        let rel = RelationGraph::generate(&g, &mut rng);
        assert_eq!(rel.type_count(), 3);
        assert!(rel.type_of(ev(1)) < rel.type_of(ev(2)));
        assert!(rel.type_of(ev(2)) < rel.type_of(ev(3)));
        assert!(rel.precedes(ev(1), ev(3)));
    }

    #[test]
    fn generated_types_respect_ancestry() {
        for seed in 0..30 {
            let g = CausalGraph::generate(100, seed).unwrap();
            let rel = RelationGraph::generate(&g, &mut crate::rng::stream(seed, 1));
            assert!(rel.violations(&g).is_empty());
            assert!((1..=100).contains(&rel.type_count()));
        }
    }

    #[test]
    fn from_types_rejects_non_extensions() {
        let g = CausalGraph::from_parts(3, 0, vec![ev(1)], &[(ev(1), ev(2)), (ev(2), ev(3))]).unwrap();
        assert!(RelationGraph::from_types(&g, 3, vec![0, 1, 2]).is_ok());
        assert!(RelationGraph::from_types(&g, 2, vec![0, 1, 1]).is_err());
        assert!(RelationGraph::from_types(&g, 3, vec![0, 1]).is_err());
    }
}
