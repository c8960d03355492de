use serde::{Deserialize, Serialize};

use crate::dataset::SplitStats;
use crate::graph::{CausalGraph, EventId};

/// Evaluation pairs drawn from a causal graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSets {
    /// Direct edges `(cause, effect)`, sorted.
    pub causal: Vec<(EventId, EventId)>,
    /// Pairs `(a, b)` with `a < b` where neither is an ancestor of the other.
    pub unrelated: Vec<(EventId, EventId)>,
}

impl TestSets {
    /// Pairs joined only through a longer path (indirect causes) belong to
    /// neither set.
    pub fn build(graph: &CausalGraph) -> Self {
        let reach = graph.reachability();
        let n = graph.n();
        let mut unrelated = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if !reach.related(a, b) {
                    unrelated.push((EventId::from_vertex(a), EventId::from_vertex(b)));
                }
            }
        }
        TestSets {
            causal: graph.edges(),
            unrelated,
        }
    }

    /// Keeps only pairs whose events were mentioned together at least once,
    /// according to `co_mentioned`.
    pub fn restrict(&self, mut co_mentioned: impl FnMut(EventId, EventId) -> bool) -> Self {
        let mut keep = |v: &Vec<(EventId, EventId)>| {
            v.iter()
                .copied()
                .filter(|&(a, b)| co_mentioned(a, b))
                .collect::<Vec<_>>()
        };
        TestSets {
            causal: keep(&self.causal),
            unrelated: keep(&self.unrelated),
        }
    }

    /// Keeps pairs mentioned together in at least one statement of `stats`.
    pub fn restrict_to_mentioned(&self, stats: &SplitStats) -> Self {
        let counts = stats.mention_counts(None);
        self.restrict(|a, b| counts.contains_key(&(a, b)) || counts.contains_key(&(b, a)))
    }

    pub fn get(&self, kind: super::TestSetKind) -> &[(EventId, EventId)] {
        match kind {
            super::TestSetKind::Causal => &self.causal,
            super::TestSetKind::Unrelated => &self.unrelated,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(i: u32) -> EventId {
        EventId::new(i).unwrap()
    }

    #[test]
    fn chain_excludes_indirect_pairs() {
        let g = CausalGraph::from_parts(3, 0, vec![ev(1)], &[(ev(1), ev(2)), (ev(2), ev(3))]).unwrap();
        let sets = TestSets::build(&g);
        assert_eq!(sets.causal, vec![(ev(1), ev(2)), (ev(2), ev(3))]);
        assert!(sets.unrelated.is_empty());
    }

    #[test]
    fn disjoint_roots_are_unrelated() {
        let g = CausalGraph::from_parts(4, 0, vec![ev(1), ev(3)], &[(ev(1), ev(2)), (ev(3), ev(4))]).unwrap();
        let sets = TestSets::build(&g);
        assert_eq!(
            sets.unrelated,
            vec![(ev(1), ev(3)), (ev(1), ev(4)), (ev(2), ev(3)), (ev(2), ev(4))]
        );
    }
}
