//! Event chains and scenarios: bundles of typed relation facts about events
//! drawn from causally independent chains.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CausalGraph, EventId, Reachability, RelationGraph};

const CHAIN_COUNT_GEOMETRIC_P: f64 = 0.25;
const NON_OCCURRING_P: f64 = 0.2;
const TEMPORAL_P: f64 = 0.5;
const SPATIAL_P: f64 = 0.4;
const COUNTERFACTUAL_P: f64 = 0.4;
const CROSS_COUNTERFACTUAL_P: f64 = 0.2;
const MAX_CHAIN_RESAMPLES: u32 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Temporal,
    SpatialPos,
    SpatialNeg,
    CfPos,
    CfNeg,
    Occurrence,
    ExplicitCausal,
    ExplicitNotCausal,
}

impl RelationKind {
    pub const ALL: [RelationKind; 8] = [
        RelationKind::Temporal,
        RelationKind::SpatialPos,
        RelationKind::SpatialNeg,
        RelationKind::CfPos,
        RelationKind::CfNeg,
        RelationKind::Occurrence,
        RelationKind::ExplicitCausal,
        RelationKind::ExplicitNotCausal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Temporal => "temporal",
            RelationKind::SpatialPos => "spatial_pos",
            RelationKind::SpatialNeg => "spatial_neg",
            RelationKind::CfPos => "cf_pos",
            RelationKind::CfNeg => "cf_neg",
            RelationKind::Occurrence => "occurrence",
            RelationKind::ExplicitCausal => "explicit_causal",
            RelationKind::ExplicitNotCausal => "explicit_not_causal",
        }
    }

    pub fn is_binary(self) -> bool {
        self != RelationKind::Occurrence
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RelationKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown relation kind `{s}`")))
    }
}

/// A typed fact about one or two events, before verbalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationInstance {
    pub kind: RelationKind,
    pub x: EventId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<EventId>,
}

impl RelationInstance {
    pub fn binary(kind: RelationKind, x: EventId, y: EventId) -> Result<Self> {
        if !kind.is_binary() {
            return Err(Error::InvalidArgument(format!("{kind} takes a single event")));
        }
        if x == y {
            return Err(Error::InvalidArgument(format!("{kind} needs two distinct events, got {x} twice")));
        }
        Ok(RelationInstance { kind, x, y: Some(y) })
    }

    pub fn occurrence(x: EventId) -> Self {
        RelationInstance {
            kind: RelationKind::Occurrence,
            x,
            y: None,
        }
    }

    pub fn events(&self) -> impl Iterator<Item = EventId> {
        std::iter::once(self.x).chain(self.y)
    }
}

/// A root-to-endpoint causal path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventChain {
    pub root: EventId,
    pub path: Vec<EventId>,
    pub occurring: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainDraw {
    pub chains: Vec<EventChain>,
    /// Root sets that had to be redrawn because some root had no usable
    /// endpoint.
    pub resamples: u32,
}

/// Which relation blocks a scenario draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelationMix {
    pub temporal: bool,
    pub spatial: bool,
    pub counterfactual: bool,
    /// Emit "eventN happened" for every occurring event that appears in a
    /// relation.
    pub occurrence: bool,
}

impl Default for RelationMix {
    fn default() -> Self {
        RelationMix {
            temporal: true,
            spatial: true,
            counterfactual: true,
            occurrence: true,
        }
    }
}

impl RelationMix {
    pub fn only(temporal: bool, spatial: bool, counterfactual: bool) -> Self {
        RelationMix {
            temporal,
            spatial,
            counterfactual,
            occurrence: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub index: u64,
    pub chains: Vec<EventChain>,
    pub relations: Vec<RelationInstance>,
    pub resamples: u32,
}

/// Samples chains and scenarios over a fixed pair of graphs.
#[derive(Clone, Debug)]
pub struct ScenarioSampler<'a> {
    causal: &'a CausalGraph,
    relation: &'a RelationGraph,
    reach: Reachability,
}

impl<'a> ScenarioSampler<'a> {
    pub fn new(causal: &'a CausalGraph, relation: &'a RelationGraph) -> Self {
        ScenarioSampler {
            causal,
            relation,
            reach: causal.reachability(),
        }
    }

    pub fn reachability(&self) -> &Reachability {
        &self.reach
    }

    /// Draws `1 + Geometric(0.25)` distinct roots (capped at the number of
    /// roots), grows one chain per root toward an endpoint that no other
    /// drawn root reaches, then marks `Binomial(n - 1, 0.2)` chains as not
    /// occurring. A root set with no valid endpoints is redrawn along with
    /// its size.
    pub fn sample_chains<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ChainDraw> {
        let roots = self.causal.roots();
        let chain_count = Geometric::new(CHAIN_COUNT_GEOMETRIC_P).expect("valid geometric parameter");

        for resamples in 0..=MAX_CHAIN_RESAMPLES {
            // The count is redrawn too: when every root is drawn, one root
            // can have all its descendants shared with another, and only a
            // smaller set succeeds.
            let count = (chain_count.sample(rng).saturating_add(1) as usize).min(roots.len());
            let picked: Vec<usize> = index::sample(rng, roots.len(), count)
                .into_iter()
                .map(|i| roots[i].vertex())
                .collect();
            let mut chains = Vec::with_capacity(count);
            for &root in &picked {
                match self.grow_chain(root, &picked, rng) {
                    Some(path) => chains.push(EventChain {
                        root: EventId::from_vertex(root),
                        path,
                        occurring: true,
                    }),
                    None => break,
                }
            }
            if chains.len() < count {
                continue;
            }
            let dropped = Binomial::new(count as u64 - 1, NON_OCCURRING_P)
                .expect("valid binomial parameters")
                .sample(rng) as usize;
            for i in index::sample(rng, count, dropped) {
                chains[i].occurring = false;
            }
            return Ok(ChainDraw { chains, resamples });
        }
        Err(Error::Sampling(format!(
            "no chain set found after {MAX_CHAIN_RESAMPLES} root redraws"
        )))
    }

    fn grow_chain<R: Rng + ?Sized>(&self, root: usize, picked: &[usize], rng: &mut R) -> Option<Vec<EventId>> {
        let dag = self.causal.dag();
        let dist = dag.distances_from(root).expect("root in graph");
        let max_depth = dist.iter().flatten().copied().max().unwrap_or(0);
        if max_depth == 0 {
            return None;
        }
        let mut depth = rng.random_range(1..=max_depth);
        let endpoints = loop {
            let candidates: Vec<usize> = (0..dag.len())
                .filter(|&v| dist[v] == Some(depth))
                .filter(|&v| picked.iter().all(|&o| o == root || !self.reach.reaches(o, v)))
                .collect();
            if !candidates.is_empty() {
                break candidates;
            }
            depth -= 1;
            if depth == 0 {
                return None;
            }
        };
        let end = endpoints[rng.random_range(0..endpoints.len())];
        Some(self.shortest_path(root, end, &dist, rng))
    }

    /// One shortest `root -> end` path, uniform over all shortest paths.
    fn shortest_path<R: Rng + ?Sized>(
        &self,
        root: usize,
        end: usize,
        dist: &[Option<usize>],
        rng: &mut R,
    ) -> Vec<EventId> {
        let dag = self.causal.dag();
        let mut order: Vec<usize> = (0..dag.len()).filter(|&v| dist[v].is_some()).collect();
        order.sort_by_key(|&v| dist[v]);
        let mut paths = vec![0u128; dag.len()];
        paths[root] = 1;
        for &u in &order {
            for &c in dag.children(u) {
                if dist[c] == dist[u].map(|d| d + 1) {
                    paths[c] = paths[c].saturating_add(paths[u]);
                }
            }
        }
        let mut path = vec![end];
        let mut cur = end;
        while cur != root {
            let want = dist[cur].unwrap() - 1;
            let preds: Vec<usize> = dag
                .parents(cur)
                .iter()
                .copied()
                .filter(|&p| dist[p] == Some(want))
                .collect();
            let total: u128 = preds.iter().map(|&p| paths[p]).sum();
            let mut ticket = rng.random_range(0..total);
            let mut next = preds[preds.len() - 1];
            for &p in &preds {
                if ticket < paths[p] {
                    next = p;
                    break;
                }
                ticket -= paths[p];
            }
            path.push(next);
            cur = next;
        }
        path.reverse();
        path.into_iter().map(EventId::from_vertex).collect()
    }

    /// Draws relation facts for the occurring chains of `chains`.
    ///
    /// Per occurring chain, in order: a temporal block, a spatial block, a
    /// within-chain counterfactual block, and a cross-chain counterfactual
    /// block. Each block draws `Binomial(len, q)` source events without
    /// replacement and pairs each with a partner event. Occurrence facts for
    /// a chain's mentioned events precede that chain's relations. Exact
    /// duplicates are dropped.
    pub fn sample_scenario<R: Rng + ?Sized>(
        &self,
        index: u64,
        draw: ChainDraw,
        mix: RelationMix,
        rng: &mut R,
    ) -> Scenario {
        let occurring: Vec<&EventChain> = draw.chains.iter().filter(|c| c.occurring).collect();
        let pool: Vec<EventId> = occurring.iter().flat_map(|c| c.path.iter().copied()).collect();
        let mut seen = HashSet::new();
        let mut blocks: Vec<Vec<RelationInstance>> = Vec::with_capacity(occurring.len());

        for chain in &occurring {
            let mut block = Vec::new();
            let mut push = |rel: RelationInstance| {
                if seen.insert(rel) {
                    block.push(rel);
                }
            };
            let len = chain.path.len();
            if mix.temporal {
                for x in draw_sources(&chain.path, TEMPORAL_P, rng) {
                    let Some(y) = partner(&pool, x, rng) else { continue };
                    if let Some(rel) = self.temporal(x, y, rng) {
                        push(rel);
                    }
                }
            }
            if mix.spatial {
                for x in draw_sources(&chain.path, SPATIAL_P, rng) {
                    let Some(y) = partner(&pool, x, rng) else { continue };
                    let kind = if chain.path.contains(&y) || self.relation.co_occur(x, y) {
                        RelationKind::SpatialPos
                    } else {
                        RelationKind::SpatialNeg
                    };
                    push(pair(kind, x, y));
                }
            }
            if mix.counterfactual && len > 1 {
                for x in draw_sources(&chain.path, COUNTERFACTUAL_P, rng) {
                    let Some(y) = partner(&chain.path, x, rng) else { continue };
                    push(self.counterfactual(x, y));
                }
            }
            if mix.counterfactual {
                for x in draw_sources(&chain.path, CROSS_COUNTERFACTUAL_P, rng) {
                    let Some(y) = partner(&pool, x, rng) else { continue };
                    push(self.counterfactual(x, y));
                }
            }
            blocks.push(block);
        }

        let mentioned: HashSet<EventId> = blocks
            .iter()
            .flatten()
            .flat_map(RelationInstance::events)
            .collect();
        let mut relations = Vec::new();
        for (chain, block) in occurring.iter().zip(blocks) {
            if mix.occurrence {
                relations.extend(
                    chain
                        .path
                        .iter()
                        .filter(|e| mentioned.contains(e))
                        .map(|&e| RelationInstance::occurrence(e)),
                );
            }
            relations.extend(block);
        }

        Scenario {
            index,
            chains: draw.chains,
            relations,
            resamples: draw.resamples,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, index: u64, mix: RelationMix, rng: &mut R) -> Result<Scenario> {
        let draw = self.sample_chains(rng)?;
        Ok(self.sample_scenario(index, draw, mix, rng))
    }

    fn temporal<R: Rng + ?Sized>(&self, x: EventId, y: EventId, rng: &mut R) -> Option<RelationInstance> {
        if self.relation.precedes(x, y) {
            Some(pair(RelationKind::Temporal, x, y))
        } else if self.relation.precedes(y, x) {
            Some(pair(RelationKind::Temporal, y, x))
        } else if !self.relation.co_occur(x, y) {
            let (a, b) = if rng.random_bool(0.5) { (x, y) } else { (y, x) };
            Some(pair(RelationKind::Temporal, a, b))
        } else {
            None
        }
    }

    fn counterfactual(&self, x: EventId, y: EventId) -> RelationInstance {
        let kind = if self.reach.reaches(x.vertex(), y.vertex()) {
            RelationKind::CfPos
        } else {
            RelationKind::CfNeg
        };
        pair(kind, x, y)
    }
}

fn pair(kind: RelationKind, x: EventId, y: EventId) -> RelationInstance {
    RelationInstance { kind, x, y: Some(y) }
}

fn draw_sources<R: Rng + ?Sized>(chain: &[EventId], p: f64, rng: &mut R) -> Vec<EventId> {
    let n = Binomial::new(chain.len() as u64, p)
        .expect("valid binomial parameters")
        .sample(rng) as usize;
    index::sample(rng, chain.len(), n).into_iter().map(|i| chain[i]).collect()
}

/// Uniform draw from `pool` without `x`.
fn partner<R: Rng + ?Sized>(pool: &[EventId], x: EventId, rng: &mut R) -> Option<EventId> {
    let at = pool.iter().position(|&e| e == x);
    let others = pool.len() - usize::from(at.is_some());
    if others == 0 {
        return None;
    }
    let mut i = rng.random_range(0..others);
    if let Some(at) = at {
        if i >= at {
            i += 1;
        }
    }
    Some(pool[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphPair;

    fn ev(i: u32) -> EventId {
        EventId::new(i).unwrap()
    }

    fn two_vertex() -> (CausalGraph, RelationGraph) {
        let g = CausalGraph::from_parts(2, 0, vec![ev(1)], &[(ev(1), ev(2))]).unwrap();
        let r = RelationGraph::from_types(&g, 2, vec![0, 1]).unwrap();
        (g, r)
    }

    #[test]
    fn two_vertex_graph_has_one_chain() {
        let (g, r) = two_vertex();
        let sampler = ScenarioSampler::new(&g, &r);
        for seed in 0..50 {
            let draw = sampler.sample_chains(&mut crate::rng::stream(seed, 0)).unwrap();
            assert_eq!(
                draw.chains,
                vec![EventChain {
                    root: ev(1),
                    path: vec![ev(1), ev(2)],
                    occurring: true
                }]
            );
        }
    }

    #[test]
    fn root_sets_without_endpoints_are_redrawn() {
        // Root 1 reaches only event 3, which root 2 also reaches, so no set
        // containing both roots works, including the full set.
        let g = CausalGraph::from_parts(
            6,
            0,
            vec![ev(1), ev(2), ev(5)],
            &[(ev(1), ev(3)), (ev(2), ev(3)), (ev(2), ev(4)), (ev(5), ev(6))],
        )
        .unwrap();
        let r = RelationGraph::from_types(&g, 2, vec![0, 0, 1, 1, 0, 1]).unwrap();
        let sampler = ScenarioSampler::new(&g, &r);
        let mut redrawn = 0;
        for seed in 0..300 {
            let draw = sampler.sample_chains(&mut crate::rng::stream(seed, 0)).unwrap();
            let roots: Vec<EventId> = draw.chains.iter().map(|c| c.root).collect();
            assert!(!(roots.contains(&ev(1)) && roots.contains(&ev(2))), "{roots:?}");
            redrawn += draw.resamples;
        }
        assert!(redrawn > 0);
    }

    #[test]
    fn counterfactual_direction_follows_ancestry() {
        let (g, r) = two_vertex();
        let sampler = ScenarioSampler::new(&g, &r);
        assert_eq!(sampler.counterfactual(ev(1), ev(2)).kind, RelationKind::CfPos);
        assert_eq!(sampler.counterfactual(ev(2), ev(1)).kind, RelationKind::CfNeg);
    }

    #[test]
    fn temporal_follows_type_order() {
        let (g, r) = two_vertex();
        let sampler = ScenarioSampler::new(&g, &r);
        let mut rng = crate::rng::stream(0, 0);
        let rel = sampler.temporal(ev(2), ev(1), &mut rng).unwrap();
        assert_eq!((rel.x, rel.y), (ev(1), Some(ev(2))));
    }

    #[test]
    fn no_occurring_chain_gives_empty_scenario() {
        let (g, r) = two_vertex();
        let sampler = ScenarioSampler::new(&g, &r);
        let draw = ChainDraw {
            chains: vec![EventChain {
                root: ev(1),
                path: vec![ev(1), ev(2)],
                occurring: false,
            }],
            resamples: 0,
        };
        let s = sampler.sample_scenario(0, draw, RelationMix::default(), &mut crate::rng::stream(0, 0));
        assert!(s.relations.is_empty());
        assert_eq!(s.chains.len(), 1);
    }

    #[test]
    fn partner_never_returns_self() {
        let pool = [ev(1), ev(2), ev(3)];
        let mut rng = crate::rng::stream(3, 0);
        for _ in 0..500 {
            assert_ne!(partner(&pool, ev(2), &mut rng), Some(ev(2)));
        }
        assert_eq!(partner(&[ev(1)], ev(1), &mut rng), None);
    }

    #[test]
    fn chain_lengths_and_independence() {
        let pair = GraphPair::generate(100, 8).unwrap();
        let sampler = ScenarioSampler::new(&pair.causal, &pair.relation);
        let reach = sampler.reachability().clone();
        let mut rng = crate::rng::stream(8, 99);
        for _ in 0..300 {
            let draw = sampler.sample_chains(&mut rng).unwrap();
            for c in &draw.chains {
                assert!(c.path.len() >= 2);
                assert_eq!(c.path[0], c.root);
                assert!(c.path.windows(2).all(|w| pair.causal.has_edge(w[0], w[1])));
            }
            for (i, a) in draw.chains.iter().enumerate() {
                for b in &draw.chains[i + 1..] {
                    for &u in &a.path {
                        for &v in &b.path {
                            assert!(!reach.related(u.vertex(), v.vertex()));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn scenarios_have_no_duplicates() {
        let pair = GraphPair::generate(100, 2).unwrap();
        let sampler = ScenarioSampler::new(&pair.causal, &pair.relation);
        for i in 0..200 {
            let s = sampler
                .sample(i, RelationMix::default(), &mut crate::rng::stream(2, i))
                .unwrap();
            let set: HashSet<_> = s.relations.iter().collect();
            assert_eq!(set.len(), s.relations.len());
        }
    }

    #[test]
    fn binary_constructor_checks() {
        assert!(RelationInstance::binary(RelationKind::Temporal, ev(1), ev(1)).is_err());
        assert!(RelationInstance::binary(RelationKind::Occurrence, ev(1), ev(2)).is_err());
        assert_eq!("cf_pos".parse::<RelationKind>().unwrap(), RelationKind::CfPos);
    }
}
