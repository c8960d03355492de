use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::{Dag, EventId, Reachability};
use crate::error::{Error, Result};

/// Success probability of the geometric prior on the number of roots.
const ROOT_GEOMETRIC_P: f64 = 0.64;
const MIN_ROOTS: usize = 3;
const MAX_ROOTS: usize = 6;
/// Exponent of the Zipf law on parent counts.
const PARENT_ZIPF_EXPONENT: f64 = 3.0;
const MAX_ATTEMPTS: usize = 1000;

/// Ground-truth causal DAG over events `event1..eventN`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalGraph {
    seed: u64,
    roots: Vec<EventId>,
    dag: Dag,
}

impl CausalGraph {
    /// Assembles a graph from parts and checks every structural invariant.
    pub fn from_parts(n: usize, seed: u64, roots: Vec<EventId>, edges: &[(EventId, EventId)]) -> Result<Self> {
        let pairs: Vec<(usize, usize)> = edges.iter().map(|(u, v)| (u.vertex(), v.vertex())).collect();
        let dag = Dag::from_edges(n, &pairs)?;
        let mut roots = roots;
        roots.sort_unstable();
        roots.dedup();
        for r in &roots {
            dag.check(r.vertex())?;
        }
        let graph = CausalGraph { seed, roots, dag };
        let violations = graph.violations();
        if !violations.is_empty() {
            return Err(Error::InvalidGraph(violations.join("; ")));
        }
        Ok(graph)
    }

    /// Samples a causal graph with `n` events.
    ///
    /// The root count is drawn from a geometric prior restricted to `3..=6`
    /// (and to at most `n - 2`, so at least two non-roots exist); graphs with
    /// fewer than four events get a single root. Each later vertex draws a
    /// Zipf(3) number of parents from the vertices before it, and any edge
    /// that would make it a descendant of every root is dropped. Roots left
    /// without a child are then attached to a non-root, and finally the
    /// vertex labels are shuffled.
    pub fn generate(n: usize, seed: u64) -> Result<Self> {
        let mut rng = crate::rng::stream(seed, 0);
        Self::generate_with(n, seed, &mut rng)
    }

    pub fn generate_with<R: Rng + ?Sized>(n: usize, seed: u64, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "a causal graph needs at least 2 events, got {n}"
            )));
        }
        let r = sample_root_count(n, rng);
        for _ in 0..MAX_ATTEMPTS {
            if let Some(dag) = try_build(n, r, rng) {
                let mut labels: Vec<usize> = (0..n).collect();
                labels.shuffle(rng);
                let edges: Vec<(usize, usize)> = dag.edges().map(|(u, v)| (labels[u], labels[v])).collect();
                let dag = Dag::from_edges(n, &edges)?;
                let mut roots: Vec<EventId> = (0..r).map(|i| EventId::from_vertex(labels[i])).collect();
                roots.sort_unstable();
                return Ok(CausalGraph { seed, roots, dag });
            }
        }
        Err(Error::Sampling(format!(
            "no valid causal graph with n={n}, r={r} after {MAX_ATTEMPTS} attempts"
        )))
    }

    pub fn n(&self) -> usize {
        self.dag.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn roots(&self) -> &[EventId] {
        &self.roots
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn events(&self) -> impl Iterator<Item = EventId> {
        (0..self.n()).map(EventId::from_vertex)
    }

    /// Edges sorted by (cause, effect).
    pub fn edges(&self) -> Vec<(EventId, EventId)> {
        self.dag
            .edges()
            .map(|(u, v)| (EventId::from_vertex(u), EventId::from_vertex(v)))
            .collect()
    }

    pub fn has_edge(&self, cause: EventId, effect: EventId) -> bool {
        self.dag.has_edge(cause.vertex(), effect.vertex())
    }

    fn vertex(&self, v: EventId) -> Result<usize> {
        self.dag.check(v.vertex())?;
        Ok(v.vertex())
    }

    pub fn children(&self, v: EventId) -> Result<Vec<EventId>> {
        let v = self.vertex(v)?;
        Ok(self.dag.children(v).iter().map(|&c| EventId::from_vertex(c)).collect())
    }

    pub fn ancestors(&self, v: EventId) -> Result<Vec<EventId>> {
        let v = self.vertex(v)?;
        Ok(self.dag.ancestors(v)?.into_iter().map(EventId::from_vertex).collect())
    }

    pub fn descendants(&self, v: EventId) -> Result<Vec<EventId>> {
        let v = self.vertex(v)?;
        Ok(self.dag.descendants(v)?.into_iter().map(EventId::from_vertex).collect())
    }

    pub fn distance(&self, from: EventId, to: EventId) -> Result<Option<usize>> {
        let (u, v) = (self.vertex(from)?, self.vertex(to)?);
        self.dag.distance(u, v)
    }

    pub fn reachability(&self) -> Reachability {
        Reachability::new(&self.dag)
    }

    /// Human-readable list of broken invariants; empty for a valid graph.
    ///
    /// The "not a descendant of every root" rule only applies with two or
    /// more roots: with a single root every non-root is its descendant.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.dag.topological_order().is_none() {
            out.push("graph is cyclic".to_string());
            return out;
        }
        if self.roots.is_empty() {
            out.push("no roots".into());
        }
        for &r in &self.roots {
            let v = r.vertex();
            if !self.dag.parents(v).is_empty() {
                out.push(format!("root {r} has in-degree {}", self.dag.parents(v).len()));
            }
            if self.dag.children(v).is_empty() {
                out.push(format!("root {r} has no child"));
            }
        }
        for v in 0..self.n() {
            let is_root = self.roots.binary_search(&EventId::from_vertex(v)).is_ok();
            if !is_root && self.dag.parents(v).is_empty() {
                out.push(format!("{} has no parent but is not a root", EventId::from_vertex(v)));
            }
        }
        if self.roots.len() >= 2 {
            let reach = self.reachability();
            for v in 0..self.n() {
                if self.roots.iter().all(|r| reach.reaches(r.vertex(), v)) {
                    out.push(format!("{} descends from every root", EventId::from_vertex(v)));
                }
            }
        }
        out
    }
}

fn sample_root_count<R: Rng + ?Sized>(n: usize, rng: &mut R) -> usize {
    if n < 4 {
        return 1;
    }
    let hi = MAX_ROOTS.min(n - 2);
    if hi < MIN_ROOTS {
        return hi;
    }
    // P(r = k) is proportional to (1 - p)^k on the truncated support.
    let weights: Vec<f64> = (MIN_ROOTS..=hi)
        .map(|k| (1.0 - ROOT_GEOMETRIC_P).powi(k as i32))
        .collect();
    MIN_ROOTS + sample_weighted(&weights, rng)
}

/// Zipf(3) on `1..=cap` by inverse CDF.
fn sample_parent_count<R: Rng + ?Sized>(cap: usize, rng: &mut R) -> usize {
    let weights: Vec<f64> = (1..=cap).map(|k| (k as f64).powf(-PARENT_ZIPF_EXPONENT)).collect();
    1 + sample_weighted(&weights, rng)
}

fn sample_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// One attempt on unshuffled vertices where `0..r` are the roots. Returns
/// `None` when some root cannot be given a child without breaking the
/// all-roots rule.
fn try_build<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Option<Dag> {
    let mut dag = Dag::new(n);
    let guard = r >= 2;
    let all: u64 = (1u64 << r) - 1;
    // bit i set when the vertex descends from (or is) root i
    let mut root_bits = vec![0u64; n];
    for (i, bits) in root_bits.iter_mut().enumerate().take(r) {
        *bits = 1 << i;
    }

    for v in r..n {
        let m = sample_parent_count(v, rng);
        for p in index::sample(rng, v, m).into_iter() {
            if guard && root_bits[v] | root_bits[p] == all {
                continue;
            }
            dag.add_edge(p, v);
            root_bits[v] |= root_bits[p];
        }
    }

    for root in 0..r {
        if !dag.children(root).is_empty() {
            continue;
        }
        let bit = 1u64 << root;
        let candidates: Vec<usize> = (r..n)
            .filter(|&v| {
                !guard
                    || std::iter::once(v)
                        .chain(dag.descendants(v).unwrap())
                        .all(|w| root_bits[w] | bit != all)
            })
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let v = candidates[rng.random_range(0..candidates.len())];
        for w in std::iter::once(v).chain(dag.descendants(v).unwrap()) {
            root_bits[w] |= bit;
        }
        dag.add_edge(root, v);
    }
    Some(dag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_tiny_graphs() {
        assert!(matches!(CausalGraph::generate(1, 0), Err(Error::InvalidArgument(_))));
        assert!(CausalGraph::generate(0, 0).is_err());
    }

    #[test]
    fn two_event_graph_is_a_single_edge() {
        for seed in 0..20 {
            let g = CausalGraph::generate(2, seed).unwrap();
            assert_eq!(g.roots().len(), 1);
            let root = g.roots()[0];
            let other = g.events().find(|&e| e != root).unwrap();
            assert_eq!(g.edges(), vec![(root, other)]);
        }
    }

    #[test]
    fn small_graphs_are_valid() {
        for n in 2..12 {
            for seed in 0..30 {
                let g = CausalGraph::generate(n, seed).unwrap();
                assert!(g.violations().is_empty(), "n={n} seed={seed}: {:?}", g.violations());
            }
        }
    }

    #[test]
    fn paper_scale_root_count() {
        for seed in 0..50 {
            let g = CausalGraph::generate(100, seed).unwrap();
            assert!((3..=6).contains(&g.roots().len()));
            assert!(g.violations().is_empty());
        }
    }

    #[test]
    fn root_count_prefers_small_values() {
        let mut rng = crate::rng::stream(9, 0);
        let mut counts = [0usize; 7];
        for _ in 0..20_000 {
            counts[sample_root_count(100, &mut rng)] += 1;
        }
        // P(3) / P(4) = 1 / 0.36
        let ratio = counts[3] as f64 / counts[4] as f64;
        assert!((ratio - 1.0 / 0.36).abs() < 0.25, "ratio {ratio}");
        assert_eq!(counts[0] + counts[1] + counts[2], 0);
    }

    #[test]
    fn zipf_respects_cap() {
        let mut rng = crate::rng::stream(1, 0);
        for cap in 1..5 {
            for _ in 0..500 {
                let m = sample_parent_count(cap, &mut rng);
                assert!((1..=cap).contains(&m));
            }
        }
        // P(1) = 1 / (1 + 1/8) for cap 2
        let ones = (0..20_000).filter(|_| sample_parent_count(2, &mut rng) == 1).count();
        assert!((ones as f64 / 20_000.0 - 8.0 / 9.0).abs() < 0.01);
    }

    #[test]
    fn same_seed_same_graph() {
        assert_eq!(CausalGraph::generate(100, 42).unwrap(), CausalGraph::generate(100, 42).unwrap());
        assert_ne!(CausalGraph::generate(100, 42).unwrap(), CausalGraph::generate(100, 43).unwrap());
    }

    #[test]
    fn from_parts_validates() {
        let e = |i| EventId::new(i).unwrap();
        assert!(CausalGraph::from_parts(2, 0, vec![e(1)], &[(e(1), e(2))]).is_ok());
        // root without a child
        assert!(CausalGraph::from_parts(3, 0, vec![e(1), e(3)], &[(e(1), e(2))]).is_err());
        // vertex 3 descends from both roots
        assert!(CausalGraph::from_parts(3, 0, vec![e(1), e(2)], &[(e(1), e(3)), (e(2), e(3))]).is_err());
    }
}
