use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::error::{Error, Result};

/// Directed graph over vertices `0..n` with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    children: Vec<Vec<usize>>,
    parents: Vec<Vec<usize>>,
}

impl Dag {
    pub fn new(n: usize) -> Self {
        Dag {
            children: vec![Vec::new(); n],
            parents: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from an edge list, rejecting out-of-range endpoints,
    /// self loops, and cycles. Duplicate edges collapse.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut dag = Dag::new(n);
        for &(u, v) in edges {
            dag.check(u)?;
            dag.check(v)?;
            if u == v {
                return Err(Error::InvalidGraph(format!("self loop on vertex {u}")));
            }
            dag.add_edge(u, v);
        }
        if dag.topological_order().is_none() {
            return Err(Error::InvalidGraph("graph contains a cycle".into()));
        }
        Ok(dag)
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    pub fn check(&self, v: usize) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    /// Inserts `u -> v` keeping adjacency sorted. Returns false if present.
    pub(crate) fn add_edge(&mut self, u: usize, v: usize) -> bool {
        match self.children[u].binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                self.children[u].insert(pos, v);
                let ppos = self.parents[v].binary_search(&u).unwrap_err();
                self.parents[v].insert(ppos, u);
                true
            }
        }
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.len() && self.children[u].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    /// All edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(u, cs)| cs.iter().map(move |&v| (u, v)))
    }

    /// Kahn's algorithm, smallest ready vertex first. `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<usize>> = indeg
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(v, _)| Reverse(v))
            .collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(Reverse(v)) = ready.pop() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(Reverse(c));
                }
            }
        }
        (order.len() == self.len()).then_some(order)
    }

    fn walk(&self, start: usize, forward: bool) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![start];
        let mut out = Vec::new();
        while let Some(v) = stack.pop() {
            let next = if forward {
                &self.children[v]
            } else {
                &self.parents[v]
            };
            for &w in next {
                if !seen[w] {
                    seen[w] = true;
                    out.push(w);
                    stack.push(w);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Strict descendants of `v`, sorted.
    pub fn descendants(&self, v: usize) -> Result<Vec<usize>> {
        self.check(v)?;
        Ok(self.walk(v, true))
    }

    /// Strict ancestors of `v`, sorted.
    pub fn ancestors(&self, v: usize) -> Result<Vec<usize>> {
        self.check(v)?;
        Ok(self.walk(v, false))
    }

    /// Breadth-first distances from `source` along edge direction.
    pub fn distances_from(&self, source: usize) -> Result<Vec<Option<usize>>> {
        self.check(source)?;
        let mut dist = vec![None; self.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &c in &self.children[u] {
                if dist[c].is_none() {
                    dist[c] = Some(d + 1);
                    queue.push_back(c);
                }
            }
        }
        Ok(dist)
    }

    /// Shortest directed path length from `u` to `v`.
    pub fn distance(&self, u: usize, v: usize) -> Result<Option<usize>> {
        self.check(v)?;
        Ok(self.distances_from(u)?[v])
    }
}

/// Transitive closure as one bit row per vertex: bit `d` of row `a` is set
/// iff `d` is a strict descendant of `a`.
#[derive(Clone, Debug)]
pub struct Reachability {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl Reachability {
    pub fn new(dag: &Dag) -> Self {
        let n = dag.len();
        let words = n.div_ceil(64).max(1);
        let mut rows = vec![0u64; n * words];
        let order = dag
            .topological_order()
            .expect("reachability requires an acyclic graph");
        for &v in order.iter().rev() {
            for &c in dag.children(v) {
                rows[v * words + c / 64] |= 1 << (c % 64);
                for w in 0..words {
                    let bits = rows[c * words + w];
                    rows[v * words + w] |= bits;
                }
            }
        }
        Reachability { n, words, rows }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// True iff `ancestor` reaches `descendant` by a non-empty path.
    pub fn reaches(&self, ancestor: usize, descendant: usize) -> bool {
        self.rows[ancestor * self.words + descendant / 64] >> (descendant % 64) & 1 == 1
    }

    /// True iff either vertex reaches the other.
    pub fn related(&self, a: usize, b: usize) -> bool {
        self.reaches(a, b) || self.reaches(b, a)
    }

    pub fn descendants(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&d| self.reaches(v, d))
    }

    pub fn ancestors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&a| self.reaches(a, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Dag {
        Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn rejects_cycles_and_bad_vertices() {
        assert!(Dag::from_edges(2, &[(0, 1), (1, 0)]).is_err());
        assert!(Dag::from_edges(2, &[(0, 0)]).is_err());
        assert!(matches!(
            Dag::from_edges(2, &[(0, 5)]),
            Err(Error::UnknownVertex(5))
        ));
    }

    #[test]
    fn reachability_on_chain() {
        let g = chain();
        assert_eq!(g.descendants(0).unwrap(), vec![1, 2]);
        assert_eq!(g.ancestors(2).unwrap(), vec![0, 1]);
        assert_eq!(g.distance(0, 2).unwrap(), Some(2));
        assert_eq!(g.distance(2, 0).unwrap(), None);
        assert!(g.descendants(3).is_err());
        let r = Reachability::new(&g);
        assert!(r.reaches(0, 2) && !r.reaches(2, 0) && !r.reaches(1, 1));
    }

    #[test]
    fn two_vertex_descendants() {
        let g = Dag::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(g.descendants(0).unwrap(), vec![1]);
    }

    #[test]
    fn topological_order_prefers_low_index() {
        let g = Dag::from_edges(4, &[(3, 0), (2, 1)]).unwrap();
        assert_eq!(g.topological_order().unwrap(), vec![2, 1, 3, 0]);
    }
}
