use proptest::prelude::*;
use relbench::graph::CausalGraph;
use relbench::EventId;

/// Transitive closure by boolean matrix squaring, independent of the
/// library's traversal code.
fn closure(n: usize, edges: &[(EventId, EventId)]) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; n]; n];
    for &(a, b) in edges {
        m[a.vertex()][b.vertex()] = true;
    }
    let mut steps = 1;
    while steps < n {
        let prev = m.clone();
        for i in 0..n {
            for k in 0..n {
                if prev[i][k] {
                    for j in 0..n {
                        if prev[k][j] {
                            m[i][j] = true;
                        }
                    }
                }
            }
        }
        steps *= 2;
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reachability_matches_matrix_closure(seed in any::<u64>()) {
        let g = CausalGraph::generate(20, seed).unwrap();
        let n = g.n();
        let c = closure(n, &g.edges());
        let reach = g.reachability();
        for v in g.events() {
            let i = v.vertex();
            let desc: Vec<usize> = g.descendants(v).unwrap().iter().map(|e| e.vertex()).collect();
            let anc: Vec<usize> = g.ancestors(v).unwrap().iter().map(|e| e.vertex()).collect();
            let want_desc: Vec<usize> = (0..n).filter(|&j| c[i][j]).collect();
            let want_anc: Vec<usize> = (0..n).filter(|&j| c[j][i]).collect();
            let mut sorted = desc.clone();
            sorted.sort_unstable();
            prop_assert_eq!(&sorted, &want_desc);
            let mut sorted = anc.clone();
            sorted.sort_unstable();
            prop_assert_eq!(&sorted, &want_anc);
            prop_assert!(!c[i][i], "cycle through {}", v.label());
            for w in g.events() {
                let j = w.vertex();
                if i == j {
                    continue;
                }
                prop_assert_eq!(reach.reaches(i, j), c[i][j]);
                prop_assert_eq!(g.distance(v, w).unwrap().is_some(), c[i][j]);
            }
        }
    }
}
