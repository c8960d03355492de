use std::collections::{BTreeMap, BTreeSet};

use relbench::dataset::{build_dataset, DatasetConfig, Manifest, MANIFEST, TRAIN_TXT};
use relbench::graph::{CausalGraph, GraphPair, RelationGraph};
use relbench::rng;
use relbench::scenario::RelationKind;
use relbench::verbalizer::{canonical_relation, split_statements, StatementParser, TemplateLibrary};
use relbench::EventId;

type Counts = BTreeMap<RelationKind, BTreeMap<(EventId, EventId), u64>>;

fn table(rows: &BTreeMap<RelationKind, Vec<(EventId, EventId, u64)>>, canonical: bool) -> Counts {
    let mut out = Counts::new();
    for (&kind, rows) in rows {
        for &(a, b, c) in rows {
            let key = if canonical {
                let r = canonical_relation(relbench::scenario::RelationInstance { kind, x: a, y: Some(b) });
                (r.x, r.y.unwrap())
            } else {
                (a, b)
            };
            *out.entry(kind).or_default().entry(key).or_default() += c;
        }
    }
    out
}

/// Recounts the manifest tables from the plain-text export alone.
#[test]
fn manifest_counts_match_parsed_text() {
    let pair = GraphPair::generate(60, 12).unwrap();
    let mut cfg = DatasetConfig::preset("all-explicit").unwrap().with_scenarios(400);
    cfg.seed = 21;
    let mut ds = build_dataset(&pair, &cfg, Some(2)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    ds.write(dir.path(), None).unwrap();
    let manifest = Manifest::load(&dir.path().join(MANIFEST)).unwrap();

    let parser = StatementParser::new(&TemplateLibrary::builtin(cfg.templates)).unwrap();
    let text = std::fs::read_to_string(dir.path().join(TRAIN_TXT)).unwrap();
    let mut args = Counts::new();
    let mut order = Counts::new();
    let mut kinds: BTreeMap<RelationKind, u64> = BTreeMap::new();
    let mut lines = 0;
    for line in text.lines() {
        lines += 1;
        for s in split_statements(line) {
            let p = parser.parse(s).unwrap();
            let rel = p.relation().expect("training statement");
            *kinds.entry(rel.kind).or_default() += 1;
            if let Some(y) = rel.y {
                *args.entry(rel.kind).or_default().entry((rel.x, y)).or_default() += 1;
                let second = if p.first == rel.x { y } else { rel.x };
                *order.entry(rel.kind).or_default().entry((p.first, second)).or_default() += 1;
            }
        }
    }
    assert_eq!(lines, manifest.train.scenarios);
    assert_eq!(kinds, manifest.train.relation_counts);
    assert_eq!(args, table(&manifest.train.pair_counts, true));
    assert_eq!(order, table(&manifest.train.mention_order, false));
}

/// Three disjoint chains with 7, 7 and 6 edges.
fn twenty_edge_graph() -> GraphPair {
    let e = |i| EventId::new(i).unwrap();
    let mut edges = Vec::new();
    for (root, body) in [(1, 4..=10), (2, 11..=17), (3, 18..=23)] {
        let mut prev = root;
        for v in body {
            edges.push((e(prev), e(v)));
            prev = v;
        }
    }
    let causal = CausalGraph::from_parts(23, 0, vec![e(1), e(2), e(3)], &edges).unwrap();
    let relation = RelationGraph::generate(&causal, &mut rng::stream(0, 0));
    GraphPair { causal, relation }
}

#[test]
fn half_of_twenty_edges_are_seen() {
    let pair = twenty_edge_graph();
    assert_eq!(pair.causal.edges().len(), 20);
    for seed in 0..5 {
        let mut cfg = DatasetConfig::preset("all-explicit").unwrap().with_scenarios(200);
        cfg.seed = seed;
        let ds = build_dataset(&pair, &cfg, None).unwrap();
        let aug = ds.manifest.augmentation.unwrap();
        let seen: BTreeSet<_> = aug.seen.iter().copied().collect();
        let unseen: BTreeSet<_> = aug.unseen.iter().copied().collect();
        assert_eq!(seen.len(), 10);
        assert_eq!(unseen.len(), 10);
        assert!(seen.is_disjoint(&unseen));
        let all: BTreeSet<_> = pair.causal.edges().into_iter().collect();
        assert_eq!(&seen | &unseen, all);

        // Explicit causal statements in training cover exactly the seen edges.
        let stated: BTreeSet<_> = ds
            .train
            .iter()
            .flat_map(|r| &r.statements)
            .filter(|s| s.kind == RelationKind::ExplicitCausal)
            .map(|s| (s.x, s.y.unwrap()))
            .collect();
        assert_eq!(stated, seen);
    }
}
