use relbench::dataset::{build_dataset, DatasetConfig};
use relbench::eval::{run_suite, EvalPlan, Evaluator, TieBreak};
use relbench::graph::GraphPair;
use relbench::scorer::{OracleName, Scorer, ScorerInfo, ScoreQuery, ScorerUri};

/// Hides the structured statement so the wrapped scorer sees text only.
struct TextOnly<'a>(&'a dyn Scorer);

impl Scorer for TextOnly<'_> {
    fn info(&self) -> ScorerInfo {
        self.0.info()
    }

    fn score(&self, queries: &[ScoreQuery]) -> relbench::Result<Vec<f64>> {
        let stripped: Vec<ScoreQuery> = queries.iter().map(ScoreQuery::text_only).collect();
        assert!(stripped.iter().all(|q| q.statement.is_none()));
        self.0.score(&stripped)
    }
}

#[test]
fn oracles_agree_on_text_and_structured_queries() {
    let pair = GraphPair::generate(40, 8).unwrap();
    let mut cfg = DatasetConfig::preset("all-explicit").unwrap().with_scenarios(300);
    cfg.seed = 2;
    let manifest = build_dataset(&pair, &cfg, None).unwrap().manifest;
    let plan = EvalPlan::default();
    for name in OracleName::ALL {
        let uri: ScorerUri = format!("oracle:{}?flip=0.1", name.as_str()).parse().unwrap();
        let oracle = uri.open(Some(&pair.causal), Some(&manifest)).unwrap();
        let text = TextOnly(oracle.as_ref());
        let a = Evaluator::new(oracle.as_ref()).with_tie_break(TieBreak::Random(5)).keep_pairs(true);
        let b = Evaluator::new(&text).with_tie_break(TieBreak::Random(5)).keep_pairs(true);
        let ra = run_suite(&a, &pair.causal, Some(&manifest), &plan).unwrap();
        let rb = run_suite(&b, &pair.causal, Some(&manifest), &plan).unwrap();
        assert_eq!(ra, rb, "{}", name.as_str());
        assert!(ra.position.len() == 2 && ra.seen_unseen.is_some());
    }
}
