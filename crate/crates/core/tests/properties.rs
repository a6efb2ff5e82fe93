use netrca_core::diagnosis::{
    parse_report, render_report, ActionPlan, DiagnosisReport, Hypothesis,
};
use netrca_core::faultlab::{generate_scenario, ScenarioKind, ScenarioSpec};
use netrca_core::retrieval::cosine;
use netrca_core::statrca::{
    granger_test, pagerank_rank, pearson, CausalEdge, CausalGraph, SeriesRef, StatConfig,
};
use netrca_core::topology::{parse_snapshot, serialize_snapshot};
use proptest::prelude::*;

fn series(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0..100.0f64, len)
}

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec("[a-z]{2,8}", 1..8).prop_map(|w| w.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snapshots_round_trip(kind in 0usize..8, seed in any::<u64>()) {
        let out = generate_scenario(&ScenarioSpec::default_for(ScenarioKind::ALL[kind], seed)).unwrap();
        let bytes = serialize_snapshot(&out.snapshot);
        let back = parse_snapshot(&bytes).unwrap();
        prop_assert_eq!(&back, &out.snapshot);
        prop_assert_eq!(serialize_snapshot(&back), bytes);
    }

    #[test]
    fn pearson_is_bounded_and_symmetric((x, y) in (5usize..60).prop_flat_map(|n| (series(n), series(n)))) {
        if let (Ok(r), Ok(s)) = (pearson(&x, &y), pearson(&y, &x)) {
            prop_assert!(r.abs() <= 1.0 + 1e-12);
            prop_assert!((r - s).abs() <= 1e-12);
        }
    }

    #[test]
    fn cosine_is_bounded_and_scale_free(
        (u, v) in (1usize..32).prop_flat_map(|n| (series(n), series(n))),
        c in 0.01..50.0f64,
    ) {
        if let Ok(a) = cosine(&u, &v) {
            prop_assert!(a.abs() <= 1.0 + 1e-12);
            let scaled: Vec<f64> = u.iter().map(|x| x * c).collect();
            prop_assert!((cosine(&scaled, &v).unwrap() - a).abs() <= 1e-9);
        }
    }

    #[test]
    fn granger_statistic_is_non_negative((x, y) in (14usize..80).prop_flat_map(|n| (series(n), series(n))), lag in 1usize..4) {
        let out = granger_test(&y, &x, lag, 0.05).unwrap();
        prop_assert!(out.f_statistic >= 0.0);
        prop_assert!((0.0..=1.0).contains(&out.p_value));
        prop_assert_eq!(out.df_den, y.len() - 3 * lag - 1);
    }

    #[test]
    fn rendered_reports_parse_back(
        groups in prop::collection::vec((sentence(), prop::collection::vec(sentence(), 1..3)), 1..3),
        plans in prop::collection::vec(("[A-Z][a-z]{3,8}", "[a-z]{3,6}-[0-9]{1,3}", prop::collection::vec(sentence(), 1..4)), 0..3),
        reasoning in prop::option::of(sentence()),
    ) {
        let hypotheses: Vec<Hypothesis> = groups
            .iter()
            .flat_map(|(s, hs)| hs.iter().map(move |h| Hypothesis { symptom: s.clone(), hypothesis: h.clone() }))
            .collect();
        let report = DiagnosisReport {
            symptom: groups[0].0.clone(),
            hypotheses,
            action_steps: plans
                .into_iter()
                .map(|(layer, node, steps)| ActionPlan { layer, node, steps })
                .collect(),
            reasoning_chain: reasoning.unwrap_or_default(),
            ..DiagnosisReport::default()
        };
        let text = render_report(&report);
        let parsed = parse_report(&text);
        prop_assert!(!parsed.parse_failed);
        prop_assert_eq!(&parsed.symptom, &report.symptom);
        prop_assert_eq!(&parsed.hypotheses, &report.hypotheses);
        prop_assert_eq!(&parsed.action_steps, &report.action_steps);
        prop_assert_eq!(&parsed.reasoning_chain, &report.reasoning_chain);
    }

    #[test]
    fn ranking_ignores_uniform_weight_scaling(
        edges in prop::collection::vec((0usize..6, 0usize..6, 0.05..1.0f64), 1..15),
        c in 0.1..10.0f64,
    ) {
        let v: Vec<SeriesRef> = (0..6).map(|i| SeriesRef::new("L", format!("n{i}"), "m")).collect();
        let build = |scale: f64| {
            let mut es: Vec<CausalEdge> = edges
                .iter()
                .filter(|(a, b, _)| a != b)
                .map(|&(a, b, w)| CausalEdge { cause: v[a].clone(), effect: v[b].clone(), p_value: 0.01, weight: w * scale })
                .collect();
            es.sort_by(|p, q| (&p.cause, &p.effect).cmp(&(&q.cause, &q.effect)));
            es.dedup_by(|p, q| p.cause == q.cause && p.effect == q.effect);
            CausalGraph { vertices: v.clone(), edges: es, notes: Vec::new() }
        };
        let cfg = StatConfig { pagerank_epsilon: 1e-13, pagerank_max_iters: 2000, ..StatConfig::default() }.with_k(6);
        let base = pagerank_rank(&build(1.0), &cfg);
        let scaled = pagerank_rank(&build(c), &cfg);
        for (a, b) in base.ranked_causes.iter().zip(&scaled.ranked_causes) {
            prop_assert!((a.score - b.score).abs() <= 1e-9);
        }
        let order = |r: &netrca_core::statrca::HealthReport| -> Vec<(u32, String)> {
            r.ranked_causes.iter().map(|c| (c.rank, c.node.clone())).collect()
        };
        prop_assert_eq!(order(&base), order(&scaled));
    }
}
