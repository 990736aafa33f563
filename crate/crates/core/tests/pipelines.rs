use ftspan::experiment::{build_pipeline, comparison_pipelines, Pipeline, PipelineSpec};
use ftspan::generate::{generate, GeneratorSpec};
use ftspan::graph::{read_edge_list, write_edge_list, FaultKind};
use ftspan::oracle::{verify_claim, VerifyMode};
use ftspan::spanner::Spanner;

#[test]
fn every_pipeline_meets_its_claim_on_a_grid() {
    let g = generate(&GeneratorSpec::Grid { rows: 4, cols: 5 }, 0).unwrap().graph;
    let mut specs: Vec<PipelineSpec> = Pipeline::ALL.into_iter().map(PipelineSpec::new).collect();
    specs.push(PipelineSpec::new(Pipeline::Alg1Preserver).with_kind(FaultKind::Vertex));
    specs.push(PipelineSpec::new(Pipeline::Alg1TwoAdditive).with_kind(FaultKind::Vertex));
    specs.push(PipelineSpec::new(Pipeline::UnionF).with_faults(2));
    for spec in specs {
        let h = build_pipeline(&g, &spec).unwrap().spanner;
        let report = verify_claim(&g, &h, VerifyMode::Exhaustive).unwrap();
        assert!(report.pass, "{}: {}", spec.label(), report.to_json());
    }
}

#[test]
fn spanner_documents_survive_a_file_round_trip() {
    let g = generate(&GeneratorSpec::Gnp { n: 40, prob: 0.2, connected: true }, 9).unwrap().graph;
    let g2 = read_edge_list(&write_edge_list(&g)).unwrap();
    for spec in comparison_pipelines() {
        let h = build_pipeline(&g, &spec).unwrap().spanner;
        let back = Spanner::from_json(&h.to_json(), &g2).unwrap();
        assert_eq!(back.edges(), h.edges());
        assert_eq!(back.claim(), h.claim());
    }
}

#[test]
fn generators_are_reproducible() {
    let spec = GeneratorSpec::RandomRegular { n: 50, degree: 4 };
    let a = generate(&spec, 11).unwrap();
    let b = generate(&spec, 11).unwrap();
    assert_eq!(a.graph.edges(), b.graph.edges());
    assert_ne!(a.graph.edges(), generate(&spec, 12).unwrap().graph.edges());
    assert!((0..50).all(|v| a.graph.degree(v) == 4));
}
