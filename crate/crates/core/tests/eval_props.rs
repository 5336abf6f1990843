use proptest::prelude::*;
use tempoca::eval::{aggregate, f1_score, run_benchmark, BenchmarkGrid, Method};
use tempoca::simulate::StructureKind;
use tempoca::{Mark, SummaryCausalGraph};

const G: usize = 5;

fn graph(edges: &[(usize, usize, bool)]) -> SummaryCausalGraph {
    let mut g = SummaryCausalGraph::with_nodes(G);
    for &(a, b, both) in edges {
        if a == b {
            continue;
        }
        if both {
            g.add_bidirected(a, b).unwrap();
        } else {
            g.add_directed(a, b).unwrap();
        }
    }
    g
}

fn edge_list() -> impl Strategy<Value = Vec<(usize, usize, bool)>> {
    prop::collection::vec((0..G, 0..G, prop::bool::weighted(0.2)), 0..10)
}

proptest! {
    #[test]
    fn relabeling_both_graphs_keeps_the_score(
        est in edge_list(),
        truth in edge_list(),
        perm in Just((0..G).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let (e, t) = (graph(&est), graph(&truth));
        let before = f1_score(&e, &t).unwrap();
        let after = f1_score(&e.relabeled(&perm).unwrap(), &t.relabeled(&perm).unwrap()).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn dropping_a_false_positive_never_lowers_f1(est in edge_list(), truth in edge_list()) {
        let (e, t) = (graph(&est), graph(&truth));
        let base = f1_score(&e, &t).unwrap();
        for edge in e.edges() {
            let hit = match edge.mark {
                Mark::Bidirected => t.mark(edge.from, edge.to) == Mark::Bidirected,
                _ => t.mark(edge.from, edge.to) == Mark::Directed,
            };
            if hit {
                continue;
            }
            let mut smaller = e.clone();
            smaller.remove(edge.from, edge.to);
            prop_assert!(f1_score(&smaller, &t).unwrap().f1 >= base.f1);
        }
    }
}

#[test]
fn aggregates_match_recomputation() {
    let grid = BenchmarkGrid::new(
        vec![StructureKind::Fork, StructureKind::Mediator],
        vec![400],
        (0..6).collect(),
        vec![Method::Pwgc],
    );
    let res = run_benchmark(&grid, None, 2).unwrap();
    assert_eq!(res.rows.len(), 12);
    assert_eq!(aggregate(&res.rows), res.aggregates);
    for a in &res.aggregates {
        let f1s: Vec<f64> = res
            .rows
            .iter()
            .filter(|r| r.structure == a.structure && r.method == a.method)
            .map(|r| r.f1)
            .collect();
        let mean = f1s.iter().sum::<f64>() / f1s.len() as f64;
        let var = f1s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (f1s.len() - 1) as f64;
        assert!((a.mean_f1 - mean).abs() <= 1e-12);
        assert!((a.std_f1 - var.sqrt()).abs() <= 1e-12);
    }
}
