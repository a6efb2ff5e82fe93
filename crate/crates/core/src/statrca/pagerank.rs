use super::report::HealthReport;
use super::{CausalGraph, StatConfig};

/// Weighted PageRank by power iteration.
///
/// `edges` are `(from, to, weight)` over `0..n`. A vertex whose outgoing
/// weight is zero is dangling and spreads its mass uniformly. Teleport is
/// uniform. Iterates until the L1 change drops below `epsilon` or
/// `max_iters` is reached. Returns the scores and the iteration count.
pub fn weighted_pagerank(
    n: usize,
    edges: &[(usize, usize, f64)],
    damping: f64,
    epsilon: f64,
    max_iters: usize,
) -> (Vec<f64>, usize) {
    if n == 0 {
        return (Vec::new(), 0);
    }
    let mut out_weight = vec![0.0; n];
    for &(from, _, w) in edges {
        out_weight[from] += w;
    }
    let uniform = 1.0 / n as f64;
    let mut rank = vec![uniform; n];
    let mut next = vec![0.0; n];
    let mut iters = 0;
    while iters < max_iters {
        iters += 1;
        let dangling: f64 = rank
            .iter()
            .zip(&out_weight)
            .filter(|(_, w)| **w <= 0.0)
            .map(|(r, _)| r)
            .sum();
        let base = (1.0 - damping) * uniform + damping * dangling * uniform;
        next.iter_mut().for_each(|v| *v = base);
        for &(from, to, w) in edges {
            if out_weight[from] > 0.0 {
                next[to] += damping * rank[from] * w / out_weight[from];
            }
        }
        let delta: f64 = next.iter().zip(&rank).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if delta < epsilon {
            break;
        }
    }
    (rank, iters)
}

/// Scores each vertex on the reversed causal graph so that mass flows from
/// effects toward their causes, then emits the top-K report.
pub fn pagerank_rank(g: &CausalGraph, cfg: &StatConfig) -> HealthReport {
    let reversed: Vec<(usize, usize, f64)> = g
        .edges
        .iter()
        .filter_map(|e| Some((g.index_of(&e.effect)?, g.index_of(&e.cause)?, e.weight)))
        .collect();
    let (scores, _) = weighted_pagerank(
        g.vertices.len(),
        &reversed,
        cfg.damping,
        cfg.pagerank_epsilon,
        cfg.pagerank_max_iters,
    );
    HealthReport::from_scores(g.vertices.iter().cloned().zip(scores).collect(), cfg.k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statrca::{CausalEdge, SeriesRef};

    fn v(name: &str) -> SeriesRef {
        SeriesRef::new("L", name, "m")
    }

    #[test]
    fn isolated_vertices_share_rank_one() {
        let g = CausalGraph {
            vertices: vec![v("a"), v("b")],
            edges: vec![],
            notes: vec![],
        };
        let report = pagerank_rank(&g, &StatConfig::default());
        assert_eq!(report.ranked_causes.len(), 2);
        for c in &report.ranked_causes {
            assert_eq!(c.rank, 1);
            assert!((c.score - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_cause_ranks_first() {
        let edge = |c: &str, e: &str| CausalEdge {
            cause: v(c),
            effect: v(e),
            p_value: 0.001,
            weight: 0.8,
        };
        let g = CausalGraph {
            vertices: vec![v("a"), v("b"), v("c")],
            edges: vec![edge("a", "b"), edge("b", "c")],
            notes: vec![],
        };
        let report = pagerank_rank(&g, &StatConfig::default());
        assert_eq!(report.ranked_causes[0].node, "a");
        assert_eq!(report.ranked_causes[1].node, "b");
        assert_eq!(report.ranked_causes[2].node, "c");
        let total: f64 = report.ranked_causes.iter().map(|c| c.score).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn scores_form_a_distribution() {
        let (r, iters) = weighted_pagerank(
            4,
            &[(0, 1, 1.0), (1, 2, 0.5), (2, 0, 0.2), (1, 0, 0.3)],
            0.85,
            1e-12,
            500,
        );
        assert!(iters < 500);
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(r.iter().all(|x| *x >= 0.0));
    }
}
