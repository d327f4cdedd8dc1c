use rand::Rng;

use crate::community::Partition;
use crate::graph::{Graph, VertexOrdering};
use crate::seed::rng_from;

/// Sweep cap for label propagation.
pub const LPA_MAX_SWEEPS: usize = 100;

/// Asynchronous label propagation; see [`label_propagation_with_status`].
pub fn label_propagation(g: &Graph, ordering: &VertexOrdering, seed: u64) -> Partition {
    label_propagation_with_status(g, ordering, seed, LPA_MAX_SWEEPS).0
}

/// Vertices are visited in `ordering`; each adopts the label with the largest
/// total edge weight among its neighbours. A vertex whose current label is
/// already among the maxima keeps it, otherwise ties are drawn uniformly from
/// `seed`. Stops at the first sweep without a change, or after `max_sweeps`;
/// the flag reports whether a fixpoint was reached.
pub fn label_propagation_with_status(
    g: &Graph,
    ordering: &VertexOrdering,
    seed: u64,
    max_sweeps: usize,
) -> (Partition, bool) {
    let n = g.n();
    let mut rng = rng_from(seed, &[0x1abe1]);
    let mut labels: Vec<usize> = (0..n).collect();
    let mut score = vec![0.0f64; n];
    let mut seen = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut best: Vec<usize> = Vec::new();
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut changed = false;
        for &v in ordering.perm() {
            if g.degree(v) == 0 {
                continue;
            }
            for (u, w) in g.weighted_neighbors(v) {
                let l = labels[u];
                if !seen[l] {
                    seen[l] = true;
                    touched.push(l);
                }
                score[l] += w;
            }
            let top = touched.iter().map(|&l| score[l]).fold(f64::NEG_INFINITY, f64::max);
            let eps = 1e-12 * top.abs().max(1.0);
            best.extend(touched.iter().copied().filter(|&l| score[l] >= top - eps));
            best.sort_unstable();
            let current = labels[v];
            if best.binary_search(&current).is_err() {
                labels[v] = best[rng.gen_range(0..best.len())];
                changed = true;
            }
            for &l in &touched {
                score[l] = 0.0;
                seen[l] = false;
            }
            touched.clear();
            best.clear();
        }
        if !changed {
            converged = true;
            break;
        }
    }
    (Partition::new(labels).normalized(), converged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random_ordering;

    #[test]
    fn converges_on_cliques() {
        let mut edges = Vec::new();
        for c in 0..3 {
            for i in 0..6 {
                for j in i + 1..6 {
                    edges.push((c * 6 + i, c * 6 + j));
                }
            }
        }
        edges.push((0, 6));
        edges.push((7, 12));
        let g = Graph::from_edges(18, edges).unwrap();
        let (p, ok) = label_propagation_with_status(&g, &random_ordering(18, 4), 4, LPA_MAX_SWEEPS);
        assert!(ok);
        assert_eq!(p.num_communities(), 3);
    }

    #[test]
    fn isolated_vertices_keep_own_label() {
        let g = Graph::from_edges(4, vec![(0, 1)]).unwrap();
        let p = label_propagation(&g, &random_ordering(4, 0), 0);
        assert_eq!(p.num_communities(), 3);
    }

    #[test]
    fn zero_sweeps_reports_non_convergence() {
        let g = Graph::from_edges(3, vec![(0, 1), (1, 2)]).unwrap();
        let (p, ok) = label_propagation_with_status(&g, &random_ordering(3, 0), 0, 0);
        assert!(!ok);
        assert_eq!(p, Partition::singletons(3));
    }
}
