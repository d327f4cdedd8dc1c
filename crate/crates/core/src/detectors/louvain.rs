use rand::Rng;

use crate::community::Partition;
use crate::graph::{Graph, VertexOrdering};
use crate::seed::rng_from;

/// Weighted graph with self-loops, used for the aggregated levels.
struct LevelGraph {
    adj: Vec<Vec<(usize, f64)>>,
    loops: Vec<f64>,
    /// position of each node in the sweep
    rank: Vec<usize>,
}

impl LevelGraph {
    fn from_graph(g: &Graph, ordering: &VertexOrdering) -> Self {
        LevelGraph {
            adj: (0..g.n()).map(|v| g.weighted_neighbors(v).collect()).collect(),
            loops: vec![0.0; g.n()],
            rank: ordering.ranks(),
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn strength(&self, v: usize) -> f64 {
        self.adj[v].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.loops[v]
    }

    fn sweep_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&v| self.rank[v]);
        order
    }

    /// Collapses every community into a node; returns the new graph.
    fn aggregate(&self, comm: &[usize], count: usize) -> LevelGraph {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); count];
        let mut loops = vec![0.0; count];
        let mut rank = vec![usize::MAX; count];
        let mut scratch = vec![0.0; count];
        let mut seen = vec![false; count];
        let mut touched: Vec<usize> = Vec::new();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
        for v in 0..self.len() {
            members[comm[v]].push(v);
            rank[comm[v]] = rank[comm[v]].min(self.rank[v]);
        }
        for c in 0..count {
            for &v in &members[c] {
                loops[c] += self.loops[v];
                for &(u, w) in &self.adj[v] {
                    let cu = comm[u];
                    if cu == c {
                        // each internal edge is seen from both ends
                        loops[c] += 0.5 * w;
                    } else {
                        if !seen[cu] {
                            seen[cu] = true;
                            touched.push(cu);
                        }
                        scratch[cu] += w;
                    }
                }
            }
            touched.sort_unstable();
            for &cu in &touched {
                adj[c].push((cu, scratch[cu]));
                scratch[cu] = 0.0;
                seen[cu] = false;
            }
            touched.clear();
        }
        LevelGraph { adj, loops, rank }
    }
}

/// Runs local moving on one level. Returns the community of each node and
/// whether any node moved.
fn local_moving<R: Rng>(level: &LevelGraph, m2: f64, rng: &mut R) -> (Vec<usize>, bool) {
    let n = level.len();
    let strength: Vec<f64> = (0..n).map(|v| level.strength(v)).collect();
    let mut comm: Vec<usize> = (0..n).collect();
    let mut tot = strength.clone();
    let mut weight_to = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    let order = level.sweep_order();
    let eps = 1e-12 * m2.max(1.0);
    let mut any_move = false;
    loop {
        let mut moved = false;
        for &v in &order {
            let kv = strength[v];
            let own = comm[v];
            tot[own] -= kv;
            for &(u, w) in &level.adj[v] {
                let c = comm[u];
                if !seen[c] {
                    seen[c] = true;
                    touched.push(c);
                }
                weight_to[c] += w;
            }
            let gain = |c: usize, wt: f64| wt - tot[c] * kv / m2;
            let stay = gain(own, weight_to[own]);
            let mut best = own;
            let mut best_gain = stay;
            let mut ties = 0u32;
            touched.sort_unstable();
            for &c in &touched {
                if c == own {
                    continue;
                }
                let gc = gain(c, weight_to[c]);
                if gc > best_gain + eps {
                    best = c;
                    best_gain = gc;
                    ties = 1;
                } else if best != own && (gc - best_gain).abs() <= eps {
                    ties += 1;
                    if rng.gen_range(0..ties) == 0 {
                        best = c;
                    }
                }
            }
            for &c in &touched {
                weight_to[c] = 0.0;
                seen[c] = false;
            }
            touched.clear();
            tot[best] += kv;
            if best != own {
                comm[v] = best;
                moved = true;
                any_move = true;
            }
        }
        if !moved {
            break;
        }
    }
    (comm, any_move)
}

fn renumber(comm: &mut [usize]) -> usize {
    let mut map = vec![usize::MAX; comm.len()];
    let mut next = 0;
    for c in comm.iter_mut() {
        if map[*c] == usize::MAX {
            map[*c] = next;
            next += 1;
        }
        *c = map[*c];
    }
    next
}

/// Multi-level greedy modularity optimisation.
///
/// Nodes are swept in `ordering` order (aggregated nodes inherit the earliest
/// position of their members). A node only moves on a strict modularity gain;
/// equal best gains between candidate communities are broken at random from
/// `seed`.
pub fn louvain(g: &Graph, ordering: &VertexOrdering, seed: u64) -> Partition {
    let n = g.n();
    let m2 = 2.0 * g.total_weight();
    if m2 <= 0.0 {
        return Partition::singletons(n);
    }
    let mut rng = rng_from(seed, &[0x1a0f]);
    let mut level = LevelGraph::from_graph(g, ordering);
    let mut membership: Vec<usize> = (0..n).collect();
    loop {
        let (mut comm, moved) = local_moving(&level, m2, &mut rng);
        if !moved {
            break;
        }
        let count = renumber(&mut comm);
        for c in membership.iter_mut() {
            *c = comm[*c];
        }
        if count == level.len() {
            break;
        }
        level = level.aggregate(&comm, count);
    }
    Partition::new(membership).normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::modularity;
    use crate::graph::random_ordering;

    fn ring_of_cliques(cliques: usize, size: usize) -> Graph {
        let mut edges = Vec::new();
        for c in 0..cliques {
            let base = c * size;
            for i in 0..size {
                for j in i + 1..size {
                    edges.push((base + i, base + j));
                }
            }
            edges.push((base, ((c + 1) % cliques) * size + 1));
        }
        Graph::from_edges(cliques * size, edges).unwrap()
    }

    #[test]
    fn finds_ring_of_cliques() {
        let g = ring_of_cliques(8, 5);
        for seed in 0..5 {
            let p = louvain(&g, &random_ordering(g.n(), seed), seed);
            assert_eq!(p.num_communities(), 8);
            for c in 0..8 {
                let l = p.label(c * 5);
                assert!((0..5).all(|i| p.label(c * 5 + i) == l));
            }
        }
    }

    #[test]
    fn never_worse_than_singletons() {
        let g = ring_of_cliques(4, 4);
        let p = louvain(&g, &random_ordering(g.n(), 3), 3);
        let q = modularity(&g, &p).unwrap();
        let q0 = modularity(&g, &Partition::singletons(g.n())).unwrap();
        assert!(q >= q0);
    }

    #[test]
    fn deterministic() {
        let g = ring_of_cliques(6, 4);
        let o = random_ordering(g.n(), 9);
        assert_eq!(louvain(&g, &o, 1), louvain(&g, &o, 1));
    }
}
