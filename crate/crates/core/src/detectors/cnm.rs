use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use crate::community::Partition;
use crate::graph::{Graph, VertexOrdering};
use crate::seed::pair_key;

#[derive(Debug, PartialEq)]
struct Candidate {
    gain: f64,
    tie: u64,
    a: usize,
    b: usize,
    stamp_a: u32,
    stamp_b: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then(self.tie.cmp(&other.tie))
            .then(other.a.cmp(&self.a))
            .then(other.b.cmp(&self.b))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Greedy agglomerative modularity maximisation (Clauset, Newman, Moore).
///
/// Starting from singletons, the adjacent pair of communities with the
/// largest modularity gain `2 (e_ij - a_i a_j)` is merged until no adjacent
/// pairs remain; the partition with the highest modularity seen along the way
/// is returned. Community `i` starts as vertex `ordering[i]`, and exactly equal
/// gains are ordered by a pseudo-random key of `(seed, i, j)`.
pub fn greedy_cnm(g: &Graph, ordering: &VertexOrdering, seed: u64) -> Partition {
    let n = g.n();
    let total = g.total_weight();
    if n == 0 || total <= 0.0 {
        return Partition::singletons(n);
    }
    let m2 = 2.0 * total;
    let perm = ordering.perm();
    let rank = ordering.ranks();

    // community i <-> vertex perm[i]
    let mut a: Vec<f64> = perm.iter().map(|&v| g.strength(v) / m2).collect();
    let mut links: Vec<BTreeMap<usize, f64>> = perm
        .iter()
        .map(|&v| {
            g.weighted_neighbors(v)
                .map(|(u, w)| (rank[u], w / m2))
                .collect()
        })
        .collect();
    let mut stamp = vec![0u32; n];
    let mut alive = vec![true; n];

    let mut heap = BinaryHeap::new();
    let push = |heap: &mut BinaryHeap<Candidate>, i: usize, j: usize, e: f64, a: &[f64], stamp: &[u32]| {
        let (x, y) = if i < j { (i, j) } else { (j, i) };
        heap.push(Candidate {
            gain: 2.0 * (e - a[x] * a[y]),
            tie: pair_key(seed, x, y),
            a: x,
            b: y,
            stamp_a: stamp[x],
            stamp_b: stamp[y],
        });
    };
    for i in 0..n {
        for (&j, &e) in &links[i] {
            if i < j {
                push(&mut heap, i, j, e, &a, &stamp);
            }
        }
    }

    let mut q: f64 = -a.iter().map(|x| x * x).sum::<f64>();
    let mut best_q = q;
    let mut merges: Vec<(usize, usize)> = Vec::new();
    let mut best_len = 0;

    while let Some(c) = heap.pop() {
        if !alive[c.a] || !alive[c.b] || stamp[c.a] != c.stamp_a || stamp[c.b] != c.stamp_b {
            continue;
        }
        // absorb the smaller neighbourhood into the larger one
        let (keep, gone) = if links[c.a].len() >= links[c.b].len() {
            (c.a, c.b)
        } else {
            (c.b, c.a)
        };
        q += c.gain;
        merges.push((keep, gone));
        if q > best_q {
            best_q = q;
            best_len = merges.len();
        }
        let moved = std::mem::take(&mut links[gone]);
        for (k, e) in moved {
            if k == keep {
                continue;
            }
            *links[keep].entry(k).or_insert(0.0) += e;
            let lk = &mut links[k];
            let e_gone = lk.remove(&gone).unwrap_or(0.0);
            *lk.entry(keep).or_insert(0.0) += e_gone;
        }
        links[keep].remove(&gone);
        alive[gone] = false;
        a[keep] += a[gone];
        stamp[keep] += 1;
        let neighbours: Vec<(usize, f64)> = links[keep].iter().map(|(&k, &e)| (k, e)).collect();
        for (k, e) in neighbours {
            push(&mut heap, keep, k, e, &a, &stamp);
        }
    }

    let mut parent: Vec<usize> = (0..n).collect();
    for &(keep, gone) in &merges[..best_len] {
        let (rk, rg) = (find(&mut parent, keep), find(&mut parent, gone));
        parent[rg] = rk;
    }
    let mut labels = vec![0; n];
    for i in 0..n {
        labels[perm[i]] = find(&mut parent, i);
    }
    Partition::new(labels).normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::modularity;
    use crate::graph::random_ordering;
    use crate::seed::rng_from;
    use rand::Rng;

    /// Greedy merge sequence recomputing modularity from scratch for every
    /// candidate pair of adjacent communities.
    fn naive_greedy_peak(g: &Graph) -> f64 {
        let n = g.n();
        let mut comms: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
        let label_of = |comms: &Vec<Vec<usize>>| {
            let mut l = vec![0; n];
            for (c, m) in comms.iter().enumerate() {
                for &v in m {
                    l[v] = c;
                }
            }
            Partition::new(l)
        };
        let mut best = modularity(g, &label_of(&comms)).unwrap();
        loop {
            let mut choice: Option<(f64, usize, usize)> = None;
            for i in 0..comms.len() {
                for j in i + 1..comms.len() {
                    let adjacent = comms[i]
                        .iter()
                        .any(|&u| comms[j].iter().any(|&v| g.has_edge(u, v)));
                    if !adjacent {
                        continue;
                    }
                    let mut trial = comms.clone();
                    let moved = trial.remove(j);
                    trial[i].extend(moved);
                    let q = modularity(g, &label_of(&trial)).unwrap();
                    if choice.is_none_or(|(bq, _, _)| q > bq) {
                        choice = Some((q, i, j));
                    }
                }
            }
            match choice {
                None => break,
                Some((q, i, j)) => {
                    let moved = comms.remove(j);
                    comms[i].extend(moved);
                    best = best.max(q);
                }
            }
        }
        best
    }

    #[test]
    fn matches_naive_greedy_on_small_weighted_graphs() {
        let mut rng = rng_from(5, &[]);
        for trial in 0..40 {
            let n = rng.gen_range(4..=8);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.45) {
                        edges.push((u, v, rng.gen_range(0.5..2.0)));
                    }
                }
            }
            if edges.is_empty() {
                continue;
            }
            let g = Graph::from_weighted_edges(n, edges).unwrap();
            let p = greedy_cnm(&g, &random_ordering(n, trial), trial);
            let q = modularity(&g, &p).unwrap();
            let oracle = naive_greedy_peak(&g);
            assert!((q - oracle).abs() < 1e-9, "trial {trial}: {q} vs {oracle}");
        }
    }

    #[test]
    fn peak_is_at_least_final_merge() {
        let g = Graph::from_edges(
            8,
            vec![(0, 1), (1, 2), (2, 3), (3, 0), (3, 4), (4, 5), (5, 6), (6, 7), (7, 4)],
        )
        .unwrap();
        let p = greedy_cnm(&g, &random_ordering(8, 1), 1);
        let q = modularity(&g, &p).unwrap();
        assert!(q >= modularity(&g, &Partition::single_block(8)).unwrap());
        assert_eq!(p.num_communities(), 2);
    }
}
