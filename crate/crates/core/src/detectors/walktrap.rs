use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use crate::community::Partition;
use crate::graph::{Graph, VertexOrdering};
use crate::seed::pair_key;

/// Default random-walk length.
pub const WALKTRAP_DEFAULT_STEPS: usize = 4;

/// Self-loop weight added to each vertex before walking: the mean weight of
/// its incident edges (1 for unweighted graphs and isolated vertices).
fn loop_weight(g: &Graph, v: usize) -> f64 {
    if g.degree(v) == 0 {
        1.0
    } else {
        g.strength(v) / g.degree(v) as f64
    }
}

/// `t`-step transition probabilities `P^t[i][.]` of the lazy walk (each
/// vertex carries a self-loop). Rows are probability distributions.
pub fn walk_profiles(g: &Graph, steps: usize) -> Vec<Vec<f64>> {
    let n = g.n();
    let loops: Vec<f64> = (0..n).map(|v| loop_weight(g, v)).collect();
    let degree: Vec<f64> = (0..n).map(|v| g.strength(v) + loops[v]).collect();
    (0..n)
        .map(|start| {
            let mut cur = vec![0.0; n];
            cur[start] = 1.0;
            let mut next = vec![0.0; n];
            for _ in 0..steps {
                next.iter_mut().for_each(|x| *x = 0.0);
                for v in 0..n {
                    let mass = cur[v];
                    if mass == 0.0 {
                        continue;
                    }
                    let share = mass / degree[v];
                    next[v] += share * loops[v];
                    for (u, w) in g.weighted_neighbors(v) {
                        next[u] += share * w;
                    }
                }
                std::mem::swap(&mut cur, &mut next);
            }
            cur
        })
        .collect()
}

#[derive(Debug, PartialEq)]
struct Candidate {
    delta: f64,
    tie: u64,
    a: usize,
    b: usize,
}

impl Eq for Candidate {}

// min-heap on delta
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .delta
            .total_cmp(&self.delta)
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

struct Community {
    size: usize,
    profile: Vec<f64>,
    /// adjacent community -> total edge weight between them (original graph)
    links: BTreeMap<usize, f64>,
    strength: f64,
}

/// Pons-Latapy walktrap.
///
/// Vertices are compared through their `steps`-step random-walk profiles with
/// the degree-normalised Euclidean distance. Adjacent communities are merged
/// by smallest increase of the Ward criterion
/// `|C1||C2| / (|C1|+|C2|) * r^2(C1,C2) / n` and the dendrogram is cut at
/// maximal modularity. Community `i` starts as `ordering[i]`; equal increases
/// are ordered by a pseudo-random key of `(seed, i, j)`.
pub fn walktrap(g: &Graph, ordering: &VertexOrdering, seed: u64, steps: usize) -> Partition {
    let n = g.n();
    let total = g.total_weight();
    if n == 0 || total <= 0.0 {
        return Partition::singletons(n);
    }
    let m2 = 2.0 * total;
    let perm = ordering.perm();
    let rank = ordering.ranks();
    let loops: Vec<f64> = (0..n).map(|v| loop_weight(g, v)).collect();
    let inv_degree: Vec<f64> = (0..n).map(|v| 1.0 / (g.strength(v) + loops[v])).collect();
    let profiles = walk_profiles(g, steps);

    let mut comms: Vec<Option<Community>> = Vec::with_capacity(2 * n);
    for &v in perm {
        comms.push(Some(Community {
            size: 1,
            profile: profiles[v].clone(),
            links: g.weighted_neighbors(v).map(|(u, w)| (rank[u], w)).collect(),
            strength: g.strength(v),
        }));
    }
    drop(profiles);

    let distance = |x: &Community, y: &Community| -> f64 {
        let r2: f64 = x
            .profile
            .iter()
            .zip(&y.profile)
            .zip(&inv_degree)
            .map(|((p, q), d)| (p - q) * (p - q) * d)
            .sum();
        let (sx, sy) = (x.size as f64, y.size as f64);
        sx * sy / (sx + sy) * r2 / n as f64
    };

    let mut heap = BinaryHeap::new();
    for i in 0..n {
        let ci = comms[i].as_ref().expect("alive");
        for &j in ci.links.keys() {
            if i < j {
                let cj = comms[j].as_ref().expect("alive");
                heap.push(Candidate {
                    delta: distance(ci, cj),
                    tie: pair_key(seed, i, j),
                    a: i,
                    b: j,
                });
            }
        }
    }

    let mut q: f64 = -(0..n).map(|i| (comms[i].as_ref().unwrap().strength / m2).powi(2)).sum::<f64>();
    let mut best_q = q;
    let mut merges: Vec<(usize, usize, usize)> = Vec::new();
    let mut best_len = 0;

    while let Some(c) = heap.pop() {
        if comms[c.a].is_none() || comms[c.b].is_none() {
            continue;
        }
        let x = comms[c.a].take().expect("alive");
        let y = comms[c.b].take().expect("alive");
        let id = comms.len();
        let between = x.links.get(&c.b).copied().unwrap_or(0.0);
        q += 2.0 * (between / m2 - (x.strength / m2) * (y.strength / m2));
        let (sx, sy) = (x.size as f64, y.size as f64);
        let profile: Vec<f64> = x
            .profile
            .iter()
            .zip(&y.profile)
            .map(|(p, r)| (sx * p + sy * r) / (sx + sy))
            .collect();
        let mut links = x.links;
        links.remove(&c.b);
        for (k, w) in y.links {
            if k != c.a {
                *links.entry(k).or_insert(0.0) += w;
            }
        }
        for (&k, &w) in &links {
            let other = comms[k].as_mut().expect("linked communities are alive");
            other.links.remove(&c.a);
            other.links.remove(&c.b);
            other.links.insert(id, w);
        }
        let merged = Community {
            size: x.size + y.size,
            profile,
            links,
            strength: x.strength + y.strength,
        };
        for &k in merged.links.keys() {
            let other = comms[k].as_ref().expect("alive");
            heap.push(Candidate {
                delta: distance(&merged, other),
                tie: pair_key(seed, k, id),
                a: k.min(id),
                b: k.max(id),
            });
        }
        comms.push(Some(merged));
        merges.push((c.a, c.b, id));
        if q > best_q + 1e-12 {
            best_q = q;
            best_len = merges.len();
        }
    }

    // replay merges up to the modularity peak
    let mut root: Vec<usize> = (0..comms.len()).collect();
    for &(a, b, id) in &merges[..best_len] {
        root[a] = id;
        root[b] = id;
    }
    let resolve = |mut x: usize| {
        while root[x] != x {
            x = root[x];
        }
        x
    };
    let mut labels = vec![0; n];
    for i in 0..n {
        labels[perm[i]] = resolve(i);
    }
    Partition::new(labels).normalized()
}
