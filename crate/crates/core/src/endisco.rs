//! Disjoint ensemble: posterior membership profiles over all base
//! communities, a vertex-by-vertex profile similarity matrix, and a final
//! re-clustering of that matrix.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::community::Partition;
use crate::detectors::BaseDetector;
use crate::ensemble::{default_k, generate_base_solutions, BaseSolutionSet, DEFAULT_K_CAP};
use crate::error::{Error, Result};
use crate::graph::{bfs_distances, induced_subgraph, random_ordering, Graph};
use crate::seed::derive_seed;

/// How strongly a vertex is involved in a community.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Involvement {
    /// Inverse of the mean hop distance to the community's members.
    #[default]
    Rcc,
    /// Inverse of the hop distance to the community's centroid.
    Idc,
}

/// Similarity between two posterior profiles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Similarity {
    #[default]
    Cos,
    /// `1 - max_i |p_i - q_i|`.
    Che,
}

impl FromStr for Involvement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rcc" => Ok(Involvement::Rcc),
            "idc" => Ok(Involvement::Idc),
            other => Err(Error::invalid(format!("unknown involvement '{other}'"))),
        }
    }
}

impl FromStr for Similarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cos" => Ok(Similarity::Cos),
            "che" => Ok(Similarity::Che),
            other => Err(Error::invalid(format!("unknown similarity '{other}'"))),
        }
    }
}

impl fmt::Display for Involvement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Involvement::Rcc => "rcc",
            Involvement::Idc => "idc",
        })
    }
}

impl fmt::Display for Similarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Similarity::Cos => "cos",
            Similarity::Che => "che",
        })
    }
}

/// RCC from precomputed hop distances of `v`. `v` itself is skipped; an
/// unreachable member makes the involvement 0.
fn rcc_from_distances(dist: &[Option<usize>], v: usize, community: &[usize]) -> f64 {
    let mut count = 0usize;
    let mut sum = 0usize;
    for &u in community {
        if u == v {
            continue;
        }
        match dist[u] {
            Some(d) => {
                count += 1;
                sum += d;
            }
            None => return 0.0,
        }
    }
    if count == 0 {
        1.0
    } else {
        count as f64 / sum as f64
    }
}

fn check_community(g: &Graph, v: usize, community: &[usize]) -> Result<()> {
    if community.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    if let Some(&bad) = community.iter().chain([&v]).find(|&&u| u >= g.n()) {
        return Err(Error::VertexOutOfRange(bad));
    }
    Ok(())
}

/// `|C| / sum_{u in C} dist(v, u)`, with `v` excluded from `C` when it is a
/// member. A singleton `{v}` scores 1; any unreachable member scores 0.
pub fn involvement_rcc(g: &Graph, v: usize, community: &[usize]) -> Result<f64> {
    check_community(g, v, community)?;
    Ok(rcc_from_distances(&bfs_distances(g, v), v, community))
}

/// Vertex of `community` with the highest closeness inside the induced
/// subgraph; lowest id on ties.
///
/// Closeness is `(r / (s - 1)) * (r / D)` with `r` the number of members
/// reachable inside the community, `s` its size and `D` the summed distance
/// to them (0 when nothing is reachable), so disconnected communities are
/// still ranked.
pub fn centroid(g: &Graph, community: &[usize]) -> Result<usize> {
    if community.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    let (sub, ids) = induced_subgraph(g, community)?;
    let s = sub.n();
    if s == 1 {
        return Ok(ids[0]);
    }
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for local in 0..s {
        let dist = bfs_distances(&sub, local);
        let (mut reach, mut total) = (0usize, 0usize);
        for d in dist.iter().flatten() {
            if *d > 0 {
                reach += 1;
                total += d;
            }
        }
        let closeness = if reach == 0 {
            0.0
        } else {
            let r = reach as f64;
            (r / (s - 1) as f64) * (r / total as f64)
        };
        let id = ids[local];
        if closeness > best.0 || (closeness == best.0 && id < best.1) {
            best = (closeness, id);
        }
    }
    Ok(best.1)
}

/// `1 / dist(v, centroid(C))`; 1 when `v` is the centroid, 0 when it cannot
/// reach it.
pub fn involvement_idc(g: &Graph, v: usize, community: &[usize]) -> Result<f64> {
    check_community(g, v, community)?;
    let c = centroid(g, community)?;
    Ok(idc_from_distances(&bfs_distances(g, v), c))
}

fn idc_from_distances(dist: &[Option<usize>], centroid: usize) -> f64 {
    match dist[centroid] {
        Some(0) => 1.0,
        Some(d) => 1.0 / d as f64,
        None => 0.0,
    }
}

/// Distances `d_v^C = 1 - INV(v, C)` of one vertex to every base community.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureProfile {
    distances: Vec<f64>,
    max: f64,
}

impl FeatureProfile {
    pub fn new(distances: Vec<f64>) -> Result<Self> {
        if distances.is_empty() {
            return Err(Error::invalid("feature profile needs at least one community"));
        }
        if let Some(bad) = distances.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(Error::invalid(format!("invalid feature distance {bad}")));
        }
        let max = distances.iter().copied().fold(0.0, f64::max);
        Ok(FeatureProfile { distances, max })
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    /// `D_v`, the largest distance.
    pub fn max_distance(&self) -> f64 {
        self.max
    }

    /// `Clu`, the number of base communities.
    pub fn communities(&self) -> usize {
        self.distances.len()
    }
}

/// Membership probabilities `P(C_i | v)` over all base communities.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorProfile(Vec<f64>);

impl PosteriorProfile {
    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }
}

/// `P(C_i|v) = (D_v - F_i + 1) / (Clu * D_v + Clu - sum_k F_k)`.
///
/// Every numerator is at least 1 and the numerators sum to the denominator.
pub fn posterior(fp: &FeatureProfile) -> PosteriorProfile {
    let clu = fp.communities() as f64;
    let d = fp.max;
    let sum: f64 = fp.distances.iter().sum();
    let denom = clu * d + clu - sum;
    PosteriorProfile(fp.distances.iter().map(|f| (d - f + 1.0) / denom).collect())
}

/// Dense symmetric `n × n` similarity matrix.
#[derive(Clone, Debug)]
pub struct EnsembleMatrix {
    n: usize,
    data: Vec<f64>,
}

impl EnsembleMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.data[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.data[u * self.n..(u + 1) * self.n]
    }
}

fn cosine(p: &[f64], q: &[f64], np: f64, nq: f64) -> f64 {
    let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
    (dot / (np * nq)).clamp(-1.0, 1.0)
}

fn chebyshev_similarity(p: &[f64], q: &[f64]) -> f64 {
    1.0 - p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Pairwise profile similarities. Only the upper triangle is computed; the
/// lower one is mirrored so the matrix is exactly symmetric.
pub fn build_ensemble_matrix(profiles: &[PosteriorProfile], sim: Similarity) -> Result<EnsembleMatrix> {
    let n = profiles.len();
    if n == 0 {
        return Err(Error::EmptyVertexSet);
    }
    let len = profiles[0].0.len();
    if let Some(p) = profiles.iter().find(|p| p.0.len() != len) {
        return Err(Error::SizeMismatch {
            expected: len,
            found: p.0.len(),
        });
    }
    let norms: Vec<f64> = profiles.iter().map(|p| p.0.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    if sim == Similarity::Cos && norms.contains(&0.0) {
        return Err(Error::invalid("zero-norm posterior profile"));
    }
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|u| {
            (u + 1..n)
                .map(|v| match sim {
                    Similarity::Cos => cosine(&profiles[u].0, &profiles[v].0, norms[u], norms[v]),
                    Similarity::Che => chebyshev_similarity(&profiles[u].0, &profiles[v].0),
                })
                .collect()
        })
        .collect();
    let mut data = vec![0.0; n * n];
    for (u, row) in upper.iter().enumerate() {
        data[u * n + u] = 1.0;
        for (i, &x) in row.iter().enumerate() {
            let v = u + 1 + i;
            data[u * n + v] = x;
            data[v * n + u] = x;
        }
    }
    Ok(EnsembleMatrix { n, data })
}

/// Weighted graph handed to the re-clustering algorithm: the edges of `g`
/// plus, for every vertex, its `ceil(avg degree)` most similar vertices
/// (ties by lower id). Edge weights are the similarities; negative cosine
/// values are clipped to 0.
pub fn sparsify(g: &Graph, matrix: &EnsembleMatrix) -> Result<Graph> {
    let n = g.n();
    if matrix.n() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: matrix.n(),
        });
    }
    let top = (g.average_degree().ceil() as usize).min(n.saturating_sub(1));
    let picks: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let row = matrix.row(u);
            let mut others: Vec<usize> = (0..n).filter(|&v| v != u).collect();
            others.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            others.truncate(top);
            others
        })
        .collect();
    let mut edges: Vec<(usize, usize, f64)> = g.edges().map(|(u, v, _)| (u, v, matrix.get(u, v).max(0.0))).collect();
    for (u, vs) in picks.iter().enumerate() {
        edges.extend(vs.iter().map(|&v| (u.min(v), u.max(v), matrix.get(u, v).max(0.0))));
    }
    // duplicates carry identical weights, so first-wins dedup is exact
    Graph::from_weighted_edges(n, edges)
}

/// Feature profiles of every vertex against every community of `base`.
pub fn feature_profiles(g: &Graph, base: &BaseSolutionSet, inv: Involvement) -> Result<Vec<FeatureProfile>> {
    if base.is_empty() {
        return Err(Error::invalid("empty base solution set"));
    }
    if base.vertex_count() != g.n() {
        return Err(Error::SizeMismatch {
            expected: g.n(),
            found: base.vertex_count(),
        });
    }
    let communities: Vec<Vec<usize>> = base
        .partitions()
        .iter()
        .flat_map(|p| p.normalized().communities())
        .collect();
    let centroids: Vec<usize> = match inv {
        Involvement::Rcc => Vec::new(),
        Involvement::Idc => communities
            .par_iter()
            .map(|c| centroid(g, c))
            .collect::<Result<_>>()?,
    };
    (0..g.n())
        .into_par_iter()
        .map(|v| {
            let dist = bfs_distances(g, v);
            let distances = match inv {
                Involvement::Rcc => communities
                    .iter()
                    .map(|c| 1.0 - rcc_from_distances(&dist, v, c))
                    .collect(),
                Involvement::Idc => centroids.iter().map(|&c| 1.0 - idc_from_distances(&dist, c)).collect(),
            };
            FeatureProfile::new(distances)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EndiscoConfig {
    /// Orderings per detector; `None` means `min(ceil(0.2 n), DEFAULT_K_CAP)`.
    pub k: Option<usize>,
    pub inv: Involvement,
    pub sim: Similarity,
}

impl Default for EndiscoConfig {
    fn default() -> Self {
        EndiscoConfig {
            k: None,
            inv: Involvement::Rcc,
            sim: Similarity::Cos,
        }
    }
}

const RECLUSTER_TAG: u64 = 0xe0d15c0;

/// Re-clusters an existing base set.
pub fn endisco_from_base(
    g: &Graph,
    base: &BaseSolutionSet,
    inv: Involvement,
    sim: Similarity,
    ralgo: &dyn BaseDetector,
    seed: u64,
) -> Result<Partition> {
    let profiles: Vec<PosteriorProfile> = feature_profiles(g, base, inv)?.iter().map(posterior).collect();
    let matrix = build_ensemble_matrix(&profiles, sim)?;
    drop(profiles);
    let sparse = sparsify(g, &matrix)?;
    drop(matrix);
    let ordering = random_ordering(g.n(), derive_seed(seed, &[RECLUSTER_TAG, 0]));
    Ok(ralgo.detect(&sparse, &ordering, derive_seed(seed, &[RECLUSTER_TAG, 1]))?.normalized())
}

/// Full pipeline: base solutions, profiles, similarity graph, re-clustering.
pub fn endisco(
    g: &Graph,
    detectors: &[Box<dyn BaseDetector>],
    ralgo: &dyn BaseDetector,
    config: &EndiscoConfig,
    seed: u64,
) -> Result<Partition> {
    let k = config.k.unwrap_or_else(|| default_k(g.n(), DEFAULT_K_CAP));
    let base = generate_base_solutions(g, detectors, k, seed)?;
    endisco_from_base(g, &base, config.inv, config.sim, ralgo, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{FixedPartition, Louvain};
    use crate::seed::rng_from;
    use rand::Rng;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (0..n - 1).map(|i| (i, i + 1))).unwrap()
    }

    #[test]
    fn rcc_on_a_path() {
        let g = path(5);
        // distances from 0 to {2, 3, 4} are 2, 3, 4
        assert!((involvement_rcc(&g, 0, &[2, 3, 4]).unwrap() - 3.0 / 9.0).abs() < 1e-15);
        // own distance skipped
        assert!((involvement_rcc(&g, 2, &[1, 2, 3]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(involvement_rcc(&g, 3, &[3]).unwrap(), 1.0);
    }

    #[test]
    fn rcc_unreachable_is_zero() {
        let g = Graph::from_edges(4, vec![(0, 1), (2, 3)]).unwrap();
        assert_eq!(involvement_rcc(&g, 0, &[1, 2]).unwrap(), 0.0);
        assert!(involvement_rcc(&g, 0, &[]).is_err());
        assert!(involvement_rcc(&g, 0, &[9]).is_err());
    }

    #[test]
    fn rcc_matches_bfs_oracle() {
        let mut rng = rng_from(21, &[]);
        for _ in 0..20 {
            let n = 25;
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .filter(|_| rng.gen_bool(0.12))
                .collect();
            let g = Graph::from_edges(n, edges).unwrap();
            let v = rng.gen_range(0..n);
            let c: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
            if c.is_empty() {
                continue;
            }
            // Floyd-Warshall oracle
            let inf = usize::MAX / 4;
            let mut d = vec![vec![inf; n]; n];
            for i in 0..n {
                d[i][i] = 0;
                for &j in g.neighbors(i) {
                    d[i][j] = 1;
                }
            }
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                    }
                }
            }
            let others: Vec<usize> = c.iter().copied().filter(|&u| u != v).collect();
            let expected = if others.is_empty() {
                1.0
            } else if others.iter().any(|&u| d[v][u] >= inf) {
                0.0
            } else {
                others.len() as f64 / others.iter().map(|&u| d[v][u]).sum::<usize>() as f64
            };
            assert!((involvement_rcc(&g, v, &c).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn centroid_of_a_chain_is_its_median() {
        let g = path(7);
        assert_eq!(centroid(&g, &[1, 2, 3, 4, 5]).unwrap(), 3);
        // even chain: two medians, lower id wins
        assert_eq!(centroid(&g, &[0, 1, 2, 3]).unwrap(), 1);
        assert_eq!(involvement_idc(&g, 3, &[1, 2, 3, 4, 5]).unwrap(), 1.0);
        assert_eq!(involvement_idc(&g, 0, &[1, 2, 3, 4, 5]).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn posterior_examples() {
        let p = posterior(&FeatureProfile::new(vec![0.0, 1.0]).unwrap());
        assert!((p.probabilities()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.probabilities()[1] - 1.0 / 3.0).abs() < 1e-15);
        let u = posterior(&FeatureProfile::new(vec![0.4; 5]).unwrap());
        assert!(u.probabilities().iter().all(|&x| (x - 0.2).abs() < 1e-15));
        let z = posterior(&FeatureProfile::new(vec![0.0; 3]).unwrap());
        assert!(z.probabilities().iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
        assert!(FeatureProfile::new(vec![]).is_err());
        assert!(FeatureProfile::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn matrix_matches_double_loop() {
        let mut rng = rng_from(8, &[]);
        let profiles: Vec<PosteriorProfile> = (0..15)
            .map(|_| posterior(&FeatureProfile::new((0..6).map(|_| rng.gen::<f64>()).collect()).unwrap()))
            .collect();
        for sim in [Similarity::Cos, Similarity::Che] {
            let m = build_ensemble_matrix(&profiles, sim).unwrap();
            for u in 0..15 {
                for v in 0..15 {
                    let (p, q) = (profiles[u].probabilities(), profiles[v].probabilities());
                    let expected = match sim {
                        Similarity::Cos => {
                            let dot: f64 = (0..6).map(|i| p[i] * q[i]).sum();
                            let np: f64 = (0..6).map(|i| p[i] * p[i]).sum::<f64>().sqrt();
                            let nq: f64 = (0..6).map(|i| q[i] * q[i]).sum::<f64>().sqrt();
                            if u == v { 1.0 } else { dot / (np * nq) }
                        }
                        Similarity::Che => {
                            1.0 - (0..6).map(|i| (p[i] - q[i]).abs()).fold(0.0, f64::max)
                        }
                    };
                    assert!((m.get(u, v) - expected).abs() < 1e-12);
                    assert_eq!(m.get(u, v), m.get(v, u));
                }
            }
        }
    }

    #[test]
    fn sparsified_graph_keeps_original_edges() {
        let g = path(6);
        let profiles: Vec<PosteriorProfile> = (0..6)
            .map(|i| posterior(&FeatureProfile::new(vec![i as f64 / 6.0, 1.0 - i as f64 / 6.0]).unwrap()))
            .collect();
        let m = build_ensemble_matrix(&profiles, Similarity::Cos).unwrap();
        let s = sparsify(&g, &m).unwrap();
        for (u, v, _) in g.edges() {
            assert!(s.has_edge(u, v));
        }
        assert!(s.is_weighted());
    }

    #[test]
    fn unanimity_returns_the_shared_partition() {
        let mut edges = Vec::new();
        for base in [0, 6, 12] {
            for i in 0..6 {
                for j in i + 1..6 {
                    edges.push((base + i, base + j));
                }
            }
        }
        edges.extend([(0, 6), (6, 12), (12, 0)]);
        let g = Graph::from_edges(18, edges).unwrap();
        let truth = Partition::new((0..18).map(|v| v / 6).collect());
        let dets: Vec<Box<dyn BaseDetector>> = vec![Box::new(FixedPartition::new("f", truth.clone()))];
        for inv in [Involvement::Rcc, Involvement::Idc] {
            for sim in [Similarity::Cos, Similarity::Che] {
                let cfg = EndiscoConfig { k: Some(3), inv, sim };
                let out = endisco(&g, &dets, &Louvain, &cfg, 4).unwrap();
                assert_eq!(out, truth.normalized(), "{inv} {sim}");
            }
        }
    }
}
