//! Meta-clustering ensemble.
//!
//! Base communities become vertices of a multipartite graph (one part per
//! base partition, edges weighted by set overlap). Clustering that graph
//! yields meta-communities; the vertex × meta-community association matrix
//! then gives a disjoint partition (argmax), an overlapping cover (greedy
//! growth under a logistic edge-similarity score) or a fuzzy assignment (row
//! normalisation).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::community::{Cover, FuzzyAssignment, Partition};
use crate::detectors::BaseDetector;
use crate::ensemble::{default_k, generate_base_solutions, BaseSolutionSet, DEFAULT_K_CAP};
use crate::error::{Error, Result};
use crate::graph::{random_ordering, Graph};
use crate::seed::derive_seed;

/// Weight of an edge between two base communities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Matching {
    /// Jaccard coefficient.
    #[default]
    Jc,
    /// Mean of the two one-sided precisions.
    Ap,
}

/// Strength of a vertex's membership in a meta-community.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Association {
    /// Fraction of member communities containing the vertex.
    Simple,
    /// Intersection over union of the member communities containing it.
    #[default]
    Weighted,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    #[default]
    Disjoint,
    Overlapping,
    Fuzzy,
}

macro_rules! named_enum {
    ($t:ty, $what:literal, $($name:literal => $v:expr),+) => {
        impl FromStr for $t {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($name => Ok($v),)+
                    other => Err(Error::invalid(format!(concat!("unknown ", $what, " '{}'"), other))),
                }
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                $(if *self == $v { return f.pad($name); })+
                unreachable!()
            }
        }
    };
}

named_enum!(Matching, "matching function", "jc" => Matching::Jc, "ap" => Matching::Ap);
named_enum!(Association, "association function", "simple" => Association::Simple, "weighted" => Association::Weighted);
named_enum!(
    Mode,
    "mode",
    "disjoint" => Mode::Disjoint,
    "overlapping" => Mode::Overlapping,
    "fuzzy" => Mode::Fuzzy
);

fn sorted(c: &[usize]) -> std::borrow::Cow<'_, [usize]> {
    if c.windows(2).all(|w| w[0] < w[1]) {
        std::borrow::Cow::Borrowed(c)
    } else {
        let mut v = c.to_vec();
        v.sort_unstable();
        v.dedup();
        std::borrow::Cow::Owned(v)
    }
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

fn matching_score(w: Matching, inter: usize, a: usize, b: usize) -> f64 {
    let i = inter as f64;
    match w {
        Matching::Jc => i / (a + b - inter) as f64,
        Matching::Ap => 0.5 * (i / a as f64 + i / b as f64),
    }
}

/// `|Ci ∩ Cj| / |Ci ∪ Cj|`.
pub fn match_jc(ci: &[usize], cj: &[usize]) -> Result<f64> {
    let (a, b) = (sorted(ci), sorted(cj));
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    Ok(matching_score(Matching::Jc, intersection_size(&a, &b), a.len(), b.len()))
}

/// `(|Ci ∩ Cj| / |Ci| + |Ci ∩ Cj| / |Cj|) / 2`.
pub fn match_ap(ci: &[usize], cj: &[usize]) -> Result<f64> {
    let (a, b) = (sorted(ci), sorted(cj));
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    Ok(matching_score(Matching::Ap, intersection_size(&a, &b), a.len(), b.len()))
}

/// A base community as a vertex of the meta-graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetaVertex {
    /// Index of the base solution it comes from.
    pub solution: usize,
    pub algorithm: String,
    pub ordering_index: usize,
    /// Sorted member vertices.
    pub members: Vec<usize>,
}

/// Multipartite graph of base communities.
#[derive(Clone, Debug)]
pub struct MetaGraph {
    vertices: Vec<MetaVertex>,
    graph: Graph,
}

impl MetaGraph {
    pub fn vertices(&self) -> &[MetaVertex] {
        &self.vertices
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }
}

/// Connects every pair of communities from different base partitions that
/// share at least one vertex, weighted by `w`.
pub fn build_meta_graph(base: &BaseSolutionSet, w: Matching) -> Result<MetaGraph> {
    if base.len() < 2 {
        return Err(Error::invalid("meta-graph needs at least two base partitions"));
    }
    let n = base.vertex_count();
    let mut vertices = Vec::new();
    // meta-vertex of each vertex in each solution
    let mut of_vertex: Vec<Vec<u32>> = vec![Vec::with_capacity(base.len()); n];
    for (s, sol) in base.solutions().iter().enumerate() {
        for members in sol.partition.normalized().communities() {
            let id = vertices.len() as u32;
            for &v in &members {
                of_vertex[v].push(id);
            }
            vertices.push(MetaVertex {
                solution: s,
                algorithm: sol.algorithm.clone(),
                ordering_index: sol.ordering_index,
                members,
            });
        }
    }
    let overlaps: HashMap<(u32, u32), usize> = of_vertex
        .par_chunks(256)
        .map(|chunk| {
            let mut local: HashMap<(u32, u32), usize> = HashMap::new();
            for ids in chunk {
                for (i, &a) in ids.iter().enumerate() {
                    for &b in &ids[i + 1..] {
                        // ids of one vertex come from distinct solutions
                        *local.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                    }
                }
            }
            local
        })
        .reduce(HashMap::new, |mut acc, part| {
            for (k, c) in part {
                *acc.entry(k).or_insert(0) += c;
            }
            acc
        });
    let mut edges: Vec<(usize, usize, f64)> = overlaps
        .into_iter()
        .map(|((a, b), inter)| {
            let (a, b) = (a as usize, b as usize);
            (a, b, matching_score(w, inter, vertices[a].members.len(), vertices[b].members.len()))
        })
        .collect();
    edges.sort_unstable_by_key(|x| (x.0, x.1));
    let graph = Graph::from_weighted_edges(vertices.len(), edges)?;
    Ok(MetaGraph { vertices, graph })
}

/// Clusters of meta-vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetaCommunityStructure {
    /// Meta-community of each meta-vertex, labels `0..L`.
    pub labels: Vec<usize>,
    pub count: usize,
}

impl MetaCommunityStructure {
    /// Meta-vertex ids of each meta-community.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.count];
        for (i, &l) in self.labels.iter().enumerate() {
            groups[l].push(i);
        }
        groups
    }
}

const META_TAG: u64 = 0x3e7a;

/// Runs `ralgo` on the weighted meta-graph.
pub fn meta_cluster(mg: &MetaGraph, ralgo: &dyn BaseDetector, seed: u64) -> Result<MetaCommunityStructure> {
    let g = mg.graph();
    if g.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    let ordering = random_ordering(g.n(), derive_seed(seed, &[META_TAG, 0]));
    let p = ralgo.detect(g, &ordering, derive_seed(seed, &[META_TAG, 1]))?.normalized();
    Ok(MetaCommunityStructure {
        count: p.num_communities(),
        labels: p.labels().to_vec(),
    })
}

/// Fraction of `members` (sorted vertex lists) that contain `v`.
pub fn assoc_simple(v: usize, members: &[&[usize]]) -> f64 {
    if members.is_empty() {
        return 0.0;
    }
    let hits = members.iter().filter(|c| c.binary_search(&v).is_ok()).count();
    hits as f64 / members.len() as f64
}

/// `|∩| / |∪|` over the members (sorted vertex lists) that contain `v`; 0
/// when none does.
pub fn assoc_weighted(v: usize, members: &[&[usize]]) -> f64 {
    let containing: Vec<&[usize]> = members.iter().copied().filter(|c| c.binary_search(&v).is_ok()).collect();
    intersection_over_union(&containing)
}

fn intersection_over_union(sets: &[&[usize]]) -> f64 {
    match sets.len() {
        0 => 0.0,
        1 => 1.0,
        s => {
            let mut counts: HashMap<usize, usize> = HashMap::new();
            for c in sets {
                for &u in c.iter() {
                    *counts.entry(u).or_insert(0) += 1;
                }
            }
            let inter = counts.values().filter(|&&c| c == s).count();
            inter as f64 / counts.len() as f64
        }
    }
}

/// Dense `|V| × L` association matrix with entries in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AssociationMatrix {
    n: usize,
    l: usize,
    data: Vec<f64>,
}

impl AssociationMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyVertexSet);
        }
        let l = rows[0].len();
        if l == 0 {
            return Err(Error::invalid("association matrix needs at least one column"));
        }
        let mut data = Vec::with_capacity(n * l);
        for row in rows {
            if row.len() != l {
                return Err(Error::SizeMismatch {
                    expected: l,
                    found: row.len(),
                });
            }
            if let Some(x) = row.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::invalid(format!("association value {x} outside [0, 1]")));
            }
            data.extend(row);
        }
        Ok(AssociationMatrix { n, l, data })
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of meta-communities.
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn get(&self, v: usize, c: usize) -> f64 {
        self.data[v * self.l + c]
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.data[v * self.l..(v + 1) * self.l]
    }

    /// Largest entry of each row.
    pub fn max_association(&self, v: usize) -> f64 {
        self.row(v).iter().copied().fold(0.0, f64::max)
    }
}

/// Association of every vertex with every meta-community.
pub fn association_matrix(
    mg: &MetaGraph,
    mcs: &MetaCommunityStructure,
    n: usize,
    assoc: Association,
) -> Result<AssociationMatrix> {
    if mcs.labels.len() != mg.vertices().len() {
        return Err(Error::SizeMismatch {
            expected: mg.vertices().len(),
            found: mcs.labels.len(),
        });
    }
    let groups = mcs.groups();
    let columns: Vec<Vec<(usize, f64)>> = groups
        .par_iter()
        .map(|group| {
            let members: Vec<&[usize]> = group.iter().map(|&i| mg.vertices()[i].members.as_slice()).collect();
            // which members contain each vertex
            let mut signature: HashMap<usize, Vec<u32>> = HashMap::new();
            for (j, c) in members.iter().enumerate() {
                for &v in c.iter() {
                    signature.entry(v).or_default().push(j as u32);
                }
            }
            let mut cache: HashMap<Vec<u32>, f64> = HashMap::new();
            let mut col: Vec<(usize, f64)> = signature
                .into_iter()
                .map(|(v, sig)| {
                    let value = match assoc {
                        Association::Simple => sig.len() as f64 / members.len() as f64,
                        Association::Weighted => *cache.entry(sig).or_insert_with_key(|sig| {
                            let sets: Vec<&[usize]> = sig.iter().map(|&j| members[j as usize]).collect();
                            intersection_over_union(&sets)
                        }),
                    };
                    (v, value)
                })
                .collect();
            col.sort_unstable_by_key(|&(v, _)| v);
            col
        })
        .collect();
    let l = groups.len();
    let mut data = vec![0.0; n * l];
    for (c, col) in columns.into_iter().enumerate() {
        for (v, x) in col {
            if v >= n {
                return Err(Error::VertexOutOfRange(v));
            }
            data[v * l + c] = x;
        }
    }
    Ok(AssociationMatrix { n, l, data })
}

const TIE_EPS: f64 = 1e-12;

/// Column chosen for each vertex: the row maximum; among tied columns the
/// one holding most already-assigned neighbours; then the lowest column.
fn argmax_columns(a: &AssociationMatrix, g: &Graph) -> Vec<usize> {
    let n = a.n();
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut tied: Vec<(usize, Vec<usize>)> = Vec::new();
    for (v, slot) in label.iter_mut().enumerate() {
        let row = a.row(v);
        let max = a.max_association(v);
        let best: Vec<usize> = (0..a.l()).filter(|&c| row[c] >= max - TIE_EPS).collect();
        if best.len() == 1 {
            *slot = Some(best[0]);
        } else {
            tied.push((v, best));
        }
    }
    for (v, candidates) in tied {
        let mut votes = vec![0usize; candidates.len()];
        for &u in g.neighbors(v) {
            if let Some(l) = label[u] {
                if let Ok(i) = candidates.binary_search(&l) {
                    votes[i] += 1;
                }
            }
        }
        let mut pick = 0;
        for i in 1..candidates.len() {
            if votes[i] > votes[pick] {
                pick = i;
            }
        }
        label[v] = Some(candidates[pick]);
    }
    label.into_iter().map(|l| l.expect("every vertex labelled")).collect()
}

fn check_matrix_graph(a: &AssociationMatrix, g: &Graph) -> Result<()> {
    if a.n() != g.n() {
        return Err(Error::SizeMismatch {
            expected: g.n(),
            found: a.n(),
        });
    }
    Ok(())
}

/// Each vertex joins its highest-association meta-community. Ties go to
/// the candidate holding most of the vertex's neighbours (among vertices
/// already decided, in id order), then to the lowest index. Meta-communities
/// left empty are dropped.
pub fn extract_disjoint(a: &AssociationMatrix, g: &Graph) -> Result<Partition> {
    check_matrix_graph(a, g)?;
    Ok(Partition::new(argmax_columns(a, g)).normalized())
}

/// Logistic membership score `e^{AS^2} / (1 + e^{AS^2})`.
pub fn membership_probability(as_score: f64) -> f64 {
    let x = as_score * as_score;
    // e^x / (1 + e^x) without overflow
    1.0 / (1.0 + (-x).exp())
}

fn cosine(p: &[f64], q: &[f64]) -> f64 {
    let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
    let np: f64 = p.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nq: f64 = q.iter().map(|a| a * a).sum::<f64>().sqrt();
    if np == 0.0 || nq == 0.0 {
        0.0
    } else {
        (dot / (np * nq)).clamp(0.0, 1.0)
    }
}

/// Mean cosine similarity of association rows over the internal edges of
/// `members`; 0 without internal edges.
pub fn association_similarity(a: &AssociationMatrix, g: &Graph, members: &[usize]) -> f64 {
    let inside = sorted(members);
    let (mut sum, mut edges) = (0.0, 0usize);
    for &u in inside.iter() {
        for &v in g.neighbors(u) {
            if v > u && inside.binary_search(&v).is_ok() {
                sum += cosine(a.row(u), a.row(v));
                edges += 1;
            }
        }
    }
    if edges == 0 {
        0.0
    } else {
        sum / edges as f64
    }
}

/// Overlapping cover grown from the disjoint argmax assignment.
///
/// Communities are visited once, in decreasing membership probability
/// (larger first, then lower index, on ties). Each neighbour `v` of the
/// community, in id order, is added when
/// `P(C ∪ {v}) >= P(C)` for the community as grown so far. A visited
/// community is final: later communities never remove its members, though
/// they may also claim them.
pub fn auto_threshold_cover(a: &AssociationMatrix, g: &Graph) -> Result<Cover> {
    check_matrix_graph(a, g)?;
    let disjoint = Partition::new(argmax_columns(a, g)).normalized();
    let communities = disjoint.communities();
    let sims: Vec<f64> = communities
        .par_iter()
        .map(|c| association_similarity(a, g, c))
        .collect();
    let mut order: Vec<usize> = (0..communities.len()).collect();
    order.sort_by(|&x, &y| {
        membership_probability(sims[y])
            .total_cmp(&membership_probability(sims[x]))
            .then(communities[y].len().cmp(&communities[x].len()))
            .then(x.cmp(&y))
    });

    let n = g.n();
    let mut grown: Vec<Vec<usize>> = communities.clone();
    let mut in_c = vec![false; n];
    for &ci in &order {
        let c = &mut grown[ci];
        for &v in c.iter() {
            in_c[v] = true;
        }
        let mut candidates: Vec<usize> = c
            .iter()
            .flat_map(|&u| g.neighbors(u).iter().copied())
            .filter(|&v| !in_c[v])
            .collect();
        candidates.sort_unstable();
        candidates.dedup();

        // running sums over internal edges
        let (mut sum, mut edges) = (0.0, 0usize);
        for &u in c.iter() {
            for &v in g.neighbors(u) {
                if v > u && in_c[v] {
                    sum += cosine(a.row(u), a.row(v));
                    edges += 1;
                }
            }
        }
        let mut current = if edges == 0 { 0.0 } else { sum / edges as f64 };
        for v in candidates {
            let (mut s2, mut e2) = (sum, edges);
            for &u in g.neighbors(v) {
                if in_c[u] {
                    s2 += cosine(a.row(u), a.row(v));
                    e2 += 1;
                }
            }
            let next = if e2 == 0 { 0.0 } else { s2 / e2 as f64 };
            if membership_probability(next) >= membership_probability(current) {
                c.push(v);
                in_c[v] = true;
                sum = s2;
                edges = e2;
                current = next;
            }
        }
        for &v in c.iter() {
            in_c[v] = false;
        }
        c.sort_unstable();
    }
    Cover::from_communities(n, &grown)
}

/// Row-normalised association matrix; an all-zero row becomes uniform.
pub fn extract_fuzzy(a: &AssociationMatrix) -> Result<FuzzyAssignment> {
    let rows = (0..a.n())
        .map(|v| {
            let row = a.row(v);
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                row.iter()
                    .enumerate()
                    .filter(|(_, &x)| x > 0.0)
                    .map(|(c, &x)| (c, x / total))
                    .collect()
            } else {
                let u = 1.0 / a.l() as f64;
                (0..a.l()).map(|c| (c, u)).collect()
            }
        })
        .collect();
    FuzzyAssignment::new(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MedocConfig {
    /// Orderings per detector; `None` means `min(ceil(0.2 n), DEFAULT_K_CAP)`.
    pub k: Option<usize>,
    pub matching: Matching,
    pub assoc: Association,
}

impl Default for MedocConfig {
    fn default() -> Self {
        MedocConfig {
            k: None,
            matching: Matching::Jc,
            assoc: Association::Weighted,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MedocOutput {
    Disjoint(Partition),
    Overlapping(Cover),
    Fuzzy(FuzzyAssignment),
}

/// Meta-graph, meta-communities and association matrix of a base set.
#[derive(Clone, Debug)]
pub struct MedocModel {
    pub meta_graph: MetaGraph,
    pub meta_communities: MetaCommunityStructure,
    pub association: AssociationMatrix,
}

impl MedocModel {
    pub fn fit(
        base: &BaseSolutionSet,
        matching: Matching,
        assoc: Association,
        ralgo: &dyn BaseDetector,
        seed: u64,
    ) -> Result<Self> {
        let meta_graph = build_meta_graph(base, matching)?;
        let meta_communities = meta_cluster(&meta_graph, ralgo, seed)?;
        let association = association_matrix(&meta_graph, &meta_communities, base.vertex_count(), assoc)?;
        Ok(MedocModel {
            meta_graph,
            meta_communities,
            association,
        })
    }

    pub fn extract(&self, g: &Graph, mode: Mode) -> Result<MedocOutput> {
        Ok(match mode {
            Mode::Disjoint => MedocOutput::Disjoint(extract_disjoint(&self.association, g)?),
            Mode::Overlapping => MedocOutput::Overlapping(auto_threshold_cover(&self.association, g)?),
            Mode::Fuzzy => MedocOutput::Fuzzy(extract_fuzzy(&self.association)?),
        })
    }
}

/// Meta-clusters an existing base set and extracts the requested structure.
pub fn medoc_from_base(
    g: &Graph,
    base: &BaseSolutionSet,
    matching: Matching,
    assoc: Association,
    ralgo: &dyn BaseDetector,
    mode: Mode,
    seed: u64,
) -> Result<MedocOutput> {
    if base.vertex_count() != g.n() {
        return Err(Error::SizeMismatch {
            expected: g.n(),
            found: base.vertex_count(),
        });
    }
    MedocModel::fit(base, matching, assoc, ralgo, seed)?.extract(g, mode)
}

/// Full pipeline from the graph.
pub fn medoc(
    g: &Graph,
    detectors: &[Box<dyn BaseDetector>],
    ralgo: &dyn BaseDetector,
    config: &MedocConfig,
    mode: Mode,
    seed: u64,
) -> Result<MedocOutput> {
    let k = config.k.unwrap_or_else(|| default_k(g.n(), DEFAULT_K_CAP));
    let base = generate_base_solutions(g, detectors, k, seed)?;
    medoc_from_base(g, &base, config.matching, config.assoc, ralgo, mode, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{FixedPartition, Louvain};
    use crate::seed::rng_from;
    use rand::Rng;

    fn two_cliques_bridge() -> Graph {
        let mut edges = Vec::new();
        for base in [0, 5] {
            for i in 0..5 {
                for j in i + 1..5 {
                    edges.push((base + i, base + j));
                }
            }
        }
        edges.push((4, 5));
        Graph::from_edges(10, edges).unwrap()
    }

    #[test]
    fn matching_functions() {
        assert_eq!(match_jc(&[1, 2, 3], &[3, 2, 1]).unwrap(), 1.0);
        assert_eq!(match_jc(&[1, 2], &[3]).unwrap(), 0.0);
        assert_eq!(match_ap(&[1, 2], &[3]).unwrap(), 0.0);
        assert_eq!(match_ap(&[1, 2], &[2, 1]).unwrap(), 1.0);
        assert!((match_ap(&[1, 2, 3, 4], &[4]).unwrap() - 0.625).abs() < 1e-15);
        assert!(match_jc(&[], &[1]).is_err());
    }

    #[test]
    fn meta_graph_of_identical_partitions_is_a_matching() {
        let p = Partition::new(vec![0, 0, 1, 1, 2, 2]);
        let base = BaseSolutionSet::from_partitions(6, vec![("a".into(), p.clone()), ("a".into(), p)]).unwrap();
        let mg = build_meta_graph(&base, Matching::Jc).unwrap();
        assert_eq!(mg.vertices().len(), 6);
        assert_eq!(mg.graph().m(), 3);
        for (u, v, w) in mg.graph().edges() {
            assert_ne!(mg.vertices()[u].solution, mg.vertices()[v].solution);
            assert_eq!(w, 1.0);
        }
    }

    #[test]
    fn meta_graph_never_links_within_a_partition() {
        let mut rng = rng_from(3, &[]);
        let named: Vec<(String, Partition)> = (0..5)
            .map(|_| ("r".to_string(), Partition::new((0..30).map(|_| rng.gen_range(0..4)).collect())))
            .collect();
        let base = BaseSolutionSet::from_partitions(30, named).unwrap();
        for w in [Matching::Jc, Matching::Ap] {
            let mg = build_meta_graph(&base, w).unwrap();
            for (u, v, x) in mg.graph().edges() {
                assert_ne!(mg.vertices()[u].solution, mg.vertices()[v].solution);
                assert!(x > 0.0 && x <= 1.0);
                let expected = match w {
                    Matching::Jc => match_jc(&mg.vertices()[u].members, &mg.vertices()[v].members),
                    Matching::Ap => match_ap(&mg.vertices()[u].members, &mg.vertices()[v].members),
                }
                .unwrap();
                assert!((x - expected).abs() < 1e-15);
            }
        }
        assert!(build_meta_graph(&base.subset(&[0]).unwrap(), Matching::Jc).is_err());
    }

    #[test]
    fn weighted_association_matches_set_oracle() {
        let mut rng = rng_from(17, &[]);
        for _ in 0..50 {
            let sets: Vec<Vec<usize>> = (0..rng.gen_range(1..6))
                .map(|_| {
                    let mut s: Vec<usize> = (0..12).filter(|_| rng.gen_bool(0.4)).collect();
                    if s.is_empty() {
                        s.push(rng.gen_range(0..12));
                    }
                    s
                })
                .collect();
            let refs: Vec<&[usize]> = sets.iter().map(|s| s.as_slice()).collect();
            let v = rng.gen_range(0..12);
            let containing: Vec<&Vec<usize>> = sets.iter().filter(|s| s.contains(&v)).collect();
            let expected = if containing.is_empty() {
                0.0
            } else {
                let inter = (0..12).filter(|u| containing.iter().all(|s| s.contains(u))).count();
                let union = (0..12).filter(|u| containing.iter().any(|s| s.contains(u))).count();
                inter as f64 / union as f64
            };
            assert!((assoc_weighted(v, &refs) - expected).abs() < 1e-15);
            let simple = containing.len() as f64 / sets.len() as f64;
            assert!((assoc_simple(v, &refs) - simple).abs() < 1e-15);
        }
    }

    #[test]
    fn association_matrix_agrees_with_pointwise_functions() {
        let mut rng = rng_from(4, &[]);
        let named: Vec<(String, Partition)> = (0..4)
            .map(|_| ("r".to_string(), Partition::new((0..20).map(|_| rng.gen_range(0..3)).collect())))
            .collect();
        let base = BaseSolutionSet::from_partitions(20, named).unwrap();
        let mg = build_meta_graph(&base, Matching::Jc).unwrap();
        let mcs = meta_cluster(&mg, &Louvain, 1).unwrap();
        for assoc in [Association::Simple, Association::Weighted] {
            let a = association_matrix(&mg, &mcs, 20, assoc).unwrap();
            for (l, group) in mcs.groups().iter().enumerate() {
                let members: Vec<&[usize]> = group.iter().map(|&i| mg.vertices()[i].members.as_slice()).collect();
                for v in 0..20 {
                    let expected = match assoc {
                        Association::Simple => assoc_simple(v, &members),
                        Association::Weighted => assoc_weighted(v, &members),
                    };
                    assert_eq!(a.get(v, l), expected);
                }
            }
        }
    }

    #[test]
    fn disjoint_tie_goes_to_neighbour_majority() {
        // path 0-1-2-3; vertex 1 ties between columns 0 and 1, neighbours
        // 0 (col 1) and 2 (col 1) decide; vertex 3 ties with no decided
        // preference among (0, 1) except neighbour 2 (col 1).
        let g = Graph::from_edges(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        let a = AssociationMatrix::from_rows(vec![
            vec![0.2, 0.9],
            vec![0.5, 0.5],
            vec![0.1, 0.8],
            vec![0.3, 0.3],
        ])
        .unwrap();
        assert_eq!(argmax_columns(&a, &g), vec![1, 1, 1, 1]);
        // isolated tie falls back to the lowest column
        let lonely = Graph::from_edges(2, vec![]).unwrap();
        let b = AssociationMatrix::from_rows(vec![vec![0.4, 0.4], vec![0.0, 1.0]]).unwrap();
        assert_eq!(argmax_columns(&b, &lonely), vec![0, 1]);
        assert_eq!(extract_disjoint(&b, &lonely).unwrap().labels(), &[0, 1]);
    }

    #[test]
    fn single_column_puts_everyone_together() {
        let g = two_cliques_bridge();
        let a = AssociationMatrix::from_rows(vec![vec![0.7]; 10]).unwrap();
        assert_eq!(extract_disjoint(&a, &g).unwrap(), Partition::single_block(10));
    }

    #[test]
    fn probability_formula() {
        assert_eq!(membership_probability(0.0), 0.5);
        let e = std::f64::consts::E;
        assert!((membership_probability(1.0) - e / (1.0 + e)).abs() < 1e-15);
    }

    #[test]
    fn cover_contains_the_disjoint_assignment() {
        let mut rng = rng_from(12, &[]);
        let g = two_cliques_bridge();
        for _ in 0..20 {
            let rows: Vec<Vec<f64>> = (0..10).map(|_| (0..3).map(|_| rng.gen::<f64>()).collect()).collect();
            let a = AssociationMatrix::from_rows(rows).unwrap();
            let d = extract_disjoint(&a, &g).unwrap();
            let c = auto_threshold_cover(&a, &g).unwrap();
            assert!(c.contains_partition(&d));
        }
    }

    #[test]
    fn fuzzy_rows_are_normalised() {
        let a = AssociationMatrix::from_rows(vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0], vec![0.2, 0.6]])
            .unwrap();
        let f = extract_fuzzy(&a).unwrap();
        assert_eq!(f.row(0), &[(0, 1.0)]);
        assert_eq!(f.row(1), &[(0, 0.5), (1, 0.5)]);
        assert_eq!(f.row(2), &[(0, 0.5), (1, 0.5)]);
        let s: f64 = f.row(3).iter().map(|x| x.1).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unanimity_in_every_mode() {
        let g = two_cliques_bridge();
        let truth = Partition::new((0..10).map(|v| v / 5).collect());
        let dets: Vec<Box<dyn BaseDetector>> = vec![Box::new(FixedPartition::new("f", truth.clone()))];
        let cfg = MedocConfig {
            k: Some(3),
            ..MedocConfig::default()
        };
        match medoc(&g, &dets, &Louvain, &cfg, Mode::Disjoint, 1).unwrap() {
            MedocOutput::Disjoint(p) => assert_eq!(p, truth),
            other => panic!("{other:?}"),
        }
        match medoc(&g, &dets, &Louvain, &cfg, Mode::Fuzzy, 1).unwrap() {
            MedocOutput::Fuzzy(f) => assert_eq!(f.argmax(), truth),
            other => panic!("{other:?}"),
        }
        match medoc(&g, &dets, &Louvain, &cfg, Mode::Overlapping, 1).unwrap() {
            MedocOutput::Overlapping(c) => assert!(c.contains_partition(&truth)),
            other => panic!("{other:?}"),
        }
    }

    /// Fixed-fraction alternative to the automatic threshold: every vertex
    /// joins the meta-communities whose association is within the top `pct`
    /// of its row maximum.
    fn top_percent_cover(a: &AssociationMatrix, pct: f64) -> Cover {
        let memberships = (0..a.n())
            .map(|v| {
                let max = a.max_association(v);
                let cut = max * (1.0 - pct);
                let mut m: Vec<usize> = (0..a.l()).filter(|&c| a.get(v, c) >= cut && a.get(v, c) > 0.0).collect();
                if m.is_empty() {
                    m.push(0);
                }
                m
            })
            .collect();
        Cover::new(memberships).unwrap()
    }

    #[test]
    fn top_percent_fixture_widens_with_the_fraction() {
        let a = AssociationMatrix::from_rows(vec![vec![1.0, 0.8, 0.1], vec![0.2, 0.9, 0.85]]).unwrap();
        assert_eq!(top_percent_cover(&a, 0.0).memberships(0), &[0]);
        assert_eq!(top_percent_cover(&a, 0.25).memberships(0), &[0, 1]);
        assert_eq!(top_percent_cover(&a, 0.25).memberships(1), &[1, 2]);
    }
}
