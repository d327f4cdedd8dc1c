//! Post-hoc studies of ensemble output: community-centric core-periphery
//! profiles, communities that stay stable across snapshots, how much the
//! solutions of one method vary across vertex orderings, and runtime cost
//! relative to the base runs.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::community::Partition;
use crate::detectors::BaseDetector;
use crate::endisco::{endisco_from_base, Involvement, Similarity};
use crate::ensemble::{consensus_from_base, generate_base_solutions, BaseSolutionSet, ConsensusConfig};
use crate::error::{Error, Result};
use crate::graph::{induced_subgraph, Graph, SymbolTable};
use crate::medoc::{medoc_from_base, Association, AssociationMatrix, Matching, MedocModel, MedocOutput, Mode};
use crate::metrics::{ari, nmi};
use crate::seed::derive_seed;

/// Association at or above `1 - STABLE_TOL` counts as full association.
pub const STABLE_TOL: f64 = 1e-9;

/// Shell index of every vertex; isolated vertices get 0.
///
/// Bucket-sorted peeling: vertices leave in non-decreasing order of current
/// degree, and a vertex's shell is its degree when it leaves.
pub fn k_shell_decomposition(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);
    let mut bin = vec![0usize; max_deg + 2];
    for &d in &deg {
        bin[d + 1] += 1;
    }
    for d in 1..bin.len() {
        bin[d] += bin[d - 1];
    }
    // bin[d] = first position of degree-d vertices in `order`
    let mut pos = vec![0usize; n];
    let mut order = vec![0usize; n];
    let mut next = bin.clone();
    for v in 0..n {
        pos[v] = next[deg[v]];
        order[pos[v]] = v;
        next[deg[v]] += 1;
    }
    for i in 0..n {
        let v = order[i];
        for &u in g.neighbors(v) {
            if deg[u] > deg[v] {
                // move u to the front of its bin, then shrink the bin
                let du = deg[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = order[pw];
                if u != w {
                    order.swap(pu, pw);
                    pos[u] = pw;
                    pos[w] = pu;
                }
                bin[du] += 1;
                deg[u] -= 1;
            }
        }
    }
    deg
}

/// Tier 0 (periphery) to 2 (core) of `shell` when the maximum shell is
/// `max_shell`: `1..=max_shell` is cut into three equal index ranges.
pub fn shell_tier(shell: usize, max_shell: usize) -> usize {
    if max_shell == 0 || shell == 0 {
        0
    } else {
        ((3 * shell - 1) / max_shell).min(2)
    }
}

/// Bucket of an association value: `[0,.25)`, `[.25,.5)`, `[.5,.75)`, `[.75,1]`.
pub fn association_bucket(a: f64) -> usize {
    ((a * 4.0).floor().max(0.0) as usize).min(3)
}

/// Shell and association of each member of one community.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommunityShells {
    pub members: Vec<usize>,
    /// Shell index within the community's induced subgraph, per member.
    pub shells: Vec<usize>,
    /// Association with the community's column, per member.
    pub associations: Vec<f64>,
    /// Column of the association matrix the community was matched to.
    pub column: usize,
    /// `counts[tier][bucket]`; sums to the community size.
    pub counts: [[usize; 4]; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellProfile {
    pub communities: Vec<CommunityShells>,
}

impl ShellProfile {
    /// Tier × bucket counts summed over all communities.
    pub fn totals(&self) -> [[usize; 4]; 3] {
        let mut out = [[0; 4]; 3];
        for c in &self.communities {
            for (t, row) in c.counts.iter().enumerate() {
                for (b, &x) in row.iter().enumerate() {
                    out[t][b] += x;
                }
            }
        }
        out
    }

    /// Spearman correlation between shell index and association, pooled
    /// over all community members.
    pub fn shell_association_correlation(&self) -> Option<f64> {
        let shells: Vec<f64> = self.communities.iter().flat_map(|c| c.shells.iter().map(|&s| s as f64)).collect();
        let assoc: Vec<f64> = self.communities.iter().flat_map(|c| c.associations.iter().copied()).collect();
        spearman(&shells, &assoc)
    }

    pub fn rows(&self, method: &str) -> Vec<ReportRow> {
        let totals = self.totals();
        let mut rows = Vec::new();
        for (t, row) in totals.iter().enumerate() {
            for (b, &x) in row.iter().enumerate() {
                rows.push(ReportRow::new(method, format!("tier{t}_bucket{b}"), x as f64));
            }
        }
        if let Some(rho) = self.shell_association_correlation() {
            rows.push(ReportRow::new(method, "spearman_shell_association", rho));
        }
        rows
    }
}

/// Community-centric core-periphery profile.
///
/// Each community is matched to the association column with the largest
/// summed association over its members (lowest column on ties). Shells are
/// computed on the community's induced subgraph.
pub fn core_periphery_profile(g: &Graph, communities: &[Vec<usize>], a: &AssociationMatrix) -> Result<ShellProfile> {
    if a.n() != g.n() {
        return Err(Error::SizeMismatch {
            expected: g.n(),
            found: a.n(),
        });
    }
    let profiles = communities
        .par_iter()
        .map(|members| {
            let (sub, ids) = induced_subgraph(g, members)?;
            let shells = k_shell_decomposition(&sub);
            let column = (0..a.l())
                .map(|c| (c, ids.iter().map(|&v| a.get(v, c)).sum::<f64>()))
                .fold((0, f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best })
                .0;
            let associations: Vec<f64> = ids.iter().map(|&v| a.get(v, column)).collect();
            let max_shell = shells.iter().copied().max().unwrap_or(0);
            let mut counts = [[0; 4]; 3];
            for (&s, &x) in shells.iter().zip(&associations) {
                counts[shell_tier(s, max_shell)][association_bucket(x)] += 1;
            }
            Ok(CommunityShells {
                members: ids,
                shells,
                associations,
                column,
                counts,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShellProfile { communities: profiles })
}

/// Fractional ranks (ties share their mean rank).
fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation; `None` when either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        None
    } else {
        Some(cov / (vx * vy).sqrt())
    }
}

/// Fully associated vertices of one snapshot and their meta-community.
/// Vertices are identified by name so snapshots with different vertex sets
/// line up.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StableSet {
    /// Sorted vertex names.
    pub vertices: Vec<String>,
    /// Meta-community of each vertex in `vertices`.
    pub labels: Vec<usize>,
}

impl StableSet {
    /// Vertices whose largest association is at least `1 - STABLE_TOL`,
    /// labelled with the lowest column reaching it.
    pub fn from_association(a: &AssociationMatrix, symbols: &SymbolTable) -> Self {
        let mut pairs: Vec<(String, usize)> = (0..a.n())
            .filter_map(|v| {
                let c = a.row(v).iter().position(|&x| x >= 1.0 - STABLE_TOL)?;
                Some((symbols.name(v).to_string(), c))
            })
            .collect();
        pairs.sort();
        let (vertices, labels) = pairs.into_iter().unzip();
        StableSet { vertices, labels }
    }

    fn label_of(&self, v: &str) -> Option<usize> {
        self.vertices
            .binary_search_by(|x| x.as_str().cmp(v))
            .ok()
            .map(|i| self.labels[i])
    }
}

/// Agreement of two consecutive stable sets on their shared vertices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StableComparison {
    pub shared: usize,
    /// `None` when no vertex is stable in both snapshots.
    pub nmi: Option<f64>,
    pub ari: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StableReport {
    pub snapshots: Vec<StableSet>,
    /// Entry `i` compares snapshot `i` with `i + 1`.
    pub consecutive: Vec<StableComparison>,
}

impl StableReport {
    pub fn rows(&self, method: &str) -> Vec<ReportRow> {
        let mut rows = Vec::new();
        for (i, s) in self.snapshots.iter().enumerate() {
            rows.push(ReportRow::new(method, format!("stable_vertices_{i}"), s.vertices.len() as f64));
        }
        for (i, c) in self.consecutive.iter().enumerate() {
            rows.push(ReportRow::new(method, format!("shared_{i}_{}", i + 1), c.shared as f64));
            rows.push(ReportRow::new(method, format!("nmi_{i}_{}", i + 1), c.nmi.unwrap_or(f64::NAN)));
            rows.push(ReportRow::new(method, format!("ari_{i}_{}", i + 1), c.ari.unwrap_or(f64::NAN)));
        }
        rows
    }
}

/// NMI and ARI of two stable sets restricted to the vertices in both.
pub fn compare_stable(a: &StableSet, b: &StableSet) -> Result<StableComparison> {
    let shared: Vec<&str> = a.vertices.iter().map(String::as_str).filter(|v| b.label_of(v).is_some()).collect();
    if shared.is_empty() {
        return Ok(StableComparison {
            shared: 0,
            nmi: None,
            ari: None,
        });
    }
    let pa = Partition::new(shared.iter().map(|&v| a.label_of(v).unwrap()).collect());
    let pb = Partition::new(shared.iter().map(|&v| b.label_of(v).unwrap()).collect());
    Ok(StableComparison {
        shared: shared.len(),
        nmi: Some(nmi(&pa, &pb)?),
        ari: Some(ari(&pa, &pb)?),
    })
}

/// Settings shared by every snapshot of a stability study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StableConfig {
    /// Orderings per detector.
    pub k: usize,
    pub matching: Matching,
    pub assoc: Association,
}

/// Runs MeDOC++ on each snapshot and compares the fully associated
/// vertices of consecutive snapshots. Snapshots are matched by vertex
/// name; a vertex absent from a snapshot is never stable there.
pub fn stable_communities(
    snapshots: &[Graph],
    detectors: &[Box<dyn BaseDetector>],
    ralgo: &dyn BaseDetector,
    config: &StableConfig,
    seed: u64,
) -> Result<StableReport> {
    let sets = snapshots
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let s = derive_seed(seed, &[0x57ab, i as u64]);
            let base = generate_base_solutions(g, detectors, config.k, s)?;
            let model = MedocModel::fit(&base, config.matching, config.assoc, ralgo, s)?;
            Ok(StableSet::from_association(&model.association, g.symbols()))
        })
        .collect::<Result<Vec<_>>>()?;
    let consecutive = sets
        .windows(2)
        .map(|w| compare_stable(&w[0], &w[1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(StableReport {
        snapshots: sets,
        consecutive,
    })
}

/// Five-number summary of a sample, quartiles by linear interpolation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistributionSummary {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl DistributionSummary {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("cannot summarise an empty sample"));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Ok(DistributionSummary {
            count: v.len(),
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
        })
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }

    pub fn rows(&self, method: &str) -> Vec<ReportRow> {
        [
            ("pairs", self.count as f64),
            ("min", self.min),
            ("q1", self.q1),
            ("median", self.median),
            ("q3", self.q3),
            ("max", self.max),
            ("iqr", self.iqr()),
        ]
        .into_iter()
        .map(|(s, x)| ReportRow::new(method, s, x))
        .collect()
    }
}

/// Summary of the NMI over all unordered pairs of `solutions`.
pub fn pairwise_similarity(solutions: &[&Partition]) -> Result<DistributionSummary> {
    if solutions.len() < 2 {
        return Err(Error::invalid("need at least two solutions to compare"));
    }
    let pairs: Vec<(usize, usize)> = (0..solutions.len())
        .flat_map(|i| (i + 1..solutions.len()).map(move |j| (i, j)))
        .collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| nmi(solutions[i], solutions[j]))
        .collect::<Result<Vec<_>>>()?;
    DistributionSummary::from_values(&values)
}

/// Runs every detector over `runs` random orderings and summarises the
/// pairwise NMI of each detector's solutions. One entry per detector.
pub fn degeneracy_report(
    g: &Graph,
    detectors: &[Box<dyn BaseDetector>],
    runs: usize,
    seed: u64,
) -> Result<Vec<(String, DistributionSummary)>> {
    (0..detectors.len())
        .map(|m| {
            let set = generate_base_solutions(g, &detectors[m..=m], runs, derive_seed(seed, &[0xde9e, m as u64]))?;
            Ok((detectors[m].name().to_string(), pairwise_similarity(&set.partitions())?))
        })
        .collect()
}

/// An ensemble pipeline that turns a base set into one disjoint partition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnsembleMethod {
    Endisco(Involvement, Similarity),
    Medoc(Matching, Association),
    Consensus(ConsensusConfig),
}

impl EnsembleMethod {
    pub fn endisco() -> Self {
        EnsembleMethod::Endisco(Involvement::default(), Similarity::default())
    }

    pub fn medoc() -> Self {
        EnsembleMethod::Medoc(Matching::default(), Association::default())
    }

    pub fn consensus() -> Self {
        EnsembleMethod::Consensus(ConsensusConfig::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnsembleMethod::Endisco(..) => "endisco",
            EnsembleMethod::Medoc(..) => "medoc",
            EnsembleMethod::Consensus(_) => "consensus",
        }
    }

    /// Ensemble stage alone, on an existing base set of `g`.
    pub fn run_from_base(
        &self,
        g: &Graph,
        base: &BaseSolutionSet,
        detectors: &[Box<dyn BaseDetector>],
        ralgo: &dyn BaseDetector,
        seed: u64,
    ) -> Result<Partition> {
        match *self {
            EnsembleMethod::Endisco(inv, sim) => endisco_from_base(g, base, inv, sim, ralgo, seed),
            EnsembleMethod::Medoc(matching, assoc) => {
                match medoc_from_base(g, base, matching, assoc, ralgo, Mode::Disjoint, seed)? {
                    MedocOutput::Disjoint(p) => Ok(p),
                    _ => unreachable!("disjoint mode yields a partition"),
                }
            }
            EnsembleMethod::Consensus(cfg) => Ok(consensus_from_base(base, detectors, seed, &cfg)?.partition),
        }
    }

    /// Base generation followed by the ensemble stage.
    pub fn run(
        &self,
        g: &Graph,
        detectors: &[Box<dyn BaseDetector>],
        ralgo: &dyn BaseDetector,
        k: usize,
        seed: u64,
    ) -> Result<Partition> {
        let base = generate_base_solutions(g, detectors, k, seed)?;
        self.run_from_base(g, &base, detectors, ralgo, seed)
    }
}

impl FromStr for EnsembleMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "endisco" => Ok(EnsembleMethod::endisco()),
            "medoc" => Ok(EnsembleMethod::medoc()),
            "consensus" | "conscl" => Ok(EnsembleMethod::consensus()),
            other => Err(Error::invalid(format!("unknown ensemble method '{other}'"))),
        }
    }
}

impl fmt::Display for EnsembleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

/// Pairwise-NMI summary of `runs` independent runs of an ensemble, each
/// with its own base set.
pub fn ensemble_degeneracy(
    g: &Graph,
    method: EnsembleMethod,
    detectors: &[Box<dyn BaseDetector>],
    ralgo: &dyn BaseDetector,
    k: usize,
    runs: usize,
    seed: u64,
) -> Result<DistributionSummary> {
    let solutions = (0..runs)
        .map(|r| method.run(g, detectors, ralgo, k, derive_seed(seed, &[0xde9e, 0xe5, r as u64])))
        .collect::<Result<Vec<_>>>()?;
    pairwise_similarity(&solutions.iter().collect::<Vec<_>>())
}

/// Wall-clock of an ensemble pipeline against its base runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RuntimeRatio {
    pub base_seconds: f64,
    pub ensemble_seconds: f64,
    /// `(base + ensemble) / base`; at least 1.
    pub theta: f64,
}

impl RuntimeRatio {
    pub fn rows(&self, method: &str) -> Vec<ReportRow> {
        vec![
            ReportRow::new(method, "base_seconds", self.base_seconds),
            ReportRow::new(method, "ensemble_seconds", self.ensemble_seconds),
            ReportRow::new(method, "theta", self.theta),
        ]
    }
}

/// Times the full pipeline on a single worker thread so the ratio does not
/// depend on how well each stage parallelises.
pub fn runtime_ratio(
    g: &Graph,
    method: EnsembleMethod,
    detectors: &[Box<dyn BaseDetector>],
    ralgo: &dyn BaseDetector,
    k: usize,
    seed: u64,
) -> Result<RuntimeRatio> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::invalid(format!("cannot build timing pool: {e}")))?;
    pool.install(|| {
        let start = Instant::now();
        let base = generate_base_solutions(g, detectors, k, seed)?;
        let base_seconds = start.elapsed().as_secs_f64();
        let start = Instant::now();
        method.run_from_base(g, &base, detectors, ralgo, seed)?;
        let ensemble_seconds = start.elapsed().as_secs_f64();
        let base_seconds = base_seconds.max(f64::MIN_POSITIVE);
        Ok(RuntimeRatio {
            base_seconds,
            ensemble_seconds,
            theta: (base_seconds + ensemble_seconds) / base_seconds,
        })
    })
}

/// One line of a long-format report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub method: String,
    pub statistic: String,
    pub value: f64,
}

impl ReportRow {
    pub fn new(method: impl Into<String>, statistic: impl Into<String>, value: f64) -> Self {
        ReportRow {
            method: method.into(),
            statistic: statistic.into(),
            value,
        }
    }
}

/// Writes `method,statistic,value` rows with a header line.
pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::invalid(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::invalid(format!("csv: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{default_detectors, FixedPartition, Louvain};
    use crate::seed::rng_from;
    use proptest::prelude::*;
    use rand::Rng;

    /// Shell indices by brute force: the k-core is what survives repeatedly
    /// deleting vertices of degree below k.
    fn peel_oracle(g: &Graph) -> Vec<usize> {
        let n = g.n();
        let mut shell = vec![0; n];
        for k in 1..=n {
            let mut alive = vec![true; n];
            loop {
                let drop: Vec<usize> = (0..n)
                    .filter(|&v| alive[v] && g.neighbors(v).iter().filter(|&&u| alive[u]).count() < k)
                    .collect();
                if drop.is_empty() {
                    break;
                }
                for v in drop {
                    alive[v] = false;
                }
            }
            if !alive.iter().any(|&a| a) {
                break;
            }
            for v in 0..n {
                if alive[v] {
                    shell[v] = k;
                }
            }
        }
        shell
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
        let mut rng = rng_from(seed, &[]);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, edges).unwrap()
    }

    fn clique(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }

    #[test]
    fn shells_of_simple_graphs() {
        let cycle = Graph::from_edges(6, (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
        assert_eq!(k_shell_decomposition(&cycle), vec![2; 6]);
        let star = Graph::from_edges(6, (1..6).map(|i| (0, i))).unwrap();
        assert_eq!(k_shell_decomposition(&star), vec![1; 6]);
        assert_eq!(k_shell_decomposition(&clique(5)), vec![4; 5]);
        let with_isolated = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert_eq!(k_shell_decomposition(&with_isolated), vec![1, 1, 0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn shells_match_repeated_peeling(n in 1usize..100, p in 0.0f64..0.3, seed in any::<u64>()) {
            let g = random_graph(n, p, seed);
            prop_assert_eq!(k_shell_decomposition(&g), peel_oracle(&g));
        }
    }

    #[test]
    fn tiers_split_shells_into_thirds() {
        let tiers: Vec<usize> = (1..=6).map(|s| shell_tier(s, 6)).collect();
        assert_eq!(tiers, vec![0, 0, 1, 1, 2, 2]);
        assert_eq!(shell_tier(1, 1), 2);
        assert_eq!(shell_tier(0, 4), 0);
        let buckets: Vec<usize> = [0.0, 0.2499, 0.25, 0.5, 0.74, 0.75, 1.0].iter().map(|&a| association_bucket(a)).collect();
        assert_eq!(buckets, vec![0, 0, 1, 2, 2, 3, 3]);
    }

    #[test]
    fn fully_associated_clique_lands_in_core_top_bucket() {
        let g = clique(6);
        let a = AssociationMatrix::from_rows(vec![vec![1.0, 0.0]; 6]).unwrap();
        let profile = core_periphery_profile(&g, &[(0..6).collect()], &a).unwrap();
        let c = &profile.communities[0];
        assert_eq!(c.column, 0);
        assert_eq!(c.counts[2][3], 6);
        assert_eq!(c.counts.iter().flatten().sum::<usize>(), 6);
    }

    #[test]
    fn bucket_totals_equal_community_sizes() {
        let g = random_graph(40, 0.2, 3);
        let mut rng = rng_from(4, &[]);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| (0..3).map(|_| rng.gen()).collect()).collect();
        let a = AssociationMatrix::from_rows(rows).unwrap();
        let comms = vec![(0..15).collect(), (15..40).collect(), vec![3, 20, 33]];
        let profile = core_periphery_profile(&g, &comms, &a).unwrap();
        for (c, members) in profile.communities.iter().zip(&comms) {
            assert_eq!(c.counts.iter().flatten().sum::<usize>(), members.len());
        }
        let total: usize = profile.totals().iter().flatten().sum();
        assert_eq!(total, 43);
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 1.0], &[3.0, 2.0]), None);
        assert_eq!(ranks(&[5.0, 1.0, 5.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn summary_quartiles() {
        let s = DistributionSummary::from_values(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!((s.min, s.q1, s.median, s.q3, s.max), (1.0, 2.0, 3.0, 4.0, 5.0));
        let s = DistributionSummary::from_values(&[0.0, 1.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (0.25, 0.5, 0.75));
        assert!(DistributionSummary::from_values(&[]).is_err());
    }

    #[test]
    fn ordering_free_detector_has_no_spread() {
        let g = clique(5);
        let fixed: Vec<Box<dyn BaseDetector>> =
            vec![Box::new(FixedPartition::new("fixed", Partition::new(vec![0, 0, 1, 1, 1])))];
        let report = degeneracy_report(&g, &fixed, 6, 1).unwrap();
        assert_eq!(report.len(), 1);
        let s = report[0].1;
        assert_eq!(s.count, 15);
        assert_eq!((s.min, s.max, s.iqr()), (1.0, 1.0, 0.0));
    }

    fn two_cliques_with_bridge() -> Graph {
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for base in [0, 6] {
            for u in 0..6 {
                for v in u + 1..6 {
                    edges.push((base + u, base + v));
                }
            }
        }
        edges.push((5, 6));
        Graph::from_edges(12, edges).unwrap()
    }

    #[test]
    fn identical_snapshots_are_fully_stable() {
        let g = two_cliques_with_bridge();
        let cfg = StableConfig {
            k: 3,
            matching: Matching::default(),
            assoc: Association::default(),
        };
        let report = stable_communities(&[g.clone(), g.clone(), g], &default_detectors(), &Louvain, &cfg, 5).unwrap();
        assert_eq!(report.consecutive.len(), 2);
        for c in &report.consecutive {
            assert!(c.shared > 0);
            assert!((c.nmi.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    fn stable(entries: &[(usize, usize)]) -> StableSet {
        let mut e: Vec<(String, usize)> = entries.iter().map(|&(v, c)| (format!("v{v}"), c)).collect();
        e.sort();
        let (vertices, labels) = e.into_iter().unzip();
        StableSet { vertices, labels }
    }

    #[test]
    fn empty_overlap_is_undefined() {
        let a = stable(&[(0, 0), (1, 1)]);
        let b = stable(&[(2, 0), (3, 0)]);
        let c = compare_stable(&a, &b).unwrap();
        assert_eq!((c.shared, c.nmi, c.ari), (0, None, None));
    }

    #[test]
    fn stable_comparison_is_symmetric() {
        let a = stable(&[(0, 0), (1, 0), (2, 1), (3, 1), (5, 2), (7, 2)]);
        let b = stable(&[(1, 4), (2, 4), (3, 4), (4, 1), (5, 3), (7, 3)]);
        let (x, y) = (compare_stable(&a, &b).unwrap(), compare_stable(&b, &a).unwrap());
        assert_eq!(x.shared, 5);
        assert!((x.nmi.unwrap() - y.nmi.unwrap()).abs() < 1e-12);
        assert!((x.ari.unwrap() - y.ari.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn theta_is_at_least_one() {
        let g = two_cliques_with_bridge();
        let r = runtime_ratio(&g, EnsembleMethod::endisco(), &default_detectors(), &Louvain, 2, 0).unwrap();
        assert!(r.theta >= 1.0);
    }

    #[test]
    fn csv_long_format() {
        let rows = vec![ReportRow::new("medoc", "q1", 0.5), ReportRow::new("a,b", "x", 1.0)];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "method,statistic,value\nmedoc,q1,0.5\n\"a,b\",x,1.0\n");
    }
}
