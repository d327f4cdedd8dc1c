//! Base disjoint community detectors and modularity scoring.
//!
//! Every detector takes an explicit [`VertexOrdering`] (the sweep or
//! processing order) and a seed that drives all tie-breaking, so two calls
//! with the same `(graph, ordering, seed)` always return the same partition.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::community::{read_partition, Partition};
use crate::error::{Error, Result};
use crate::graph::{Graph, SymbolTable, VertexOrdering};

mod cnm;
mod label_propagation;
mod louvain;
mod walktrap;

pub use cnm::greedy_cnm;
pub use label_propagation::{label_propagation, label_propagation_with_status, LPA_MAX_SWEEPS};
pub use louvain::louvain;
pub use walktrap::{walk_profiles, walktrap, WALKTRAP_DEFAULT_STEPS};

/// A disjoint community detection algorithm usable as an ensemble member.
pub trait BaseDetector: Send + Sync {
    fn name(&self) -> &str;

    /// Must return a partition covering every vertex of `g`.
    fn detect(&self, g: &Graph, ordering: &VertexOrdering, seed: u64) -> Result<Partition>;
}

pub(crate) fn check_ordering(g: &Graph, ordering: &VertexOrdering) -> Result<()> {
    if ordering.len() != g.n() {
        return Err(Error::SizeMismatch {
            expected: g.n(),
            found: ordering.len(),
        });
    }
    Ok(())
}

/// Newman modularity of `p` on `g`, using edge weights when present:
/// `Q = sum_c [ w_c / W - (s_c / 2W)^2 ]`.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64> {
    if p.len() != g.n() {
        return Err(Error::SizeMismatch {
            expected: g.n(),
            found: p.len(),
        });
    }
    let total = g.total_weight();
    if g.m() == 0 || total <= 0.0 {
        return Err(Error::NoEdges);
    }
    let norm = p.normalized();
    let k = norm.num_communities();
    let mut internal = vec![0.0; k];
    let mut strength = vec![0.0; k];
    for (u, v, w) in g.edges() {
        let (cu, cv) = (norm.label(u), norm.label(v));
        if cu == cv {
            internal[cu] += w;
        }
        strength[cu] += w;
        strength[cv] += w;
    }
    Ok(internal
        .iter()
        .zip(&strength)
        .map(|(&i, &s)| i / total - (s / (2.0 * total)).powi(2))
        .sum())
}

/// Modularity-gain driven multi-level optimisation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Louvain;

impl BaseDetector for Louvain {
    fn name(&self) -> &str {
        "louvain"
    }

    fn detect(&self, g: &Graph, ordering: &VertexOrdering, seed: u64) -> Result<Partition> {
        check_ordering(g, ordering)?;
        Ok(louvain(g, ordering, seed))
    }
}

/// Asynchronous label propagation.
#[derive(Clone, Copy, Debug)]
pub struct LabelPropagation {
    pub max_sweeps: usize,
}

impl Default for LabelPropagation {
    fn default() -> Self {
        LabelPropagation {
            max_sweeps: LPA_MAX_SWEEPS,
        }
    }
}

impl BaseDetector for LabelPropagation {
    fn name(&self) -> &str {
        "lpa"
    }

    fn detect(&self, g: &Graph, ordering: &VertexOrdering, seed: u64) -> Result<Partition> {
        check_ordering(g, ordering)?;
        let (p, converged) = label_propagation_with_status(g, ordering, seed, self.max_sweeps);
        if !converged {
            log::warn!(
                "label propagation did not converge within {} sweeps",
                self.max_sweeps
            );
        }
        Ok(p)
    }
}

/// Clauset-Newman-Moore greedy agglomeration.
#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyModularity;

impl BaseDetector for GreedyModularity {
    fn name(&self) -> &str {
        "cnm"
    }

    fn detect(&self, g: &Graph, ordering: &VertexOrdering, seed: u64) -> Result<Partition> {
        check_ordering(g, ordering)?;
        Ok(greedy_cnm(g, ordering, seed))
    }
}

/// Random-walk distance agglomeration.
#[derive(Clone, Copy, Debug)]
pub struct Walktrap {
    pub steps: usize,
}

impl Default for Walktrap {
    fn default() -> Self {
        Walktrap {
            steps: WALKTRAP_DEFAULT_STEPS,
        }
    }
}

impl BaseDetector for Walktrap {
    fn name(&self) -> &str {
        "walktrap"
    }

    fn detect(&self, g: &Graph, ordering: &VertexOrdering, seed: u64) -> Result<Partition> {
        check_ordering(g, ordering)?;
        Ok(walktrap(g, ordering, seed, self.steps))
    }
}

/// Returns a stored partition regardless of ordering or seed.
///
/// This is how results of external tools (Infomap, for instance) enter an
/// ensemble.
#[derive(Clone, Debug)]
pub struct FixedPartition {
    name: String,
    partition: Partition,
}

impl FixedPartition {
    pub fn new(name: impl Into<String>, partition: Partition) -> Self {
        FixedPartition {
            name: name.into(),
            partition,
        }
    }
}

impl BaseDetector for FixedPartition {
    fn name(&self) -> &str {
        &self.name
    }

    fn detect(&self, g: &Graph, _ordering: &VertexOrdering, _seed: u64) -> Result<Partition> {
        if self.partition.len() != g.n() {
            return Err(Error::SizeMismatch {
                expected: g.n(),
                found: self.partition.len(),
            });
        }
        Ok(self.partition.clone())
    }
}

/// Reads a partition file produced by any external tool, validated against
/// the vertex names in `symbols`.
pub fn import_partition(path: impl AsRef<Path>, symbols: &SymbolTable) -> Result<Partition> {
    read_partition(path, symbols)
}

/// Names of the built-in detectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    Louvain,
    LabelPropagation,
    Cnm,
    Walktrap,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 4] = [
        DetectorKind::Louvain,
        DetectorKind::LabelPropagation,
        DetectorKind::Cnm,
        DetectorKind::Walktrap,
    ];

    pub fn build(self) -> Box<dyn BaseDetector> {
        match self {
            DetectorKind::Louvain => Box::new(Louvain),
            DetectorKind::LabelPropagation => Box::new(LabelPropagation::default()),
            DetectorKind::Cnm => Box::new(GreedyModularity),
            DetectorKind::Walktrap => Box::new(Walktrap::default()),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Louvain => "louvain",
            DetectorKind::LabelPropagation => "lpa",
            DetectorKind::Cnm => "cnm",
            DetectorKind::Walktrap => "walktrap",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "louvain" => Ok(DetectorKind::Louvain),
            "lpa" | "labelpr" | "label_propagation" => Ok(DetectorKind::LabelPropagation),
            "cnm" | "greedy" => Ok(DetectorKind::Cnm),
            "walktrap" => Ok(DetectorKind::Walktrap),
            other => Err(Error::invalid(format!("unknown detector '{other}'"))),
        }
    }
}

/// All four built-in detectors.
pub fn default_detectors() -> Vec<Box<dyn BaseDetector>> {
    DetectorKind::ALL.iter().map(|k| k.build()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random_ordering;
    use rand::Rng;

    pub(crate) fn two_triangles() -> Graph {
        Graph::from_edges(6, vec![(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap()
    }

    #[test]
    fn single_community_has_zero_modularity() {
        let g = two_triangles();
        assert!(modularity(&g, &Partition::single_block(6)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn split_triangles_score_one_half() {
        let g = two_triangles();
        let p = Partition::new(vec![0, 0, 0, 1, 1, 1]);
        assert!((modularity(&g, &p).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn edgeless_graph_is_an_error() {
        let g = Graph::from_edges(3, vec![]).unwrap();
        assert!(matches!(
            modularity(&g, &Partition::singletons(3)),
            Err(Error::NoEdges)
        ));
    }

    /// Q = 1/(2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j) over all ordered pairs.
    fn modularity_double_loop(g: &Graph, p: &Partition) -> f64 {
        let m2 = 2.0 * g.total_weight();
        let mut q = 0.0;
        for i in 0..g.n() {
            for j in 0..g.n() {
                if p.label(i) == p.label(j) {
                    let a = g.weight(i, j).unwrap_or(0.0);
                    q += a - g.strength(i) * g.strength(j) / m2;
                }
            }
        }
        q / m2
    }

    #[test]
    fn modularity_matches_double_loop_on_random_graphs() {
        let mut rng = crate::seed::rng_from(11, &[]);
        for trial in 0..20 {
            let n = 30;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.15) {
                        edges.push((u, v, if trial % 2 == 0 { 1.0 } else { rng.gen_range(0.1..2.0) }));
                    }
                }
            }
            let g = Graph::from_weighted_edges(n, edges).unwrap();
            let p = Partition::new((0..n).map(|_| rng.gen_range(0..4)).collect());
            let fast = modularity(&g, &p).unwrap();
            let slow = modularity_double_loop(&g, &p);
            assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
        }
    }

    #[test]
    fn every_detector_separates_disconnected_triangles() {
        let g = two_triangles();
        for det in default_detectors() {
            for seed in 0..5 {
                let p = det.detect(&g, &random_ordering(6, seed), seed).unwrap();
                assert_eq!(
                    p.normalized().labels(),
                    &[0, 0, 0, 1, 1, 1],
                    "{} seed {seed}",
                    det.name()
                );
            }
        }
    }

    #[test]
    fn detectors_reject_wrong_ordering_length() {
        let g = two_triangles();
        for det in default_detectors() {
            assert!(det.detect(&g, &random_ordering(5, 0), 0).is_err());
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("Louvain".parse::<DetectorKind>().unwrap(), DetectorKind::Louvain);
        assert_eq!("lpa".parse::<DetectorKind>().unwrap(), DetectorKind::LabelPropagation);
        assert!("infomap".parse::<DetectorKind>().is_err());
        for k in DetectorKind::ALL {
            assert_eq!(k.as_str().parse::<DetectorKind>().unwrap(), k);
            assert_eq!(k.build().name(), k.as_str());
        }
    }

    #[test]
    fn fixed_partition_checks_size() {
        let g = two_triangles();
        let det = FixedPartition::new("ext", Partition::single_block(6));
        assert_eq!(det.detect(&g, &random_ordering(6, 1), 0).unwrap().num_communities(), 1);
        let bad = FixedPartition::new("ext", Partition::single_block(4));
        assert!(bad.detect(&g, &random_ordering(6, 1), 0).is_err());
    }
}
