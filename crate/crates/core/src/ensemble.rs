//! Base-solution generation (M detectors × K orderings) and the iterated
//! consensus-clustering baseline.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{read_partition, write_partition, Partition};
use crate::detectors::BaseDetector;
use crate::error::{Error, Result};
use crate::graph::{random_ordering, Graph, SymbolTable};
use crate::seed::derive_seed;

/// Default upper bound on the number of orderings.
pub const DEFAULT_K_CAP: usize = 50;

const ORDERING_TAG: u64 = 0x0bde;
const MANIFEST: &str = "manifest.json";

/// `min(ceil(0.2 n), cap)`, at least 1.
pub fn default_k(n: usize, cap: usize) -> usize {
    n.div_ceil(5).min(cap).max(1)
}

/// Seed of ordering `k`; shared by every detector.
pub fn ordering_seed(seed: u64, k: usize) -> u64 {
    derive_seed(seed, &[ORDERING_TAG, k as u64])
}

/// Seed handed to detector `m` on ordering `k`.
pub fn detector_seed(seed: u64, m: usize, k: usize) -> u64 {
    derive_seed(seed, &[m as u64, k as u64])
}

/// One base run.
#[derive(Clone, Debug)]
pub struct BaseSolution {
    pub algorithm: String,
    pub ordering_index: usize,
    pub ordering_seed: u64,
    pub detector_seed: u64,
    pub partition: Partition,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RunFailure {
    pub algorithm: String,
    pub ordering_index: usize,
    pub message: String,
}

/// The set of all base partitions. Solutions are ordered by detector, then
/// by ordering index.
#[derive(Clone, Debug)]
pub struct BaseSolutionSet {
    solutions: Vec<BaseSolution>,
    algorithms: Vec<String>,
    k: usize,
    seed: u64,
    failures: Vec<RunFailure>,
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    algorithm: String,
    ordering_index: usize,
    ordering_seed: u64,
    detector_seed: u64,
    file: String,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    algorithms: Vec<String>,
    k: usize,
    seed: u64,
    solutions: Vec<ManifestEntry>,
    failures: Vec<RunFailure>,
}

impl BaseSolutionSet {
    /// Wraps already computed partitions (one algorithm name per entry,
    /// ordering index = position among the entries of that name).
    pub fn from_partitions(n: usize, named: Vec<(String, Partition)>) -> Result<Self> {
        if named.is_empty() {
            return Err(Error::invalid("no base partitions"));
        }
        let mut algorithms: Vec<String> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        let mut solutions = Vec::with_capacity(named.len());
        for (name, partition) in named {
            if partition.len() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    found: partition.len(),
                });
            }
            let m = match algorithms.iter().position(|a| *a == name) {
                Some(m) => m,
                None => {
                    algorithms.push(name.clone());
                    counts.push(0);
                    algorithms.len() - 1
                }
            };
            solutions.push(BaseSolution {
                algorithm: name,
                ordering_index: counts[m],
                ordering_seed: 0,
                detector_seed: 0,
                partition,
            });
            counts[m] += 1;
        }
        let k = counts.iter().copied().max().unwrap_or(0);
        Ok(BaseSolutionSet {
            solutions,
            algorithms,
            k,
            seed: 0,
            failures: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// Number of vertices covered by each partition.
    pub fn vertex_count(&self) -> usize {
        self.solutions.first().map_or(0, |s| s.partition.len())
    }

    pub fn solutions(&self) -> &[BaseSolution] {
        &self.solutions
    }

    pub fn partitions(&self) -> Vec<&Partition> {
        self.solutions.iter().map(|s| &s.partition).collect()
    }

    pub fn algorithms(&self) -> &[String] {
        &self.algorithms
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn failures(&self) -> &[RunFailure] {
        &self.failures
    }

    /// Solutions at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<BaseSolutionSet> {
        if indices.is_empty() {
            return Err(Error::invalid("empty selection"));
        }
        let mut solutions = Vec::with_capacity(indices.len());
        for &i in indices {
            let s = self
                .solutions
                .get(i)
                .ok_or_else(|| Error::invalid(format!("solution index {i} out of range")))?;
            solutions.push(s.clone());
        }
        Ok(BaseSolutionSet {
            solutions,
            algorithms: self.algorithms.clone(),
            k: self.k,
            seed: self.seed,
            failures: self.failures.clone(),
        })
    }

    /// Writes one partition file per solution plus `manifest.json`.
    pub fn save(&self, dir: impl AsRef<Path>, symbols: &SymbolTable) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut entries = Vec::with_capacity(self.solutions.len());
        for (i, s) in self.solutions.iter().enumerate() {
            let file = format!("{i:04}_{}_{}.part", s.algorithm, s.ordering_index);
            write_partition(dir.join(&file), &s.partition, symbols)?;
            entries.push(ManifestEntry {
                algorithm: s.algorithm.clone(),
                ordering_index: s.ordering_index,
                ordering_seed: s.ordering_seed,
                detector_seed: s.detector_seed,
                file,
            });
        }
        let manifest = Manifest {
            algorithms: self.algorithms.clone(),
            k: self.k,
            seed: self.seed,
            solutions: entries,
            failures: self.failures.clone(),
        };
        let path = dir.join(MANIFEST);
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .map_err(|e| Error::io(&path, e))
    }

    /// Reads a directory written by [`save`](Self::save).
    pub fn load(dir: impl AsRef<Path>, symbols: &SymbolTable) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest = serde_json::from_str(&text)?;
        if manifest.solutions.is_empty() {
            return Err(Error::invalid(format!("{} lists no solutions", path.display())));
        }
        let solutions = manifest
            .solutions
            .into_iter()
            .map(|e| {
                Ok(BaseSolution {
                    partition: read_partition(dir.join(&e.file), symbols)?,
                    algorithm: e.algorithm,
                    ordering_index: e.ordering_index,
                    ordering_seed: e.ordering_seed,
                    detector_seed: e.detector_seed,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BaseSolutionSet {
            solutions,
            algorithms: manifest.algorithms,
            k: manifest.k,
            seed: manifest.seed,
            failures: manifest.failures,
        })
    }
}

/// Runs every detector on `k` random orderings of `g`, in parallel.
///
/// Ordering `k` is identical for all detectors. Failed runs are logged and
/// recorded in the result; if every run fails the call errors.
pub fn generate_base_solutions(
    g: &Graph,
    detectors: &[Box<dyn BaseDetector>],
    k: usize,
    seed: u64,
) -> Result<BaseSolutionSet> {
    if detectors.is_empty() {
        return Err(Error::invalid("no base detectors"));
    }
    if k == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    if g.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    let orderings: Vec<_> = (0..k)
        .into_par_iter()
        .map(|i| random_ordering(g.n(), ordering_seed(seed, i)))
        .collect();
    let runs: Vec<(usize, usize)> = (0..detectors.len())
        .flat_map(|m| (0..k).map(move |i| (m, i)))
        .collect();
    let outcomes: Vec<_> = runs
        .par_iter()
        .map(|&(m, i)| {
            let dseed = detector_seed(seed, m, i);
            let result = detectors[m].detect(g, &orderings[i], dseed).and_then(|p| {
                if p.len() == g.n() {
                    Ok(p)
                } else {
                    Err(Error::SizeMismatch {
                        expected: g.n(),
                        found: p.len(),
                    })
                }
            });
            (m, i, dseed, result)
        })
        .collect();

    let mut solutions = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (m, i, dseed, result) in outcomes {
        let algorithm = detectors[m].name().to_string();
        match result {
            Ok(partition) => solutions.push(BaseSolution {
                algorithm,
                ordering_index: i,
                ordering_seed: orderings[i].seed(),
                detector_seed: dseed,
                partition,
            }),
            Err(e) => {
                log::warn!("{algorithm} on ordering {i} failed: {e}");
                failures.push(RunFailure {
                    algorithm,
                    ordering_index: i,
                    message: e.to_string(),
                });
            }
        }
    }
    if solutions.is_empty() {
        return Err(Error::AllDetectorsFailed(failures.len()));
    }
    if !failures.is_empty() {
        log::warn!("{} of {} base runs failed", failures.len(), runs.len());
    }
    Ok(BaseSolutionSet {
        solutions,
        algorithms: detectors.iter().map(|d| d.name().to_string()).collect(),
        k,
        seed,
        failures,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConsensusConfig {
    /// Co-occurrence fractions below this are dropped before re-running.
    pub threshold: f64,
    pub max_rounds: usize,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        ConsensusConfig {
            threshold: 0.5,
            max_rounds: 10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConsensusOutcome {
    pub partition: Partition,
    /// Rounds of re-detection performed on consensus graphs.
    pub rounds: usize,
    pub converged: bool,
}

/// Sparse co-occurrence matrix: for each `u`, the pairs `(v, fraction)` with
/// `v > u` and a non-zero fraction of partitions placing `u` and `v` together.
/// The diagonal (always 1) and zero entries are implicit.
pub fn co_occurrence(partitions: &[&Partition]) -> Result<Vec<Vec<(usize, f64)>>> {
    let first = partitions.first().ok_or_else(|| Error::invalid("no partitions"))?;
    let n = first.len();
    if let Some(p) = partitions.iter().find(|p| p.len() != n) {
        return Err(Error::SizeMismatch {
            expected: n,
            found: p.len(),
        });
    }
    let blocks: Vec<Vec<Vec<usize>>> = partitions.iter().map(|p| p.normalized().communities()).collect();
    let labels: Vec<Partition> = partitions.iter().map(|p| p.normalized()).collect();
    let total = partitions.len() as f64;
    Ok((0..n)
        .into_par_iter()
        .map(|u| {
            let mut counts: Vec<(usize, u32)> = Vec::new();
            for (p, comms) in labels.iter().zip(&blocks) {
                let members = &comms[p.label(u)];
                // members are sorted; only v > u
                let start = members.partition_point(|&v| v <= u);
                counts.extend(members[start..].iter().map(|&v| (v, 1)));
            }
            counts.sort_unstable_by_key(|&(v, _)| v);
            let mut row: Vec<(usize, f64)> = Vec::new();
            let mut i = 0;
            while i < counts.len() {
                let v = counts[i].0;
                let mut c = 0u32;
                while i < counts.len() && counts[i].0 == v {
                    c += counts[i].1;
                    i += 1;
                }
                row.push((v, c as f64 / total));
            }
            row
        })
        .collect())
}

fn is_block_diagonal(matrix: &[Vec<(usize, f64)>]) -> bool {
    matrix.iter().flatten().all(|&(_, x)| x >= 1.0)
}

fn components_of(n: usize, matrix: &[Vec<(usize, f64)>], threshold: f64) -> Partition {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (u, row) in matrix.iter().enumerate() {
        for &(v, x) in row {
            if x >= threshold {
                let (a, b) = (find(&mut parent, u), find(&mut parent, v));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let labels = (0..n).map(|v| find(&mut parent, v)).collect();
    Partition::new(labels).normalized()
}

/// Iterated consensus clustering starting from an existing base set.
///
/// Each round builds the co-occurrence fractions of the current partitions,
/// drops entries below `threshold`, and reruns every detector on `K`
/// orderings of the resulting weighted graph. Stops once all fractions are 0
/// or 1; after `max_rounds` the thresholded blocks are returned with a
/// warning.
pub fn consensus_from_base(
    base: &BaseSolutionSet,
    detectors: &[Box<dyn BaseDetector>],
    seed: u64,
    config: &ConsensusConfig,
) -> Result<ConsensusOutcome> {
    if base.is_empty() {
        return Err(Error::invalid("empty base solution set"));
    }
    let n = base.vertex_count();
    let k = base.k().max(1);
    let mut current: Vec<Partition> = base.partitions().into_iter().cloned().collect();
    let mut rounds = 0;
    loop {
        let refs: Vec<&Partition> = current.iter().collect();
        let matrix = co_occurrence(&refs)?;
        if is_block_diagonal(&matrix) {
            return Ok(ConsensusOutcome {
                partition: components_of(n, &matrix, 1.0),
                rounds,
                converged: true,
            });
        }
        if rounds == config.max_rounds {
            log::warn!("consensus did not converge within {} rounds", config.max_rounds);
            return Ok(ConsensusOutcome {
                partition: components_of(n, &matrix, config.threshold),
                rounds,
                converged: false,
            });
        }
        rounds += 1;
        let edges: Vec<(usize, usize, f64)> = matrix
            .iter()
            .enumerate()
            .flat_map(|(u, row)| {
                row.iter()
                    .filter(|&&(_, x)| x >= config.threshold)
                    .map(move |&(v, x)| (u, v, x))
            })
            .collect();
        let graph = Graph::from_weighted_edges(n, edges)?;
        let round_seed = derive_seed(seed, &[0xc0, rounds as u64]);
        let next = generate_base_solutions(&graph, detectors, k, round_seed)?;
        current = next.partitions().into_iter().cloned().collect();
    }
}

/// Generates `K` base solutions per detector on `g` and runs
/// [`consensus_from_base`] on them.
pub fn consensus_clustering(
    g: &Graph,
    detectors: &[Box<dyn BaseDetector>],
    k: usize,
    seed: u64,
    config: &ConsensusConfig,
) -> Result<ConsensusOutcome> {
    let base = generate_base_solutions(g, detectors, k, seed)?;
    consensus_from_base(&base, detectors, seed, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{default_detectors, FixedPartition, Louvain};

    fn two_cliques() -> Graph {
        let mut edges = Vec::new();
        for base in [0, 5] {
            for i in 0..5 {
                for j in i + 1..5 {
                    edges.push((base + i, base + j));
                }
            }
        }
        Graph::from_edges(10, edges).unwrap()
    }

    #[test]
    fn default_k_rule() {
        assert_eq!(default_k(1000, 50), 50);
        assert_eq!(default_k(12, 50), 3);
        assert_eq!(default_k(1, 50), 1);
    }

    #[test]
    fn single_run_matches_direct_call() {
        let g = two_cliques();
        let dets: Vec<Box<dyn BaseDetector>> = vec![Box::new(Louvain)];
        let set = generate_base_solutions(&g, &dets, 1, 7).unwrap();
        assert_eq!(set.len(), 1);
        let direct = Louvain
            .detect(&g, &random_ordering(10, ordering_seed(7, 0)), detector_seed(7, 0, 0))
            .unwrap();
        assert_eq!(set.solutions()[0].partition, direct);
    }

    #[test]
    fn cardinality_is_m_times_k() {
        let g = two_cliques();
        let dets = default_detectors();
        let set = generate_base_solutions(&g, &dets[..2], 3, 1).unwrap();
        assert_eq!(set.len(), 6);
        assert!(set.failures().is_empty());
    }

    #[test]
    fn failures_are_recorded() {
        let g = two_cliques();
        let dets: Vec<Box<dyn BaseDetector>> = vec![
            Box::new(Louvain),
            Box::new(FixedPartition::new("broken", Partition::singletons(3))),
        ];
        let set = generate_base_solutions(&g, &dets, 2, 1).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.failures().len(), 2);
        let only_broken: Vec<Box<dyn BaseDetector>> =
            vec![Box::new(FixedPartition::new("broken", Partition::singletons(3)))];
        assert!(matches!(
            generate_base_solutions(&g, &only_broken, 2, 1),
            Err(Error::AllDetectorsFailed(2))
        ));
    }

    #[test]
    fn co_occurrence_is_a_fraction() {
        let a = Partition::new(vec![0, 0, 1, 1]);
        let b = Partition::new(vec![0, 1, 1, 1]);
        let m = co_occurrence(&[&a, &b]).unwrap();
        assert_eq!(m[0], vec![(1, 0.5)]);
        assert_eq!(m[1], vec![(2, 0.5), (3, 0.5)]);
        assert_eq!(m[2], vec![(3, 1.0)]);
        assert!(m[3].is_empty());
    }

    #[test]
    fn unanimous_bases_converge_immediately() {
        let g = two_cliques();
        let p = Partition::new(vec![0, 0, 0, 1, 1, 1, 1, 2, 2, 2]);
        let dets: Vec<Box<dyn BaseDetector>> = vec![Box::new(FixedPartition::new("fixed", p.clone()))];
        let out = consensus_clustering(&g, &dets, 3, 0, &ConsensusConfig::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.rounds, 0);
        assert_eq!(out.partition, p.normalized());
    }

    #[test]
    fn consensus_of_two_cliques() {
        let g = two_cliques();
        let out = consensus_clustering(&g, &default_detectors(), 4, 3, &ConsensusConfig::default()).unwrap();
        assert_eq!(out.partition.labels(), &[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn consensus_ignores_solution_order() {
        let parts = vec![
            ("a".to_string(), Partition::new(vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1])),
            ("a".to_string(), Partition::new(vec![0, 0, 0, 1, 1, 1, 1, 1, 1, 1])),
            ("a".to_string(), Partition::new(vec![0, 0, 0, 0, 0, 0, 0, 1, 1, 1])),
        ];
        let mut rev = parts.clone();
        rev.reverse();
        let dets: Vec<Box<dyn BaseDetector>> = vec![Box::new(Louvain)];
        let cfg = ConsensusConfig::default();
        let x = consensus_from_base(&BaseSolutionSet::from_partitions(10, parts).unwrap(), &dets, 5, &cfg).unwrap();
        let y = consensus_from_base(&BaseSolutionSet::from_partitions(10, rev).unwrap(), &dets, 5, &cfg).unwrap();
        assert_eq!(x.partition, y.partition);
    }

    #[test]
    fn save_and_load_round_trip() {
        let g = two_cliques();
        let set = generate_base_solutions(&g, &default_detectors(), 2, 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        set.save(dir.path(), g.symbols()).unwrap();
        let back = BaseSolutionSet::load(dir.path(), g.symbols()).unwrap();
        assert_eq!(back.len(), set.len());
        assert_eq!(back.k(), 2);
        assert_eq!(back.algorithms(), set.algorithms());
        for (a, b) in set.solutions().iter().zip(back.solutions()) {
            assert_eq!(a.partition.normalized(), b.partition.normalized());
            assert_eq!(a.detector_seed, b.detector_seed);
        }
    }
}
