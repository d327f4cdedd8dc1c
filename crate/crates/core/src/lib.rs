//! Ensemble community detection.
//!
//! Two ensemble frameworks built on top of a pool of base disjoint detectors
//! run over many vertex orderings:
//!
//! * [`endisco`] maps every vertex to a posterior membership profile over all
//!   base communities and re-clusters the profile-similarity graph
//!   (disjoint output).
//! * [`medoc`] clusters the base communities themselves on a multipartite
//!   graph and derives disjoint, overlapping and fuzzy structures from the
//!   resulting vertex/meta-community association matrix.
//!
//! Supporting modules provide the base detectors, a consensus-clustering
//! baseline, comparison metrics, a planted-partition benchmark generator,
//! base-solution selection and post-hoc analyses.
//!
//! ```
//! use comm_ensemble::benchgen::{gen_disjoint, BenchConfig};
//! use comm_ensemble::detectors::{default_detectors, Louvain};
//! use comm_ensemble::endisco::{endisco, EndiscoConfig};
//! use comm_ensemble::metrics::nmi;
//!
//! let cfg = BenchConfig { n: 200, k_avg: 12.0, k_max: 30, mu: 0.1, c_min: 20, c_max: 50, ..BenchConfig::default() };
//! let (g, truth, _) = gen_disjoint(&cfg)?;
//! let config = EndiscoConfig { k: Some(3), ..EndiscoConfig::default() };
//! let p = endisco(&g, &default_detectors(), &Louvain, &config, 42)?;
//! assert!(nmi(&p, &truth)? > 0.9);
//! # Ok::<(), comm_ensemble::Error>(())
//! ```

pub mod analysis;
pub mod benchgen;
pub mod cli;
pub mod community;
pub mod detectors;
pub mod endisco;
pub mod ensemble;
pub mod error;
pub mod graph;
pub mod medoc;
pub mod metrics;
pub mod seed;
pub mod selection;

pub use community::{Cover, FuzzyAssignment, Partition};
pub use detectors::{BaseDetector, DetectorKind};
pub use error::{Error, Result};
pub use graph::{Graph, SymbolTable, VertexOrdering};
