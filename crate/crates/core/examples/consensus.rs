//! Consensus clustering baseline: threshold the co-occurrence matrix and
//! re-detect until every base run agrees.

use comm_ensemble::benchgen::{gen_disjoint, BenchConfig};
use comm_ensemble::detectors::default_detectors;
use comm_ensemble::ensemble::{consensus_clustering, ConsensusConfig};
use comm_ensemble::metrics::nmi;

fn main() -> comm_ensemble::Result<()> {
    let cfg = BenchConfig { n: 300, k_avg: 15.0, k_max: 40, c_min: 20, c_max: 60, mu: 0.4, seed: 3, ..BenchConfig::default() };
    let (g, truth, _) = gen_disjoint(&cfg)?;
    let out = consensus_clustering(&g, &default_detectors(), 6, 11, &ConsensusConfig::default())?;
    println!(
        "rounds={} converged={} communities={} NMI={:.4}",
        out.rounds,
        out.converged,
        out.partition.num_communities(),
        nmi(&out.partition, &truth)?
    );
    Ok(())
}
