//! Each base detector on one planted graph, over a few random orderings.

use comm_ensemble::benchgen::{gen_disjoint, BenchConfig};
use comm_ensemble::detectors::{default_detectors, modularity};
use comm_ensemble::ensemble::generate_base_solutions;
use comm_ensemble::metrics::nmi;

fn main() -> comm_ensemble::Result<()> {
    let cfg = BenchConfig { n: 300, k_avg: 15.0, k_max: 40, c_min: 20, c_max: 60, mu: 0.4, seed: 2, ..BenchConfig::default() };
    let (g, truth, _) = gen_disjoint(&cfg)?;
    let detectors = default_detectors();
    let base = generate_base_solutions(&g, &detectors, 4, 7)?;
    for sol in base.solutions() {
        println!(
            "{:<10} ordering {}  communities={:<3} Q={:.3} NMI={:.3}",
            sol.algorithm,
            sol.ordering_index,
            sol.partition.num_communities(),
            modularity(&g, &sol.partition)?,
            nmi(&sol.partition, &truth)?
        );
    }
    Ok(())
}
