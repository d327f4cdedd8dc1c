//! EnDisCo under every involvement/similarity pairing, sharing one base set.

use comm_ensemble::benchgen::{gen_disjoint, BenchConfig};
use comm_ensemble::detectors::{default_detectors, Louvain};
use comm_ensemble::endisco::{endisco_from_base, Involvement, Similarity};
use comm_ensemble::ensemble::generate_base_solutions;
use comm_ensemble::metrics::nmi;

fn main() -> comm_ensemble::Result<()> {
    let cfg = BenchConfig { n: 300, k_avg: 15.0, k_max: 40, c_min: 20, c_max: 60, mu: 0.4, seed: 4, ..BenchConfig::default() };
    let (g, truth, _) = gen_disjoint(&cfg)?;
    let base = generate_base_solutions(&g, &default_detectors(), 6, 5)?;
    for inv in [Involvement::Rcc, Involvement::Idc] {
        for sim in [Similarity::Cos, Similarity::Che] {
            let p = endisco_from_base(&g, &base, inv, sim, &Louvain, 5)?;
            println!("{inv:?}/{sim:?}: communities={} NMI={:.4}", p.num_communities(), nmi(&p, &truth)?);
        }
    }
    Ok(())
}
