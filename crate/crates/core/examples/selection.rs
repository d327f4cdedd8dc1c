//! Choosing a subset of base solutions: quality, diversity, both, and VRRW.

use comm_ensemble::benchgen::{gen_disjoint, BenchConfig};
use comm_ensemble::detectors::{default_detectors, Louvain};
use comm_ensemble::endisco::{endisco_from_base, Involvement, Similarity};
use comm_ensemble::ensemble::generate_base_solutions;
use comm_ensemble::metrics::nmi;
use comm_ensemble::selection::{select, size_from_fraction, Scoreboard, Strategy};

fn main() -> comm_ensemble::Result<()> {
    let cfg = BenchConfig { n: 300, k_avg: 15.0, k_max: 40, c_min: 20, c_max: 60, mu: 0.4, seed: 6, ..BenchConfig::default() };
    let (g, truth, _) = gen_disjoint(&cfg)?;
    let base = generate_base_solutions(&g, &default_detectors(), 8, 13)?;
    let sb = Scoreboard::from_solutions(&base)?;
    let s = size_from_fraction(0.6, base.len());
    for strategy in [Strategy::Quality, Strategy::Diversity, Strategy::Combined, Strategy::Vrrw] {
        let chosen = select(&sb, strategy, s);
        let subset = base.subset(&chosen)?;
        let p = endisco_from_base(&g, &subset, Involvement::Rcc, Similarity::Cos, &Louvain, 13)?;
        println!("{strategy:<9} |S|={} EnDisCo NMI={:.4}", chosen.len(), nmi(&p, &truth)?);
    }
    Ok(())
}
