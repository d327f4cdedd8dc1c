//! MeDOC++ on an overlapping benchmark: one fitted model, three extractions.

use comm_ensemble::benchgen::{gen_overlapping, BenchConfig};
use comm_ensemble::detectors::{default_detectors, Louvain};
use comm_ensemble::ensemble::generate_base_solutions;
use comm_ensemble::medoc::{Association, Matching, MedocModel, MedocOutput, Mode};
use comm_ensemble::metrics::{nmi, onmi};

fn main() -> comm_ensemble::Result<()> {
    let cfg = BenchConfig { n: 300, k_avg: 15.0, k_max: 40, c_min: 20, c_max: 60, on: 0.1, om: 2, seed: 5, ..BenchConfig::default() };
    let (g, truth, _) = gen_overlapping(&cfg)?;
    let base = generate_base_solutions(&g, &default_detectors(), 6, 9)?;
    let model = MedocModel::fit(&base, Matching::Jc, Association::Weighted, &Louvain, 9)?;
    println!("meta-graph: {} base communities, {} meta-communities", model.meta_graph.vertices().len(), model.meta_communities.count);

    for mode in [Mode::Disjoint, Mode::Overlapping, Mode::Fuzzy] {
        match model.extract(&g, mode)? {
            MedocOutput::Disjoint(p) => {
                let crisp = truth.all_memberships().iter().map(|m| m[0]).collect();
                println!("disjoint: communities={} NMI vs primary truth={:.4}", p.num_communities(), nmi(&p, &comm_ensemble::Partition::new(crisp))?);
            }
            MedocOutput::Overlapping(c) => {
                println!("overlapping: overlapping vertices={} ONMI={:.4}", c.overlapping_vertices(), onmi(&c, &truth)?);
            }
            MedocOutput::Fuzzy(f) => {
                let worst = f.rows().iter().map(|r| (r.iter().map(|x| x.1).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
                println!("fuzzy: max |row sum - 1| = {worst:.2e}");
            }
        }
    }
    Ok(())
}
