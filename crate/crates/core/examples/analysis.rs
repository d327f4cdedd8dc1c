//! Post-hoc studies: core-periphery shells, stable cores across snapshots,
//! degeneracy of repeated runs and the ensemble runtime overhead.

use comm_ensemble::analysis::{
    core_periphery_profile, degeneracy_report, ensemble_degeneracy, runtime_ratio, stable_communities, write_csv,
    EnsembleMethod, StableConfig,
};
use comm_ensemble::benchgen::{gen_disjoint, BenchConfig};
use comm_ensemble::detectors::{default_detectors, Louvain};
use comm_ensemble::ensemble::generate_base_solutions;
use comm_ensemble::medoc::{Association, Matching, MedocModel};

fn main() -> comm_ensemble::Result<()> {
    let cfg = BenchConfig { n: 300, k_avg: 15.0, k_max: 40, c_min: 20, c_max: 60, mu: 0.4, seed: 7, ..BenchConfig::default() };
    let (g, truth, _) = gen_disjoint(&cfg)?;
    let detectors = default_detectors();
    let mut rows = Vec::new();

    let base = generate_base_solutions(&g, &detectors, 6, 17)?;
    let model = MedocModel::fit(&base, Matching::Jc, Association::Weighted, &Louvain, 17)?;
    let profile = core_periphery_profile(&g, &truth.communities(), &model.association)?;
    rows.extend(profile.rows("medoc"));

    // Two snapshots of the same process with different noise draws.
    let snapshots = [g.clone(), gen_disjoint(&BenchConfig { seed: 8, ..cfg })?.0];
    let stable_cfg = StableConfig { k: 4, matching: Matching::Jc, assoc: Association::Weighted };
    let report = stable_communities(&snapshots, &detectors, &Louvain, &stable_cfg, 17)?;
    rows.extend(report.rows("medoc"));

    for (name, summary) in degeneracy_report(&g, &detectors, 5, 17)? {
        rows.extend(summary.rows(&name));
    }
    for method in [EnsembleMethod::endisco(), EnsembleMethod::medoc()] {
        rows.extend(ensemble_degeneracy(&g, method, &detectors, &Louvain, 4, 3, 17)?.rows(method.name()));
        rows.extend(runtime_ratio(&g, method, &detectors, &Louvain, 4, 17)?.rows(method.name()));
    }
    write_csv(&rows, std::io::stdout())
}
