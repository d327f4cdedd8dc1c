//! Planted benchmarks in all three flavours, with their realised statistics.

use comm_ensemble::benchgen::{gen_disjoint, gen_fuzzy, gen_overlapping, BenchConfig};

fn main() -> comm_ensemble::Result<()> {
    let cfg = BenchConfig {
        n: 300,
        k_avg: 15.0,
        k_max: 40,
        c_min: 20,
        c_max: 60,
        seed: 1,
        ..BenchConfig::default()
    };
    let (g, truth, stats) = gen_disjoint(&cfg)?;
    println!("disjoint: n={} m={} communities={} realised mu={:.3}", g.n(), g.m(), truth.num_communities(), stats.realized_mu);

    let ov = BenchConfig { on: 0.1, om: 2, ..cfg.clone() };
    let (_, cover, stats) = gen_overlapping(&ov)?;
    println!("overlapping: communities={} overlapping vertices={}", cover.communities().len(), stats.overlapping_vertices);

    let (_, fuzzy, stats) = gen_fuzzy(&ov)?;
    let mixed = fuzzy.rows().iter().filter(|r| r.len() > 1).count();
    println!("fuzzy: vertices with split membership={mixed} mean degree={:.2}", stats.mean_degree);
    Ok(())
}
