//! Planted-community benchmark graphs in the style of the LFR model.
//!
//! Degrees and community sizes follow truncated power laws. Each vertex
//! sends a `1 - mu` share of its stubs inside its communities and the rest
//! outside; stubs are paired configuration-model style with rejection of
//! self-loops and duplicate edges. The fuzzy variant turns an overlapping
//! cover into random membership weights and samples every pair independently
//! with a probability interpolating between an inter- and an
//! intra-community rate.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{Cover, FuzzyAssignment, Partition};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed::{derive_seed, rng_from};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub n: usize,
    pub k_avg: f64,
    pub k_max: usize,
    pub mu: f64,
    pub c_min: usize,
    pub c_max: usize,
    /// Fraction of vertices belonging to several communities.
    pub on: f64,
    /// Memberships of each overlapping vertex.
    pub om: usize,
    pub degree_exponent: f64,
    pub size_exponent: f64,
    pub seed: u64,
}

impl Default for BenchConfig {
    /// The large disjoint configuration: `n = 10000`, mean degree 50,
    /// maximum degree 150, `mu = 0.3`, community sizes in `[20, 100]`.
    fn default() -> Self {
        BenchConfig {
            n: 10_000,
            k_avg: 50.0,
            k_max: 150,
            mu: 0.3,
            c_min: 20,
            c_max: 100,
            on: 0.0,
            om: 1,
            degree_exponent: 2.0,
            size_exponent: 1.0,
            seed: 0,
        }
    }
}

impl BenchConfig {
    /// The large overlapping configuration: the default with 20% of the
    /// vertices in 20 communities each.
    pub fn overlapping_default() -> Self {
        BenchConfig {
            on: 0.2,
            om: 20,
            ..BenchConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Infeasible(msg));
        if self.n < 2 {
            return bad(format!("n = {} must be at least 2", self.n));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return bad(format!("mu = {} must lie in (0, 1)", self.mu));
        }
        if self.c_min == 0 || self.c_min > self.c_max || self.c_max > self.n {
            return bad(format!(
                "community sizes need 1 <= c_min ({}) <= c_max ({}) <= n ({})",
                self.c_min, self.c_max, self.n
            ));
        }
        if !(0.0..=1.0).contains(&self.on) {
            return bad(format!("overlap fraction {} must lie in [0, 1]", self.on));
        }
        if self.om == 0 {
            return bad("memberships per overlapping vertex must be at least 1".into());
        }
        if !(self.k_avg >= 1.0 && self.k_avg <= self.k_max as f64) {
            return bad(format!("k_avg = {} must lie in [1, k_max = {}]", self.k_avg, self.k_max));
        }
        if self.k_max >= self.n {
            return bad(format!("k_max = {} must be below n = {}", self.k_max, self.n));
        }
        if self.degree_exponent <= 1.0 {
            return bad(format!("degree exponent {} must exceed 1", self.degree_exponent));
        }
        if self.size_exponent < 0.0 {
            return bad(format!("size exponent {} must be non-negative", self.size_exponent));
        }
        Ok(())
    }

    fn overlapping_count(&self) -> usize {
        if self.om <= 1 {
            0
        } else {
            (self.on * self.n as f64).round() as usize
        }
    }
}

/// Realised properties of a generated instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchStats {
    pub n: usize,
    pub m: usize,
    pub mean_degree: f64,
    /// Fraction of edges whose endpoints share no community.
    pub realized_mu: f64,
    pub communities: usize,
    pub overlapping_vertices: usize,
    /// Stubs left unpaired after rejection sampling.
    pub dropped_stubs: usize,
    /// Vertices whose internal degree exceeded their community's capacity.
    pub capped_vertices: usize,
    /// Sum of edge probabilities (fuzzy model only).
    pub expected_edges: Option<f64>,
    pub p_in: Option<f64>,
    pub p_out: Option<f64>,
}

/// Mean of the continuous power law `x^-g` on `[a, b]`.
fn power_law_mean(a: f64, b: f64, g: f64) -> f64 {
    if (g - 1.0).abs() < 1e-12 {
        (b - a) / (b.ln() - a.ln())
    } else if (g - 2.0).abs() < 1e-12 {
        (b.ln() - a.ln()) / (1.0 / a - 1.0 / b)
    } else {
        (1.0 - g) / (2.0 - g) * (b.powf(2.0 - g) - a.powf(2.0 - g)) / (b.powf(1.0 - g) - a.powf(1.0 - g))
    }
}

/// Inverse-CDF sample of the power law `x^-g` on `[a, b]`.
fn sample_power_law<R: Rng>(rng: &mut R, a: f64, b: f64, g: f64) -> f64 {
    if a == b {
        return a;
    }
    let u: f64 = rng.gen();
    if (g - 1.0).abs() < 1e-12 {
        (a.ln() + u * (b.ln() - a.ln())).exp()
    } else {
        let e = 1.0 - g;
        (a.powf(e) + u * (b.powf(e) - a.powf(e))).powf(1.0 / e)
    }
}

/// Lower cut-off giving the requested mean degree.
fn solve_k_min(k_avg: f64, k_max: f64, g: f64) -> Result<f64> {
    if power_law_mean(1.0, k_max, g) > k_avg {
        return Err(Error::Infeasible(format!(
            "mean degree {k_avg} is below the smallest mean {:.3} reachable with k_max = {k_max}",
            power_law_mean(1.0, k_max, g)
        )));
    }
    let (mut lo, mut hi) = (1.0, k_avg);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if power_law_mean(mid, k_max, g) < k_avg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn sample_degrees(cfg: &BenchConfig, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let k_max = cfg.k_max as f64;
    let k_min = solve_k_min(cfg.k_avg, k_max, cfg.degree_exponent)?;
    Ok((0..cfg.n)
        .map(|_| {
            let x = sample_power_law(rng, k_min, k_max, cfg.degree_exponent);
            (x.round() as usize).clamp(1, cfg.k_max)
        })
        .collect())
}

/// Community sizes summing exactly to `slots`.
fn sample_sizes(cfg: &BenchConfig, slots: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    if slots < cfg.c_min {
        return Err(Error::Infeasible(format!(
            "{slots} membership slots cannot fill a community of minimum size {}",
            cfg.c_min
        )));
    }
    let (a, b) = (cfg.c_min as f64, cfg.c_max as f64 + 0.999_999);
    let mut sizes = Vec::new();
    let mut total = 0;
    while total < slots {
        let s = (sample_power_law(rng, a, b, cfg.size_exponent).floor() as usize).clamp(cfg.c_min, cfg.c_max);
        sizes.push(s);
        total += s;
    }
    // trim the overshoot without going below c_min
    let mut excess = total - slots;
    while excess > 0 {
        let shrinkable: Vec<usize> = (0..sizes.len()).filter(|&i| sizes[i] > cfg.c_min).collect();
        if shrinkable.is_empty() {
            break;
        }
        let i = shrinkable[rng.gen_range(0..shrinkable.len())];
        sizes[i] -= 1;
        excess -= 1;
    }
    if excess > 0 {
        // all at c_min: drop one community and spread its deficit
        sizes.pop();
        let mut deficit = slots - sizes.iter().sum::<usize>();
        let room: usize = sizes.iter().map(|&s| cfg.c_max - s).sum();
        if sizes.is_empty() || room < deficit {
            return Err(Error::Infeasible(format!(
                "cannot split {slots} slots into communities of size [{}, {}]",
                cfg.c_min, cfg.c_max
            )));
        }
        let mut i = 0;
        while deficit > 0 {
            if sizes[i] < cfg.c_max {
                sizes[i] += 1;
                deficit -= 1;
            }
            i = (i + 1) % sizes.len();
        }
    }
    Ok(sizes)
}

struct Planted {
    /// communities of each vertex
    memberships: Vec<Vec<usize>>,
    members: Vec<Vec<usize>>,
    capped: usize,
}

/// Places vertices into communities: overlapping vertices first, then by
/// decreasing internal degree, each membership in a random community with a
/// free slot that is large enough for the per-membership internal degree.
fn assign_communities(
    cfg: &BenchConfig,
    internal: &[usize],
    sizes: &[usize],
    overlapping: &[bool],
    rng: &mut ChaCha8Rng,
) -> Result<Planted> {
    let n = cfg.n;
    let c = sizes.len();
    if cfg.om > c && overlapping.iter().any(|&o| o) {
        return Err(Error::Infeasible(format!(
            "{} memberships per overlapping vertex but only {c} communities",
            cfg.om
        )));
    }
    let mut free: Vec<usize> = sizes.to_vec();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); c];
    let mut memberships: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.sort_by_key(|&v| (std::cmp::Reverse(overlapping[v]), std::cmp::Reverse(internal[v])));
    let mut capped = 0;
    for v in order {
        let count = if overlapping[v] { cfg.om } else { 1 };
        let need = internal[v].div_ceil(count);
        let mut was_capped = false;
        for _ in 0..count {
            let open = |min: usize| -> Vec<usize> {
                (0..c)
                    .filter(|&i| free[i] > 0 && sizes[i] > min && !memberships[v].contains(&i))
                    .collect()
            };
            let mut options = open(need);
            if options.is_empty() {
                was_capped = true;
                options = open(0);
            }
            let pick = if options.is_empty() {
                // every open slot is in a community v already joined
                let others: Vec<usize> = (0..c).filter(|&i| !memberships[v].contains(&i)).collect();
                others[rng.gen_range(0..others.len())]
            } else {
                let total: usize = options.iter().map(|&i| free[i]).sum();
                let mut r = rng.gen_range(0..total);
                let mut chosen = options[0];
                for &i in &options {
                    if r < free[i] {
                        chosen = i;
                        break;
                    }
                    r -= free[i];
                }
                chosen
            };
            free[pick] = free[pick].saturating_sub(1);
            members[pick].push(v);
            memberships[v].push(pick);
        }
        if was_capped {
            capped += 1;
        }
    }
    for m in &mut memberships {
        m.sort_unstable();
    }
    for m in &mut members {
        m.sort_unstable();
    }
    Ok(Planted {
        memberships,
        members,
        capped,
    })
}

fn share_community(a: &[usize], b: &[usize]) -> bool {
    a.iter().any(|x| b.binary_search(x).is_ok())
}

/// Pairs stubs at random, returning invalid pairs to the pool, until the
/// pool is exhausted or `100 * pairs` attempts were spent. Returns the
/// number of unpaired stubs.
fn match_stubs<F>(mut pool: Vec<usize>, edges: &mut HashSet<(usize, usize)>, rng: &mut ChaCha8Rng, valid: F) -> usize
where
    F: Fn(usize, usize) -> bool,
{
    let budget = 100 * (pool.len() / 2).max(1);
    let mut attempts = 0;
    while pool.len() >= 2 && attempts < budget {
        pool.shuffle(rng);
        let mut rest = Vec::new();
        let mut progress = false;
        let mut chunks = pool.chunks_exact(2);
        for pair in &mut chunks {
            attempts += 1;
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u != v && valid(u, v) && !edges.contains(&(u, v)) {
                edges.insert((u, v));
                progress = true;
            } else {
                rest.extend_from_slice(pair);
            }
        }
        rest.extend_from_slice(chunks.remainder());
        pool = rest;
        if !progress && pool.len() <= 2 {
            break;
        }
    }
    pool.len()
}

fn realized_mu(g: &Graph, memberships: &[Vec<usize>]) -> f64 {
    if g.m() == 0 {
        return 0.0;
    }
    let external = g
        .edges()
        .filter(|&(u, v, _)| !share_community(&memberships[u], &memberships[v]))
        .count();
    external as f64 / g.m() as f64
}

fn pick_overlapping(cfg: &BenchConfig, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut flags = vec![false; cfg.n];
    let mut ids: Vec<usize> = (0..cfg.n).collect();
    ids.shuffle(rng);
    for &v in ids.iter().take(cfg.overlapping_count()) {
        flags[v] = true;
    }
    flags
}

fn generate_crisp(cfg: &BenchConfig) -> Result<(Graph, Vec<Vec<usize>>, BenchStats)> {
    cfg.validate()?;
    let mut rng = rng_from(cfg.seed, &[0xbe4c]);
    let degrees = sample_degrees(cfg, &mut rng)?;
    let overlapping = pick_overlapping(cfg, &mut rng);
    let slots = cfg.n + overlapping.iter().filter(|&&o| o).count() * (cfg.om - 1);
    let sizes = sample_sizes(cfg, slots, &mut rng)?;
    let internal: Vec<usize> = degrees
        .iter()
        .map(|&k| ((1.0 - cfg.mu) * k as f64).round() as usize)
        .collect();
    let planted = assign_communities(cfg, &internal, &sizes, &overlapping, &mut rng)?;

    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    let mut dropped = 0;
    // internal stubs, split evenly over memberships and capped by size - 1
    let mut community_stubs: Vec<Vec<usize>> = vec![Vec::new(); sizes.len()];
    let mut external_stubs: Vec<usize> = Vec::new();
    for v in 0..cfg.n {
        let ms = &planted.memberships[v];
        let share = internal[v] / ms.len();
        let extra = internal[v] % ms.len();
        let mut placed = 0;
        for (i, &c) in ms.iter().enumerate() {
            let want = share + usize::from(i < extra);
            let cap = planted.members[c].len().saturating_sub(1);
            let take = want.min(cap);
            community_stubs[c].extend(std::iter::repeat_n(v, take));
            placed += take;
        }
        // stubs that did not fit inside go outside, keeping the degree
        external_stubs.extend(std::iter::repeat_n(v, degrees[v] - placed));
    }
    for stubs in community_stubs {
        dropped += match_stubs(stubs, &mut edges, &mut rng, |_, _| true);
    }
    let memberships = &planted.memberships;
    dropped += match_stubs(external_stubs, &mut edges, &mut rng, |u, v| {
        !share_community(&memberships[u], &memberships[v])
    });
    if dropped > 0 {
        log::warn!("benchmark generator dropped {dropped} unmatched stubs");
    }
    let mut edge_list: Vec<(usize, usize)> = edges.into_iter().collect();
    edge_list.sort_unstable();
    let g = Graph::from_edges(cfg.n, edge_list)?;
    let stats = BenchStats {
        n: cfg.n,
        m: g.m(),
        mean_degree: g.average_degree(),
        realized_mu: realized_mu(&g, &planted.memberships),
        communities: sizes.len(),
        overlapping_vertices: planted.memberships.iter().filter(|m| m.len() > 1).count(),
        dropped_stubs: dropped,
        capped_vertices: planted.capped,
        expected_edges: None,
        p_in: None,
        p_out: None,
    };
    Ok((g, planted.memberships, stats))
}

/// Disjoint benchmark; `on` and `om` are ignored.
pub fn gen_disjoint(cfg: &BenchConfig) -> Result<(Graph, Partition, BenchStats)> {
    let cfg = BenchConfig {
        on: 0.0,
        om: 1,
        ..cfg.clone()
    };
    let (g, memberships, stats) = generate_crisp(&cfg)?;
    let labels = memberships.iter().map(|m| m[0]).collect();
    Ok((g, Partition::new(labels), stats))
}

/// Overlapping benchmark: `round(on * n)` vertices join `om` communities.
pub fn gen_overlapping(cfg: &BenchConfig) -> Result<(Graph, Cover, BenchStats)> {
    let (g, memberships, stats) = generate_crisp(cfg)?;
    Ok((g, Cover::new(memberships)?, stats))
}

/// Co-membership `s_ij = sum_c min(alpha_ic, alpha_jc)` of two sorted rows.
pub fn co_membership(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut s) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1.min(b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    s
}

/// Edge rates `(p_in, p_out)` for `p_ij = s_ij p_in + (1 - s_ij) p_out`.
///
/// With `P` unordered pairs and `S = sum s_ij`, the expected number of edges
/// is `p_in S + p_out (P - S)`; attributing the `s_ij p_in` mass to
/// intra-community edges, mean degree `k` and mixing `mu` give
/// `p_in = (1 - mu) n k / (2 S)` and `p_out = mu n k / (2 (P - S))`.
/// Without any co-membership (`S = 0`) the graph is Erdős–Rényi at the
/// target density.
pub fn fuzzy_edge_rates(n: usize, k_avg: f64, mu: f64, s_total: f64) -> Result<(f64, f64)> {
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    let target = n as f64 * k_avg / 2.0;
    if s_total == 0.0 {
        let p = target / pairs;
        if p > 1.0 {
            return Err(Error::Infeasible(format!("edge rate {p:.4} exceeds 1")));
        }
        return Ok((0.0, p));
    }
    if s_total < 0.0 || s_total >= pairs {
        return Err(Error::Infeasible(format!(
            "total co-membership {s_total} leaves no room for both edge rates"
        )));
    }
    let p_in = (1.0 - mu) * target / s_total;
    let p_out = mu * target / (pairs - s_total);
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) {
        return Err(Error::Infeasible(format!(
            "edge rates p_in = {p_in:.4}, p_out = {p_out:.4} fall outside [0, 1]"
        )));
    }
    Ok((p_in, p_out))
}

/// Total co-membership over unordered pairs, computed per community: with
/// the weights of a community sorted decreasingly, pair `(i < j)` contributes
/// the `j`-th weight.
fn total_co_membership(rows: &[Vec<(usize, f64)>], communities: usize) -> f64 {
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); communities];
    for row in rows {
        for &(c, a) in row {
            columns[c].push(a);
        }
    }
    columns
        .into_iter()
        .map(|mut col| {
            col.sort_by(|x, y| y.total_cmp(x));
            col.iter().enumerate().map(|(j, a)| j as f64 * a).sum::<f64>()
        })
        .sum()
}

/// Fuzzy benchmark. Crisp memberships come from the overlapping generator;
/// each occurrence gets a uniform random weight, normalised per vertex; then
/// every pair is an edge independently with probability `p_ij`.
pub fn gen_fuzzy(cfg: &BenchConfig) -> Result<(Graph, FuzzyAssignment, BenchStats)> {
    cfg.validate()?;
    let mut rng = rng_from(cfg.seed, &[0xf022]);
    let n = cfg.n;
    let overlapping = pick_overlapping(cfg, &mut rng);
    let slots = n + overlapping.iter().filter(|&&o| o).count() * (cfg.om - 1);
    let sizes = sample_sizes(cfg, slots, &mut rng)?;
    let internal = vec![((1.0 - cfg.mu) * cfg.k_avg).round() as usize; n];
    let planted = assign_communities(cfg, &internal, &sizes, &overlapping, &mut rng)?;
    let rows: Vec<Vec<(usize, f64)>> = planted
        .memberships
        .iter()
        .map(|ms| {
            let w: Vec<f64> = ms.iter().map(|_| rng.gen_range(f64::EPSILON..1.0)).collect();
            let total: f64 = w.iter().sum();
            ms.iter().zip(w).map(|(&c, x)| (c, x / total)).collect()
        })
        .collect();
    let s_total = total_co_membership(&rows, sizes.len());
    let (p_in, p_out) = fuzzy_edge_rates(n, cfg.k_avg, cfg.mu, s_total)?;
    let seed = derive_seed(cfg.seed, &[0xf022, 1]);
    let per_row: Vec<(Vec<(usize, usize)>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from(seed, &[i as u64]);
            let mut out = Vec::new();
            let mut expected = 0.0;
            for j in i + 1..n {
                let s = co_membership(&rows[i], &rows[j]);
                let p = s * p_in + (1.0 - s) * p_out;
                expected += p;
                if rng.gen::<f64>() < p {
                    out.push((i, j));
                }
            }
            (out, expected)
        })
        .collect();
    let expected_edges: f64 = per_row.iter().map(|r| r.1).sum();
    let g = Graph::from_edges(n, per_row.into_iter().flat_map(|r| r.0))?;
    let stats = BenchStats {
        n,
        m: g.m(),
        mean_degree: g.average_degree(),
        realized_mu: realized_mu(&g, &planted.memberships),
        communities: sizes.len(),
        overlapping_vertices: planted.memberships.iter().filter(|m| m.len() > 1).count(),
        dropped_stubs: 0,
        capped_vertices: planted.capped,
        expected_edges: Some(expected_edges),
        p_in: Some(p_in),
        p_out: Some(p_out),
    };
    Ok((g, FuzzyAssignment::new(rows)?, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> BenchConfig {
        BenchConfig {
            n: 1000,
            k_avg: 20.0,
            k_max: 50,
            mu: 0.3,
            c_min: 20,
            c_max: 100,
            seed,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn power_law_mean_matches_numeric_integral() {
        for g in [1.0, 2.0, 2.5] {
            let (a, b) = (3.0, 60.0);
            let steps = 200_000;
            let h = (b - a) / steps as f64;
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..steps {
                let x: f64 = a + (i as f64 + 0.5) * h;
                num += x * x.powf(-g) * h;
                den += x.powf(-g) * h;
            }
            assert!((power_law_mean(a, b, g) - num / den).abs() < 1e-6);
        }
    }

    #[test]
    fn realized_degree_and_mixing() {
        for seed in 0..10 {
            let cfg = small(seed);
            let (g, p, stats) = gen_disjoint(&cfg).unwrap();
            assert_eq!(p.len(), 1000);
            assert!((stats.mean_degree - 20.0).abs() < 2.0, "{stats:?}");
            assert!((stats.realized_mu - 0.3).abs() < 0.05, "{stats:?}");
            for size in p.communities().iter().map(|c| c.len()) {
                assert!((20..=100).contains(&size));
            }
            assert_eq!(g.n(), 1000);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let (g1, p1, _) = gen_disjoint(&small(3)).unwrap();
        let (g2, p2, _) = gen_disjoint(&small(3)).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(g1.edges().collect::<Vec<_>>(), g2.edges().collect::<Vec<_>>());
    }

    #[test]
    fn overlapping_vertex_count() {
        let cfg = BenchConfig {
            on: 0.1,
            om: 3,
            ..small(1)
        };
        let (_, cover, stats) = gen_overlapping(&cfg).unwrap();
        assert_eq!(cover.overlapping_vertices(), 100);
        assert!(cover.all_memberships().iter().all(|m| m.len() == 1 || m.len() == 3));
        assert!((stats.realized_mu - 0.3).abs() < 0.05, "{stats:?}");
        let (_, flat, _) = gen_overlapping(&BenchConfig { on: 0.0, ..cfg }).unwrap();
        assert!(flat.is_partition());
    }

    #[test]
    fn infeasible_configs_name_the_constraint() {
        let too_small = BenchConfig {
            c_min: 200,
            c_max: 100,
            ..small(0)
        };
        assert!(matches!(gen_disjoint(&too_small), Err(Error::Infeasible(m)) if m.contains("c_min")));
        let low_degree = BenchConfig {
            k_avg: 2.0,
            k_max: 500,
            ..small(0)
        };
        assert!(matches!(gen_disjoint(&low_degree), Err(Error::Infeasible(m)) if m.contains("mean degree")));
    }

    #[test]
    fn co_membership_and_rates() {
        assert_eq!(co_membership(&[(0, 0.3), (2, 0.7)], &[(0, 0.5), (1, 0.5)]), 0.3);
        // no shared communities: plain random graph at the target density
        assert_eq!(fuzzy_edge_rates(100, 5.0, 0.3, 0.0).unwrap(), (0.0, 250.0 / 4950.0));
        assert!(fuzzy_edge_rates(100, 5.0, 0.3, 4950.0).is_err());
        let (p_in, p_out) = fuzzy_edge_rates(100, 5.0, 0.3, 300.0).unwrap();
        let expected = p_in * 300.0 + p_out * (4950.0 - 300.0);
        assert!((expected - 250.0).abs() < 1e-9);
    }

    #[test]
    fn total_co_membership_matches_pair_loop() {
        let rows = vec![
            vec![(0, 0.2), (1, 0.8)],
            vec![(0, 1.0)],
            vec![(1, 0.4), (2, 0.6)],
            vec![(0, 0.5), (2, 0.5)],
        ];
        let mut brute = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                brute += co_membership(&rows[i], &rows[j]);
            }
        }
        assert!((total_co_membership(&rows, 3) - brute).abs() < 1e-12);
    }

    #[test]
    fn fuzzy_edges_concentrate() {
        let cfg = BenchConfig {
            n: 300,
            k_avg: 15.0,
            k_max: 40,
            mu: 0.2,
            c_min: 20,
            c_max: 60,
            on: 0.2,
            om: 2,
            seed: 5,
            ..BenchConfig::default()
        };
        let (g, f, stats) = gen_fuzzy(&cfg).unwrap();
        let expected = stats.expected_edges.unwrap();
        // binomial variance is bounded by the mean
        assert!((g.m() as f64 - expected).abs() < 3.0 * expected.sqrt());
        assert!((expected - 300.0 * 15.0 / 2.0).abs() < 1e-6);
        for row in f.rows() {
            assert!((row.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
