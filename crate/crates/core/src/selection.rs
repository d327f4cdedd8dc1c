//! Choosing a subset of the base solutions before running an ensemble.
//!
//! Every selector works on a [`Scoreboard`]: the pairwise NMI between all
//! base solutions and each solution's quality, its summed NMI against all
//! the others.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::community::Partition;
use crate::ensemble::BaseSolutionSet;
use crate::error::{Error, Result};
use crate::metrics::nmi;

/// Pairwise similarities and qualities of a solution set.
#[derive(Clone, Debug, PartialEq)]
pub struct Scoreboard {
    similarity: Vec<Vec<f64>>,
    quality: Vec<f64>,
}

impl Scoreboard {
    pub fn from_partitions(partitions: &[&Partition]) -> Result<Self> {
        let n = partitions.len();
        if n == 0 {
            return Err(Error::invalid("no solutions to score"));
        }
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let values: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| nmi(partitions[i], partitions[j]))
            .collect::<Result<_>>()?;
        let mut similarity = vec![vec![1.0; n]; n];
        for (&(i, j), &q) in pairs.iter().zip(&values) {
            similarity[i][j] = q;
            similarity[j][i] = q;
        }
        Self::from_similarity(similarity)
    }

    pub fn from_solutions(set: &BaseSolutionSet) -> Result<Self> {
        Self::from_partitions(&set.partitions())
    }

    /// From a symmetric similarity matrix with unit diagonal.
    pub fn from_similarity(similarity: Vec<Vec<f64>>) -> Result<Self> {
        let n = similarity.len();
        for (i, row) in similarity.iter().enumerate() {
            if row.len() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if row[i] != 1.0 || (0..n).any(|j| row[j] != similarity[j][i]) {
                return Err(Error::invalid("similarity matrix must be symmetric with unit diagonal"));
            }
        }
        let quality = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).map(|j| similarity[i][j]).sum())
            .collect();
        Ok(Scoreboard { similarity, quality })
    }

    pub fn len(&self) -> usize {
        self.quality.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quality.is_empty()
    }

    pub fn quality(&self) -> &[f64] {
        &self.quality
    }

    pub fn similarity(&self, i: usize, j: usize) -> f64 {
        self.similarity[i][j]
    }

    fn best_quality(&self) -> usize {
        argmax_by(0..self.len(), |i| self.quality[i]).expect("non-empty scoreboard")
    }
}

/// Index with the largest score; lowest index on ties.
fn argmax_by(items: impl Iterator<Item = usize>, score: impl Fn(usize) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in items {
        let s = score(i);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|b| b.0)
}

/// `Quality(C) = sum_{C' != C} NMI(C, C')` for every solution.
pub fn quality_scores(set: &BaseSolutionSet) -> Result<Vec<f64>> {
    Ok(Scoreboard::from_solutions(set)?.quality)
}

/// Top `s` by quality, ties by index.
pub fn select_quality(sb: &Scoreboard, s: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sb.len()).collect();
    order.sort_by(|&a, &b| sb.quality[b].total_cmp(&sb.quality[a]).then(a.cmp(&b)));
    order.truncate(s.min(sb.len()));
    order
}

/// Greedy growth from `seed`: each step adds the unchosen solution with the
/// largest `gain(candidate, chosen)`, lowest index on ties.
fn greedy(sb: &Scoreboard, s: usize, gain: impl Fn(usize, &[usize]) -> f64) -> Vec<usize> {
    let s = s.min(sb.len());
    if s == 0 {
        return Vec::new();
    }
    let mut chosen = vec![sb.best_quality()];
    let mut taken = vec![false; sb.len()];
    taken[chosen[0]] = true;
    while chosen.len() < s {
        let next = argmax_by((0..sb.len()).filter(|&i| !taken[i]), |i| gain(i, &chosen)).expect("candidates left");
        taken[next] = true;
        chosen.push(next);
    }
    chosen
}

/// Starts from the best-quality solution and keeps adding the one that
/// minimises the summed pairwise similarity of the chosen set.
pub fn select_diversity(sb: &Scoreboard, s: usize) -> Vec<usize> {
    greedy(sb, s, |x, chosen| -chosen.iter().map(|&c| sb.similarity[x][c]).sum::<f64>())
}

/// Greedy maximisation of
/// `J = alpha * sum Quality + (1 - alpha) * sum_{ci != cj} (1 - Q(ci, cj))`,
/// the diversity sum running over ordered pairs.
pub fn select_combined(sb: &Scoreboard, s: usize, alpha: f64) -> Vec<usize> {
    greedy(sb, s, |x, chosen| {
        let diversity: f64 = chosen.iter().map(|&c| 1.0 - sb.similarity[x][c]).sum();
        alpha * sb.quality[x] + (1.0 - alpha) * 2.0 * diversity
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VrrwParams {
    /// Weight of the reinforced term against the prior.
    pub lambda: f64,
    /// Off-diagonal mass of the organic transition matrix.
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for VrrwParams {
    fn default() -> Self {
        VrrwParams {
            lambda: 0.9,
            alpha: 0.5,
            tol: 1e-8,
            max_iter: 10_000,
        }
    }
}

/// Stationary occupancy of the vertex-reinforced random walk.
#[derive(Clone, Debug, PartialEq)]
pub struct VrrwOutcome {
    pub occupancy: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Runs the reinforced walk on the solution graph (edge weight `1 - Q`).
///
/// Organic transitions: `p0(i,j) = alpha (1 - Q(i,j)) / wdeg(i)` off the
/// diagonal (0 when `wdeg(i) = 0`) and `1 - alpha` on it. With occupancy
/// `p` and normalised quality prior `p*`, one step uses
/// `pT(i,j) = (1 - lambda) p*(j) + lambda p0(i,j) p(j) / D(i)`,
/// `D(i) = sum_k p0(i,k) p(k)`, and `p'(k) = sum_n pT(n,k) p(n)`,
/// renormalised.
pub fn vrrw(sb: &Scoreboard, params: &VrrwParams) -> VrrwOutcome {
    let n = sb.len();
    let total_q: f64 = sb.quality.iter().sum();
    let prior: Vec<f64> = if total_q > 0.0 {
        sb.quality.iter().map(|q| q / total_q).collect()
    } else {
        vec![1.0 / n as f64; n]
    };
    let mut p0 = vec![vec![0.0; n]; n];
    for i in 0..n {
        let wdeg: f64 = (0..n).filter(|&j| j != i).map(|j| 1.0 - sb.similarity[i][j]).sum();
        for j in 0..n {
            p0[i][j] = if i == j {
                1.0 - params.alpha
            } else if wdeg > 0.0 {
                params.alpha * (1.0 - sb.similarity[i][j]) / wdeg
            } else {
                0.0
            };
        }
    }
    let mut p = prior.clone();
    for iter in 1..=params.max_iter {
        let mut next = vec![0.0; n];
        for i in 0..n {
            let d: f64 = (0..n).map(|k| p0[i][k] * p[k]).sum();
            for j in 0..n {
                let reinforced = if d > 0.0 { p0[i][j] * p[j] / d } else { 0.0 };
                let t = (1.0 - params.lambda) * prior[j] + params.lambda * reinforced;
                next[j] += t * p[i];
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let change = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        p = next;
        if change < params.tol {
            return VrrwOutcome {
                occupancy: p,
                iterations: iter,
                converged: true,
            };
        }
    }
    log::warn!("reinforced walk did not converge in {} iterations", params.max_iter);
    VrrwOutcome {
        occupancy: p,
        iterations: params.max_iter,
        converged: false,
    }
}

/// Top `s` solutions by stationary occupancy, ties by index.
pub fn select_vrrw(sb: &Scoreboard, s: usize, params: &VrrwParams) -> Vec<usize> {
    // Occupancies within 1e-12 count as tied so rounding noise cannot
    // override the index order.
    let key: Vec<i64> = vrrw(sb, params).occupancy.iter().map(|x| (x * 1e12).round() as i64).collect();
    let mut order: Vec<usize> = (0..sb.len()).collect();
    order.sort_by(|&a, &b| key[b].cmp(&key[a]).then(a.cmp(&b)));
    order.truncate(s.min(sb.len()));
    order
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Quality,
    Diversity,
    Combined,
    Vrrw,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quality" => Ok(Strategy::Quality),
            "diversity" => Ok(Strategy::Diversity),
            "combined" => Ok(Strategy::Combined),
            "vrrw" => Ok(Strategy::Vrrw),
            other => Err(Error::invalid(format!("unknown selection strategy '{other}'"))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Strategy::Quality => "quality",
            Strategy::Diversity => "diversity",
            Strategy::Combined => "combined",
            Strategy::Vrrw => "vrrw",
        })
    }
}

/// `round(frac * total)`, clamped to `[1, total]`.
pub fn size_from_fraction(frac: f64, total: usize) -> usize {
    ((frac * total as f64).round() as usize).clamp(1, total.max(1))
}

/// Applies `strategy` with default parameters (`alpha = 0.5` for the
/// combined objective).
pub fn select(sb: &Scoreboard, strategy: Strategy, s: usize) -> Vec<usize> {
    match strategy {
        Strategy::Quality => select_quality(sb, s),
        Strategy::Diversity => select_diversity(sb, s),
        Strategy::Combined => select_combined(sb, s, 0.5),
        Strategy::Vrrw => select_vrrw(sb, s, &VrrwParams::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use rand::Rng;

    fn random_board(n: usize, seed: u64) -> Scoreboard {
        let mut rng = rng_from(seed, &[]);
        let mut sim = vec![vec![1.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let x: f64 = rng.gen();
                sim[i][j] = x;
                sim[j][i] = x;
            }
        }
        Scoreboard::from_similarity(sim).unwrap()
    }

    #[test]
    fn identical_solutions_have_equal_quality() {
        let p = Partition::new(vec![0, 0, 1, 1, 2]);
        let parts = vec![&p; 6];
        let sb = Scoreboard::from_partitions(&parts).unwrap();
        assert!(sb.quality().iter().all(|&q| q == 5.0));
    }

    #[test]
    fn outlier_scores_lowest() {
        let p = Partition::new(vec![0, 0, 0, 1, 1, 1, 2, 2]);
        let q = Partition::new(vec![0, 0, 1, 1, 1, 1, 2, 2]);
        let odd = Partition::singletons(8);
        let sb = Scoreboard::from_partitions(&[&p, &q, &p, &odd, &q]).unwrap();
        let min = argmax_by(0..5, |i| -sb.quality()[i]).unwrap();
        assert_eq!(min, 3);
    }

    #[test]
    fn selector_sizes_and_extremes() {
        let sb = random_board(9, 1);
        for s in [0, 1, 4, 9, 20] {
            for strategy in [Strategy::Quality, Strategy::Diversity, Strategy::Combined, Strategy::Vrrw] {
                let mut chosen = select(&sb, strategy, s);
                assert_eq!(chosen.len(), s.min(9));
                chosen.sort_unstable();
                chosen.dedup();
                assert_eq!(chosen.len(), s.min(9));
            }
        }
        assert_eq!(select_diversity(&sb, 1), select_quality(&sb, 1));
    }

    #[test]
    fn combined_limits_reproduce_pure_strategies() {
        for seed in 0..20 {
            let sb = random_board(10, seed);
            for s in 1..=10 {
                assert_eq!(select_combined(&sb, s, 1.0), select_quality(&sb, s));
                assert_eq!(select_combined(&sb, s, 0.0), select_diversity(&sb, s));
            }
        }
    }

    #[test]
    fn quality_selection_is_permutation_invariant() {
        let sb = random_board(8, 4);
        let perm = [3, 7, 0, 5, 1, 6, 2, 4];
        let permuted: Vec<Vec<f64>> = (0..8)
            .map(|i| (0..8).map(|j| sb.similarity(perm[i], perm[j])).collect())
            .collect();
        let other = Scoreboard::from_similarity(permuted).unwrap();
        let mut a: Vec<usize> = select_quality(&sb, 3);
        let mut b: Vec<usize> = select_quality(&other, 3).into_iter().map(|i| perm[i]).collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn diversity_avoids_duplicates() {
        // 0 and 1 are identical, everything else is mutually dissimilar
        let n = 5;
        let mut sim = vec![vec![0.2; n]; n];
        for (i, row) in sim.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        sim[0][1] = 1.0;
        sim[1][0] = 1.0;
        let sb = Scoreboard::from_similarity(sim).unwrap();
        for s in 2..=4 {
            let chosen = select_diversity(&sb, s);
            assert!(!(chosen.contains(&0) && chosen.contains(&1)), "{chosen:?}");
        }
    }

    #[test]
    fn vrrw_uniform_on_identical_solutions() {
        let n = 6;
        let sb = Scoreboard::from_similarity(vec![vec![1.0; n]; n]).unwrap();
        let out = vrrw(&sb, &VrrwParams::default());
        assert!(out.converged);
        assert!(out.occupancy.iter().all(|&x| (x - 1.0 / 6.0).abs() < 1e-12));
        assert_eq!(select_vrrw(&sb, 3, &VrrwParams::default()), vec![0, 1, 2]);
    }

    #[test]
    fn vrrw_occupancy_is_a_distribution() {
        let sb = random_board(12, 9);
        for max_iter in [1, 2, 5, 50] {
            let out = vrrw(
                &sb,
                &VrrwParams {
                    max_iter,
                    ..VrrwParams::default()
                },
            );
            assert!((out.occupancy.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(out.occupancy.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn size_fraction() {
        assert_eq!(size_from_fraction(0.6, 40), 24);
        assert_eq!(size_from_fraction(0.0, 40), 1);
        assert_eq!(size_from_fraction(2.0, 40), 40);
    }
}
