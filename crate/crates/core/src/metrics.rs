//! Comparison metrics between community structures.
//!
//! Disjoint: NMI (arithmetic-mean normalisation) and ARI. Overlapping: ONMI
//! (max-normalised variant over binary membership variables) and the Omega
//! index. Fuzzy: the adjusted fuzzy Rand index. All metrics are symmetric and
//! invariant to community relabelling; natural logarithms throughout.

use std::collections::{BTreeMap, HashMap};

use crate::community::{Cover, FuzzyAssignment, Partition};
use crate::error::{Error, Result};

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::SizeMismatch {
            expected: a,
            found: b,
        });
    }
    if a == 0 {
        return Err(Error::EmptyVertexSet);
    }
    Ok(())
}

/// Counts `n_ij = |detected_i ∩ truth_j|` with their marginals.
#[derive(Clone, Debug)]
pub struct ContingencyTable {
    cells: BTreeMap<(usize, usize), usize>,
    rows: Vec<usize>,
    cols: Vec<usize>,
    total: usize,
}

impl ContingencyTable {
    pub fn new(a: &Partition, b: &Partition) -> Result<Self> {
        check_len(a.len(), b.len())?;
        let (a, b) = (a.normalized(), b.normalized());
        let mut rows = vec![0; a.num_communities()];
        let mut cols = vec![0; b.num_communities()];
        let mut cells = BTreeMap::new();
        for (&i, &j) in a.labels().iter().zip(b.labels()) {
            rows[i] += 1;
            cols[j] += 1;
            *cells.entry((i, j)).or_insert(0) += 1;
        }
        Ok(ContingencyTable {
            cells,
            rows,
            cols,
            total: a.len(),
        })
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn row_sums(&self) -> &[usize] {
        &self.rows
    }

    pub fn col_sums(&self) -> &[usize] {
        &self.cols
    }

    /// Non-zero cells as `((i, j), n_ij)`.
    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize), usize)> + '_ {
        self.cells.iter().map(|(&k, &v)| (k, v))
    }
}

/// Summed in sorted count order, so equal multisets of counts give
/// bitwise-equal entropies.
fn entropy_of_counts(counts: &[usize], total: f64) -> f64 {
    let mut sorted: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
    sorted.sort_unstable();
    sorted
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum()
}

/// Normalised mutual information `2 I(A;B) / (H(A) + H(B))`, with
/// `I = H(A) + H(B) - H(A,B)`.
pub fn nmi(a: &Partition, b: &Partition) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    let n = t.total as f64;
    let ha = entropy_of_counts(&t.rows, n);
    let hb = entropy_of_counts(&t.cols, n);
    if ha + hb == 0.0 {
        // both are the single-block partition
        return Ok(1.0);
    }
    let joint: Vec<usize> = t.cells().map(|(_, c)| c).collect();
    let mi = ha + hb - entropy_of_counts(&joint, n);
    Ok((2.0 * mi / (ha + hb)).clamp(0.0, 1.0))
}

fn comb2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Hubert-Arabie adjusted Rand index.
pub fn ari(a: &Partition, b: &Partition) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    let pairs = comb2(t.total);
    if pairs == 0.0 {
        return Ok(1.0);
    }
    let index: f64 = t.cells().map(|(_, c)| comb2(c)).sum();
    let sa: f64 = t.rows.iter().map(|&c| comb2(c)).sum();
    let sb: f64 = t.cols.iter().map(|&c| comb2(c)).sum();
    let expected = sa * sb / pairs;
    let max = 0.5 * (sa + sb);
    if max == expected {
        return Ok(if index == max { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

fn h(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.ln()
    }
}

/// Entropy of a membership indicator, from counts so it matches the joint
/// terms bit for bit.
fn binary_entropy(count: usize, n: f64) -> f64 {
    let c = count as f64;
    h(c / n) + h((n - c) / n)
}

/// Sum over communities of `X` of `H(X_k | Y)`, where each `X_k` is matched
/// to the best `Y_l` among those passing the Lancichinetti constraint.
fn conditional_entropy(
    x: &[Vec<usize>],
    y: &[Vec<usize>],
    overlap: &HashMap<(usize, usize), usize>,
    n: f64,
    x_is_first: bool,
) -> f64 {
    let mut total = 0.0;
    for (k, xk) in x.iter().enumerate() {
        let hx = binary_entropy(xk.len(), n);
        let mut best = hx;
        for (l, yl) in y.iter().enumerate() {
            let key = if x_is_first { (k, l) } else { (l, k) };
            let n11 = overlap.get(&key).copied().unwrap_or(0) as f64;
            let n10 = xk.len() as f64 - n11;
            let n01 = yl.len() as f64 - n11;
            let n00 = n - n11 - n10 - n01;
            let (p11, p10, p01, p00) = (n11 / n, n10 / n, n01 / n, n00 / n);
            if h(p11) + h(p00) <= h(p01) + h(p10) {
                continue;
            }
            let joint = h(p11) + h(p10) + h(p01) + h(p00);
            let cond = joint - binary_entropy(yl.len(), n);
            if cond < best {
                best = cond;
            }
        }
        total += best;
    }
    total
}

/// Overlapping NMI, max-normalised: `I(X:Y) / max(H(X), H(Y))` with
/// `I = [H(X) - H(X|Y) + H(Y) - H(Y|X)] / 2` over binary membership variables.
pub fn onmi(a: &Cover, b: &Cover) -> Result<f64> {
    check_len(a.len(), b.len())?;
    let n = a.len() as f64;
    let ca = a.communities();
    let cb = b.communities();
    let mut overlap: HashMap<(usize, usize), usize> = HashMap::new();
    let label_a: BTreeMap<usize, usize> = community_index(a);
    let label_b: BTreeMap<usize, usize> = community_index(b);
    for v in 0..a.len() {
        for la in a.memberships(v) {
            for lb in b.memberships(v) {
                *overlap.entry((label_a[la], label_b[lb])).or_insert(0) += 1;
            }
        }
    }
    let hx = cover_entropy(&ca, n);
    let hy = cover_entropy(&cb, n);
    let max = hx.max(hy);
    if max == 0.0 {
        return Ok(1.0);
    }
    let hxy = conditional_entropy(&ca, &cb, &overlap, n, true);
    let hyx = conditional_entropy(&cb, &ca, &overlap, n, false);
    let mi = 0.5 * (hx - hxy + hy - hyx);
    Ok((mi / max).clamp(0.0, 1.0))
}

/// Summed by community size so relabelled copies give bitwise-equal values.
fn cover_entropy(communities: &[Vec<usize>], n: f64) -> f64 {
    let mut sizes: Vec<usize> = communities.iter().map(Vec::len).collect();
    sizes.sort_unstable();
    sizes.into_iter().map(|s| binary_entropy(s, n)).sum()
}

/// Position of each label in `Cover::communities()` order.
fn community_index(c: &Cover) -> BTreeMap<usize, usize> {
    let mut labels: Vec<usize> = c.all_memberships().iter().flatten().copied().collect();
    labels.sort_unstable();
    labels.dedup();
    labels.into_iter().enumerate().map(|(i, l)| (l, i)).collect()
}

/// Number of shared communities for every co-clustered pair `(u < v)`.
fn pair_multiplicities(c: &Cover) -> HashMap<(usize, usize), usize> {
    let mut counts = HashMap::new();
    for members in c.communities() {
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                *counts.entry((u, v)).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// Omega index: chance-corrected agreement on how many communities each pair
/// of vertices shares.
pub fn omega(a: &Cover, b: &Cover) -> Result<f64> {
    check_len(a.len(), b.len())?;
    let n = a.len();
    let pairs = (n * (n - 1) / 2) as f64;
    if pairs == 0.0 {
        return Ok(1.0);
    }
    let ta = pair_multiplicities(a);
    let tb = pair_multiplicities(b);
    let mut hist_a: BTreeMap<usize, usize> = BTreeMap::new();
    let mut hist_b: BTreeMap<usize, usize> = BTreeMap::new();
    for &t in ta.values() {
        *hist_a.entry(t).or_insert(0) += 1;
    }
    for &t in tb.values() {
        *hist_b.entry(t).or_insert(0) += 1;
    }
    hist_a.insert(0, pairs as usize - ta.len());
    hist_b.insert(0, pairs as usize - tb.len());

    let mut agree = 0usize;
    let mut union = 0usize;
    for (key, &t) in &ta {
        union += 1;
        if tb.get(key).copied().unwrap_or(0) == t {
            agree += 1;
        }
    }
    for key in tb.keys() {
        if !ta.contains_key(key) {
            union += 1;
        }
    }
    agree += pairs as usize - union;

    let observed = agree as f64 / pairs;
    let expected: f64 = hist_a
        .iter()
        .map(|(j, &ca)| ca as f64 * hist_b.get(j).copied().unwrap_or(0) as f64)
        .sum::<f64>()
        / (pairs * pairs);
    if (1.0 - expected).abs() < 1e-15 {
        return Ok(if observed == 1.0 { 1.0 } else { 0.0 });
    }
    Ok((observed - expected) / (1.0 - expected))
}

/// `1 - 0.5 * sum_c |alpha_ic - alpha_jc|` for two sparse sorted rows.
fn fuzzy_together(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut dist = 0.0;
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&(ca, pa)), Some(&(cb, pb))) if ca == cb => {
                dist += (pa - pb).abs();
                i += 1;
                j += 1;
            }
            (Some(&(ca, pa)), Some(&(cb, _))) if ca < cb => {
                dist += pa;
                i += 1;
            }
            (Some(_), Some(&(_, pb))) => {
                dist += pb;
                j += 1;
            }
            (Some(&(_, pa)), None) => {
                dist += pa;
                i += 1;
            }
            (None, Some(&(_, pb))) => {
                dist += pb;
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    1.0 - 0.5 * dist
}

/// Adjusted fuzzy Rand index.
///
/// With `f(i,j,C) = 1 - 1/2 sum_c |alpha_ic - alpha_jc|` over the `P`
/// unordered pairs: `RI_u = (P - sum |f1 - f2|) / P`,
/// `RI_e = (s1 s2 + (P - s1)(P - s2)) / P^2` where `s = sum f`, and the
/// result is `(RI_u - RI_e) / (1 - RI_e)`. On crisp partitions this equals
/// the adjusted Rand index.
pub fn fuzzy_rand(a: &FuzzyAssignment, b: &FuzzyAssignment) -> Result<f64> {
    check_len(a.len(), b.len())?;
    let n = a.len();
    let pairs = (n * (n - 1) / 2) as f64;
    if pairs == 0.0 {
        return Ok(1.0);
    }
    let (mut diff, mut sa, mut sb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let fa = fuzzy_together(a.row(i), a.row(j));
            let fb = fuzzy_together(b.row(i), b.row(j));
            diff += (fa - fb).abs();
            sa += fa;
            sb += fb;
        }
    }
    let observed = (pairs - diff) / pairs;
    let expected = (sa * sb + (pairs - sa) * (pairs - sb)) / (pairs * pairs);
    if (1.0 - expected).abs() < 1e-12 {
        return Ok(if (1.0 - observed).abs() < 1e-12 { 1.0 } else { 0.0 });
    }
    Ok((observed - expected) / (1.0 - expected))
}

/// Names accepted by [`Metric::from_str`](std::str::FromStr).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Nmi,
    Ari,
    Onmi,
    Omega,
    FuzzyRand,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nmi" => Ok(Metric::Nmi),
            "ari" => Ok(Metric::Ari),
            "onmi" => Ok(Metric::Onmi),
            "omega" => Ok(Metric::Omega),
            "fri" | "fuzzy_rand" => Ok(Metric::FuzzyRand),
            other => Err(Error::invalid(format!("unknown metric '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(labels: &[usize]) -> Partition {
        Partition::new(labels.to_vec())
    }

    #[test]
    fn identical_partitions_score_one() {
        let a = p(&[0, 0, 1, 1, 2]);
        let b = p(&[5, 5, 3, 3, 9]);
        assert_eq!(nmi(&a, &b).unwrap(), 1.0);
        assert_eq!(ari(&a, &b).unwrap(), 1.0);
        assert_eq!(nmi(&Partition::single_block(4), &Partition::single_block(4)).unwrap(), 1.0);
    }

    #[test]
    fn one_block_versus_singletons_is_zero() {
        let n = 10;
        assert_eq!(nmi(&Partition::single_block(n), &Partition::singletons(n)).unwrap(), 0.0);
        assert_eq!(ari(&Partition::single_block(n), &Partition::singletons(n)).unwrap(), 0.0);
    }

    #[test]
    fn refinement_example_by_hand() {
        // X = {01}{23}, Y = {01}{2}{3}: I = ln 2, H(X) = ln 2, H(Y) = 1.5 ln 2
        let v = nmi(&p(&[0, 0, 1, 1]), &p(&[0, 0, 1, 2])).unwrap();
        assert!((v - 0.8).abs() < 1e-12);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        assert!(nmi(&p(&[0, 1]), &p(&[0])).is_err());
        assert!(ari(&p(&[0, 1]), &p(&[0])).is_err());
    }

    #[test]
    fn covers_identical_score_one() {
        let c = Cover::from_communities(5, &[vec![0, 1, 2], vec![2, 3, 4]]).unwrap();
        assert_eq!(onmi(&c, &c).unwrap(), 1.0);
        assert_eq!(omega(&c, &c).unwrap(), 1.0);
    }

    #[test]
    fn onmi_of_refinement_by_hand() {
        // H(X) = 2 ln2, H(Y) = ln2 + 2 h2(1/4), H(X|Y) = H(X2|Y2), H(Y|X) = 2 H(Y2|X2)
        let x = Cover::from_partition(&p(&[0, 0, 1, 1]));
        let y = Cover::from_partition(&p(&[0, 0, 1, 2]));
        let ln2 = 2f64.ln();
        let h2q = -(0.25 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
        let hx = 2.0 * ln2;
        let hy = ln2 + 2.0 * h2q;
        let joint = -(2.0 * 0.25 * 0.25f64.ln() + 0.5 * 0.5f64.ln());
        let hxy = joint - h2q;
        let hyx = 2.0 * (joint - ln2);
        let expected = 0.5 * (hx - hxy + hy - hyx) / hx.max(hy);
        assert!((onmi(&x, &y).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn unrelated_covers_score_near_zero() {
        // rows versus columns of a 6x6 grid
        let rows: Vec<Vec<usize>> = (0..6).map(|r| (0..6).map(|c| r * 6 + c).collect()).collect();
        let cols: Vec<Vec<usize>> = (0..6).map(|c| (0..6).map(|r| r * 6 + c).collect()).collect();
        let a = Cover::from_communities(36, &rows).unwrap();
        let b = Cover::from_communities(36, &cols).unwrap();
        assert!(onmi(&a, &b).unwrap() < 0.05);
        assert!(omega(&a, &b).unwrap().abs() < 0.2);
    }

    #[test]
    fn fuzzy_identical_is_one_and_crisp_matches_ari() {
        let a = p(&[0, 0, 1, 1, 2, 2, 2]);
        let b = p(&[0, 1, 1, 1, 2, 0, 2]);
        let fa = FuzzyAssignment::from_partition(&a);
        let fb = FuzzyAssignment::from_partition(&b);
        assert_eq!(fuzzy_rand(&fa, &fa).unwrap(), 1.0);
        let fri = fuzzy_rand(&fa, &fb).unwrap();
        assert!((fri - ari(&a, &b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn uniform_versus_one_hot_on_two_communities() {
        // 4 vertices. A: uniform (0.5, 0.5) everywhere -> f = 1 for all pairs.
        // B: one-hot {0,1} {2,3} -> f = 1 for 2 pairs, 0 for 4 pairs.
        // P = 6, sum |fa - fb| = 4, RI_u = 2/6, s_a = 6, s_b = 2,
        // RI_e = (6*2 + 0*4) / 36 = 1/3 -> adjusted = 0.
        let uniform = FuzzyAssignment::new(vec![vec![(0, 0.5), (1, 0.5)]; 4]).unwrap();
        let crisp = FuzzyAssignment::from_partition(&p(&[0, 0, 1, 1]));
        let v = fuzzy_rand(&uniform, &crisp).unwrap();
        assert!(v.abs() < 1e-12, "{v}");
        // B': one vertex split (0.5, 0.5), others crisp as before.
        // f(0,1)=0.5 f(0,2)=0.5 f(0,3)=0.5 f(1,2)=0 f(1,3)=0 f(2,3)=1 -> s_b = 2.5
        let mixed = FuzzyAssignment::new(vec![
            vec![(0, 0.5), (1, 0.5)],
            vec![(0, 1.0)],
            vec![(1, 1.0)],
            vec![(1, 1.0)],
        ])
        .unwrap();
        let ri_u = (6.0 - 3.5) / 6.0;
        let ri_e = (6.0 * 2.5 + 0.0) / 36.0;
        let expected = (ri_u - ri_e) / (1.0 - ri_e);
        assert!((fuzzy_rand(&uniform, &mixed).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn metric_names() {
        assert_eq!("fri".parse::<Metric>().unwrap(), Metric::FuzzyRand);
        assert!("f1".parse::<Metric>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn labels() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
            (1usize..40).prop_flat_map(|n| (prop::collection::vec(0usize..6, n), prop::collection::vec(0usize..6, n)))
        }

        proptest! {
            #[test]
            fn relabelled_copy_scores_exactly_one(labels in prop::collection::vec(0usize..8, 1..60), shift in 1usize..50) {
                let a = Partition::new(labels.clone());
                let b = Partition::new(labels.iter().map(|&l| (l * 7 + shift) % 97).collect());
                prop_assert_eq!(nmi(&a, &b).unwrap(), 1.0);
                prop_assert_eq!(ari(&a, &b).unwrap(), 1.0);
                let (ca, cb) = (Cover::from_partition(&a), Cover::from_partition(&b));
                prop_assert_eq!(onmi(&ca, &cb).unwrap(), 1.0);
                prop_assert_eq!(omega(&ca, &cb).unwrap(), 1.0);
            }

            #[test]
            fn symmetric_and_bounded((x, y) in labels()) {
                let (a, b) = (Partition::new(x), Partition::new(y));
                let (ab, ba) = (nmi(&a, &b).unwrap(), nmi(&b, &a).unwrap());
                prop_assert!((ab - ba).abs() < 1e-12);
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&ab));
                prop_assert!((ari(&a, &b).unwrap() - ari(&b, &a).unwrap()).abs() < 1e-12);
                prop_assert!(ari(&a, &b).unwrap() <= 1.0 + 1e-12);
                let (ca, cb) = (Cover::from_partition(&a), Cover::from_partition(&b));
                let o = onmi(&ca, &cb).unwrap();
                prop_assert!((o - onmi(&cb, &ca).unwrap()).abs() < 1e-12);
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&o));
            }

            #[test]
            fn crisp_fuzzy_rand_matches_ari((x, y) in labels()) {
                let (a, b) = (Partition::new(x), Partition::new(y));
                let fri = fuzzy_rand(&FuzzyAssignment::from_partition(&a), &FuzzyAssignment::from_partition(&b)).unwrap();
                let expected = ari(&a, &b).unwrap();
                prop_assert!((fri - expected).abs() < 1e-9, "fri {} ari {}", fri, expected);
            }
        }
    }
}
