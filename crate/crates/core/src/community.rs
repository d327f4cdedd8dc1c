//! Community structures (disjoint, overlapping, fuzzy) and their text formats.
//!
//! File formats, one record per line, `#` comments allowed:
//!
//! * partition: `vertex community`
//! * cover: one community per line, whitespace-separated vertices
//! * fuzzy: `vertex community probability`

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::SymbolTable;

/// Tolerance for fuzzy rows summing to one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Disjoint community structure: one label per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
}

impl Partition {
    pub fn new(labels: Vec<usize>) -> Self {
        Partition { labels }
    }

    /// Every vertex in its own community.
    pub fn singletons(n: usize) -> Self {
        Partition::new((0..n).collect())
    }

    pub fn single_block(n: usize) -> Self {
        Partition::new(vec![0; n])
    }

    /// Builds a partition from explicit communities; they must cover `0..n`
    /// exactly once.
    pub fn from_communities(n: usize, communities: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (c, members) in communities.iter().enumerate() {
            for &v in members {
                if v >= n {
                    return Err(Error::VertexOutOfRange(v));
                }
                if labels[v] != usize::MAX {
                    return Err(Error::invalid(format!("vertex {v} appears in two communities")));
                }
                labels[v] = c;
            }
        }
        let missing: Vec<String> = (0..n)
            .filter(|&v| labels[v] == usize::MAX)
            .map(|v| v.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingVertices(missing));
        }
        Ok(Partition::new(labels))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    /// Labels renumbered `0..c` in order of first appearance.
    pub fn normalized(&self) -> Partition {
        let mut map = HashMap::new();
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        Partition::new(labels)
    }

    pub fn num_communities(&self) -> usize {
        let mut ls = self.labels.clone();
        ls.sort_unstable();
        ls.dedup();
        ls.len()
    }

    /// Member lists, ordered by first appearance of each label.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let norm = self.normalized();
        let k = norm.labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut out = vec![Vec::new(); k];
        for (v, &l) in norm.labels.iter().enumerate() {
            out[l].push(v);
        }
        out
    }

    /// Restricts the partition to `vertices` (in that order).
    pub fn restrict(&self, vertices: &[usize]) -> Partition {
        Partition::new(vertices.iter().map(|&v| self.labels[v]).collect())
    }
}

/// Overlapping community structure: each vertex holds a non-empty set of labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    memberships: Vec<Vec<usize>>,
}

impl Cover {
    /// Validates that every vertex has at least one membership; label sets are
    /// sorted and deduplicated.
    pub fn new(mut memberships: Vec<Vec<usize>>) -> Result<Self> {
        let mut empty = Vec::new();
        for (v, m) in memberships.iter_mut().enumerate() {
            m.sort_unstable();
            m.dedup();
            if m.is_empty() {
                empty.push(v.to_string());
            }
        }
        if !empty.is_empty() {
            return Err(Error::MissingVertices(empty));
        }
        Ok(Cover { memberships })
    }

    pub fn from_communities(n: usize, communities: &[Vec<usize>]) -> Result<Self> {
        let mut memberships = vec![Vec::new(); n];
        for (c, members) in communities.iter().enumerate() {
            for &v in members {
                if v >= n {
                    return Err(Error::VertexOutOfRange(v));
                }
                memberships[v].push(c);
            }
        }
        Cover::new(memberships)
    }

    pub fn from_partition(p: &Partition) -> Self {
        Cover {
            memberships: p.labels().iter().map(|&l| vec![l]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.memberships.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memberships.is_empty()
    }

    pub fn memberships(&self, v: usize) -> &[usize] {
        &self.memberships[v]
    }

    pub fn all_memberships(&self) -> &[Vec<usize>] {
        &self.memberships
    }

    /// Non-empty communities, ordered by label.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (v, ms) in self.memberships.iter().enumerate() {
            for &c in ms {
                by_label.entry(c).or_default().push(v);
            }
        }
        by_label.into_values().collect()
    }

    pub fn is_partition(&self) -> bool {
        self.memberships.iter().all(|m| m.len() == 1)
    }

    pub fn overlapping_vertices(&self) -> usize {
        self.memberships.iter().filter(|m| m.len() > 1).count()
    }

    /// Whether every community of `other` for a vertex is also present here.
    pub fn contains_partition(&self, p: &Partition) -> bool {
        p.labels()
            .iter()
            .enumerate()
            .all(|(v, l)| self.memberships[v].binary_search(l).is_ok())
    }
}

/// Per-vertex probability distributions over community labels.
#[derive(Clone, Debug, PartialEq)]
pub struct FuzzyAssignment {
    rows: Vec<Vec<(usize, f64)>>,
}

impl FuzzyAssignment {
    /// Rows are sparse `(community, probability)` lists; zero entries are
    /// dropped and every row must sum to 1 within [`ROW_SUM_TOLERANCE`].
    pub fn new(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut clean = Vec::with_capacity(rows.len());
        for (v, row) in rows.into_iter().enumerate() {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for (c, p) in row {
                if !(0.0..=1.0 + ROW_SUM_TOLERANCE).contains(&p) {
                    return Err(Error::invalid(format!(
                        "vertex {v}: probability {p} outside [0,1]"
                    )));
                }
                *acc.entry(c).or_insert(0.0) += p;
            }
            let sum: f64 = acc.values().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::invalid(format!(
                    "vertex {v}: probabilities sum to {sum}"
                )));
            }
            clean.push(acc.into_iter().filter(|&(_, p)| p > 0.0).collect());
        }
        Ok(FuzzyAssignment { rows: clean })
    }

    /// One-hot rows.
    pub fn from_partition(p: &Partition) -> Self {
        FuzzyAssignment {
            rows: p.labels().iter().map(|&l| vec![(l, 1.0)]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, v: usize) -> &[(usize, f64)] {
        &self.rows[v]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    /// Support of each row as a crisp cover.
    pub fn support(&self) -> Cover {
        Cover {
            memberships: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&(c, _)| c).collect())
                .collect(),
        }
    }

    /// Most probable community per vertex (lowest label on ties).
    pub fn argmax(&self) -> Partition {
        Partition::new(
            self.rows
                .iter()
                .map(|r| {
                    r.iter()
                        .fold((usize::MAX, f64::NEG_INFINITY), |best, &(c, p)| {
                            if p > best.1 {
                                (c, p)
                            } else {
                                best
                            }
                        })
                        .0
                })
                .collect(),
        )
    }
}

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let t = l.trim();
        if t.is_empty() || t.starts_with('#') {
            None
        } else {
            Some((i + 1, t.split_whitespace().collect()))
        }
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Partition file contents before vertex names are resolved.
#[derive(Clone, Debug)]
pub struct RawPartition {
    entries: Vec<(usize, String, String)>,
}

impl RawPartition {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (line, toks) in records(text) {
            if toks.len() != 2 {
                return Err(parse_err(origin, line, "expected 'vertex community'"));
            }
            entries.push((line, toks[0].to_owned(), toks[1].to_owned()));
        }
        Ok(RawPartition { entries })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&read_text(path)?, path)
    }

    pub fn vertex_names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(_, v, _)| v.as_str())
    }

    /// Maps names through `symbols`; every symbol must be assigned exactly once.
    pub fn resolve(&self, symbols: &SymbolTable) -> Result<Partition> {
        let mut community_ids: HashMap<&str, usize> = HashMap::new();
        let mut labels = vec![usize::MAX; symbols.len()];
        for (_, v, c) in &self.entries {
            let id = symbols
                .get(v)
                .ok_or_else(|| Error::UnknownVertex(v.clone()))?;
            let next = community_ids.len();
            let label = *community_ids.entry(c.as_str()).or_insert(next);
            if labels[id] != usize::MAX && labels[id] != label {
                return Err(Error::invalid(format!(
                    "vertex '{v}' assigned to two communities"
                )));
            }
            labels[id] = label;
        }
        let missing: Vec<String> = (0..symbols.len())
            .filter(|&i| labels[i] == usize::MAX)
            .map(|i| symbols.name(i).to_owned())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingVertices(missing));
        }
        Ok(Partition::new(labels))
    }
}

/// Cover file contents before vertex names are resolved.
#[derive(Clone, Debug)]
pub struct RawCover {
    communities: Vec<Vec<String>>,
}

impl RawCover {
    pub fn parse(text: &str, _origin: &Path) -> Result<Self> {
        Ok(RawCover {
            communities: records(text)
                .map(|(_, t)| t.into_iter().map(str::to_owned).collect())
                .collect(),
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&read_text(path)?, path)
    }

    pub fn vertex_names(&self) -> impl Iterator<Item = &str> {
        self.communities.iter().flatten().map(String::as_str)
    }

    pub fn resolve(&self, symbols: &SymbolTable) -> Result<Cover> {
        let mut memberships = vec![Vec::new(); symbols.len()];
        for (c, members) in self.communities.iter().enumerate() {
            for v in members {
                let id = symbols
                    .get(v)
                    .ok_or_else(|| Error::UnknownVertex(v.clone()))?;
                memberships[id].push(c);
            }
        }
        let missing: Vec<String> = (0..symbols.len())
            .filter(|&i| memberships[i].is_empty())
            .map(|i| symbols.name(i).to_owned())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingVertices(missing));
        }
        Cover::new(memberships)
    }
}

/// Fuzzy file contents before vertex names are resolved.
#[derive(Clone, Debug)]
pub struct RawFuzzy {
    entries: Vec<(String, String, f64)>,
}

impl RawFuzzy {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (line, toks) in records(text) {
            if toks.len() != 3 {
                return Err(parse_err(origin, line, "expected 'vertex community probability'"));
            }
            let p: f64 = toks[2]
                .parse()
                .map_err(|_| parse_err(origin, line, format!("invalid probability '{}'", toks[2])))?;
            entries.push((toks[0].to_owned(), toks[1].to_owned(), p));
        }
        Ok(RawFuzzy { entries })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&read_text(path)?, path)
    }

    pub fn vertex_names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(v, _, _)| v.as_str())
    }

    pub fn resolve(&self, symbols: &SymbolTable) -> Result<FuzzyAssignment> {
        let mut community_ids: HashMap<&str, usize> = HashMap::new();
        let mut rows = vec![Vec::new(); symbols.len()];
        for (v, c, p) in &self.entries {
            let id = symbols
                .get(v)
                .ok_or_else(|| Error::UnknownVertex(v.clone()))?;
            let next = community_ids.len();
            let label = *community_ids.entry(c.as_str()).or_insert(next);
            rows[id].push((label, *p));
        }
        let missing: Vec<String> = (0..symbols.len())
            .filter(|&i| rows[i].is_empty())
            .map(|i| symbols.name(i).to_owned())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingVertices(missing));
        }
        FuzzyAssignment::new(rows)
    }
}

pub fn format_partition(p: &Partition, symbols: &SymbolTable) -> String {
    let mut out = String::new();
    for (v, &l) in p.normalized().labels().iter().enumerate() {
        let _ = writeln!(out, "{} {}", symbols.name(v), l);
    }
    out
}

pub fn format_cover(c: &Cover, symbols: &SymbolTable) -> String {
    let mut out = String::new();
    for members in c.communities() {
        let names: Vec<&str> = members.iter().map(|&v| symbols.name(v)).collect();
        let _ = writeln!(out, "{}", names.join(" "));
    }
    out
}

pub fn format_fuzzy(f: &FuzzyAssignment, symbols: &SymbolTable) -> String {
    let mut out = String::new();
    for (v, row) in f.rows().iter().enumerate() {
        for &(c, p) in row {
            let _ = writeln!(out, "{} {} {}", symbols.name(v), c, p);
        }
    }
    out
}

pub fn write_partition(path: impl AsRef<Path>, p: &Partition, symbols: &SymbolTable) -> Result<()> {
    write_text(path.as_ref(), &format_partition(p, symbols))
}

pub fn write_cover(path: impl AsRef<Path>, c: &Cover, symbols: &SymbolTable) -> Result<()> {
    write_text(path.as_ref(), &format_cover(c, symbols))
}

pub fn write_fuzzy(path: impl AsRef<Path>, f: &FuzzyAssignment, symbols: &SymbolTable) -> Result<()> {
    write_text(path.as_ref(), &format_fuzzy(f, symbols))
}

pub fn read_partition(path: impl AsRef<Path>, symbols: &SymbolTable) -> Result<Partition> {
    RawPartition::read(path)?.resolve(symbols)
}

pub fn read_cover(path: impl AsRef<Path>, symbols: &SymbolTable) -> Result<Cover> {
    RawCover::read(path)?.resolve(symbols)
}

pub fn read_fuzzy(path: impl AsRef<Path>, symbols: &SymbolTable) -> Result<FuzzyAssignment> {
    RawFuzzy::read(path)?.resolve(symbols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_communities() {
        let p = Partition::new(vec![7, 7, 3, 9, 3]);
        assert_eq!(p.normalized().labels(), &[0, 0, 1, 2, 1]);
        assert_eq!(p.num_communities(), 3);
        assert_eq!(p.communities(), vec![vec![0, 1], vec![2, 4], vec![3]]);
    }

    #[test]
    fn from_communities_checks_cover() {
        assert!(Partition::from_communities(3, &[vec![0, 1], vec![2]]).is_ok());
        assert!(matches!(
            Partition::from_communities(3, &[vec![0, 1]]),
            Err(Error::MissingVertices(_))
        ));
        assert!(Partition::from_communities(3, &[vec![0, 1], vec![1, 2]]).is_err());
    }

    #[test]
    fn cover_requires_membership() {
        assert!(Cover::new(vec![vec![0], vec![]]).is_err());
        let c = Cover::from_communities(3, &[vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(c.memberships(1), &[0, 1]);
        assert_eq!(c.overlapping_vertices(), 1);
        assert!(!c.is_partition());
    }

    #[test]
    fn fuzzy_rows_must_sum_to_one() {
        assert!(FuzzyAssignment::new(vec![vec![(0, 0.5), (1, 0.4)]]).is_err());
        let f = FuzzyAssignment::new(vec![vec![(0, 0.25), (1, 0.75)], vec![(0, 1.0)]]).unwrap();
        assert_eq!(f.argmax().labels(), &[1, 0]);
    }

    #[test]
    fn partition_round_trip_and_relabel() {
        let symbols = SymbolTable::from_tokens(["a", "b", "c"]);
        let p = Partition::new(vec![5, 5, 2]);
        let text = format_partition(&p, &symbols);
        let q = RawPartition::parse(&text, Path::new("p")).unwrap().resolve(&symbols).unwrap();
        assert_eq!(q, p.normalized());
    }

    #[test]
    fn partial_partition_file_lists_missing() {
        let symbols = SymbolTable::numeric(3);
        let err = RawPartition::parse("0 a\n1 a\n", Path::new("p"))
            .unwrap()
            .resolve(&symbols)
            .unwrap_err();
        match err {
            Error::MissingVertices(v) => assert_eq!(v, vec!["2".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cover_and_fuzzy_round_trip() {
        let symbols = SymbolTable::numeric(3);
        let c = Cover::from_communities(3, &[vec![0, 1], vec![1, 2]]).unwrap();
        let back = RawCover::parse(&format_cover(&c, &symbols), Path::new("c"))
            .unwrap()
            .resolve(&symbols)
            .unwrap();
        assert_eq!(back, c);
        let f = FuzzyAssignment::new(vec![
            vec![(0, 1.0)],
            vec![(0, 0.3), (1, 0.7)],
            vec![(1, 1.0)],
        ])
        .unwrap();
        let back = RawFuzzy::parse(&format_fuzzy(&f, &symbols), Path::new("f"))
            .unwrap()
            .resolve(&symbols)
            .unwrap();
        assert_eq!(back, f);
    }
}
