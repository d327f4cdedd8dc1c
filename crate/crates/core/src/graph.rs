//! Undirected simple graphs, vertex orderings and shortest-path primitives.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed::rng_from;

/// Bidirectional mapping between external vertex names and dense ids `0..n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl SymbolTable {
    /// Names `"0"`, `"1"`, ..., `"n-1"`.
    pub fn numeric(n: usize) -> Self {
        Self::from_ordered((0..n).map(|i| i.to_string()).collect())
    }

    fn from_ordered(names: Vec<String>) -> Self {
        let index = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        SymbolTable { names, index }
    }

    /// Builds a table from raw tokens.
    ///
    /// If every token parses as a non-negative integer the ids follow numeric
    /// order, so files written with dense integer ids round-trip to the same
    /// ids. Otherwise ids follow order of first appearance.
    pub fn from_tokens<'a, I>(tokens: I) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut seen: HashMap<&str, ()> = HashMap::new();
        let mut order: Vec<&str> = Vec::new();
        for t in tokens {
            if seen.insert(t, ()).is_none() {
                order.push(t);
            }
        }
        let numeric: Option<Vec<u64>> = order.iter().map(|t| t.parse::<u64>().ok()).collect();
        match numeric {
            Some(mut values) => {
                values.sort_unstable();
                values.dedup();
                if values.len() == order.len() {
                    Self::from_ordered(values.into_iter().map(|v| v.to_string()).collect())
                } else {
                    // "01" and "1" parse to the same value; keep them distinct.
                    Self::from_ordered(order.into_iter().map(str::to_owned).collect())
                }
            }
            None => Self::from_ordered(order.into_iter().map(str::to_owned).collect()),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Restriction of the table to `ids`, renumbered in the given order.
    pub fn subset(&self, ids: &[usize]) -> Self {
        Self::from_ordered(ids.iter().map(|&i| self.names[i].clone()).collect())
    }
}

/// Counters collected while reading an edge list.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

/// Undirected simple graph with optional non-negative edge weights.
///
/// Adjacency lists are sorted by neighbour id and kept symmetric.
#[derive(Clone, Debug)]
pub struct Graph {
    neighbors: Vec<Vec<usize>>,
    weights: Vec<Vec<f64>>,
    weighted: bool,
    edge_count: usize,
    total_weight: f64,
    symbols: SymbolTable,
}

impl Graph {
    /// Unweighted graph on `n` vertices. Self-loops and duplicate pairs are
    /// silently dropped.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let (g, _) = Self::build(n, edges.into_iter().map(|(u, v)| (u, v, 1.0)), false)?;
        Ok(g)
    }

    /// Weighted graph on `n` vertices. For duplicate pairs the first weight wins.
    pub fn from_weighted_edges<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let (g, _) = Self::build(n, edges, true)?;
        Ok(g)
    }

    fn build<I>(n: usize, edges: I, weighted: bool) -> Result<(Graph, LoadReport)>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut report = LoadReport::default();
        let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
        for (u, v, w) in edges {
            if u >= n {
                return Err(Error::VertexOutOfRange(u));
            }
            if v >= n {
                return Err(Error::VertexOutOfRange(v));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::invalid(format!("edge ({u},{v}) has weight {w}")));
            }
            if u == v {
                report.self_loops_dropped += 1;
                continue;
            }
            pairs.push((u.min(v), u.max(v), w));
        }
        // stable sort keeps the first occurrence of each pair in front
        pairs.sort_by_key(|&(u, v, _)| (u, v));
        let before = pairs.len();
        pairs.dedup_by_key(|&mut (u, v, _)| (u, v));
        report.duplicates_dropped = before - pairs.len();

        let mut neighbors = vec![Vec::new(); n];
        let mut weights = vec![Vec::new(); n];
        let mut total_weight = 0.0;
        for &(u, v, w) in &pairs {
            neighbors[u].push(v);
            weights[u].push(w);
            neighbors[v].push(u);
            weights[v].push(w);
            total_weight += w;
        }
        for v in 0..n {
            if !neighbors[v].windows(2).all(|p| p[0] < p[1]) {
                let mut zipped: Vec<(usize, f64)> = neighbors[v]
                    .iter()
                    .copied()
                    .zip(weights[v].iter().copied())
                    .collect();
                zipped.sort_by_key(|&(u, _)| u);
                neighbors[v] = zipped.iter().map(|&(u, _)| u).collect();
                weights[v] = zipped.iter().map(|&(_, w)| w).collect();
            }
        }
        let g = Graph {
            neighbors,
            weights,
            weighted,
            edge_count: pairs.len(),
            total_weight,
            symbols: SymbolTable::numeric(n),
        };
        Ok((g, report))
    }

    /// Replaces the vertex names. The table must have exactly `n` entries.
    pub fn with_symbols(mut self, symbols: SymbolTable) -> Result<Graph> {
        if symbols.len() != self.n() {
            return Err(Error::SizeMismatch {
                expected: self.n(),
                found: symbols.len(),
            });
        }
        self.symbols = symbols;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn m(&self) -> usize {
        self.edge_count
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    /// Sum of edge weights (equals `m` for unweighted graphs).
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn edge_weights(&self, v: usize) -> &[f64] {
        &self.weights[v]
    }

    /// `(neighbour, weight)` pairs of `v`.
    pub fn weighted_neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.neighbors[v]
            .iter()
            .copied()
            .zip(self.weights[v].iter().copied())
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// Weighted degree.
    pub fn strength(&self, v: usize) -> f64 {
        self.weights[v].iter().sum()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.neighbors[u]
            .binary_search(&v)
            .ok()
            .map(|i| self.weights[u][i])
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.weighted_neighbors(u)
                .filter(move |&(v, _)| u < v)
                .map(move |(v, w)| (u, v, w))
        })
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn average_degree(&self) -> f64 {
        2.0 * self.m() as f64 / self.n() as f64
    }
}

/// Parses edge-list text. Lines are `u v [w]`; `#` starts a comment line; a
/// line with a single token declares an isolated vertex.
pub fn parse_edge_list(text: &str, origin: &Path) -> Result<(Graph, LoadReport)> {
    let mut rows: Vec<(usize, Vec<&str>)> = Vec::new();
    let mut weighted = false;
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks.len() > 3 {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                message: format!("expected 'u v [w]', found {} tokens", toks.len()),
            });
        }
        if toks.len() == 3 {
            weighted = true;
        }
        rows.push((i + 1, toks));
    }
    let symbols = SymbolTable::from_tokens(rows.iter().flat_map(|(_, t)| t.iter().take(2).copied()));
    if symbols.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut edges = Vec::with_capacity(rows.len());
    for (line, toks) in &rows {
        if toks.len() == 1 {
            continue;
        }
        let u = symbols.get(toks[0]).expect("token indexed");
        let v = symbols.get(toks[1]).expect("token indexed");
        let w = match toks.get(2) {
            Some(t) => t.parse::<f64>().ok().filter(|w| w.is_finite() && *w >= 0.0).ok_or_else(|| Error::Parse {
                path: origin.to_path_buf(),
                line: *line,
                message: format!("invalid weight '{t}'"),
            })?,
            None => 1.0,
        };
        edges.push((u, v, w));
    }
    let (g, report) = Graph::build(symbols.len(), edges, weighted)?;
    if report.self_loops_dropped > 0 {
        log::warn!(
            "{}: dropped {} self-loop(s)",
            origin.display(),
            report.self_loops_dropped
        );
    }
    Ok((g.with_symbols(symbols)?, report))
}

/// Reads an edge-list file, returning the graph and what was dropped.
pub fn load_edge_list_with_report(path: impl AsRef<Path>) -> Result<(Graph, LoadReport)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, path)
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    load_edge_list_with_report(path).map(|(g, _)| g)
}

/// Text form of [`save_edge_list`].
pub fn format_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    let names = g.symbols();
    for (u, v, w) in g.edges() {
        if g.is_weighted() {
            let _ = writeln!(out, "{} {} {}", names.name(u), names.name(v), w);
        } else {
            let _ = writeln!(out, "{} {}", names.name(u), names.name(v));
        }
    }
    for v in 0..g.n() {
        if g.degree(v) == 0 {
            let _ = writeln!(out, "{}", names.name(v));
        }
    }
    out
}

pub fn save_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_edge_list(g)).map_err(|e| Error::io(path, e))
}

/// A permutation of `0..n` giving the order in which a detector sweeps vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexOrdering {
    perm: Vec<usize>,
    seed: u64,
}

impl VertexOrdering {
    pub fn identity(n: usize) -> Self {
        VertexOrdering {
            perm: (0..n).collect(),
            seed: 0,
        }
    }

    /// Wraps an explicit permutation, rejecting anything that is not a bijection.
    pub fn from_perm(perm: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &v in &perm {
            if v >= perm.len() || seen[v] {
                return Err(Error::invalid("ordering is not a permutation"));
            }
            seen[v] = true;
        }
        Ok(VertexOrdering { perm, seed: 0 })
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// `rank[v]` is the position of `v` in the ordering.
    pub fn ranks(&self) -> Vec<usize> {
        let mut rank = vec![0; self.perm.len()];
        for (pos, &v) in self.perm.iter().enumerate() {
            rank[v] = pos;
        }
        rank
    }
}

/// Uniformly random permutation of `0..n`, fully determined by `(n, seed)`.
pub fn random_ordering(n: usize, seed: u64) -> VertexOrdering {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = rng_from(seed, &[0x0bde_0001]);
    perm.shuffle(&mut rng);
    VertexOrdering { perm, seed }
}

/// Hop distances from `source`; `None` marks unreachable vertices.
pub fn bfs_distances(g: &Graph, source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued vertices are reached");
        for &v in g.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Subgraph induced by `vertices`. Returns the subgraph (vertex `i` of the
/// subgraph is `vertices[i]` after sorting and deduplication) and that id map.
pub fn induced_subgraph(g: &Graph, vertices: &[usize]) -> Result<(Graph, Vec<usize>)> {
    if vertices.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    let mut ids: Vec<usize> = vertices.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if let Some(&bad) = ids.iter().find(|&&v| v >= g.n()) {
        return Err(Error::VertexOutOfRange(bad));
    }
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in ids.iter().enumerate() {
        local[v] = i;
    }
    let mut edges = Vec::new();
    for (i, &u) in ids.iter().enumerate() {
        for (v, w) in g.weighted_neighbors(u) {
            let j = local[v];
            if j != usize::MAX && i < j {
                edges.push((i, j, w));
            }
        }
    }
    let (mut sub, _) = Graph::build(ids.len(), edges, g.is_weighted())?;
    sub.symbols = g.symbols().subset(&ids);
    Ok((sub, ids))
}
