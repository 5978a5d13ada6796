//! Problem instances, their text formats and exact objective evaluators.
//!
//! File formats are 1-based; everything in memory is 0-based.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::{Error, Result};

/// Largest dimension accepted for densely stored instances (TSP, LOP).
pub const MAX_DENSE_DIMENSION: usize = 5_000;
/// Largest dimension accepted for sparse patterns and networks.
pub const MAX_SPARSE_DIMENSION: usize = 1_000_000;

/// Unordered node pair, stored with the smaller index first.
pub type Edge = (usize, usize);

#[inline]
pub fn edge(a: usize, b: usize) -> Edge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Symmetric, complete, positively weighted graph (a TSP instance).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    coords: Option<Vec<(f64, f64)>>,
    weights: Vec<f64>,
}

/// TSPLIB `nint`.
fn nint(x: f64) -> f64 {
    (x + 0.5).floor()
}

impl WeightedGraph {
    /// Euclidean instance with distances rounded to the nearest integer.
    pub fn from_coords(coords: Vec<(f64, f64)>) -> Result<Self> {
        let n = coords.len();
        if n < 2 {
            return Err(Error::invalid(format!("graph needs at least 2 nodes, got {n}")));
        }
        if n > MAX_DENSE_DIMENSION {
            return Err(Error::invalid(format!(
                "dimension {n} exceeds the limit of {MAX_DENSE_DIMENSION}"
            )));
        }
        if coords.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::invalid("non-finite coordinate"));
        }
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let (dx, dy) = (coords[i].0 - coords[j].0, coords[i].1 - coords[j].1);
                let d = nint((dx * dx + dy * dy).sqrt());
                if !(d > 0.0 && d.is_finite()) {
                    return Err(Error::invalid(format!(
                        "nodes {} and {} are at distance {d}",
                        i + 1,
                        j + 1
                    )));
                }
                weights[i * n + j] = d;
                weights[j * n + i] = d;
            }
        }
        Ok(Self {
            n,
            coords: Some(coords),
            weights,
        })
    }

    /// Graph from a full row-major `n × n` weight matrix; the diagonal is ignored.
    pub fn from_matrix(n: usize, weights: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("graph needs at least 2 nodes, got {n}")));
        }
        if weights.len() != n * n {
            return Err(Error::invalid("weight matrix is not n × n"));
        }
        let mut weights = weights;
        for i in 0..n {
            weights[i * n + i] = 0.0;
            for j in i + 1..n {
                let (a, b) = (weights[i * n + j], weights[j * n + i]);
                if a != b {
                    return Err(Error::invalid(format!("w({i},{j}) != w({j},{i})")));
                }
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::invalid(format!("w({i},{j}) = {a} is not positive")));
                }
            }
        }
        Ok(Self {
            n,
            coords: None,
            weights,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Length of the nearest-neighbor tour starting at `start`, ties to the lower index.
    pub fn nearest_neighbor_tour(&self, start: usize) -> Vec<usize> {
        let mut visited = vec![false; self.n];
        let mut tour = Vec::with_capacity(self.n);
        let mut cur = start;
        visited[cur] = true;
        tour.push(cur);
        for _ in 1..self.n {
            let mut best = usize::MAX;
            for j in 0..self.n {
                if !visited[j] && (best == usize::MAX || self.weight(cur, j) < self.weight(cur, best)) {
                    best = j;
                }
            }
            visited[best] = true;
            tour.push(best);
            cur = best;
        }
        tour
    }

    /// TSPLIB text for a coordinate-backed graph.
    pub fn to_tsplib(&self, name: &str) -> Result<String> {
        let coords = self
            .coords
            .as_ref()
            .ok_or_else(|| Error::Unsupported("graph has no coordinates".into()))?;
        let mut out = String::new();
        let _ = writeln!(out, "NAME: {name}");
        let _ = writeln!(out, "TYPE: TSP");
        let _ = writeln!(out, "DIMENSION: {}", self.n);
        let _ = writeln!(out, "EDGE_WEIGHT_TYPE: EUC_2D");
        let _ = writeln!(out, "NODE_COORD_SECTION");
        for (i, (x, y)) in coords.iter().enumerate() {
            let _ = writeln!(out, "{} {} {}", i + 1, x, y);
        }
        out.push_str("EOF\n");
        Ok(out)
    }
}

/// Off-diagonal nonzero structure of a symmetric matrix (an MBMP instance).
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePattern {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

impl SparsePattern {
    /// Builds a pattern; pairs are unordered, diagonal pairs and duplicates are dropped.
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n > MAX_SPARSE_DIMENSION {
            return Err(Error::invalid(format!(
                "dimension {n} exceeds the limit of {MAX_SPARSE_DIMENSION}"
            )));
        }
        let mut set = BTreeSet::new();
        for (a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::invalid(format!("pair ({a},{b}) out of range for n={n}")));
            }
            if a != b {
                set.insert(edge(a, b));
            }
        }
        let edges: Vec<Edge> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            n,
            edges,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Unordered nonzero pairs, sorted.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn to_matrix_market(&self) -> String {
        let mut out = String::from("%%MatrixMarket matrix coordinate pattern symmetric\n");
        let _ = writeln!(out, "{} {} {}", self.n, self.n, self.edges.len());
        for &(a, b) in &self.edges {
            // lower triangle, row >= column
            let _ = writeln!(out, "{} {}", b + 1, a + 1);
        }
        out
    }
}

/// Dense square matrix for the linear ordering problem; the diagonal is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct LopMatrix {
    n: usize,
    m: Vec<f64>,
}

impl LopMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("LOP matrix must have n >= 1"));
        }
        if n > MAX_DENSE_DIMENSION {
            return Err(Error::invalid(format!(
                "dimension {n} exceeds the limit of {MAX_DENSE_DIMENSION}"
            )));
        }
        if entries.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite LOP entry"));
        }
        Ok(Self { n, m: entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i * self.n + j]
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[j * n + i] = self.m[i * n + j];
            }
        }
        Self { n, m }
    }

    /// Sum of all off-diagonal entries.
    pub fn off_diagonal_sum(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self.get(i, j);
                }
            }
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format!("{}", self.get(i, j))).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// A permutation together with its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub perm: Vec<usize>,
    pub cost: f64,
}

/// Checks that `perm` is a bijection on `0..n`.
pub fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::NotPermutation(n));
    }
    let mut seen = vec![false; n];
    for &v in perm {
        if v >= n || seen[v] {
            return Err(Error::NotPermutation(n));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Closed tour length of the visiting order `perm`.
pub fn tour_length(g: &WeightedGraph, perm: &[usize]) -> Result<f64> {
    check_permutation(perm, g.n())?;
    let mut total = 0.0;
    for k in 0..perm.len() {
        total += g.weight(perm[k], perm[(k + 1) % perm.len()]);
    }
    Ok(total)
}

/// Bandwidth of the pattern under `labels`, where `labels[v]` is the new index of `v`.
pub fn bandwidth(p: &SparsePattern, labels: &[usize]) -> Result<usize> {
    check_permutation(labels, p.n())?;
    Ok(p.edges()
        .iter()
        .map(|&(a, b)| labels[a].abs_diff(labels[b]))
        .max()
        .unwrap_or(0))
}

/// Sum of `m[u][v]` over every pair where `u` precedes `v` in `order`.
pub fn lop_value(m: &LopMatrix, order: &[usize]) -> Result<f64> {
    check_permutation(order, m.n())?;
    let mut total = 0.0;
    for (k, &u) in order.iter().enumerate() {
        for &v in &order[k + 1..] {
            total += m.get(u, v);
        }
    }
    Ok(total)
}

/// Inverse permutation: position of each element.
pub fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (pos, &v) in perm.iter().enumerate() {
        inv[v] = pos;
    }
    inv
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} `{tok}`")))
}

/// Parses the TSPLIB subset: `TYPE: TSP`, `EDGE_WEIGHT_TYPE: EUC_2D`, `NODE_COORD_SECTION`.
pub fn parse_tsp(text: &str) -> Result<WeightedGraph> {
    let mut dimension: Option<usize> = None;
    let mut weight_type: Option<String> = None;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut in_section = false;

    for (no, line) in lines.by_ref() {
        if line.is_empty() {
            continue;
        }
        if line.trim_end_matches(':').trim() == "NODE_COORD_SECTION" {
            in_section = true;
            break;
        }
        if line == "EOF" {
            break;
        }
        let (key, value) = line
            .split_once(':')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Error::parse(no, format!("expected `KEY: value`, got `{line}`")))?;
        match key {
            "NAME" | "COMMENT" | "DISPLAY_DATA_TYPE" => {}
            "TYPE" => {
                if value != "TSP" {
                    return Err(Error::Unsupported(format!("TYPE {value}")));
                }
            }
            "DIMENSION" => dimension = Some(parse_num(value, no, "dimension")?),
            "EDGE_WEIGHT_TYPE" => {
                if value != "EUC_2D" {
                    return Err(Error::Unsupported(format!("EDGE_WEIGHT_TYPE {value}")));
                }
                weight_type = Some(value.to_string());
            }
            other => return Err(Error::Unsupported(format!("keyword {other}"))),
        }
    }

    let n = dimension.ok_or_else(|| Error::parse(0, "missing DIMENSION"))?;
    if weight_type.is_none() {
        return Err(Error::parse(0, "missing EDGE_WEIGHT_TYPE"));
    }
    if !in_section {
        return Err(Error::parse(0, "missing NODE_COORD_SECTION"));
    }
    if n < 2 {
        return Err(Error::parse(0, format!("DIMENSION {n} is below 2")));
    }
    if n > MAX_DENSE_DIMENSION {
        return Err(Error::parse(
            0,
            format!("DIMENSION {n} exceeds the limit of {MAX_DENSE_DIMENSION}"),
        ));
    }

    let mut coords: Vec<Option<(f64, f64)>> = vec![None; n];
    let mut count = 0usize;
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::parse(no, "coordinate line must be `<idx> <x> <y>`"));
        }
        let idx: usize = parse_num(toks[0], no, "node index")?;
        let x: f64 = parse_num(toks[1], no, "coordinate")?;
        let y: f64 = parse_num(toks[2], no, "coordinate")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::parse(no, "non-finite coordinate"));
        }
        count += 1;
        if count > n {
            return Err(Error::parse(no, format!("more than DIMENSION={n} coordinates")));
        }
        if idx == 0 || idx > n {
            return Err(Error::parse(no, format!("node index {idx} out of range 1..={n}")));
        }
        if coords[idx - 1].replace((x, y)).is_some() {
            return Err(Error::parse(no, format!("duplicate node index {idx}")));
        }
    }
    if count != n {
        return Err(Error::parse(
            0,
            format!("DIMENSION is {n} but {count} coordinates were given"),
        ));
    }
    let coords = coords.into_iter().map(|c| c.expect("all indices seen")).collect();
    WeightedGraph::from_coords(coords)
}

/// Parses MatrixMarket `coordinate pattern symmetric` files.
pub fn parse_matrix(text: &str) -> Result<SparsePattern> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let banner: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if banner != ["%%matrixmarket", "matrix", "coordinate", "pattern", "symmetric"] {
        return Err(Error::parse(
            1,
            "expected `%%MatrixMarket matrix coordinate pattern symmetric`",
        ));
    }

    let mut content = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (no, size) = content
        .next()
        .ok_or_else(|| Error::parse(0, "missing size line"))?;
    let toks: Vec<&str> = size.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(Error::parse(no, "size line must be `<n> <n> <nnz>`"));
    }
    let rows: usize = parse_num(toks[0], no, "row count")?;
    let cols: usize = parse_num(toks[1], no, "column count")?;
    let nnz: usize = parse_num(toks[2], no, "entry count")?;
    if rows != cols {
        return Err(Error::parse(no, format!("matrix is {rows}×{cols}, not square")));
    }
    if rows > MAX_SPARSE_DIMENSION {
        return Err(Error::parse(
            no,
            format!("dimension {rows} exceeds the limit of {MAX_SPARSE_DIMENSION}"),
        ));
    }

    let mut pairs = Vec::new();
    for (no, line) in content {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::parse(no, "entry line must be `<i> <j>`"));
        }
        let i: usize = parse_num(toks[0], no, "row index")?;
        let j: usize = parse_num(toks[1], no, "column index")?;
        if i == 0 || j == 0 || i > rows || j > rows {
            return Err(Error::parse(no, format!("entry ({i},{j}) out of range 1..={rows}")));
        }
        pairs.push((i - 1, j - 1));
        if pairs.len() > nnz {
            return Err(Error::parse(no, format!("more than the declared {nnz} entries")));
        }
    }
    if pairs.len() != nnz {
        return Err(Error::parse(
            0,
            format!("declared {nnz} entries but found {}", pairs.len()),
        ));
    }
    SparsePattern::new(rows, pairs)
}

/// Parses a LOP matrix: `n` followed by `n*n` whitespace-separated numbers, row-major.
pub fn parse_lop(text: &str) -> Result<LopMatrix> {
    let mut toks = text
        .lines()
        .enumerate()
        .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)));
    let (no, first) = toks.next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let n: usize = parse_num(first, no, "dimension")?;
    if n == 0 || n > MAX_DENSE_DIMENSION {
        return Err(Error::parse(no, format!("dimension {n} out of range")));
    }
    let mut entries = Vec::new();
    for (no, t) in toks {
        if entries.len() == n * n {
            return Err(Error::parse(no, "trailing data after the matrix"));
        }
        let v: f64 = parse_num(t, no, "entry")?;
        if !v.is_finite() {
            return Err(Error::parse(no, "non-finite entry"));
        }
        entries.push(v);
    }
    if entries.len() != n * n {
        return Err(Error::parse(
            0,
            format!("expected {} entries, found {}", n * n, entries.len()),
        ));
    }
    LopMatrix::new(n, entries)
}
