//! Finite simple graphs, standard families, Cartesian products and dense
//! Laplacian assembly.
//!
//! Vertices are `0..n` in the API. The edge-list text format uses 1-based
//! labels:
//!
//! ```text
//! # comment
//! n 4
//! 1 2
//! 2 3 0.5
//! ```

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Standard graph families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Complete,
    Path,
    Cycle,
    Hypercube,
}

/// Finite simple undirected graph with positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    /// Sorted, each pair stored once with `i < j`.
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
    /// Dense weight lookup, 0 for non-edges.
    w: Vec<f64>,
}

impl Graph {
    /// Builds an unweighted graph.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let weighted: Vec<_> = edges.iter().map(|&(i, j)| (i, j, 1.0)).collect();
        Self::weighted(n, &weighted)
    }

    pub fn weighted(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(invalid("graph must have at least one vertex"));
        }
        let mut w = vec![0.0; n * n];
        let mut list = Vec::with_capacity(edges.len());
        for &(a, b, weight) in edges {
            if a >= n || b >= n {
                return Err(invalid(format!("edge ({a},{b}) has endpoint outside 0..{n}")));
            }
            if a == b {
                return Err(invalid(format!("self-loop at vertex {a}")));
            }
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(invalid(format!("edge ({a},{b}) has non-positive weight {weight}")));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if w[i * n + j] != 0.0 {
                return Err(invalid(format!("duplicate edge ({i},{j})")));
            }
            w[i * n + j] = weight;
            w[j * n + i] = weight;
            list.push((i, j, weight));
        }
        list.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        Ok(Self {
            n,
            edges: list.iter().map(|&(i, j, _)| (i, j)).collect(),
            weights: list.iter().map(|&(_, _, x)| x).collect(),
            w,
        })
    }

    pub fn standard(family: Family, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(invalid("graph size must be at least 1"));
        }
        match family {
            Family::Complete => {
                let mut e = Vec::new();
                for i in 0..size {
                    for j in i + 1..size {
                        e.push((i, j));
                    }
                }
                Self::new(size, &e)
            }
            Family::Path => {
                let e: Vec<_> = (1..size).map(|i| (i - 1, i)).collect();
                Self::new(size, &e)
            }
            Family::Cycle => {
                if size < 3 {
                    return Err(invalid("cycle needs at least 3 vertices"));
                }
                let e: Vec<_> = (0..size).map(|i| (i, (i + 1) % size)).collect();
                Self::new(size, &e)
            }
            Family::Hypercube => {
                if size > 20 {
                    return Err(invalid("hypercube dimension too large for dense storage"));
                }
                let n = 1usize << size;
                let mut e = Vec::new();
                for v in 0..n {
                    for b in 0..size {
                        let u = v ^ (1 << b);
                        if v < u {
                            e.push((v, u));
                        }
                    }
                }
                Self::new(n, &e)
            }
        }
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::standard(Family::Complete, n)
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::standard(Family::Path, n)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        Self::standard(Family::Cycle, n)
    }

    pub fn hypercube(d: usize) -> Result<Self> {
        Self::standard(Family::Hypercube, d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges with their weights.
    pub fn weighted_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges
            .iter()
            .zip(&self.weights)
            .map(|(&(i, j), &w)| (i, j, w))
    }

    /// Edge weight, 0 for non-edges and the diagonal.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.w[i * self.n + j] != 0.0
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.has_edge(i, j)).count()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.w[i * self.n + j] != 0.0)
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for u in self.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == self.n
    }

    pub fn adjacency(&self) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(self.n, |i, j| self.weight(i, j))
    }

    /// Vertex-induced subgraph; vertex `k` of the result is `vertices[k]`.
    pub fn induced(&self, vertices: &[usize]) -> Result<Self> {
        let mut e = Vec::new();
        for (a, &u) in vertices.iter().enumerate() {
            for (b, &v) in vertices.iter().enumerate().skip(a + 1) {
                if self.has_edge(u, v) {
                    e.push((a, b, self.weight(u, v)));
                }
            }
        }
        Self::weighted(vertices.len(), &e)
    }

    /// Applies the vertex map `old -> perm[old]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(invalid("permutation length does not match vertex count"));
        }
        let e: Vec<_> = self
            .weighted_edges()
            .map(|(i, j, w)| (perm[i], perm[j], w))
            .collect();
        Self::weighted(self.n, &e)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("n {}\n", self.n);
        for (i, j, w) in self.weighted_edges() {
            if w == 1.0 {
                let _ = writeln!(s, "{} {}", i + 1, j + 1);
            } else {
                let _ = writeln!(s, "{} {} {}", i + 1, j + 1, w);
            }
        }
        s
    }

    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_edge_list())?;
        Ok(())
    }
}

impl FromStr for Graph {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut n = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { line: line_no, msg };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let Some(count) = n else {
                if tokens.len() != 2 || tokens[0] != "n" {
                    return Err(parse_err("expected header `n <count>`".into()));
                }
                let c: usize = tokens[1]
                    .parse()
                    .map_err(|_| parse_err(format!("bad vertex count `{}`", tokens[1])))?;
                n = Some(c);
                continue;
            };
            if tokens.len() < 2 || tokens.len() > 3 {
                return Err(parse_err("expected `i j [weight]`".into()));
            }
            let idx_of = |t: &str| -> Result<usize> {
                let v: usize = t.parse().map_err(|_| parse_err(format!("bad vertex `{t}`")))?;
                if v == 0 || v > count {
                    return Err(parse_err(format!("vertex {v} outside 1..{count}")));
                }
                Ok(v - 1)
            };
            let i = idx_of(tokens[0])?;
            let j = idx_of(tokens[1])?;
            let w = match tokens.get(2) {
                Some(t) => t.parse().map_err(|_| parse_err(format!("bad weight `{t}`")))?,
                None => 1.0,
            };
            edges.push((i, j, w));
        }
        let n = n.ok_or(Error::Parse { line: 0, msg: "missing header `n <count>`".into() })?;
        Graph::weighted(n, &edges)
    }
}

/// Cartesian product `g □ h`. Vertex `(u, v)` maps to `u * h.n() + v`.
pub fn cartesian_product(g: &Graph, h: &Graph) -> Graph {
    let (ng, nh) = (g.n(), h.n());
    let mut e = Vec::with_capacity(g.edge_count() * nh + h.edge_count() * ng);
    for (u1, u2, w) in g.weighted_edges() {
        for v in 0..nh {
            e.push((u1 * nh + v, u2 * nh + v, w));
        }
    }
    for u in 0..ng {
        for (v1, v2, w) in h.weighted_edges() {
            e.push((u * nh + v1, u * nh + v2, w));
        }
    }
    Graph::weighted(ng * nh, &e).expect("product of valid graphs is valid")
}

/// Dense symmetric matrix, assembled from its upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    /// Evaluates `f` on `i <= j` only and mirrors.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self(m)
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// `D - M` with `D` the diagonal of row sums of the off-diagonal part.
    /// Off-diagonal entries may have either sign.
    pub fn formal_laplacian(&self) -> SymmetricMatrix {
        let n = self.n();
        let row: Vec<f64> = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).map(|j| self.get(i, j)).sum())
            .collect();
        SymmetricMatrix::from_fn(n, |i, j| if i == j { row[i] } else { -self.get(i, j) })
    }

    /// `x^T M x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let n = self.n();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += x[i] * self.get(i, j) * x[j];
            }
        }
        s
    }

    /// `sum_{i<j} M_ij (x_i - x_j)^2`, the pair form that equals
    /// `x^T L(M) x`.
    pub fn pair_form(&self, x: &[f64]) -> f64 {
        let n = self.n();
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let d = x[i] - x[j];
                s += self.get(i, j) * d * d;
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n() {
            let row: Vec<String> = (0..self.n()).map(|j| format!("{:e}", self.get(i, j))).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Laplacian `D - M` of a nonnegative symmetric matrix with zero diagonal.
pub fn laplacian(m: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let n = m.n();
    for i in 0..n {
        if m.get(i, i) != 0.0 {
            return Err(invalid(format!("diagonal entry ({i},{i}) is nonzero")));
        }
        for j in i + 1..n {
            if m.get(i, j) < 0.0 {
                return Err(invalid(format!("negative off-diagonal entry at ({i},{j})")));
            }
        }
    }
    Ok(m.formal_laplacian())
}
