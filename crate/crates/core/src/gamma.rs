//! Gamma calculus at a point: `Gamma_1`, three expressions of `Gamma_2`,
//! the coefficient matrix `a_ij`, and single-edge terms.
//!
//! Conventions:
//!
//! * `Gamma_1(f) = sum_{ij in E} theta_ij (f_i - f_j)^2`, each edge once. This
//!   is the speed of the geodesic flow below and the normalisation under which
//!   `L(A) alpha = kappa L(Theta) alpha` yields the two-point curvatures.
//! * `Gamma_2` sums run over ordered triples `(i, j, k)`, with `theta`, `eta`
//!   and their partials vanishing off the edge set and on the diagonal.
//! * `eta_ij = theta_ij (dE/dp_i - dE/dp_j)` and `h = 0`.
//! * `d eta_ij / d p_i` keeps only the `p_i` dependence through `theta_ij`,
//!   `dE/dp_i` and `dE/dp_j`. This equals the second time derivative of `E`
//!   along geodesics when `d^2E/dp_k dp_i = d^2E/dp_k dp_j` for every third
//!   vertex `k`, which covers linear and entropy energies.

use serde::Serialize;

use crate::energies::Energy;
use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, SymmetricMatrix};
use crate::means::MeanFunction;

/// Which closed form of `Gamma_2` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gamma2Formula {
    /// `1/2 sum (f_i-f_j)^2 dθ_ij/dp_i η_ki + sum (f_i-f_j)(f_i-f_k) dη_ij/dp_i θ_ki`.
    F1,
    /// Mixed form with `1/2 dθ_ki/dp_k η_jk`.
    F2,
    /// Mixed form with `1/2 dθ_jk/dp_j η_ij` in place of the `F2` term.
    F2Alt,
    /// Symmetric form `1/2 sum (f_i-f_j)^2 (...)`.
    F3,
}

/// Cached edge quantities of a (graph, mean, energy) triple at `p`.
#[derive(Debug, Clone)]
pub struct GammaContext<'g> {
    graph: &'g Graph,
    n: usize,
    p: Vec<f64>,
    grad: Vec<f64>,
    /// `w_ij theta(p_i, p_j)`.
    th: Vec<f64>,
    /// `d theta_ij / d p_i`; `d theta_ij / d p_j` is `dth[j][i]`.
    dth: Vec<f64>,
    eta: Vec<f64>,
    /// `d eta_ij / d p_i`; `d eta_ij / d p_j = -deta[j][i]`.
    deta: Vec<f64>,
}

impl<'g> GammaContext<'g> {
    /// `p` may be any positive vector; curvature routines additionally require
    /// it to lie on the simplex.
    pub fn new(graph: &'g Graph, mean: &MeanFunction, energy: &Energy, p: &[f64]) -> Result<Self> {
        let n = graph.n();
        if p.len() != n {
            return Err(invalid(format!("point has {} coordinates, graph has {n} vertices", p.len())));
        }
        if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::Domain(format!("coordinate {x} is not strictly positive")));
        }
        let grad = energy.gradient(p)?;
        let hess = energy.hessian_dense(p)?;
        let mut ctx = GammaContext {
            graph,
            n,
            p: p.to_vec(),
            grad,
            th: vec![0.0; n * n],
            dth: vec![0.0; n * n],
            eta: vec![0.0; n * n],
            deta: vec![0.0; n * n],
        };
        for (i, j, w) in graph.weighted_edges() {
            let (t, ds, dt) = mean.jet(p[i], p[j]);
            if !(t.is_finite() && ds.is_finite() && dt.is_finite()) {
                return Err(Error::Domain(format!(
                    "mean '{}' is not finite at ({}, {})",
                    mean.name(),
                    p[i],
                    p[j]
                )));
            }
            let (t, ds, dt) = (w * t, w * ds, w * dt);
            let gd = ctx.grad[i] - ctx.grad[j];
            let (ij, ji) = (i * n + j, j * n + i);
            ctx.th[ij] = t;
            ctx.th[ji] = t;
            ctx.dth[ij] = ds;
            ctx.dth[ji] = dt;
            ctx.eta[ij] = t * gd;
            ctx.eta[ji] = -t * gd;
            ctx.deta[ij] = ds * gd + t * (hess[i * n + i] - hess[j * n + i]);
            ctx.deta[ji] = -dt * gd + t * (hess[j * n + j] - hess[i * n + j]);
        }
        Ok(ctx)
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// `dE/dp` at `p`.
    pub fn gradient(&self) -> &[f64] {
        &self.grad
    }

    pub fn theta(&self, i: usize, j: usize) -> f64 {
        self.th[i * self.n + j]
    }

    /// `d theta_ij / d p_i`.
    pub fn dtheta(&self, i: usize, j: usize) -> f64 {
        self.dth[i * self.n + j]
    }

    pub fn eta(&self, i: usize, j: usize) -> f64 {
        self.eta[i * self.n + j]
    }

    /// `d eta_ij / d p_i`.
    pub fn deta(&self, i: usize, j: usize) -> f64 {
        self.deta[i * self.n + j]
    }

    /// Smallest edge weight `theta_ij`, or `+inf` without edges.
    pub fn min_theta(&self) -> f64 {
        self.graph
            .edges()
            .iter()
            .map(|&(i, j)| self.theta(i, j))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn theta_matrix(&self) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(self.n, |i, j| self.theta(i, j))
    }

    fn check(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n {
            return Err(invalid(format!("potential has {} entries, expected {}", f.len(), self.n)));
        }
        Ok(())
    }

    pub fn gamma1(&self, f: &[f64]) -> Result<f64> {
        self.check(f)?;
        Ok(self
            .graph
            .edges()
            .iter()
            .map(|&(i, j)| self.theta(i, j) * (f[i] - f[j]).powi(2))
            .sum())
    }

    /// Summand of the symmetric form, `T_ijk`.
    fn t(&self, i: usize, j: usize, k: usize) -> f64 {
        self.dtheta(i, j) * self.eta(k, i) + self.deta(i, j) * self.theta(k, i) + self.deta(j, k) * self.theta(i, j)
            - self.deta(k, i) * self.theta(j, k)
    }

    pub fn gamma2(&self, f: &[f64], formula: Gamma2Formula) -> Result<f64> {
        self.check(f)?;
        let n = self.n;
        let mut s = 0.0;
        match formula {
            Gamma2Formula::F1 => {
                for i in 0..n {
                    for j in 0..n {
                        let dij = f[i] - f[j];
                        for k in 0..n {
                            let dik = f[i] - f[k];
                            s += 0.5 * dij * dij * self.dtheta(i, j) * self.eta(k, i)
                                + dij * dik * self.deta(i, j) * self.theta(k, i);
                        }
                    }
                }
            }
            Gamma2Formula::F2 | Gamma2Formula::F2Alt => {
                for i in 0..n {
                    for j in 0..n {
                        let dij = f[i] - f[j];
                        for k in 0..n {
                            let dik = f[i] - f[k];
                            let middle = if formula == Gamma2Formula::F2 {
                                self.dtheta(k, i) * self.eta(j, k)
                            } else {
                                self.dtheta(j, k) * self.eta(i, j)
                            };
                            s += dij
                                * dik
                                * (0.5 * self.dtheta(i, j) * self.eta(k, i)
                                    + 0.5 * middle
                                    + self.deta(i, j) * self.theta(k, i));
                        }
                    }
                }
            }
            Gamma2Formula::F3 => {
                for i in 0..n {
                    for j in 0..n {
                        let dij = f[i] - f[j];
                        if dij == 0.0 {
                            continue;
                        }
                        let mut row = 0.0;
                        for k in 0..n {
                            row += self.t(i, j, k);
                        }
                        s += 0.5 * dij * dij * row;
                    }
                }
            }
        }
        Ok(s)
    }

    /// `a_ij` with `Gamma_2(f) = sum_{i<j} a_ij (f_i - f_j)^2`, assembled from
    /// the eight-term expression.
    pub fn gamma2_matrix(&self) -> SymmetricMatrix {
        let n = self.n;
        SymmetricMatrix::from_fn(n, |i, j| {
            if i == j {
                return 0.0;
            }
            let mut s = 0.0;
            for k in 0..n {
                s += self.dtheta(i, j) * self.eta(k, i) + self.deta(i, j) * self.theta(k, i)
                    + self.deta(j, k) * self.theta(i, j)
                    - self.deta(k, i) * self.theta(j, k)
                    - self.dtheta(j, i) * self.eta(j, k)
                    - (-self.deta(j, i)) * self.theta(j, k)
                    - (-self.deta(i, k)) * self.theta(i, j)
                    + (-self.deta(k, j)) * self.theta(k, i);
            }
            0.5 * s
        })
    }

    /// Single-edge term
    /// `(f_i-f_j)^2 [ -1/2 (dθ_ij/dp_i - dθ_ij/dp_j) η_ij + (dη_ij/dp_i - dη_ij/dp_j) θ_ij ]`.
    pub fn gamma2_edge(&self, i: usize, j: usize, f: &[f64]) -> Result<f64> {
        self.check(f)?;
        if i >= self.n || j >= self.n || !self.graph.has_edge(i, j) {
            return Err(invalid(format!("({i},{j}) is not an edge")));
        }
        let d = f[i] - f[j];
        let bracket = -0.5 * (self.dtheta(i, j) - self.dtheta(j, i)) * self.eta(i, j)
            + (self.deta(i, j) + self.deta(j, i)) * self.theta(i, j);
        Ok(d * d * bracket)
    }

    /// Closed form for `E = sum V_i p_i`, from `theta` and its partials only.
    pub fn gamma2_linear(&self, v: &[f64], f: &[f64]) -> Result<f64> {
        self.check(f)?;
        self.check(v)?;
        Ok(self.specialized(f, |i, j, k| {
            (self.dtheta(i, j) * self.theta(k, i) - self.dtheta(j, k) * self.theta(i, j)) * (v[k] - v[j])
                - self.dtheta(k, i) * self.theta(j, k) * (v[k] - v[i])
        }))
    }

    /// Closed form for `E = 1/2 sum W_ij p_i p_j`.
    pub fn gamma2_interaction(&self, w: &[Vec<f64>], f: &[f64]) -> Result<f64> {
        self.check(f)?;
        let wp: Vec<f64> = w.iter().map(|r| r.iter().zip(&self.p).map(|(a, b)| a * b).sum()).collect();
        Ok(self.specialized(f, |i, j, k| {
            (self.dtheta(i, j) * self.theta(k, i) - self.dtheta(j, k) * self.theta(i, j)) * (wp[k] - wp[j])
                - self.dtheta(k, i) * self.theta(j, k) * (wp[k] - wp[i])
                + (w[i][i] - w[i][j]) * self.theta(i, j) * self.theta(k, i)
                + (w[j][j] - w[j][k]) * self.theta(j, k) * self.theta(i, j)
                - (w[k][k] - w[k][i]) * self.theta(k, i) * self.theta(j, k)
        }))
    }

    /// Closed form for `E = sum U(p_i)` given `U'` and `U''` at `p`.
    pub fn gamma2_entropy(&self, du: &[f64], d2u: &[f64], f: &[f64]) -> Result<f64> {
        self.check(f)?;
        Ok(self.specialized(f, |i, j, k| {
            (self.dtheta(i, j) * self.theta(k, i) - self.dtheta(j, k) * self.theta(i, j)) * (du[k] - du[j])
                - self.dtheta(k, i) * self.theta(j, k) * (du[k] - du[i])
                + d2u[i] * self.theta(i, j) * self.theta(k, i)
                + d2u[j] * self.theta(j, k) * self.theta(i, j)
                - d2u[k] * self.theta(k, i) * self.theta(j, k)
        }))
    }

    fn specialized(&self, f: &[f64], term: impl Fn(usize, usize, usize) -> f64) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = f[i] - f[j];
                if d == 0.0 {
                    continue;
                }
                let mut row = 0.0;
                for k in 0..n {
                    row += term(i, j, k);
                }
                s += 0.5 * d * d * row;
            }
        }
        s
    }
}

/// Residuals of the 3-tensor and 2-tensor summation identities.
#[derive(Debug, Clone, Serialize)]
pub struct TensorIdentityReport {
    /// `sum a_ijk (x_i-x_j)(x_i-x_k) = 1/2 sum (a_ijk + a_jki - a_kij)(x_i-x_j)^2`.
    pub ijk_to_ij: (f64, f64),
    /// `sum b_ijk (x_i-x_j)^2 = sum (b_ijk + b_kij)(x_i-x_j)(x_i-x_k)`.
    pub ij_to_ijk: (f64, f64),
    /// `sum s_ij x_i = 1/2 sum s_ij (x_i + x_j)` for symmetric `s`.
    pub symmetric: (f64, f64),
    /// `sum b_ij x_i = 1/2 sum b_ij (x_i - x_j)` for antisymmetric `b`.
    pub antisymmetric: (f64, f64),
    /// Largest `|lhs - rhs| / max(1, |lhs|, |rhs|)`.
    pub worst_relative: f64,
}

/// Evaluates both sides of each identity for dense `n^3` tensors `a`, `b`
/// (row-major, index `(i*n + j)*n + k`). The 2-tensor identities use
/// `s_ij = a_ij0 + a_ji0` and `b_ij = b_ij0 - b_ji0`.
pub fn tensor_identity_check(n: usize, a: &[f64], b: &[f64], x: &[f64]) -> Result<TensorIdentityReport> {
    if a.len() != n * n * n || b.len() != n * n * n || x.len() != n {
        return Err(invalid("tensor_identity_check: inconsistent dimensions"));
    }
    let at = |i: usize, j: usize, k: usize| a[(i * n + j) * n + k];
    let bt = |i: usize, j: usize, k: usize| b[(i * n + j) * n + k];
    let (mut l1, mut r1, mut l2, mut r2) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let dij = x[i] - x[j];
            for k in 0..n {
                let dik = x[i] - x[k];
                l1 += at(i, j, k) * dij * dik;
                r1 += 0.5 * (at(i, j, k) + at(j, k, i) - at(k, i, j)) * dij * dij;
                l2 += bt(i, j, k) * dij * dij;
                r2 += (bt(i, j, k) + bt(k, i, j)) * dij * dik;
            }
        }
    }
    let (mut l3, mut r3, mut l4, mut r4) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let s = at(i, j, 0) + at(j, i, 0);
            let q = bt(i, j, 0) - bt(j, i, 0);
            l3 += s * x[i];
            r3 += 0.5 * s * (x[i] + x[j]);
            l4 += q * x[i];
            r4 += 0.5 * q * (x[i] - x[j]);
        }
    }
    let rel = |(l, r): (f64, f64)| (l - r).abs() / 1f64.max(l.abs()).max(r.abs());
    let pairs = [(l1, r1), (l2, r2), (l3, r3), (l4, r4)];
    let worst_relative = pairs.iter().copied().map(rel).fold(0.0, f64::max);
    Ok(TensorIdentityReport {
        ijk_to_ij: (l1, r1),
        ij_to_ijk: (l2, r2),
        symmetric: (l3, r3),
        antisymmetric: (l4, r4),
        worst_relative,
    })
}
