//! Local curvature as a relative eigenvalue problem, global bounds by interior
//! search, and constant-curvature detection.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::energies::Energy;
use crate::error::{invalid, Error, Result};
use crate::gamma::GammaContext;
use crate::graph::Graph;
use crate::means::MeanFunction;
use crate::search::{minimize_on_simplex, SearchParams};
use crate::simplex::{halton_points, random_points, BOUNDARY_MARGIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionFlag {
    Ok,
    NearSingular,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    pub kappa: f64,
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub p: Vec<f64>,
    pub kappa_local: f64,
    /// Unit-norm, orthogonal to the constant vector.
    pub eigenvector: Vec<f64>,
    /// All `n - 1` pairs, ascending.
    pub pairs: Vec<EigenPair>,
    pub condition: ConditionFlag,
}

/// Orthonormal basis of the complement of the constant vector: columns
/// `2..n` of the Householder reflector sending `e_1` to `1/sqrt(n)`.
pub fn complement_basis(n: usize) -> DMatrix<f64> {
    let u = 1.0 / (n as f64).sqrt();
    let mut v = DVector::from_element(n, -u);
    v[0] += 1.0;
    let vv = v.dot(&v);
    let mut q = DMatrix::zeros(n, n - 1);
    for c in 1..n {
        for r in 0..n {
            let e = if r == c { 1.0 } else { 0.0 };
            q[(r, c - 1)] = e - 2.0 * v[r] * v[c] / vv;
        }
    }
    q
}

/// Solves `L(A) alpha = kappa L(Theta) alpha` on the complement of the
/// constant vector and returns the pairs in ascending order.
pub fn relative_eigenpairs(la: &DMatrix<f64>, lt: &DMatrix<f64>) -> Result<(Vec<EigenPair>, ConditionFlag)> {
    let n = la.nrows();
    if n < 2 {
        return Err(invalid("relative eigenproblem needs at least two vertices"));
    }
    let q = complement_basis(n);
    let a = q.transpose() * la * &q;
    let b = q.transpose() * lt * &q;
    let b = (&b + b.transpose()) * 0.5;
    let chol = nalgebra::Cholesky::new(b.clone()).ok_or(Error::Disconnected)?;
    let l = chol.l();
    let diag_min = (0..n - 1).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min);
    let diag_max = (0..n - 1).map(|i| l[(i, i)]).fold(0.0, f64::max);
    let condition = if (diag_min / diag_max).powi(2) < 1e-12 {
        ConditionFlag::NearSingular
    } else {
        ConditionFlag::Ok
    };
    // C = L^{-1} A L^{-T}
    let linv_a = l
        .solve_lower_triangular(&a)
        .ok_or_else(|| Error::Eigen("triangular solve failed".into()))?;
    let c = l
        .solve_lower_triangular(&linv_a.transpose())
        .ok_or_else(|| Error::Eigen("triangular solve failed".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigen("non-finite reduced matrix".into()));
    }
    let eig = SymmetricEigen::new(c);
    let lt_tr = l.transpose();
    let mut pairs: Vec<EigenPair> = (0..n - 1)
        .map(|k| {
            let y = eig.eigenvectors.column(k).into_owned();
            let z = lt_tr.solve_upper_triangular(&y).unwrap_or(y);
            let alpha = &q * z;
            let norm = alpha.norm();
            let mut alpha: Vec<f64> = alpha.iter().map(|x| x / norm).collect();
            let pivot = alpha
                .iter()
                .copied()
                .enumerate()
                .fold((0, 0.0f64), |m, (i, x)| if x.abs() > m.1.abs() + 1e-12 { (i, x) } else { m });
            if pivot.1 < 0.0 {
                alpha.iter_mut().for_each(|x| *x = -*x);
            }
            EigenPair { kappa: eig.eigenvalues[k], alpha }
        })
        .collect();
    pairs.sort_by(|a, b| a.kappa.total_cmp(&b.kappa));
    Ok((pairs, condition))
}

/// Local curvature `kappa(p)` and the full relative spectrum.
pub fn local_curvature(ctx: &GammaContext<'_>) -> Result<CurvatureReport> {
    let g = ctx.graph();
    if g.n() < 2 {
        return Err(invalid("curvature needs at least two vertices"));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let min = ctx.p().iter().copied().fold(f64::INFINITY, f64::min);
    if min < BOUNDARY_MARGIN {
        return Err(Error::Boundary { min, margin: BOUNDARY_MARGIN });
    }
    if !(ctx.min_theta() > 0.0) {
        return Err(Error::Domain(format!("edge weight theta = {} is not positive", ctx.min_theta())));
    }
    let la = ctx.gamma2_matrix().formal_laplacian().into_matrix();
    let lt = ctx.theta_matrix().formal_laplacian().into_matrix();
    let (pairs, condition) = relative_eigenpairs(&la, &lt)?;
    Ok(CurvatureReport {
        p: ctx.p().to_vec(),
        kappa_local: pairs[0].kappa,
        eigenvector: pairs[0].alpha.clone(),
        pairs,
        condition,
    })
}

/// `kappa(p)` for a fresh context.
pub fn kappa_at(graph: &Graph, mean: &MeanFunction, energy: &Energy, p: &[f64]) -> Result<f64> {
    let ctx = GammaContext::new(graph, mean, energy, p)?;
    Ok(local_curvature(&ctx)?.kappa_local)
}

/// Margins used to probe for divergence to `-inf` at the boundary.
pub const DIVERGENCE_MARGINS: [f64; 3] = [1e-3, 1e-4, 1e-5];

#[derive(Debug, Clone, Serialize)]
pub struct GlobalCurvatureReport {
    /// `-inf` when the boundary probe detects divergence.
    #[serde(serialize_with = "crate::report::extended_f64")]
    pub kappa0: f64,
    pub argmin_p: Vec<f64>,
    pub samples_evaluated: usize,
    pub method: String,
    pub params: SearchParams,
    /// Minimum over `{p_i >= m}` for each probe margin `m`, when probed.
    pub boundary_probe: Vec<(f64, f64)>,
}

impl GlobalCurvatureReport {
    pub fn diverges(&self) -> bool {
        self.kappa0 == f64::NEG_INFINITY
    }
}

/// Decrements smaller than this, relative to `1 + |a|`, are rounding noise.
pub const DIVERGENCE_NOISE: f64 = 1e-8;

/// True when the minima over shrinking margins decrease beyond rounding noise
/// and the decrements do not shrink, i.e. no finite limit is being approached.
pub fn divergence_rule(values: &[f64; 3]) -> bool {
    let [a, b, c] = *values;
    let noise = DIVERGENCE_NOISE * (1.0 + a.abs());
    a - b > noise && b - c > noise && (b - c) >= 0.9 * (a - b)
}

/// Global curvature bound `kappa_0 = min_p kappa(p)` over the margin interior.
pub fn global_curvature(
    graph: &Graph,
    mean: &MeanFunction,
    energy: &Energy,
    params: &SearchParams,
) -> Result<GlobalCurvatureReport> {
    let n = graph.n();
    energy.check_dim(n)?;
    // Surface structural errors before the search swallows them.
    kappa_at(graph, mean, energy, &vec![1.0 / n as f64; n])?;
    let objective = |p: &[f64]| kappa_at(graph, mean, energy, p).unwrap_or(f64::NAN);
    let r = minimize_on_simplex(n, params, objective);
    if !r.value.is_finite() {
        return Err(Error::Domain("curvature is undefined on the whole search region".into()));
    }
    let mut report = GlobalCurvatureReport {
        kappa0: r.value,
        argmin_p: r.argmin.clone(),
        samples_evaluated: r.evaluations,
        method: "lattice + rotated Halton multistart + compass search".into(),
        params: *params,
        boundary_probe: Vec::new(),
    };
    let min_coord = r.argmin.iter().copied().fold(f64::INFINITY, f64::min);
    if min_coord <= 1.5 * params.margin {
        let mut values = [0.0; 3];
        for (slot, &m) in values.iter_mut().zip(DIVERGENCE_MARGINS.iter()) {
            let probe = minimize_on_simplex(n, &params.with_margin(m), objective);
            report.samples_evaluated += probe.evaluations;
            report.boundary_probe.push((m, probe.value));
            *slot = probe.value;
        }
        if divergence_rule(&values) {
            report.kappa0 = f64::NEG_INFINITY;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantCurvatureReport {
    pub constant: bool,
    pub value: Option<f64>,
    pub spread: f64,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

/// Interior sample points: rotated Halton up to 17 vertices, random beyond.
pub fn sample_points(n: usize, count: usize, margin: f64, seed: u64) -> Vec<Vec<f64>> {
    if n >= 2 && n - 1 <= 16 {
        halton_points(n, count, margin, seed)
    } else {
        random_points(n, count, margin, seed).into_iter().map(Vec::from).collect()
    }
}

/// Checks whether every relative eigenvalue at every sampled point equals a
/// single constant to within `tol`.
pub fn is_constant_curvature(
    graph: &Graph,
    mean: &MeanFunction,
    energy: &Energy,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Result<ConstantCurvatureReport> {
    let pts = sample_points(graph.n(), samples, 1e-3, seed);
    let spectra: Vec<Vec<f64>> = pts
        .par_iter()
        .map(|p| {
            let ctx = GammaContext::new(graph, mean, energy, p)?;
            Ok(local_curvature(&ctx)?.pairs.iter().map(|e| e.kappa).collect())
        })
        .collect::<Result<_>>()?;
    let all = spectra.iter().flatten().copied();
    let (min, max) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let spread = max - min;
    let constant = spread <= tol;
    Ok(ConstantCurvatureReport {
        constant,
        value: constant.then_some(0.5 * (min + max)),
        spread,
        min,
        max,
        samples,
    })
}
