//! `C_4`-property, curvature of Cartesian products, and the decomposition of
//! `Gamma_2` on a product into fiber and `C_4` parts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{global_curvature, GlobalCurvatureReport};
use crate::energies::Energy;
use crate::error::{invalid, Error, Result};
use crate::gamma::GammaContext;
use crate::graph::{cartesian_product, Graph};
use crate::means::MeanFunction;
use crate::search::SearchParams;
use crate::simplex::random_point;

/// Pass threshold for the `C_4` gap.
pub const C4_TOL: f64 = 1e-9;
/// Pass threshold for the product curvature inequality.
pub const PRODUCT_TOL: f64 = 1e-6;

/// `Gamma_2^{G} - sum_{ij in E(G)} Gamma_2^{ij}` at a context.
pub fn property_gap(ctx: &GammaContext<'_>, f: &[f64]) -> Result<f64> {
    let full = ctx.gamma2_matrix().pair_form(f);
    let mut edges = 0.0;
    for &(i, j) in ctx.graph().edges() {
        edges += ctx.gamma2_edge(i, j, f)?;
    }
    Ok(full - edges)
}

/// Residual of `theta_ij (dE/dp_i - dE/dp_j) = p_i - p_j` over the edges.
pub fn compatibility_residual(ctx: &GammaContext<'_>) -> f64 {
    let p = ctx.p();
    ctx.graph()
        .edges()
        .iter()
        .map(|&(i, j)| (ctx.eta(i, j) - (p[i] - p[j])).abs())
        .fold(0.0, f64::max)
}

fn potential(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct C4PropertyReport {
    pub samples: usize,
    /// Minimum over samples of `Gamma_2^{C_4} - sum_{ij} Gamma_2^{ij}`.
    pub worst_gap: f64,
    pub worst_compatibility: f64,
    pub pass: bool,
}

/// Samples interior `p` and potentials `f` on `C_4`. The mean must satisfy
/// `theta_ij (dE/dp_i - dE/dp_j) = p_i - p_j`.
pub fn c4_property_check(mean: &MeanFunction, energy: &Energy, samples: usize, seed: u64) -> Result<C4PropertyReport> {
    let c4 = Graph::cycle(4)?;
    let energy = energy.at_dim(4)?;
    let rows: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(s as u64));
            let p = random_point(&mut rng, 4, 1e-6);
            let f = potential(&mut rng, 4);
            let ctx = GammaContext::new(&c4, mean, &energy, p.as_slice())?;
            Ok((property_gap(&ctx, &f)?, compatibility_residual(&ctx)))
        })
        .collect::<Result<_>>()?;
    let worst_compatibility = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    if worst_compatibility > 1e-10 {
        return Err(Error::Precondition(format!(
            "mean '{}' is not compatible with the energy (residual {worst_compatibility:e})",
            mean.name()
        )));
    }
    let worst_gap = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    Ok(C4PropertyReport { samples, worst_gap, worst_compatibility, pass: worst_gap >= -C4_TOL })
}

/// Both sides of
/// `sum_i (f_i-f_{i+1})^2 (theta_{i+2,i+3} - theta_{i,i+1}) + 2 sum_i (f_i-f_{i-1})(f_i-f_{i+1})(theta_{i,i-1} + theta_{i,i+1})`
/// `= (theta_12 + theta_23 + theta_34 + theta_41)(f_1 - f_2 + f_3 - f_4)^2`,
/// with `theta[i]` the weight of the cycle edge `(i, i+1)`.
pub fn c4_regrouping_identity(theta: &[f64; 4], f: &[f64; 4]) -> (f64, f64) {
    let e = |i: usize| theta[i % 4];
    let v = |i: usize| f[i % 4];
    let mut lhs = 0.0;
    for i in 0..4 {
        let (prev, next) = (i + 3, i + 1);
        lhs += (v(i) - v(next)).powi(2) * (e(i + 2) - e(i));
        lhs += 2.0 * (v(i) - v(prev)) * (v(i) - v(next)) * (e(prev) + e(i));
    }
    let rhs = theta.iter().sum::<f64>() * (f[0] - f[1] + f[2] - f[3]).powi(2);
    (lhs, rhs)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductBoundReport {
    #[serde(serialize_with = "crate::report::extended_f64")]
    pub kappa_product: f64,
    #[serde(serialize_with = "crate::report::extended_f64")]
    pub kappa_g: f64,
    #[serde(serialize_with = "crate::report::extended_f64")]
    pub kappa_h: f64,
    /// `kappa_product - min(kappa_g, kappa_h)`.
    #[serde(serialize_with = "crate::report::extended_f64")]
    pub slack: f64,
    pub pass: bool,
    pub product: GlobalCurvatureReport,
    pub g: GlobalCurvatureReport,
    pub h: GlobalCurvatureReport,
}

/// Checks `kappa_0(G x H) >= min(kappa_0(G), kappa_0(H))`. Entropy energies
/// extend to every factor; other energies need `product_energy` and must
/// already fit both factors.
pub fn product_bound_check(
    g: &Graph,
    h: &Graph,
    mean: &MeanFunction,
    energy: &Energy,
    product_energy: Option<&Energy>,
    params: &SearchParams,
) -> Result<ProductBoundReport> {
    let gh = cartesian_product(g, h);
    let eg = energy.at_dim(g.n())?;
    let eh = energy.at_dim(h.n())?;
    let ep = match product_energy {
        Some(e) => {
            e.check_dim(gh.n())?;
            e.clone()
        }
        None => energy.at_dim(gh.n())?,
    };
    let rg = global_curvature(g, mean, &eg, params)?;
    let rh = global_curvature(h, mean, &eh, params)?;
    let rp = global_curvature(&gh, mean, &ep, params)?;
    let lower = rg.kappa0.min(rh.kappa0);
    let slack = rp.kappa0 - lower;
    Ok(ProductBoundReport {
        kappa_product: rp.kappa0,
        kappa_g: rg.kappa0,
        kappa_h: rh.kappa0,
        slack,
        pass: slack >= -PRODUCT_TOL || lower == f64::NEG_INFINITY,
        product: rp,
        g: rg,
        h: rh,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    pub full: f64,
    /// `sum_u Gamma_2^{u x H} + sum_v Gamma_2^{G x v}`.
    pub fibers: f64,
    /// Sum of `C_4` gaps over pairs of edges `u1u2 in E(G)`, `v1v2 in E(H)`.
    pub corrections: f64,
}

impl Decomposition {
    pub fn residual(&self) -> f64 {
        self.full - self.fibers - self.corrections
    }
}

fn restricted_gamma2(
    graph: &Graph,
    vertices: &[usize],
    mean: &MeanFunction,
    energy: &Energy,
    p: &[f64],
    f: &[f64],
    gap: bool,
) -> Result<f64> {
    let sub = graph.induced(vertices)?;
    let e = energy.at_dim(vertices.len())?;
    let ps: Vec<f64> = vertices.iter().map(|&v| p[v]).collect();
    let fs: Vec<f64> = vertices.iter().map(|&v| f[v]).collect();
    let ctx = GammaContext::new(&sub, mean, &e, &ps)?;
    if gap {
        property_gap(&ctx, &fs)
    } else {
        Ok(ctx.gamma2_matrix().pair_form(&fs))
    }
}

/// Splits `Gamma_2^{G x H}(p, f)` into fiber terms and `C_4` corrections, each
/// evaluated on the induced subgraph with `p` restricted (not renormalized).
/// Requires an entropy energy, whose restriction to a subgraph is canonical.
pub fn product_decomposition(
    g: &Graph,
    h: &Graph,
    mean: &MeanFunction,
    energy: &Energy,
    p: &[f64],
    f: &[f64],
) -> Result<Decomposition> {
    if !energy.is_entropy() {
        return Err(Error::Precondition("decomposition needs an entropy energy".into()));
    }
    let gh = cartesian_product(g, h);
    let (ng, nh) = (g.n(), h.n());
    if p.len() != gh.n() || f.len() != gh.n() {
        return Err(invalid(format!("expected vectors of length {}", gh.n())));
    }
    let idx = |u: usize, v: usize| u * nh + v;
    let full = GammaContext::new(&gh, mean, energy, p)?.gamma2_matrix().pair_form(f);
    let mut fibers = 0.0;
    for u in 0..ng {
        let vs: Vec<usize> = (0..nh).map(|v| idx(u, v)).collect();
        fibers += restricted_gamma2(&gh, &vs, mean, energy, p, f, false)?;
    }
    for v in 0..nh {
        let us: Vec<usize> = (0..ng).map(|u| idx(u, v)).collect();
        fibers += restricted_gamma2(&gh, &us, mean, energy, p, f, false)?;
    }
    let mut corrections = 0.0;
    for &(u1, u2) in g.edges() {
        for &(v1, v2) in h.edges() {
            let cyc = [idx(u1, v1), idx(u2, v1), idx(u2, v2), idx(u1, v2)];
            corrections += restricted_gamma2(&gh, &cyc, mean, energy, p, f, true)?;
        }
    }
    Ok(Decomposition { full, fibers, corrections })
}
