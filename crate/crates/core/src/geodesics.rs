//! Mean-field geodesics `dp_i/dt = sum_j (f_i - f_j) theta_ij`,
//! `df_i/dt = -1/2 sum_j (f_i - f_j)^2 d theta_ij / d p_i`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::energies::Energy;
use crate::error::{invalid, Error, Result};
use crate::gamma::GammaContext;
use crate::graph::Graph;
use crate::means::MeanFunction;
use crate::ode::{rk4_step, time_grid};
use crate::simplex::BOUNDARY_MARGIN;

/// Trajectories stop once a coordinate falls below this.
pub const BOUNDARY_STOP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicState {
    pub t: f64,
    pub p: Vec<f64>,
    pub f: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeodesicTrajectory {
    pub states: Vec<GeodesicState>,
    /// True when integration stopped early near the boundary.
    pub boundary_stop: bool,
}

fn split(y: &[f64]) -> (&[f64], &[f64]) {
    y.split_at(y.len() / 2)
}

/// Right-hand side `(dp, df)` at `(p, f)`.
pub fn geodesic_rhs(graph: &Graph, mean: &MeanFunction, p: &[f64], f: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = graph.n();
    if p.len() != n || f.len() != n {
        return Err(invalid(format!("state has sizes ({}, {}), graph has {n} vertices", p.len(), f.len())));
    }
    let min = p.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min >= BOUNDARY_MARGIN) {
        return Err(Error::Boundary { min, margin: BOUNDARY_MARGIN });
    }
    let mut dp = vec![0.0; n];
    let mut df = vec![0.0; n];
    for (i, j, w) in graph.weighted_edges() {
        let (th, di, dj) = mean.jet(p[i], p[j]);
        if !(th.is_finite() && di.is_finite() && dj.is_finite()) {
            return Err(Error::Domain(format!("mean '{}' is not finite at ({}, {})", mean.name(), p[i], p[j])));
        }
        let d = f[i] - f[j];
        dp[i] += w * th * d;
        dp[j] -= w * th * d;
        df[i] -= 0.5 * d * d * w * di;
        df[j] -= 0.5 * d * d * w * dj;
    }
    Ok((dp, df))
}

/// Fixed-step RK4 from `initial` over `[initial.t, initial.t + t_end]`.
pub fn integrate_geodesic(
    graph: &Graph,
    mean: &MeanFunction,
    initial: &GeodesicState,
    t_end: f64,
    step: f64,
) -> Result<GeodesicTrajectory> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid(format!("step must be positive, got {step}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(invalid(format!("t_end must be nonnegative, got {t_end}")));
    }
    geodesic_rhs(graph, mean, &initial.p, &initial.f)?;
    let rhs = |y: &[f64]| -> Result<Vec<f64>> {
        let (p, f) = split(y);
        let (mut dp, df) = geodesic_rhs(graph, mean, p, f)?;
        dp.extend(df);
        Ok(dp)
    };
    let grid = time_grid(t_end, step);
    let mut y: Vec<f64> = initial.p.iter().chain(&initial.f).copied().collect();
    let mut states = vec![initial.clone()];
    let mut boundary_stop = false;
    for w in grid.windows(2) {
        let next = match rk4_step(&rhs, &y, w[1] - w[0]) {
            Ok(v) => v,
            Err(Error::Boundary { .. } | Error::Domain(_)) => {
                boundary_stop = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let (p, f) = split(&next);
        if p.iter().any(|&x| !(x >= BOUNDARY_STOP)) {
            boundary_stop = true;
            break;
        }
        states.push(GeodesicState { t: initial.t + w[1], p: p.to_vec(), f: f.to_vec() });
        y = next;
    }
    Ok(GeodesicTrajectory { states, boundary_stop })
}

impl GeodesicTrajectory {
    /// `Gamma_1(p(t), f(t))` at every state.
    pub fn speeds(&self, graph: &Graph, mean: &MeanFunction) -> Result<Vec<f64>> {
        let dummy = Energy::linear(vec![0.0; graph.n()]);
        self.states
            .iter()
            .map(|s| GammaContext::new(graph, mean, &dummy, &s.p)?.gamma1(&s.f))
            .collect()
    }

    /// `max_t |Gamma_1(t) - Gamma_1(0)| / Gamma_1(0)`.
    pub fn speed_drift(&self, graph: &Graph, mean: &MeanFunction) -> Result<f64> {
        let g = self.speeds(graph, mean)?;
        let g0 = g[0];
        if g0 == 0.0 {
            return Ok(g.iter().fold(0.0, |m, v| m.max(v.abs())));
        }
        Ok(g.iter().fold(0.0, |m, v| m.max((v - g0).abs() / g0)))
    }

    /// Largest `|d^2E/dt^2 - Gamma_2(p, f, f)|` over interior states, with the
    /// second derivative taken by central differences on a uniform grid.
    pub fn hessian_residual(&self, graph: &Graph, mean: &MeanFunction, energy: &Energy) -> Result<f64> {
        let e: Vec<f64> = self.states.iter().map(|s| energy.value(&s.p)).collect::<Result<_>>()?;
        let mut worst: f64 = 0.0;
        for k in 1..self.states.len().saturating_sub(1) {
            let (a, b) = (self.states[k].t - self.states[k - 1].t, self.states[k + 1].t - self.states[k].t);
            if (a - b).abs() > 1e-9 * a {
                continue;
            }
            let d2 = (e[k + 1] - 2.0 * e[k] + e[k - 1]) / (a * a);
            let s = &self.states[k];
            let ctx = GammaContext::new(graph, mean, energy, &s.p)?;
            let g2 = ctx.gamma2_matrix().pair_form(&s.f);
            worst = worst.max((d2 - g2).abs());
        }
        Ok(worst)
    }

    /// CSV with columns `t, p_1..p_n, f_1..f_n, gamma1, energy`.
    pub fn to_csv(&self, graph: &Graph, mean: &MeanFunction, energy: &Energy) -> Result<String> {
        let n = graph.n();
        let mut out = String::from("t");
        for i in 1..=n {
            let _ = write!(out, ",p{i}");
        }
        for i in 1..=n {
            let _ = write!(out, ",f{i}");
        }
        out.push_str(",gamma1,energy\n");
        let speeds = self.speeds(graph, mean)?;
        for (s, g) in self.states.iter().zip(speeds) {
            let _ = write!(out, "{}", s.t);
            for v in s.p.iter().chain(&s.f) {
                let _ = write!(out, ",{v}");
            }
            let _ = writeln!(out, ",{g},{}", energy.value(&s.p)?);
        }
        Ok(out)
    }
}
