//! Gradient and heat flows, De Bruijn identities, entropy dissipation,
//! log-Sobolev and Costa checks.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::sample_points;
use crate::energies::{Energy, EntropyKind};
use crate::error::{invalid, Error, Result};
use crate::gamma::GammaContext;
use crate::geodesics::BOUNDARY_STOP;
use crate::graph::Graph;
use crate::means::MeanFunction;
use crate::ode::{rk4_step, time_grid};
use crate::search::{minimize_on_simplex, SearchParams};
use crate::simplex::SimplexPoint;

/// `I(p) = Gamma_1(p, grad E, grad E)`, each edge once.
pub fn fisher_information(ctx: &GammaContext<'_>) -> Result<f64> {
    ctx.gamma1(ctx.gradient())
}

/// `J(p) = Gamma_2(p, grad E, grad E)`.
pub fn dissipation_rate(ctx: &GammaContext<'_>) -> f64 {
    ctx.gamma2_matrix().pair_form(ctx.gradient())
}

/// Euclidean projection onto the closed simplex.
fn project(y: &[f64]) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut tau = 0.0;
    for (k, &v) in u.iter().enumerate() {
        css += v;
        let t = (css - 1.0) / (k + 1) as f64;
        if v - t > 0.0 {
            tau = t;
        }
    }
    y.iter().map(|&v| (v - tau).max(0.0)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Equilibrium {
    pub p: Vec<f64>,
    pub energy: f64,
    /// `max_i |p_i - P(p - grad E)_i|` at the returned point.
    pub residual: f64,
    pub iterations: usize,
}

const EQUILIBRIUM_TOL: f64 = 1e-12;
const EQUILIBRIUM_MAX_ITER: usize = 200_000;

fn pg_residual(p: &[f64], g: &[f64]) -> f64 {
    let y: Vec<f64> = p.iter().zip(g).map(|(a, b)| a - b).collect();
    project(&y).iter().zip(p).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

/// Minimizer of `E` over the simplex by projected gradient descent with
/// Armijo backtracking, started at the uniform point.
pub fn equilibrium(energy: &Energy, n: usize) -> Result<Equilibrium> {
    energy.check_dim(n)?;
    let mut p = vec![1.0 / n as f64; n];
    let mut e = energy.value(&p)?;
    let mut g = energy.gradient(&p)?;
    let mut alpha: f64 = 1.0;
    for it in 0..EQUILIBRIUM_MAX_ITER {
        let r = pg_residual(&p, &g);
        if r <= EQUILIBRIUM_TOL {
            return Ok(Equilibrium { p, energy: e, residual: r, iterations: it });
        }
        let mut accepted = false;
        while alpha > 1e-20 {
            let y: Vec<f64> = p.iter().zip(&g).map(|(a, b)| a - alpha * b).collect();
            let q = project(&y);
            let dec: f64 = g.iter().zip(q.iter().zip(&p)).map(|(gi, (a, b))| gi * (a - b)).sum();
            if let (Ok(eq), Ok(gq)) = (energy.value(&q), energy.gradient(&q)) {
                // Below rounding level in E, progress is judged by the residual.
                let flat = (eq - e).abs() <= 1e-13 * (1.0 + e.abs()) && pg_residual(&q, &gq) < r;
                if eq <= e + 1e-4 * dec || flat {
                    p = q;
                    e = eq;
                    g = gq;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
        alpha = (alpha * 2.0).min(1e6);
    }
    let r = pg_residual(&p, &g);
    if r <= 1e3 * EQUILIBRIUM_TOL {
        return Ok(Equilibrium { p, energy: e, residual: r, iterations: EQUILIBRIUM_MAX_ITER });
    }
    Err(Error::Divergence(format!("projected gradient stalled with residual {r:e}")))
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowTrace {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub energy: Vec<f64>,
    pub fisher: Vec<f64>,
    pub dissipation: Vec<f64>,
    /// `exp(-2 E / m)`, recorded by the Costa check.
    pub entropy_power: Option<Vec<f64>>,
    pub equilibrium: Equilibrium,
    /// Rate `c` in `dp/dt = -c L(Theta) grad E`.
    pub rate: f64,
    pub boundary_stop: bool,
    /// Largest `|dp/dt - c sum_j (p_j - p_i)|` seen, for entropy energies.
    pub heat_reduction_residual: Option<f64>,
}

impl FlowTrace {
    /// CSV with columns `t, p_1..p_n, E, I, J[, N]`.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for i in 1..=n {
            let _ = write!(out, ",p{i}");
        }
        out.push_str(",E,I,J");
        if self.entropy_power.is_some() {
            out.push_str(",N");
        }
        out.push('\n');
        for k in 0..self.times.len() {
            let _ = write!(out, "{}", self.times[k]);
            for v in &self.states[k] {
                let _ = write!(out, ",{v}");
            }
            let _ = write!(out, ",{},{},{}", self.energy[k], self.fisher[k], self.dissipation[k]);
            if let Some(nn) = &self.entropy_power {
                let _ = write!(out, ",{}", nn[k]);
            }
            out.push('\n');
        }
        out
    }

    /// Largest `|dE/dt + c I|` and `|d^2E/dt^2 - 2 c^2 J|` over interior grid
    /// times, by central differences on uniform stretches of the grid.
    pub fn de_bruijn_residuals(&self) -> (f64, f64) {
        let (mut r1, mut r2): (f64, f64) = (0.0, 0.0);
        let c = self.rate;
        for k in 1..self.times.len().saturating_sub(1) {
            let (a, b) = (self.times[k] - self.times[k - 1], self.times[k + 1] - self.times[k]);
            if (a - b).abs() > 1e-9 * a {
                continue;
            }
            let d1 = (self.energy[k + 1] - self.energy[k - 1]) / (2.0 * a);
            let d2 = (self.energy[k + 1] - 2.0 * self.energy[k] + self.energy[k - 1]) / (a * a);
            r1 = r1.max((d1 + c * self.fisher[k]).abs());
            r2 = r2.max((d2 - 2.0 * c * c * self.dissipation[k]).abs());
        }
        (r1, r2)
    }
}

fn flow_rhs(graph: &Graph, mean: &MeanFunction, energy: &Energy, rate: f64, p: &[f64]) -> Result<Vec<f64>> {
    let g = energy.gradient(p)?;
    let mut dp = vec![0.0; p.len()];
    for (i, j, w) in graph.weighted_edges() {
        let th = w * mean.value(p[i], p[j]);
        if th < 0.0 {
            return Err(Error::AssumptionViolated(format!(
                "theta({}, {}) = {th} is negative",
                p[i], p[j]
            )));
        }
        if !th.is_finite() {
            return Err(Error::Domain(format!("mean '{}' is not finite at ({}, {})", mean.name(), p[i], p[j])));
        }
        let v = rate * th * (g[j] - g[i]);
        dp[i] += v;
        dp[j] -= v;
    }
    Ok(dp)
}

fn heat_rhs(graph: &Graph, rate: f64, p: &[f64]) -> Vec<f64> {
    let mut dp = vec![0.0; p.len()];
    for (i, j, w) in graph.weighted_edges() {
        let v = rate * w * (p[j] - p[i]);
        dp[i] += v;
        dp[j] -= v;
    }
    dp
}

fn check_start(graph: &Graph, p0: &SimplexPoint, t_end: f64, step: f64) -> Result<()> {
    if p0.len() != graph.n() {
        return Err(invalid(format!("start has {} coordinates, graph has {} vertices", p0.len(), graph.n())));
    }
    p0.check_interior(BOUNDARY_STOP)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid(format!("step must be positive, got {step}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(invalid(format!("t_end must be nonnegative, got {t_end}")));
    }
    Ok(())
}

/// Integrates `rhs` on the time grid and records `E`, `I`, `J` with the given
/// mean.
#[allow(clippy::too_many_arguments)]
fn run_flow<F>(
    graph: &Graph,
    mean: &MeanFunction,
    energy: &Energy,
    p0: &SimplexPoint,
    t_end: f64,
    step: f64,
    rate: f64,
    rhs: F,
) -> Result<FlowTrace>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let equilibrium = equilibrium(energy, graph.n())?;
    let grid = time_grid(t_end, step);
    let mut times = vec![grid[0]];
    let mut states = vec![p0.as_slice().to_vec()];
    let mut boundary_stop = false;
    for w in grid.windows(2) {
        let y = states.last().expect("nonempty");
        let next = match rk4_step(&rhs, y, w[1] - w[0]) {
            Ok(v) => v,
            Err(Error::Domain(_) | Error::Boundary { .. }) => {
                boundary_stop = true;
                break;
            }
            Err(e) => return Err(e),
        };
        if next.iter().any(|&x| !(x >= BOUNDARY_STOP)) {
            boundary_stop = true;
            break;
        }
        times.push(w[1]);
        states.push(next);
    }
    let mut trace = FlowTrace {
        times,
        energy: Vec::with_capacity(states.len()),
        fisher: Vec::with_capacity(states.len()),
        dissipation: Vec::with_capacity(states.len()),
        states,
        entropy_power: None,
        equilibrium,
        rate,
        boundary_stop,
        heat_reduction_residual: None,
    };
    for p in &trace.states {
        let ctx = GammaContext::new(graph, mean, energy, p)?;
        trace.energy.push(energy.value(p)?);
        trace.fisher.push(fisher_information(&ctx)?);
        trace.dissipation.push(dissipation_rate(&ctx));
    }
    Ok(trace)
}

/// `dp/dt = -L(Theta) grad E`, i.e. `dp_i/dt = sum_j theta_ij (dE/dp_j - dE/dp_i)`.
pub fn gradient_flow(
    graph: &Graph,
    mean: &MeanFunction,
    energy: &Energy,
    p0: &SimplexPoint,
    t_end: f64,
    step: f64,
) -> Result<FlowTrace> {
    gradient_flow_with_rate(graph, mean, energy, p0, t_end, step, 1.0)
}

/// Gradient flow with a constant factor `rate` on the right-hand side. For
/// entropy energies the deviation from the heat equation `rate sum_j (p_j - p_i)`
/// is recorded along the trace.
pub fn gradient_flow_with_rate(
    graph: &Graph,
    mean: &MeanFunction,
    energy: &Energy,
    p0: &SimplexPoint,
    t_end: f64,
    step: f64,
    rate: f64,
) -> Result<FlowTrace> {
    check_start(graph, p0, t_end, step)?;
    energy.check_dim(graph.n())?;
    let rhs = |p: &[f64]| flow_rhs(graph, mean, energy, rate, p);
    let mut trace = run_flow(graph, mean, energy, p0, t_end, step, rate, rhs)?;
    if energy.is_entropy() {
        let mut worst: f64 = 0.0;
        for p in &trace.states {
            let a = flow_rhs(graph, mean, energy, rate, p)?;
            let b = heat_rhs(graph, rate, p);
            worst = a.iter().zip(&b).fold(worst, |m, (x, y)| m.max((x - y).abs()));
        }
        trace.heat_reduction_residual = Some(worst);
    }
    Ok(trace)
}

/// `dp_i/dt = rate sum_{ij in E} w_ij (p_j - p_i)`, with `E`, `I`, `J` recorded
/// under `mean`.
pub fn heat_flow(
    graph: &Graph,
    mean: &MeanFunction,
    energy: &Energy,
    p0: &SimplexPoint,
    t_end: f64,
    step: f64,
    rate: f64,
) -> Result<FlowTrace> {
    check_start(graph, p0, t_end, step)?;
    energy.check_dim(graph.n())?;
    let rhs = |p: &[f64]| Ok(heat_rhs(graph, rate, p));
    run_flow(graph, mean, energy, p0, t_end, step, rate, rhs)
}

#[derive(Debug, Clone, Serialize)]
pub struct DissipationReport {
    pub kappa: f64,
    /// `min_k e^{-2 kappa c t_k}(E_0 - E(pi)) - (E_k - E(pi))`.
    pub worst_bound_slack: f64,
    /// `min_k J_k - kappa I_k`.
    pub worst_rate_slack: f64,
    pub pass: bool,
}

/// Checks `E(p(t)) - E(pi) <= e^{-2 kappa t}(E(p_0) - E(pi))` and
/// `J >= kappa I` along a trace. Time is rescaled by the flow rate.
pub fn dissipation_certificate(trace: &FlowTrace, kappa: f64) -> Result<DissipationReport> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::Precondition(format!("curvature bound must be nonnegative, got {kappa}")));
    }
    let e_pi = trace.equilibrium.energy;
    let gap0 = trace.energy[0] - e_pi;
    let mut bound: f64 = f64::INFINITY;
    let mut rate: f64 = f64::INFINITY;
    let mut pass = true;
    for k in 0..trace.times.len() {
        let s = (-2.0 * kappa * trace.rate * trace.times[k]).exp() * gap0 - (trace.energy[k] - e_pi);
        let r = trace.dissipation[k] - kappa * trace.fisher[k];
        bound = bound.min(s);
        rate = rate.min(r);
        if s < -1e-9 || r < -1e-9 * trace.fisher[k].max(1.0) {
            pass = false;
        }
    }
    Ok(DissipationReport { kappa, worst_bound_slack: bound, worst_rate_slack: rate, pass })
}

#[derive(Debug, Clone, Serialize)]
pub struct LsiReport {
    pub kappa: f64,
    pub samples: usize,
    pub equilibrium_energy: f64,
    /// `max (E - E(pi)) / (I / 2 kappa)` over samples with `I > 0`.
    #[serde(serialize_with = "crate::report::extended_f64")]
    pub worst_ratio: f64,
    /// `min I / 2 kappa - (E - E(pi))`.
    pub worst_slack: f64,
    /// Closed form of `I` used for the specialized check, if any.
    pub specialization: Option<String>,
    /// `max |I_specialized - I|`.
    pub specialization_difference: Option<f64>,
    pub pass: bool,
}

/// Closed form of the Fisher information for a single-family energy.
fn specialized_fisher(graph: &Graph, mean: &MeanFunction, energy: &Energy, p: &[f64]) -> Result<Option<f64>> {
    let diff: Box<dyn Fn(usize, usize) -> Result<f64>> = match energy {
        Energy::Linear { v } => Box::new(move |i, j| Ok(v[i] - v[j])),
        Energy::Interaction { w } => Box::new(move |i, j| {
            Ok((0..p.len()).map(|k| (w[i][k] - w[j][k]) * p[k]).sum())
        }),
        Energy::Entropy { u } => Box::new(move |i, j| Ok(u.du(p[i])? - u.du(p[j])?)),
        Energy::Sum { .. } => return Ok(None),
    };
    let mut s = 0.0;
    for (i, j, w) in graph.weighted_edges() {
        s += w * mean.value(p[i], p[j]) * diff(i, j)?.powi(2);
    }
    Ok(Some(s))
}

fn specialization_name(energy: &Energy) -> Option<String> {
    match energy {
        Energy::Linear { .. } => Some("linear".into()),
        Energy::Interaction { .. } => Some("interaction".into()),
        Energy::Entropy { .. } => Some("entropy".into()),
        Energy::Sum { .. } => None,
    }
}

/// Sampling margin for functional inequality checks.
const SAMPLE_MARGIN: f64 = 1e-6;

/// Checks `E(p) - E(pi) <= I(p) / (2 kappa)` at `samples` interior points.
pub fn log_sobolev_check(
    graph: &Graph,
    mean: &MeanFunction,
    energy: &Energy,
    kappa: f64,
    samples: usize,
    seed: u64,
) -> Result<LsiReport> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Precondition(format!(
            "log-Sobolev check needs a positive finite curvature bound, got {kappa}"
        )));
    }
    let n = graph.n();
    energy.check_dim(n)?;
    let pi = equilibrium(energy, n)?;
    let points = sample_points(n, samples, SAMPLE_MARGIN, seed);
    let rows: Vec<(f64, f64, Option<f64>)> = points
        .par_iter()
        .map(|p| {
            let ctx = GammaContext::new(graph, mean, energy, p)?;
            let i = fisher_information(&ctx)?;
            let gap = energy.value(p)? - pi.energy;
            let special = specialized_fisher(graph, mean, energy, p)?.map(|s| (s - i).abs());
            Ok((gap, i, special))
        })
        .collect::<Result<_>>()?;
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut worst_slack = f64::INFINITY;
    let mut diff: Option<f64> = None;
    for &(gap, i, special) in &rows {
        let bound = i / (2.0 * kappa);
        worst_slack = worst_slack.min(bound - gap);
        if i > 0.0 {
            worst_ratio = worst_ratio.max(gap / bound);
        }
        if let Some(d) = special {
            diff = Some(diff.map_or(d, |m: f64| m.max(d)));
        }
    }
    Ok(LsiReport {
        kappa,
        samples: rows.len(),
        equilibrium_energy: pi.energy,
        worst_ratio,
        worst_slack,
        specialization: specialization_name(energy),
        specialization_difference: diff,
        pass: worst_slack >= -1e-10,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CostaReport {
    /// `min_p Gamma_2(grad E, grad E) / Gamma_1(grad E, grad E)^2`.
    pub m_inverse: f64,
    pub argmin_x: Vec<f64>,
    pub search_evaluations: usize,
    /// `max_k (d^2N/dt^2)_k / |N_k|` over interior grid times.
    pub worst_second_derivative: f64,
    pub concavity_pass: bool,
    #[serde(skip)]
    pub trace: FlowTrace,
}

/// Heat flow rate used by the Costa check.
pub const COSTA_RATE: f64 = 0.5;
/// Allowed `d^2N/dt^2` relative to `|N|`.
pub const COSTA_TOL: f64 = 1e-7;

/// Discrete Costa entropy power check for `E = sum U(p_i)` with the mean
/// `theta = (s - t) / (U'(s) - U'(t))`.
pub fn costa_check(
    graph: &Graph,
    u: &EntropyKind,
    p0: &SimplexPoint,
    t_end: f64,
    step: f64,
    params: &SearchParams,
) -> Result<CostaReport> {
    u.check_convex()?;
    check_start(graph, p0, t_end, step)?;
    let mean = MeanFunction::compatible_with(u);
    let energy = Energy::entropy(u.clone());
    let n = graph.n();
    let objective = |p: &[f64]| -> f64 {
        let Ok(ctx) = GammaContext::new(graph, &mean, &energy, p) else {
            return f64::NAN;
        };
        let g = ctx.gradient();
        let Ok(g1) = ctx.gamma1(g) else {
            return f64::NAN;
        };
        if !(g1 > 0.0) {
            return f64::NAN;
        }
        ctx.gamma2_matrix().pair_form(g) / (g1 * g1)
    };
    let found = minimize_on_simplex(n, params, objective);
    if !found.value.is_finite() {
        return Err(Error::Domain("Gamma_2 / Gamma_1^2 is undefined on the whole search region".into()));
    }
    let m_inv = found.value;
    let mut trace = heat_flow(graph, &mean, &energy, p0, t_end, step, COSTA_RATE)?;
    let nn: Vec<f64> = trace.energy.iter().map(|e| (-2.0 * e * m_inv).exp()).collect();
    let mut worst = f64::NEG_INFINITY;
    let mut pass = true;
    for k in 1..nn.len().saturating_sub(1) {
        let (a, b) = (trace.times[k] - trace.times[k - 1], trace.times[k + 1] - trace.times[k]);
        if (a - b).abs() > 1e-9 * a {
            continue;
        }
        let d2 = (nn[k + 1] - 2.0 * nn[k] + nn[k - 1]) / (a * a);
        worst = worst.max(d2 / nn[k].abs());
        if d2 > COSTA_TOL * nn[k].abs() {
            pass = false;
        }
    }
    trace.entropy_power = Some(nn);
    Ok(CostaReport {
        m_inverse: m_inv,
        argmin_x: found.argmin,
        search_evaluations: found.evaluations,
        worst_second_derivative: worst,
        concavity_pass: pass,
        trace,
    })
}
