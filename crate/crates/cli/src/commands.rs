use mfig_core::curvature::{is_constant_curvature, ConstantCurvatureReport};
use mfig_core::dynamics::{
    costa_check, dissipation_certificate, gradient_flow, log_sobolev_check, CostaReport, DissipationReport, LsiReport,
};
use mfig_core::product::{c4_property_check, product_bound_check, C4PropertyReport, ProductBoundReport};
use mfig_core::two_point::Effectiveness;
use mfig_core::{
    global_curvature, integrate_geodesic, local_curvature, CurvatureReport, Energy, Error, GammaContext,
    GeodesicState, GlobalCurvatureReport, Graph, MeanFunction, SearchParams, SimplexPoint, TwoPointProblem,
};
use serde_json::{json, Value};

use crate::config::{parse_graph, usage, Command, Common, UsageError};

pub enum Failure {
    Usage(UsageError),
    Core(Error),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

pub struct Outcome {
    pub pass: bool,
    pub result: Value,
    pub csv: Option<String>,
}

fn point(p: &[f64], field: &'static str, n: usize) -> Result<SimplexPoint, UsageError> {
    if p.len() != n {
        return Err(usage(field, format!("expected {n} coordinates, got {}", p.len())));
    }
    SimplexPoint::new(p.to_vec()).map_err(|e| usage(field, e))
}

/// Uses `kappa` when given, otherwise the global curvature bound.
fn kappa_or_global(
    kappa: Option<f64>,
    graph: &Graph,
    mean: &MeanFunction,
    energy: &Energy,
    params: &SearchParams,
) -> Result<(f64, Option<GlobalCurvatureReport>), Failure> {
    match kappa {
        Some(k) => Ok((k, None)),
        None => {
            let r = global_curvature(graph, mean, energy, params)?;
            Ok((r.kappa0, Some(r)))
        }
    }
}

pub fn run(common: &Common, command: &Command) -> Result<Outcome, Failure> {
    let params = common.search()?;
    match command {
        Command::Curvature { p, global, constant, samples } => {
            let graph = common.graph()?;
            let energy = common.energy()?;
            let mean = common.mean(&energy)?;
            energy.check_dim(graph.n()).map_err(|e| usage("energy", e))?;
            let mut local: Option<CurvatureReport> = None;
            if p.is_some() || !(*global || *constant) {
                let n = graph.n();
                let pt = match p {
                    Some(p) => point(p, "p", n)?,
                    None => SimplexPoint::uniform(n),
                };
                let ctx = GammaContext::new(&graph, &mean, &energy, pt.as_slice())?;
                local = Some(local_curvature(&ctx)?);
            }
            let glob = if *global { Some(global_curvature(&graph, &mean, &energy, &params)?) } else { None };
            let cons: Option<ConstantCurvatureReport> = if *constant {
                Some(is_constant_curvature(&graph, &mean, &energy, common.tol.unwrap_or(1e-6), *samples, common.seed)?)
            } else {
                None
            };
            let pass = cons.as_ref().is_none_or(|c| c.constant);
            Ok(Outcome { pass, result: json!({ "local": local, "global": glob, "constant": cons }), csv: None })
        }
        Command::TwoPoint { distance, kappa_at, kappa_grid, efct } => {
            let energy = common.energy()?.at_dim(2).map_err(|e| usage("energy", e))?;
            let mean = common.mean(&energy)?;
            let prob = TwoPointProblem::new(mean, energy).map_err(|e| usage("energy", e))?;
            let (a, b) = match distance.as_deref() {
                Some([a, b]) => (*a, *b),
                Some(_) => return Err(usage("distance", "expected two values").into()),
                None => (0.0, 1.0),
            };
            let (lo, hi) = (a.min(b), a.max(b));
            if !(0.0 <= lo && hi <= 1.0) {
                return Err(usage("distance", format!("endpoints must lie in [0, 1], got ({a}, {b})")).into());
            }
            let d = prob.transport_distance(lo, hi)?;
            let kappa = match kappa_at {
                Some(x) => Some(json!({ "x": x, "kappa": prob.kappa(*x).map_err(|e| usage("kappa-at", e))? })),
                None => None,
            };
            let eff: Option<Effectiveness> = if *efct { Some(prob.effectiveness(&params)?) } else { None };
            let grid_csv = match kappa_grid {
                Some(0) => return Err(usage("kappa-grid", "need at least one point").into()),
                Some(m) => {
                    let mut s = String::from("x,kappa\n");
                    for k in 1..=*m {
                        let x = k as f64 / (*m + 1) as f64;
                        s.push_str(&format!("{x},{}\n", prob.kappa(x)?));
                    }
                    Some(s)
                }
                None => None,
            };
            if grid_csv.is_some() && common.csv.is_none() {
                return Err(usage("csv", "--kappa-grid needs an output path").into());
            }
            let result = json!({
                "distance": { "a": lo, "b": hi, "value": d },
                "kappa_at": kappa,
                "kappa_grid": kappa_grid,
                "efct": eff,
            });
            Ok(Outcome { pass: true, result, csv: grid_csv })
        }
        Command::Geodesic { p, f, t_end, step } => {
            let graph = common.graph()?;
            let energy = common.energy()?;
            let mean = common.mean(&energy)?;
            energy.check_dim(graph.n()).map_err(|e| usage("energy", e))?;
            let n = graph.n();
            let p0 = point(p, "p", n)?;
            if f.len() != n {
                return Err(usage("f", format!("expected {n} values, got {}", f.len())).into());
            }
            let init = GeodesicState { t: 0.0, p: p0.as_slice().to_vec(), f: f.clone() };
            let traj = integrate_geodesic(&graph, &mean, &init, *t_end, *step)?;
            let drift = traj.speed_drift(&graph, &mean)?;
            let tol = common.tol.unwrap_or(1e-8);
            let end = traj.states.last().expect("initial state is kept");
            let result = json!({
                "steps": traj.states.len() - 1,
                "t_final": end.t,
                "p_final": end.p,
                "f_final": end.f,
                "speed_drift": drift,
                "boundary_stop": traj.boundary_stop,
                "tol": tol,
            });
            let csv = traj.to_csv(&graph, &mean, &energy)?;
            Ok(Outcome { pass: drift <= tol, result, csv: Some(csv) })
        }
        Command::Flow { p0, t_end, step, kappa } => {
            let graph = common.graph()?;
            let energy = common.energy()?;
            let mean = common.mean(&energy)?;
            energy.check_dim(graph.n()).map_err(|e| usage("energy", e))?;
            let p0 = point(p0, "p0", graph.n())?;
            let trace = gradient_flow(&graph, &mean, &energy, &p0, *t_end, *step)?;
            let (k, search) = kappa_or_global(*kappa, &graph, &mean, &energy, &params)?;
            let cert: DissipationReport = dissipation_certificate(&trace, k)?;
            let (first, second) = trace.de_bruijn_residuals();
            let result = json!({
                "steps": trace.times.len() - 1,
                "boundary_stop": trace.boundary_stop,
                "final_energy": trace.energy.last(),
                "equilibrium": trace.equilibrium,
                "de_bruijn_residuals": [first, second],
                "heat_reduction_residual": trace.heat_reduction_residual,
                "kappa_search": search,
                "certificate": cert,
            });
            Ok(Outcome { pass: cert.pass, result, csv: Some(trace.to_csv()) })
        }
        Command::Lsi { kappa, samples } => {
            let graph = common.graph()?;
            let energy = common.energy()?;
            let mean = common.mean(&energy)?;
            energy.check_dim(graph.n()).map_err(|e| usage("energy", e))?;
            let (k, search) = kappa_or_global(*kappa, &graph, &mean, &energy, &params)?;
            let r: LsiReport = log_sobolev_check(&graph, &mean, &energy, k, *samples, common.seed)?;
            Ok(Outcome { pass: r.pass, result: json!({ "kappa_search": search, "lsi": r }), csv: None })
        }
        Command::Costa { p0, t_end, step } => {
            let graph = common.graph()?;
            let u = match common.energy()? {
                Energy::Entropy { u } => u,
                _ => return Err(usage("energy", "costa needs an entropy energy").into()),
            };
            let n = graph.n();
            let p0 = match p0 {
                Some(p) => point(p, "p0", n)?,
                None if n == 2 => point(&[0.9, 0.1], "p0", 2)?,
                None => return Err(usage("p0", format!("required on {n} vertices")).into()),
            };
            let r: CostaReport = costa_check(&graph, &u, &p0, *t_end, *step, &params)?;
            let csv = r.trace.to_csv();
            let result = json!({
                "mean": "compatible",
                "costa": r,
                "steps": r.trace.times.len() - 1,
                "boundary_stop": r.trace.boundary_stop,
            });
            Ok(Outcome { pass: r.concavity_pass, result, csv: Some(csv) })
        }
        Command::ProductCheck { g, h, product_energy, c4_samples } => {
            let g = parse_graph(g, "g")?;
            let h = parse_graph(h, "h")?;
            let energy = common.energy()?;
            let mean = common.mean(&energy)?;
            let pe = match product_energy {
                Some(s) => Some(Energy::parse(s).map_err(|e| usage("product-energy", e))?),
                None => None,
            };
            let (c4, c4_note): (Option<C4PropertyReport>, Option<String>) =
                match c4_property_check(&mean, &energy, *c4_samples, common.seed) {
                    Ok(r) => (Some(r), None),
                    Err(e @ (Error::Precondition(_) | Error::InvalidArgument(_))) => (None, Some(e.to_string())),
                    Err(e) => return Err(e.into()),
                };
            let bound: ProductBoundReport = product_bound_check(&g, &h, &mean, &energy, pe.as_ref(), &params)
                .map_err(|e| match e {
                    Error::InvalidArgument(_) => Failure::Usage(usage("product-energy", e)),
                    e => Failure::Core(e),
                })?;
            let pass = bound.pass && c4.as_ref().is_none_or(|r| r.pass);
            let result = json!({ "c4_property": c4, "c4_skipped": c4_note, "product_bound": bound });
            Ok(Outcome { pass, result, csv: None })
        }
    }
}

/// Exit code for a core error: bad input is a usage error, the rest are
/// numerical or precondition failures.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::Parse { .. } | Error::Io(_) | Error::Boundary { .. } => 2,
        _ => 1,
    }
}
