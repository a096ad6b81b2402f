//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::Command;

use mfig_core::curvature::{global_curvature, is_constant_curvature, local_curvature, sample_points};
use mfig_core::dynamics::{costa_check, dissipation_certificate, gradient_flow, log_sobolev_check};
use mfig_core::gamma::tensor_identity_check;
use mfig_core::product::c4_property_check;
use mfig_core::simplex::random_point;
use mfig_core::{
    integrate_geodesic, Energy, EntropyKind, Gamma2Formula, GammaContext, GeodesicState, Graph, MeanFunction,
    SearchParams, SimplexPoint, TwoPointProblem,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn k2() -> Graph {
    Graph::complete(2).unwrap()
}

fn shannon_pair(m: MeanFunction) -> TwoPointProblem {
    TwoPointProblem::new(m, Energy::shannon()).unwrap()
}

fn tim() -> MeanFunction {
    MeanFunction::transport_information(&Energy::shannon(), Some(8.0 * 2f64.ln())).unwrap()
}

fn c1_distances() -> Outcome {
    let cases = [
        ("arithmetic", MeanFunction::arithmetic(), 2f64.sqrt()),
        ("logarithmic", MeanFunction::logarithmic(), 1.558707451),
        ("geometric", MeanFunction::geometric(), 1.694426169),
        ("spectral", MeanFunction::spectral(), 3.232504051),
    ];
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (name, m, want) in cases {
        let d = shannon_pair(m).transport_distance(0.0, 1.0).map_err(|e| e.to_string())?;
        worst = worst.max((d - want).abs());
        detail.push(format!("{name}={d:.10}"));
    }
    check(worst <= 1e-6, format!("{} max|err|={worst:.2e} tol=1e-6", detail.join(" ")))
}

fn c2_effectiveness() -> Outcome {
    let params = SearchParams::default();
    let cases = [
        ("arithmetic", MeanFunction::arithmetic(), 1.0 / (2.0 * 2f64.ln())),
        ("logarithmic", MeanFunction::logarithmic(), 0.8762817572),
        ("spectral", MeanFunction::spectral(), 0.9421774637),
    ];
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (name, m, want) in cases {
        let e = shannon_pair(m).effectiveness(&params).map_err(|e| e.to_string())?.efct;
        worst = worst.max((e - want).abs());
        detail.push(format!("{name}={e:.10}"));
    }
    let geo = shannon_pair(MeanFunction::geometric()).effectiveness(&params).map_err(|e| e.to_string())?.efct;
    detail.push(format!("geometric={geo}"));
    check(
        worst <= 1e-6 && geo == f64::NEG_INFINITY,
        format!("{} max|err|={worst:.2e} tol=1e-6", detail.join(" ")),
    )
}

fn c3_global_curvature() -> Outcome {
    let params = SearchParams::default();
    let e = Energy::shannon();
    let cases = [
        ("arithmetic", MeanFunction::arithmetic(), 2.0),
        ("logarithmic", MeanFunction::logarithmic(), 2.0),
        ("spectral", MeanFunction::spectral(), 0.5),
    ];
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (name, m, want) in cases {
        let k = global_curvature(&k2(), &m, &e, &params).map_err(|e| e.to_string())?.kappa0;
        worst = worst.max((k - want).abs());
        detail.push(format!("{name}={k:.8}"));
    }
    let c = is_constant_curvature(&k2(), &tim(), &e, 1e-6, 1000, 0).map_err(|e| e.to_string())?;
    let value = c.value.unwrap_or(f64::NAN);
    let d = shannon_pair(tim()).transport_distance(0.0, 1.0).map_err(|e| e.to_string())?;
    let tim_ok = c.constant && c.spread <= 1e-6 && (value - 8.0 * 2f64.ln()).abs() <= 1e-6 && (d - 1.0).abs() <= 1e-7;
    check(
        worst <= 1e-4 && tim_ok,
        format!(
            "{} max|err|={worst:.2e} tol=1e-4; tim kappa={value:.10} spread={:.2e} d(0,1)={d:.10} tol=1e-6/1e-7",
            detail.join(" "),
            c.spread
        ),
    )
}

/// `1/m` on two points as a function of `x`, in closed form.
fn costa_ratio(x: f64) -> f64 {
    let l = (x / (1.0 - x)).ln();
    1.0 / (l * (2.0 * x - 1.0)) + 1.0 / (2.0 * l * l * x * (1.0 - x))
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-12 {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

fn c4_costa() -> Outcome {
    let (ox, ov) = golden_section(costa_ratio, 1e-4, 0.45);
    let oracle_ok = (ov - 1.58353).abs() <= 1e-3 && (ox - 0.058).abs() <= 5e-3;
    let p0 = SimplexPoint::new(vec![0.9, 0.1]).unwrap();
    let r = costa_check(&k2(), &EntropyKind::Shannon, &p0, 2.0, 1e-3, &SearchParams::default())
        .map_err(|e| e.to_string())?;
    let x = r.argmin_x[0].min(r.argmin_x[1]);
    let ok = oracle_ok
        && (r.m_inverse - ov).abs() <= 1e-6
        && (r.m_inverse - 1.58353).abs() <= 1e-3
        && (x - 0.058).abs() <= 5e-3
        && r.concavity_pass;
    check(
        ok,
        format!(
            "oracle 1/m={ov:.6} x={ox:.4}; search 1/m={:.6} x={x:.4} tol=1e-3/5e-3; max d2N/|N|={:.2e} tol=1e-7",
            r.m_inverse, r.worst_second_derivative
        ),
    )
}

fn random_graph(rng: &mut ChaCha8Rng) -> Graph {
    match rng.random_range(0..6) {
        0 => Graph::complete(2).unwrap(),
        1 => Graph::complete(3).unwrap(),
        2 => Graph::path(4).unwrap(),
        3 => Graph::cycle(4).unwrap(),
        4 => Graph::complete(4).unwrap(),
        _ => Graph::hypercube(3).unwrap(),
    }
}

fn random_mean(rng: &mut ChaCha8Rng) -> MeanFunction {
    match rng.random_range(0..5) {
        0 => MeanFunction::arithmetic(),
        1 => MeanFunction::geometric(),
        2 => MeanFunction::logarithmic(),
        3 => MeanFunction::spectral(),
        _ => tim(),
    }
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            w[i][j] = rng.random_range(-1.0..1.0);
            w[j][i] = w[i][j];
        }
    }
    w
}

fn random_energy(rng: &mut ChaCha8Rng, n: usize) -> Energy {
    match rng.random_range(0..5) {
        0 => Energy::linear(random_vec(rng, n)),
        1 => Energy::interaction(random_symmetric(rng, n)).unwrap(),
        2 => Energy::shannon(),
        3 => Energy::quadratic(),
        _ => Energy::sum(vec![Energy::shannon(), Energy::linear(random_vec(rng, n))]).unwrap(),
    }
}

/// Largest absolute summand of the pair form, the scale of the cancellation.
fn magnitude(ctx: &GammaContext<'_>, f: &[f64]) -> f64 {
    let a = ctx.gamma2_matrix();
    let mut m: f64 = 0.0;
    for i in 0..ctx.n() {
        for j in i + 1..ctx.n() {
            m = m.max((a.get(i, j) * (f[i] - f[j]).powi(2)).abs());
        }
    }
    m
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn c5_formula_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_forms: f64 = 0.0;
    let mut worst_special: f64 = 0.0;
    for _ in 0..200 {
        let g = random_graph(&mut rng);
        let n = g.n();
        let mean = random_mean(&mut rng);
        let energy = random_energy(&mut rng, n);
        let p = random_point(&mut rng, n, 1e-2).as_slice().to_vec();
        let f = random_vec(&mut rng, n);
        let ctx = GammaContext::new(&g, &mean, &energy, &p).map_err(|e| e.to_string())?;
        let f1 = ctx.gamma2(&f, Gamma2Formula::F1).map_err(|e| e.to_string())?;
        let f3 = ctx.gamma2(&f, Gamma2Formula::F3).map_err(|e| e.to_string())?;
        let pair = ctx.gamma2_matrix().pair_form(&f);
        worst_forms = worst_forms.max(rel(f3, f1)).max(rel(pair, f1));

        let v = random_vec(&mut rng, n);
        let w = random_symmetric(&mut rng, n);
        let mut special = |e: &Energy, closed: &dyn Fn(&GammaContext<'_>) -> f64| -> Result<(), String> {
            let ctx = GammaContext::new(&g, &mean, e, &p).map_err(|e| e.to_string())?;
            let generic = ctx.gamma2(&f, Gamma2Formula::F1).map_err(|e| e.to_string())?;
            let scale = generic.abs().max(magnitude(&ctx, &f)).max(1e-12);
            worst_special = worst_special.max((closed(&ctx) - generic).abs() / scale);
            Ok(())
        };
        special(&Energy::linear(v.clone()), &|c| c.gamma2_linear(&v, &f).unwrap())?;
        special(&Energy::interaction(w.clone()).unwrap(), &|c| c.gamma2_interaction(&w, &f).unwrap())?;
        for u in [EntropyKind::Shannon, EntropyKind::Quadratic] {
            let du: Vec<f64> = p.iter().map(|&x| u.du(x).unwrap()).collect();
            let d2u: Vec<f64> = p.iter().map(|&x| u.d2u(x).unwrap()).collect();
            special(&Energy::entropy(u), &|c| c.gamma2_entropy(&du, &d2u, &f).unwrap())?;
        }
    }
    let mut worst_tensor: f64 = 0.0;
    for n in 2..7 {
        for _ in 0..50 {
            let a = random_vec(&mut rng, n * n * n);
            let b = random_vec(&mut rng, n * n * n);
            let x = random_vec(&mut rng, n);
            let r = tensor_identity_check(n, &a, &b, &x).map_err(|e| e.to_string())?;
            worst_tensor = worst_tensor.max(r.worst_relative);
        }
    }
    check(
        worst_forms <= 1e-9 && worst_special <= 1e-10 && worst_tensor <= 1e-12,
        format!(
            "forms rel={worst_forms:.2e} tol=1e-9; specializations={worst_special:.2e} tol=1e-10; identities={worst_tensor:.2e} tol=1e-12"
        ),
    )
}

fn c6_rayleigh() -> Outcome {
    let graphs = [
        ("K2", k2()),
        ("K3", Graph::complete(3).unwrap()),
        ("C4", Graph::cycle(4).unwrap()),
        ("Q3", Graph::hypercube(3).unwrap()),
    ];
    let mean = MeanFunction::logarithmic();
    let energy = Energy::shannon();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = f64::INFINITY;
    for (_, g) in &graphs {
        let n = g.n();
        for p in sample_points(n, 20, 1e-3, 4) {
            let ctx = GammaContext::new(g, &mean, &energy, &p).map_err(|e| e.to_string())?;
            let kappa = local_curvature(&ctx).map_err(|e| e.to_string())?.kappa_local;
            let (a, t) = (ctx.gamma2_matrix(), ctx.theta_matrix());
            for _ in 0..10_000 {
                let f = random_vec(&mut rng, n);
                let g1 = t.pair_form(&f);
                if g1 > 1e-12 {
                    worst = worst.min(a.pair_form(&f) / g1 - kappa);
                }
            }
        }
    }
    check(worst >= -1e-8, format!("min(Gamma2/Gamma1 - kappa1)={worst:.3e} tol=-1e-8 (K2,K3,C4,Q3 x 20 points x 1e4)"))
}

/// Drift at or below this is rounding noise and carries no order information.
const ROUNDING_DRIFT: f64 = 1e-12;

fn c7_geodesics() -> Outcome {
    let cases = [
        (k2(), vec![0.3, 0.7], vec![1.0, 0.0]),
        (Graph::cycle(4).unwrap(), vec![0.1, 0.2, 0.3, 0.4], vec![1.0, -0.5, 0.3, 0.0]),
    ];
    let means = [MeanFunction::logarithmic(), MeanFunction::arithmetic(), MeanFunction::spectral(), MeanFunction::geometric()];
    let mut drift: f64 = 0.0;
    let mut halving = f64::INFINITY;
    let mut at_rounding = Vec::new();
    let mut hessian: f64 = 0.0;
    for (g, p, f) in &cases {
        let init = GeodesicState { t: 0.0, p: p.clone(), f: f.clone() };
        let v: Vec<f64> = (0..g.n()).map(|i| (i as f64 * 0.7).sin()).collect();
        for m in &means {
            let run = |step: f64| integrate_geodesic(g, m, &init, 0.1, step).map_err(|e| e.to_string());
            let fine = run(1e-4)?;
            drift = drift.max(fine.speed_drift(g, m).map_err(|e| e.to_string())?);
            let d1 = run(1e-2)?.speed_drift(g, m).map_err(|e| e.to_string())?;
            let d2 = run(5e-3)?.speed_drift(g, m).map_err(|e| e.to_string())?;
            if d1 > ROUNDING_DRIFT {
                halving = halving.min(d1 / d2);
            } else {
                at_rounding.push(format!("{}/n={}", m.name(), g.n()));
            }
            let tr = run(1e-3)?;
            for e in [Energy::shannon(), Energy::quadratic(), Energy::linear(v.clone())] {
                hessian = hessian.max(tr.hessian_residual(g, m, &e).map_err(|e| e.to_string())?);
            }
        }
    }
    check(
        drift <= 1e-8 && halving >= 8.0 && hessian <= 1e-3,
        format!(
            "drift={drift:.2e} tol=1e-8; halving ratio={halving:.2} min=8 (drift at rounding level at step 1e-2: {}); |d2E/dt2 - Gamma2|/scale={hessian:.2e} tol=1e-3",
            at_rounding.join(",")
        ),
    )
}

fn c8_dynamics() -> Outcome {
    let m = MeanFunction::logarithmic();
    let e = Energy::shannon();
    let p0 = SimplexPoint::new(vec![0.9, 0.1]).unwrap();
    let coarse = gradient_flow(&k2(), &m, &e, &p0, 1.0, 2e-3).map_err(|e| e.to_string())?;
    let fine = gradient_flow(&k2(), &m, &e, &p0, 1.0, 1e-3).map_err(|e| e.to_string())?;
    let (a1, a2) = coarse.de_bruijn_residuals();
    let (b1, b2) = fine.de_bruijn_residuals();
    let scale = fine.dissipation.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let order = (a1 / b1).min(a2 / b2);
    let de_bruijn = b1 < 1e-3 * scale && b2 < 1e-3 * scale && order > 3.5;

    let flow = gradient_flow(&k2(), &m, &e, &p0, 3.0, 1e-3).map_err(|e| e.to_string())?;
    let cert = dissipation_certificate(&flow, 2.0).map_err(|e| e.to_string())?;

    let kappa = global_curvature(&k2(), &m, &e, &SearchParams::default()).map_err(|e| e.to_string())?.kappa0;
    let lsi = log_sobolev_check(&k2(), &m, &e, kappa, 10_000, 0).map_err(|e| e.to_string())?;
    check(
        de_bruijn && cert.pass && lsi.pass,
        format!(
            "de Bruijn residuals ({b1:.1e}, {b2:.1e}) order ratio={order:.2} min=3.5; dissipation slack={:.2e}; lsi kappa={kappa:.6} slack={:.2e} over {} samples",
            cert.worst_bound_slack, lsi.worst_slack, lsi.samples
        ),
    )
}

fn c9_products() -> Outcome {
    let m = MeanFunction::logarithmic();
    let e = Energy::shannon();
    let params = SearchParams::default();
    let c4 = c4_property_check(&m, &e, 10_000, 0).map_err(|e| e.to_string())?;
    let kc4 = global_curvature(&Graph::cycle(4).unwrap(), &m, &e, &params).map_err(|e| e.to_string())?.kappa0;
    let kk2 = global_curvature(&k2(), &m, &e, &params).map_err(|e| e.to_string())?.kappa0;
    let kq3 = global_curvature(&Graph::hypercube(3).unwrap(), &m, &e, &params).map_err(|e| e.to_string())?.kappa0;
    check(
        c4.worst_gap >= -1e-9 && kc4 >= 2.0 - 1e-4 && kq3 >= kk2 - 1e-4,
        format!("C4 gap min={:.3e} tol=-1e-9; kappa0(C4)={kc4:.8} kappa0(Q3)={kq3:.8} kappa0(K2)={kk2:.8} tol=1e-4", c4.worst_gap),
    )
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [&[&str]; 3] = [
        &["two-point", "--mean", "logarithmic", "--efct"],
        &["curvature", "--graph", "cycle4", "--global", "--seed", "7"],
        &["lsi", "--graph", "k3", "--samples", "500", "--seed", "3"],
    ];
    for (k, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let path = dir.path().join(format!("r{k}_{rep}.json"));
            let status = Command::new(env!("CARGO_BIN_EXE_mfig"))
                .args(*args)
                .arg("--out")
                .arg(&path)
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("{args:?} exited with {status}"));
            }
            outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{args:?} produced different reports"));
        }
    }
    Ok(format!("{} commands x 2 runs byte-identical", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("two-point distances", c1_distances),
        ("effectiveness", c2_effectiveness),
        ("global curvature", c3_global_curvature),
        ("costa", c4_costa),
        ("formula equivalence", c5_formula_equivalence),
        ("eigen/rayleigh consistency", c6_rayleigh),
        ("geodesic constant speed", c7_geodesics),
        ("dynamics certificates", c8_dynamics),
        ("product bounds", c9_products),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail} [{:.1}s]", k + 1, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
