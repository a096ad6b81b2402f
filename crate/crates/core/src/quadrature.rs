//! Adaptive Gauss-Kronrod quadrature, with geometric panels toward the
//! endpoints for integrable endpoint singularities.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Kronrod estimate and `|Kronrod - Gauss|` on `[a, b]`.
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

const MAX_DEPTH: usize = 50;

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> Result<f64> {
    let (k, err) = gk15(f, a, b);
    if !k.is_finite() {
        return Err(Error::Divergence(format!("integrand is not finite on [{a:e}, {b:e}]")));
    }
    if err <= tol || depth >= MAX_DEPTH || (b - a) <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
        return Ok(k);
    }
    let m = 0.5 * (a + b);
    Ok(adapt(f, a, m, 0.5 * tol, depth + 1)? + adapt(f, m, b, 0.5 * tol, depth + 1)?)
}

/// Adaptive Gauss-Kronrod on a finite interval with a smooth integrand.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    adapt(&f, a, b, tol, 0)
}

/// Geometric panel levels before an endpoint tail is declared divergent.
pub const MAX_LEVELS: usize = 60;

/// Integrates `g(u)` over `(0, w]` where `g` may blow up integrably at `0`,
/// using panels `[w 2^{-k-1}, w 2^{-k}]`. The remaining tail is extrapolated
/// geometrically from the ratio of successive panels.
fn endpoint_tail(g: &dyn Fn(f64) -> f64, w: f64, tol: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut prev_est: Option<f64> = None;
    for k in 0..MAX_LEVELS {
        let hi = w * 0.5f64.powi(k as i32);
        let lo = 0.5 * hi;
        let c = adapt(g, lo, hi, tol * 1e-2, 0)?;
        total += c;
        if c == 0.0 {
            return Ok(total);
        }
        if let Some(p) = prev {
            let r = if p != 0.0 { c / p } else { 0.0 };
            if (0.0..0.95).contains(&r) {
                let est = total + c * r / (1.0 - r);
                if let Some(pe) = prev_est {
                    if (est - pe).abs() < 0.25 * tol {
                        return Ok(est);
                    }
                }
                prev_est = Some(est);
            } else {
                prev_est = None;
            }
        }
        prev = Some(c);
    }
    Err(Error::Divergence(format!(
        "endpoint contributions did not decay after {MAX_LEVELS} geometric levels"
    )))
}

/// `int_{x1}^{x2} f(x, 1 - x) dx` for `0 <= x1 <= x2 <= 1`, allowing
/// integrable singularities at both endpoints. The second argument is passed
/// as the exact distance to the right end so points near `x = 1` keep full
/// relative precision.
pub fn integrate_segment(f: impl Fn(f64, f64) -> f64, x1: f64, x2: f64, tol: f64) -> Result<f64> {
    if !(0.0 <= x1 && x1 <= x2 && x2 <= 1.0) {
        return Err(crate::error::invalid(format!("need 0 <= x1 <= x2 <= 1, got ({x1}, {x2})")));
    }
    if x1 == x2 {
        return Ok(0.0);
    }
    let w = 0.5 * (x2 - x1);
    let (y1, y2) = (1.0 - x1, 1.0 - x2);
    let left = |u: f64| f(x1 + u, y1 - u);
    let right = |u: f64| f(x2 - u, y2 + u);
    Ok(endpoint_tail(&left, w, 0.5 * tol)? + endpoint_tail(&right, w, 0.5 * tol)?)
}
