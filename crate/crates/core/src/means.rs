//! Mean functions `theta(s, t)` with first partial derivatives.
//!
//! Logarithmic and spectral means are evaluated through `y = ln(s / t)`,
//! computed as `ln_1p((s - t) / t)`, so the diagonal and its neighbourhood
//! need no special casing beyond a short power series.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energies::Energy;
use crate::error::{invalid, Error, Result};

type MeanFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Which argument to differentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    Analytic,
    /// Central differences with step `1e-6 * max(1, s)`, shrunk to half the
    /// argument when the argument is smaller.
    FiniteDifference,
}

#[derive(Clone)]
pub struct CustomMean {
    pub name: String,
    pub value: MeanFn,
    /// `d theta / d s`; the second partial follows from symmetry.
    pub first_partial: Option<MeanFn>,
    pub homogeneous: bool,
}

impl fmt::Debug for CustomMean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomMean").field("name", &self.name).finish()
    }
}

/// Transport information mean of a symmetric two-point energy.
#[derive(Debug, Clone)]
pub struct TransportInformation {
    energy: Energy,
    c: f64,
    e_half: f64,
    /// Cubic interpolant in `u = (x - 1/2)^2` of `phi(x) = theta(x, 1 - x)`
    /// used when `|x - 1/2| < TIM_NEAR`.
    nodes: [f64; 4],
    values: [f64; 4],
}

const TIM_NEAR: f64 = 1e-3;

impl TransportInformation {
    pub fn energy(&self) -> &Energy {
        &self.energy
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    /// `phi(x)` and `phi'(x)` off the diagonal, with `x + y = 1`.
    fn phi_direct(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let (e, g, d2) = self.energy.two_point_jet(x, y)?;
        let num = e - self.e_half;
        let phi = 2.0 * self.c * num / (g * g);
        let dphi = 2.0 * self.c * (g * g - 2.0 * num * d2) / (g * g * g);
        Ok((phi, dphi))
    }

    fn phi(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let d = x - 0.5;
        if d.abs() >= TIM_NEAR {
            return self.phi_direct(x, y);
        }
        let u = d * d;
        let (mut v, mut dv) = (0.0, 0.0);
        for k in 0..4 {
            let mut l = 1.0;
            let mut dl = 0.0;
            for m in 0..4 {
                if m == k {
                    continue;
                }
                let den = self.nodes[k] - self.nodes[m];
                dl = dl * (u - self.nodes[m]) / den + l / den;
                l *= (u - self.nodes[m]) / den;
            }
            v += self.values[k] * l;
            dv += self.values[k] * dl;
        }
        Ok((v, dv * 2.0 * d))
    }
}

#[derive(Debug, Clone)]
pub enum MeanKind {
    Arithmetic,
    Geometric,
    Logarithmic,
    SpectralGraph,
    TransportInformation(Box<TransportInformation>),
    Custom(CustomMean),
}

#[derive(Debug, Clone)]
pub struct MeanFunction {
    pub kind: MeanKind,
    pub mode: DerivativeMode,
}

impl From<MeanKind> for MeanFunction {
    fn from(kind: MeanKind) -> Self {
        let mode = match &kind {
            MeanKind::Custom(c) if c.first_partial.is_none() => DerivativeMode::FiniteDifference,
            _ => DerivativeMode::Analytic,
        };
        MeanFunction { kind, mode }
    }
}

/// `expm1(y) / y`.
fn expm1_ratio(y: f64) -> f64 {
    if y == 0.0 {
        1.0
    } else {
        y.exp_m1() / y
    }
}

const SERIES_CUTOFF: f64 = 0.5;
const SERIES_TERMS: usize = 24;

/// `(e^{-y} - 1 + y) / y^2 = sum_{k>=0} (-y)^k / (k+2)!`.
fn log_mean_partial_kernel(y: f64) -> f64 {
    if y.abs() < SERIES_CUTOFF {
        let mut term = 0.5;
        let mut s = 0.0;
        for k in 0..SERIES_TERMS {
            s += term;
            term *= -y / (k as f64 + 3.0);
        }
        s
    } else {
        ((-y).exp_m1() + y) / (y * y)
    }
}

/// `h(y) = expm1(y/2) / y` and `h'(y)`.
fn spectral_kernel(y: f64) -> (f64, f64) {
    if y.abs() < SERIES_CUTOFF {
        // h = 1/2 sum_k (y/2)^k / (k+1)!,  h' = 1/4 sum_{k>=1} k (y/2)^{k-1} / (k+1)!
        let z = y / 2.0;
        let mut h = 0.0;
        let mut dh = 0.0;
        let mut zk = 1.0;
        let mut fact = 1.0;
        for k in 0..SERIES_TERMS {
            fact *= k as f64 + 1.0;
            h += zk / fact;
            if k + 1 < SERIES_TERMS {
                dh += (k as f64 + 1.0) * zk / (fact * (k as f64 + 2.0));
            }
            zk *= z;
        }
        (0.5 * h, 0.25 * dh)
    } else {
        let a = (y / 2.0).exp_m1();
        let h = a / y;
        let dh = (0.5 * y * (y / 2.0).exp() - a) / (y * y);
        (h, dh)
    }
}

impl MeanFunction {
    pub fn arithmetic() -> Self {
        MeanKind::Arithmetic.into()
    }

    pub fn geometric() -> Self {
        MeanKind::Geometric.into()
    }

    pub fn logarithmic() -> Self {
        MeanKind::Logarithmic.into()
    }

    pub fn spectral() -> Self {
        MeanKind::SpectralGraph.into()
    }

    pub fn custom(
        name: impl Into<String>,
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        first_partial: Option<MeanFn>,
        homogeneous: bool,
    ) -> Self {
        MeanKind::Custom(CustomMean { name: name.into(), value: Arc::new(value), first_partial, homogeneous }).into()
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    /// Transport information mean of a symmetric, convex two-point energy.
    /// `c` defaults to `8 (E(0,1) - E(1/2,1/2))`, which makes the `(0,1)`
    /// transport distance equal to one.
    pub fn transport_information(energy: &Energy, c: Option<f64>) -> Result<Self> {
        energy.check_dim(2)?;
        let (e_half, _, d2_half) = energy.two_point_jet(0.5, 0.5)?;
        if !(d2_half.is_finite() && d2_half.abs() > 1e-14) {
            return Err(Error::SingularMean(format!(
                "second derivative of E(x, 1-x) at x = 1/2 is {d2_half}"
            )));
        }
        let c = match c {
            Some(c) => c,
            None => 8.0 * (energy.value(&[0.0, 1.0])? - e_half),
        };
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid(format!("transport information constant must be positive, got {c}")));
        }
        let mut tim = TransportInformation {
            energy: energy.clone(),
            c,
            e_half,
            nodes: [0.0; 4],
            values: [0.0; 4],
        };
        tim.values[0] = c / d2_half;
        for k in 1..4 {
            let d = k as f64 * TIM_NEAR;
            tim.nodes[k] = d * d;
            // phi is even about 1/2; average both sides against asymmetry in
            // rounding.
            let (a, _) = tim.phi_direct(0.5 + d, 0.5 - d)?;
            let (b, _) = tim.phi_direct(0.5 - d, 0.5 + d)?;
            tim.values[k] = 0.5 * (a + b);
        }
        Ok(MeanKind::TransportInformation(Box::new(tim)).into())
    }

    /// Parses `arithmetic | geometric | logarithmic | spectral | tim | tim:C=<c>`.
    /// The transport information mean is built from `energy` on two points.
    pub fn from_name(name: &str, energy: &Energy) -> Result<Self> {
        match name.trim() {
            "arithmetic" => Ok(Self::arithmetic()),
            "geometric" => Ok(Self::geometric()),
            "logarithmic" => Ok(Self::logarithmic()),
            "spectral" => Ok(Self::spectral()),
            "tim" => Self::transport_information(&energy.at_dim(2)?, None),
            other => {
                if let Some(c) = other.strip_prefix("tim:C=") {
                    let c: f64 = c.parse().map_err(|_| invalid(format!("bad constant in mean '{other}'")))?;
                    Self::transport_information(&energy.at_dim(2)?, Some(c))
                } else {
                    Err(invalid(format!("unknown mean '{other}'")))
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            MeanKind::Arithmetic => "arithmetic".into(),
            MeanKind::Geometric => "geometric".into(),
            MeanKind::Logarithmic => "logarithmic".into(),
            MeanKind::SpectralGraph => "spectral".into(),
            MeanKind::TransportInformation(t) => format!("tim:C={}", t.c),
            MeanKind::Custom(c) => c.name.clone(),
        }
    }

    /// Positively 1-homogeneous by construction.
    pub fn is_homogeneous(&self) -> bool {
        match &self.kind {
            MeanKind::Custom(c) => c.homogeneous,
            _ => true,
        }
    }

    pub fn theta(&self, s: f64, t: f64) -> Result<f64> {
        check_args(s, t)?;
        Ok(self.value(s, t))
    }

    pub fn partial(&self, s: f64, t: f64, which: Which) -> Result<f64> {
        check_args(s, t)?;
        Ok(match which {
            Which::First => self.d_first(s, t),
            Which::Second => self.d_first(t, s),
        })
    }

    /// `(theta, d theta/ds, d theta/dt)` for positive arguments.
    pub(crate) fn jet(&self, s: f64, t: f64) -> (f64, f64, f64) {
        (self.value(s, t), self.d_first(s, t), self.d_first(t, s))
    }

    pub(crate) fn value(&self, s: f64, t: f64) -> f64 {
        match &self.kind {
            MeanKind::Arithmetic => 0.5 * (s + t),
            MeanKind::Geometric => (s * t).sqrt(),
            MeanKind::Logarithmic => {
                let y = ((s - t) / t).ln_1p();
                t * expm1_ratio(y)
            }
            MeanKind::SpectralGraph => {
                let y = ((s - t) / t).ln_1p();
                let (h, _) = spectral_kernel(y);
                t * h * h
            }
            MeanKind::TransportInformation(tim) => {
                let sum = s + t;
                tim.phi(s / sum, t / sum).map(|(phi, _)| sum * phi).unwrap_or(f64::NAN)
            }
            MeanKind::Custom(c) => (c.value)(s, t),
        }
    }

    fn d_first(&self, s: f64, t: f64) -> f64 {
        if self.mode == DerivativeMode::FiniteDifference {
            let h = (1e-6 * s.max(1.0)).min(0.5 * s);
            return (self.value(s + h, t) - self.value(s - h, t)) / (2.0 * h);
        }
        match &self.kind {
            MeanKind::Arithmetic => 0.5,
            MeanKind::Geometric => 0.5 * (t / s).sqrt(),
            MeanKind::Logarithmic => {
                let y = ((s - t) / t).ln_1p();
                log_mean_partial_kernel(y)
            }
            MeanKind::SpectralGraph => {
                let y = ((s - t) / t).ln_1p();
                let (h, dh) = spectral_kernel(y);
                2.0 * t * h * dh / s
            }
            MeanKind::TransportInformation(tim) => {
                let sum = s + t;
                let (x, y) = (s / sum, t / sum);
                tim.phi(x, y).map(|(phi, dphi)| phi + y * dphi).unwrap_or(f64::NAN)
            }
            MeanKind::Custom(c) => match &c.first_partial {
                Some(d) => d(s, t),
                None => {
                    let h = (1e-6 * s.max(1.0)).min(0.5 * s);
                    ((c.value)(s + h, t) - (c.value)(s - h, t)) / (2.0 * h)
                }
            },
        }
    }

    /// The mean compatible with `E = sum U(p_i)`:
    /// `theta(s, t) = (s - t) / (U'(s) - U'(t))`.
    pub fn compatible_with(u: &crate::energies::EntropyKind) -> Self {
        use crate::energies::EntropyKind;
        match u {
            EntropyKind::Shannon => Self::logarithmic(),
            EntropyKind::Quadratic => Self::custom("constant", |_, _| 1.0, Some(Arc::new(|_, _| 0.0)), false),
            EntropyKind::Custom(c) => {
                let (du, d2u) = (c.du.clone(), c.d2u.clone());
                Self::custom(
                    format!("compatible:{}", c.name),
                    move |s, t| {
                        let den = du(s) - du(t);
                        if den == 0.0 || (s - t).abs() < 1e-9 * s.max(t) {
                            1.0 / d2u(0.5 * (s + t))
                        } else {
                            (s - t) / den
                        }
                    },
                    None,
                    false,
                )
            }
        }
    }
}

fn check_args(s: f64, t: f64) -> Result<()> {
    if s > 0.0 && t > 0.0 && s.is_finite() && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("mean arguments ({s}, {t}) must be positive")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcaveHomogeneityReport {
    pub samples: usize,
    /// Largest `|s d_s theta + t d_t theta - theta| / theta`.
    pub worst_euler: f64,
    /// Most negative `s d_u theta(u,v) + t d_v theta(u,v) - theta(s,t)`.
    pub worst_concavity: f64,
    pub pass: bool,
}

/// Samples the Euler identity and the tangent-plane inequality of a concave
/// 1-homogeneous mean on `(0, 1]^4`.
pub fn check_concave_homogeneous(m: &MeanFunction, samples: usize, seed: u64) -> ConcaveHomogeneityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = || 1.0 - rng.random::<f64>();
    let mut worst_euler: f64 = 0.0;
    let mut worst_concavity = f64::INFINITY;
    for _ in 0..samples {
        let (s, t, u, v) = (unit(), unit(), unit(), unit());
        let (th, ds, dt) = m.jet(s, t);
        worst_euler = worst_euler.max((s * ds + t * dt - th).abs() / th);
        let (_, du, dv) = m.jet(u, v);
        worst_concavity = worst_concavity.min(s * du + t * dv - th);
    }
    ConcaveHomogeneityReport {
        samples,
        worst_euler,
        worst_concavity,
        pass: worst_euler <= 1e-9 && worst_concavity >= -1e-10,
    }
}
