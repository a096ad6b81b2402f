//! Energy functionals on the positive orthant with exact derivatives.
//!
//! Energies are defined on all of `R_+^n`, so partial derivatives are the
//! Euclidean ones. The interaction energy is `1/2 sum_{i,j} W_ij p_i p_j`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::SymmetricMatrix;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied convex `U` with its first two derivatives.
#[derive(Clone)]
pub struct CustomEntropy {
    pub name: String,
    pub u: ScalarFn,
    pub du: ScalarFn,
    pub d2u: ScalarFn,
}

impl fmt::Debug for CustomEntropy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomEntropy").field("name", &self.name).finish()
    }
}

/// The scalar function `U` in `E(p) = sum_i U(p_i)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyKind {
    /// `U(x) = x log x`, with `0 log 0 = 0`.
    Shannon,
    /// `U(x) = x^2 / 2`.
    Quadratic,
    #[serde(skip)]
    Custom(CustomEntropy),
}

impl EntropyKind {
    pub fn custom(
        name: impl Into<String>,
        u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        du: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2u: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        EntropyKind::Custom(CustomEntropy {
            name: name.into(),
            u: Arc::new(u),
            du: Arc::new(du),
            d2u: Arc::new(d2u),
        })
    }

    pub fn u(&self, x: f64) -> Result<f64> {
        match self {
            EntropyKind::Shannon => {
                if x < 0.0 {
                    Err(Error::Domain(format!("x log x undefined at {x}")))
                } else if x == 0.0 {
                    Ok(0.0)
                } else {
                    Ok(x * x.ln())
                }
            }
            EntropyKind::Quadratic => Ok(0.5 * x * x),
            EntropyKind::Custom(c) => Ok((c.u)(x)),
        }
    }

    pub fn du(&self, x: f64) -> Result<f64> {
        match self {
            EntropyKind::Shannon => {
                positive(x)?;
                Ok(x.ln() + 1.0)
            }
            EntropyKind::Quadratic => Ok(x),
            EntropyKind::Custom(c) => Ok((c.du)(x)),
        }
    }

    pub fn d2u(&self, x: f64) -> Result<f64> {
        match self {
            EntropyKind::Shannon => {
                positive(x)?;
                Ok(1.0 / x)
            }
            EntropyKind::Quadratic => Ok(1.0),
            EntropyKind::Custom(c) => Ok((c.d2u)(x)),
        }
    }

    /// Checks `U'' >= -1e-12` on a uniform grid of `(0, 1)`.
    pub fn check_convex(&self) -> Result<()> {
        for k in 1..1000 {
            let x = k as f64 / 1000.0;
            let v = self.d2u(x)?;
            if !(v >= -1e-12) {
                return Err(invalid(format!("U''({x}) = {v} is negative")));
            }
        }
        Ok(())
    }
}

fn positive(x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("argument {x} is not strictly positive")))
    }
}

/// Energy functional `E(p)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Energy {
    /// `sum_i V_i p_i`.
    Linear {
        #[serde(rename = "V")]
        v: Vec<f64>,
    },
    /// `1/2 sum_{i,j} W_ij p_i p_j`.
    Interaction {
        #[serde(rename = "W")]
        w: Vec<Vec<f64>>,
    },
    /// `sum_i U(p_i)`.
    Entropy {
        #[serde(rename = "U")]
        u: EntropyKind,
    },
    Sum { parts: Vec<Energy> },
}

impl Energy {
    pub fn linear(v: Vec<f64>) -> Self {
        Energy::Linear { v }
    }

    pub fn interaction(w: Vec<Vec<f64>>) -> Result<Self> {
        let e = Energy::Interaction { w };
        e.validate()?;
        Ok(e)
    }

    pub fn shannon() -> Self {
        Energy::Entropy { u: EntropyKind::Shannon }
    }

    pub fn quadratic() -> Self {
        Energy::Entropy { u: EntropyKind::Quadratic }
    }

    pub fn entropy(u: EntropyKind) -> Self {
        Energy::Entropy { u }
    }

    pub fn sum(parts: Vec<Energy>) -> Result<Self> {
        let e = Energy::Sum { parts };
        e.validate()?;
        Ok(e)
    }

    /// Parses the JSON config form, or the shorthands `shannon` and
    /// `quadratic`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let e = match t {
            "shannon" => Energy::shannon(),
            "quadratic" => Energy::quadratic(),
            _ => serde_json::from_str(t).map_err(|e| invalid(format!("energy config: {e}")))?,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Energy::Linear { v } => {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(invalid("linear potential must be nonempty and finite"));
                }
            }
            Energy::Interaction { w } => {
                let n = w.len();
                if n == 0 || w.iter().any(|r| r.len() != n) {
                    return Err(invalid("interaction matrix must be square and nonempty"));
                }
                for i in 0..n {
                    for j in 0..n {
                        if w[i][j] != w[j][i] || !w[i][j].is_finite() {
                            return Err(invalid(format!("interaction matrix not symmetric at ({i},{j})")));
                        }
                    }
                }
            }
            Energy::Entropy { u } => u.check_convex()?,
            Energy::Sum { parts } => {
                if parts.is_empty() {
                    return Err(invalid("sum energy needs at least one part"));
                }
                for p in parts {
                    p.validate()?;
                }
                self.dim()?;
            }
        }
        Ok(())
    }

    /// Fixed dimension, or `None` for entropies which extend to any `n`.
    pub fn dim(&self) -> Result<Option<usize>> {
        Ok(match self {
            Energy::Linear { v } => Some(v.len()),
            Energy::Interaction { w } => Some(w.len()),
            Energy::Entropy { .. } => None,
            Energy::Sum { parts } => {
                let mut d = None;
                for p in parts {
                    match (d, p.dim()?) {
                        (Some(a), Some(b)) if a != b => {
                            return Err(invalid(format!("sum parts have dimensions {a} and {b}")))
                        }
                        (None, b) => d = b,
                        _ => {}
                    }
                }
                d
            }
        })
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        match self.dim()? {
            Some(d) if d != n => Err(invalid(format!("energy has dimension {d}, point has {n}"))),
            _ => Ok(()),
        }
    }

    /// True if every part is an entropy.
    pub fn is_entropy(&self) -> bool {
        match self {
            Energy::Entropy { .. } => true,
            Energy::Sum { parts } => parts.iter().all(Energy::is_entropy),
            _ => false,
        }
    }

    pub fn value(&self, p: &[f64]) -> Result<f64> {
        self.check_dim(p.len())?;
        self.value_unchecked(p)
    }

    fn value_unchecked(&self, p: &[f64]) -> Result<f64> {
        Ok(match self {
            Energy::Linear { v } => v.iter().zip(p).map(|(a, b)| a * b).sum(),
            Energy::Interaction { w } => {
                let mut s = 0.0;
                for i in 0..p.len() {
                    for j in 0..p.len() {
                        s += w[i][j] * p[i] * p[j];
                    }
                }
                0.5 * s
            }
            Energy::Entropy { u } => {
                let mut s = 0.0;
                for &x in p {
                    s += u.u(x)?;
                }
                s
            }
            Energy::Sum { parts } => {
                let mut s = 0.0;
                for e in parts {
                    s += e.value_unchecked(p)?;
                }
                s
            }
        })
    }

    pub fn gradient(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(p.len())?;
        let mut g = vec![0.0; p.len()];
        self.add_gradient(p, &mut g)?;
        Ok(g)
    }

    fn add_gradient(&self, p: &[f64], g: &mut [f64]) -> Result<()> {
        match self {
            Energy::Linear { v } => g.iter_mut().zip(v).for_each(|(a, b)| *a += b),
            Energy::Interaction { w } => {
                for i in 0..p.len() {
                    g[i] += w[i].iter().zip(p).map(|(a, b)| a * b).sum::<f64>();
                }
            }
            Energy::Entropy { u } => {
                for (gi, &x) in g.iter_mut().zip(p) {
                    *gi += u.du(x)?;
                }
            }
            Energy::Sum { parts } => {
                for e in parts {
                    e.add_gradient(p, g)?;
                }
            }
        }
        Ok(())
    }

    /// Row-major dense Hessian.
    pub(crate) fn hessian_dense(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(p.len())?;
        let n = p.len();
        let mut h = vec![0.0; n * n];
        self.add_hessian(p, &mut h)?;
        Ok(h)
    }

    fn add_hessian(&self, p: &[f64], h: &mut [f64]) -> Result<()> {
        let n = p.len();
        match self {
            Energy::Linear { .. } => {}
            Energy::Interaction { w } => {
                for i in 0..n {
                    for j in 0..n {
                        h[i * n + j] += w[i][j];
                    }
                }
            }
            Energy::Entropy { u } => {
                for i in 0..n {
                    h[i * n + i] += u.d2u(p[i])?;
                }
            }
            Energy::Sum { parts } => {
                for e in parts {
                    e.add_hessian(p, h)?;
                }
            }
        }
        Ok(())
    }

    pub fn second_partials(&self, p: &[f64]) -> Result<SymmetricMatrix> {
        let h = self.hessian_dense(p)?;
        let n = p.len();
        Ok(SymmetricMatrix::from_fn(n, |i, j| h[i * n + j]))
    }

    /// `(E, dE/dx, d^2E/dx^2)` along `x -> (x, 1 - x)` at the point `(x, y)`
    /// with `x + y = 1`. Taking `y` explicitly keeps precision near `x = 1`.
    pub fn two_point_jet(&self, x: f64, y: f64) -> Result<(f64, f64, f64)> {
        self.check_dim(2)?;
        let p = [x, y];
        let e = self.value_unchecked(&p)?;
        let mut g = [0.0; 2];
        self.add_gradient(&p, &mut g)?;
        let mut h = [0.0; 4];
        self.add_hessian(&p, &mut h)?;
        Ok((e, g[0] - g[1], h[0] - 2.0 * h[1] + h[3]))
    }

    /// `E(x, 1 - x) = E(1 - x, x)` on a grid, to `tol`.
    pub fn is_symmetric_two_point(&self, tol: f64) -> Result<bool> {
        self.check_dim(2)?;
        for k in 1..100 {
            let x = k as f64 / 100.0;
            let a = self.value_unchecked(&[x, 1.0 - x])?;
            let b = self.value_unchecked(&[1.0 - x, x])?;
            if (a - b).abs() > tol * (1.0 + a.abs()) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Same family at dimension `n`; only entropies extend canonically.
    pub fn at_dim(&self, n: usize) -> Result<Energy> {
        match self.dim()? {
            None => Ok(self.clone()),
            Some(d) if d == n => Ok(self.clone()),
            Some(d) => Err(invalid(format!(
                "energy of dimension {d} has no canonical extension to {n} vertices; supply it explicitly"
            ))),
        }
    }
}
