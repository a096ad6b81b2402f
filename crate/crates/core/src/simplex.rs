//! Interior points of the probability simplex and deterministic samplers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Points closer than this to the boundary are rejected by curvature and
/// geodesic code.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

/// Strictly positive probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(invalid("simplex point must be nonempty"));
        }
        if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::Domain(format!("coordinate {x} is not strictly positive")));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > 1e-10 * p.len() as f64 {
            return Err(invalid(format!("coordinates sum to {s}, not 1")));
        }
        Ok(Self(p))
    }

    /// Rescales a positive vector onto the simplex.
    pub fn normalized(mut p: Vec<f64>) -> Result<Self> {
        let s: f64 = p.iter().sum();
        if !(s > 0.0) {
            return Err(invalid("cannot normalize a vector with nonpositive sum"));
        }
        p.iter_mut().for_each(|x| *x /= s);
        Self::new(p)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// `(x, 1 - x)`.
    pub fn two_point(x: f64) -> Result<Self> {
        Self::new(vec![x, 1.0 - x])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Errors when any coordinate is below `margin`.
    pub fn check_interior(&self, margin: f64) -> Result<()> {
        let min = self.min();
        if min < margin {
            return Err(Error::Boundary { min, margin });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for SimplexPoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SimplexPoint> for Vec<f64> {
    fn from(p: SimplexPoint) -> Self {
        p.0
    }
}

impl AsRef<[f64]> for SimplexPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Maps a point `q` of the closed simplex into `{p_i >= margin}`.
pub fn shrink_to_margin(q: &[f64], margin: f64) -> Vec<f64> {
    let n = q.len() as f64;
    let scale = 1.0 - n * margin;
    q.iter().map(|x| margin + scale * x).collect()
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    inv = r;
    inv
}

/// Uniform spacings of sorted cube coordinates: maps `[0,1)^{n-1}` onto the
/// simplex with `n` vertices.
fn cube_to_simplex(u: &mut [f64]) -> Vec<f64> {
    u.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(u.len() + 1);
    let mut prev = 0.0;
    for &x in u.iter() {
        out.push(x - prev);
        prev = x;
    }
    out.push(1.0 - prev);
    out
}

/// Cranley-Patterson rotated Halton points on the simplex interior
/// `{p_i >= margin}`. Deterministic given `seed`.
pub fn halton_points(n: usize, count: usize, margin: f64, seed: u64) -> Vec<Vec<f64>> {
    assert!(n >= 1 && n - 1 <= PRIMES.len(), "halton sampler supports up to 17 vertices");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..n - 1).map(|_| rng.random::<f64>()).collect();
    (1..=count as u64)
        .map(|i| {
            let mut u: Vec<f64> = (0..n - 1)
                .map(|d| (radical_inverse(i, PRIMES[d]) + shift[d]).fract())
                .collect();
            shrink_to_margin(&cube_to_simplex(&mut u), margin)
        })
        .collect()
}

/// Uniformly distributed random interior points (flat Dirichlet), pushed into
/// `{p_i >= margin}`.
pub fn random_points(n: usize, count: usize, margin: f64, seed: u64) -> Vec<SimplexPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_point(&mut rng, n, margin))
        .collect()
}

pub fn random_point(rng: &mut impl Rng, n: usize, margin: f64) -> SimplexPoint {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    let q: Vec<f64> = e.iter().map(|x| x / s).collect();
    let p = shrink_to_margin(&q, margin);
    // Renormalize to absorb rounding in the affine map.
    SimplexPoint::normalized(p).expect("positive by construction")
}

/// All points `margin + (1 - n*margin) * c / k` with `c` a composition of `k`
/// into `n` nonnegative parts, in lexicographic order of `c`.
pub fn lattice_points(n: usize, k: usize, margin: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut c = vec![0usize; n];
    fn rec(idx: usize, left: usize, c: &mut Vec<usize>, k: usize, margin: f64, out: &mut Vec<Vec<f64>>) {
        let n = c.len();
        if idx == n - 1 {
            c[idx] = left;
            let q: Vec<f64> = c.iter().map(|&x| x as f64 / k as f64).collect();
            out.push(shrink_to_margin(&q, margin));
            return;
        }
        for v in 0..=left {
            c[idx] = v;
            rec(idx + 1, left - v, c, k, margin, out);
        }
    }
    rec(0, k, &mut c, k, margin, &mut out);
    out
}
