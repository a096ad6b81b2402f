//! Deterministic global minimization over `{p in simplex : p_i >= margin}`.
//!
//! A composition lattice seeds the search, the best lattice points and a set
//! of rotated Halton points start a compass search along `e_i - e_j`, and the
//! overall minimum is reduced with a lexicographic tie-break on `p`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::simplex::{halton_points, lattice_points, random_points};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Lattice points per edge of the simplex. `None` picks 33 for `n <= 4`,
    /// 9 for `n <= 8`, and the finest lattice with at most 10^4 points above.
    pub grid_per_dim: Option<usize>,
    pub multistarts: usize,
    pub margin: f64,
    pub seed: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { grid_per_dim: None, multistarts: 16, margin: 1e-4, seed: 0 }
    }
}

impl SearchParams {
    pub fn with_margin(self, margin: f64) -> Self {
        SearchParams { margin, ..self }
    }

    /// Lattice subdivisions `k` (points per edge minus one).
    pub fn subdivisions(&self, n: usize) -> usize {
        if let Some(g) = self.grid_per_dim {
            return g.saturating_sub(1).max(1);
        }
        match n {
            0..=4 => 32,
            5..=8 => 8,
            _ => {
                let mut k = 1;
                while binomial(k + 1 + n - 1, n - 1) <= 10_000.0 {
                    k += 1;
                }
                k
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub value: f64,
    pub argmin: Vec<f64>,
    pub evaluations: usize,
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

fn better(a: (f64, &[f64]), b: (f64, &[f64])) -> bool {
    a.0 < b.0 || (a.0 == b.0 && lex_less(a.1, b.1))
}

fn clean(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

const MIN_STEP: f64 = 1e-12;
const MAX_EVALS_PER_START: usize = 40_000;

/// Compass search along `e_i - e_j`, clipping each step at the margin.
fn compass<F>(objective: &F, start: Vec<f64>, mut step: f64, margin: f64) -> (f64, Vec<f64>, usize)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = start.len();
    let mut p = start;
    let mut v = clean(objective(&p));
    let mut evals = 1;
    let mut trial = p.clone();
    while step > MIN_STEP && evals < MAX_EVALS_PER_START {
        let mut improved = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let h = step.min(p[j] - margin);
                if h <= 0.0 {
                    continue;
                }
                trial.copy_from_slice(&p);
                trial[i] += h;
                trial[j] -= h;
                if trial[j] < margin {
                    trial[j] = margin;
                }
                let tv = clean(objective(&trial));
                evals += 1;
                if tv < v {
                    v = tv;
                    p.copy_from_slice(&trial);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (v, p, evals)
}

/// Minimizes `objective` over the margin interior of the simplex with `n`
/// vertices. NaN values count as `+inf`. Deterministic for fixed params.
pub fn minimize_on_simplex<F>(n: usize, params: &SearchParams, objective: F) -> SearchResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    assert!(n >= 1);
    if n == 1 {
        let p = vec![1.0];
        return SearchResult { value: clean(objective(&p)), argmin: p, evaluations: 1 };
    }
    let margin = params.margin;
    let k = params.subdivisions(n);
    let grid = lattice_points(n, k, margin);
    let values: Vec<f64> = grid.par_iter().map(|p| clean(objective(p))).collect();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let spacing = (1.0 - n as f64 * margin) / k as f64;
    let mut starts: Vec<(Vec<f64>, f64)> = order
        .iter()
        .take(params.multistarts.max(1))
        .map(|&i| (grid[i].clone(), spacing))
        .collect();
    let extra = if n - 1 <= 16 {
        halton_points(n, params.multistarts, margin, params.seed)
    } else {
        random_points(n, params.multistarts, margin, params.seed)
            .into_iter()
            .map(Vec::from)
            .collect()
    };
    starts.extend(extra.into_iter().map(|p| (p, spacing)));

    let runs: Vec<(f64, Vec<f64>, usize)> = starts
        .into_par_iter()
        .map(|(p, h)| compass(&objective, p, h, margin))
        .collect();

    let mut evaluations = grid.len();
    let first = order[0];
    let mut best_v = values[first];
    let mut best_p = grid[first].clone();
    for (v, p, e) in runs {
        evaluations += e;
        if better((v, &p), (best_v, &best_p)) {
            best_v = v;
            best_p = p;
        }
    }
    SearchResult { value: best_v, argmin: best_p, evaluations }
}
