//! Classical fixed-step Runge-Kutta for autonomous systems.

use crate::error::Result;

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// One step of the classical fourth-order Runge-Kutta scheme.
pub fn rk4_step<F>(rhs: &F, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let k1 = rhs(y)?;
    let k2 = rhs(&axpy(y, 0.5 * h, &k1))?;
    let k3 = rhs(&axpy(y, 0.5 * h, &k2))?;
    let k4 = rhs(&axpy(y, h, &k3))?;
    Ok((0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Grid `0, step, 2 step, ...` up to `t_end`, the last interval possibly shorter.
pub fn time_grid(t_end: f64, step: f64) -> Vec<f64> {
    let full = (t_end / step * (1.0 + 1e-12)).floor() as usize;
    let mut ts: Vec<f64> = (0..=full).map(|k| k as f64 * step).collect();
    if let Some(&last) = ts.last() {
        if t_end - last > 1e-12 * step {
            ts.push(t_end);
        } else if let Some(l) = ts.last_mut() {
            *l = l.min(t_end);
        }
    }
    ts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourth_order_on_exponential() {
        let rhs = |y: &[f64]| Ok(vec![-y[0]]);
        let err = |h: f64| {
            let n = (1.0 / h).round() as usize;
            let mut y = vec![1.0];
            for _ in 0..n {
                y = rk4_step(&rhs, &y, h).unwrap();
            }
            (y[0] - (-1.0f64).exp()).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!(ratio > 14.0 && ratio < 18.0, "{ratio}");
    }

    #[test]
    fn grid_ends_at_t_end() {
        let g = time_grid(0.1, 1e-4);
        assert_eq!(g.len(), 1001);
        assert!((g[1000] - 0.1).abs() < 1e-15);
        let g = time_grid(0.25, 0.1);
        assert_eq!(g, vec![0.0, 0.1, 0.2, 0.25]);
    }
}
