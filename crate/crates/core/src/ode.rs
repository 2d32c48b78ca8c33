//! Classic fourth-order Runge-Kutta steps on flat complex state vectors.

use crate::{Result, C64};

fn axpy(y: &[C64], k: &[C64], h: f64) -> Vec<C64> {
    y.iter().zip(k).map(|(a, b)| a + b * h).collect()
}

/// One RK4 step of `y' = f(t, y)`.
pub fn rk4_step<F>(f: &F, t: f64, y: &[C64], h: f64) -> Result<Vec<C64>>
where
    F: Fn(f64, &[C64]) -> Result<Vec<C64>>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &axpy(y, &k1, 0.5 * h))?;
    let k3 = f(t + 0.5 * h, &axpy(y, &k2, 0.5 * h))?;
    let k4 = f(t + h, &axpy(y, &k3, h))?;
    Ok(y.iter()
        .enumerate()
        .map(|(i, yi)| yi + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0))
        .collect())
}

/// Number of steps of size close to `dt` covering `[0, t_end]`, and the
/// exact step that lands on `t_end`.
pub fn step_plan(dt: f64, t_end: f64) -> (usize, f64) {
    let n = (t_end / dt).round().max(1.0) as usize;
    (n, t_end / n as f64)
}
