//! Taylor coefficients from samples (Chebyshev interpolation) and Richardson
//! extrapolation with known exponents.

use std::f64::consts::PI;

use super::NumError;

/// Taylor coefficients `g^{(n)}(0)/n!`, `n < count`, of a function analytic on
/// `[0, x_max]`, from its Chebyshev interpolant at `nodes` points.
pub fn chebyshev_taylor(g: impl Fn(f64) -> f64 + Sync, x_max: f64, nodes: usize, count: usize) -> Vec<f64> {
    use rayon::prelude::*;
    let m = nodes;
    let theta: Vec<f64> = (0..m).map(|j| PI * (j as f64 + 0.5) / m as f64).collect();
    let vals: Vec<f64> = theta.par_iter().map(|t| g(0.5 * x_max * (1.0 + t.cos()))).collect();
    let cheb: Vec<f64> = (0..m)
        .map(|k| {
            let s: f64 = vals.iter().zip(&theta).map(|(v, t)| v * (k as f64 * t).cos()).sum();
            s * 2.0 / m as f64 * if k == 0 { 0.5 } else { 1.0 }
        })
        .collect();
    // cut where the coefficients reach rounding level for three in a row;
    // T_k^{(n)} grows like k^{2n}, so stray noise past that point must go
    let top = cheb.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let tol = 256.0 * f64::EPSILON * top;
    let keep = (1..m).find(|&k| cheb[k..(k + 3).min(m)].iter().all(|c| c.abs() < tol)).unwrap_or(m);
    let cheb = &cheb[..keep];
    // T_k^{(n)}(-1) = (-1)^{k+n} prod_{j<n} (k^2 - j^2)/(2j + 1)
    let scale = 2.0 / x_max;
    (0..count)
        .map(|n| {
            let mut s = 0.0;
            for (k, c) in cheb.iter().enumerate() {
                let mut d = if (k + n) % 2 == 0 { 1.0 } else { -1.0 };
                for j in 0..n {
                    d *= ((k * k) as f64 - (j * j) as f64) / (2 * j + 1) as f64;
                }
                s += c * d;
            }
            let fact: f64 = (1..=n).map(|i| i as f64).product();
            s * scale.powi(n as i32) / fact
        })
        .collect()
}

/// Richardson table for samples `values[j]` taken at `x0 * 2^{-j}`, removing
/// the error terms `x^{e}` for each `e` in `exponents` in turn. Returns the
/// final estimate and the spread of the last column.
pub fn richardson(values: &[f64], exponents: &[f64]) -> Result<(f64, f64), NumError> {
    if values.is_empty() {
        return Err(NumError::ExtrapolationDivergence("no samples".into()));
    }
    let mut col = values.to_vec();
    let mut spread = f64::INFINITY;
    for &e in exponents.iter().take(values.len() - 1) {
        let f = 2f64.powf(e);
        let next: Vec<f64> = col.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
        if next.len() >= 2 {
            spread = (next[next.len() - 1] - next[next.len() - 2]).abs();
        }
        col = next;
    }
    let est = *col.last().expect("non-empty");
    if !est.is_finite() {
        return Err(NumError::ExtrapolationDivergence("non-finite estimate".into()));
    }
    Ok((est, spread))
}
