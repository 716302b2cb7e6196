//! Birkhoff sums of the roof `f(x) = -ln x - ln(1-x) - 2` over `x -> x + α`,
//! the lattice sums `f_q`, `f̃_q`, and KS distances to the limit law.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::RotationError;

pub const EPS_GUARD: f64 = 1e-12;

/// The roof function on `(0, 1)`, extended with period 1.
pub fn roof(x: f64) -> f64 {
    let y = x - x.floor();
    -y.ln() - (1.0 - y).ln() - 2.0
}

/// `ln(1 / (2 sin πx))`.
pub fn log_sine(x: f64) -> f64 {
    -(2.0 * (PI * x).sin()).ln()
}

#[derive(Clone, Debug, Serialize)]
pub struct BirkhoffSample {
    pub q: i64,
    /// Points that were kept.
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub skipped: usize,
    /// More than one point in a thousand was skipped.
    pub flagged: bool,
}

/// `Σ_{k<q} g({x + kα})`; for negative `q`, `-Σ_{1<=k<=|q|} g({x - kα})`.
/// `None` if the orbit comes within `eps_guard` of an integer.
pub fn birkhoff_point(g: impl Fn(f64) -> f64, alpha: f64, q: i64, x: f64, eps_guard: f64) -> Option<f64> {
    let (range, sign): (Box<dyn Iterator<Item = i64>>, f64) =
        if q >= 0 { (Box::new(0..q), 1.0) } else { (Box::new(1..=-q), -1.0) };
    let step = if q >= 0 { alpha } else { -alpha };
    let mut s = 0.0;
    for k in range {
        let y = x + k as f64 * step;
        let y = y - y.floor();
        if y < eps_guard || y > 1.0 - eps_guard {
            return None;
        }
        s += g(y);
    }
    Some(sign * s)
}

/// `f^{(q)}` at each of `xs`, in parallel; output order follows `xs`.
pub fn birkhoff_sum(alpha: f64, q: i64, xs: &[f64], eps_guard: f64) -> Result<BirkhoffSample, RotationError> {
    let raw: Vec<Option<f64>> = xs.par_iter().map(|&x| birkhoff_point(roof, alpha, q, x, eps_guard)).collect();
    let mut kept_x = Vec::with_capacity(xs.len());
    let mut values = Vec::with_capacity(xs.len());
    for (&x, v) in xs.iter().zip(raw) {
        if let Some(v) = v {
            kept_x.push(x);
            values.push(v);
        }
    }
    let skipped = xs.len() - values.len();
    if values.is_empty() {
        return Err(RotationError::AllPointsSkipped { total: xs.len() });
    }
    let flagged = skipped as f64 >= 1e-3 * xs.len() as f64;
    Ok(BirkhoffSample { q, xs: kept_x, values, skipped, flagged })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FqValue {
    pub x: f64,
    /// `f_q(x) = Σ_{k<q} f(x + k/q)`.
    pub f_q: f64,
    /// `f̃_q(x) = f_q(x/q)` by direct summation.
    pub ft_direct: f64,
    /// `f̃_q(x)` from the log-Gamma closed form.
    pub ft_gamma: f64,
}

/// Direct sum `Σ_{k<q} f(x + k/q)`.
pub fn f_q(q: u64, x: f64) -> f64 {
    (0..q).map(|k| roof(x + k as f64 / q as f64)).sum()
}

/// `f̃_q(x) - ln(1/(2 sin πx))` via log-Gamma, for `x ∈ (0, 1)`; both sides
/// share the `ln(π / sin πx)` term, leaving a Stirling remainder.
pub fn ft_minus_limit(q: u64, x: f64) -> f64 {
    let qf = q as f64;
    -2.0 * qf + 2.0 * qf * qf.ln() - ln_gamma(qf + x) - ln_gamma(qf + 1.0 - x) + (2.0 * PI).ln()
}

/// `f̃_q(x) = -2q + 2q ln q - ln(Γ(q+x) Γ(q+1-x)) + ln(π / sin πx)`.
pub fn ft_gamma(q: u64, x: f64) -> f64 {
    let qf = q as f64;
    -2.0 * qf + 2.0 * qf * qf.ln() - ln_gamma(qf + x) - ln_gamma(qf + 1.0 - x) + (PI / (PI * x).sin()).ln()
}

pub fn fq_exact(q: u64, xs: &[f64]) -> Vec<FqValue> {
    xs.par_iter()
        .map(|&x| {
            let y = x - x.floor();
            FqValue { x, f_q: f_q(q, x), ft_direct: f_q(q, y / q as f64), ft_gamma: ft_gamma(q, y) }
        })
        .collect()
}

/// `sup |f̃_q - ln(1/(2 sin π·))|` over the midpoints of `n` equal cells of `(0, 1)`.
pub fn fq_sup_error(q: u64, n: usize) -> f64 {
    (0..n)
        .into_par_iter()
        .map(|i| ft_minus_limit(q, (i as f64 + 0.5) / n as f64).abs())
        .reduce(|| 0.0, f64::max)
}

/// CDF of `ν_m`, the law of `m ln(1/(2 sin πU))`.
pub fn nu_cdf(m: f64, y: f64) -> f64 {
    let base = |z: f64| {
        if z <= -std::f64::consts::LN_2 {
            0.0
        } else {
            1.0 - 2.0 / PI * (0.5 * (-z).exp()).asin()
        }
    };
    if m > 0.0 {
        base(y / m)
    } else {
        1.0 - base(y / m)
    }
}

/// One-sample KS distance of sorted data against `cdf`.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &y)| {
        let f = cdf(y);
        d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    })
}

/// Two-sample KS distance of sorted data.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// `n` uniform points in `[0, 1)` from a seeded stream.
pub fn uniform_points(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct KsReport {
    pub q: i64,
    pub m: i64,
    pub samples: usize,
    pub skipped: usize,
    pub ks: f64,
    /// `1.36/√N`, the 95% band of the one-sample statistic.
    pub noise: f64,
}

/// KS distance between the law of `f^{(m q)}` under uniform `x` and `ν_m`.
pub fn empirical_vs_nu(alpha: f64, q: i64, m: i64, samples: usize, seed: u64) -> Result<KsReport, RotationError> {
    let xs = uniform_points(seed, samples);
    let mut s = birkhoff_sum(alpha, m * q, &xs, EPS_GUARD)?;
    s.values.sort_by(f64::total_cmp);
    let ks = ks_distance(&s.values, |y| nu_cdf(m as f64, y));
    let n = s.values.len();
    Ok(KsReport { q, m, samples, skipped: s.skipped, ks, noise: 1.36 / (n as f64).sqrt() })
}
