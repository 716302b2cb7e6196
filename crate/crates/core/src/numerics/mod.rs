//! Floating-point side: the densities `h̄` and `h`, singularity-aware
//! convolution, derivative formulas, the decay probe, wrapping mod 1 and
//! numeric recovery of the leading wrapped coefficients.

pub mod convolve;
pub mod quad;
pub mod series;
pub mod taylor;
pub mod wprobe;
pub mod wrap;

use std::f64::consts::{LN_2, PI};
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

pub use convolve::{conv_derivative, num_convolve, Conv};
pub use taylor::{chebyshev_taylor, richardson};
pub use wprobe::{probe_w, Probe, WReport};
pub use wrap::{recover_a0_a1, wrap_mod1, Recovered, Wrapped};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("quadrature did not converge at x = {x}: estimate {value}, error {error}")]
    QuadratureFailure { x: f64, value: f64, error: f64 },
    #[error("derivative of order {0} is not available")]
    UnsupportedOrder(usize),
    #[error("bound {condition} violated at x = {x}")]
    BoundViolation { condition: String, x: f64 },
    #[error("tail bound {bound:e} exceeds tolerance {tol:e}")]
    TailBoundTooLoose { bound: f64, tol: f64 },
    #[error("extrapolation diverged: {0}")]
    ExtrapolationDivergence(String),
    #[error("io: {0}")]
    Io(String),
}

/// Where a function lives relative to its anchor (singular point).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Support {
    Right,
    Left,
    Both,
}

impl Support {
    pub fn flip(self) -> Self {
        match self {
            Support::Right => Support::Left,
            Support::Left => Support::Right,
            Support::Both => Support::Both,
        }
    }

    pub fn contains(self, u: f64) -> bool {
        match self {
            Support::Right => u > 0.0,
            Support::Left => u < 0.0,
            Support::Both => u != 0.0,
        }
    }
}

/// `|f(anchor + u)| <= amplitude * exp(-rate |u|)` for `|u| >= threshold`.
/// `amplitude = 0` means compact support inside `|u| < threshold`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailDecay {
    pub amplitude: f64,
    pub rate: f64,
    pub threshold: f64,
}

impl TailDecay {
    /// Distance beyond which the bound is below `eps`.
    pub fn cutoff(&self, eps: f64) -> f64 {
        if self.amplitude <= 0.0 {
            return self.threshold;
        }
        self.threshold.max((self.amplitude / eps).ln() / self.rate)
    }

    pub fn bound(&self, u: f64) -> f64 {
        self.amplitude * (-self.rate * u.abs()).exp()
    }
}

/// A real function described around its singular point.
pub trait LocalFn: Send + Sync {
    fn anchor(&self) -> f64;
    fn support(&self) -> Support;
    /// Value at `anchor + u`.
    fn local(&self, u: f64) -> f64;
    /// `k`-th derivative at `anchor + u`, when available.
    fn local_deriv(&self, _k: usize, _u: f64) -> Option<f64> {
        None
    }
    /// Behaviour `|u|^exponent` at the anchor.
    fn edge_exponent(&self) -> f64;
    fn tail(&self) -> TailDecay;
    /// Upper bound for `∫|f|`.
    fn l1(&self) -> f64;
    /// Local coordinates of jumps or kinks away from the anchor.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn eval(&self, x: f64) -> f64 {
        self.local(x - self.anchor())
    }
}

pub type FnRef = Arc<dyn LocalFn>;

/// `h̄(x) = (e^{2x} - 1)^{-1/2}` for `x > 0`.
pub fn hbar(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    1.0 / (2.0 * x).exp_m1().sqrt()
}

/// `h(x) = (2/π)(4e^{2x} - 1)^{-1/2}` for `x > -ln 2`.
pub fn h(x: f64) -> f64 {
    if x <= -LN_2 {
        return 0.0;
    }
    2.0 / PI * hbar(x + LN_2)
}

/// Integer weights `w_k` with `h̄^{(n)}(x) = sum_k w_k e^{2kx} / (e^{2x}-1)^{n+1/2}`.
pub fn hbar_weights(n: usize) -> Vec<i128> {
    let mut w = vec![1i128];
    for level in 0..n {
        let mut next = vec![0i128; w.len() + 1];
        for (k, &wk) in w.iter().enumerate() {
            let k = k as i128;
            next[k as usize] += -2 * k * wk;
            next[k as usize + 1] += (2 * k - 2 * level as i128 - 1) * wk;
        }
        w = next;
    }
    w
}

/// `h̄^{(n)}(x)`, written with `e^{-2x}` so that large `x` does not overflow.
pub fn hbar_derivative(n: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let w = hbar_weights(n);
    let nf = n as f64;
    let num: f64 = w
        .iter()
        .enumerate()
        .map(|(k, &wk)| wk as f64 * (-(2.0 * nf + 1.0 - 2.0 * k as f64) * x).exp())
        .sum();
    num / (-(-2.0 * x).exp_m1()).powf(nf + 0.5)
}

/// Which of the two densities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DensityKind {
    Hbar,
    H,
}

/// `eval_density`: exact formula, zero off the support, `+inf` at the singular point.
pub fn eval_density(kind: DensityKind, x: f64) -> f64 {
    let edge = match kind {
        DensityKind::Hbar => 0.0,
        DensityKind::H => -LN_2,
    };
    if x == edge {
        return f64::INFINITY;
    }
    match kind {
        DensityKind::Hbar => hbar(x),
        DensityKind::H => h(x),
    }
}

/// `F_t(x) = F(x/t)/|t|` for `F` one of the two densities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Density {
    pub kind: DensityKind,
    pub t: f64,
}

impl Density {
    pub fn hbar(t: f64) -> Self {
        Density { kind: DensityKind::Hbar, t }
    }

    pub fn h(t: f64) -> Self {
        Density { kind: DensityKind::H, t }
    }

    pub fn arc(self) -> FnRef {
        Arc::new(self)
    }

    fn scale(&self) -> f64 {
        match self.kind {
            DensityKind::Hbar => 1.0 / self.t.abs(),
            DensityKind::H => 2.0 / PI / self.t.abs(),
        }
    }
}

impl LocalFn for Density {
    fn anchor(&self) -> f64 {
        match self.kind {
            DensityKind::Hbar => 0.0,
            DensityKind::H => -self.t * LN_2,
        }
    }

    fn support(&self) -> Support {
        if self.t > 0.0 {
            Support::Right
        } else {
            Support::Left
        }
    }

    fn local(&self, u: f64) -> f64 {
        self.scale() * hbar(u / self.t)
    }

    fn local_deriv(&self, k: usize, u: f64) -> Option<f64> {
        if k > 12 {
            return None;
        }
        if u / self.t <= 0.0 {
            return Some(0.0);
        }
        Some(self.scale() * hbar_derivative(k, u / self.t) / self.t.powi(k as i32))
    }

    fn edge_exponent(&self) -> f64 {
        -0.5
    }

    fn tail(&self) -> TailDecay {
        // h̄(x) <= e^{-x} / sqrt(1 - e^{-2}) for x >= 1
        let c = 1.0 / (1.0 - (-2.0f64).exp()).sqrt();
        TailDecay { amplitude: self.scale() * c, rate: 1.0 / self.t.abs(), threshold: self.t.abs() }
    }

    fn l1(&self) -> f64 {
        match self.kind {
            DensityKind::Hbar => PI / 2.0,
            DensityKind::H => 1.0,
        }
    }
}

/// `x -> f(-x)`.
pub struct Reflected(pub FnRef);

impl LocalFn for Reflected {
    fn anchor(&self) -> f64 {
        -self.0.anchor()
    }
    fn support(&self) -> Support {
        self.0.support().flip()
    }
    fn local(&self, u: f64) -> f64 {
        self.0.local(-u)
    }
    fn local_deriv(&self, k: usize, u: f64) -> Option<f64> {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        self.0.local_deriv(k, -u).map(|v| s * v)
    }
    fn edge_exponent(&self) -> f64 {
        self.0.edge_exponent()
    }
    fn tail(&self) -> TailDecay {
        self.0.tail()
    }
    fn l1(&self) -> f64 {
        self.0.l1()
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints().into_iter().map(|b| -b).collect()
    }
}

type DerivFn = dyn Fn(usize, f64) -> Option<f64> + Send + Sync;

/// Function given by a closure `(k, u) -> f^{(k)}(anchor + u)`; used for test functions.
pub struct Custom {
    pub anchor: f64,
    pub support: Support,
    pub exponent: f64,
    pub tail: TailDecay,
    pub l1: f64,
    pub breaks: Vec<f64>,
    f: Box<DerivFn>,
}

impl Custom {
    pub fn new(
        anchor: f64,
        support: Support,
        exponent: f64,
        tail: TailDecay,
        l1: f64,
        f: impl Fn(usize, f64) -> Option<f64> + Send + Sync + 'static,
    ) -> Self {
        Custom { anchor, support, exponent, tail, l1, breaks: Vec::new(), f: Box::new(f) }
    }

    /// Indicator of `(0, len)`.
    pub fn indicator(len: f64) -> Self {
        let tail = TailDecay { amplitude: 0.0, rate: 1.0, threshold: len };
        let mut c = Custom::new(0.0, Support::Right, 0.0, tail, len, move |k, u| {
            (k == 0).then_some(if u > 0.0 && u < len { 1.0 } else { 0.0 })
        });
        c.breaks = vec![len];
        c
    }

    /// `u^p e^{-u}` on `u > 0`.
    pub fn poly_exp(p: i32) -> Self {
        let l1 = (1..=p.max(0)).map(|k| k as f64).product::<f64>();
        let amp = (p as f64 / 0.5).powi(p) * (-(p as f64)).exp().max(1e-300) + 1.0;
        let tail = TailDecay { amplitude: amp, rate: 0.5, threshold: 0.0 };
        Custom::new(0.0, Support::Right, p as f64, tail, l1, move |k, u| {
            if u <= 0.0 {
                return Some(0.0);
            }
            // d^k/du^k u^p e^{-u} = e^{-u} sum_j C(k,j) (-1)^{k-j} (p)_j u^{p-j}
            let mut s = 0.0;
            let mut binom = 1.0;
            for j in 0..=k {
                let falling: f64 = (0..j).map(|i| (p - i as i32) as f64).product();
                let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                s += binom * sign * falling * u.powi(p - j as i32);
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
            Some(s * (-u).exp())
        })
    }
}

impl LocalFn for Custom {
    fn anchor(&self) -> f64 {
        self.anchor
    }
    fn support(&self) -> Support {
        self.support
    }
    fn local(&self, u: f64) -> f64 {
        if !self.support.contains(u) {
            return 0.0;
        }
        (self.f)(0, u).unwrap_or(f64::NAN)
    }
    fn local_deriv(&self, k: usize, u: f64) -> Option<f64> {
        if !self.support.contains(u) {
            return Some(0.0);
        }
        (self.f)(k, u)
    }
    fn edge_exponent(&self) -> f64 {
        self.exponent
    }
    fn tail(&self) -> TailDecay {
        self.tail
    }
    fn l1(&self) -> f64 {
        self.l1
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.breaks.clone()
    }
}

/// Sampled function with singularity and tail metadata.
#[derive(Clone, Debug, Serialize)]
pub struct GridFunction {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    /// `(location, exponent)` of the singular point.
    pub sing_meta: Option<(f64, f64)>,
    pub tail_meta: Option<TailDecay>,
}

impl GridFunction {
    pub fn sample(f: &dyn LocalFn, nodes: Vec<f64>) -> Self {
        use rayon::prelude::*;
        let values = nodes.par_iter().map(|&x| f.eval(x)).collect();
        GridFunction { nodes, values, sing_meta: Some((f.anchor(), f.edge_exponent())), tail_meta: Some(f.tail()) }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), NumError> {
        let io = |e: std::io::Error| NumError::Io(e.to_string());
        writeln!(out, "x,value").map_err(io)?;
        for (x, v) in self.nodes.iter().zip(&self.values) {
            writeln!(out, "{x:.17e},{v:.17e}").map_err(io)?;
        }
        Ok(())
    }
}

/// `n` equally spaced nodes on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}
