//! `f * g` evaluated pointwise by quadrature in the local coordinates of the
//! two singular points.

use std::sync::Arc;

use rayon::prelude::*;

use super::quad::{integrate, integrate_edges, QuadResult};
use super::{FnRef, GridFunction, LocalFn, NumError, Support, TailDecay};

const ABS_TOL: f64 = 1e-15;
const REL_TOL: f64 = 1e-13;

/// The convolution of two local functions, anchored at the sum of the anchors.
#[derive(Clone)]
pub struct Conv {
    pub f: FnRef,
    pub g: FnRef,
}

impl Conv {
    pub fn new(f: FnRef, g: FnRef) -> Self {
        Conv { f, g }
    }

    pub fn arc(f: FnRef, g: FnRef) -> FnRef {
        Arc::new(Conv::new(f, g))
    }

    fn tail_len(&self) -> f64 {
        let eps = 1e-18;
        self.f.tail().cutoff(eps).max(self.g.tail().cutoff(eps))
    }

    /// `∫ f(s) g(u - s) ds` with the error estimate.
    pub fn try_local(&self, u: f64) -> Result<f64, NumError> {
        let r = self.integral(u, |s, r| self.f.local(s) * self.g.local(r));
        if r.error > 1e3 * (ABS_TOL + REL_TOL * r.value.abs()) && r.error > 1e-9 * (1.0 + r.value.abs()) {
            return Err(NumError::QuadratureFailure { x: self.anchor() + u, value: r.value, error: r.error });
        }
        Ok(r.value)
    }

    /// Integrates `integrand(s, u - s)` over the part of the real line where both
    /// `f.local(s)` and `g.local(u - s)` can be non-zero, splitting at the
    /// singular points `s = 0` and `s = u`.
    fn integral(&self, u: f64, integrand: impl Fn(f64, f64) -> f64) -> QuadResult {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        match self.f.support() {
            Support::Right => lo = lo.max(0.0),
            Support::Left => hi = hi.min(0.0),
            Support::Both => {}
        }
        match self.g.support() {
            Support::Right => hi = hi.min(u),
            Support::Left => lo = lo.max(u),
            Support::Both => {}
        }
        if lo >= hi {
            return QuadResult::zero();
        }
        let l = self.tail_len() + u.abs();
        let mut pts: Vec<f64> = vec![lo, hi];
        let fb = self.f.breakpoints();
        let gb = self.g.breakpoints().into_iter().map(|b| u - b);
        for p in [0.0, u].into_iter().chain(fb).chain(gb) {
            if p > lo && p < hi {
                pts.push(p);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let sing = |p: f64| p == 0.0 || p == u;
        let piece = |a: f64, b: f64| pair_edges(&integrand, u, a, b, sing(a), sing(b));
        let mut total = QuadResult::zero();
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            total = total.plus(match (a.is_finite(), b.is_finite()) {
                (true, true) => piece(a, b),
                (true, false) => piece(a, a + 1.0).plus(piece(a + 1.0, a + 1.0 + l)),
                (false, true) => piece(b - 1.0, b).plus(piece(b - 1.0 - l, b - 1.0)),
                (false, false) => unreachable!("0 lies between two infinite ends"),
            });
        }
        total
    }

    /// `k`-th derivative in local coordinates.
    pub fn try_local_deriv(&self, k: usize, u: f64) -> Result<f64, NumError> {
        if k == 0 {
            return self.try_local(u);
        }
        if k > 4 {
            return Err(NumError::UnsupportedOrder(k));
        }
        let (f, g) = (&self.f, &self.g);
        let need = |x: Option<f64>| x.ok_or(NumError::UnsupportedOrder(k));
        match (f.support(), g.support()) {
            (Support::Right, Support::Right) => {
                if u <= 0.0 {
                    return Ok(0.0);
                }
                // fixed split point z0 = u/2: two integrals plus boundary terms
                let z0 = 0.5 * u;
                let i1 = integrate_edges(&|s| f.local(s) * g.local_deriv(k, u - s).unwrap_or(f64::NAN), 0.0, z0, true, false, ABS_TOL, REL_TOL);
                let i2 = integrate_edges(&|s| g.local(s) * f.local_deriv(k, u - s).unwrap_or(f64::NAN), 0.0, u - z0, true, false, ABS_TOL, REL_TOL);
                let mut bnd = 0.0;
                for l in 0..k {
                    bnd += need(f.local_deriv(l, z0))? * need(g.local_deriv(k - 1 - l, u - z0))?;
                }
                let v = i1.value + i2.value + bnd;
                if v.is_nan() {
                    return Err(NumError::UnsupportedOrder(k));
                }
                Ok(v)
            }
            (Support::Right, Support::Left) => {
                let v = if u < 0.0 {
                    self.integral(u, |s, r| f.local(s) * g.local_deriv(k, r).unwrap_or(f64::NAN)).value
                } else {
                    self.integral(u, |s, r| f.local_deriv(k, s).unwrap_or(f64::NAN) * g.local(r)).value
                };
                if v.is_nan() {
                    return Err(NumError::UnsupportedOrder(k));
                }
                Ok(v)
            }
            (Support::Left, Support::Right) => Conv::new(g.clone(), f.clone()).try_local_deriv(k, u),
            (Support::Left, Support::Left) => {
                let r = Conv::new(Arc::new(super::Reflected(f.clone())), Arc::new(super::Reflected(g.clone())));
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                Ok(s * r.try_local_deriv(k, -u)?)
            }
            _ => Err(NumError::UnsupportedOrder(k)),
        }
    }
}

/// `∫_a^b h(s, u - s) ds` with `s = end ± w^2` at singular ends; the second
/// argument is formed from the offset so it stays exact near `s = u`.
fn pair_edges(h: &impl Fn(f64, f64) -> f64, u: f64, a: f64, b: f64, sing_a: bool, sing_b: bool) -> QuadResult {
    if b <= a {
        return QuadResult::zero();
    }
    match (sing_a, sing_b) {
        (true, true) => {
            let m = 0.5 * (a + b);
            pair_edges(h, u, a, m, true, false).plus(pair_edges(h, u, m, b, false, true))
        }
        (true, false) => {
            let ua = u - a;
            integrate(&|w: f64| 2.0 * w * h(a + w * w, ua - w * w), 0.0, (b - a).sqrt(), ABS_TOL, REL_TOL)
        }
        (false, true) => {
            let ub = u - b;
            integrate(&|w: f64| 2.0 * w * h(b - w * w, ub + w * w), 0.0, (b - a).sqrt(), ABS_TOL, REL_TOL)
        }
        (false, false) => integrate(&|s: f64| h(s, u - s), a, b, ABS_TOL, REL_TOL),
    }
}

impl LocalFn for Conv {
    fn anchor(&self) -> f64 {
        self.f.anchor() + self.g.anchor()
    }

    fn support(&self) -> Support {
        match (self.f.support(), self.g.support()) {
            (Support::Right, Support::Right) => Support::Right,
            (Support::Left, Support::Left) => Support::Left,
            _ => Support::Both,
        }
    }

    fn local(&self, u: f64) -> f64 {
        if u == 0.0 && self.support() == Support::Both && self.edge_exponent() <= 0.0 {
            return f64::INFINITY;
        }
        self.try_local(u).unwrap_or_else(|e| match e {
            NumError::QuadratureFailure { value, .. } => value,
            _ => f64::NAN,
        })
    }

    fn local_deriv(&self, k: usize, u: f64) -> Option<f64> {
        self.try_local_deriv(k, u).ok()
    }

    fn edge_exponent(&self) -> f64 {
        self.f.edge_exponent() + self.g.edge_exponent() + 1.0
    }

    fn tail(&self) -> TailDecay {
        // |f*g(u)| <= sup_{|s|>|u|/2}|f| ∫|g| + sup_{|s|>|u|/2}|g| ∫|f|
        let (tf, tg) = (self.f.tail(), self.g.tail());
        let rate = match (tf.amplitude > 0.0, tg.amplitude > 0.0) {
            (true, true) => tf.rate.min(tg.rate),
            (true, false) => tf.rate,
            (false, true) => tg.rate,
            (false, false) => 1.0,
        };
        TailDecay {
            amplitude: tf.amplitude * self.g.l1() + tg.amplitude * self.f.l1(),
            rate: 0.5 * rate,
            threshold: 2.0 * tf.threshold.max(tg.threshold),
        }
    }

    fn l1(&self) -> f64 {
        self.f.l1() * self.g.l1()
    }

    fn breakpoints(&self) -> Vec<f64> {
        let (fb, gb) = (self.f.breakpoints(), self.g.breakpoints());
        let mut out: Vec<f64> = fb.iter().chain(&gb).copied().collect();
        out.extend(fb.iter().flat_map(|a| gb.iter().map(move |b| a + b)));
        out
    }
}

/// Samples `f * g` at `nodes` (global coordinates), in parallel.
pub fn num_convolve(f: FnRef, g: FnRef, nodes: &[f64]) -> Result<GridFunction, NumError> {
    let c = Conv::new(f, g);
    let a = c.anchor();
    let values = nodes
        .par_iter()
        .map(|&x| if x == a { Ok(f64::INFINITY) } else { c.try_local(x - a) })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GridFunction { nodes: nodes.to_vec(), values, sing_meta: Some((a, c.edge_exponent())), tail_meta: Some(c.tail()) })
}

/// `(f * g)^{(k)}(x)` in global coordinates.
pub fn conv_derivative(f: FnRef, g: FnRef, k: usize, x: f64) -> Result<f64, NumError> {
    let c = Conv::new(f, g);
    let a = c.anchor();
    c.try_local_deriv(k, x - a)
}
