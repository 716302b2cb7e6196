//! Push-forward of a density under `x -> x mod 1`, and recovery of the leading
//! coefficients of its singular part from the two-sided difference at the
//! singular point.

use serde::Serialize;

use super::quad::integrate_edges;
use super::taylor::richardson;
use super::{FnRef, NumError};

/// `W(x) = sum_{|k| <= K} f(x + k)`, described around the image `x0` of the
/// singular point of `f` in `(-1/2, 1/2]`.
#[derive(Clone)]
pub struct Wrapped {
    pub f: FnRef,
    pub k_max: usize,
    /// Bound on the neglected terms.
    pub truncation: f64,
}

fn tail_sum_bound(f: &FnRef, k: usize) -> Option<f64> {
    let t = f.tail();
    if t.amplitude <= 0.0 {
        return (k as f64 >= t.threshold + 1.0).then_some(0.0);
    }
    if (k as f64) < t.threshold + 1.0 {
        return None;
    }
    // sum_{j > k} over both sides of A e^{-r (j - 1)}
    Some(2.0 * t.amplitude * (-t.rate * k as f64).exp() / (1.0 - (-t.rate).exp()))
}

/// Wraps with an explicit cutoff `k_max`; fails if the tail bound exceeds `tol`.
pub fn wrap_mod1_with(f: FnRef, k_max: usize, tol: f64) -> Result<Wrapped, NumError> {
    match tail_sum_bound(&f, k_max) {
        Some(b) if b <= tol => Ok(Wrapped { f, k_max, truncation: b }),
        Some(b) => Err(NumError::TailBoundTooLoose { bound: b, tol }),
        None => Err(NumError::TailBoundTooLoose { bound: f64::INFINITY, tol }),
    }
}

/// Wraps with the smallest cutoff whose tail bound is below `tol`.
pub fn wrap_mod1(f: FnRef, tol: f64) -> Result<Wrapped, NumError> {
    for k in 1..=100_000 {
        if let Some(b) = tail_sum_bound(&f, k) {
            if b <= tol {
                return Ok(Wrapped { f, k_max: k, truncation: b });
            }
        }
    }
    let b = tail_sum_bound(&f, 100_000).unwrap_or(f64::INFINITY);
    Err(NumError::TailBoundTooLoose { bound: b, tol })
}

impl std::fmt::Debug for Wrapped {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Wrapped").field("k_max", &self.k_max).field("truncation", &self.truncation).finish()
    }
}

impl Wrapped {
    /// Image of the singular point in `(-1/2, 1/2]`.
    pub fn x0(&self) -> f64 {
        let a = self.f.anchor();
        let r = a - a.round();
        if r <= -0.5 {
            r + 1.0
        } else {
            r
        }
    }

    /// `W(x0 + y)`.
    pub fn local(&self, y: f64) -> f64 {
        let k = self.k_max as i64;
        (-k..=k).map(|j| self.f.local(y + j as f64)).sum()
    }

    pub fn local_deriv(&self, order: usize, y: f64) -> Option<f64> {
        let k = self.k_max as i64;
        (-k..=k).map(|j| self.f.local_deriv(order, y + j as f64)).sum()
    }

    /// `W(x)` for any real `x` (period 1).
    pub fn eval(&self, x: f64) -> f64 {
        let y = x - self.x0();
        self.local(y - y.round())
    }

    /// `∫ W` over one period.
    pub fn mass(&self) -> f64 {
        let g = |y: f64| self.local(y);
        integrate_edges(&g, -0.5, 0.0, false, true, 1e-14, 1e-13).value
            + integrate_edges(&g, 0.0, 0.5, true, false, 1e-14, 1e-13).value
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Recovered {
    pub a0: f64,
    pub a1: Option<f64>,
    /// Spread of the last Richardson column, a rough error indicator.
    pub a0_spread: f64,
    pub a1_spread: Option<f64>,
    pub exponents: Vec<f64>,
    pub nodes: Vec<f64>,
}

/// Exponents of the error terms: `{1, 2, 3, ...}` together with `{1 - a + 2j}`.
fn error_exponents(a: f64, count: usize) -> Vec<f64> {
    let mut e: Vec<f64> = (1..=count).map(|k| k as f64).collect();
    e.extend((0..count).map(|j| 1.0 - a + 2.0 * j as f64));
    e.sort_by(f64::total_cmp);
    e.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    e.truncate(count);
    e
}

/// `A0 = lim y^{-a} (W(x0+y) - W(x0-y))` and
/// `A1 = lim [y^{-a} (W'(x0+y) - W'(x0-y)) - a A0 / y] / (1 + a)`,
/// each extrapolated along `y_j = y0 2^{-j}`.
pub fn recover_a0_a1(w: &Wrapped, a: f64) -> Result<Recovered, NumError> {
    let (y0, levels) = (0.05, 6usize);
    let nodes: Vec<f64> = (0..levels).map(|j| y0 * 0.5f64.powi(j as i32)).collect();
    let exps = error_exponents(a, levels - 1);
    let d0: Vec<f64> = nodes.iter().map(|&y| y.powf(-a) * (w.local(y) - w.local(-y))).collect();
    let (a0, a0_spread) = richardson(&d0, &exps)?;
    if a0_spread > 1e-4 * a0.abs().max(1e-12) {
        return Err(NumError::ExtrapolationDivergence(format!("A0 spread {a0_spread:e}")));
    }
    let d1: Option<Vec<f64>> = nodes
        .iter()
        .map(|&y| Some(y.powf(-a) * (w.local_deriv(1, y)? - w.local_deriv(1, -y)?) - a * a0 / y))
        .collect();
    let (a1, a1_spread) = match d1 {
        Some(d1) => {
            let (v, s) = richardson(&d1, &exps)?;
            (Some(v / (1.0 + a)), Some(s / (1.0 + a)))
        }
        None => (None, None),
    };
    Ok(Recovered { a0, a1, a0_spread, a1_spread, exponents: exps, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Custom, Density};
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn short_support_wraps_to_itself() {
        let f: FnRef = Arc::new(Custom::new(
            0.0,
            crate::numerics::Support::Right,
            0.0,
            crate::numerics::TailDecay { amplitude: 0.0, rate: 1.0, threshold: 0.5 },
            0.5,
            |k, u| (k == 0).then_some(if u < 0.5 { u } else { 0.0 }),
        ));
        let w = wrap_mod1(f.clone(), 1e-12).unwrap();
        for x in [0.1, 0.3, 0.45] {
            assert_eq!(w.eval(x), f.eval(x));
            assert_eq!(w.eval(-x), 0.0);
        }
    }

    #[test]
    fn wrapped_h_has_unit_mass() {
        let w = wrap_mod1(Density::h(1.0).arc(), 1e-10).unwrap();
        assert!(w.truncation < 1e-10);
        assert!((w.mass() - 1.0).abs() < 1e-8, "{}", w.mass());
    }

    #[test]
    fn recover_single_h() {
        let w = wrap_mod1(Density::h(1.0).arc(), 1e-13).unwrap();
        let r = recover_a0_a1(&w, -0.5).unwrap();
        let a0 = 2f64.sqrt() / PI;
        assert!((r.a0 - a0).abs() < 1e-4 * a0, "{r:?}");
        let a1 = -(2.0 / PI) * 2f64.sqrt() / 4.0;
        assert!((r.a1.unwrap() - a1).abs() < 1e-3 * a1.abs(), "{r:?}");
    }

    #[test]
    fn loose_tail_rejected() {
        let err = wrap_mod1_with(Density::h(1.0).arc(), 2, 1e-12).unwrap_err();
        assert!(matches!(err, NumError::TailBoundTooLoose { .. }));
    }
}
