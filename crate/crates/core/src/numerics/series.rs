//! Numerical convolutions of rescaled densities and their local Taylor
//! coefficients, for comparison with the exact expansions.

use serde::Serialize;

use super::taylor::chebyshev_taylor;
use super::{Conv, Density, FnRef};
use crate::power_series::{ConvCoefficients, Side};

/// Sampling interval and node count that keep four coefficients near 1e-7.
pub const X_MAX: f64 = 1.0;
pub const NODES: usize = 24;

/// `h̄_{t1} * ... * h̄_{td}` as nested convolutions.
pub fn hbar_conv(ts: &[f64]) -> FnRef {
    fold(ts.iter().map(|&t| Density::hbar(t).arc()))
}

/// `h_{t1} * ... * h_{td}`.
pub fn h_conv(ts: &[f64]) -> FnRef {
    fold(ts.iter().map(|&t| Density::h(t).arc()))
}

fn fold(mut it: impl Iterator<Item = FnRef>) -> FnRef {
    let first = it.next().expect("at least one factor");
    it.fold(first, Conv::arc)
}

/// Taylor coefficients of `F(x) / (sign * prefactor * |x|^{exponent})` at the
/// singular point, sampled on `(0, x_max]` on the side given by `c`.
pub fn numeric_series(f: &FnRef, c: &ConvCoefficients, x_max: f64, nodes: usize, count: usize) -> Vec<f64> {
    let e = {
        let b = c.exponent_base();
        *b.numer() as f64 / *b.denom() as f64
    };
    let norm = c.sign as f64 * c.prefactor.to_f64();
    let dir = match c.side {
        Side::Right => 1.0,
        Side::Left => -1.0,
    };
    let raw = chebyshev_taylor(
        |s: f64| {
            if s <= 0.0 {
                // the Chebyshev nodes never touch the end point
                return f64::NAN;
            }
            f.local(dir * s) / (norm * s.powf(e))
        },
        x_max,
        nodes,
        count,
    );
    // g(-s) has coefficients (-1)^n on the left side, up to the x^{int_base} sign
    let ib = if dir < 0.0 && c.int_base.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
    raw.iter().enumerate().map(|(n, v)| v * ib * if dir < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 }).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesComparison {
    pub symbolic: Vec<f64>,
    pub numeric: Vec<f64>,
    pub rel_err: Vec<f64>,
}

impl SeriesComparison {
    pub fn new(symbolic: Vec<f64>, numeric: Vec<f64>) -> Self {
        let rel_err = symbolic.iter().zip(&numeric).map(|(s, n)| ((n - s) / s).abs()).collect();
        SeriesComparison { symbolic, numeric, rel_err }
    }

    pub fn max_rel_err(&self) -> f64 {
        self.rel_err.iter().copied().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power_series::{conv_series_rescaled, v_coefficients};
    use num_rational::{BigRational, Rational64};

    #[test]
    fn single_hbar_is_v() {
        let v = v_coefficients(4);
        let t = [BigRational::from_integer(1.into())];
        let c = conv_series_rescaled(1, Rational64::new(-1, 2), &v.coeffs, &t, 4).unwrap();
        let num = numeric_series(&hbar_conv(&[1.0]), &c, X_MAX, NODES, 4);
        let cmp = SeriesComparison::new(c.coeffs.iter().map(|x| x.to_f64()).collect(), num);
        assert!(cmp.max_rel_err() < 1e-6, "{cmp:?}");
    }
}
