//! Floating-point routines against closed forms, finite differences,
//! Monte Carlo sampling and the exact expansions.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use num_rational::{BigRational, Rational64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scs_lab::numerics::quad::{integrate, integrate_edges};
use scs_lab::numerics::{conv_derivative, hbar, hbar_derivative, Conv, Custom, Density, FnRef, LocalFn, Reflected};
use scs_lab::power_series::{conv_series_rescaled, v_coefficients};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Central differences of order `k` (1..=3) with step `h`.
fn diff(f: impl Fn(f64) -> f64, k: usize, x: f64, h: f64) -> f64 {
    match k {
        1 => (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h),
        2 => (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h),
        3 => (-f(x - 2.0 * h) + 2.0 * f(x - h) - 2.0 * f(x + h) + f(x + 2.0 * h)) / (2.0 * h * h * h),
        _ => unreachable!(),
    }
}

#[test]
fn hbar_first_derivative_closed_form() {
    for x in [0.01f64, 0.3, 1.0, 4.0, 30.0] {
        let e = (2.0 * x).exp();
        let want = -e / (e - 1.0).powf(1.5);
        assert!(rel(hbar_derivative(1, x), want) < 1e-12, "x={x}");
    }
}

#[test]
fn hbar_derivatives_by_differences() {
    for n in 1..=6 {
        for x in [0.4, 1.0, 2.5] {
            let fd = diff(|y| hbar_derivative(n - 1, y), 1, x, 1e-3);
            assert!(rel(hbar_derivative(n, x), fd) < 1e-6, "n={n} x={x}");
        }
    }
    let fd3 = diff(hbar, 3, 1.0, 2e-3);
    assert!(rel(hbar_derivative(3, 1.0), fd3) < 1e-4, "{} vs {fd3}", hbar_derivative(3, 1.0));
}

fn hb(t: f64) -> FnRef {
    Density::hbar(t).arc()
}

#[test]
fn right_right_derivatives() {
    let c = Conv::new(hb(1.0), hb(2.0));
    for u in [0.7, 1.5] {
        for (k, h, tol) in [(1, 1e-3, 1e-6), (2, 1e-3, 1e-5), (3, 1e-2, 1e-4)] {
            let got = conv_derivative(hb(1.0), hb(2.0), k, u).unwrap();
            let fd = diff(|y| c.local(y), k, u, h);
            assert!(rel(got, fd) < tol, "k={k} u={u}: {got} vs {fd}");
        }
    }
}

#[test]
fn right_left_derivatives_both_sides() {
    let c = Conv::new(hb(1.0), hb(-1.0));
    for u in [-0.8, -0.3, 0.3, 0.8] {
        for (k, h, tol) in [(1, 1e-3, 1e-6), (2, 1e-3, 1e-5)] {
            let got = conv_derivative(hb(1.0), hb(-1.0), k, u).unwrap();
            let fd = diff(|y| c.local(y), k, u, h);
            assert!(rel(got, fd) < tol, "k={k} u={u}: {got} vs {fd}");
        }
    }
}

#[test]
fn smooth_pair_is_exact() {
    // u^2 e^{-u} * u^3 e^{-u} = e^{-u} u^6 B(3, 4) = e^{-u} u^6 / 60
    let f: FnRef = Arc::new(Custom::poly_exp(2));
    let g: FnRef = Arc::new(Custom::poly_exp(3));
    let c = Conv::new(f.clone(), g.clone());
    for u in [0.5f64, 2.0, 7.0] {
        let want = (-u).exp() * u.powi(6) / 60.0;
        assert!(rel(c.local(u), want) < 1e-10);
        let d1 = (-u).exp() * (6.0 * u.powi(5) - u.powi(6)) / 60.0;
        assert!(rel(conv_derivative(f.clone(), g.clone(), 1, u).unwrap(), d1) < 1e-6, "u={u}");
    }
}

/// Draws from `h` by inverting its distribution function.
fn sample_h(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen();
    -(0.5 * PI * u).cos().ln() - LN_2
}

#[test]
fn monte_carlo_mixed_pair() {
    // X = S1 - S2 has density h_1 * h_{-1}
    let c = Conv::new(Density::h(1.0).arc(), Density::h(-1.0).arc());
    let a = c.anchor();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 2_000_000;
    let xs: Vec<f64> = (0..n).map(|_| sample_h(&mut rng) - sample_h(&mut rng)).collect();
    for (lo, hi) in [(-1.5, -0.5), (-0.4, -0.1), (0.2, 0.9)] {
        let p_hat = xs.iter().filter(|&&x| x > lo && x < hi).count() as f64 / n as f64;
        let p = integrate(&|x: f64| c.local(x - a), lo, hi, 1e-12, 1e-10).value;
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((p_hat - p).abs() < 5.0 * sd, "({lo},{hi}): {p_hat} vs {p}");
    }
}

#[test]
fn pair_matches_expansion_near_zero() {
    let v = v_coefficients(14);
    let one = BigRational::from_integer(1.into());
    let s = conv_series_rescaled(2, Rational64::new(-1, 2), &v.coeffs, &[one.clone(), one], 14).unwrap();
    let c = Conv::new(hb(1.0), hb(1.0));
    for x in [0.005, 0.02, 0.05, 0.1] {
        assert!(rel(c.local(x), s.eval(x)) < 1e-8, "x={x}: {} vs {}", c.local(x), s.eval(x));
    }
}

#[test]
fn reflection_flips_the_argument() {
    let c = Conv::new(hb(1.0), hb(2.0));
    let r = Conv::new(Arc::new(Reflected(hb(1.0))), Arc::new(Reflected(hb(2.0))));
    for u in [0.1, 0.9, 3.0] {
        assert!(rel(r.local(-u), c.local(u)) < 1e-12);
    }
}

#[test]
fn h_is_a_shifted_hbar() {
    for (t1, t2) in [(1.0, 1.0), (1.0, 2.5), (-0.5, -2.0)] {
        let h = Conv::new(Density::h(t1).arc(), Density::h(t2).arc());
        let hb = Conv::new(Density::hbar(t1).arc(), Density::hbar(t2).arc());
        let shift = (t1 + t2) * LN_2;
        for u in [0.05, 0.4, 1.3, 3.0, 7.0] {
            let x = if t1 > 0.0 { u - shift } else { -u - shift };
            let want = (2.0 / PI).powi(2) * hb.eval(x + shift);
            assert!(rel(h.eval(x), want) < 1e-8, "t=({t1},{t2}) x={x}");
        }
    }
}

#[test]
fn h_sign_flip_mirrors() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let t = rng.gen_range(0.3..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let s = rng.gen_range(0.3..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let x = rng.gen_range(-4.0..4.0);
        let a = Conv::new(Density::h(t).arc(), Density::h(s).arc()).eval(x);
        let b = Conv::new(Density::h(-t).arc(), Density::h(-s).arc()).eval(-x);
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300), "t={t} s={s} x={x}: {a} vs {b}");
    }
}

/// `∫ local` over `[lo, hi]` in panels, with a `w^2` substitution at 0.
fn mass(f: &dyn LocalFn, lo: f64, hi: f64) -> f64 {
    let g = |u: f64| f.local(u);
    let mut total = 0.0;
    let cuts = [0.0, 1.0, 5.0, 20.0];
    for w in cuts.windows(2) {
        if hi > 0.0 {
            total += integrate_edges(&g, w[0], w[1].min(hi), w[0] == 0.0, false, 1e-13, 1e-12).value;
        }
        if lo < 0.0 {
            total += integrate_edges(&g, (-w[1]).max(lo), -w[0], false, w[0] == 0.0, 1e-13, 1e-12).value;
        }
    }
    if hi > 20.0 {
        total += integrate(&g, 20.0, hi, 1e-13, 1e-12).value;
    }
    if lo < -20.0 {
        total += integrate(&g, lo, -20.0, 1e-13, 1e-12).value;
    }
    total
}

#[test]
fn convolution_conserves_mass() {
    let rr = Conv::new(Density::h(1.0).arc(), Density::h(2.0).arc());
    assert!((mass(&rr, 0.0, 90.0) - 1.0).abs() < 1e-7);
    let rl = Conv::new(Density::h(1.0).arc(), Density::h(-1.0).arc());
    assert!((mass(&rl, -60.0, 60.0) - 1.0).abs() < 1e-7);
}
