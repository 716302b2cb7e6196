//! Birkhoff sums and continued fractions: cocycle and sign identities,
//! convergent inequalities over exact enclosures, and the frozen `f̃_q` errors.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use scs_lab::rotation::birkhoff::{birkhoff_point, f_q, ft_gamma, ks_two_sample, log_sine, roof, uniform_points};
use scs_lab::rotation::{
    alpha_from_spec, cf_build, cf_build_liouville, cf_expand, fq_sup_error, ContinuedFraction, Interval, EPS_GUARD,
};
use statrs::function::gamma::ln_gamma;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn sum(alpha: f64, q: i64, x: f64) -> Option<f64> {
    birkhoff_point(roof, alpha, q, x, EPS_GUARD)
}

proptest! {
    #[test]
    fn cocycle(alpha in 0.01f64..0.99, x in 0.0f64..1.0, m in -40i64..40, n in -40i64..40) {
        let (Some(total), Some(a), Some(b)) = (sum(alpha, m + n, x), sum(alpha, m, x), sum(alpha, n, x + m as f64 * alpha)) else {
            return Ok(());
        };
        prop_assert!((total - a - b).abs() < 1e-9 * (1.0 + total.abs()), "{total} vs {}", a + b);
    }

    #[test]
    fn negative_q_is_reversed_orbit(alpha in 0.01f64..0.99, x in 0.0f64..1.0, q in 1i64..60) {
        let (Some(neg), Some(pos)) = (sum(alpha, -q, x), sum(alpha, q, x - q as f64 * alpha)) else {
            return Ok(());
        };
        prop_assert!((neg + pos).abs() < 1e-8 * (1.0 + pos.abs()));
    }

    #[test]
    fn finite_fraction_bounds(a in prop::collection::vec(1u32..60, 2..14)) {
        let a: Vec<BigInt> = a.into_iter().map(BigInt::from).collect();
        let cf = cf_build(&a).unwrap();
        // equality p_m/q_m - p_{m-1}/q_{m-1} = ±1/(q_m q_{m-1}) at the last level only
        prop_assert_eq!(cf.check_convergent_bounds(), vec![a.len() - 1]);
    }

    #[test]
    fn build_expand_round_trip(mut a in prop::collection::vec(1u32..200, 1..12), last in 2u32..200) {
        a.push(last);
        let a: Vec<BigInt> = a.into_iter().map(BigInt::from).collect();
        let cf = cf_build(&a).unwrap();
        let back = cf_expand(cf.alpha.as_ref().unwrap(), 50);
        prop_assert!(!back.precision_exhausted);
        prop_assert_eq!(back.partial_quotients, a);
    }

    #[test]
    fn decimal_bounds(d in 1u64..999_999_999) {
        let cf = alpha_from_spec(&format!("0.{d:09}"), 60).unwrap();
        let bad = cf.check_convergent_bounds();
        prop_assert!(bad.is_empty() || bad == vec![cf.depth() - 1], "{bad:?}");
    }
}

fn assert_irrational_bounds(cf: &ContinuedFraction) {
    assert!(cf.depth() >= 15);
    assert!(cf.check_convergent_bounds().is_empty());
}

#[test]
fn irrational_enclosures_satisfy_bounds() {
    assert_irrational_bounds(&cf_expand(&Interval::golden(120), 60));
    assert_irrational_bounds(&cf_expand(&Interval::sqrt2_minus_1(120), 60));
    assert!(cf_build_liouville(3, 4).cf.check_convergent_bounds().is_empty());
}

#[test]
fn denjoy_koksma_for_sine() {
    // a function of variation 4 has |S_{q_n}| <= 4 at convergent denominators
    let cf = cf_expand(&Interval::golden(80), 25);
    let g = |y: f64| (2.0 * std::f64::consts::PI * y).sin();
    for n in 3..20 {
        let q = cf.q(n).to_i64().unwrap();
        for x in uniform_points(n as u64, 200) {
            let s = birkhoff_point(g, GOLDEN, q, x, 0.0).unwrap();
            assert!(s.abs() <= 4.0 + 1e-9, "q={q} x={x}: {s}");
        }
    }
}

#[test]
fn lattice_sum_law_matches_rescaled() {
    // f_q has period 1/q, so f_q(U) and f̃_q(U) have the same law
    let q = 21u64;
    let n = 50_000;
    let mut a: Vec<f64> = uniform_points(3, n).into_iter().map(|x| f_q(q, x)).collect();
    let mut b: Vec<f64> = uniform_points(4, n).into_iter().map(|x| ft_gamma(q, x)).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    assert!(ks_two_sample(&a, &b) < 2.0 / (n as f64).sqrt());
}

/// `lim_{x->0} (f̃_q(x) - ln(1/(2 sin πx)))`, which is `-1/(6q) + O(q^{-3})`.
fn edge_limit(q: f64) -> f64 {
    -2.0 * q + 2.0 * q * q.ln() - ln_gamma(q) - ln_gamma(q + 1.0) + (2.0 * std::f64::consts::PI).ln()
}

#[test]
fn sup_errors_frozen() {
    let frozen = [(13u64, 1.281414e-2), (34, 4.900349e-3), (89, 1.872090e-3), (233, 7.150926e-4), (610, 2.731421e-4)];
    for (q, want) in frozen {
        let got = fq_sup_error(q, 10_000);
        assert!(((got - want) / want).abs() < 1e-6, "q={q}: {got:e}");
        // grid sup sits just under the edge limit
        let edge = edge_limit(q as f64).abs();
        assert!(got <= edge && got > 0.999 * edge, "q={q}: {got} vs {edge}");
        assert!((edge - 1.0 / (6.0 * q as f64)).abs() < 1.0 / (q as f64).powi(3));
        // direct lattice sum on a coarser grid
        let n = 2000;
        let direct = (0..n)
            .map(|i| {
                let y = (i as f64 + 0.5) / n as f64;
                (f_q(q, y / q as f64) - log_sine(y)).abs()
            })
            .fold(0.0, f64::max);
        assert!((direct - fq_sup_error(q, n)).abs() < 1e-10, "q={q}: {direct:e} vs {:e}", fq_sup_error(q, n));
    }
}
