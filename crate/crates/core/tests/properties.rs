//! Invariant suites for the exact layer.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use proptest::prelude::*;
use scs_lab::exact_scalar::{beta_ratio, gamma, gamma_half, ScaledRational};
use scs_lab::numerics::quad::integrate_edges;
use scs_lab::sympoly::build_cn;
use scs_lab::uniqueness::{recover_triple, v_b};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn scaled() -> impl Strategy<Value = ScaledRational> {
    (-50i64..50, 1i64..20, -3i64..4, -3i64..4, -2i64..3).prop_map(|(n, d, s, p, w)| ScaledRational::new(rat(n, d), s, p, w))
}

/// Two values of one radical class.
fn same_class() -> impl Strategy<Value = (ScaledRational, ScaledRational)> {
    (scaled(), -50i64..50, 1i64..20).prop_map(|(a, n, d)| {
        let b = a.unit().scale(&rat(n, d));
        (a, b)
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #[test]
    fn mul_commutes_and_associates(a in scaled(), b in scaled(), c in scaled()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&ScaledRational::one()), a.clone());
        prop_assert!(close(a.mul(&b).to_f64(), a.to_f64() * b.to_f64()));
    }

    #[test]
    fn add_within_class((a, b) in same_class(), c in scaled()) {
        let s = a.add(&b).unwrap();
        prop_assert_eq!(&s, &b.add(&a).unwrap());
        prop_assert!(a.add(&a.neg()).unwrap().is_zero());
        prop_assert_eq!(a.add(&ScaledRational::zero()).unwrap(), a.clone());
        // distributivity
        prop_assert_eq!(c.mul(&s), c.mul(&a).add(&c.mul(&b)).unwrap());
    }

    #[test]
    fn inverse(a in scaled()) {
        prop_assume!(!a.is_zero());
        prop_assert_eq!(a.mul(&a.inv().unwrap()), ScaledRational::one());
        prop_assert_eq!(a.pow(3).unwrap().div(&a).unwrap(), a.mul(&a));
    }

    #[test]
    fn beta_from_half_gammas(k1 in 0u64..15, k2 in 0u64..15) {
        // B(k1 + 1/2, k2 + 1/2) = Γ(k1 + 1/2) Γ(k2 + 1/2) / (k1 + k2)!
        let a1 = Rational64::new(2 * k1 as i64 - 1, 2);
        let a2 = Rational64::new(2 * k2 as i64 - 1, 2);
        let fact: BigInt = (1..=(k1 + k2)).map(BigInt::from).product();
        let want = gamma_half(k1).mul(&gamma_half(k2)).scale(&BigRational::from_integer(fact).recip());
        prop_assert_eq!(beta_ratio(a1, a2).unwrap(), want);
    }

    #[test]
    fn beta_against_quadrature(m1 in -1i64..8, m2 in -1i64..8) {
        let (a1, a2) = (Rational64::new(m1, 2), Rational64::new(m2, 2));
        let (x1, x2) = (m1 as f64 / 2.0, m2 as f64 / 2.0);
        let q = integrate_edges(&|s: f64| s.powf(x1) * (1.0 - s).powf(x2), 0.0, 1.0, true, true, 1e-15, 1e-13).value;
        let exact = beta_ratio(a1, a2).unwrap().to_f64();
        prop_assert!(((q - exact) / exact).abs() < 1e-9, "{q} vs {exact}");
    }

    #[test]
    fn cn_is_composition_sum(
        b in prop::collection::vec((-9i64..10, 1i64..6), 6),
        x in prop::collection::vec((-9i64..10, 1i64..6), 3),
        n in 1u32..6,
    ) {
        let b: Vec<ScaledRational> = b.into_iter().map(|(p, q)| ScaledRational::rational(rat(p, q))).collect();
        let x: Vec<BigRational> = x.into_iter().map(|(p, q)| rat(p, q)).collect();
        let c = build_cn(3, n, &b).unwrap();
        let mut want = BigRational::zero();
        for k1 in 0..=n {
            for k2 in 0..=n - k1 {
                let k3 = n - k1 - k2;
                let mut t = BigRational::one();
                for (&k, xi) in [k1, k2, k3].iter().zip(&x) {
                    t *= b[k as usize].q() * num_traits::pow(xi.clone(), k as usize);
                }
                want += t;
            }
        }
        prop_assert_eq!(c.eval(&x).unwrap(), ScaledRational::rational(want));
    }

    #[test]
    fn cn_is_symmetric(x in prop::collection::vec((-9i64..10, 1i64..6), 3), n in 1u32..7) {
        let b = v_b(8);
        let x: Vec<BigRational> = x.into_iter().map(|(p, q)| rat(p, q)).collect();
        let c = build_cn(3, n, &b).unwrap();
        let base = c.eval(&x).unwrap();
        for perm in [[1, 0, 2], [2, 1, 0], [1, 2, 0]] {
            let y: Vec<BigRational> = perm.iter().map(|&i| x[i].clone()).collect();
            prop_assert_eq!(c.eval(&y).unwrap(), base.clone());
        }
    }

    #[test]
    fn triples_round_trip(x in prop::collection::vec((-30i64..31, 1i64..8), 3)) {
        let x: Vec<BigRational> = x.into_iter().map(|(p, q)| rat(p, q)).collect();
        let sums = [&x[0] + &x[1], &x[0] + &x[2], &x[1] + &x[2]];
        prop_assume!(sums.iter().all(|s| !s.is_zero()));
        let b = v_b(6);
        let c: Vec<ScaledRational> = [1, 3, 5].iter().map(|&n| build_cn(3, n, &b).unwrap().eval(&x).unwrap()).collect();
        let got = recover_triple(&c[0], &c[1], &c[2]).unwrap();
        let mut want = x.clone();
        want.sort();
        prop_assert_eq!(got.roots, Some(want));
    }
}

#[test]
fn gamma_recurrence_on_half_integers() {
    for m in -7i64..20 {
        let x = Rational64::new(m, 2);
        if m <= 0 && m % 2 == 0 {
            assert!(gamma(x).is_err());
            continue;
        }
        let lhs = gamma(x + 1).unwrap();
        let rhs = gamma(x).unwrap().scale(&BigRational::new(m.into(), 2.into()));
        assert_eq!(lhs, rhs, "x={x}");
    }
}
