//! Local expansions of convolutions of functions that behave like
//! `x^a * (analytic)` at one end of their support.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{series_mul, sum, PowerSeries, SeriesError};
use crate::exact_scalar::{gamma, rational_to_f64, ScaledRational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    /// Expansion valid for `x > 0`.
    Right,
    /// Expansion valid for `x < 0`.
    Left,
}

/// `base^exponent` with `base >= 0`, kept apart because it is usually irrational.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Prefactor {
    #[serde(serialize_with = "ser_rat")]
    pub base: BigRational,
    #[serde(serialize_with = "ser_r64")]
    pub exponent: Rational64,
}

fn ser_rat<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ser_r64<S: serde::Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl Prefactor {
    pub fn one() -> Self {
        Prefactor { base: BigRational::one(), exponent: Rational64::zero() }
    }

    pub fn to_f64(&self) -> f64 {
        let e = *self.exponent.numer() as f64 / *self.exponent.denom() as f64;
        rational_to_f64(&self.base).powf(e)
    }

    /// The exact value when it lies in the scalar family.
    pub fn exact(&self) -> Option<ScaledRational> {
        if self.exponent.is_integer() {
            let b = ScaledRational::rational(self.base.clone());
            return b.pow(self.exponent.to_integer()).ok();
        }
        if *self.exponent.denom() != 2 {
            return None;
        }
        let root = ScaledRational::rational(self.base.clone()).sqrt()?;
        root.pow(*self.exponent.numer()).ok()
    }

    fn combine(&self, other: &Self) -> Result<Self, SeriesError> {
        if self.exponent.is_zero() {
            return Ok(other.clone());
        }
        if other.exponent.is_zero() {
            return Ok(self.clone());
        }
        if self.exponent != other.exponent {
            return Err(SeriesError::UnsupportedArgument("blocks with different prefactor exponents".into()));
        }
        Ok(Prefactor { base: &self.base * &other.base, exponent: self.exponent })
    }
}

/// `sign * prefactor * |x|^frac * sum_n coeffs[n] x^(n + int_base)` on `side`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvCoefficients {
    pub d: usize,
    pub side: Side,
    pub int_base: i64,
    #[serde(serialize_with = "ser_r64")]
    pub frac: Rational64,
    pub sign: i32,
    pub prefactor: Prefactor,
    /// Shift `g` such that `coeffs[n] * Γ(n + g)` undoes the Gamma denominator.
    #[serde(serialize_with = "ser_r64")]
    pub gamma_offset: Rational64,
    pub coeffs: Vec<ScaledRational>,
}

impl ConvCoefficients {
    /// Neutral element for block combination (zero functions convolved).
    pub fn delta() -> Self {
        ConvCoefficients {
            d: 0,
            side: Side::Right,
            int_base: 0,
            frac: Rational64::zero(),
            sign: 1,
            prefactor: Prefactor::one(),
            gamma_offset: Rational64::zero(),
            coeffs: vec![ScaledRational::one()],
        }
    }

    pub fn exponent_base(&self) -> Rational64 {
        Rational64::from_integer(self.int_base) + self.frac
    }

    pub fn is_analytic(&self) -> bool {
        self.frac.is_zero()
    }

    /// Floating-point value of the truncated expansion; zero on the wrong side.
    pub fn eval(&self, x: f64) -> f64 {
        let on_side = match self.side {
            Side::Right => x > 0.0,
            Side::Left => x < 0.0,
        };
        if !on_side {
            return 0.0;
        }
        let frac = *self.frac.numer() as f64 / *self.frac.denom() as f64;
        let s: f64 = self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64());
        self.sign as f64 * self.prefactor.to_f64() * x.abs().powf(frac) * x.powi(self.int_base as i32) * s
    }
}

fn split_base(base: Rational64) -> (i64, Rational64) {
    let int = base.ceil().to_integer();
    (int, base - Rational64::from_integer(int))
}

/// Two-factor expansion: `x^{a1} sum B_k x^k` convolved with `x^{a2} sum C_k x^k`
/// (both supported on the positive half-line).
pub fn conv_series_pair(f1: &PowerSeries, f2: &PowerSeries, order: usize) -> Result<ConvCoefficients, SeriesError> {
    let (a1, a2) = (f1.lead_exp, f2.lead_exp);
    let one = Rational64::one();
    for a in [a1, a2] {
        if a <= -one {
            return Err(SeriesError::UnsupportedArgument(format!("exponent {a} is not integrable at 0")));
        }
    }
    let n = order.min(f1.order()).min(f2.order());
    let mut out = Vec::with_capacity(n);
    for m in 0..n {
        let den = gamma(Rational64::from_integer(m as i64) + a1 + a2 + one + one)?;
        let terms = (0..=m).map(|k| -> Result<ScaledRational, SeriesError> {
            let g1 = gamma(Rational64::from_integer(k as i64) + a1 + one)?;
            let g2 = gamma(Rational64::from_integer((m - k) as i64) + a2 + one)?;
            Ok(f1.coeffs[k].mul(&f2.coeffs[m - k]).mul(&g1).mul(&g2))
        });
        let s = sum(terms.collect::<Result<Vec<_>, _>>()?)?;
        out.push(s.div(&den)?);
    }
    let (int_base, frac) = split_base(a1 + a2 + one);
    Ok(ConvCoefficients {
        d: 2,
        side: Side::Right,
        int_base,
        frac,
        sign: 1,
        prefactor: Prefactor::one(),
        gamma_offset: a1 + a2 + one + one,
        coeffs: out,
    })
}

/// Per-factor series `coeffs[k] Γ(k+1+a) t^{-k}` (t may be negative).
fn weighted_factor(coeffs: &[ScaledRational], a: Rational64, t: &BigRational, n: usize) -> Result<PowerSeries, SeriesError> {
    let mut out = Vec::with_capacity(n);
    let mut tpow = BigRational::one();
    let tinv = t.recip();
    for (k, c) in coeffs.iter().take(n).enumerate() {
        let g = gamma(Rational64::from_integer(k as i64 + 1) + a)?;
        out.push(c.mul(&g).scale(&tpow));
        tpow *= &tinv;
    }
    Ok(PowerSeries::new(out))
}

/// Inner sums `sum_{k1+..+kd=n} prod a_{ki} Γ(ki+1+a) / t_i^{ki}` divided by `Γ(n + d(1+a))`,
/// with no sign check on `t`.
pub(crate) fn rescaled_inner(
    a: Rational64,
    coeffs: &[ScaledRational],
    t: &[BigRational],
    order: usize,
) -> Result<Vec<ScaledRational>, SeriesError> {
    let n = order.min(coeffs.len());
    let mut acc = PowerSeries::new((0..n).map(|k| if k == 0 { ScaledRational::one() } else { ScaledRational::zero() }).collect());
    for ti in t {
        if ti.is_zero() {
            return Err(SeriesError::UnsupportedArgument("rescaling factor 0".into()));
        }
        acc = series_mul(&acc, &weighted_factor(coeffs, a, ti, n)?, n)?;
    }
    let shift = Rational64::from_integer(t.len() as i64) * (Rational64::one() + a);
    acc.coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| Ok(c.div(&gamma(Rational64::from_integer(k as i64) + shift)?)?))
        .collect()
}

/// Expansion at the singular point of `F_{t1} * ... * F_{td}` where
/// `F(x) = x^a sum coeffs[k] x^k` on `x > 0` and `F_t(x) = F(x/t)/|t|`.
/// All `t_i` must share one sign; `a` is `0` or `-1/2`.
pub fn conv_series_rescaled(
    d: usize,
    a: Rational64,
    coeffs: &[ScaledRational],
    t: &[BigRational],
    order: usize,
) -> Result<ConvCoefficients, SeriesError> {
    if a != Rational64::zero() && a != Rational64::new(-1, 2) {
        return Err(SeriesError::UnsupportedArgument(format!("exponent {a} (expected 0 or -1/2)")));
    }
    if d == 0 || t.len() != d {
        return Err(SeriesError::UnsupportedArgument(format!("need {d} rescaling factors, got {}", t.len())));
    }
    let positive = t[0].is_positive();
    if t.iter().any(|x| x.is_positive() != positive || x.is_zero()) {
        return Err(SeriesError::MixedSigns);
    }
    let coeffs_out = rescaled_inner(a, coeffs, t, order)?;
    let dd = Rational64::from_integer(d as i64);
    let da = dd * a;
    let frac = if da.is_integer() { Rational64::zero() } else { da - da.floor() - Rational64::one() };
    let m = (da - frac).to_integer();
    let int_base = m + d as i64 - 1;
    let sign = if positive || (d as i64 - 1 + m).rem_euclid(2) == 0 { 1 } else { -1 };
    let prod: BigRational = t.iter().fold(BigRational::one(), |acc, x| acc * x.abs());
    Ok(ConvCoefficients {
        d,
        side: if positive { Side::Right } else { Side::Left },
        int_base,
        frac,
        sign,
        prefactor: Prefactor { base: prod, exponent: -(Rational64::one() + a) },
        gamma_offset: dd * (Rational64::one() + a),
        coeffs: coeffs_out,
    })
}

/// The unordered pair `{A, -A}` determined by a wrapped mixed-sign convolution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignPair {
    pub d: usize,
    /// Index of the first entry that corresponds to the full convolution's leading term.
    pub offset: usize,
    #[serde(serialize_with = "ser_r64")]
    pub gamma_offset: Rational64,
    /// Exponent `a` of the singular block: the jump behaves like `|x|^(a + 1) x^n`
    /// on the singular block's side.
    #[serde(serialize_with = "ser_r64")]
    pub exponent: Rational64,
    pub prefactor: Prefactor,
    pub values: Vec<ScaledRational>,
}

impl SignPair {
    pub fn candidates(&self) -> [Vec<ScaledRational>; 2] {
        [self.values.clone(), self.values.iter().map(|c| c.neg()).collect()]
    }
}

fn alt(n: i64) -> BigRational {
    if n.rem_euclid(2) == 0 {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

/// Combines a positive-side block with a negative-side block. One block must be
/// analytic at the singular point (zero fractional exponent).
pub fn mixed_sign_combine(pos: &ConvCoefficients, neg: &ConvCoefficients) -> Result<SignPair, SeriesError> {
    if pos.d == 0 || neg.d == 0 {
        let b = if pos.d == 0 { neg } else { pos };
        return Ok(SignPair {
            d: b.d,
            offset: 0,
            gamma_offset: b.gamma_offset,
            exponent: b.exponent_base(),
            prefactor: b.prefactor.clone(),
            values: b.coeffs.clone(),
        });
    }
    if pos.side != Side::Right || neg.side != Side::Left {
        return Err(SeriesError::UnsupportedArgument("expected a right block and a left block".into()));
    }
    let (s, t) = match (pos.is_analytic(), neg.is_analytic()) {
        (_, true) => (pos, neg),
        (true, false) => (neg, pos),
        (false, false) => {
            return Err(SeriesError::UnsupportedArgument("both blocks are singular at the joint point".into()))
        }
    };
    let reflect = s.side == Side::Left;
    let a = s.exponent_base();
    let one = Rational64::one();
    let b_coef: Vec<ScaledRational> = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let f = if reflect { alt(n as i64 + s.int_base) } else { BigRational::one() };
            c.scale(&(f * BigInt::from(s.sign)))
        })
        .collect();
    let shift = t.int_base.max(0) as usize;
    let len = (t.coeffs.len() + shift).min(b_coef.len() + shift);
    let c_coef: Vec<ScaledRational> = (0..len)
        .map(|m| {
            if m < shift {
                return ScaledRational::zero();
            }
            let f = if reflect { alt(m as i64) } else { BigRational::one() };
            t.coeffs[m - shift].scale(&(f * BigInt::from(t.sign)))
        })
        .collect();
    let mut values = Vec::with_capacity(len);
    for n in 0..len {
        let nn = Rational64::from_integer(n as i64);
        let den = gamma(nn + a + one + one)?;
        let mut terms = Vec::new();
        for k in 0..=n {
            if n - k >= b_coef.len() {
                continue;
            }
            let g1 = gamma(Rational64::from_integer(k as i64 + 1))?;
            let g2 = gamma(a + Rational64::from_integer((n - k) as i64) + one)?;
            terms.push(c_coef[k].mul(&b_coef[n - k]).mul(&g1).mul(&g2));
        }
        let v = sum(terms)?.div(&den)?;
        // back from |x| to the signed variable on the left
        values.push(if reflect { v.scale(&alt(n as i64)) } else { v });
    }
    Ok(SignPair {
        d: pos.d + neg.d,
        offset: shift,
        gamma_offset: pos.gamma_offset + neg.gamma_offset,
        exponent: a,
        prefactor: pos.prefactor.combine(&neg.prefactor)?,
        values,
    })
}

/// Chooses the member of the pair whose leading term has the sign of `a0^d`
/// and returns `B_n = A_{n+offset} Γ(n + gamma_offset)`.
pub fn sign_resolve(pair: &SignPair, a0: &ScaledRational) -> Result<Vec<ScaledRational>, SeriesError> {
    if a0.is_zero() {
        return Err(SeriesError::ZeroLeadingCoefficient);
    }
    let lead = pair.values.get(pair.offset).ok_or(SeriesError::ZeroLeadingCoefficient)?;
    if lead.is_zero() {
        return Err(SeriesError::ZeroLeadingCoefficient);
    }
    let target = if a0.signum() < 0 && pair.d % 2 == 1 { -1 } else { 1 };
    let flip = lead.signum() != target;
    pair.values[pair.offset..]
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let g = gamma(Rational64::from_integer(n as i64) + pair.gamma_offset)?;
            let v = c.mul(&g);
            Ok(if flip { v.neg() } else { v })
        })
        .collect()
}
