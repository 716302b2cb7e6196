//! Truncated power series with exact coefficients, and the expansion of
//! `v(x) = sqrt(x / (e^{2x} - 1))` at zero.

mod conv;

pub use conv::{
    conv_series_pair, conv_series_rescaled, mixed_sign_combine, sign_resolve, ConvCoefficients, Prefactor, Side,
    SignPair,
};

use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_scalar::{ScalarError, ScaledRational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("division by a series with no non-zero coefficient")]
    DivByZeroSeries,
    #[error("square root of {0} is not representable")]
    NonRepresentableSqrt(String),
    #[error("exp needs a series without constant term, got leading exponent {0}")]
    ExpConstantTerm(String),
    #[error("rescaling factors must share one sign")]
    MixedSigns,
    #[error("leading coefficient is zero, sign cannot be fixed")]
    ZeroLeadingCoefficient,
    #[error("unsupported argument: {0}")]
    UnsupportedArgument(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// `x^lead_exp * sum_k coeffs[k] x^k`, truncated after `coeffs.len()` terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerSeries {
    pub coeffs: Vec<ScaledRational>,
    #[serde(with = "rat64")]
    pub lead_exp: Rational64,
}

pub(crate) mod rat64 {
    use num_rational::Rational64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        let t = String::deserialize(d)?;
        t.parse().map_err(serde::de::Error::custom)
    }
}

pub(crate) fn sum<I>(terms: I) -> Result<ScaledRational, ScalarError>
where
    I: IntoIterator<Item = ScaledRational>,
{
    let mut acc = ScaledRational::zero();
    for t in terms {
        acc = acc.add(&t)?;
    }
    Ok(acc)
}

impl PowerSeries {
    pub fn new(coeffs: Vec<ScaledRational>) -> Self {
        PowerSeries { coeffs, lead_exp: Rational64::from_integer(0) }
    }

    pub fn with_lead(coeffs: Vec<ScaledRational>, lead_exp: Rational64) -> Self {
        PowerSeries { coeffs, lead_exp }
    }

    pub fn from_rationals(coeffs: &[(i64, i64)]) -> Self {
        Self::new(coeffs.iter().map(|&(n, d)| ScaledRational::frac(n, d)).collect())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, k: usize) -> ScaledRational {
        self.coeffs.get(k).cloned().unwrap_or_else(ScaledRational::zero)
    }

    pub fn truncate(&self, n: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.truncate(n);
        PowerSeries { coeffs: c, lead_exp: self.lead_exp }
    }

    /// Drops leading zero coefficients into `lead_exp`.
    fn stripped(&self) -> Option<Self> {
        let j = self.coeffs.iter().position(|c| !c.is_zero())?;
        Some(PowerSeries {
            coeffs: self.coeffs[j..].to_vec(),
            lead_exp: self.lead_exp + Rational64::from_integer(j as i64),
        })
    }

    pub fn scale(&self, c: &ScaledRational) -> Self {
        PowerSeries { coeffs: self.coeffs.iter().map(|x| x.mul(c)).collect(), lead_exp: self.lead_exp }
    }

    /// Termwise sum; both series must carry the same leading exponent.
    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        if self.lead_exp != other.lead_exp {
            return Err(SeriesError::UnsupportedArgument("sum of series with different leading exponents".into()));
        }
        let n = self.order().min(other.order());
        let coeffs = (0..n).map(|k| self.coeffs[k].add(&other.coeffs[k])).collect::<Result<_, _>>()?;
        Ok(PowerSeries { coeffs, lead_exp: self.lead_exp })
    }

    pub fn to_json(&self, name: &str) -> serde_json::Value {
        serde_json::json!({ "series": name, "order": self.order(), "coeffs": self.coeffs })
    }

    /// Evaluates the truncated sum at `x > 0` in floating point.
    pub fn eval_f64(&self, x: f64) -> f64 {
        let lead = *self.lead_exp.numer() as f64 / *self.lead_exp.denom() as f64;
        let s: f64 = self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64());
        s * x.powf(lead)
    }
}

pub fn series_mul(a: &PowerSeries, b: &PowerSeries, n: usize) -> Result<PowerSeries, SeriesError> {
    let n = n.min(a.order()).min(b.order());
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push(sum((0..=k).map(|i| a.coeffs[i].mul(&b.coeffs[k - i])))?);
    }
    Ok(PowerSeries { coeffs: out, lead_exp: a.lead_exp + b.lead_exp })
}

pub fn series_div(a: &PowerSeries, b: &PowerSeries, n: usize) -> Result<PowerSeries, SeriesError> {
    let b = b.stripped().ok_or(SeriesError::DivByZeroSeries)?;
    let n = n.min(a.order()).min(b.order());
    let inv_b0 = b.coeffs[0].inv()?;
    let mut c: Vec<ScaledRational> = Vec::with_capacity(n);
    for k in 0..n {
        let s = sum((1..=k).map(|i| b.coeffs[i].mul(&c[k - i])))?;
        c.push(a.coeffs[k].sub(&s)?.mul(&inv_b0));
    }
    Ok(PowerSeries { coeffs: c, lead_exp: a.lead_exp - b.lead_exp })
}

pub fn series_exp(a: &PowerSeries, n: usize) -> Result<PowerSeries, SeriesError> {
    let lead = a.lead_exp;
    if !lead.is_integer() || lead < Rational64::zero() || (lead.is_zero() && !a.coeff(0).is_zero()) {
        return Err(SeriesError::ExpConstantTerm(format!("{lead}")));
    }
    let shift = lead.to_integer() as usize;
    let mut plain = vec![ScaledRational::zero(); shift];
    plain.extend(a.coeffs.iter().cloned());
    // coefficients past the end of `a` are read as zero
    plain.resize(plain.len().max(n), ScaledRational::zero());
    let mut e = vec![ScaledRational::one()];
    for k in 1..n {
        let s = sum((1..=k).map(|j| plain[j].mul(&e[k - j]).scale(&BigRational::from_integer(j.into()))))?;
        e.push(s.scale(&BigRational::new(1.into(), (k as i64).into())));
    }
    Ok(PowerSeries::new(e))
}

/// Square root by the Newton iteration `y <- (y + s/y) / 2`.
pub fn series_sqrt(a: &PowerSeries, n: usize) -> Result<PowerSeries, SeriesError> {
    let a = a.stripped().ok_or_else(|| SeriesError::NonRepresentableSqrt("0".into()))?;
    let n = n.min(a.order());
    let c0 = &a.coeffs[0];
    let r0 = c0.sqrt().ok_or_else(|| SeriesError::NonRepresentableSqrt(c0.to_string()))?;
    let plain = PowerSeries::new(a.coeffs[..n].to_vec());
    let half = BigRational::new(1.into(), 2.into());
    let mut y = PowerSeries::new(vec![r0]);
    y.coeffs.resize(n, ScaledRational::zero());
    for _ in 0..64 {
        let q = series_div(&plain, &y, n)?;
        let next = PowerSeries::new(
            (0..n)
                .map(|k| y.coeffs[k].add(&q.coeffs[k]).map(|s| s.scale(&half)))
                .collect::<Result<_, _>>()?,
        );
        if next == y {
            break;
        }
        y = next;
    }
    y.lead_exp = a.lead_exp / 2;
    Ok(y)
}

/// Coefficients `a_0 .. a_{n-1}` of `v(x) = sqrt(x/(e^{2x}-1))` at zero.
pub fn v_coefficients(n: usize) -> PowerSeries {
    let two_x = PowerSeries::with_lead(vec![ScaledRational::int(2)], Rational64::one());
    let e = series_exp(&two_x, n + 1).expect("exp of 2x");
    // (e^{2x} - 1) / x
    let q = PowerSeries::new(e.coeffs[1..].to_vec());
    let one = PowerSeries::new((0..n).map(|k| if k == 0 { ScaledRational::one() } else { ScaledRational::zero() }).collect());
    let r = series_div(&one, &q, n).expect("x/(e^{2x}-1)");
    series_sqrt(&r, n).expect("sqrt of x/(e^{2x}-1)")
}
