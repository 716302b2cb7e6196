//! Exact scalars of the form `q * sqrt(2)^s * sqrt(pi)^p * pi^w`.
//!
//! After normalisation `s` and `p` are in `{0, 1}`: even powers of `sqrt(2)`
//! are folded into `q` and even powers of `sqrt(pi)` into the integer power
//! `w`. Zero always carries zero exponents.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("incompatible radicals: cannot add {0} and {1}")]
    IncompatibleRadicals(String, String),
    #[error("unsupported argument: {0}")]
    UnsupportedArgument(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed scalar: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Repr", into = "Repr")]
pub struct ScaledRational {
    q: BigRational,
    s: i64,
    p: i64,
    w: i64,
}

#[derive(Serialize, Deserialize)]
struct Repr {
    q: String,
    sqrt2: i64,
    sqrtpi: i64,
    pi: i64,
}

impl From<ScaledRational> for Repr {
    fn from(x: ScaledRational) -> Self {
        Repr { q: x.q.to_string(), sqrt2: x.s, sqrtpi: x.p, pi: x.w }
    }
}

impl TryFrom<Repr> for ScaledRational {
    type Error = ScalarError;
    fn try_from(r: Repr) -> Result<Self, ScalarError> {
        Ok(ScaledRational::new(parse_rational(&r.q)?, r.sqrt2, r.sqrtpi, r.pi))
    }
}

/// Parses `"n"`, `"n/d"` or a plain decimal such as `"0.25"`.
pub fn parse_rational(text: &str) -> Result<BigRational, ScalarError> {
    let t = text.trim();
    let bad = || ScalarError::Parse(text.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let r = BigRational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

pub(crate) fn pow2(k: i64) -> BigRational {
    let m = num_traits::pow(BigInt::from(2), k.unsigned_abs() as usize);
    if k >= 0 {
        BigRational::from_integer(m)
    } else {
        BigRational::new(BigInt::one(), m)
    }
}

pub(crate) fn rat_pow(x: &BigRational, k: i64) -> BigRational {
    let m = num_traits::pow(x.clone(), k.unsigned_abs() as usize);
    if k >= 0 {
        m
    } else {
        m.recip()
    }
}

impl ScaledRational {
    pub fn new(q: BigRational, s: i64, p: i64, w: i64) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        let q = q * pow2(s.div_euclid(2));
        ScaledRational { q, s: s.rem_euclid(2), p: p.rem_euclid(2), w: w + p.div_euclid(2) }
    }

    pub fn zero() -> Self {
        ScaledRational { q: BigRational::zero(), s: 0, p: 0, w: 0 }
    }

    pub fn one() -> Self {
        Self::rational(BigRational::one())
    }

    pub fn rational(q: BigRational) -> Self {
        Self::new(q, 0, 0, 0)
    }

    pub fn int(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Self::rational(BigRational::new(n.into(), d.into()))
    }

    pub fn sqrt2() -> Self {
        Self::new(BigRational::one(), 1, 0, 0)
    }

    pub fn sqrt_pi() -> Self {
        Self::new(BigRational::one(), 0, 1, 0)
    }

    pub fn pi() -> Self {
        Self::new(BigRational::one(), 0, 0, 1)
    }

    pub fn q(&self) -> &BigRational {
        &self.q
    }

    pub fn sqrt2_exp(&self) -> i64 {
        self.s
    }

    pub fn sqrtpi_exp(&self) -> i64 {
        self.p
    }

    pub fn pi_exp(&self) -> i64 {
        self.w
    }

    /// Radical class `(s, p, w)`; two non-zero values can be added iff equal.
    pub fn class(&self) -> (i64, i64, i64) {
        (self.s, self.p, self.w)
    }

    /// Same radical class with rational part one.
    pub fn unit(&self) -> Self {
        ScaledRational { q: BigRational::one(), s: self.s, p: self.p, w: self.w }
    }

    pub fn with_q(&self, q: BigRational) -> Self {
        Self::new(q, self.s, self.p, self.w)
    }

    pub fn is_zero(&self) -> bool {
        self.q.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.s == 0 && self.p == 0 && self.w == 0
    }

    pub fn signum(&self) -> i32 {
        match self.q.cmp(&BigRational::zero()) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    /// Sum of two scalars. Zero is compatible with every class.
    pub fn add(&self, other: &Self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.class() != other.class() {
            return Err(ScalarError::IncompatibleRadicals(self.to_string(), other.to_string()));
        }
        Ok(Self::new(&self.q + &other.q, self.s, self.p, self.w))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ScalarError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(&self.q * &other.q, self.s + other.s, self.p + other.p, self.w + other.w)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self::new(&self.q * r, self.s, self.p, self.w)
    }

    pub fn neg(&self) -> Self {
        ScaledRational { q: -self.q.clone(), s: self.s, p: self.p, w: self.w }
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::new(self.q.recip(), -self.s, -self.p, -self.w))
    }

    pub fn div(&self, other: &Self) -> Result<Self, ScalarError> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, k: i64) -> Result<Self, ScalarError> {
        if k < 0 && self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(if k == 0 { Self::one() } else { Self::zero() });
        }
        Ok(Self::new(rat_pow(&self.q, k), self.s * k, self.p * k, self.w * k))
    }

    /// Exact square root when it stays inside the family.
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        if self.q.is_negative() || self.s != 0 || self.p != 0 {
            return None;
        }
        let n = self.q.numer() * self.q.denom();
        let d = self.q.denom().clone();
        let r = n.sqrt();
        if &r * &r == n {
            return Some(Self::new(BigRational::new(r, d), 0, self.w, 0));
        }
        if n.is_even() {
            let half: BigInt = &n / BigInt::from(2);
            let r = half.sqrt();
            if &r * &r == half {
                return Some(Self::new(BigRational::new(r, d), 1, self.w, 0));
            }
        }
        None
    }

    pub fn to_f64(&self) -> f64 {
        let q = rational_to_f64(&self.q);
        let r = std::f64::consts::SQRT_2.powi(self.s as i32)
            * std::f64::consts::PI.sqrt().powi(self.p as i32)
            * std::f64::consts::PI.powi(self.w as i32);
        q * r
    }
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Fall back to a scaled division for huge numerators/denominators.
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = nb - db;
    let scaled = q * pow2(-shift);
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

impl fmt::Display for ScaledRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let neg = self.q.is_negative();
        let a = self.q.abs();
        let (n, d) = (a.numer(), a.denom());
        let root2 = self.s == 1;
        let num = match (n.is_one(), root2) {
            (true, true) => "√2".to_string(),
            (false, true) => format!("{n}√2"),
            _ => n.to_string(),
        };
        let core = if d.is_one() { num } else { format!("{num}/{d}") };
        let half = 2 * self.w + self.p;
        let pi_part = match half {
            0 => String::new(),
            1 => "√π".to_string(),
            2 => "π".to_string(),
            h if h % 2 == 0 => format!("π^{}", h / 2),
            h => format!("π^{{{h}/2}}"),
        };
        let body = if pi_part.is_empty() {
            core
        } else if core == "1" {
            pi_part
        } else if core.contains('/') {
            format!("({core})·{pi_part}")
        } else {
            format!("{core}·{pi_part}")
        };
        if neg {
            if body.contains('·') && !body.starts_with('(') {
                write!(f, "−({body})")
            } else {
                write!(f, "−{body}")
            }
        } else {
            write!(f, "{body}")
        }
    }
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Γ(k + 1/2) = (2k)! / (4^k k!) · √π.
pub fn gamma_half(k: u64) -> ScaledRational {
    let q = BigRational::new(factorial(2 * k), factorial(k) * num_traits::pow(BigInt::from(4), k as usize));
    ScaledRational::new(q, 0, 1, 0)
}

/// Γ(x) for `x` an integer or half-integer that is not a pole.
pub fn gamma(x: Rational64) -> Result<ScaledRational, ScalarError> {
    let twice = x * 2;
    if !twice.is_integer() {
        return Err(ScalarError::UnsupportedArgument(format!("Γ({x}) is not integer or half-integer")));
    }
    let m = twice.to_integer();
    if m % 2 == 0 {
        let n = m / 2;
        if n <= 0 {
            return Err(ScalarError::UnsupportedArgument(format!("Γ has a pole at {n}")));
        }
        return Ok(ScaledRational::rational(BigRational::from_integer(factorial((n - 1) as u64))));
    }
    // x = k + 1/2
    let k = (m - 1) / 2;
    if k >= 0 {
        return Ok(gamma_half(k as u64));
    }
    // Γ(x) = Γ(x + j) / (x (x+1) ... (x+j-1)), with x + j = 1/2.
    let j = -k;
    let mut denom = BigRational::one();
    for i in 0..j {
        let xi = BigRational::new((m + 2 * i).into(), 2.into());
        denom *= xi;
    }
    Ok(gamma_half(0).scale(&denom.recip()))
}

/// Γ(a1+1)Γ(a2+1)/Γ(a1+a2+2) for integer or half-integer `a1, a2 > -1`.
pub fn beta_ratio(a1: Rational64, a2: Rational64) -> Result<ScaledRational, ScalarError> {
    for a in [a1, a2] {
        if a <= Rational64::from_integer(-1) || !(a * 2).is_integer() {
            return Err(ScalarError::UnsupportedArgument(format!(
                "exponent {a} must be an integer or half-integer greater than -1"
            )));
        }
    }
    let one = Rational64::from_integer(1);
    let num = gamma(a1 + one)?.mul(&gamma(a2 + one)?);
    num.div(&gamma(a1 + a2 + one + one)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn normalisation_folds_even_powers() {
        let x = ScaledRational::new(r(1, 1), 3, 3, 0);
        assert_eq!(x.q(), &r(2, 1));
        assert_eq!(x.class(), (1, 1, 1));
        let y = ScaledRational::new(r(3, 1), -1, -1, 0);
        assert_eq!(y.q(), &r(3, 2));
        assert_eq!(y.class(), (1, 1, -1));
        assert_eq!(ScaledRational::new(r(0, 1), 5, 1, 2).class(), (0, 0, 0));
    }

    #[test]
    fn sqrt2_times_sqrt2_is_two() {
        let two = ScaledRational::sqrt2().mul(&ScaledRational::sqrt2());
        assert_eq!(two, ScaledRational::int(2));
    }

    #[test]
    fn incompatible_addition_is_rejected() {
        let a = ScaledRational::sqrt2().scale(&r(1, 2));
        let b = ScaledRational::sqrt_pi().scale(&r(1, 2));
        assert!(matches!(a.add(&b), Err(ScalarError::IncompatibleRadicals(..))));
        assert_eq!(a.add(&ScaledRational::zero()).unwrap(), a);
    }

    #[test]
    fn gamma_half_values() {
        assert_eq!(gamma_half(0), ScaledRational::sqrt_pi());
        assert_eq!(gamma_half(3), ScaledRational::sqrt_pi().scale(&r(15, 8)));
        assert_eq!(gamma(Rational64::new(-1, 2)).unwrap(), ScaledRational::sqrt_pi().scale(&r(-2, 1)));
        assert_eq!(gamma(Rational64::from_integer(5)).unwrap(), ScaledRational::int(24));
        assert!(gamma(Rational64::from_integer(0)).is_err());
    }

    #[test]
    fn beta_ratio_examples() {
        let h = Rational64::new(-1, 2);
        assert_eq!(beta_ratio(h, h).unwrap(), ScaledRational::pi());
        assert!(matches!(
            beta_ratio(Rational64::new(1, 3), Rational64::from_integer(0)),
            Err(ScalarError::UnsupportedArgument(_))
        ));
    }

    #[test]
    fn display_forms() {
        let c = ScaledRational::new(r(-1, 16), 1, 1, 1);
        assert_eq!(c.to_string(), "−(√2/16)·π^{3/2}");
        assert_eq!(ScaledRational::new(r(1, 2), 1, 0, 0).to_string(), "√2/2");
        assert_eq!(ScaledRational::pi().to_string(), "π");
    }

    #[test]
    fn json_round_trip() {
        let c = ScaledRational::new(r(-5, 512), 1, 1, 1);
        let j = serde_json::to_string(&c).unwrap();
        assert_eq!(j, r#"{"q":"-5/512","sqrt2":1,"sqrtpi":1,"pi":1}"#);
        let back: ScaledRational = serde_json::from_str(&j).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn sqrt_inside_family() {
        let half = ScaledRational::frac(1, 2);
        assert_eq!(half.sqrt().unwrap(), ScaledRational::sqrt2().scale(&r(1, 2)));
        assert_eq!(ScaledRational::pi().sqrt().unwrap(), ScaledRational::sqrt_pi());
        assert!(ScaledRational::int(3).sqrt().is_none());
        assert!(ScaledRational::int(-4).sqrt().is_none());
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("-3/4").unwrap(), r(-3, 4));
        assert_eq!(parse_rational("0.25").unwrap(), r(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), r(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), r(7, 1));
    }
}
