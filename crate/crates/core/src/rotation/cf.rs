//! Continued fractions `α = [0; a1, a2, ...]` with exact convergents and an
//! interval enclosure of α.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::{precision_digits, RotationError};

/// Closed rational interval `[lo, hi]` known to contain a real number.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn point(x: BigRational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn new(a: BigRational, b: BigRational) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn mid_f64(&self) -> f64 {
        let two = BigRational::from_integer(2.into());
        ((&self.lo + &self.hi) / two).to_f64().unwrap_or(f64::NAN)
    }

    /// Largest distance from a point of the interval to `x`.
    pub fn max_dist(&self, x: &BigRational) -> BigRational {
        let a = (&self.lo - x).abs();
        let b = (&self.hi - x).abs();
        a.max(b)
    }

    /// `(√5 - 1)/2` to `digits` decimal digits.
    pub fn golden(digits: u32) -> Self {
        let scale = BigInt::from(10u32).pow(digits);
        let s = (BigInt::from(5) * &scale * &scale).sqrt();
        let den = BigInt::from(2) * &scale;
        Interval::new(
            BigRational::new(&s - &scale, den.clone()),
            BigRational::new(&s + BigInt::one() - &scale, den),
        )
    }

    /// `√2 - 1` to `digits` decimal digits.
    pub fn sqrt2_minus_1(digits: u32) -> Self {
        let scale = BigInt::from(10u32).pow(digits);
        let s = (BigInt::from(2) * &scale * &scale).sqrt();
        Interval::new(
            BigRational::new(&s - &scale, scale.clone()),
            BigRational::new(&s + BigInt::one() - &scale, scale),
        )
    }

    /// Exact value of a decimal literal such as `0.4142`.
    pub fn decimal(s: &str) -> Result<Self, RotationError> {
        let bad = || RotationError::BadInput(format!("not a decimal: {s}"));
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.chars().any(|c| !c.is_ascii_digit()) {
            return Err(bad());
        }
        let num: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        Ok(Interval::point(BigRational::new(num, den)))
    }
}

#[derive(Clone, Debug)]
pub struct ContinuedFraction {
    pub partial_quotients: Vec<BigInt>,
    /// `(p_n, q_n)` for `n = 0..=m`, starting with `(0, 1)`.
    pub convergents: Vec<(BigInt, BigInt)>,
    pub alpha: Option<Interval>,
    /// Set when the expansion stopped because the enclosure of α got too wide.
    pub precision_exhausted: bool,
}

fn convergents_of(a: &[BigInt]) -> Vec<(BigInt, BigInt)> {
    // (p_{-1}, q_{-1}) = (1, 0), (p_0, q_0) = (0, 1)
    let mut out = vec![(BigInt::zero(), BigInt::one())];
    let (mut pm, mut qm) = (BigInt::one(), BigInt::zero());
    for ai in a {
        let (p, q) = out.last().cloned().expect("non-empty");
        let np = ai * &p + &pm;
        let nq = ai * &q + &qm;
        pm = p;
        qm = q;
        out.push((np, nq));
    }
    out
}

impl ContinuedFraction {
    pub fn q(&self, n: usize) -> &BigInt {
        &self.convergents[n].1
    }

    pub fn depth(&self) -> usize {
        self.partial_quotients.len()
    }

    /// Float value of α (midpoint of the enclosure, or the last convergent).
    pub fn alpha_f64(&self) -> f64 {
        match &self.alpha {
            Some(i) => i.mid_f64(),
            None => {
                let (p, q) = self.convergents.last().expect("non-empty");
                BigRational::new(p.clone(), q.clone()).to_f64().unwrap_or(f64::NAN)
            }
        }
    }

    /// Checks `|α - p_n/q_n| < 1/(q_n q_{n+1})` over the whole enclosure of α,
    /// for every level where `q_{n+1}` is known. Returns the failing levels. For
    /// a rational α the last level attains the bound.
    pub fn check_convergent_bounds(&self) -> Vec<usize> {
        let Some(alpha) = &self.alpha else { return Vec::new() };
        let mut bad = Vec::new();
        for n in 0..self.convergents.len().saturating_sub(1) {
            let (p, q) = &self.convergents[n];
            let q1 = &self.convergents[n + 1].1;
            let dist = alpha.max_dist(&BigRational::new(p.clone(), q.clone()));
            if dist >= BigRational::new(BigInt::one(), q * q1) {
                bad.push(n);
            }
        }
        bad
    }

    /// Enclosure of `‖q_n α‖` as floats rounded outwards.
    pub fn norm_q_alpha(&self, n: usize) -> Option<(f64, f64)> {
        let alpha = self.alpha.as_ref()?;
        let q = BigRational::from_integer(self.q(n).clone());
        let (a, b) = (&alpha.lo * &q, &alpha.hi * &q);
        let r = a.round();
        // both ends must be nearest to the same integer
        if b.round() != r {
            return None;
        }
        let (da, db) = ((a - &r).abs(), (b - &r).abs());
        let lo = da.clone().min(db.clone()).to_f64()?;
        let hi = da.max(db).to_f64()?;
        let same_side = (&alpha.lo * &q - &r).signum() == (&alpha.hi * &q - &r).signum();
        let lo = if same_side { lo * (1.0 - 1e-15) } else { 0.0 };
        Some((lo, hi * (1.0 + 1e-15)))
    }
}

/// `α = [0; a1, ..., am]` exactly.
pub fn cf_build(a: &[BigInt]) -> Result<ContinuedFraction, RotationError> {
    if a.iter().any(|x| !x.is_positive()) {
        return Err(RotationError::BadInput("partial quotients must be positive".into()));
    }
    let convergents = convergents_of(a);
    let (p, q) = convergents.last().cloned().expect("non-empty");
    Ok(ContinuedFraction {
        partial_quotients: a.to_vec(),
        convergents,
        alpha: Some(Interval::point(BigRational::new(p, q))),
        precision_exhausted: false,
    })
}

/// Expands `alpha ∈ (0, 1)` to at most `depth` quotients. Stops early (and
/// flags it) once the enclosure no longer determines the next quotient; a
/// rational α ends the expansion without the flag.
pub fn cf_expand(alpha: &Interval, depth: usize) -> ContinuedFraction {
    let mut a = Vec::new();
    let (mut lo, mut hi) = (alpha.lo.clone(), alpha.hi.clone());
    let mut exhausted = false;
    while a.len() < depth {
        if lo.is_zero() && hi.is_zero() {
            break;
        }
        if !lo.is_positive() || hi >= BigRational::one() {
            exhausted = true;
            break;
        }
        // x -> 1/x - a reverses the order of the ends
        let (rl, rh) = (hi.recip(), lo.recip());
        let (fl, fh) = (rl.floor(), rh.floor());
        if fl != fh || rl == fl && rh != rl {
            exhausted = true;
            break;
        }
        a.push(fl.to_integer());
        lo = rl - &fl;
        hi = rh - &fh;
    }
    let convergents = convergents_of(&a);
    ContinuedFraction { partial_quotients: a, convergents, alpha: Some(alpha.clone()), precision_exhausted: exhausted }
}

/// Like [`cf_expand`] but fails instead of flagging.
pub fn cf_expand_strict(alpha: &Interval, depth: usize) -> Result<ContinuedFraction, RotationError> {
    let cf = cf_expand(alpha, depth);
    if cf.precision_exhausted {
        return Err(RotationError::PrecisionExhausted { depth: cf.depth(), wanted: depth });
    }
    Ok(cf)
}

#[derive(Clone, Debug, Serialize)]
pub struct DcTerm {
    pub n: usize,
    pub q: String,
    /// `q_n^3 / q_{n+1}`, an upper bound for `q_n^3 ‖q_n α‖`.
    pub bound: f64,
}

#[derive(Clone, Debug)]
pub struct LiouvilleReport {
    pub cf: ContinuedFraction,
    pub certified: Vec<DcTerm>,
    /// The certified bounds decrease from level 1 on.
    pub decreasing: bool,
}

/// Builds α from `a_{n+1} = rule(q_n)`, `depth` quotients deep. One more
/// quotient is generated for the enclosure: any continuation has its next
/// complete quotient in `[1, ∞)`, so α lies between `p_{m+1}/q_{m+1}` and
/// `(p_{m+1} + p_m)/(q_{m+1} + q_m)`.
pub fn cf_build_with_rule(rule: impl Fn(&BigInt) -> BigInt, depth: usize) -> LiouvilleReport {
    let mut a: Vec<BigInt> = Vec::with_capacity(depth + 1);
    let mut conv = convergents_of(&a);
    while a.len() <= depth {
        let q = conv.last().expect("non-empty").1.clone();
        a.push(rule(&q).max(BigInt::one()));
        conv = convergents_of(&a);
    }
    let (p1, q1) = conv.pop().expect("non-empty");
    a.pop();
    let m = conv.len() - 1;
    let (p, q) = &conv[m];
    let alpha = Some(Interval::new(BigRational::new(p1.clone(), q1.clone()), BigRational::new(&p1 + p, &q1 + q)));
    let certified: Vec<DcTerm> = (0..=m)
        .map(|n| {
            let (q, q1) = (&conv[n].1, if n < m { &conv[n + 1].1 } else { &q1 });
            let b = BigRational::new(q * q * q, q1.clone());
            DcTerm { n, q: q.to_string(), bound: b.to_f64().unwrap_or(f64::INFINITY) }
        })
        .collect();
    let decreasing = certified.windows(2).skip(1).all(|w| w[1].bound < w[0].bound);
    let cf = ContinuedFraction { partial_quotients: a, convergents: conv, alpha, precision_exhausted: false };
    LiouvilleReport { cf, certified, decreasing }
}

/// Default rule `a_{n+1} = q_n^e`.
pub fn cf_build_liouville(exponent: u32, depth: usize) -> LiouvilleReport {
    cf_build_with_rule(|q| q.pow(exponent), depth)
}

/// `q_n^3 ‖q_n α‖` enclosures from the α enclosure, for the negative control.
pub fn dc_sequence(cf: &ContinuedFraction) -> Vec<(usize, f64, f64)> {
    (0..cf.convergents.len())
        .filter_map(|n| {
            let (lo, hi) = cf.norm_q_alpha(n)?;
            let q3 = cf.q(n).to_f64()?.powi(3);
            Some((n, q3 * lo, q3 * hi))
        })
        .collect()
}

/// α named on the command line: `golden`, `sqrt2`, `liouville[:e]`,
/// `cf:a1,a2,...` or a decimal in `(0, 1)`.
pub fn alpha_from_spec(spec: &str, depth: usize) -> Result<ContinuedFraction, RotationError> {
    let digits = precision_digits();
    match spec {
        "golden" => Ok(cf_expand(&Interval::golden(digits), depth)),
        "sqrt2" => Ok(cf_expand(&Interval::sqrt2_minus_1(digits), depth)),
        s if s.starts_with("liouville") => {
            let e = match s.split_once(':') {
                Some((_, e)) => e.parse().map_err(|_| RotationError::BadInput(format!("bad exponent in {s}")))?,
                None => 3,
            };
            Ok(cf_build_liouville(e, depth).cf)
        }
        s if s.starts_with("cf:") => {
            let a = s[3..]
                .split(',')
                .map(|t| t.trim().parse::<BigInt>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| RotationError::BadInput(format!("bad quotient list {s}")))?;
            cf_build(&a)
        }
        s => Ok(cf_expand(&Interval::decimal(s)?, depth)),
    }
}
