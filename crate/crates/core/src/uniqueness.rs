//! Recovering the multiset `{x_i}` from the symmetric polynomials
//! `c_n = sum_{λ ⊢ n} b_0^{d-ℓ(λ)} prod b_{λ_j} m_λ(x)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exact_scalar::{gamma, ScaledRational};
use crate::linalg::{bareiss_det, RowSpace};
use crate::power_series::v_coefficients;
use crate::sympoly::{
    build_cn, from_m_basis, m_label, partitions_le, poly_mul, poly_pow, power_sum,
    to_m_basis, verify_identity, Partition, PolyError, SymPoly,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UniqError {
    #[error("step {n}: power sum m_{part} is not known yet")]
    MissingPrerequisite { n: u32, part: u32 },
    #[error("step {0}: the system does not involve b_n (structurally singular)")]
    StructurallySingular(u32),
    #[error("b sequence mixes radical classes or has a zero b_0")]
    BadSequence,
    #[error("need b_0..b_{0}")]
    ShortSequence(u32),
    #[error("recovery is degenerate: {0}")]
    Degenerate(String),
    #[error("identity failed: {0}")]
    IdentityFailure(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Polynomial with rational coefficients in `b_0, b_1, ...`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct QPoly {
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl QPoly {
    pub fn zero() -> Self {
        QPoly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = QPoly::zero();
        p.add_term(vec![], c);
        p
    }

    /// `c * prod b_i^{e_i}`.
    pub fn monomial(c: BigRational, powers: &[(usize, u32)]) -> Self {
        let len = powers.iter().map(|(i, _)| i + 1).max().unwrap_or(0);
        let mut e = vec![0; len];
        for &(i, k) in powers {
            e[i] += k;
        }
        let mut p = QPoly::zero();
        p.add_term(e, c);
        p
    }

    fn norm(mut e: Vec<u32>) -> Vec<u32> {
        while e.last() == Some(&0) {
            e.pop();
        }
        e
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigRational) {
        let e = Self::norm(e);
        let v = self.terms.remove(&e).unwrap_or_else(BigRational::zero) + c;
        if !v.is_zero() {
            self.terms.insert(e, v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut p = QPoly::zero();
        for (e, x) in &self.terms {
            p.add_term(e.clone(), x * c);
        }
        p
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut p = QPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let n = ea.len().max(eb.len());
                let e = (0..n).map(|i| ea.get(i).unwrap_or(&0) + eb.get(i).unwrap_or(&0)).collect();
                p.add_term(e, ca * cb);
            }
        }
        p
    }

    pub fn eval(&self, b: &[BigRational]) -> BigRational {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter().enumerate().fold(c.clone(), |acc, (i, &k)| acc * num_traits::pow(b[i].clone(), k as usize))
            })
            .fold(BigRational::zero(), |a, x| a + x)
    }

    fn min_power(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| *e.get(var).unwrap_or(&0)).min().unwrap_or(0)
    }

    fn lower_power(&self, var: usize, k: u32) -> Self {
        let mut p = QPoly::zero();
        for (e, c) in &self.terms {
            let mut e = e.clone();
            e[var] -= k;
            p.add_term(e, c.clone());
        }
        p
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { format!("b{i}") } else { format!("b{i}^{k}") })
                .collect();
            let body = match (a.is_one(), mono.is_empty()) {
                (_, true) => a.to_string(),
                (true, false) => mono.join("*"),
                (false, false) => format!("{a}*{}", mono.join("*")),
            };
            match (first, neg) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
            first = false;
        }
        Ok(())
    }
}

/// `C_n(b_0..b_{n-1}) = num / den`: the value of `b_n` at which step `n` loses rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Threshold {
    pub n: u32,
    pub num: QPoly,
    pub den: QPoly,
}

impl Threshold {
    /// Equality as rational functions.
    pub fn same_function(&self, num: &QPoly, den: &QPoly) -> bool {
        self.num.mul(den) == num.mul(&self.den)
    }

    pub fn eval(&self, b: &[BigRational]) -> Option<BigRational> {
        let d = self.den.eval(b);
        (!d.is_zero()).then(|| self.num.eval(b) / d)
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |p: &QPoly| {
            let t = p.to_string();
            if t.contains([' ', '*']) { format!("({t})") } else { t }
        };
        if self.den == QPoly::constant(BigRational::one()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", wrap(&self.num), wrap(&self.den))
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Step-`n` linear system over the unknowns `m_λ`, `λ ⊢ n`, `ℓ(λ) ≤ d`.
#[derive(Clone, Debug)]
pub struct StepSystem {
    pub n: u32,
    pub d: usize,
    pub unknowns: Vec<Partition>,
    /// For each non-trivial `μ ⊢ n`: `prod_j m_{μ_j}` in the m-basis.
    pub identities: Vec<(Partition, Vec<BigRational>)>,
    /// Coefficients of `c_n`, symbolic in the `b_k`.
    pub cn_row: Vec<QPoly>,
}

fn q_of(c: &ScaledRational) -> BigRational {
    debug_assert!(c.is_rational());
    c.q().clone()
}

fn m_vector(p: &SymPoly, unknowns: &[Partition]) -> Result<Vec<BigRational>, UniqError> {
    let coords: BTreeMap<Partition, BigRational> = to_m_basis(p)?.into_iter().map(|(l, c)| (l, q_of(&c))).collect();
    Ok(unknowns.iter().map(|l| coords.get(l).cloned().unwrap_or_else(BigRational::zero)).collect())
}

pub fn step_system(n: u32, d: usize, known: &BTreeSet<u32>) -> Result<StepSystem, UniqError> {
    let unknowns = partitions_le(n, d);
    let mut identities = Vec::new();
    for mu in unknowns.iter().filter(|mu| mu.len() > 1) {
        if let Some(&part) = mu.iter().find(|k| !known.contains(k)) {
            return Err(UniqError::MissingPrerequisite { n, part });
        }
        let mut prod = SymPoly::constant(d, ScaledRational::one());
        for &k in mu {
            prod = poly_mul(&prod, &power_sum(k, d))?;
        }
        identities.push((mu.clone(), m_vector(&prod, &unknowns)?));
    }
    let cn_row = unknowns
        .iter()
        .map(|lam| {
            let mut powers: Vec<(usize, u32)> = lam.iter().map(|&k| (k as usize, 1)).collect();
            powers.push((0, (d - lam.len()) as u32));
            QPoly::monomial(BigRational::one(), &powers)
        })
        .collect();
    Ok(StepSystem { n, d, unknowns, identities, cn_row })
}

/// Symbolic threshold `C_n` from the step-`n` system with all power sums of lower degree known.
pub fn independence_threshold(n: u32, d: usize) -> Result<Threshold, UniqError> {
    let known: BTreeSet<u32> = (1..n).collect();
    let sys = step_system(n, d, &known)?;
    let k = sys.unknowns.len();
    let ints: Vec<Vec<BigInt>> = sys.identities.iter().map(|(_, r)| r.iter().map(|x| x.to_integer()).collect()).collect();
    let mut rest = QPoly::zero();
    let mut lead = BigInt::zero();
    for j in 0..k {
        let minor: Vec<Vec<BigInt>> =
            ints.iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect()).collect();
        let mut cof = bareiss_det(minor);
        if (k - 1 + j) % 2 == 1 {
            cof = -cof;
        }
        if sys.unknowns[j] == vec![n] {
            lead = cof;
        } else {
            rest = rest.add(&sys.cn_row[j].scale(&BigRational::from_integer(cof)));
        }
    }
    if lead.is_zero() {
        return Err(UniqError::StructurallySingular(n));
    }
    // det = b_n b_0^{d-1} lead + rest = 0
    let mut num = rest.scale(&BigRational::from_integer(-BigInt::one()));
    let mut den = QPoly::monomial(BigRational::from_integer(lead), &[(0, d as u32 - 1)]);
    let common = if num.is_zero() { d as u32 - 1 } else { num.min_power(0).min(d as u32 - 1) };
    if common > 0 {
        num = num.lower_power(0, common);
        den = den.lower_power(0, common);
    }
    let mut g = den.terms.values().next().unwrap().numer().abs();
    for c in num.terms.values() {
        g = g.gcd(c.numer());
    }
    let mut scale = BigRational::from_integer(g).recip();
    if den.terms.values().next().unwrap().is_negative() {
        scale = -scale;
    }
    Ok(Threshold { n, num: num.scale(&scale), den: den.scale(&scale) })
}

/// A `b` sequence written as `unit * (rational_k)` with one common radical class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BSeq {
    pub unit: ScaledRational,
    pub rationals: Vec<BigRational>,
}

impl BSeq {
    pub fn from_rationals(b: Vec<BigRational>) -> Self {
        BSeq { unit: ScaledRational::one(), rationals: b }
    }

    pub fn from_scaled(b: &[ScaledRational]) -> Result<Self, UniqError> {
        let first = b.first().filter(|x| !x.is_zero()).ok_or(UniqError::BadSequence)?;
        let unit = first.unit();
        let mut out = Vec::with_capacity(b.len());
        for x in b {
            if x.is_zero() {
                out.push(BigRational::zero());
            } else if x.class() == unit.class() {
                out.push(x.q().clone());
            } else {
                return Err(UniqError::BadSequence);
            }
        }
        Ok(BSeq { unit, rationals: out })
    }

    /// `b_k = a_k Γ(k + 1/2)` from the coefficients of `v`.
    pub fn from_v(len: usize) -> Self {
        let v = v_coefficients(len);
        let b: Vec<ScaledRational> = v
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a.mul(&gamma(Rational64::new(2 * k as i64 + 1, 2)).expect("half-integer")))
            .collect();
        Self::from_scaled(&b).expect("common class")
    }

    pub fn scaled(&self) -> Vec<ScaledRational> {
        self.rationals.iter().map(|q| self.unit.scale(q)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepStatus {
    Informative,
    Degenerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct StepReport {
    pub n: u32,
    pub status: StepStatus,
    pub dimension: usize,
    pub rank: usize,
    pub determined: Vec<String>,
    pub undetermined: Vec<String>,
    pub threshold: Option<Threshold>,
    /// Whether `b_n` equals the threshold evaluated at `b_0..b_{n-1}`.
    pub at_threshold: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EliminationReport {
    pub d: usize,
    pub max_n: u32,
    pub steps: Vec<StepReport>,
    pub power_sums_determined: Vec<u32>,
    pub elementary_determined: Vec<u32>,
    pub undetermined: Vec<String>,
}

impl EliminationReport {
    pub fn degenerate_steps(&self) -> Vec<u32> {
        self.steps.iter().filter(|s| s.status == StepStatus::Degenerate).map(|s| s.n).collect()
    }
}

/// Enumerates multisets of generator indices whose degrees sum to `n`.
fn products(degrees: &[u32], n: u32) -> Vec<Vec<usize>> {
    fn go(degrees: &[u32], start: usize, left: u32, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..degrees.len() {
            if degrees[i] <= left {
                cur.push(i);
                go(degrees, i, left - degrees[i], cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(degrees, 0, n, &mut Vec::new(), &mut out);
    out
}

struct Elimination {
    report: EliminationReport,
    values: BTreeMap<Partition, BigRational>,
}

fn eliminate(d: usize, b: &BSeq, max_n: u32, c_values: Option<&[BigRational]>) -> Result<Elimination, UniqError> {
    if b.rationals.len() <= max_n as usize {
        return Err(UniqError::ShortSequence(max_n));
    }
    if b.rationals[0].is_zero() {
        return Err(UniqError::BadSequence);
    }
    let bq: Vec<ScaledRational> = b.rationals.iter().map(|q| ScaledRational::rational(q.clone())).collect();
    let mut gens: Vec<(u32, SymPoly, Option<BigRational>)> = Vec::new();
    let mut steps = Vec::new();
    let mut values = BTreeMap::new();
    let mut undetermined_all = Vec::new();
    for n in 1..=max_n {
        let unknowns = partitions_le(n, d);
        let degrees: Vec<u32> = gens.iter().map(|g| g.0).collect();
        let mut rows = Vec::new();
        let mut row_vals = Vec::new();
        for combo in products(&degrees, n) {
            let mut p = SymPoly::constant(d, ScaledRational::one());
            let mut val = Some(BigRational::one());
            for &i in &combo {
                p = poly_mul(&p, &gens[i].1)?;
                val = match (val, &gens[i].2) {
                    (Some(a), Some(b)) => Some(a * b),
                    _ => None,
                };
            }
            rows.push(m_vector(&p, &unknowns)?);
            row_vals.push(val);
        }
        let cn = build_cn(d, n, &bq)?;
        let cn_vec = m_vector(&cn, &unknowns)?;
        let before = RowSpace::new(&rows, unknowns.len());
        let degenerate = before.contains(&cn_vec);
        let cn_val = c_values.and_then(|c| c.get(n as usize).cloned());
        if !degenerate {
            rows.push(cn_vec);
            row_vals.push(cn_val.clone());
            gens.push((n, cn, cn_val));
        }
        let space = if degenerate { before } else { RowSpace::new(&rows, unknowns.len()) };
        let mut determined = Vec::new();
        let mut undetermined = Vec::new();
        for (j, lam) in unknowns.iter().enumerate() {
            let e: Vec<BigRational> =
                (0..unknowns.len()).map(|i| if i == j { BigRational::one() } else { BigRational::zero() }).collect();
            match space.express(&e) {
                Some(alpha) => {
                    determined.push(lam.clone());
                    if let Some(v) = alpha
                        .iter()
                        .zip(&row_vals)
                        .try_fold(BigRational::zero(), |acc, (a, v)| if a.is_zero() { Some(acc) } else { v.as_ref().map(|v| acc + a * v) })
                    {
                        values.insert(lam.clone(), v);
                    }
                }
                None => undetermined.push(lam.clone()),
            }
        }
        let threshold = if n >= 2 { independence_threshold(n, d).ok() } else { None };
        let at_threshold = threshold.as_ref().and_then(|t| t.eval(&b.rationals).map(|c| c == b.rationals[n as usize]));
        undetermined_all.extend(undetermined.iter().map(|l| m_label(l)));
        steps.push(StepReport {
            n,
            status: if degenerate { StepStatus::Degenerate } else { StepStatus::Informative },
            dimension: unknowns.len(),
            rank: space.rank(),
            determined: determined.iter().map(|l| m_label(l)).collect(),
            undetermined: undetermined.iter().map(|l| m_label(l)).collect(),
            threshold,
            at_threshold,
        });
    }
    let is_det = |lam: &Partition| steps.iter().any(|s: &StepReport| s.determined.contains(&m_label(lam)));
    let power_sums_determined = (1..=max_n).filter(|&k| is_det(&vec![k])).collect();
    let elementary_determined = (1..=(max_n.min(d as u32))).filter(|&k| is_det(&vec![1; k as usize])).collect();
    Ok(Elimination {
        report: EliminationReport { d, max_n, steps, power_sums_determined, elementary_determined, undetermined: undetermined_all },
        values,
    })
}

/// Runs steps `1..=max_n`. A step is degenerate when `c_n` lies in the span of
/// products of what earlier steps already determined.
pub fn run_elimination(d: usize, b: &BSeq, max_n: u32) -> Result<EliminationReport, UniqError> {
    Ok(eliminate(d, b, max_n, None)?.report)
}

/// Values of every determined `m_λ`, given the rational parts `c_values[n]`
/// of `c_n / unit^d` (index 0 unused).
pub fn recover_symmetric(
    d: usize,
    b: &BSeq,
    max_n: u32,
    c_values: &[BigRational],
) -> Result<BTreeMap<Partition, BigRational>, UniqError> {
    Ok(eliminate(d, b, max_n, Some(c_values))?.values)
}

#[derive(Clone, Debug, Serialize)]
pub struct CertItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub d: usize,
    pub recovered: Vec<String>,
    pub genericity_conditions: Vec<String>,
    pub inputs_used: Vec<u32>,
    pub checks: Vec<CertItem>,
}

fn lin(terms: &[(i64, &[u32])]) -> SymPoly {
    let coords: Vec<(Partition, ScaledRational)> =
        terms.iter().map(|(c, l)| (l.to_vec(), ScaledRational::int(*c))).collect();
    from_m_basis(3, &coords).expect("valid partitions")
}

/// `sqrt(2) pi^{3/2}`, the radical class of `c_n` for `d = 3`.
pub fn kappa() -> ScaledRational {
    ScaledRational::new(BigRational::one(), 1, 1, 1)
}

/// `b_0..b_{len-1}` built from `v`, as exact scalars.
pub fn v_b(len: usize) -> Vec<ScaledRational> {
    BSeq::from_v(len).scaled()
}

/// The `c_n` polynomials for `d = 3` built from the coefficients of `v`.
pub fn v_cn(n: u32) -> Result<SymPoly, UniqError> {
    Ok(build_cn(3, n, &v_b(n as usize + 1))?)
}

fn check(name: &str, lhs: Result<SymPoly, PolyError>, rhs: Result<SymPoly, PolyError>) -> Result<CertItem, UniqError> {
    let (lhs, rhs) = (lhs?, rhs?);
    let detail = match verify_identity(&lhs, &rhs)? {
        None => "exact".to_string(),
        Some(w) => format!("differs at ({})", w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")),
    };
    Ok(CertItem { name: name.into(), passed: detail == "exact", detail })
}

/// Checks the identities that make `c_1, c_3, c_5` determine `{x_1, x_2, x_3}`
/// for the sequence `b` (normally [`v_b`]).
pub fn kod_certificate(b: &[ScaledRational]) -> Result<Certificate, UniqError> {
    if b.len() < 6 {
        return Err(UniqError::ShortSequence(5));
    }
    let c: Vec<SymPoly> =
        (0..=5).map(|n| if n == 0 { Ok(SymPoly::zero(3)) } else { build_cn(3, n, b) }).collect::<Result<_, _>>()?;
    let inv_k = kappa().inv().expect("non-zero");
    let scaled = |p: &SymPoly, s: i64| p.scale(&inv_k.scale(&BigRational::from_integer(s.into())));
    let m1 = power_sum(1, 3);
    let x = |i: usize| SymPoly::var(3, i);
    let pair = |i: usize, j: usize| x(i).add(&x(j));
    let lhs3 = scaled(&c[3], 512);
    let lhs5 = scaled(&c[5], 32768);
    let mut checks = vec![
        check("m1 = -16 c1/(√2π^{3/2})", Ok(scaled(&c[1], -16)), Ok(m1.clone()))?,
        check("c2 = (√2/128)π^{3/2} (m1)^2", Ok(scaled(&c[2], 128)), poly_pow(&m1, 2))?,
        check(
            "5m3 - m21 - 2m111 = 512 c3/(√2π^{3/2})",
            Ok(lhs3.clone()),
            Ok(lin(&[(5, &[3]), (-1, &[2, 1]), (-2, &[1, 1, 1])])),
        )?,
        check(
            "-8192 c4/(√2π^{3/2}) = (m1)^4 + 4 m1 (512 c3/(√2π^{3/2}))",
            Ok(scaled(&c[4], -8192)),
            poly_pow(&m1, 4).and_then(|p| p.add(&poly_mul(&m1, &lhs3)?.scale(&ScaledRational::int(4)))),
        )?,
        check(
            "-399m5 + 21m41 + 10m32 + 20m311 - 2m221 = 32768 c5/(√2π^{3/2})",
            Ok(lhs5.clone()),
            Ok(lin(&[(-399, &[5]), (21, &[4, 1]), (10, &[3, 2]), (20, &[3, 1, 1]), (-2, &[2, 2, 1])])),
        )?,
        check("(m1)^2 = m2 + 2m11", poly_pow(&m1, 2), Ok(lin(&[(1, &[2]), (2, &[1, 1])])))?,
        check("(m1)^3 = m3 + 3m21 + 6m111", poly_pow(&m1, 3), Ok(lin(&[(1, &[3]), (3, &[2, 1]), (6, &[1, 1, 1])])))?,
        check(
            "(m1)^5 = m5 + 5m41 + 10m32 + 20m311 + 30m221",
            poly_pow(&m1, 5),
            Ok(lin(&[(1, &[5]), (5, &[4, 1]), (10, &[3, 2]), (20, &[3, 1, 1]), (30, &[2, 2, 1])])),
        )?,
        check(
            "m21 + 2m111 = (x2+x3)(x1+x3)(x1+x2)",
            Ok(lin(&[(1, &[2, 1]), (2, &[1, 1, 1])])),
            pair(1, 2).and_then(|a| poly_mul(&a, &pair(0, 2)?)).and_then(|a| poly_mul(&a, &pair(0, 1)?)),
        )?,
        check(
            "-32768 c5/(√2π^{3/2}) - 399 (m1)^5 = -32 (x2+x3)(x1+x3)(x1+x2)(63m2 + 62m11)",
            poly_pow(&m1, 5).and_then(|p| lhs5.neg().sub(&p.scale(&ScaledRational::int(399)))),
            pair(1, 2)
                .and_then(|a| poly_mul(&a, &pair(0, 2)?))
                .and_then(|a| poly_mul(&a, &pair(0, 1)?))
                .and_then(|a| poly_mul(&a, &lin(&[(63, &[2]), (62, &[1, 1])])))
                .map(|a| a.scale(&ScaledRational::int(-32))),
        )?,
    ];
    let det = 62 - 2 * 63;
    checks.push(CertItem { name: "det [[1,2],[63,62]] != 0".into(), passed: det != 0, detail: format!("det = {det}") });
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    if !failed.is_empty() {
        return Err(UniqError::IdentityFailure(failed.join("; ")));
    }
    Ok(Certificate {
        d: 3,
        recovered: ["m1", "m2", "m3", "e1", "e2", "e3"].iter().map(|s| s.to_string()).collect(),
        genericity_conditions: vec!["(x1+x2)(x1+x3)(x2+x3) != 0".into()],
        inputs_used: vec![1, 3, 5],
        checks,
    })
}

/// Output of the exact recovery from `c_1, c_3, c_5`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveredSet {
    pub power_sums: [BigRational; 3],
    pub elementary: [BigRational; 3],
    /// Sorted `x_i` when the cubic splits over the rationals.
    pub roots: Option<Vec<BigRational>>,
}

fn rational_part(c: &ScaledRational) -> Result<BigRational, UniqError> {
    let k = kappa();
    let r = c.div(&k).map_err(|_| UniqError::Degenerate("division by zero".into()))?;
    if !r.is_rational() {
        return Err(UniqError::Degenerate(format!("{c} is not a rational multiple of √2π^{{3/2}}")));
    }
    Ok(r.q().clone())
}

/// Recovers `{x_1, x_2, x_3}` from the values of `c_1, c_3, c_5`.
pub fn recover_triple(c1: &ScaledRational, c3: &ScaledRational, c5: &ScaledRational) -> Result<RecoveredSet, UniqError> {
    let r = |n: i64| BigRational::from_integer(n.into());
    let m1 = rational_part(c1)? * r(-16);
    let r3 = rational_part(c3)? * r(512);
    let r5 = rational_part(c5)? * r(32768);
    let m1_3 = &m1 * &m1 * &m1;
    let m3 = (&m1_3 + &r3 * r(3)) / r(16);
    let s = &m3 * r(5) - &r3;
    if s.is_zero() {
        return Err(UniqError::Degenerate("(x2+x3)(x1+x3)(x1+x2) = 0".into()));
    }
    let m1_5 = &m1_3 * &m1 * &m1;
    let quad = (&r5 + m1_5 * r(399)) / (&s * r(32));
    let m2 = (&quad - &m1 * &m1 * r(31)) / r(32);
    let e1 = m1.clone();
    let e2 = (&m1 * &m1 - &m2) / r(2);
    let e3 = (&m1_3 - &m1 * &m2 * r(3) + &m3 * r(2)) / r(6);
    let roots = rational_roots_cubic(&e1, &e2, &e3);
    Ok(RecoveredSet { power_sums: [m1, m2, m3], elementary: [e1, e2, e3], roots })
}

fn rationalize(x: f64, max_den: i64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i128, 1i128, 1i128, 0i128);
    let mut y = x;
    let mut best = None;
    for _ in 0..64 {
        let a = y.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den as i128 {
            break;
        }
        best = Some(BigRational::new(BigInt::from(h2), BigInt::from(k2)));
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let f = y - a;
        if f.abs() < 1e-300 {
            break;
        }
        y = 1.0 / f;
    }
    best
}

fn rat_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
}

/// Rational roots of `z^3 - e1 z^2 + e2 z - e3`, if all three are rational.
fn rational_roots_cubic(e1: &BigRational, e2: &BigRational, e3: &BigRational) -> Option<Vec<BigRational>> {
    let p = |z: &BigRational| z * z * z - e1 * z * z + e2 * z - e3;
    let f = |v: &BigRational| v.to_f64().unwrap_or(f64::NAN);
    let (a, b, c) = (-f(e1), f(e2), -f(e3));
    // real roots of z^3 + a z^2 + b z + c by a sampled sign scan and bisection
    let bound = 1.0 + a.abs().max(b.abs()).max(c.abs());
    let g = |z: f64| ((z + a) * z + b) * z + c;
    let mut cands = Vec::new();
    let steps = 20000;
    let mut prev = -bound;
    for i in 1..=steps {
        let z = -bound + 2.0 * bound * i as f64 / steps as f64;
        if g(prev) == 0.0 || g(prev).signum() != g(z).signum() {
            let (mut lo, mut hi) = (prev, z);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(lo).signum() == g(mid).signum() && g(mid) != 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cands.push(0.5 * (lo + hi));
        }
        // double roots touch without a sign change: check the local minimum of |g|
        prev = z;
    }
    // stationary points catch double roots
    let disc = a * a - 3.0 * b;
    if disc >= 0.0 {
        for s in [-1.0, 1.0] {
            cands.push((-a + s * disc.sqrt()) / 3.0);
        }
    }
    for z in cands {
        for den in [1_000, 1_000_000, 1_000_000_000] {
            let Some(r) = rationalize(z, den) else { continue };
            if p(&r).is_zero() {
                // deflate: z^2 + (r - e1) z + e3 / r (or via coefficients when r = 0)
                let b1 = &r - e1;
                let b0 = e2 + &r * &b1;
                let disc = &b1 * &b1 - &b0 * BigRational::from_integer(4.into());
                let sq = rat_sqrt(&disc)?;
                let two = BigRational::from_integer(2.into());
                let mut roots = vec![r, (-&b1 + &sq) / &two, (-&b1 - sq) / two];
                roots.sort();
                return Some(roots);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(i: usize, k: u32) -> (usize, u32) {
        (i, k)
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn threshold_three() {
        let t = independence_threshold(3, 3).unwrap();
        let num = QPoly::monomial(q(3, 1), &[b(0, 1), b(1, 1), b(2, 1)]).add(&QPoly::monomial(q(-1, 1), &[b(1, 3)]));
        let den = QPoly::monomial(q(3, 1), &[b(0, 2)]);
        assert!(t.same_function(&num, &den), "{t}");
    }

    #[test]
    fn threshold_two_from_symmetric_identity() {
        let t = independence_threshold(2, 3).unwrap();
        assert_eq!(t.to_string(), "b1^2/(2*b0)");
    }

    #[test]
    fn missing_prerequisite() {
        let known: BTreeSet<u32> = [1].into_iter().collect();
        let err = step_system(3, 3, &known).unwrap_err();
        assert_eq!(err, UniqError::MissingPrerequisite { n: 3, part: 2 });
    }

    #[test]
    fn v_steps_two_and_four_degenerate() {
        let r = run_elimination(3, &BSeq::from_v(6), 5).unwrap();
        assert_eq!(r.degenerate_steps(), vec![2, 4]);
        assert_eq!(r.power_sums_determined, vec![1, 3, 5]);
    }

    #[test]
    fn certificate_passes() {
        let c = kod_certificate(&v_b(21)).unwrap();
        assert_eq!(c.inputs_used, vec![1, 3, 5]);
        assert!(c.checks.iter().all(|i| i.passed));
    }

    #[test]
    fn tampered_b5_fails_factorisation() {
        let mut b = v_b(6);
        b[5] = b[5].add(&b[5].unit()).unwrap();
        match kod_certificate(&b) {
            Err(UniqError::IdentityFailure(names)) => assert!(names.contains("(x2+x3)(x1+x3)(x1+x2)(63m2"), "{names}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn recover_small_triple() {
        let x = [q(1, 1), q(2, 1), q(-1, 3)];
        let c: Vec<ScaledRational> = [1, 3, 5].iter().map(|&n| v_cn(n).unwrap().eval(&x).unwrap()).collect();
        let r = recover_triple(&c[0], &c[1], &c[2]).unwrap();
        let mut expect = x.to_vec();
        expect.sort();
        assert_eq!(r.roots, Some(expect));
    }
}
