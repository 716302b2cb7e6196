//! Sparse polynomials in `d` variables with exact coefficients, monomial
//! symmetric functions and partitions.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact_scalar::{ScalarError, ScaledRational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("polynomial is not symmetric (monomial {0:?})")]
    NotSymmetric(Vec<u32>),
    #[error("partition {0:?} has more than {1} parts")]
    TooManyParts(Vec<u32>, usize),
    #[error("variable count mismatch: {0} vs {1}")]
    Arity(usize, usize),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

pub type Partition = Vec<u32>;

/// Partitions of `n` in reverse-lexicographic order: `(n), (n-1,1), ...`.
pub fn partitions(n: u32) -> Vec<Partition> {
    fn go(n: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for k in (1..=n.min(max)).rev() {
            prefix.push(k);
            go(n - k, k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Partitions of `n` with at most `d` parts, reverse-lex order.
pub fn partitions_le(n: u32, d: usize) -> Vec<Partition> {
    partitions(n).into_iter().filter(|p| p.len() <= d).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymPoly {
    pub d: usize,
    pub terms: BTreeMap<Vec<u32>, ScaledRational>,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: Vec<u32>,
    coeff: ScaledRational,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    d: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for SymPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms = self.terms.iter().rev().map(|(e, c)| TermRepr { exp: e.clone(), coeff: c.clone() }).collect();
        PolyRepr { d: self.d, terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymPoly {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let r = PolyRepr::deserialize(de)?;
        let mut p = SymPoly::zero(r.d);
        for t in r.terms {
            if t.exp.len() != r.d {
                return Err(serde::de::Error::custom("exponent length differs from d"));
            }
            p.add_term(t.exp, t.coeff).map_err(serde::de::Error::custom)?;
        }
        Ok(p)
    }
}

impl SymPoly {
    pub fn zero(d: usize) -> Self {
        SymPoly { d, terms: BTreeMap::new() }
    }

    pub fn constant(d: usize, c: ScaledRational) -> Self {
        let mut p = Self::zero(d);
        if !c.is_zero() {
            p.terms.insert(vec![0; d], c);
        }
        p
    }

    pub fn var(d: usize, i: usize) -> Self {
        let mut e = vec![0; d];
        e[i] = 1;
        let mut p = Self::zero(d);
        p.terms.insert(e, ScaledRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exp: Vec<u32>, c: ScaledRational) -> Result<(), ScalarError> {
        let next = match self.terms.get(&exp) {
            Some(old) => old.add(&c)?,
            None => c,
        };
        if next.is_zero() {
            self.terms.remove(&exp);
        } else {
            self.terms.insert(exp, next);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        if self.d != other.d {
            return Err(PolyError::Arity(self.d, other.d));
        }
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        SymPoly { d: self.d, terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &ScaledRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.d);
        }
        SymPoly { d: self.d, terms: self.terms.iter().map(|(e, x)| (e.clone(), x.mul(c))).collect() }
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn eval(&self, x: &[BigRational]) -> Result<ScaledRational, PolyError> {
        if x.len() != self.d {
            return Err(PolyError::Arity(self.d, x.len()));
        }
        let mut acc = ScaledRational::zero();
        for (e, c) in &self.terms {
            let mut m = BigRational::from_integer(1.into());
            for (xi, &k) in x.iter().zip(e) {
                m *= num_traits::pow(xi.clone(), k as usize);
            }
            acc = acc.add(&c.scale(&m))?;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c.to_f64() * x.iter().zip(e).map(|(xi, &k)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }
}

pub fn poly_mul(a: &SymPoly, b: &SymPoly) -> Result<SymPoly, PolyError> {
    if a.d != b.d {
        return Err(PolyError::Arity(a.d, b.d));
    }
    let mut out = SymPoly::zero(a.d);
    for (ea, ca) in &a.terms {
        for (eb, cb) in &b.terms {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            out.add_term(e, ca.mul(cb))?;
        }
    }
    Ok(out)
}

pub fn poly_pow(a: &SymPoly, k: u32) -> Result<SymPoly, PolyError> {
    let mut out = SymPoly::constant(a.d, ScaledRational::one());
    for _ in 0..k {
        out = poly_mul(&out, a)?;
    }
    Ok(out)
}

fn distinct_permutations(v: &[u32]) -> Vec<Vec<u32>> {
    let mut items = v.to_vec();
    items.sort_unstable();
    let mut out = vec![items.clone()];
    // next_permutation over the sorted multiset
    loop {
        let n = items.len();
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| items[i] < items[i + 1]) else { break };
        let j = (i + 1..n).rev().find(|&j| items[j] > items[i]).unwrap();
        items.swap(i, j);
        items[i + 1..].reverse();
        out.push(items.clone());
    }
    out
}

/// `m_λ` in `d` variables: the sum of the distinct permutations of `x^λ`.
pub fn monomial_symmetric(lambda: &[u32], d: usize) -> Result<SymPoly, PolyError> {
    let parts: Vec<u32> = lambda.iter().copied().filter(|&k| k > 0).collect();
    if parts.len() > d {
        return Err(PolyError::TooManyParts(parts, d));
    }
    let mut e = parts.clone();
    e.resize(d, 0);
    let mut p = SymPoly::zero(d);
    for perm in distinct_permutations(&e) {
        p.terms.insert(perm, ScaledRational::one());
    }
    Ok(p)
}

/// Power sum `x_1^k + ... + x_d^k` (equal to `m_(k)`).
pub fn power_sum(k: u32, d: usize) -> SymPoly {
    monomial_symmetric(&[k], d).expect("one part")
}

fn sorted_desc(e: &[u32]) -> Partition {
    let mut p: Vec<u32> = e.iter().copied().filter(|&k| k > 0).collect();
    p.sort_unstable_by(|a, b| b.cmp(a));
    p
}

/// Coordinates in the monomial symmetric basis, ordered by partition in
/// reverse-lex order within each degree (highest degree first).
pub fn to_m_basis(p: &SymPoly) -> Result<Vec<(Partition, ScaledRational)>, PolyError> {
    let mut coords: BTreeMap<Partition, ScaledRational> = BTreeMap::new();
    for (e, c) in &p.terms {
        let lam = sorted_desc(e);
        match coords.get(&lam) {
            Some(old) if old != c => return Err(PolyError::NotSymmetric(e.clone())),
            _ => {
                coords.insert(lam, c.clone());
            }
        }
    }
    let mut rebuilt = SymPoly::zero(p.d);
    for (lam, c) in &coords {
        rebuilt = rebuilt.add(&monomial_symmetric(lam, p.d)?.scale(c))?;
    }
    if &rebuilt != p {
        let bad = p.terms.keys().find(|e| rebuilt.terms.get(*e) != p.terms.get(*e)).cloned();
        let bad = bad.or_else(|| rebuilt.terms.keys().find(|e| !p.terms.contains_key(*e)).cloned()).unwrap_or_default();
        return Err(PolyError::NotSymmetric(bad));
    }
    let mut out: Vec<(Partition, ScaledRational)> = coords.into_iter().collect();
    out.sort_by(|(a, _), (b, _)| {
        let (da, db) = (a.iter().sum::<u32>(), b.iter().sum::<u32>());
        db.cmp(&da).then_with(|| b.cmp(a))
    });
    Ok(out)
}

/// `sum_λ c_λ m_λ` from m-basis coordinates.
pub fn from_m_basis(d: usize, coords: &[(Partition, ScaledRational)]) -> Result<SymPoly, PolyError> {
    let mut p = SymPoly::zero(d);
    for (lam, c) in coords {
        p = p.add(&monomial_symmetric(lam, d)?.scale(c))?;
    }
    Ok(p)
}

/// Exact check `lhs == prod factors` after expanding the right side.
pub fn factor_check(lhs: &SymPoly, factors: &[SymPoly]) -> Result<bool, PolyError> {
    let mut prod = SymPoly::constant(lhs.d, ScaledRational::one());
    for f in factors {
        prod = poly_mul(&prod, f)?;
    }
    Ok(&prod == lhs)
}

/// `Ok(None)` when `lhs == rhs`, otherwise a rational point where they differ.
pub fn verify_identity(lhs: &SymPoly, rhs: &SymPoly) -> Result<Option<Vec<BigRational>>, PolyError> {
    let diff = lhs.sub(rhs)?;
    if diff.is_zero() {
        return Ok(None);
    }
    // a non-zero polynomial of degree k cannot vanish on the whole grid {0..k}^d
    let k = diff.degree().unwrap_or(0) as u64 + 1;
    let total = k.pow(diff.d as u32);
    for idx in 0..total {
        let mut r = idx;
        let pt: Vec<BigRational> = (0..diff.d)
            .map(|_| {
                let v = r % k;
                r /= k;
                BigRational::from_integer((v as i64).into())
            })
            .collect();
        if !diff.eval(&pt)?.is_zero() {
            return Ok(Some(pt));
        }
    }
    unreachable!("non-zero polynomial vanished on a full grid")
}

/// `c_n = sum_{λ ⊢ n, ℓ(λ) ≤ d} b_0^{d-ℓ(λ)} prod_j b_{λ_j} m_λ`.
pub fn build_cn(d: usize, n: u32, b: &[ScaledRational]) -> Result<SymPoly, PolyError> {
    let mut out = SymPoly::zero(d);
    for lam in partitions_le(n, d) {
        let mut c = b[0].pow((d - lam.len()) as i64)?;
        for &k in &lam {
            c = c.mul(&b[k as usize]);
        }
        out = out.add(&monomial_symmetric(&lam, d)?.scale(&c))?;
    }
    Ok(out)
}

/// Compact label such as `m311` or `m(10,2)` for a partition.
pub fn m_label(lam: &[u32]) -> String {
    if lam.iter().all(|&k| k < 10) {
        format!("m{}", lam.iter().map(|k| k.to_string()).collect::<String>())
    } else {
        format!("m({})", lam.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","))
    }
}
