//! Reference tables as a JSON report, and a structural diff against the
//! golden file shipped with the crate.

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::exact_scalar::ScaledRational;
use crate::sympoly::{partitions_le, poly_mul, poly_pow, power_sum, to_m_basis, PolyError, SymPoly};
use crate::uniqueness::{kappa, v_cn};

pub const TABLES: &str = include_str!("../golden/tables.json");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GoldenError {
    #[error("mismatch at {path}: expected {expected}, found {found}")]
    Mismatch { path: String, expected: String, found: String },
    #[error("malformed golden file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn key(e: &[u32]) -> String {
    e.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
}

fn coeff_value(c: &ScaledRational) -> Value {
    if c.is_rational() && c.q().is_integer() {
        if let Ok(i) = i64::try_from(c.q().to_integer()) {
            return json!(i);
        }
    }
    json!(c)
}

/// Monomial map `"e1,e2,e3" -> coefficient`.
pub fn monomials(p: &SymPoly) -> Value {
    let mut m = Map::new();
    for (e, c) in &p.terms {
        m.insert(key(e), coeff_value(c));
    }
    Value::Object(m)
}

/// `c_n` for `d = 3`, terms in ascending lexicographic partition order.
pub fn cn_terms(n: u32) -> Result<Value, GoldenError> {
    let cn = v_cn(n).map_err(|e| GoldenError::Malformed(e.to_string()))?;
    let mut basis = to_m_basis(&cn)?;
    basis.sort_by(|a, b| a.0.cmp(&b.0));
    let terms: Vec<Value> = basis.iter().map(|(l, c)| json!({"m": l, "coeff": c})).collect();
    Ok(json!({"n": n, "terms": terms}))
}

/// Recomputes everything recorded in [`TABLES`].
pub fn tables_report() -> Result<Value, GoldenError> {
    let b: Vec<Value> = (1..=5).map(cn_terms).collect::<Result<_, _>>()?;
    let m1 = power_sum(1, 3);
    let mut exp = Map::new();
    for k in [2, 3, 5] {
        exp.insert(format!("m1^{k}"), monomials(&poly_pow(&m1, k)?));
    }
    let c5 = v_cn(5).map_err(|e| GoldenError::Malformed(e.to_string()))?;
    let scale = kappa().inv().expect("non-zero").scale(&num_rational::BigRational::from_integer((-32768).into()));
    let lhs5 = c5.scale(&scale).sub(&poly_pow(&m1, 5)?.scale(&ScaledRational::int(399)))?;
    let mut m21 = SymPoly::zero(3);
    for lam in partitions_le(3, 3).into_iter().filter(|l| l.len() > 1) {
        let c = if lam.len() == 3 { 2 } else { 1 };
        m21 = m21.add(&crate::sympoly::monomial_symmetric(&lam, 3)?.scale(&ScaledRational::int(c)))?;
    }
    Ok(json!({
        "B": b,
        "expansions": exp,
        "factorisations": {
            "-(32768/(sqrt2 pi^(3/2))) B[5] - 399 m1^5": {"expanded": monomials(&lhs5)},
            "m21 + 2 m111": {"expanded": monomials(&m21)},
        }
    }))
}

fn poly_from_map(v: &Value) -> Result<SymPoly, GoldenError> {
    let obj = v.as_object().ok_or_else(|| GoldenError::Malformed("factor is not an object".into()))?;
    let mut p = SymPoly::zero(3);
    for (k, c) in obj {
        let e: Vec<u32> = k.split(',').map(|s| s.trim().parse()).collect::<Result<_, _>>().map_err(|_| GoldenError::Malformed(k.clone()))?;
        let c = c.as_i64().ok_or_else(|| GoldenError::Malformed(format!("coefficient of {k}")))?;
        p.add_term(e, ScaledRational::int(c)).map_err(PolyError::from)?;
    }
    Ok(p)
}

/// Replaces each `{constant, factors}` record by its expanded product.
pub fn expand_factorisations(golden: &Value) -> Result<Value, GoldenError> {
    let mut g = golden.clone();
    if let Some(fs) = g.get_mut("factorisations").and_then(Value::as_object_mut) {
        for rec in fs.values_mut() {
            let c = rec.get("constant").and_then(Value::as_i64).ok_or_else(|| GoldenError::Malformed("constant".into()))?;
            let mut prod = SymPoly::constant(3, ScaledRational::int(c));
            for f in rec.get("factors").and_then(Value::as_array).ok_or_else(|| GoldenError::Malformed("factors".into()))? {
                prod = poly_mul(&prod, &poly_from_map(f)?)?;
            }
            *rec = json!({"expanded": monomials(&prod)});
        }
    }
    Ok(g)
}

fn short(v: &Value) -> String {
    let s = v.to_string();
    if s.len() > 80 {
        format!("{}...", &s[..77])
    } else {
        s
    }
}

fn diff(path: &str, expected: &Value, found: &Value) -> Result<(), GoldenError> {
    let mismatch = || GoldenError::Mismatch { path: path.to_string(), expected: short(expected), found: short(found) };
    match (expected, found) {
        (Value::Object(a), Value::Object(b)) => {
            for (k, va) in a {
                let p = format!("{path}.{k}");
                match b.get(k) {
                    Some(vb) => diff(&p, va, vb)?,
                    None => return Err(GoldenError::Mismatch { path: p, expected: short(va), found: "missing".into() }),
                }
            }
            if let Some(k) = b.keys().find(|k| !a.contains_key(*k)) {
                return Err(GoldenError::Mismatch { path: format!("{path}.{k}"), expected: "absent".into(), found: short(&b[k]) });
            }
            Ok(())
        }
        (Value::Array(a), Value::Array(b)) => {
            for (i, (va, vb)) in a.iter().zip(b).enumerate() {
                diff(&format!("{path}[{i}]"), va, vb)?;
            }
            if a.len() != b.len() {
                return Err(GoldenError::Mismatch {
                    path: format!("{path}.len"),
                    expected: a.len().to_string(),
                    found: b.len().to_string(),
                });
            }
            Ok(())
        }
        _ if expected == found => Ok(()),
        _ => Err(mismatch()),
    }
}

/// Structural comparison; reports the first divergent path.
pub fn golden_diff(report: &Value, golden: &Value) -> Result<(), GoldenError> {
    let golden = expand_factorisations(golden)?;
    // only sections present in the report are compared
    let sections: Map<String, Value> = golden
        .as_object()
        .ok_or_else(|| GoldenError::Malformed("top level".into()))?
        .iter()
        .filter(|(k, _)| report.get(k.as_str()).is_some())
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    diff("$", &Value::Object(sections), report)
}

pub fn load_golden(text: &str) -> Result<Value, GoldenError> {
    serde_json::from_str(text).map_err(|e| GoldenError::Malformed(e.to_string()))
}
