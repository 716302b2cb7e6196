//! Exact linear algebra over the rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Determinant of an integer matrix by fraction-free (Bareiss) elimination.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Rank of an integer matrix by fraction-free elimination.
pub fn bareiss_rank(rows: &[Vec<BigInt>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let (nr, nc) = (m.len(), m.first().map_or(0, |r| r.len()));
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..nc {
        let Some(p) = (r..nr).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in r + 1..nr {
            for j in c + 1..nc {
                m[i][j] = (&m[i][j] * &m[r][c] - &m[i][c] * &m[r][j]) / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
        if r == nr {
            break;
        }
    }
    r
}

/// Scales a rational row to a primitive integer row.
pub fn integer_row(row: &[BigRational]) -> Vec<BigInt> {
    use num_integer::Integer;
    let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect()
}

/// Row space of a rational matrix, kept in reduced echelon form together with
/// the transformation back to the original rows.
pub struct RowSpace {
    width: usize,
    originals: usize,
    rows: Vec<Vec<BigRational>>,
    combo: Vec<Vec<BigRational>>,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(rows: &[Vec<BigRational>], width: usize) -> Self {
        let n = rows.len();
        let mut m: Vec<Vec<BigRational>> = rows.to_vec();
        let mut t: Vec<Vec<BigRational>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..width {
            let Some(p) = (r..n).find(|&i| !m[i][c].is_zero()) else { continue };
            m.swap(r, p);
            t.swap(r, p);
            let inv = m[r][c].recip();
            for x in m[r].iter_mut() {
                *x *= &inv;
            }
            for x in t[r].iter_mut() {
                *x *= &inv;
            }
            for i in 0..n {
                if i != r && !m[i][c].is_zero() {
                    let f = m[i][c].clone();
                    for j in 0..width {
                        let v = &m[r][j] * &f;
                        m[i][j] -= v;
                    }
                    for j in 0..n {
                        let v = &t[r][j] * &f;
                        t[i][j] -= v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        m.truncate(r);
        t.truncate(r);
        RowSpace { width, originals: n, rows: m, combo: t, pivots }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Coefficients `alpha` with `sum alpha_i original_i == v`, if `v` is in the span.
    pub fn express(&self, v: &[BigRational]) -> Option<Vec<BigRational>> {
        let mut rest = v.to_vec();
        let mut alpha = vec![BigRational::zero(); self.originals];
        for (k, &c) in self.pivots.iter().enumerate() {
            let f = rest[c].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..self.width {
                let d = &self.rows[k][j] * &f;
                rest[j] -= d;
            }
            for j in 0..self.originals {
                alpha[j] += &self.combo[k][j] * &f;
            }
        }
        rest.iter().all(|x| x.is_zero()).then_some(alpha)
    }

    pub fn contains(&self, v: &[BigRational]) -> bool {
        self.express(v).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn det_and_rank() {
        assert_eq!(bareiss_det(bi(&[&[2, 1], &[1, 3]])), BigInt::from(5));
        assert_eq!(bareiss_det(bi(&[&[0, 1, 2], &[1, 0, 3], &[4, -3, 8]])), BigInt::from(-2));
        assert_eq!(bareiss_rank(&bi(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]])), 2);
    }

    #[test]
    fn express_in_span() {
        let r = |v: &[i64]| v.iter().map(|&x| BigRational::from_integer(x.into())).collect::<Vec<_>>();
        let space = RowSpace::new(&[r(&[1, 3, 6]), r(&[5, -1, -2])], 3);
        let alpha = space.express(&r(&[1, 0, 0])).unwrap();
        assert_eq!(alpha, vec![BigRational::new(1.into(), 16.into()), BigRational::new(3.into(), 16.into())]);
        assert!(!space.contains(&r(&[0, 0, 1])));
    }
}
