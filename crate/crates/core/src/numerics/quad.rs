//! Adaptive Gauss-Kronrod (7/15) quadrature and endpoint substitutions.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

impl QuadResult {
    pub fn zero() -> Self {
        QuadResult { value: 0.0, error: 0.0 }
    }

    pub fn plus(self, o: QuadResult) -> Self {
        QuadResult { value: self.value + o.value, error: self.error + o.error }
    }
}

fn gk15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> QuadResult {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    QuadResult { value: k * h, error: ((k - g) * h).abs() }
}

struct Piece {
    a: f64,
    b: f64,
    r: QuadResult,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.r.error == o.r.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.r.error.total_cmp(&o.r.error)
    }
}

/// Globally adaptive integration of `f` over `[a, b]`. Stops when the summed
/// error estimate is below `max(abs_tol, rel_tol * |value|)` or after `max_pieces`.
pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> QuadResult {
    if a == b {
        return QuadResult::zero();
    }
    let max_pieces = 2000;
    let first = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, r: first });
    let (mut value, mut error) = (first.value, first.error);
    while error > abs_tol.max(rel_tol * value.abs()) && heap.len() < max_pieces {
        let p = heap.pop().expect("non-empty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a.min(p.b) || m >= p.a.max(p.b) || (p.b - p.a).abs() < 1e-15 * (1.0 + p.a.abs()) {
            heap.push(p);
            break;
        }
        let l = gk15(f, p.a, m);
        let r = gk15(f, m, p.b);
        value += l.value + r.value - p.r.value;
        error += l.error + r.error - p.r.error;
        heap.push(Piece { a: p.a, b: m, r: l });
        heap.push(Piece { a: m, b: p.b, r: r });
    }
    // re-sum to shed accumulated rounding
    let (v, e) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.r.value, e + p.r.error));
    QuadResult { value: v, error: e.max(0.0) }
}

/// Integral over `[a, b]` with optional `|s - end|^{-1/2}`-type endpoint
/// singularities removed by `s = end ± w^2`.
pub fn integrate_edges<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    sing_a: bool,
    sing_b: bool,
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult {
    if b <= a {
        return QuadResult::zero();
    }
    match (sing_a, sing_b) {
        (true, true) => {
            let m = 0.5 * (a + b);
            integrate_edges(f, a, m, true, false, 0.5 * abs_tol, rel_tol)
                .plus(integrate_edges(f, m, b, false, true, 0.5 * abs_tol, rel_tol))
        }
        (true, false) => {
            let g = |w: f64| 2.0 * w * f(a + w * w);
            integrate(&g, 0.0, (b - a).sqrt(), abs_tol, rel_tol)
        }
        (false, true) => {
            let g = |w: f64| 2.0 * w * f(b - w * w);
            integrate(&g, 0.0, (b - a).sqrt(), abs_tol, rel_tol)
        }
        (false, false) => integrate(f, a, b, abs_tol, rel_tol),
    }
}
