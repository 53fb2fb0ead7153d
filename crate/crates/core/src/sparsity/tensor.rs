//! Rank-1 tensor helpers: unfoldings, alternating maximization and greedy
//! deflation. Tensors are flat arrays, order `d`, mode size `n`, last mode
//! fastest.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMatrix};
use crate::signal::{inner, norm2};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Scalar field of the rank-1 factors generating the hull.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Real,
    #[default]
    Complex,
}

/// Mode-`mode` unfolding: an `n × n^{d-1}` matrix with row index `i_mode`.
pub fn unfold(t: &[Complex64], n: usize, d: usize, mode: usize) -> CMatrix {
    let cols = t.len() / n;
    let stride = n.pow((d - 1 - mode) as u32);
    let mut m = CMatrix::zeros(n, cols);
    for (idx, v) in t.iter().enumerate() {
        let i = (idx / stride) % n;
        let hi = idx / (stride * n);
        let lo = idx % stride;
        m[(i, hi * stride + lo)] = *v;
    }
    m
}

/// `⊗_l y_l` as a flat array.
pub fn outer(factors: &[Vec<Complex64>]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * f.len());
        for a in &out {
            for b in f {
                next.push(a * b);
            }
        }
        out = next;
    }
    out
}

/// Contract `t` with `conj(y_k)` on every mode except `mode`.
fn partial_contraction(t: &[Complex64], factors: &[Vec<Complex64>], n: usize, mode: usize) -> Vec<Complex64> {
    let d = factors.len();
    let mut v = vec![ZERO; n];
    for (idx, val) in t.iter().enumerate() {
        let mut w = *val;
        let mut rest = idx;
        let mut own = 0;
        for k in (0..d).rev() {
            let i = rest % n;
            rest /= n;
            if k == mode {
                own = i;
            } else {
                w *= factors[k][i].conj();
            }
        }
        v[own] += w;
    }
    v
}

/// Unit `y` maximizing `|⟨y, v⟩|` over the field.
fn best_unit(v: &[Complex64], field: Field) -> Vec<Complex64> {
    match field {
        Field::Complex => {
            let nv = norm2(v);
            if nv == 0.0 {
                let mut e = vec![ZERO; v.len()];
                e[0] = Complex64::new(1.0, 0.0);
                return e;
            }
            v.iter().map(|z| z / nv).collect()
        }
        Field::Real => {
            // max_y |y·v| over real unit y is the top singular value of the
            // 2 × n matrix [Re v; Im v]; y is its top right singular vector.
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for z in v {
                a += z.re * z.re;
                b += z.re * z.im;
                c += z.im * z.im;
            }
            let tr = a + c;
            let det = a * c - b * b;
            let lam = tr / 2.0 + ((tr * tr / 4.0 - det).max(0.0)).sqrt();
            let (p, q) = if b.abs() > 1e-300 {
                (b, lam - a)
            } else if a >= c {
                (1.0, 0.0)
            } else {
                (0.0, 1.0)
            };
            let y: Vec<f64> = v.iter().map(|z| p * z.re + q * z.im).collect();
            let ny = y.iter().map(|x| x * x).sum::<f64>().sqrt();
            if ny == 0.0 {
                let mut e = vec![ZERO; v.len()];
                e[0] = Complex64::new(1.0, 0.0);
                return e;
            }
            y.iter().map(|x| Complex64::new(x / ny, 0.0)).collect()
        }
    }
}

/// Best rank-1 unit tensor found by alternating maximization.
#[derive(Debug, Clone)]
pub struct Rank1 {
    pub factors: Vec<Vec<Complex64>>,
    /// `⟨⊗y, t⟩`.
    pub coefficient: Complex64,
}

fn refine(t: &[Complex64], n: usize, field: Field, mut factors: Vec<Vec<Complex64>>) -> Rank1 {
    let d = factors.len();
    let mut last = 0.0;
    for _ in 0..500 {
        for mode in 0..d {
            let v = partial_contraction(t, &factors, n, mode);
            factors[mode] = best_unit(&v, field);
        }
        let val = inner(&outer(&factors), t).norm();
        if val - last <= 1e-15 * val.max(1e-300) {
            last = val;
            break;
        }
        last = val;
    }
    let coefficient = inner(&outer(&factors), t);
    debug_assert!((coefficient.norm() - last).abs() <= 1e-9 * last.max(1.0));
    Rank1 {
        factors,
        coefficient,
    }
}

/// Alternating rank-1 maximization of `|⟨⊗y, t⟩|` from several deterministic
/// starts: leading singular vectors of each unfolding, and the basis
/// directions through the largest entries. Returns the best local optimum,
/// a lower bound on the injective norm of `t`.
pub fn best_rank1(t: &[Complex64], n: usize, d: usize, field: Field) -> Rank1 {
    let mut starts: Vec<Vec<Vec<Complex64>>> = Vec::new();

    let hosvd: Vec<Vec<Complex64>> = (0..d)
        .map(|mode| {
            let m = unfold(t, n, d, mode);
            let u = match m.clone().svd(true, false).u {
                Some(u) => {
                    let sv = m.singular_values();
                    let top = (0..sv.len())
                        .max_by(|&a, &b| sv[a].total_cmp(&sv[b]))
                        .unwrap_or(0);
                    u.column(top).iter().copied().collect::<Vec<_>>()
                }
                None => vec![Complex64::new(1.0, 0.0); n],
            };
            best_unit(&u, field)
        })
        .collect();
    starts.push(hosvd);

    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_by(|&a, &b| t[b].norm_sqr().total_cmp(&t[a].norm_sqr()).then(a.cmp(&b)));
    for &idx in order.iter().take(3) {
        let mut rest = idx;
        let mut factors = vec![vec![ZERO; n]; d];
        for k in (0..d).rev() {
            factors[k][rest % n] = Complex64::new(1.0, 0.0);
            rest /= n;
        }
        starts.push(factors);
    }

    starts
        .into_iter()
        .map(|f| refine(t, n, field, f))
        .max_by(|a, b| a.coefficient.norm().total_cmp(&b.coefficient.norm()))
        .expect("at least one start")
}

/// `max_l ‖t_(l)‖_{S_1}`: each unfolding of a unit rank-1 tensor has nuclear
/// norm 1, so this is a lower bound on the projective norm.
pub fn unfolding_nuclear_lower(t: &[Complex64], n: usize, d: usize) -> f64 {
    (0..d)
        .map(|mode| linalg::schatten_norm(&unfold(t, n, d, mode), 1.0))
        .fold(0.0, f64::max)
}

/// `min_l ‖t_(l)‖_{S_∞}`: an upper bound on the injective norm.
pub fn unfolding_spectral_upper(t: &[Complex64], n: usize, d: usize) -> f64 {
    (0..d)
        .map(|mode| linalg::operator_norm(&unfold(t, n, d, mode)))
        .fold(f64::INFINITY, f64::min)
}

/// Greedy rank-1 deflation: peel off best rank-1 terms while they reduce the
/// residual, then charge the residual at its entrywise `ℓ1` norm (basis
/// tensors are rank-1). The result is an upper bound on the projective norm.
pub fn deflation_upper(t: &[Complex64], n: usize, d: usize, field: Field) -> f64 {
    let mut residual = t.to_vec();
    let mut mass = 0.0;
    let mut best = l1(&residual);
    let total = norm2(t);
    if total == 0.0 {
        return 0.0;
    }
    for _ in 0..(4 * t.len()).max(8) {
        let r1 = best_rank1(&residual, n, d, field);
        if r1.coefficient.norm() <= 1e-13 * total {
            break;
        }
        let atom = outer(&r1.factors);
        for (r, a) in residual.iter_mut().zip(&atom) {
            *r -= r1.coefficient * a;
        }
        mass += r1.coefficient.norm();
        best = best.min(mass + l1(&residual));
        if norm2(&residual) <= 1e-13 * total {
            break;
        }
    }
    best
}

fn l1(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm()).sum()
}
