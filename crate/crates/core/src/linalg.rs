//! Small dense linear-algebra helpers on complex matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Eigenvalues of a Hermitian `n × n` matrix stored row-major in `a`, by
/// cyclic Jacobi rotations. `a` is overwritten. Only the upper triangle and
/// diagonal need be meaningful on entry; both triangles are kept in sync.
pub fn hermitian_eigenvalues_in_place(a: &mut [Complex64], n: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), n * n);
    for i in 0..n {
        for j in 0..i {
            a[i * n + j] = a[j * n + i].conj();
        }
        a[i * n + i] = Complex64::new(a[i * n + i].re, 0.0);
    }
    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        out[..n].iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                // Rotate the phase of a_pq onto the real axis, then a real Jacobi step.
                let ph = apq / r;
                let phc = ph.conj();
                for k in 0..n {
                    if k != q {
                        a[k * n + q] *= phc;
                        a[q * n + k] *= ph;
                    }
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let nkp = akp * c - akq * s;
                    let nkq = akq * c + akp * s;
                    a[k * n + p] = nkp;
                    a[p * n + k] = nkp.conj();
                    a[k * n + q] = nkq;
                    a[q * n + k] = nkq.conj();
                }
                a[p * n + p] = Complex64::new(app - t * r, 0.0);
                a[q * n + q] = Complex64::new(aqq + t * r, 0.0);
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
            }
        }
    }
    for i in 0..n {
        out[i] = a[i * n + i].re;
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    let mut buf: Vec<Complex64> = (0..n * n).map(|k| m[(k / n, k % n)]).collect();
    let mut out = vec![0.0; n];
    hermitian_eigenvalues_in_place(&mut buf, n, &mut out);
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Spectral norm of a Hermitian matrix: `max |λ|`.
pub fn hermitian_spectral_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .into_iter()
        .fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Singular values, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn operator_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// `ℓ_q` norm of a nonnegative sequence, `q = ∞` allowed.
pub fn lq_norm(values: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        values.iter().fold(0.0, |a, &v| a.max(v.abs()))
    } else if q == 1.0 {
        values.iter().map(|v| v.abs()).sum()
    } else {
        values.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

pub fn schatten_norm(m: &CMatrix, q: f64) -> f64 {
    lq_norm(&singular_values(m), q)
}

/// Hölder conjugate `q' = q / (q − 1)`, with `1' = ∞`.
pub fn conjugate_exponent(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

/// Orthonormalize the columns of `vectors` in place (modified Gram–Schmidt).
/// Returns `false` if a column became numerically dependent.
pub fn gram_schmidt(vectors: &mut [Vec<Complex64>]) -> bool {
    for i in 0..vectors.len() {
        for j in 0..i {
            let (done, rest) = vectors.split_at_mut(i);
            let proj: Complex64 = done[j]
                .iter()
                .zip(rest[0].iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            for (v, u) in rest[0].iter_mut().zip(done[j].iter()) {
                *v -= proj * u;
            }
        }
        let norm = crate::signal::norm2(&vectors[i]);
        if norm < 1e-12 {
            return false;
        }
        vectors[i].iter_mut().for_each(|v| *v /= norm);
    }
    true
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Frobenius norm.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Null-space dimension of `m`, counting singular values below `tol · σ_max`.
pub fn nullity(m: &CMatrix, tol: f64) -> usize {
    let sv = singular_values(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > tol * smax.max(1.0)).count();
    m.ncols() - rank
}
