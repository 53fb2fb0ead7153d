//! ε-nets on real unit spheres, product nets over rank-1 tensors and the
//! net-based dual-norm bound for tensor hulls.
//!
//! Net geometry is real. A complex factor space `C^n` is handled through its
//! real embedding `R^{2n}`, so a complex [`TensorAtomSet`] is built from a
//! net of dimension `2n`.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream;
use crate::signal::SignalVector;

/// Largest product net that `NetMode::Enumerate` will scan.
pub const ENUMERATION_BUDGET: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Construction {
    /// `{+1, −1}`.
    Antipodal,
    /// Regular polygon on the circle; covering is exact.
    RegularPolygon,
    /// Farthest-point selection from a random pool, then augmentation by any
    /// validation sample left uncovered.
    Greedy { pool: usize, validation_rounds: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetOptions {
    pub pool: usize,
    /// Samples per validation round.
    pub validation: usize,
    pub max_rounds: usize,
    pub max_points: usize,
}

impl Default for NetOptions {
    fn default() -> Self {
        Self {
            pool: 20_000,
            validation: 10_000,
            max_rounds: 50,
            max_points: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereNet {
    pub n: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub construction: Construction,
    pub points: Vec<Vec<f64>>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Uniform point on `S^{n-1} ⊂ R^n`.
pub fn random_sphere_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let h = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if h > 0.0 {
            return v.into_iter().map(|x| x / h).collect();
        }
    }
}

/// Greedy ε-net on `S^{n-1}` with default options.
pub fn sphere_net(n: usize, epsilon: f64, seed: u64) -> Result<SphereNet> {
    sphere_net_with(n, epsilon, seed, &NetOptions::default())
}

pub fn sphere_net_with(n: usize, epsilon: f64, seed: u64, opts: &NetOptions) -> Result<SphereNet> {
    if n == 0 || n > 6 {
        return Err(Error::InvalidParameter(format!("net dimension {n} outside 1..=6")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("ε = {epsilon} outside (0, 1)")));
    }
    let (construction, points) = match n {
        1 => (Construction::Antipodal, vec![vec![1.0], vec![-1.0]]),
        2 => {
            let mut k = 3usize;
            while 2.0 * (PI / (2.0 * k as f64)).sin() > epsilon {
                k += 1;
            }
            let pts = (0..k)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / k as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect();
            (Construction::RegularPolygon, pts)
        }
        _ => greedy(n, epsilon, seed, opts)?,
    };
    Ok(SphereNet {
        n,
        epsilon,
        seed,
        construction,
        points,
    })
}

fn greedy(n: usize, eps: f64, seed: u64, opts: &NetOptions) -> Result<(Construction, Vec<Vec<f64>>)> {
    let mut rng = stream(seed, &[0]);
    let pool: Vec<Vec<f64>> = (0..opts.pool.max(1)).map(|_| random_sphere_point(n, &mut rng)).collect();
    let mut points = vec![pool[0].clone()];
    let mut nearest: Vec<f64> = pool.iter().map(|p| dist(p, &points[0])).collect();
    loop {
        let (far, &d) = nearest
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty pool");
        if d <= eps {
            break;
        }
        if points.len() >= opts.max_points {
            return Err(Error::NetBudget(format!("more than {} points", opts.max_points)));
        }
        let p = pool[far].clone();
        nearest
            .par_iter_mut()
            .zip(&pool)
            .for_each(|(m, q)| *m = m.min(dist(q, &p)));
        points.push(p);
    }
    for round in 1..=opts.max_rounds {
        let mut rng = stream(seed, &[1, round as u64]);
        let mut missed = false;
        for _ in 0..opts.validation {
            let y = random_sphere_point(n, &mut rng);
            if points.iter().all(|p| dist(p, &y) > eps) {
                if points.len() >= opts.max_points {
                    return Err(Error::NetBudget(format!("more than {} points", opts.max_points)));
                }
                points.push(y);
                missed = true;
            }
        }
        if !missed {
            return Ok((
                Construction::Greedy {
                    pool: opts.pool,
                    validation_rounds: round,
                },
                points,
            ));
        }
    }
    Err(Error::NetBudget(format!(
        "covering not validated after {} rounds",
        opts.max_rounds
    )))
}

impl SphereNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Volumetric cardinality bound `(1 + 2/ε)^n`.
    pub fn cardinality_bound(&self) -> f64 {
        (1.0 + 2.0 / self.epsilon).powi(self.n as i32)
    }

    pub fn nearest(&self, y: &[f64]) -> (usize, f64) {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, dist(p, y)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("net is never empty")
    }

    /// Largest distance from `samples` random sphere points to the net.
    pub fn covering_radius_estimate(&self, samples: usize, seed: u64) -> f64 {
        (0..samples)
            .into_par_iter()
            .map(|i| {
                let y = random_sphere_point(self.n, &mut stream(seed, &[i as u64]));
                self.nearest(&y).1
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Smallest pairwise distance (∞ for a single point).
    pub fn separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.min(dist(a, b));
            }
        }
        best
    }

    pub fn max_norm_deviation(&self) -> f64 {
        self.points
            .iter()
            .map(|p| (p.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `y` as `Σ_k c_k z_{j_k}` with net points `z`, by repeatedly
    /// rounding the normalized residual to its nearest net point.
    pub fn round_expand(&self, y: &[f64], tol: f64, max_terms: usize) -> Result<Expansion> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: y.len(),
            });
        }
        let mut r = y.to_vec();
        let mut terms = Vec::new();
        loop {
            let h = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if h <= tol || terms.len() >= max_terms {
                return Ok(Expansion { terms, residual: h });
            }
            let u: Vec<f64> = r.iter().map(|x| x / h).collect();
            let (j, _) = self.nearest(&u);
            for (ri, zi) in r.iter_mut().zip(&self.points[j]) {
                *ri -= h * zi;
            }
            terms.push((j, h));
        }
    }
}

/// Net-point expansion of a vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub terms: Vec<(usize, f64)>,
    pub residual: f64,
}

impl Expansion {
    /// `Σ|c_k|`.
    pub fn mass(&self) -> f64 {
        self.terms.iter().map(|t| t.1.abs()).sum()
    }

    pub fn evaluate(&self, net: &SphereNet) -> Vec<f64> {
        let mut out = vec![0.0; net.n];
        for &(j, c) in &self.terms {
            for (o, z) in out.iter_mut().zip(&net.points[j]) {
                *o += c * z;
            }
        }
        out
    }
}

/// Coefficient mass and residual of a product expansion of `⊗ y_l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TensorExpansion {
    pub mass: f64,
    /// `‖⊗y_l − ⊗ŷ_l‖_2` for the truncated factor expansions `ŷ_l`.
    pub residual: f64,
    pub terms: usize,
}

/// The implicit product set `Δ^{⊗d}` with expansion factor `e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorAtomSet {
    pub base: SphereNet,
    pub order: usize,
    /// Factors live in `C^{n/2}` via the real embedding.
    pub complex: bool,
}

/// Whether `1/(d+1) < 3ε ≤ 1/d`.
pub fn admissible(epsilon: f64, d: usize) -> bool {
    let t = 3.0 * epsilon;
    t > 1.0 / (d as f64 + 1.0) && t <= 1.0 / d as f64
}

/// Largest admissible ε for order `d`.
pub fn admissible_epsilon(d: usize) -> f64 {
    1.0 / (3.0 * d as f64)
}

impl TensorAtomSet {
    /// Real product net of order `d`.
    pub fn new(base: SphereNet, d: usize) -> Result<Self> {
        Self::build(base, d, false)
    }

    /// Complex product net; `base` must be a net on `R^{2n}`.
    pub fn complex(base: SphereNet, d: usize) -> Result<Self> {
        if !base.n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "complex atoms need an even-dimensional real net".into(),
            ));
        }
        Self::build(base, d, true)
    }

    fn build(base: SphereNet, d: usize, complex: bool) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("order d must be ≥ 1".into()));
        }
        if !admissible(base.epsilon, d) {
            return Err(Error::InvalidParameter(format!(
                "ε = {} violates 1/(d+1) < 3ε ≤ 1/d for d = {d}",
                base.epsilon
            )));
        }
        let set = Self { base, order: d, complex };
        let bound = set.log_count_bound();
        if set.log_count() > bound {
            return Err(Error::NetBudget(format!(
                "ln M = {} exceeds {bound}",
                set.log_count()
            )));
        }
        Ok(set)
    }

    /// Factor dimension over the scalar field.
    pub fn factor_dim(&self) -> usize {
        if self.complex {
            self.base.n / 2
        } else {
            self.base.n
        }
    }

    pub fn count(&self) -> f64 {
        (self.base.len() as f64).powi(self.order as i32)
    }

    pub fn log_count(&self) -> f64 {
        self.order as f64 * (self.base.len() as f64).ln()
    }

    /// `3 n d (1 + ln d)` with `n` the real net dimension.
    pub fn log_count_bound(&self) -> f64 {
        let d = self.order as f64;
        3.0 * self.base.n as f64 * d * (1.0 + d.ln())
    }

    pub fn expansion_factor(&self) -> f64 {
        E
    }

    /// Net point `j` as a factor vector.
    pub fn factor(&self, j: usize) -> Vec<Complex64> {
        let p = &self.base.points[j];
        if self.complex {
            let h = p.len() / 2;
            (0..h).map(|i| Complex64::new(p[i], p[h + i])).collect()
        } else {
            p.iter().map(|&x| Complex64::new(x, 0.0)).collect()
        }
    }

    /// Rounds each factor into the net and multiplies the expansions.
    pub fn round_expand(&self, factors: &[Vec<f64>], tol: f64) -> Result<TensorExpansion> {
        if self.complex || factors.len() != self.order {
            return Err(Error::InvalidParameter(format!(
                "need {} real factors",
                self.order
            )));
        }
        let mut mass = 1.0;
        let mut terms = 1usize;
        let mut exact = vec![1.0];
        let mut approx = vec![1.0];
        for y in factors {
            let ex = self.base.round_expand(y, tol, 200)?;
            mass *= ex.mass();
            terms *= ex.terms.len().max(1);
            exact = kron(&exact, y);
            approx = kron(&approx, &ex.evaluate(&self.base));
        }
        Ok(TensorExpansion {
            mass,
            residual: dist(&exact, &approx),
            terms,
        })
    }
}

fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NetMode {
    Enumerate,
    Alternate { restarts: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NetDualNorm {
    /// `e · max |⟨x, ξ⟩|` over the visited atoms.
    pub value: f64,
    pub max_correlation: f64,
    /// True when every atom was visited.
    pub certified: bool,
    pub evaluated: u64,
}

/// Contracts the last axis of `t` (length `f`) against `conj(x)`.
fn contract_last(t: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
    let f = x.len();
    t.chunks_exact(f)
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b.conj()).sum())
        .collect()
}

fn enumerate_max(t: &[Complex64], atoms: &[Vec<Complex64>]) -> f64 {
    if t.len() == 1 {
        return t[0].norm();
    }
    atoms
        .iter()
        .map(|x| enumerate_max(&contract_last(t, x), atoms))
        .fold(0.0, f64::max)
}

/// Contraction of `t` (order `d`, side `f`) with every factor except `skip`.
fn contract_except(t: &[Complex64], f: usize, factors: &[&[Complex64]], skip: usize) -> Vec<Complex64> {
    let d = factors.len();
    let mut out = vec![Complex64::new(0.0, 0.0); f];
    for (idx, &v) in t.iter().enumerate() {
        let mut rest = idx;
        let mut w = v;
        let mut keep = 0;
        for axis in (0..d).rev() {
            let i = rest % f;
            rest /= f;
            if axis == skip {
                keep = i;
            } else {
                w *= factors[axis][i].conj();
            }
        }
        out[keep] += w;
    }
    out
}

fn best_atom(v: &[Complex64], atoms: &[Vec<Complex64>]) -> (usize, f64) {
    atoms
        .iter()
        .enumerate()
        .map(|(j, x)| (j, x.iter().zip(v).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm()))
        .fold((0, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc })
}

/// Upper bound `e · sup_{x ∈ Δ^{⊗d}} |⟨x, ξ⟩|` on the tensor-hull dual norm.
///
/// `Enumerate` visits every atom and is certified. `Alternate` runs discrete
/// coordinate ascent over the net from `restarts` deterministic starts, which
/// may miss the maximum.
pub fn net_dual_norm(xi: &SignalVector, atoms: &TensorAtomSet, mode: NetMode) -> Result<NetDualNorm> {
    let f = atoms.factor_dim();
    let d = atoms.order;
    let expected = f.pow(d as u32);
    if xi.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: xi.len(),
        });
    }
    let net: Vec<Vec<Complex64>> = (0..atoms.base.len()).map(|j| atoms.factor(j)).collect();
    let t = xi.entries();
    let (max, certified, evaluated) = match mode {
        NetMode::Enumerate => {
            if atoms.count() > ENUMERATION_BUDGET {
                return Err(Error::SizeLimit(format!(
                    "{} atoms exceed the enumeration budget {ENUMERATION_BUDGET}",
                    atoms.count()
                )));
            }
            let max = net
                .par_iter()
                .map(|x| enumerate_max(&contract_last(t, x), &net))
                .reduce(|| 0.0, f64::max);
            (max, true, atoms.count() as u64)
        }
        NetMode::Alternate { restarts } => {
            let k = net.len();
            let starts = restarts.max(1);
            let results: Vec<(f64, u64)> = (0..starts)
                .into_par_iter()
                .map(|r| {
                    let first = if starts >= k { r % k } else { r * k / starts };
                    let mut idx: Vec<usize> = (0..d).map(|l| (first + r * l * 7 + l) % k).collect();
                    idx[0] = first;
                    let mut best = -1.0;
                    let mut evals = 0u64;
                    loop {
                        let mut improved = false;
                        for l in (1..d).chain(0..1) {
                            let fs: Vec<&[Complex64]> = idx.iter().map(|&j| net[j].as_slice()).collect();
                            let v = contract_except(t, f, &fs, l);
                            let (j, val) = best_atom(&v, &net);
                            evals += k as u64;
                            if val > best + 1e-15 {
                                best = val;
                                idx[l] = j;
                                improved = true;
                            }
                        }
                        if !improved || d == 1 {
                            break;
                        }
                    }
                    (best.max(0.0), evals)
                })
                .collect();
            let max = results.iter().map(|r| r.0).fold(0.0, f64::max);
            let evals = results.iter().map(|r| r.1).sum();
            (max, d == 1, evals)
        }
    };
    Ok(NetDualNorm {
        value: E * max,
        max_correlation: max,
        certified,
        evaluated,
    })
}

/// `√(2(1 + 3nd(1+ln d) + ln ζ^{-1}))`.
pub fn tail_threshold(n: usize, d: usize, zeta: f64) -> Result<f64> {
    crate::bounds::gaussian_dual_norm_bound(n as u64, d as u64, zeta)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub n: usize,
    pub d: usize,
    pub draws: usize,
    pub zeta: f64,
    pub threshold: f64,
    /// Fraction with `e · max ≥ threshold`.
    pub raw_rate: f64,
    /// Fraction with `max ≥ threshold`.
    pub deflated_rate: f64,
    /// `√(ζ(1−ζ)/draws)`.
    pub binomial_sigma: f64,
    /// Per `r`, `(E max^r)^{1/r} / max(√r, √(3nd(1+ln d)))`.
    pub moment_ratios: Vec<(u32, f64)>,
    /// Largest moment ratio, a fitted constant.
    pub fitted_c: f64,
}

impl TailReport {
    pub fn deflated_within(&self, sigmas: f64) -> bool {
        self.deflated_rate <= self.zeta + sigmas * self.binomial_sigma
    }
}

/// Exceedance rates of the Gaussian dual-norm threshold for a standard real
/// Gaussian tensor in `(R^n)^{⊗d}`, using the enumerated net bound.
pub fn gaussian_dual_tail_experiment(
    atoms: &TensorAtomSet,
    draws: usize,
    zeta: f64,
    seed: u64,
) -> Result<TailReport> {
    if atoms.complex {
        return Err(Error::Unsupported("tail experiment is real-valued".into()));
    }
    let n = atoms.factor_dim();
    let d = atoms.order;
    let threshold = tail_threshold(n, d, zeta)?;
    let len = n.pow(d as u32);
    let maxima: Vec<f64> = (0..draws)
        .into_par_iter()
        .map(|i| {
            let xi = SignalVector::real_gaussian(len, &mut stream(seed, &[i as u64]));
            net_dual_norm(&xi, atoms, NetMode::Enumerate).map(|r| r.max_correlation)
        })
        .collect::<Result<_>>()?;
    let frac = |f: &dyn Fn(f64) -> bool| maxima.iter().filter(|&&m| f(m)).count() as f64 / draws.max(1) as f64;
    let raw_rate = frac(&|m| E * m >= threshold);
    let deflated_rate = frac(&|m| m >= threshold);
    let base = (3.0 * n as f64 * d as f64 * (1.0 + (d as f64).ln())).sqrt();
    let moment_ratios: Vec<(u32, f64)> = [1u32, 2, 4, 8]
        .iter()
        .map(|&r| {
            let mom = maxima.iter().map(|m| m.powi(r as i32)).sum::<f64>() / draws.max(1) as f64;
            (r, mom.powf(1.0 / r as f64) / (r as f64).sqrt().max(base))
        })
        .collect();
    let fitted_c = moment_ratios.iter().map(|m| m.1).fold(0.0, f64::max);
    Ok(TailReport {
        n,
        d,
        draws,
        zeta,
        threshold,
        raw_rate,
        deflated_rate,
        binomial_sigma: (zeta * (1.0 - zeta) / draws.max(1) as f64).sqrt(),
        moment_ratios,
        fitted_c,
    })
}

/// Random point in the real unit ball `B_2^n`.
pub fn random_ball_point(n: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = stream(seed, &[index]);
    let u = random_sphere_point(n, &mut rng);
    let r: f64 = rng.random::<f64>().powf(1.0 / n as f64);
    u.into_iter().map(|x| x * r).collect()
}
