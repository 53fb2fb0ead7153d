//! Restricted isometry estimates `δ̂ = sup_{x ∈ K_s} |‖Ax‖² − ⟨x, Φx⟩|`.
//!
//! Only the canonical exact enumeration certifies a value; the sampling and
//! ascent estimators return lower bounds.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::GroupDescriptor;
use crate::linalg::{self, CMatrix};
use crate::measurement::{DenseOperator, Instrument, MeasurementOperator, SensingOperator};
use crate::rng;
use crate::signal::{self, SignalVector};
use crate::sparsity::{tensor, SparsityModel};

/// Budget for exact enumeration, `C(N, s) · s³`.
pub const EXACT_BUDGET: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    Exact,
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Enumeration,
    MonteCarlo,
    Ascent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipEstimate {
    /// Raw deviation `sup |‖Ax‖² − ⟨x, Φx⟩|` over the explored set.
    pub delta: f64,
    pub kind: EstimateKind,
    pub method: Method,
    /// Subsets, trials or restarts evaluated.
    pub samples: u64,
    pub seed: Option<u64>,
    /// Set when no candidate was evaluated.
    pub degenerate: bool,
    /// Maximizing vector, when one was found.
    pub witness: Option<SignalVector>,
}

impl RipEstimate {
    /// Smallest `δ` with `max(δ, δ²) ≥ delta`.
    pub fn rip_constant(&self) -> f64 {
        if self.delta <= 1.0 {
            self.delta
        } else {
            self.delta.sqrt()
        }
    }
}

/// `⟨x, Φx⟩`, with `Φ = Id` by default.
fn phi_form(phi: Option<&CMatrix>, x: &[Complex64]) -> f64 {
    match phi {
        None => signal::norm2_sqr(x),
        Some(p) => {
            let px = p * CMatrix::from_column_slice(x.len(), 1, x);
            signal::inner(x, px.as_slice()).re
        }
    }
}

fn deviation<O: SensingOperator + ?Sized>(a: &O, phi: Option<&CMatrix>, x: &[Complex64], buf: &mut [Complex64]) -> f64 {
    a.apply_into(x, buf);
    signal::norm2_sqr(buf) - phi_form(phi, x)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `max_{|S| = s} ‖A_S^* A_S − I_s‖` over all supports.
pub fn exact_canonical_rip(a: &CMatrix, s: usize) -> Result<RipEstimate> {
    let n = a.ncols();
    if s == 0 || s > n {
        return Err(Error::InvalidParameter(format!("s = {s} outside [1, {n}]")));
    }
    let cost = binomial(n, s) * (s as f64).powi(3);
    if cost > EXACT_BUDGET {
        return Err(Error::SizeLimit(format!(
            "C({n},{s})·s³ = {cost:.3e} exceeds {EXACT_BUDGET:e}"
        )));
    }
    let gram = a.adjoint() * a;
    let g: Vec<Complex64> = (0..n * n).map(|k| gram[(k / n, k % n)]).collect();
    let absg: Vec<f64> = g.iter().map(|z| z.norm()).collect();

    let best = (0..=n - s)
        .into_par_iter()
        .map(|first| best_with_first(&g, &absg, n, s, first))
        .reduce(
            || (f64::NEG_INFINITY, Vec::new()),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );

    let (delta, support) = best;
    let witness = eigen_witness(&gram, &support);
    Ok(RipEstimate {
        delta,
        kind: EstimateKind::Exact,
        method: Method::Enumeration,
        samples: binomial(n, s).round() as u64,
        seed: None,
        degenerate: false,
        witness: Some(witness),
    })
}

/// Best support whose smallest index is `first`.
fn best_with_first(g: &[Complex64], absg: &[f64], n: usize, s: usize, first: usize) -> (f64, Vec<usize>) {
    let mut idx: Vec<usize> = (0..s).map(|i| first + i).collect();
    let mut best = f64::NEG_INFINITY;
    let mut best_support = idx.clone();
    let mut sub = vec![Complex64::new(0.0, 0.0); s * s];
    let mut eig = vec![0.0; s];
    loop {
        let val = match s {
            1 => (g[idx[0] * n + idx[0]].re - 1.0).abs(),
            2 => {
                let (i, j) = (idx[0], idx[1]);
                let a = g[i * n + i].re - 1.0;
                let d = g[j * n + j].re - 1.0;
                let mid = 0.5 * (a + d);
                let rad = (0.25 * (a - d) * (a - d) + absg[i * n + j].powi(2)).sqrt();
                mid.abs() + rad
            }
            _ => {
                // Gershgorin bound on ‖G_S − I‖; skip supports that cannot win.
                let gersh = idx
                    .iter()
                    .map(|&i| {
                        (g[i * n + i].re - 1.0).abs()
                            + idx.iter().filter(|&&j| j != i).map(|&j| absg[i * n + j]).sum::<f64>()
                    })
                    .fold(0.0, f64::max);
                if gersh <= best {
                    f64::NEG_INFINITY
                } else {
                    for (r, &i) in idx.iter().enumerate() {
                        for (c, &j) in idx.iter().enumerate() {
                            sub[r * s + c] = g[i * n + j];
                        }
                        sub[r * s + r] -= 1.0;
                    }
                    linalg::hermitian_eigenvalues_in_place(&mut sub, s, &mut eig);
                    eig.iter().fold(0.0f64, |a, v| a.max(v.abs()))
                }
            }
        };
        if val > best {
            best = val;
            best_support.copy_from_slice(&idx);
        }
        // Next combination with idx[0] fixed.
        let mut k = s - 1;
        loop {
            if k == 0 {
                return (best, best_support);
            }
            if idx[k] < n - s + k {
                idx[k] += 1;
                for t in k + 1..s {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
            k -= 1;
        }
    }
}

/// Unit vector supported on `support` attaining `‖G_S − I‖`.
fn eigen_witness(gram: &CMatrix, support: &[usize]) -> SignalVector {
    let n = gram.nrows();
    let s = support.len();
    let sub = CMatrix::from_fn(s, s, |r, c| gram[(support[r], support[c])]) - linalg::identity(s);
    let eig = sub.symmetric_eigen();
    let k = (0..s)
        .max_by(|&a, &b| eig.eigenvalues[a].abs().total_cmp(&eig.eigenvalues[b].abs()))
        .unwrap_or(0);
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for (r, &i) in support.iter().enumerate() {
        x[i] = eig.eigenvectors[(r, k)];
    }
    SignalVector::new(x)
}

/// Per-trial deviations `|‖Ax‖² − ⟨x, Φx⟩|` for `x` drawn from `K_s`; trial
/// `t` uses the stream `(seed, t)`.
pub fn monte_carlo_values<O: SensingOperator + ?Sized>(
    a: &O,
    model: &SparsityModel,
    s: f64,
    trials: usize,
    seed: u64,
    phi: Option<&CMatrix>,
) -> Result<Vec<(f64, SignalVector)>> {
    check_dims(a, model)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, &[t as u64]);
            let x = model.sample_sparse(s, &mut r)?.vector;
            let mut buf = vec![Complex64::new(0.0, 0.0); a.output_dim()];
            Ok((deviation(a, phi, x.entries(), &mut buf).abs(), x))
        })
        .collect()
}

fn check_dims<O: SensingOperator + ?Sized>(a: &O, model: &SparsityModel) -> Result<()> {
    model.validate()?;
    if a.input_dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            actual: a.input_dim(),
        });
    }
    Ok(())
}

fn argmax(values: Vec<(f64, SignalVector)>) -> (f64, Option<SignalVector>) {
    let mut best = 0.0;
    let mut wit = None;
    for (v, x) in values {
        if wit.is_none() || v > best {
            best = v;
            wit = Some(x);
        }
    }
    (best, wit)
}

/// Maximum deviation over `trials` samples of `K_s`.
pub fn monte_carlo_rip<O: SensingOperator + ?Sized>(
    a: &O,
    model: &SparsityModel,
    s: f64,
    trials: usize,
    seed: u64,
    phi: Option<&CMatrix>,
) -> Result<RipEstimate> {
    let (delta, witness) = argmax(monte_carlo_values(a, model, s, trials, seed, phi)?);
    Ok(RipEstimate {
        delta,
        kind: EstimateKind::LowerBound,
        method: Method::MonteCarlo,
        samples: trials as u64,
        seed: Some(seed),
        degenerate: trials == 0,
        witness,
    })
}

/// `‖A‖²` by power iteration on `A^*A`.
pub fn operator_norm_sqr_estimate<O: SensingOperator + ?Sized>(a: &O) -> f64 {
    let n = a.input_dim();
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + (i as f64 * 0.618_033_988_75).fract(), 0.0))
        .collect();
    let mut y = vec![Complex64::new(0.0, 0.0); a.output_dim()];
    let mut est = 0.0;
    for _ in 0..50 {
        let h = signal::norm2(&x);
        if h == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= h);
        a.apply_into(&x, &mut y);
        let next = signal::norm2_sqr(&y);
        a.adjoint_into(&y, &mut x);
        if (next - est).abs() <= 1e-12 * next {
            est = next;
            break;
        }
        est = next;
    }
    est
}

/// Map `y` back onto a certified subset of `K_s`; `None` when no certificate
/// is available.
fn project(model: &SparsityModel, s: f64, y: &[Complex64]) -> Option<Vec<Complex64>> {
    let k = s.floor().max(1.0) as usize;
    let out: Vec<Complex64> = match model {
        SparsityModel::CanonicalL1 { .. } => {
            let mut order: Vec<usize> = (0..y.len()).collect();
            order.sort_by(|&a, &b| y[b].norm_sqr().total_cmp(&y[a].norm_sqr()).then(a.cmp(&b)));
            let mut out = vec![Complex64::new(0.0, 0.0); y.len()];
            for &i in order.iter().take(k) {
                out[i] = y[i];
            }
            out
        }
        SparsityModel::SchattenBall { n, .. } => {
            let m = CMatrix::from_row_slice(*n, *n, y);
            let svd = m.svd(true, true);
            let (u, vt) = (svd.u?, svd.v_t?);
            let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
            order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
            let mut out = CMatrix::zeros(*n, *n);
            for &i in order.iter().take(k) {
                out += u.column(i) * vt.row(i) * Complex64::new(svd.singular_values[i], 0.0);
            }
            (0..n * n).map(|idx| out[(idx / n, idx % n)]).collect()
        }
        SparsityModel::TensorHull { n, d, field } => {
            let mut residual = y.to_vec();
            let mut approx = vec![Complex64::new(0.0, 0.0); y.len()];
            let mut mass = 0.0;
            for _ in 0..k {
                let r1 = tensor::best_rank1(&residual, *n, *d, *field);
                let atom = tensor::outer(&r1.factors);
                for ((r, a), t) in residual.iter_mut().zip(approx.iter_mut()).zip(&atom) {
                    *r -= r1.coefficient * t;
                    *a += r1.coefficient * t;
                }
                mass += r1.coefficient.norm();
            }
            let h = signal::norm2(&approx);
            if h == 0.0 || mass / h > s.sqrt() * (1.0 + 1e-12) {
                return None;
            }
            approx
        }
        SparsityModel::AtomicPolytope { .. } => {
            let v = SignalVector::new(y.to_vec());
            let h = v.norm2();
            if h == 0.0 {
                return None;
            }
            let norm = model.norm_x(&v).ok()?.upper();
            if norm > s.sqrt() * h * (1.0 + 1e-12) {
                return None;
            }
            y.to_vec()
        }
    };
    let h = signal::norm2(&out);
    (h > 0.0).then(|| out.into_iter().map(|z| z / h).collect())
}

/// Projected gradient ascent on `±(‖Ax‖² − ⟨x, Φx⟩)` over the sphere.
///
/// Restart `r` starts from the same sample as trial `r` of
/// [`monte_carlo_rip`] with the same seed and only accepts improving steps,
/// so with `restarts = trials` the result dominates the sampling estimate.
pub fn ascent_rip<O: SensingOperator + ?Sized>(
    a: &O,
    model: &SparsityModel,
    s: f64,
    restarts: usize,
    steps: usize,
    seed: u64,
    phi: Option<&CMatrix>,
) -> Result<RipEstimate> {
    check_dims(a, model)?;
    if restarts == 0 {
        return Ok(RipEstimate {
            delta: 0.0,
            kind: EstimateKind::LowerBound,
            method: Method::Ascent,
            samples: 0,
            seed: Some(seed),
            degenerate: true,
            witness: None,
        });
    }
    let norm_sqr = operator_norm_sqr_estimate(a);
    let step0 = if norm_sqr > 0.0 { 1.0 / norm_sqr } else { 1.0 };
    let starts = monte_carlo_values(a, model, s, restarts, seed, phi)?;
    let results: Vec<(f64, SignalVector)> = starts
        .into_par_iter()
        .map(|(v0, x0)| {
            let mut best = (v0, x0.clone());
            for sign in [1.0, -1.0] {
                let (v, x) = climb(a, model, s, phi, x0.entries().to_vec(), sign, steps, step0);
                if v > best.0 {
                    best = (v, SignalVector::with_shape(x, x0.shape()).expect("same length"));
                }
            }
            best
        })
        .collect();
    let (delta, witness) = argmax(results);
    Ok(RipEstimate {
        delta,
        kind: EstimateKind::LowerBound,
        method: Method::Ascent,
        samples: restarts as u64,
        seed: Some(seed),
        degenerate: false,
        witness,
    })
}

#[allow(clippy::too_many_arguments)]
fn climb<O: SensingOperator + ?Sized>(
    a: &O,
    model: &SparsityModel,
    s: f64,
    phi: Option<&CMatrix>,
    mut x: Vec<Complex64>,
    sign: f64,
    steps: usize,
    step0: f64,
) -> (f64, Vec<Complex64>) {
    let n = x.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); a.output_dim()];
    let mut grad = vec![Complex64::new(0.0, 0.0); n];
    let mut cur = sign * deviation(a, phi, &x, &mut buf);
    for _ in 0..steps {
        a.apply_into(&x, &mut buf);
        a.adjoint_into(&buf, &mut grad);
        if let Some(p) = phi {
            let px = p * CMatrix::from_column_slice(n, 1, &x);
            for (g, v) in grad.iter_mut().zip(px.iter()) {
                *g -= v;
            }
        } else {
            for (g, v) in grad.iter_mut().zip(&x) {
                *g -= v;
            }
        }
        let mut t = step0;
        let mut moved = false;
        for _ in 0..40 {
            let y: Vec<Complex64> = x.iter().zip(&grad).map(|(xi, gi)| xi + gi * (sign * t)).collect();
            if let Some(y) = project(model, s, &y) {
                let val = sign * deviation(a, phi, &y, &mut buf);
                if val > cur {
                    cur = val;
                    x = y;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (cur.abs(), x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    Exact,
    MonteCarlo { trials: usize },
    Ascent { restarts: usize, steps: usize },
}

impl Estimator {
    pub fn trial_count(&self) -> usize {
        match *self {
            Estimator::Exact => 0,
            Estimator::MonteCarlo { trials } => trials,
            Estimator::Ascent { restarts, .. } => restarts,
        }
    }
}

/// Which operator family a scaling cell draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorFamily {
    /// `m^{-1/2}(u σ(g_j))` with Haar elements.
    #[default]
    Group,
    /// i.i.d. real Gaussian entries of variance `1/m`.
    RealGaussian,
    /// i.i.d. complex Gaussian entries, `E|a|² = 1/m`.
    ComplexGaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub group: GroupDescriptor,
    pub instrument: Instrument,
    pub model: SparsityModel,
    pub s_list: Vec<f64>,
    pub m_list: Vec<usize>,
    pub redraws: usize,
    pub estimator: Estimator,
    pub seed: u64,
    #[serde(default)]
    pub operator: OperatorFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub model: String,
    pub group: String,
    pub s: f64,
    pub m: usize,
    pub trials: usize,
    pub delta_median: f64,
    pub q25: f64,
    pub q75: f64,
    pub seed: u64,
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl ScalingConfig {
    pub fn validate(&self) -> Result<()> {
        self.group.validate()?;
        self.model.validate()?;
        if self.group.dim() != self.model.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.model.dim(),
                actual: self.group.dim(),
            });
        }
        if self.s_list.is_empty() || self.m_list.is_empty() {
            return Err(Error::InvalidParameter("s_list and m_list must be nonempty".into()));
        }
        if self.m_list.contains(&0) {
            return Err(Error::InvalidParameter("m must be ≥ 1".into()));
        }
        if self.redraws == 0 {
            return Err(Error::InvalidParameter("redraws must be ≥ 1".into()));
        }
        if self.estimator == Estimator::Exact {
            if !matches!(self.model, SparsityModel::CanonicalL1 { .. }) {
                return Err(Error::Unsupported(
                    "exact estimation is only available for the canonical model".into(),
                ));
            }
            if self.s_list.iter().any(|s| s.fract() != 0.0) {
                return Err(Error::InvalidParameter("exact estimation needs integer s".into()));
            }
        }
        Ok(())
    }

    fn operator_label(&self) -> String {
        match self.operator {
            OperatorFamily::Group => self.group.to_string(),
            OperatorFamily::RealGaussian => "gaussian".into(),
            OperatorFamily::ComplexGaussian => "complex-gaussian".into(),
        }
    }

    /// Seed of the estimator stream for redraw `r` of cell `(si, mi)`.
    pub fn estimator_seed(&self, si: usize, mi: usize, r: usize) -> u64 {
        rng::derive_seed(self.seed, &[1, si as u64, mi as u64, r as u64])
    }

    /// One estimate per redraw for the cell `(si, mi)`.
    pub fn cell_values(&self, si: usize, mi: usize) -> Result<Vec<f64>> {
        let s = self.s_list[si];
        let m = self.m_list[mi];
        let n = self.model.dim();
        (0..self.redraws)
            .into_par_iter()
            .map(|r| {
                let path = [si as u64, mi as u64, r as u64];
                let mut op_rng = rng::stream(self.seed, &[0, path[0], path[1], path[2]]);
                let est_seed = self.estimator_seed(si, mi, r);
                let op: Box<dyn SensingOperator> = match self.operator {
                    OperatorFamily::Group => {
                        let ins = redraw_instrument(&self.instrument, r as u64, n)?;
                        Box::new(MeasurementOperator::draw(self.group.clone(), ins, m, &mut op_rng)?)
                    }
                    OperatorFamily::RealGaussian => Box::new(DenseOperator::gaussian(m, n, true, &mut op_rng)),
                    OperatorFamily::ComplexGaussian => {
                        Box::new(DenseOperator::gaussian(m, n, false, &mut op_rng))
                    }
                };
                let est = match self.estimator {
                    Estimator::Exact => exact_canonical_rip(&op.to_dense(), s as usize)?,
                    Estimator::MonteCarlo { trials } => {
                        monte_carlo_rip(op.as_ref(), &self.model, s, trials, est_seed, None)?
                    }
                    Estimator::Ascent { restarts, steps } => {
                        ascent_rip(op.as_ref(), &self.model, s, restarts, steps, est_seed, None)?
                    }
                };
                Ok(est.delta)
            })
            .collect()
    }

    pub fn summarize(&self, si: usize, mi: usize, mut values: Vec<f64>) -> ScalingRow {
        values.sort_by(|a, b| a.total_cmp(b));
        ScalingRow {
            model: self.model.label(),
            group: self.operator_label(),
            s: self.s_list[si],
            m: self.m_list[mi],
            trials: self.estimator.trial_count(),
            delta_median: quantile(&values, 0.5),
            q25: quantile(&values, 0.25),
            q75: quantile(&values, 0.75),
            seed: self.seed,
        }
    }
}

/// Fresh `η` per redraw for unrealized Gaussian instruments; fixed
/// instruments are normalized and reused.
fn redraw_instrument(ins: &Instrument, redraw: u64, n: usize) -> Result<Instrument> {
    match ins {
        Instrument::GaussianRow {
            seed, real, eta: None,
        } => {
            let mut r = rng::stream(*seed, &[redraw]);
            let eta = if *real {
                SignalVector::real_gaussian(n, &mut r)
            } else {
                SignalVector::complex_gaussian(n, &mut r)
            };
            Instrument::GaussianRow {
                seed: *seed,
                real: *real,
                eta: Some(eta),
            }
            .normalized()
        }
        other => other.clone().realize(n)?.normalized(),
    }
}

/// Run every `(s, m)` cell, rows ordered by `s` then `m`.
pub fn scaling_experiment(config: &ScalingConfig) -> Result<Vec<ScalingRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for si in 0..config.s_list.len() {
        for mi in 0..config.m_list.len() {
            let values = config.cell_values(si, mi)?;
            rows.push(config.summarize(si, mi, values));
        }
    }
    Ok(rows)
}
