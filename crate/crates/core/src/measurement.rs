//! Instruments `u: X → ℓ2^blockDim` and sampled operators
//! `A = m^{-1/2} (u σ(g_j))_{j ≤ m}`.

use log::{debug, warn};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{self, AveragingMode, GroupDescriptor, GroupElement};
use crate::linalg::{self, CMatrix};
use crate::rng;
use crate::signal::{self, SignalVector};
use crate::sparsity::SparsityModel;

/// Anything that acts linearly `C^N → C^rows`.
pub trait SensingOperator: Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]);
    fn adjoint_into(&self, y: &[Complex64], out: &mut [Complex64]);

    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.output_dim()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    fn apply_adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                actual: y.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.input_dim()];
        self.adjoint_into(y, &mut out);
        Ok(out)
    }

    /// Dense `output_dim × input_dim` matrix.
    fn to_dense(&self) -> CMatrix {
        let n = self.input_dim();
        let mut m = CMatrix::zeros(self.output_dim(), n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        let mut col = vec![Complex64::new(0.0, 0.0); self.output_dim()];
        for c in 0..n {
            e[c] = Complex64::new(1.0, 0.0);
            self.apply_into(&e, &mut col);
            e[c] = Complex64::new(0.0, 0.0);
            m.column_mut(c).copy_from_slice(&col);
        }
        m
    }
}

/// Plain dense matrix operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub matrix: CMatrix,
}

impl DenseOperator {
    pub fn new(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// `m × N` matrix of i.i.d. `N(0, 1/m)` entries (real, or complex with
    /// `E|a|² = 1/m`).
    pub fn gaussian<R: Rng + ?Sized>(m: usize, n: usize, real: bool, rng: &mut R) -> Self {
        let g = if real {
            SignalVector::real_gaussian(m * n, rng)
        } else {
            SignalVector::complex_gaussian(m * n, rng)
        };
        let scale = 1.0 / (m as f64).sqrt();
        Self::new(CMatrix::from_iterator(m, n, g.entries().iter().map(|z| z * scale)))
    }
}

impl SensingOperator for DenseOperator {
    fn input_dim(&self) -> usize {
        self.matrix.ncols()
    }

    fn output_dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (c, xc) in x.iter().enumerate() {
            if *xc == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.matrix.column(c).iter()) {
                *o += a * xc;
            }
        }
    }

    fn adjoint_into(&self, y: &[Complex64], out: &mut [Complex64]) {
        for (c, o) in out.iter_mut().enumerate() {
            *o = self
                .matrix
                .column(c)
                .iter()
                .zip(y)
                .map(|(a, yi)| a.conj() * yi)
                .sum();
        }
    }

    fn to_dense(&self) -> CMatrix {
        self.matrix.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Instrument {
    /// `u(x) = ⟨η, x⟩`.
    FunctionalRow { eta: SignalVector },
    /// `u(x) = U x` with `U` given row by row.
    BlockMap { rows: Vec<SignalVector> },
    /// `η` with i.i.d. standard normal entries drawn from `seed`.
    GaussianRow {
        seed: u64,
        #[serde(default)]
        real: bool,
        /// Filled on construction so the draw is recorded.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<SignalVector>,
    },
}

impl Instrument {
    /// Functional row, rescaled so that `‖η‖_2 = √N`.
    pub fn functional(eta: SignalVector) -> Result<Self> {
        Instrument::FunctionalRow { eta }.normalized()
    }

    /// Block map, rescaled so that `tr(u^* u) = N`.
    pub fn block(rows: Vec<SignalVector>) -> Result<Self> {
        Instrument::BlockMap { rows }.normalized()
    }

    pub fn gaussian(n: usize, seed: u64, real: bool) -> Result<Self> {
        Instrument::GaussianRow {
            seed,
            real,
            eta: None,
        }
        .realize(n)?
        .normalized()
    }

    /// All-ones functional row, `‖η‖_2 = √N`.
    pub fn all_ones(n: usize) -> Self {
        Instrument::FunctionalRow {
            eta: SignalVector::from_real(&vec![1.0; n]),
        }
    }

    /// Identity block map.
    pub fn identity(n: usize) -> Self {
        Instrument::BlockMap {
            rows: (0..n).map(|i| SignalVector::basis(n, i)).collect(),
        }
    }

    /// Materialize a Gaussian row for dimension `n`; other variants pass through.
    pub fn realize(self, n: usize) -> Result<Self> {
        match self {
            Instrument::GaussianRow { seed, real, eta } => {
                let eta = match eta {
                    Some(e) => e,
                    None => {
                        let mut r = rng::seeded(seed);
                        if real {
                            SignalVector::real_gaussian(n, &mut r)
                        } else {
                            SignalVector::complex_gaussian(n, &mut r)
                        }
                    }
                };
                Ok(Instrument::GaussianRow {
                    seed,
                    real,
                    eta: Some(eta),
                })
            }
            other => Ok(other),
        }
    }

    /// Rescale so that `tr(u^* u) = N`, warning when a change was needed.
    pub fn normalized(self) -> Result<Self> {
        let n = self.input_dim()?;
        let tr = self.trace_gram()?;
        if tr == 0.0 {
            return Err(Error::InvalidParameter("instrument is identically zero".into()));
        }
        let factor = (n as f64 / tr).sqrt();
        if (factor - 1.0).abs() <= 1e-12 {
            return Ok(self);
        }
        if matches!(self, Instrument::GaussianRow { .. }) {
            debug!("gaussian row rescaled by {factor}");
        } else {
            warn!("instrument rescaled by {factor} to satisfy tr(u*u) = N = {n}");
        }
        let scale = Complex64::new(factor, 0.0);
        Ok(match self {
            Instrument::FunctionalRow { eta } => Instrument::FunctionalRow {
                eta: eta.scaled(scale),
            },
            Instrument::BlockMap { rows } => Instrument::BlockMap {
                rows: rows.iter().map(|r| r.scaled(scale)).collect(),
            },
            Instrument::GaussianRow { seed, real, eta } => Instrument::GaussianRow {
                seed,
                real,
                eta: eta.map(|e| e.scaled(scale)),
            },
        })
    }

    /// Rows `r_i` with `u(x)_i = Σ_k r_ik x_k`.
    fn row_vectors(&self) -> Result<Vec<Vec<Complex64>>> {
        Ok(match self {
            Instrument::FunctionalRow { eta }
            | Instrument::GaussianRow {
                eta: Some(eta), ..
            } => vec![eta.entries().iter().map(|z| z.conj()).collect()],
            Instrument::BlockMap { rows } => {
                if rows.is_empty() {
                    return Err(Error::InvalidParameter("block map needs at least one row".into()));
                }
                rows.iter().map(|r| r.entries().to_vec()).collect()
            }
            Instrument::GaussianRow { eta: None, .. } => {
                return Err(Error::InvalidParameter(
                    "gaussian instrument must be realized before use".into(),
                ))
            }
        })
    }

    pub fn input_dim(&self) -> Result<usize> {
        let rows = self.row_vectors()?;
        let n = rows[0].len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("block map rows differ in length".into()));
        }
        Ok(n)
    }

    pub fn block_dim(&self) -> usize {
        match self {
            Instrument::BlockMap { rows } => rows.len(),
            _ => 1,
        }
    }

    /// `tr(u^* u)`, the squared Frobenius norm.
    pub fn trace_gram(&self) -> Result<f64> {
        Ok(self
            .row_vectors()?
            .iter()
            .map(|r| signal::norm2_sqr(r))
            .sum())
    }

    /// `blockDim × N` matrix of `u`.
    pub fn matrix(&self) -> Result<CMatrix> {
        let rows = self.row_vectors()?;
        let n = self.input_dim()?;
        Ok(CMatrix::from_fn(rows.len(), n, |i, k| rows[i][k]))
    }

    /// The functional `η` with `u(x) = ⟨η, x⟩`, for single-row instruments.
    pub fn eta(&self) -> Option<&SignalVector> {
        match self {
            Instrument::FunctionalRow { eta }
            | Instrument::GaussianRow {
                eta: Some(eta), ..
            } => Some(eta),
            _ => None,
        }
    }
}

/// `A = m^{-1/2} (u σ(g_j))_j`, stored as the orbit rows `σ(g_j)^* r_i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementOperator {
    group: GroupDescriptor,
    instrument: Instrument,
    elements: Vec<GroupElement>,
    #[serde(skip)]
    rows: Vec<Vec<Complex64>>,
}

impl PartialEq for MeasurementOperator {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group
            && self.instrument == other.instrument
            && self.elements == other.elements
    }
}

impl MeasurementOperator {
    /// Operator with the given elements; the instrument is used as is.
    pub fn from_elements(
        group: GroupDescriptor,
        instrument: Instrument,
        elements: Vec<GroupElement>,
    ) -> Result<Self> {
        group.validate()?;
        let n = group.dim();
        let instrument = instrument.realize(n)?;
        if instrument.input_dim()? != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: instrument.input_dim()?,
            });
        }
        if elements.is_empty() {
            return Err(Error::InvalidParameter("m must be ≥ 1".into()));
        }
        for g in &elements {
            group.check_element(g)?;
        }
        let mut op = Self {
            group,
            instrument,
            elements,
            rows: Vec::new(),
        };
        op.build_rows()?;
        Ok(op)
    }

    /// `m` i.i.d. Haar elements.
    pub fn draw<R: Rng + ?Sized>(
        group: GroupDescriptor,
        instrument: Instrument,
        m: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let elements = (0..m).map(|_| group.sample_haar(rng)).collect();
        Self::from_elements(group, instrument, elements)
    }

    /// Rebuild the cached rows after deserialization.
    pub fn rebuild(mut self) -> Result<Self> {
        self.instrument = self.instrument.realize(self.group.dim())?;
        self.build_rows()?;
        Ok(self)
    }

    fn build_rows(&mut self) -> Result<()> {
        // Row r of u σ(g) is conj(σ(g)^* conj(r)).
        let base = self.instrument.row_vectors()?;
        let n = self.group.dim();
        let scale = 1.0 / (self.elements.len() as f64).sqrt();
        let mut rows = Vec::with_capacity(self.elements.len() * base.len());
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for g in &self.elements {
            for r in &base {
                let conj: Vec<Complex64> = r.iter().map(|z| z.conj()).collect();
                self.group.apply_into(g, &conj, &mut buf, true);
                rows.push(buf.iter().map(|z| z.conj() * scale).collect());
            }
        }
        self.rows = rows;
        Ok(())
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn instrument(&self) -> &Instrument {
        &self.instrument
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn m(&self) -> usize {
        self.elements.len()
    }

    pub fn block_dim(&self) -> usize {
        self.instrument.block_dim()
    }

    /// `m` blocks of length `blockDim`; block `j` is `m^{-1/2} u(σ(g_j) x)`.
    pub fn apply_blocks(&self, x: &SignalVector) -> Result<Vec<Vec<Complex64>>> {
        let flat = self.apply(x.entries())?;
        Ok(flat.chunks(self.block_dim()).map(|c| c.to_vec()).collect())
    }
}

impl SensingOperator for MeasurementOperator {
    fn input_dim(&self) -> usize {
        self.group.dim()
    }

    fn output_dim(&self) -> usize {
        self.rows.len()
    }

    fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (o, r) in out.iter_mut().zip(&self.rows) {
            *o = r.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn adjoint_into(&self, y: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (r, yi) in self.rows.iter().zip(y) {
            for (o, a) in out.iter_mut().zip(r) {
                *o += a.conj() * yi;
            }
        }
    }
}

/// `‖u: X → ℓ2^blockDim‖`, as an upper bound when only bounds are available.
///
/// By group invariance of `‖·‖_X` this does not depend on the sampled elements.
pub fn incoherence(model: &SparsityModel, instrument: &Instrument) -> Result<f64> {
    let n = model.dim();
    let instrument = instrument.clone().realize(n)?;
    if instrument.input_dim()? != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: instrument.input_dim()?,
        });
    }
    let u = instrument.matrix()?;
    match model {
        SparsityModel::CanonicalL1 { .. } => Ok((0..n)
            .map(|c| u.column(c).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)),
        SparsityModel::AtomicPolytope { atoms } => Ok(atoms
            .iter()
            .map(|a| {
                let v = &u * CMatrix::from_column_slice(n, 1, a.entries());
                linalg::frobenius(&v)
            })
            .fold(0.0, f64::max)),
        SparsityModel::SchattenBall { .. } | SparsityModel::TensorHull { .. } => {
            match instrument.eta() {
                Some(eta) => Ok(model.dual_norm(eta)?.upper()),
                None => Err(Error::Unsupported(format!(
                    "incoherence of a block instrument on {}",
                    model.label()
                ))),
            }
        }
    }
}

/// Square-function incoherence of a functional row on `S_q^n`:
/// `‖η‖_{S_{q'}} + ‖η^*‖_{S_{q'}}`.
pub fn schatten_square_function(model: &SparsityModel, instrument: &Instrument) -> Result<f64> {
    let (n, q) = match model {
        SparsityModel::SchattenBall { n, q } => (*n, *q),
        _ => {
            return Err(Error::Unsupported(
                "square-function incoherence is defined for Schatten models".into(),
            ))
        }
    };
    let instrument = instrument.clone().realize(n * n)?;
    let eta = instrument.eta().ok_or_else(|| {
        Error::Unsupported("square-function incoherence needs a functional row".into())
    })?;
    let m = eta.to_matrix()?;
    let qp = linalg::conjugate_exponent(q);
    Ok(linalg::schatten_norm(&m, qp) + linalg::schatten_norm(&m.adjoint(), qp))
}

/// `Φ̂ = avg_g σ(g)^* u^* u σ(g)` with its distance to `Id` and norm.
#[derive(Debug, Clone)]
pub struct Covariance {
    pub phi: CMatrix,
    pub distance_to_identity: f64,
    pub norm: f64,
}

pub fn covariance(group: &GroupDescriptor, instrument: &Instrument, mode: AveragingMode) -> Result<Covariance> {
    let n = group.dim();
    let instrument = instrument.clone().realize(n)?;
    let u = instrument.matrix()?;
    if u.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: u.ncols(),
        });
    }
    let gram = u.adjoint() * u;
    let phi = groups::average_conjugation(group, &gram, mode)?;
    let distance_to_identity = linalg::operator_norm(&(&phi - linalg::identity(n)));
    let norm = linalg::operator_norm(&phi);
    Ok(Covariance {
        phi,
        distance_to_identity,
        norm,
    })
}
