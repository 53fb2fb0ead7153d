//! Convex bodies `K`, their gauges `‖·‖_X`, dual norms, membership in the
//! sparse cone and samplers for `K_s = √s K ∩ S`.

mod polytope;
pub mod tensor;

pub use tensor::Field;

use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::signal::{self, Shape, SignalVector};
use num_complex::Complex64;

/// Atom-count times dimension allowed for the polytope linear program.
pub const POLYTOPE_SIZE_LIMIT: usize = 1_000_000;
/// Rejection sampler attempts before giving up.
pub const REJECTION_BUDGET: usize = 1000;

const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SparsityModel {
    /// `K = B_1^N`.
    CanonicalL1 { n: usize },
    /// `K = absconv{x_1, …, x_M}` with `‖x_j‖_2 ≤ 1`.
    AtomicPolytope { atoms: Vec<SignalVector> },
    /// Unit ball of the Schatten-`q` norm on `n × n` matrices, `1 ≤ q ≤ 2`.
    SchattenBall { n: usize, q: f64 },
    /// Absolute convex hull of unit rank-1 tensors `y_1 ⊗ … ⊗ y_d`, `y_l ∈ F^n`.
    TensorHull {
        n: usize,
        d: usize,
        #[serde(default)]
        field: Field,
    },
}

/// A norm value that is either exact or only bracketed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormValue {
    Exact { value: f64 },
    Bounds { lower: f64, upper: f64 },
}

impl NormValue {
    pub fn exact(value: f64) -> Self {
        NormValue::Exact { value }
    }

    pub fn lower(&self) -> f64 {
        match *self {
            NormValue::Exact { value } => value,
            NormValue::Bounds { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            NormValue::Exact { value } => value,
            NormValue::Bounds { upper, .. } => upper,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            NormValue::Exact { value } => Some(value),
            NormValue::Bounds { .. } => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, NormValue::Exact { .. })
    }
}

/// Outcome of a membership test that may be undecidable from bounds alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sparsity {
    Sparse,
    NotSparse,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSample {
    /// Unit `ℓ2` norm.
    pub vector: SignalVector,
    /// `Σ|c_i| / ‖Σ c_i a_i‖_2`; at most `√s`, and an upper bound on `‖x‖_X`.
    pub certificate: f64,
}

impl SparsityModel {
    pub fn canonical(n: usize) -> Self {
        SparsityModel::CanonicalL1 { n }
    }

    pub fn schatten(n: usize, q: f64) -> Self {
        SparsityModel::SchattenBall { n, q }
    }

    pub fn tensor(n: usize, d: usize, field: Field) -> Self {
        SparsityModel::TensorHull { n, d, field }
    }

    pub fn polytope(atoms: Vec<SignalVector>) -> Result<Self> {
        let m = SparsityModel::AtomicPolytope { atoms };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SparsityModel::CanonicalL1 { n } => {
                if *n == 0 {
                    return Err(Error::InvalidParameter("dimension must be ≥ 1".into()));
                }
            }
            SparsityModel::AtomicPolytope { atoms } => {
                let first = atoms
                    .first()
                    .ok_or_else(|| Error::InvalidParameter("polytope needs at least one atom".into()))?;
                let n = first.len();
                if n == 0 {
                    return Err(Error::InvalidParameter("atoms must be nonempty".into()));
                }
                for (j, a) in atoms.iter().enumerate() {
                    if a.len() != n {
                        return Err(Error::DimensionMismatch {
                            expected: n,
                            actual: a.len(),
                        });
                    }
                    if a.norm2() > 1.0 + 1e-9 {
                        return Err(Error::InvalidParameter(format!(
                            "atom {j} has ℓ2 norm {} > 1",
                            a.norm2()
                        )));
                    }
                }
                if atoms.len().saturating_mul(n) > POLYTOPE_SIZE_LIMIT {
                    return Err(Error::SizeLimit(format!(
                        "polytope M·N = {} exceeds {POLYTOPE_SIZE_LIMIT}",
                        atoms.len() * n
                    )));
                }
            }
            SparsityModel::SchattenBall { n, q } => {
                if *n == 0 {
                    return Err(Error::InvalidParameter("matrix size must be ≥ 1".into()));
                }
                if !(1.0..=2.0).contains(q) {
                    return Err(Error::InvalidParameter(format!(
                        "Schatten exponent q = {q} outside [1, 2]"
                    )));
                }
            }
            SparsityModel::TensorHull { n, d, .. } => {
                if *n == 0 || *d == 0 {
                    return Err(Error::InvalidParameter("tensor n and d must be ≥ 1".into()));
                }
                if n.checked_pow(*d as u32).is_none() {
                    return Err(Error::InvalidParameter("tensor dimension overflows".into()));
                }
            }
        }
        Ok(())
    }

    /// Ambient dimension `N`.
    pub fn dim(&self) -> usize {
        match self {
            SparsityModel::CanonicalL1 { n } => *n,
            SparsityModel::AtomicPolytope { atoms } => atoms.first().map_or(0, |a| a.len()),
            SparsityModel::SchattenBall { n, .. } => n * n,
            SparsityModel::TensorHull { n, d, .. } => n.pow(*d as u32),
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            SparsityModel::SchattenBall { n, .. } => Shape::Matrix { n: *n },
            SparsityModel::TensorHull { n, d, .. } => Shape::Tensor { n: *n, d: *d },
            _ => Shape::Flat,
        }
    }

    /// Short label used in tables.
    pub fn label(&self) -> String {
        match self {
            SparsityModel::CanonicalL1 { n } => format!("l1:{n}"),
            SparsityModel::AtomicPolytope { atoms } => format!("polytope:{}", atoms.len()),
            SparsityModel::SchattenBall { n, q } => format!("schatten:{n}:{q}"),
            SparsityModel::TensorHull { n, d, field } => match field {
                Field::Complex => format!("tensor:{n}:{d}"),
                Field::Real => format!("tensor-real:{n}:{d}"),
            },
        }
    }

    fn check(&self, x: &[Complex64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    fn as_matrix(&self, x: &[Complex64]) -> CMatrix {
        let n = match self {
            SparsityModel::SchattenBall { n, .. } => *n,
            _ => unreachable!(),
        };
        CMatrix::from_row_slice(n, n, x)
    }

    /// The gauge `‖x‖_X = inf{λ > 0 : x ∈ λK}`.
    pub fn norm_x(&self, x: &SignalVector) -> Result<NormValue> {
        self.check(x.entries())?;
        let e = x.entries();
        Ok(match self {
            SparsityModel::CanonicalL1 { .. } => NormValue::exact(e.iter().map(|z| z.norm()).sum()),
            SparsityModel::AtomicPolytope { atoms } => match polytope::gauge(atoms, x)? {
                polytope::Gauge::Exact(v) => NormValue::exact(v),
                polytope::Gauge::Bracket(lower, upper) => NormValue::Bounds { lower, upper },
                polytope::Gauge::Infinite => NormValue::exact(f64::INFINITY),
            },
            SparsityModel::SchattenBall { q, .. } => {
                NormValue::exact(linalg::schatten_norm(&self.as_matrix(e), *q))
            }
            SparsityModel::TensorHull { n, d, field } => {
                let (n, d, field) = (*n, *d, *field);
                if signal::norm2(e) == 0.0 {
                    return Ok(NormValue::exact(0.0));
                }
                if d == 1 && field == Field::Complex {
                    return Ok(NormValue::exact(signal::norm2(e)));
                }
                if d == 2 && (field == Field::Complex || x.is_real()) {
                    return Ok(NormValue::exact(linalg::schatten_norm(
                        &tensor::unfold(e, n, d, 0),
                        1.0,
                    )));
                }
                let upper = tensor::deflation_upper(e, n, d, field);
                let dual_upper = self.dual_norm(x)?.upper();
                let pairing = signal::norm2_sqr(e) / dual_upper;
                let lower = tensor::unfolding_nuclear_lower(e, n, d).max(pairing).min(upper);
                NormValue::Bounds { lower, upper }
            }
        })
    }

    /// The dual norm `‖η‖_{X^*} = sup_{x ∈ K} |⟨x, η⟩|`.
    pub fn dual_norm(&self, eta: &SignalVector) -> Result<NormValue> {
        self.check(eta.entries())?;
        let e = eta.entries();
        Ok(match self {
            SparsityModel::CanonicalL1 { .. } => {
                NormValue::exact(e.iter().fold(0.0, |a, z| a.max(z.norm())))
            }
            SparsityModel::AtomicPolytope { atoms } => NormValue::exact(
                atoms
                    .iter()
                    .map(|a| a.inner(eta).norm())
                    .fold(0.0, f64::max),
            ),
            SparsityModel::SchattenBall { q, .. } => NormValue::exact(linalg::schatten_norm(
                &self.as_matrix(e),
                linalg::conjugate_exponent(*q),
            )),
            SparsityModel::TensorHull { n, d, field } => {
                let (n, d, field) = (*n, *d, *field);
                let exact = match d {
                    1 => field == Field::Complex,
                    2 => field == Field::Complex || eta.is_real(),
                    _ => false,
                };
                if exact {
                    return Ok(NormValue::exact(if d == 1 {
                        signal::norm2(e)
                    } else {
                        linalg::operator_norm(&tensor::unfold(e, n, d, 0))
                    }));
                }
                let lower = tensor::best_rank1(e, n, d, field).coefficient.norm();
                let upper = tensor::unfolding_spectral_upper(e, n, d).max(lower);
                NormValue::Bounds { lower, upper }
            }
        })
    }

    /// Whether `‖x‖_X ≤ √s ‖x‖_2`, up to a relative tolerance of `1e-12`.
    /// The zero vector is sparse at every level.
    pub fn is_sparse(&self, x: &SignalVector, s: f64) -> Result<Sparsity> {
        if s.is_nan() || s <= 0.0 {
            return Err(Error::InvalidParameter(format!("sparsity level must be > 0, got {s}")));
        }
        self.check(x.entries())?;
        let h = x.norm2();
        if h == 0.0 {
            return Ok(Sparsity::Sparse);
        }
        let bound = s.sqrt() * h * (1.0 + REL_TOL);
        let v = self.norm_x(x)?;
        Ok(if v.upper() <= bound {
            Sparsity::Sparse
        } else if v.lower() > bound {
            Sparsity::NotSparse
        } else {
            Sparsity::Indeterminate
        })
    }

    /// Largest meaningful sparsity level for the sampler.
    pub fn effective_dim(&self) -> usize {
        match self {
            SparsityModel::CanonicalL1 { n } => *n,
            SparsityModel::AtomicPolytope { atoms } => atoms.len(),
            SparsityModel::SchattenBall { n, .. } => *n,
            SparsityModel::TensorHull { .. } => self.dim(),
        }
    }

    /// Draw a unit vector of `K_s` as a normalized combination of `⌊s⌋` atoms
    /// with complex Gaussian coefficients, accepted once its certificate is
    /// at most `√s`.
    pub fn sample_sparse<R: Rng + ?Sized>(&self, s: f64, rng: &mut R) -> Result<SparseSample> {
        if s.is_nan() || s < 1.0 || s > self.effective_dim() as f64 {
            return Err(Error::InvalidParameter(format!(
                "sparsity level {s} outside [1, {}]",
                self.effective_dim()
            )));
        }
        let k = s.floor() as usize;
        let limit = s.sqrt() * (1.0 + REL_TOL);
        for _ in 0..REJECTION_BUDGET {
            let (x, mass) = self.draw_combination(k, rng);
            let h = signal::norm2(&x);
            if h == 0.0 {
                continue;
            }
            let certificate = mass / h;
            if certificate <= limit {
                let vector = SignalVector::with_shape(x.iter().map(|z| z / h).collect(), self.shape())?;
                return Ok(SparseSample {
                    vector,
                    certificate,
                });
            }
        }
        Err(Error::RejectionBudget {
            attempts: REJECTION_BUDGET,
            s,
        })
    }

    fn draw_combination<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> (Vec<Complex64>, f64) {
        let real_coeffs = matches!(
            self,
            SparsityModel::TensorHull {
                field: Field::Real,
                ..
            }
        );
        let coeffs = if real_coeffs {
            SignalVector::real_gaussian(k, rng).into_entries()
        } else {
            SignalVector::complex_gaussian(k, rng).into_entries()
        };
        let mass: f64 = coeffs.iter().map(|c| c.norm()).sum();
        let n_dim = self.dim();
        let mut x = vec![Complex64::new(0.0, 0.0); n_dim];
        match self {
            SparsityModel::CanonicalL1 { n } => {
                for (i, c) in index::sample(rng, *n, k).into_iter().zip(&coeffs) {
                    x[i] = *c;
                }
            }
            SparsityModel::AtomicPolytope { atoms } => {
                let mut mass = 0.0;
                for (j, c) in index::sample(rng, atoms.len(), k).into_iter().zip(&coeffs) {
                    for (xi, ai) in x.iter_mut().zip(atoms[j].entries()) {
                        *xi += c * ai;
                    }
                    mass += c.norm();
                }
                return (x, mass);
            }
            SparsityModel::SchattenBall { n, .. } => {
                let mut us: Vec<Vec<Complex64>> =
                    (0..k).map(|_| SignalVector::complex_gaussian(*n, rng).into_entries()).collect();
                let mut vs: Vec<Vec<Complex64>> =
                    (0..k).map(|_| SignalVector::complex_gaussian(*n, rng).into_entries()).collect();
                if !linalg::gram_schmidt(&mut us) || !linalg::gram_schmidt(&mut vs) {
                    return (x, f64::INFINITY);
                }
                for ((u, v), c) in us.iter().zip(&vs).zip(&coeffs) {
                    for i in 0..*n {
                        for j in 0..*n {
                            x[i * n + j] += c * u[i] * v[j].conj();
                        }
                    }
                }
            }
            SparsityModel::TensorHull { n, d, field } => {
                for c in &coeffs {
                    let factors: Vec<Vec<Complex64>> = (0..*d)
                        .map(|_| random_unit(*n, *field, rng))
                        .collect();
                    for (xi, ai) in x.iter_mut().zip(tensor::outer(&factors)) {
                        *xi += c * ai;
                    }
                }
            }
        }
        (x, mass)
    }
}

/// Uniform unit vector in `F^n`.
/// Parses the labels produced by [`SparsityModel::label`], except polytopes.
impl FromStr for SparsityModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unrecognized model `{s}`"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let int = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let model = match parts.as_slice() {
            ["l1", n] => SparsityModel::canonical(int(n)?),
            ["schatten", n, q] => SparsityModel::schatten(int(n)?, q.parse().map_err(|_| bad())?),
            ["tensor", n, d] => SparsityModel::tensor(int(n)?, int(d)?, Field::Complex),
            ["tensor-real", n, d] => SparsityModel::tensor(int(n)?, int(d)?, Field::Real),
            _ => return Err(bad()),
        };
        model.validate()?;
        Ok(model)
    }
}

pub fn random_unit<R: Rng + ?Sized>(n: usize, field: Field, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v = match field {
            Field::Real => SignalVector::real_gaussian(n, rng),
            Field::Complex => SignalVector::complex_gaussian(n, rng),
        };
        let h = v.norm2();
        if h > 0.0 {
            return v.into_entries().into_iter().map(|z| z / h).collect();
        }
    }
}
