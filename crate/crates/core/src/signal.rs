//! Complex coordinate vectors with an optional matrix or tensor view.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// How the flat coordinate array is meant to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Flat,
    /// Row-major `n × n` matrix, `N = n²`.
    Matrix { n: usize },
    /// Order-`d` tensor with all modes of size `n`, `N = n^d`, last mode fastest.
    Tensor { n: usize, d: usize },
}

impl Shape {
    pub fn element_count(&self) -> Option<usize> {
        match *self {
            Shape::Flat => None,
            Shape::Matrix { n } => n.checked_mul(n),
            Shape::Tensor { n, d } => n.checked_pow(d as u32),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalVector {
    entries: Vec<Complex64>,
    shape: Shape,
}

impl SignalVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        Self {
            entries,
            shape: Shape::Flat,
        }
    }

    pub fn with_shape(entries: Vec<Complex64>, shape: Shape) -> Result<Self> {
        if let Some(len) = shape.element_count() {
            if len != entries.len() {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    actual: entries.len(),
                });
            }
        }
        Ok(Self { entries, shape })
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn basis(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.entries[index] = Complex64::new(1.0, 0.0);
        v
    }

    /// Row-major vectorization of a square matrix.
    pub fn from_matrix(m: &DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "expected square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(m[(i, j)]);
            }
        }
        Ok(Self {
            entries,
            shape: Shape::Matrix { n },
        })
    }

    /// Draw i.i.d. standard complex Gaussian entries (`E|z|² = 1`).
    pub fn complex_gaussian<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(
            (0..len)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    Complex64::new(h * re, h * im)
                })
                .collect(),
        )
    }

    pub fn real_gaussian<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self::new(
            (0..len)
                .map(|_| Complex64::new(StandardNormal.sample(rng), 0.0))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.entries
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn reshape(mut self, shape: Shape) -> Result<Self> {
        if let Some(len) = shape.element_count() {
            if len != self.entries.len() {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    actual: self.entries.len(),
                });
            }
        }
        self.shape = shape;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.entries)
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    /// `⟨self, other⟩ = Σ conj(self_i) other_i`.
    pub fn inner(&self, other: &SignalVector) -> Complex64 {
        inner(&self.entries, &other.entries)
    }

    pub fn scaled(&self, c: Complex64) -> SignalVector {
        SignalVector {
            entries: self.entries.iter().map(|z| z * c).collect(),
            shape: self.shape,
        }
    }

    /// Unit-norm copy; the zero vector is returned unchanged.
    pub fn normalized(&self) -> SignalVector {
        let n = self.norm2();
        if n == 0.0 {
            self.clone()
        } else {
            self.scaled(Complex64::new(1.0 / n, 0.0))
        }
    }

    /// Row-major `n × n` view. Fails unless the length is a perfect square.
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        let n = match self.shape {
            Shape::Matrix { n } => n,
            _ => exact_sqrt(self.len()).ok_or_else(|| {
                Error::ShapeMismatch(format!("length {} is not a perfect square", self.len()))
            })?,
        };
        Ok(DMatrix::from_row_slice(n, n, &self.entries))
    }
}

impl From<Vec<Complex64>> for SignalVector {
    fn from(entries: Vec<Complex64>) -> Self {
        Self::new(entries)
    }
}

impl Serialize for SignalVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.entries.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SignalVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        Ok(SignalVector::new(
            pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        ))
    }
}

pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm2_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn exact_sqrt(len: usize) -> Option<usize> {
    let r = (len as f64).sqrt().round() as usize;
    (r * r == len).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_is_pairs() {
        let v = SignalVector::new(vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.0)]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "[[1.0,-2.0],[0.5,0.0]]");
        let back: SignalVector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn matrix_view_is_row_major() {
        let v = SignalVector::from_real(&[1.0, 2.0, 3.0, 4.0]);
        let m = v.to_matrix().unwrap();
        assert_eq!(m[(0, 1)].re, 2.0);
        assert_eq!(m[(1, 0)].re, 3.0);
        assert_eq!(SignalVector::from_matrix(&m).unwrap().entries(), v.entries());
    }

    #[test]
    fn shape_length_is_checked() {
        let v = SignalVector::zeros(8);
        assert!(v.clone().reshape(Shape::Tensor { n: 2, d: 3 }).is_ok());
        assert!(v.reshape(Shape::Matrix { n: 3 }).is_err());
    }
}
