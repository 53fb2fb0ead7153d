//! Finite groups with affine unitary representations `σ: G → U(N)`.
//!
//! Every action is applied in `O(N)` per factor by index and phase arithmetic;
//! dense matrices are only formed by [`GroupDescriptor::densify`] for checks.
//!
//! | group | `N` | `|G|` | `σ(g)` |
//! |---|---|---|---|
//! | Heisenberg–Weyl | `n` | `n²` | `Λ^l Sh^k` |
//! | sign-shift | `n` | `2^n n` | `D_ε Sh^k` |
//! | Pauli | `2^k` | `4^k` | `⊗_q ε^{z_q} J^{x_q}` |
//! | product | `Π N_f` | `Π |G_f|` | `⊗_f σ_f(g_f)` |
//!
//! `Sh e_r = e_{r+1}`, `Λ e_r = e^{2πi r/n} e_r`, `ε = diag(1, −1)` and
//! `J` swaps the two basis vectors. Products use row-major index order, so the
//! first factor varies slowest; on a row-major `n × n` matrix `X` the pair
//! `[G, G]` acts as `X ↦ σ(g) X σ(g′)^T`.

mod isotropy;

pub use isotropy::{
    average_conjugation, commutant_dimension, conjugate, verify_isotropy, AveragingMode,
    EXACT_ORDER_LIMIT,
};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::signal::SignalVector;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupDescriptor {
    /// `Z_n²` acting by modulations and cyclic shifts.
    HeisenbergWeyl { n: usize },
    /// `{±1}^n ⋊ Z_n` acting by sign flips and cyclic shifts.
    SignShift { n: usize },
    /// `Z_2^{2k}` acting on `C^{2^k}` by tensor products of `ε^a J^b`.
    PauliTensor { k: usize },
    ProductGroup { factors: Vec<GroupDescriptor> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupElement {
    HeisenbergWeyl { l: usize, k: usize },
    /// Signs are stored as ±1.
    SignShift { signs: Vec<i8>, shift: usize },
    /// Bit `q` of `x` (resp. `z`) selects `J` (resp. `ε`) on qubit `q`.
    Pauli { x: u64, z: u64 },
    Product { factors: Vec<GroupElement> },
}

impl GroupDescriptor {
    pub fn hw(n: usize) -> Self {
        GroupDescriptor::HeisenbergWeyl { n }
    }

    pub fn sign_shift(n: usize) -> Self {
        GroupDescriptor::SignShift { n }
    }

    pub fn pauli(k: usize) -> Self {
        GroupDescriptor::PauliTensor { k }
    }

    pub fn product(factors: Vec<GroupDescriptor>) -> Self {
        GroupDescriptor::ProductGroup { factors }
    }

    /// Two-sided action `X ↦ σ(g) X σ(g′)^T` on row-major `n × n` matrices.
    pub fn two_sided(base: GroupDescriptor) -> Self {
        GroupDescriptor::ProductGroup {
            factors: vec![base.clone(), base],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GroupDescriptor::HeisenbergWeyl { n } | GroupDescriptor::SignShift { n } => {
                if *n == 0 {
                    return Err(Error::InvalidParameter("group dimension must be ≥ 1".into()));
                }
            }
            GroupDescriptor::PauliTensor { k } => {
                if *k == 0 || *k > 30 {
                    return Err(Error::InvalidParameter(format!(
                        "pauli qubit count must be in 1..=30, got {k}"
                    )));
                }
            }
            GroupDescriptor::ProductGroup { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidParameter("product group needs factors".into()));
                }
                for f in factors {
                    f.validate()?;
                }
                factors
                    .iter()
                    .try_fold(1usize, |acc, f| acc.checked_mul(f.dim()))
                    .ok_or_else(|| Error::InvalidParameter("product dimension overflows".into()))?;
            }
        }
        Ok(())
    }

    /// Dimension `N` of the representation space.
    pub fn dim(&self) -> usize {
        match self {
            GroupDescriptor::HeisenbergWeyl { n } | GroupDescriptor::SignShift { n } => *n,
            GroupDescriptor::PauliTensor { k } => 1usize << k,
            GroupDescriptor::ProductGroup { factors } => factors.iter().map(|f| f.dim()).product(),
        }
    }

    /// `|G|`, or `None` when it overflows `u128`.
    pub fn order(&self) -> Option<u128> {
        match self {
            GroupDescriptor::HeisenbergWeyl { n } => (*n as u128).checked_mul(*n as u128),
            GroupDescriptor::SignShift { n } => {
                if *n >= 120 {
                    None
                } else {
                    (1u128 << n).checked_mul(*n as u128)
                }
            }
            GroupDescriptor::PauliTensor { k } => 1u128.checked_shl(2 * *k as u32),
            GroupDescriptor::ProductGroup { factors } => factors
                .iter()
                .try_fold(1u128, |acc, f| f.order().and_then(|o| acc.checked_mul(o))),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupDescriptor::HeisenbergWeyl { .. } => GroupElement::HeisenbergWeyl { l: 0, k: 0 },
            GroupDescriptor::SignShift { n } => GroupElement::SignShift {
                signs: vec![1; *n],
                shift: 0,
            },
            GroupDescriptor::PauliTensor { .. } => GroupElement::Pauli { x: 0, z: 0 },
            GroupDescriptor::ProductGroup { factors } => GroupElement::Product {
                factors: factors.iter().map(|f| f.identity()).collect(),
            },
        }
    }

    pub fn check_element(&self, g: &GroupElement) -> Result<()> {
        match (self, g) {
            (GroupDescriptor::HeisenbergWeyl { n }, GroupElement::HeisenbergWeyl { l, k }) => {
                if l >= n || k >= n {
                    return Err(Error::GroupMismatch(format!(
                        "({l},{k}) out of range for Z_{n}²"
                    )));
                }
            }
            (GroupDescriptor::SignShift { n }, GroupElement::SignShift { signs, shift }) => {
                if signs.len() != *n || shift >= n || signs.iter().any(|&e| e != 1 && e != -1) {
                    return Err(Error::GroupMismatch(format!(
                        "sign-shift element invalid for n = {n}"
                    )));
                }
            }
            (GroupDescriptor::PauliTensor { k }, GroupElement::Pauli { x, z }) => {
                let mask = (1u64 << k) - 1;
                if x & !mask != 0 || z & !mask != 0 {
                    return Err(Error::GroupMismatch(format!(
                        "pauli bits exceed {k} qubits"
                    )));
                }
            }
            (GroupDescriptor::ProductGroup { factors }, GroupElement::Product { factors: gs }) => {
                if factors.len() != gs.len() {
                    return Err(Error::GroupMismatch(format!(
                        "product has {} factors, element has {}",
                        factors.len(),
                        gs.len()
                    )));
                }
                for (f, g) in factors.iter().zip(gs) {
                    f.check_element(g)?;
                }
            }
            _ => {
                return Err(Error::GroupMismatch(format!(
                    "element kind does not match group {self}"
                )))
            }
        }
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: len,
            });
        }
        Ok(())
    }

    /// `σ(g) x`.
    pub fn apply(&self, g: &GroupElement, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(x.len())?;
        self.check_element(g)?;
        let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
        self.apply_into(g, x, &mut out, false);
        Ok(out)
    }

    /// `σ(g)^* x`.
    pub fn adjoint_apply(&self, g: &GroupElement, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(x.len())?;
        self.check_element(g)?;
        let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
        self.apply_into(g, x, &mut out, true);
        Ok(out)
    }

    pub fn apply_signal(&self, g: &GroupElement, x: &SignalVector) -> Result<SignalVector> {
        SignalVector::with_shape(self.apply(g, x.entries())?, x.shape())
    }

    pub fn adjoint_apply_signal(&self, g: &GroupElement, x: &SignalVector) -> Result<SignalVector> {
        SignalVector::with_shape(self.adjoint_apply(g, x.entries())?, x.shape())
    }

    /// Unchecked kernel; `g` must belong to `self` and lengths must match.
    pub(crate) fn apply_into(
        &self,
        g: &GroupElement,
        x: &[Complex64],
        out: &mut [Complex64],
        adjoint: bool,
    ) {
        match (self, g) {
            (GroupDescriptor::HeisenbergWeyl { n }, GroupElement::HeisenbergWeyl { l, k }) => {
                let n = *n;
                if !adjoint {
                    for (r, o) in out.iter_mut().enumerate() {
                        *o = root_of_unity((l * r) % n, n) * x[(r + n - k) % n];
                    }
                } else {
                    for (r, o) in out.iter_mut().enumerate() {
                        let src = (r + k) % n;
                        *o = root_of_unity((n - (l * src) % n) % n, n) * x[src];
                    }
                }
            }
            (GroupDescriptor::SignShift { n }, GroupElement::SignShift { signs, shift }) => {
                let n = *n;
                if !adjoint {
                    for (r, o) in out.iter_mut().enumerate() {
                        *o = x[(r + n - shift) % n] * f64::from(signs[r]);
                    }
                } else {
                    for (r, o) in out.iter_mut().enumerate() {
                        let src = (r + shift) % n;
                        *o = x[src] * f64::from(signs[src]);
                    }
                }
            }
            (GroupDescriptor::PauliTensor { .. }, GroupElement::Pauli { x: xm, z: zm }) => {
                let (xm, zm) = (*xm as usize, *zm as usize);
                if !adjoint {
                    for (r, o) in out.iter_mut().enumerate() {
                        *o = x[r ^ xm] * parity_sign(r & zm);
                    }
                } else {
                    for (r, o) in out.iter_mut().enumerate() {
                        let src = r ^ xm;
                        *o = x[src] * parity_sign(src & zm);
                    }
                }
            }
            (GroupDescriptor::ProductGroup { factors }, GroupElement::Product { factors: gs }) => {
                out.copy_from_slice(x);
                let total = x.len();
                let mut stride = total;
                let mut fiber_in = Vec::new();
                let mut fiber_out = Vec::new();
                for (f, gf) in factors.iter().zip(gs) {
                    let nf = f.dim();
                    stride /= nf;
                    fiber_in.resize(nf, Complex64::new(0.0, 0.0));
                    fiber_out.resize(nf, Complex64::new(0.0, 0.0));
                    let block = nf * stride;
                    for base in (0..total).step_by(block) {
                        for i in 0..stride {
                            let start = base + i;
                            for (t, v) in fiber_in.iter_mut().enumerate() {
                                *v = out[start + t * stride];
                            }
                            f.apply_into(gf, &fiber_in, &mut fiber_out, adjoint);
                            for (t, v) in fiber_out.iter().enumerate() {
                                out[start + t * stride] = *v;
                            }
                        }
                    }
                }
            }
            _ => unreachable!("element/group mismatch should be checked by caller"),
        }
    }

    /// `(gh, φ)` with `σ(g)σ(h) = φ σ(gh)`.
    pub fn compose(&self, g: &GroupElement, h: &GroupElement) -> Result<(GroupElement, Complex64)> {
        self.check_element(g)?;
        self.check_element(h)?;
        Ok(self.compose_unchecked(g, h))
    }

    fn compose_unchecked(&self, g: &GroupElement, h: &GroupElement) -> (GroupElement, Complex64) {
        match (self, g, h) {
            (
                GroupDescriptor::HeisenbergWeyl { n },
                GroupElement::HeisenbergWeyl { l, k },
                GroupElement::HeisenbergWeyl { l: l2, k: k2 },
            ) => {
                let n = *n;
                let phase = root_of_unity((n - (l2 * k) % n) % n, n);
                (
                    GroupElement::HeisenbergWeyl {
                        l: (l + l2) % n,
                        k: (k + k2) % n,
                    },
                    phase,
                )
            }
            (
                GroupDescriptor::SignShift { n },
                GroupElement::SignShift { signs, shift },
                GroupElement::SignShift {
                    signs: signs2,
                    shift: shift2,
                },
            ) => {
                let n = *n;
                let signs = (0..n)
                    .map(|r| signs[r] * signs2[(r + n - shift) % n])
                    .collect();
                (
                    GroupElement::SignShift {
                        signs,
                        shift: (shift + shift2) % n,
                    },
                    ONE,
                )
            }
            (
                GroupDescriptor::PauliTensor { .. },
                GroupElement::Pauli { x, z },
                GroupElement::Pauli { x: x2, z: z2 },
            ) => (
                GroupElement::Pauli {
                    x: x ^ x2,
                    z: z ^ z2,
                },
                Complex64::new(parity_sign((x & z2) as usize), 0.0),
            ),
            (
                GroupDescriptor::ProductGroup { factors },
                GroupElement::Product { factors: gs },
                GroupElement::Product { factors: hs },
            ) => {
                let mut phase = ONE;
                let parts = factors
                    .iter()
                    .zip(gs.iter().zip(hs))
                    .map(|(f, (g, h))| {
                        let (gh, p) = f.compose_unchecked(g, h);
                        phase *= p;
                        gh
                    })
                    .collect();
                (GroupElement::Product { factors: parts }, phase)
            }
            _ => unreachable!("checked by caller"),
        }
    }

    /// Uniform draw from the group.
    pub fn sample_haar<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        match self {
            GroupDescriptor::HeisenbergWeyl { n } => GroupElement::HeisenbergWeyl {
                l: rng.random_range(0..*n),
                k: rng.random_range(0..*n),
            },
            GroupDescriptor::SignShift { n } => GroupElement::SignShift {
                signs: (0..*n)
                    .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                    .collect(),
                shift: rng.random_range(0..*n),
            },
            GroupDescriptor::PauliTensor { k } => {
                let mask = (1u64 << k) - 1;
                GroupElement::Pauli {
                    x: rng.random::<u64>() & mask,
                    z: rng.random::<u64>() & mask,
                }
            }
            GroupDescriptor::ProductGroup { factors } => GroupElement::Product {
                factors: factors.iter().map(|f| f.sample_haar(rng)).collect(),
            },
        }
    }

    /// All group elements, for groups with `|G| ≤ limit`.
    pub fn elements(&self, limit: u128) -> Result<Vec<GroupElement>> {
        match self.order() {
            Some(o) if o <= limit => {}
            _ => {
                return Err(Error::SizeLimit(format!(
                    "group {self} has more than {limit} elements"
                )))
            }
        }
        Ok(match self {
            GroupDescriptor::HeisenbergWeyl { n } => (0..*n)
                .flat_map(|l| (0..*n).map(move |k| GroupElement::HeisenbergWeyl { l, k }))
                .collect(),
            GroupDescriptor::SignShift { n } => {
                let n = *n;
                (0..(1u64 << n))
                    .flat_map(|bits| {
                        (0..n).map(move |shift| GroupElement::SignShift {
                            signs: (0..n)
                                .map(|r| if bits >> r & 1 == 1 { -1 } else { 1 })
                                .collect(),
                            shift,
                        })
                    })
                    .collect()
            }
            GroupDescriptor::PauliTensor { k } => {
                let size = 1u64 << k;
                (0..size)
                    .flat_map(|x| (0..size).map(move |z| GroupElement::Pauli { x, z }))
                    .collect()
            }
            GroupDescriptor::ProductGroup { factors } => {
                let mut acc: Vec<Vec<GroupElement>> = vec![Vec::new()];
                for f in factors {
                    let fe = f.elements(limit)?;
                    acc = acc
                        .into_iter()
                        .flat_map(|prefix| {
                            fe.iter().map(move |e| {
                                let mut p = prefix.clone();
                                p.push(e.clone());
                                p
                            })
                        })
                        .collect();
                }
                acc.into_iter()
                    .map(|factors| GroupElement::Product { factors })
                    .collect()
            }
        })
    }

    /// A generating set of the group.
    pub fn generators(&self) -> Vec<GroupElement> {
        match self {
            GroupDescriptor::HeisenbergWeyl { .. } => vec![
                GroupElement::HeisenbergWeyl { l: 1, k: 0 },
                GroupElement::HeisenbergWeyl { l: 0, k: 1 },
            ],
            GroupDescriptor::SignShift { n } => {
                let mut flip = vec![1; *n];
                flip[0] = -1;
                vec![
                    GroupElement::SignShift {
                        signs: flip,
                        shift: 0,
                    },
                    GroupElement::SignShift {
                        signs: vec![1; *n],
                        shift: 1 % n,
                    },
                ]
            }
            GroupDescriptor::PauliTensor { k } => (0..*k)
                .flat_map(|q| {
                    [
                        GroupElement::Pauli { x: 1 << q, z: 0 },
                        GroupElement::Pauli { x: 0, z: 1 << q },
                    ]
                })
                .collect(),
            GroupDescriptor::ProductGroup { factors } => {
                let ids: Vec<GroupElement> = factors.iter().map(|f| f.identity()).collect();
                factors
                    .iter()
                    .enumerate()
                    .flat_map(|(i, f)| {
                        let ids = ids.clone();
                        f.generators().into_iter().map(move |g| {
                            let mut parts = ids.clone();
                            parts[i] = g;
                            GroupElement::Product { factors: parts }
                        })
                    })
                    .collect()
            }
        }
    }

    /// Explicit `N × N` matrix of `σ(g)`.
    pub fn densify(&self, g: &GroupElement) -> Result<CMatrix> {
        self.check_element(g)?;
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            e[c] = ONE;
            self.apply_into(g, &e, &mut col, false);
            e[c] = Complex64::new(0.0, 0.0);
            for r in 0..n {
                m[(r, c)] = col[r];
            }
        }
        Ok(m)
    }

    /// True when every element acts by a real orthogonal matrix.
    pub fn is_real(&self) -> bool {
        match self {
            GroupDescriptor::HeisenbergWeyl { n } => *n <= 2,
            GroupDescriptor::SignShift { .. } | GroupDescriptor::PauliTensor { .. } => true,
            GroupDescriptor::ProductGroup { factors } => factors.iter().all(|f| f.is_real()),
        }
    }
}

/// Jordan–Wigner Majorana generators on `k` qubits as `(element, phase)` with
/// `c_r = phase · σ(element)` Hermitian, `c_r² = 1` and `c_r c_s = −c_s c_r`
/// for `r ≠ s`. Products of subsets of them exhaust the Pauli group up to phase.
pub fn majorana_generators(k: usize) -> Vec<(GroupElement, Complex64)> {
    let mut out = Vec::with_capacity(2 * k);
    for q in 0..k {
        let x = 1u64 << q;
        let string = x - 1;
        out.push((GroupElement::Pauli { x, z: string }, ONE));
        // Y = −i εJ on qubit q.
        out.push((
            GroupElement::Pauli {
                x,
                z: string | x,
            },
            Complex64::new(0.0, -1.0),
        ));
    }
    out
}

fn root_of_unity(num: usize, n: usize) -> Complex64 {
    if num == 0 {
        return ONE;
    }
    Complex64::from_polar(1.0, 2.0 * PI * num as f64 / n as f64)
}

fn parity_sign(bits: usize) -> f64 {
    if bits.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupDescriptor::HeisenbergWeyl { n } => write!(f, "hw:{n}"),
            GroupDescriptor::SignShift { n } => write!(f, "ss:{n}"),
            GroupDescriptor::PauliTensor { k } => write!(f, "pauli:{k}"),
            GroupDescriptor::ProductGroup { factors } => {
                let parts: Vec<String> = factors.iter().map(|g| g.to_string()).collect();
                write!(f, "{}", parts.join("*"))
            }
        }
    }
}

/// Parses `hw:N`, `ss:N`, `pauli:K`, products joined by `*` (e.g.
/// `hw:2*hw:2*hw:2`), powers such as `hw:2^3`, and `two-sided(pauli:2)`.
impl FromStr for GroupDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(inner) = s
            .strip_prefix("two-sided(")
            .and_then(|r| r.strip_suffix(')'))
        {
            return Ok(GroupDescriptor::two_sided(inner.parse()?));
        }
        if s.contains('*') {
            let factors = s
                .split('*')
                .map(str::parse)
                .collect::<Result<Vec<GroupDescriptor>>>()?;
            return Ok(GroupDescriptor::ProductGroup { factors });
        }
        if let Some((base, pow)) = s.split_once('^') {
            let base: GroupDescriptor = base.parse()?;
            let d: usize = pow
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad power in `{s}`")))?;
            if d == 0 {
                return Err(Error::InvalidParameter(format!("zero power in `{s}`")));
            }
            return Ok(GroupDescriptor::ProductGroup {
                factors: vec![base; d],
            });
        }
        let (kind, num) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("cannot parse group `{s}`")))?;
        let num: usize = num
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad size in group `{s}`")))?;
        let g = match kind {
            "hw" | "heisenberg-weyl" => GroupDescriptor::HeisenbergWeyl { n: num },
            "ss" | "sign-shift" => GroupDescriptor::SignShift { n: num },
            "pauli" => GroupDescriptor::PauliTensor { k: num },
            _ => return Err(Error::InvalidParameter(format!("unknown group kind `{kind}`"))),
        };
        g.validate()?;
        Ok(g)
    }
}
