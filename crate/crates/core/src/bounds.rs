//! Closed-form entropy, complexity and sample-size bounds with explicit
//! absolute constants (all default to 1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::conjugate_exponent;
use crate::sparsity::SparsityModel;

/// Fixed-point iteration cap.
pub const MAX_ITERATIONS: usize = 10_000;
const M_LIMIT: f64 = 9_223_372_036_854_775_808.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Small constant `c`.
    pub c: f64,
    /// Large constant `C`.
    pub big_c: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self { c: 1.0, big_c: 1.0 }
    }
}

/// `e(p)`: 1 for `p < 2`, 3 for `p = 2`.
pub fn exponent_e(p: f64) -> f64 {
    if p < 2.0 {
        1.0
    } else {
        3.0
    }
}

/// `c(p) = (1/2 − 1/p')^{-1} C^{p'}` for `1 < p < 2`.
pub fn c_of_p(p: f64, big_c: f64) -> Result<f64> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::InvalidParameter(format!("c(p) needs 1 < p < 2, got {p}")));
    }
    let pp = conjugate_exponent(p);
    Ok(big_c.powf(pp) / (0.5 - 1.0 / pp))
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

/// `c ‖v‖ √((1 + ln(N/l))(1 + ln m)) / √l`, the bound on `e_l(v)`.
pub fn maurey_bound(n: u64, m: u64, l: u64, norm_v: f64, c: f64) -> Result<f64> {
    require(n >= 1 && m >= 1 && l >= 1, || "N, m, l must be ≥ 1".into())?;
    require(l <= n, || format!("l = {l} exceeds N = {n}"))?;
    let nl = (n as f64 / l as f64).ln();
    Ok(c * norm_v * ((1.0 + nl) * (1.0 + (m as f64).ln())).sqrt() / (l as f64).sqrt())
}

/// `C √((1 + ln N)(1 + ln m)) (1 + ln m + ln blockDim) ‖v‖`.
pub fn e21_bound(n: u64, m: u64, block_dim: u64, norm_v: f64, big_c: f64) -> Result<f64> {
    require(n >= 1 && m >= 1 && block_dim >= 1, || "N, m, blockDim must be ≥ 1".into())?;
    let (ln_n, ln_m, ln_d) = ((n as f64).ln(), (m as f64).ln(), (block_dim as f64).ln());
    Ok(big_c * ((1.0 + ln_n) * (1.0 + ln_m)).sqrt() * (1.0 + ln_m + ln_d) * norm_v)
}

/// The structural data a complexity bound depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComplexityModel {
    CanonicalL1 { n: u64 },
    AtomicPolytope { atoms: u64 },
    SchattenBall { n: u64, q: f64 },
    TensorHull { n: u64, d: u64 },
    /// Any `X` whose dual has type `p` with constant `type_constant`.
    DualType { type_constant: f64 },
}

impl From<&SparsityModel> for ComplexityModel {
    fn from(m: &SparsityModel) -> Self {
        match m {
            SparsityModel::CanonicalL1 { n } => ComplexityModel::CanonicalL1 { n: *n as u64 },
            SparsityModel::AtomicPolytope { atoms } => ComplexityModel::AtomicPolytope {
                atoms: atoms.len() as u64,
            },
            SparsityModel::SchattenBall { n, q } => ComplexityModel::SchattenBall { n: *n as u64, q: *q },
            SparsityModel::TensorHull { n, d, .. } => ComplexityModel::TensorHull {
                n: *n as u64,
                d: *d as u64,
            },
        }
    }
}

/// `ln M` for the rank-1 net covering the tensor hull.
pub fn tensor_log_atoms(n: u64, d: u64) -> f64 {
    3.0 * n as f64 * d as f64 * (1.0 + (d as f64).ln())
}

/// `M_{p,α}(K)` for the given model.
///
/// `type_constant` overrides `T_2(S_{q'}) = √q'` for Schatten balls; for
/// `DualType` the constant is part of the model.
pub fn complexity_constant(
    model: &ComplexityModel,
    p: f64,
    block_dim: u64,
    m: f64,
    constants: &Constants,
    type_constant: Option<f64>,
) -> Result<f64> {
    require(p > 1.0 && p <= 2.0, || format!("p = {p} outside (1, 2]"))?;
    require(block_dim >= 1, || "blockDim must be ≥ 1".into())?;
    require(m >= 1.0, || "m must be ≥ 1".into())?;
    let ln_d = (block_dim as f64).ln();
    let big_c = constants.big_c;
    if p < 2.0 {
        return match model {
            ComplexityModel::DualType { type_constant } => {
                let pp = conjugate_exponent(p);
                Ok(c_of_p(p, big_c)?
                    * type_constant.powf(pp + 1.0)
                    * m.powf(2.0 / p - 1.0)
                    * (1.0 + m.ln()).sqrt())
            }
            _ => Err(Error::Unsupported(format!(
                "no complexity bound for p = {p} < 2 on this model"
            ))),
        };
    }
    Ok(match *model {
        ComplexityModel::CanonicalL1 { n } => big_c * (1.0 + (n as f64).ln()).sqrt() * (1.0 + ln_d),
        ComplexityModel::AtomicPolytope { atoms } => {
            big_c * (1.0 + (atoms as f64).ln()).sqrt() * (1.0 + ln_d)
        }
        ComplexityModel::SchattenBall { n, q } => {
            require((1.0..=2.0).contains(&q), || format!("q = {q} outside [1, 2]"))?;
            if q == 1.0 {
                big_c * (1.0 + ln_d).powf(1.5) * (1.0 + (n as f64).ln()).powf(1.5)
            } else {
                let t = type_constant.unwrap_or_else(|| conjugate_exponent(q).sqrt());
                big_c * (1.0 + ln_d).powf(1.5) * t.powi(3)
            }
        }
        ComplexityModel::TensorHull { n, d } => {
            big_c * (1.0 + tensor_log_atoms(n, d)).sqrt() * (1.0 + ln_d)
        }
        ComplexityModel::DualType { type_constant } => {
            constants.c * type_constant.powi(3) * (1.0 + m.ln()).powf(1.5)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub s: f64,
    pub delta: f64,
    pub zeta: f64,
    pub p: f64,
    pub block_dim: u64,
    /// Overrides the default type-2 constant where one is used.
    #[serde(default)]
    pub type_constant: Option<f64>,
    #[serde(default)]
    pub constants: Constants,
}

impl BoundParams {
    pub fn new(s: f64, delta: f64, zeta: f64) -> Self {
        Self {
            s,
            delta,
            zeta,
            p: 2.0,
            block_dim: 1,
            type_constant: None,
            constants: Constants::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        require(self.s >= 1.0, || format!("s = {} must be ≥ 1", self.s))?;
        require(self.delta > 0.0, || format!("δ = {} must be > 0", self.delta))?;
        require(self.zeta > 0.0 && self.zeta < 1.0, || format!("ζ = {} outside (0, 1)", self.zeta))?;
        require(self.p > 1.0 && self.p <= 2.0, || format!("p = {} outside (1, 2]", self.p))?;
        require(self.block_dim >= 1, || "blockDim must be ≥ 1".into())?;
        require(
            self.constants.c >= 0.0 && self.constants.big_c >= 0.0,
            || "constants must be nonnegative".into(),
        )
    }
}

/// Moment bounds on the measurement maps: `sup α(v_j)` and `sup ‖v_j‖`.
/// For deterministic instruments both are the instrument incoherence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Incoherence {
    pub alpha: f64,
    pub operator_norm: f64,
}

impl Incoherence {
    pub fn uniform(value: f64) -> Self {
        Self {
            alpha: value,
            operator_norm: value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub m: u64,
    pub iterations: usize,
}

/// Both sides of the two sufficient conditions at a given `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    /// `m^{1/p} / (1 + ln m)^{e(p)/2}`.
    pub lhs1: f64,
    /// `c M_{p,α}(K) √s δ^{-1} α`.
    pub rhs1: f64,
    /// `c δ^{-2} s ln(ζ^{-1}) ‖v‖²`.
    pub rhs2: f64,
    pub m: u64,
}

impl ConditionCheck {
    pub fn first(&self) -> bool {
        self.lhs1 >= self.rhs1
    }

    pub fn second(&self) -> bool {
        self.m as f64 >= self.rhs2
    }

    pub fn holds(&self) -> bool {
        self.first() && self.second()
    }
}

/// Least integer `m ≥ 1` with `m ≥ g(m)` for nondecreasing `g`, by
/// iterating `m ← ⌈g(m)⌉` from `m = 1`.
pub fn least_fixed_point(g: impl Fn(f64) -> Result<f64>) -> Result<Prediction> {
    let mut m: u64 = 1;
    for it in 1..=MAX_ITERATIONS {
        let t = g(m as f64)?;
        if !t.is_finite() || t >= M_LIMIT {
            return Err(Error::Unsatisfiable);
        }
        let next = (t.ceil() as u64).max(1);
        if next <= m {
            return Ok(Prediction { m, iterations: it });
        }
        m = next;
    }
    Err(Error::Unsatisfiable)
}

pub fn check_conditions(
    params: &BoundParams,
    model: &ComplexityModel,
    incoherence: &Incoherence,
    m: u64,
) -> Result<ConditionCheck> {
    params.validate()?;
    let mf = m as f64;
    let e = exponent_e(params.p);
    let mpal = complexity_constant(
        model,
        params.p,
        params.block_dim,
        mf,
        &params.constants,
        params.type_constant,
    )?;
    let c = params.constants.c;
    Ok(ConditionCheck {
        lhs1: mf.powf(1.0 / params.p) / (1.0 + mf.ln()).powf(e / 2.0),
        rhs1: c * mpal * params.s.sqrt() * incoherence.alpha / params.delta,
        rhs2: c * params.s * (1.0 / params.zeta).ln() * incoherence.operator_norm.powi(2)
            / params.delta.powi(2),
        m,
    })
}

/// Smallest `m` satisfying both sufficient conditions of the general RIP
/// theorem.
pub fn predict_m(params: &BoundParams, model: &ComplexityModel, incoherence: &Incoherence) -> Result<Prediction> {
    params.validate()?;
    let p = params.p;
    let e = exponent_e(p);
    least_fixed_point(|m| {
        let chk = check_conditions(params, model, incoherence, m as u64)?;
        let first = (chk.rhs1 * (1.0 + m.ln()).powf(e / 2.0)).powf(p);
        Ok(first.max(chk.rhs2))
    })
}

/// Right-hand side of the polytope sample-size condition at `m`:
/// `c δ^{-2} s max((1+ln m)(1+ln md)²(1+ln M), ln ζ^{-1}) ‖u‖²`.
pub fn polytope_rhs(params: &BoundParams, atoms: u64, incoherence: f64, m: f64) -> f64 {
    let md = m * params.block_dim as f64;
    let structural = (1.0 + m.ln()) * (1.0 + md.ln()).powi(2) * (1.0 + (atoms as f64).ln());
    params.constants.c / params.delta.powi(2)
        * params.s
        * structural.max((1.0 / params.zeta).ln())
        * incoherence.powi(2)
}

pub fn polytope_m(params: &BoundParams, atoms: u64, incoherence: f64) -> Result<Prediction> {
    params.validate()?;
    require(atoms >= 1, || "M must be ≥ 1".into())?;
    least_fixed_point(|m| Ok(polytope_rhs(params, atoms, incoherence, m)))
}

/// `c δ^{-2} s (1+ln m)³ (1 + 3nd(1+ln d) + ln ζ^{-1})²`.
pub fn tensor_rhs(n: u64, d: u64, s: f64, delta: f64, zeta: f64, c: f64, m: f64) -> f64 {
    let inner = 1.0 + tensor_log_atoms(n, d) + (1.0 / zeta).ln();
    c / delta.powi(2) * s * (1.0 + m.ln()).powi(3) * inner.powi(2)
}

pub fn tensor_m(n: u64, d: u64, s: f64, delta: f64, zeta: f64, c: f64) -> Result<Prediction> {
    require(n >= 1 && d >= 1, || "n, d must be ≥ 1".into())?;
    require(s >= 1.0 && delta > 0.0 && zeta > 0.0 && zeta < 1.0 && c >= 0.0, || {
        "need s ≥ 1, δ > 0, 0 < ζ < 1, c ≥ 0".into()
    })?;
    least_fixed_point(|m| Ok(tensor_rhs(n, d, s, delta, zeta, c, m)))
}

/// `√(2(1 + 3nd(1+ln d) + ln ζ^{-1}))`, the Gaussian dual-norm threshold
/// exceeded with probability at most `ζ`.
pub fn gaussian_dual_norm_bound(n: u64, d: u64, zeta: f64) -> Result<f64> {
    require(n >= 1 && d >= 1, || "n, d must be ≥ 1".into())?;
    require(zeta > 0.0 && zeta < 1.0, || format!("ζ = {zeta} outside (0, 1)"))?;
    Ok((2.0 * (1.0 + tensor_log_atoms(n, d) + (1.0 / zeta).ln())).sqrt())
}

/// `⌈c δ^{-2} (nd(1+ln d) + ln ζ^{-1})⌉`, the Gaussian-operator baseline.
pub fn gordon_gaussian_m(n: u64, d: u64, delta: f64, zeta: f64, c: f64) -> Result<u64> {
    require(n >= 1 && d >= 1, || "n, d must be ≥ 1".into())?;
    require(delta > 0.0 && zeta > 0.0 && zeta < 1.0, || "need δ > 0, 0 < ζ < 1".into())?;
    let v = c / delta.powi(2) * (n as f64 * d as f64 * (1.0 + (d as f64).ln()) + (1.0 / zeta).ln());
    Ok(v.ceil().max(1.0) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maurey_collapses() {
        let v = maurey_bound(16, 1, 16, 1.0, 1.0).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        assert_eq!(
            maurey_bound(16, 3, 2, 2.0, 1.0).unwrap(),
            2.0 * maurey_bound(16, 3, 2, 1.0, 1.0).unwrap()
        );
        assert!(maurey_bound(4, 1, 5, 1.0, 1.0).is_err());
    }

    #[test]
    fn e21_collapses() {
        assert_eq!(e21_bound(1, 1, 1, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(e21_bound(9, 4, 2, 3.0, 1.0).unwrap(), 3.0 * e21_bound(9, 4, 2, 1.0, 1.0).unwrap());
    }

    #[test]
    fn complexity_edges() {
        let k = Constants::default();
        let l1 = complexity_constant(&ComplexityModel::CanonicalL1 { n: 1 }, 2.0, 3, 1.0, &k, None).unwrap();
        assert!((l1 - (1.0 + 3f64.ln())).abs() < 1e-15);
        let s1 = complexity_constant(&ComplexityModel::SchattenBall { n: 16, q: 1.0 }, 2.0, 1, 1.0, &k, None)
            .unwrap();
        assert!((s1 - (1.0 + 16f64.ln()).powf(1.5)).abs() < 1e-12);
        assert!(matches!(
            complexity_constant(&ComplexityModel::AtomicPolytope { atoms: 3 }, 1.5, 1, 1.0, &k, None),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn e_of_p() {
        assert_eq!(exponent_e(2.0), 3.0);
        assert_eq!(exponent_e(1.5), 1.0);
        assert!((c_of_p(1.5, 1.0).unwrap() - 1.0 / (0.5 - 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn huge_delta_gives_tiny_m() {
        let mut p = BoundParams::new(1.0, 1e12, 0.5);
        p.constants.c = 1.0;
        let pred = predict_m(&p, &ComplexityModel::CanonicalL1 { n: 64 }, &Incoherence::uniform(1.0)).unwrap();
        assert_eq!(pred.m, 1);
    }

    #[test]
    fn zero_constant_tensor() {
        assert_eq!(tensor_m(2, 3, 1.0, 0.5, 0.1, 0.0).unwrap().m, 1);
    }

    #[test]
    fn dual_type_p_less_than_two_terminates() {
        let mut p = BoundParams::new(2.0, 0.5, 0.1);
        p.p = 1.5;
        let pred = predict_m(&p, &ComplexityModel::DualType { type_constant: 1.0 }, &Incoherence::uniform(1.0))
            .unwrap();
        let chk = check_conditions(&p, &ComplexityModel::DualType { type_constant: 1.0 }, &Incoherence::uniform(1.0), pred.m)
            .unwrap();
        assert!(chk.holds());
    }

    #[test]
    fn gaussian_threshold_collapse() {
        let v = gaussian_dual_norm_bound(5, 1, (-1.0f64).exp()).unwrap();
        assert!((v - (2.0 * (2.0 + 15.0f64)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gordon_d1() {
        assert_eq!(gordon_gaussian_m(4, 1, 1.0, (-1.0f64).exp(), 1.0).unwrap(), 5);
    }
}
