use num_complex::Complex64;

use super::{GroupDescriptor, GroupElement};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::rng;

/// Largest group order summed term by term in exact mode.
pub const EXACT_ORDER_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AveragingMode {
    Exact,
    MonteCarlo { trials: usize, seed: u64 },
}

/// `σ(g)^* T σ(g)`.
pub fn conjugate(group: &GroupDescriptor, g: &GroupElement, t: &CMatrix) -> Result<CMatrix> {
    group.check_element(g)?;
    let n = group.dim();
    if t.nrows() != n || t.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: t.nrows(),
        });
    }
    Ok(conjugate_unchecked(group, g, t))
}

fn conjugate_unchecked(group: &GroupDescriptor, g: &GroupElement, t: &CMatrix) -> CMatrix {
    let n = t.nrows();
    let mut b = CMatrix::zeros(n, n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        group.apply_into(g, t.column(c).as_slice(), &mut buf, true);
        b.column_mut(c).copy_from_slice(&buf);
    }
    // (Bσ)^* = σ^* B^*, so row r of Bσ is conj(σ^* conj(B[r, :])).
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        for (c, v) in row.iter_mut().enumerate() {
            *v = b[(r, c)].conj();
        }
        group.apply_into(g, &row, &mut buf, true);
        for c in 0..n {
            out[(r, c)] = buf[c].conj();
        }
    }
    out
}

enum Stage {
    /// Average of conjugation over the listed elements of the full group.
    Enumerate(Vec<GroupElement>),
    /// Average over independent signs on one tensor axis: keeps entries
    /// whose row and column agree in that axis coordinate.
    Dephase { stride: usize, size: usize },
}

/// Factorized exact averaging plan; factors of a product commute, so the
/// full average is the composition of per-factor averages.
fn stages(group: &GroupDescriptor) -> Result<Vec<Stage>> {
    let mut out = Vec::new();
    collect_stages(group, 1, &mut |local: Vec<GroupElement>| local, &mut out)?;
    Ok(out)
}

fn collect_stages(
    factor: &GroupDescriptor,
    stride: usize,
    embed: &mut dyn FnMut(Vec<GroupElement>) -> Vec<GroupElement>,
    out: &mut Vec<Stage>,
) -> Result<()> {
    match factor {
        GroupDescriptor::HeisenbergWeyl { .. } | GroupDescriptor::PauliTensor { .. } => {
            out.push(Stage::Enumerate(embed(factor.elements(EXACT_ORDER_LIMIT)?)));
        }
        GroupDescriptor::SignShift { n } => {
            out.push(Stage::Dephase { stride, size: *n });
            let shifts = (0..*n)
                .map(|shift| GroupElement::SignShift {
                    signs: vec![1; *n],
                    shift,
                })
                .collect();
            out.push(Stage::Enumerate(embed(shifts)));
        }
        GroupDescriptor::ProductGroup { factors } => {
            let ids: Vec<GroupElement> = factors.iter().map(|f| f.identity()).collect();
            let mut inner_stride = factors.iter().map(|f| f.dim()).product::<usize>();
            for (i, f) in factors.iter().enumerate() {
                inner_stride /= f.dim();
                let ids_i = ids.clone();
                let mut local_embed = |local: Vec<GroupElement>| {
                    let wrapped = local
                        .into_iter()
                        .map(|g| {
                            let mut parts = ids_i.clone();
                            parts[i] = g;
                            GroupElement::Product { factors: parts }
                        })
                        .collect();
                    embed(wrapped)
                };
                collect_stages(f, stride * inner_stride, &mut local_embed, out)?;
            }
        }
    }
    Ok(())
}

/// `avg_g σ(g)^* T σ(g)` over the Haar measure.
///
/// Exact mode sums over all elements, except that sign groups are averaged
/// analytically (`E_ε D_ε T D_ε = diag T` per axis), so exactness holds at
/// any sign-shift dimension.
pub fn average_conjugation(
    group: &GroupDescriptor,
    t: &CMatrix,
    mode: AveragingMode,
) -> Result<CMatrix> {
    group.validate()?;
    let n = group.dim();
    if t.nrows() != n || t.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: t.nrows(),
        });
    }
    match mode {
        AveragingMode::Exact => {
            let plan = stages(group)?;
            let total: usize = plan
                .iter()
                .map(|s| match s {
                    Stage::Enumerate(e) => e.len(),
                    Stage::Dephase { .. } => 1,
                })
                .sum();
            if total as u128 > EXACT_ORDER_LIMIT {
                return Err(Error::SizeLimit(format!(
                    "exact averaging over {group} needs {total} terms"
                )));
            }
            let mut cur = t.clone();
            for stage in &plan {
                cur = match stage {
                    Stage::Enumerate(elems) => {
                        let mut acc = CMatrix::zeros(n, n);
                        for g in elems {
                            acc += conjugate_unchecked(group, g, &cur);
                        }
                        acc / Complex64::new(elems.len() as f64, 0.0)
                    }
                    Stage::Dephase { stride, size } => {
                        let mut m = cur;
                        for r in 0..n {
                            for c in 0..n {
                                if (r / stride) % size != (c / stride) % size {
                                    m[(r, c)] = Complex64::new(0.0, 0.0);
                                }
                            }
                        }
                        m
                    }
                };
            }
            Ok(cur)
        }
        AveragingMode::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::InvalidParameter("trials must be ≥ 1".into()));
            }
            let mut rng = rng::seeded(seed);
            let mut acc = CMatrix::zeros(n, n);
            for _ in 0..trials {
                let g = group.sample_haar(&mut rng);
                acc += conjugate_unchecked(group, &g, t);
            }
            Ok(acc / Complex64::new(trials as f64, 0.0))
        }
    }
}

/// `‖avg_g σ(g)^* T σ(g) − (tr T / N) Id‖_F`.
pub fn verify_isotropy(group: &GroupDescriptor, mode: AveragingMode, probe: &CMatrix) -> Result<f64> {
    let avg = average_conjugation(group, probe, mode)?;
    let n = group.dim();
    let target = linalg::identity(n) * (linalg::trace(probe) / n as f64);
    Ok(linalg::frobenius(&(avg - target)))
}

/// Dimension of `{T : σ(g) T = T σ(g) for all generators g}`, by brute force.
pub fn commutant_dimension(group: &GroupDescriptor) -> Result<usize> {
    group.validate()?;
    let n = group.dim();
    if n > 8 {
        return Err(Error::SizeLimit(format!(
            "commutant check limited to N ≤ 8, got {n}"
        )));
    }
    let gens = group.generators();
    let mut system = CMatrix::zeros(gens.len() * n * n, n * n);
    for (gi, g) in gens.iter().enumerate() {
        let s = group.densify(g)?;
        for r in 0..n {
            for c in 0..n {
                let unknown = r * n + c;
                // σ E_rc − E_rc σ
                for i in 0..n {
                    system[(gi * n * n + i * n + c, unknown)] += s[(i, r)];
                }
                for j in 0..n {
                    system[(gi * n * n + r * n + j, unknown)] -= s[(c, j)];
                }
            }
        }
    }
    Ok(linalg::nullity(&system, 1e-9))
}
