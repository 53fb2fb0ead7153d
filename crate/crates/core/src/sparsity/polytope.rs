//! Gauge of an absolute convex hull of finitely many atoms, by linear
//! programming over the combination coefficients.

use std::f64::consts::PI;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::SignalVector;

/// Directions used to approximate `|c|` for complex coefficients.
pub const POLYGON_SIDES: usize = 64;

pub enum Gauge {
    Exact(f64),
    /// `lower ≤ ‖x‖ ≤ upper`.
    Bracket(f64, f64),
    Infinite,
}

/// `inf { Σ|c_j| : x = Σ c_j a_j }`.
///
/// With real atoms and real `x` the real LP is exact. Otherwise each `c_j`
/// is written as a nonnegative combination of the `POLYGON_SIDES`-th roots
/// of unity, which overestimates `|c_j|` by at most `1 / cos(π / sides)`.
pub fn gauge(atoms: &[SignalVector], x: &SignalVector) -> Result<Gauge> {
    let real = x.is_real() && atoms.iter().all(|a| a.is_real());
    let dirs: Vec<Complex64> = if real {
        vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]
    } else {
        (0..POLYGON_SIDES)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / POLYGON_SIDES as f64))
            .collect()
    };

    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Vec<minilp::Variable>> = atoms
        .iter()
        .map(|_| dirs.iter().map(|_| lp.add_var(1.0, (0.0, f64::INFINITY))).collect())
        .collect();

    for i in 0..x.len() {
        let mut re_row = Vec::new();
        let mut im_row = Vec::new();
        for (a, vs) in atoms.iter().zip(&vars) {
            let ai = a.entries()[i];
            if ai == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (w, v) in dirs.iter().zip(vs) {
                let z = w * ai;
                if z.re != 0.0 {
                    re_row.push((*v, z.re));
                }
                if z.im != 0.0 {
                    im_row.push((*v, z.im));
                }
            }
        }
        let xi = x.entries()[i];
        for (row, rhs) in [(re_row, xi.re), (im_row, xi.im)] {
            if row.is_empty() {
                if rhs != 0.0 {
                    return Ok(Gauge::Infinite);
                }
                continue;
            }
            lp.add_constraint(&row, ComparisonOp::Eq, rhs);
        }
    }

    match lp.solve() {
        Ok(sol) => {
            let v = sol.objective().max(0.0);
            if real {
                Ok(Gauge::Exact(v))
            } else {
                Ok(Gauge::Bracket(v * (PI / POLYGON_SIDES as f64).cos(), v))
            }
        }
        Err(minilp::Error::Infeasible) => Ok(Gauge::Infinite),
        Err(e) => Err(Error::LinearProgram(e.to_string())),
    }
}
