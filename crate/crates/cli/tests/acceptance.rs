//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use rip_lab::bounds::{self, BoundParams, ComplexityModel, Incoherence};
use rip_lab::groups::{self, AveragingMode};
use rip_lab::harness;
use rip_lab::linalg::CMatrix;
use rip_lab::measurement::{Instrument, MeasurementOperator, SensingOperator};
use rip_lab::nets::{self, TensorAtomSet};
use rip_lab::rip::{self, Estimator, OperatorFamily, ScalingConfig};
use rip_lab::sparsity::tensor::Field;
use rip_lab::{GroupDescriptor, GroupElement, SparsityModel};

type Rng64 = rand::rngs::StdRng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn gaussian_vec(n: usize, rng: &mut Rng64) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// Independent dense constructions of the group actions.

fn hw_matrix(n: usize, l: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    for r in 0..n {
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * ((l * r) % n) as f64 / n as f64);
        m[(r, (r + n - k) % n)] = w;
    }
    m
}

fn ss_matrix(signs: &[i8], k: usize) -> CMatrix {
    let n = signs.len();
    let mut m = CMatrix::zeros(n, n);
    for r in 0..n {
        m[(r, (r + n - k) % n)] = c(signs[r] as f64);
    }
    m
}

fn pauli_matrix(q: usize, x: u64, z: u64) -> CMatrix {
    let n = 1usize << q;
    let mut m = CMatrix::zeros(n, n);
    for r in 0..n {
        let sign = if ((r as u64) & z).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        m[(r, r ^ x as usize)] = c(sign);
    }
    m
}

fn oracle_matrix(group: &GroupDescriptor, g: &GroupElement) -> CMatrix {
    match (group, g) {
        (GroupDescriptor::HeisenbergWeyl { n }, GroupElement::HeisenbergWeyl { l, k }) => hw_matrix(*n, *l, *k),
        (GroupDescriptor::SignShift { .. }, GroupElement::SignShift { signs, shift }) => ss_matrix(signs, *shift),
        (GroupDescriptor::PauliTensor { k }, GroupElement::Pauli { x, z }) => pauli_matrix(*k, *x, *z),
        (GroupDescriptor::ProductGroup { factors }, GroupElement::Product { factors: es }) => factors
            .iter()
            .zip(es)
            .map(|(f, e)| oracle_matrix(f, e))
            .reduce(|a, b| a.kronecker(&b))
            .expect("nonempty product"),
        _ => panic!("element does not match group"),
    }
}

fn probe(n: usize, rng: &mut Rng64) -> CMatrix {
    CMatrix::from_vec(n, n, gaussian_vec(n * n, rng))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut list: Vec<GroupDescriptor> = Vec::new();
    for n in 2..=8 {
        list.push(GroupDescriptor::hw(n));
    }
    for n in 2..=8 {
        list.push(GroupDescriptor::sign_shift(n));
    }
    list.push(GroupDescriptor::pauli(1));
    list.push(GroupDescriptor::pauli(2));
    list.push(GroupDescriptor::two_sided(GroupDescriptor::pauli(2)));
    list.push("hw:2*hw:2*hw:2".parse().unwrap());
    let mut rng = Rng64::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut worst_group = String::new();
    for g in &list {
        let n = g.dim();
        for _ in 0..20 {
            let t = probe(n, &mut rng);
            let avg = groups::average_conjugation(g, &t, AveragingMode::Exact).unwrap();
            let target = CMatrix::identity(n, n) * (t.trace() / n as f64);
            let dev = (avg - target).norm();
            if dev > worst {
                worst = dev;
                worst_group = g.to_string();
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-10 && elapsed < Duration::from_secs(10),
        format!(
            "isotropy over {} groups x 20 probes: max Frobenius deviation {worst:.2e} ({worst_group}), {:.2}s",
            list.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Outcome {
    let laws: Vec<GroupDescriptor> = [
        "hw:5",
        "hw:8",
        "ss:6",
        "pauli:3",
        "hw:2*hw:2*hw:2",
        "ss:4*hw:3",
        "two-sided(pauli:2)",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect();
    let mut rng = Rng64::seed_from_u64(2);
    let (mut unit, mut adj, mut mult) = (0.0f64, 0.0f64, 0.0f64);
    for grp in &laws {
        let n = grp.dim();
        for _ in 0..1000 {
            let g = grp.sample_haar(&mut rng);
            let h = grp.sample_haar(&mut rng);
            let x = gaussian_vec(n, &mut rng);
            let nx = norm(&x);
            let gx = grp.apply(&g, &x).unwrap();
            unit = unit.max((norm(&gx) - nx).abs() / nx);
            adj = adj.max(max_diff(&grp.adjoint_apply(&g, &gx).unwrap(), &x) / nx);
            let ghx = grp.apply(&g, &grp.apply(&h, &x).unwrap()).unwrap();
            let (gh, phase) = grp.compose(&g, &h).unwrap();
            let rhs: Vec<Complex64> = grp.apply(&gh, &x).unwrap().iter().map(|z| z * phase).collect();
            mult = mult.max(max_diff(&ghx, &rhs) / nx);
        }
    }
    let dense: Vec<GroupDescriptor> = ["hw:64", "ss:64", "pauli:6", "hw:8*hw:8", "two-sided(pauli:2)", "ss:4*hw:4*pauli:1"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let mut fast = 0.0f64;
    for grp in &dense {
        let n = grp.dim();
        for _ in 0..50 {
            let g = grp.sample_haar(&mut rng);
            let x = gaussian_vec(n, &mut rng);
            let m = oracle_matrix(grp, &g);
            let want = &m * CMatrix::from_column_slice(n, 1, &x);
            let lib = grp.densify(&g).unwrap();
            fast = fast.max((&lib - &m).norm());
            fast = fast.max(max_diff(&grp.apply(&g, &x).unwrap(), want.as_slice()) / norm(&x));
        }
    }
    let tol = 1e-12;
    outcome(
        unit <= tol && adj <= tol && mult <= tol && fast <= tol,
        format!(
            "unitarity {unit:.1e}, adjoint {adj:.1e}, phase-tracked multiplicativity {mult:.1e} on 7x1000 triples; fast vs dense {fast:.1e} at N <= 64"
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = Rng64::seed_from_u64(3);
    let mut planner = FftPlanner::<f64>::new();
    let mut fft_dev = 0.0f64;
    for &n in &[8usize, 16, 31, 64] {
        let grp = GroupDescriptor::hw(n);
        let m = 24;
        let op = MeasurementOperator::draw(grp, Instrument::all_ones(n), m, &mut rng).unwrap();
        let fft = planner.plan_fft_forward(n);
        for _ in 0..10 {
            let x = gaussian_vec(n, &mut rng);
            let mut spec = x.clone();
            fft.process(&mut spec);
            let y = op.apply(&x).unwrap();
            for (j, g) in op.elements().iter().enumerate() {
                let GroupElement::HeisenbergWeyl { l, .. } = g else { unreachable!() };
                let want = spec[(n - l) % n].norm();
                fft_dev = fft_dev.max(((m as f64).sqrt() * y[j].norm() - want).abs());
            }
        }
    }
    let mut rip_dev = 0.0f64;
    for &n in &[8usize, 16, 64] {
        let elems = (0..n).map(|l| GroupElement::HeisenbergWeyl { l, k: 0 }).collect();
        let op = MeasurementOperator::from_elements(GroupDescriptor::hw(n), Instrument::all_ones(n), elems).unwrap();
        let a = op.to_dense();
        let smax = if n == 64 { 3 } else { 4 };
        for s in 1..=smax {
            rip_dev = rip_dev.max(rip::exact_canonical_rip(&a, s).unwrap().delta);
        }
    }
    outcome(
        fft_dev <= 1e-10 && rip_dev <= 1e-10,
        format!("|measurement| vs |FFT| max gap {fft_dev:.1e}; full modulation sampling exact delta {rip_dev:.1e}"),
    )
}

/// Exact canonical RIP deviation by sweeping all supports with nalgebra's
/// Hermitian eigensolver.
fn eigen_sweep(a: &CMatrix, s: usize) -> f64 {
    let n = a.ncols();
    let gram = a.adjoint() * a;
    let mut best = 0.0f64;
    let mut idx: Vec<usize> = (0..s).collect();
    loop {
        let sub = DMatrix::from_fn(s, s, |i, j| gram[(idx[i], idx[j])] - if i == j { c(1.0) } else { c(0.0) });
        let eig = SymmetricEigen::new(sub).eigenvalues;
        best = best.max(eig.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let mut i = s;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < n - s + i {
                idx[i] += 1;
                for j in i + 1..s {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn criterion_4() -> Outcome {
    let (n, s, m, budget) = (8usize, 2usize, 4usize, 64usize);
    let model = SparsityModel::canonical(n);
    let mut mc_le_ascent = 0;
    let mut bounded = true;
    let mut oracle_gap = 0.0f64;
    for i in 0..50u64 {
        let ins = Instrument::gaussian(n, 1000 + i, false).unwrap();
        let op = MeasurementOperator::draw(GroupDescriptor::hw(n), ins, m, &mut Rng64::seed_from_u64(i)).unwrap();
        let a = op.to_dense();
        let exact = rip::exact_canonical_rip(&a, s).unwrap().delta;
        let mc = rip::monte_carlo_rip(&op, &model, s as f64, budget, 77 + i, None).unwrap().delta;
        let asc = rip::ascent_rip(&op, &model, s as f64, budget, 30, 77 + i, None).unwrap().delta;
        if mc <= asc + 1e-9 {
            mc_le_ascent += 1;
        }
        bounded &= mc <= exact + 1e-9 && asc <= exact + 1e-9;
        oracle_gap = oracle_gap.max((exact - eigen_sweep(&a, s)).abs());
        oracle_gap = oracle_gap.max((rip::exact_canonical_rip(&a, 3).unwrap().delta - eigen_sweep(&a, 3)).abs());
    }
    outcome(
        mc_le_ascent >= 45 && bounded && oracle_gap <= 1e-12,
        format!(
            "MC <= ascent in {mc_le_ascent}/50; both <= exact: {bounded}; exact vs eigen sweep gap {oracle_gap:.1e}"
        ),
    )
}

fn scaling(config: &ScalingConfig) -> Vec<rip::ScalingRow> {
    harness::with_threads(1, || rip::scaling_experiment(config)).unwrap().unwrap()
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let cfg = ScalingConfig {
        group: GroupDescriptor::hw(64),
        instrument: Instrument::GaussianRow {
            seed: 5,
            real: false,
            eta: None,
        },
        model: SparsityModel::canonical(64),
        s_list: vec![1.0, 2.0, 4.0],
        m_list: vec![8, 16, 32, 64],
        redraws: 20,
        estimator: Estimator::Exact,
        seed: 2024,
        operator: OperatorFamily::Group,
    };
    let rows = scaling(&cfg);
    let elapsed = start.elapsed();
    let med = |si: usize, mi: usize| rows[si * 4 + mi].delta_median;
    let dec_m = (0..3).all(|si| (0..3).all(|mi| med(si, mi) > med(si, mi + 1)));
    let inc_s = (0..4).all(|mi| (0..2).all(|si| med(si, mi) < med(si + 1, mi)));
    let table: Vec<String> = (0..3)
        .map(|si| {
            let v: Vec<String> = (0..4).map(|mi| format!("{:.3}", med(si, mi))).collect();
            format!("s={}: {}", cfg.s_list[si], v.join(" "))
        })
        .collect();
    outcome(
        dec_m && inc_s && elapsed < Duration::from_secs(300),
        format!(
            "decreasing in m: {dec_m}, increasing in s: {inc_s}, {:.1}s single-threaded; medians [{}]",
            elapsed.as_secs_f64(),
            table.join("; ")
        ),
    )
}

fn criterion_6() -> Outcome {
    let d = 2;
    let eps = nets::admissible_epsilon(d);
    let net = nets::sphere_net(2, eps, 6).unwrap();
    let mut rng = Rng64::seed_from_u64(6);
    let mut radius = 0.0f64;
    for _ in 0..100_000 {
        let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        let h = a.hypot(b);
        let (u, v) = (a / h, b / h);
        let near = net
            .points
            .iter()
            .map(|p| ((p[0] - u).powi(2) + (p[1] - v).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        radius = radius.max(near);
    }
    let atoms = TensorAtomSet::new(net.clone(), d).unwrap();
    let log_m = d as f64 * (net.len() as f64).ln();
    let log_bound = 3.0 * 2.0 * d as f64 * (1.0 + (d as f64).ln());
    let mut worst_ratio = 0.0f64;
    let mut worst_residual = 0.0f64;
    for (order, e) in [(2usize, eps), (3, nets::admissible_epsilon(3))] {
        let set = if order == d {
            atoms.clone()
        } else {
            TensorAtomSet::new(nets::sphere_net(2, e, 6).unwrap(), order).unwrap()
        };
        let cap = (1.0 + 3.0 * e).powi(order as i32);
        for i in 0..1000u64 {
            let factors: Vec<Vec<f64>> = (0..order)
                .map(|l| nets::random_ball_point(2, 60 + order as u64, i * 8 + l as u64))
                .collect();
            let ex = set.round_expand(&factors, 1e-13).unwrap();
            worst_ratio = worst_ratio.max(ex.mass / cap);
            worst_residual = worst_residual.max(ex.residual);
        }
        assert!(cap <= std::f64::consts::E);
    }
    outcome(
        radius <= eps && log_m <= log_bound && worst_ratio <= 1.0 && worst_residual <= 1e-10,
        format!(
            "|net| = {}, covering radius {radius:.4} <= eps {eps:.4} on 1e5 points; ln|D|^d = {log_m:.2} <= {log_bound:.2}; mass/(1+3eps)^d <= {worst_ratio:.3} over 2x1000 reconstructions",
            net.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let net = nets::sphere_net(2, nets::admissible_epsilon(2), 7).unwrap();
    let atoms = TensorAtomSet::new(net, 2).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for zeta in [0.5, 0.1] {
        let rep = nets::gaussian_dual_tail_experiment(&atoms, 400, zeta, 700).unwrap();
        let limit = zeta + 3.0 * (zeta * (1.0 - zeta) / 400.0).sqrt();
        pass &= rep.deflated_rate <= limit;
        parts.push(format!(
            "zeta={zeta}: threshold {:.3}, deflated {:.4} <= {limit:.4}, raw {:.4}, fitted c {:.3}",
            rep.threshold, rep.deflated_rate, rep.raw_rate, rep.fitted_c
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let base = ScalingConfig {
        group: "hw:2*hw:2*hw:2".parse().unwrap(),
        instrument: Instrument::GaussianRow {
            seed: 8,
            real: true,
            eta: None,
        },
        model: SparsityModel::tensor(2, 3, Field::Real),
        s_list: vec![1.0],
        m_list: vec![8, 16, 32, 64],
        redraws: 20,
        estimator: Estimator::MonteCarlo { trials: 1000 },
        seed: 88,
        operator: OperatorFamily::Group,
    };
    let gaussian = ScalingConfig {
        operator: OperatorFamily::RealGaussian,
        ..base.clone()
    };
    let grp = harness::with_threads(4, || rip::scaling_experiment(&base)).unwrap().unwrap();
    let gau = harness::with_threads(4, || rip::scaling_experiment(&gaussian)).unwrap().unwrap();
    let elapsed = start.elapsed();
    let ok = grp.iter().zip(&gau).all(|(g, a)| a.delta_median <= g.delta_median);
    let cells: Vec<String> = grp
        .iter()
        .zip(&gau)
        .map(|(g, a)| format!("m={}: gaussian {:.3} vs group {:.3}", g.m, a.delta_median, g.delta_median))
        .collect();
    outcome(
        ok && elapsed < Duration::from_secs(600),
        format!("{}; {:.1}s", cells.join(", "), elapsed.as_secs_f64()),
    )
}

fn criterion_9() -> Outcome {
    let mut failures = Vec::new();
    let inc = Incoherence::uniform(1.0);
    let models = [
        ComplexityModel::CanonicalL1 { n: 64 },
        ComplexityModel::AtomicPolytope { atoms: 500 },
        ComplexityModel::SchattenBall { n: 8, q: 1.0 },
        ComplexityModel::SchattenBall { n: 8, q: 1.5 },
        ComplexityModel::TensorHull { n: 2, d: 3 },
        ComplexityModel::DualType { type_constant: 1.2 },
    ];
    let mut checked = 0;
    // Re-substitution and minimality.
    for model in &models {
        for &(s, delta, zeta, p) in &[(1.0, 0.5, 0.1, 2.0), (3.0, 0.2, 0.01, 2.0), (2.0, 0.7, 0.3, 1.5)] {
            if p < 2.0 && !matches!(model, ComplexityModel::DualType { .. }) {
                continue;
            }
            let mut prm = BoundParams::new(s, delta, zeta);
            prm.p = p;
            let pred = bounds::predict_m(&prm, model, &inc).unwrap();
            let ok = bounds::check_conditions(&prm, model, &inc, pred.m).unwrap().holds();
            let minimal = pred.m == 1 || !bounds::check_conditions(&prm, model, &inc, pred.m - 1).unwrap().holds();
            checked += 1;
            if !ok || !minimal {
                failures.push(format!("predict_m {model:?} s={s} delta={delta}"));
            }
        }
    }
    for &(n, d, s, delta, zeta) in &[(2, 3, 1.0, 0.5, 0.1), (2, 2, 2.0, 0.3, 0.05), (3, 1, 1.0, 0.9, 0.5)] {
        let m = bounds::tensor_m(n, d, s, delta, zeta, 1.0).unwrap().m;
        let rhs = |m: u64| bounds::tensor_rhs(n, d, s, delta, zeta, 1.0, m as f64);
        checked += 1;
        if (m as f64) < rhs(m) || (m > 1 && ((m - 1) as f64) >= rhs(m - 1)) {
            failures.push(format!("tensor_m n={n} d={d}"));
        }
    }
    // Monotonicity over (s, δ, ζ, M).
    let pm = |s: f64, delta: f64, zeta: f64, atoms: u64| {
        bounds::predict_m(&BoundParams::new(s, delta, zeta), &ComplexityModel::AtomicPolytope { atoms }, &inc)
            .unwrap()
            .m
    };
    let grid_s = [1.0, 2.0, 4.0, 8.0];
    let grid_d = [0.9, 0.5, 0.3, 0.1];
    let grid_z = [0.5, 0.1, 0.01, 0.001];
    let grid_m = [2u64, 16, 256, 4096];
    let mut mono = true;
    for w in grid_s.windows(2) {
        mono &= pm(w[0], 0.5, 0.1, 16) <= pm(w[1], 0.5, 0.1, 16);
        mono &= bounds::tensor_m(2, 2, w[0], 0.5, 0.1, 1.0).unwrap().m <= bounds::tensor_m(2, 2, w[1], 0.5, 0.1, 1.0).unwrap().m;
    }
    for w in grid_d.windows(2) {
        mono &= pm(2.0, w[0], 0.1, 16) <= pm(2.0, w[1], 0.1, 16);
    }
    for w in grid_z.windows(2) {
        mono &= pm(2.0, 0.5, w[0], 16) <= pm(2.0, 0.5, w[1], 16);
        mono &= bounds::tensor_m(2, 2, 1.0, 0.5, w[0], 1.0).unwrap().m <= bounds::tensor_m(2, 2, 1.0, 0.5, w[1], 1.0).unwrap().m;
    }
    for w in grid_m.windows(2) {
        mono &= pm(2.0, 0.5, 0.1, w[0]) <= pm(2.0, 0.5, 0.1, w[1]);
    }
    if !mono {
        failures.push("monotonicity".into());
    }
    // Hand evaluations (least m with m ≥ rhs(m), computed by integer
    // bisection at 50-digit precision).
    let poly_hand = [
        ((1.0, 0.5, 0.1, 100u64, 1u64, 1.0), 33_346u64),
        ((4.0, 0.25, 0.01, 1000, 2, 1.5), 5_589_993),
        ((2.0, 0.9, 0.5, 10, 1, 1.0), 8_177),
    ];
    for ((s, delta, zeta, atoms, bd, u), want) in poly_hand {
        let mut prm = BoundParams::new(s, delta, zeta);
        prm.block_dim = bd;
        let got = bounds::polytope_m(&prm, atoms, u).unwrap().m;
        if got != want {
            failures.push(format!("polytope hand value {want} vs {got}"));
        }
    }
    let tensor_hand = [
        ((2u64, 3u64, 1.0, 0.5, 0.1), 43_320_970u64),
        ((2, 2, 2.0, 0.3, 0.05), 95_546_775),
        ((3, 1, 1.0, 0.9, 0.5), 373_463),
    ];
    for ((n, d, s, delta, zeta), want) in tensor_hand {
        let got = bounds::tensor_m(n, d, s, delta, zeta, 1.0).unwrap().m;
        if got != want {
            failures.push(format!("tensor hand value {want} vs {got}"));
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{checked} re-substitutions, monotonicity grid and 6 hand evaluations agree")
        } else {
            failures.join("; ")
        },
    )
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_rip-lab");
    let configs = [
        r#"{"id": "exact", "model": {"kind": "canonical_l1", "n": 16}, "group": "hw:16",
            "instrument": {"kind": "gaussian", "seed": 4}, "s_list": [1, 2, 3], "m_list": [4, 8, 16],
            "estimator": {"kind": "exact"}, "redraws": 6, "seed": 10}"#,
        r#"{"id": "mc", "model": {"kind": "tensor_hull", "n": 2, "d": 3, "field": "real"}, "group": "hw:2^3",
            "instrument": {"kind": "gaussian", "seed": 4, "real": true}, "s_list": [1, 1.5], "m_list": [8, 16],
            "estimator": {"kind": "monte_carlo", "trials": 300}, "redraws": 5, "seed": 11}"#,
        r#"{"id": "ascent", "model": {"kind": "schatten_ball", "n": 4, "q": 1}, "group": "two-sided(pauli:2)",
            "instrument": {"kind": "all_ones"}, "s_list": [1, 2], "m_list": [8, 32],
            "estimator": {"kind": "ascent", "restarts": 20, "steps": 15}, "redraws": 4, "seed": 12}"#,
    ];
    let mut details = Vec::new();
    let mut pass = true;
    for (i, cfg) in configs.iter().enumerate() {
        let path = dir.path().join(format!("cfg{i}.json"));
        std::fs::write(&path, cfg).unwrap();
        let mut outputs = Vec::new();
        for (run, threads) in [(0, "1"), (1, "1"), (2, "8"), (3, "8")] {
            let out = dir.path().join(format!("out{i}_{run}.csv"));
            let status = Command::new(bin)
                .args(["--threads", threads, "rip", "scaling", "--config"])
                .arg(&path)
                .arg("--out")
                .arg(&out)
                .status()
                .unwrap();
            pass &= status.success();
            outputs.push(std::fs::read(&out).unwrap_or_default());
        }
        let same = !outputs[0].is_empty() && outputs.iter().all(|o| o == &outputs[0]);
        pass &= same;
        details.push(format!(
            "{}: {} rows identical={same}",
            ["exact", "mc", "ascent"][i],
            String::from_utf8_lossy(&outputs[0]).lines().count().saturating_sub(1)
        ));
    }
    outcome(pass, format!("CLI reruns at 1 and 8 threads: {}", details.join(", ")))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("isotropy", criterion_1),
        ("representation laws", criterion_2),
        ("partial Fourier reduction", criterion_3),
        ("estimator ordering", criterion_4),
        ("scaling trend", criterion_5),
        ("net machinery", criterion_6),
        ("Gaussian dual-norm tail", criterion_7),
        ("tensor comparison", criterion_8),
        ("bounds calculator", criterion_9),
        ("determinism", criterion_10),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let res = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !res.pass {
            failed += 1;
        }
        println!(
            "acceptance {:>2} {:<26} {}  {}",
            i + 1,
            name,
            if res.pass { "PASS" } else { "FAIL" },
            res.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
