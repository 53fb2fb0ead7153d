use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rip_lab::groups::{self, AveragingMode};
use rip_lab::linalg::CMatrix;
use rip_lab::sparsity::{Field, SparsityModel};
use rip_lab::{GroupDescriptor, SignalVector};

fn group_strategy() -> impl Strategy<Value = GroupDescriptor> {
    prop_oneof![
        (2usize..12).prop_map(GroupDescriptor::hw),
        (2usize..12).prop_map(GroupDescriptor::sign_shift),
        (1usize..5).prop_map(GroupDescriptor::pauli),
        Just("hw:3*ss:4".parse().unwrap()),
        Just("two-sided(pauli:2)".parse().unwrap()),
        Just("hw:2^3".parse().unwrap()),
    ]
}

fn diff(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn unitary_and_multiplicative(group in group_strategy(), seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let n = group.dim();
        let g = group.sample_haar(&mut r);
        let h = group.sample_haar(&mut r);
        let x = SignalVector::complex_gaussian(n, &mut r);
        let gx = group.apply(&g, x.entries()).unwrap();
        prop_assert!((rip_lab::signal::norm2(&gx) - x.norm2()).abs() <= 1e-12 * x.norm2());
        let lhs = group.apply(&g, &group.apply(&h, x.entries()).unwrap()).unwrap();
        let (gh, phase) = group.compose(&g, &h).unwrap();
        let rhs: Vec<_> = group.apply(&gh, x.entries()).unwrap().iter().map(|z| z * phase).collect();
        prop_assert!(diff(&lhs, &rhs) <= 1e-12 * x.norm2());
        prop_assert!((phase.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fast_action_matches_dense(group in group_strategy(), seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let n = group.dim();
        let g = group.sample_haar(&mut r);
        let x = SignalVector::complex_gaussian(n, &mut r);
        let dense = group.densify(&g).unwrap() * CMatrix::from_column_slice(n, 1, x.entries());
        prop_assert!(diff(&group.apply(&g, x.entries()).unwrap(), dense.as_slice()) <= 1e-12 * x.norm2());
        let adj = group.densify(&g).unwrap().adjoint() * CMatrix::from_column_slice(n, 1, x.entries());
        prop_assert!(diff(&group.adjoint_apply(&g, x.entries()).unwrap(), adj.as_slice()) <= 1e-12 * x.norm2());
    }

    #[test]
    fn l1_invariance(n in 2usize..16, shift in any::<bool>(), seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let group = if shift { GroupDescriptor::sign_shift(n) } else { GroupDescriptor::hw(n) };
        let model = SparsityModel::canonical(n);
        let x = SignalVector::complex_gaussian(n, &mut r);
        let gx = group.apply_signal(&group.sample_haar(&mut r), &x).unwrap();
        let (a, b) = (model.norm_x(&x).unwrap().upper(), model.norm_x(&gx).unwrap().upper());
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn schatten_invariance_under_two_sided_action(q in 1.0f64..=2.0, seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        for base in [GroupDescriptor::pauli(2), GroupDescriptor::hw(3)] {
            let group = GroupDescriptor::two_sided(base);
            let k = (group.dim() as f64).sqrt() as usize;
            let model = SparsityModel::schatten(k, q);
            let x = SignalVector::complex_gaussian(k * k, &mut r);
            let gx = group.apply_signal(&group.sample_haar(&mut r), &x).unwrap();
            let (a, b) = (model.norm_x(&x).unwrap().upper(), model.norm_x(&gx).unwrap().upper());
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
        }
    }

    #[test]
    fn tensor_invariance_under_hw_products(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let group: GroupDescriptor = "hw:3*hw:3".parse().unwrap();
        let model = SparsityModel::tensor(3, 2, Field::Complex);
        let x = SignalVector::complex_gaussian(9, &mut r);
        let gx = group.apply_signal(&group.sample_haar(&mut r), &x).unwrap();
        let (a, b) = (model.norm_x(&x).unwrap(), model.norm_x(&gx).unwrap());
        prop_assert!(a.is_exact() && b.is_exact());
        prop_assert!((a.upper() - b.upper()).abs() <= 1e-9 * (1.0 + a.upper()));
    }

    #[test]
    fn exact_isotropy(group in group_strategy(), seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let n = group.dim();
        let probe = CMatrix::from_vec(n, n, SignalVector::complex_gaussian(n * n, &mut r).into_entries());
        prop_assert!(groups::verify_isotropy(&group, AveragingMode::Exact, &probe).unwrap() <= 1e-10);
    }
}

#[test]
fn commutants_are_trivial_up_to_dimension_8() {
    let mut list = Vec::new();
    for n in 2..=8 {
        list.push(GroupDescriptor::hw(n));
        list.push(GroupDescriptor::sign_shift(n));
    }
    list.extend(["pauli:1", "pauli:2", "pauli:3", "hw:2*hw:2", "hw:2^3", "hw:2*ss:4"].iter().map(|s| s.parse().unwrap()));
    for g in list {
        assert_eq!(groups::commutant_dimension(&g).unwrap(), 1, "{g}");
    }
}
