use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rip_lab::nets::{
    admissible, admissible_epsilon, net_dual_norm, random_sphere_point, sphere_net, NetMode, TensorAtomSet,
};
use rip_lab::SignalVector;

fn real_signal(len: usize, seed: u64) -> SignalVector {
    SignalVector::real_gaussian(len, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn circle_nets_pack_and_cover(eps in 0.05f64..0.95, seed in any::<u64>()) {
        let net = sphere_net(2, eps, seed).unwrap();
        prop_assert!(net.separation() > eps);
        prop_assert!(net.max_norm_deviation() < 1e-12);
        prop_assert!(net.covering_radius_estimate(2000, seed) <= eps);
        prop_assert!((net.len() as f64) <= net.cardinality_bound());
    }

    #[test]
    fn rounding_mass_is_geometric(eps in 0.05f64..0.9, seed in any::<u64>()) {
        let net = sphere_net(2, eps, 1).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = random_sphere_point(2, &mut r).iter().map(|v| v * 0.999).collect();
        let ex = net.round_expand(&y, 1e-12, 500).unwrap();
        prop_assert!(ex.residual <= 1e-12);
        prop_assert!(ex.mass() <= 1.0 / (1.0 - eps) + 1e-12);
        let back = ex.evaluate(&net);
        prop_assert!(back.iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-11));
    }

    #[test]
    fn tensor_rounding_mass(d in 1usize..4, seed in any::<u64>()) {
        let eps = admissible_epsilon(d);
        prop_assert!(admissible(eps, d));
        let atoms = TensorAtomSet::new(sphere_net(2, eps, 0).unwrap(), d).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let factors: Vec<Vec<f64>> = (0..d).map(|_| random_sphere_point(2, &mut r)).collect();
        let ex = atoms.round_expand(&factors, 1e-10).unwrap();
        prop_assert!(ex.mass <= (1.0 / (1.0 - eps)).powi(d as i32) + 1e-9);
        prop_assert!(ex.mass <= atoms.expansion_factor());
        prop_assert!(ex.residual <= 1e-8);
    }

    #[test]
    fn enumeration_grows_under_refinement(seed in any::<u64>(), extra in 1usize..6) {
        let base = sphere_net(2, admissible_epsilon(2), 0).unwrap();
        let mut refined = base.clone();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        refined.points.extend((0..extra).map(|_| random_sphere_point(2, &mut r)));
        let coarse = TensorAtomSet::new(base, 2).unwrap();
        let fine = TensorAtomSet::new(refined, 2).unwrap();
        let xi = real_signal(4, seed);
        let a = net_dual_norm(&xi, &coarse, NetMode::Enumerate).unwrap();
        let b = net_dual_norm(&xi, &fine, NetMode::Enumerate).unwrap();
        prop_assert!(a.certified && b.certified);
        prop_assert!(a.value <= b.value + 1e-12);
    }

    #[test]
    fn order_one_matches_direct_max(seed in any::<u64>(), n in 1usize..4) {
        let net = sphere_net(n, admissible_epsilon(1), seed).unwrap();
        let want = net
            .points
            .iter()
            .map(|p| p.iter().zip(real_signal(n, seed).entries()).map(|(a, b)| a * b.re).sum::<f64>().abs())
            .fold(0.0, f64::max);
        let atoms = TensorAtomSet::new(net, 1).unwrap();
        let got = net_dual_norm(&real_signal(n, seed), &atoms, NetMode::Enumerate).unwrap();
        prop_assert!((got.max_correlation - want).abs() <= 1e-12 * (1.0 + want));
        prop_assert!((got.value - atoms.expansion_factor() * want).abs() <= 1e-12 * (1.0 + want));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn alternate_agrees_with_enumeration(seed in any::<u64>()) {
        let atoms = TensorAtomSet::new(sphere_net(2, admissible_epsilon(2), 0).unwrap(), 2).unwrap();
        let xi = real_signal(4, seed);
        let e = net_dual_norm(&xi, &atoms, NetMode::Enumerate).unwrap();
        let a = net_dual_norm(&xi, &atoms, NetMode::Alternate { restarts: 50 }).unwrap();
        prop_assert!((e.value - a.value).abs() <= 1e-6, "{} vs {}", e.value, a.value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn greedy_nets_pack(eps in 0.45f64..0.9, seed in any::<u64>()) {
        let net = sphere_net(3, eps, seed).unwrap();
        prop_assert!(net.separation() > eps);
        prop_assert!(net.max_norm_deviation() < 1e-12);
        prop_assert!((net.len() as f64) <= net.cardinality_bound());
    }
}

#[test]
fn greedy_net_covers_fresh_samples() {
    let net = sphere_net(3, 0.5, 11).unwrap();
    assert!(net.covering_radius_estimate(5000, 99) <= 0.5);
}
