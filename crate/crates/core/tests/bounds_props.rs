use proptest::prelude::*;

use rip_lab::bounds::{
    check_conditions, exponent_e, gaussian_dual_norm_bound, gordon_gaussian_m, polytope_m, predict_m, tensor_m,
    BoundParams, ComplexityModel, Incoherence,
};

fn models() -> Vec<ComplexityModel> {
    vec![
        ComplexityModel::CanonicalL1 { n: 64 },
        ComplexityModel::AtomicPolytope { atoms: 500 },
        ComplexityModel::SchattenBall { n: 8, q: 1.0 },
        ComplexityModel::SchattenBall { n: 8, q: 1.5 },
        ComplexityModel::TensorHull { n: 3, d: 2 },
        ComplexityModel::DualType { type_constant: 1.2 },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prediction_is_the_least_feasible_m(
        s in 1.0f64..8.0,
        delta in 0.2f64..0.95,
        zeta in 0.01f64..0.5,
        alpha in 0.5f64..3.0,
    ) {
        let params = BoundParams::new(s, delta, zeta);
        let inc = Incoherence { alpha, operator_norm: alpha };
        for model in models() {
            let pred = predict_m(&params, &model, &inc).unwrap();
            prop_assert!(pred.iterations <= 200, "{model:?}: {} iterations", pred.iterations);
            prop_assert!(check_conditions(&params, &model, &inc, pred.m).unwrap().holds());
            if pred.m > 1 {
                prop_assert!(!check_conditions(&params, &model, &inc, pred.m - 1).unwrap().holds());
            }
        }
    }

    #[test]
    fn general_prediction_is_monotone(
        s in 1.0f64..6.0,
        ds in 0.0f64..4.0,
        delta in 0.2f64..0.9,
        dd in 0.0f64..0.09,
        zeta in 0.02f64..0.5,
        dz in 0.0f64..0.4,
    ) {
        let inc = Incoherence::uniform(1.0);
        for model in models() {
            let base = predict_m(&BoundParams::new(s, delta, zeta), &model, &inc).unwrap().m;
            prop_assert!(predict_m(&BoundParams::new(s + ds, delta, zeta), &model, &inc).unwrap().m >= base);
            prop_assert!(predict_m(&BoundParams::new(s, delta + dd, zeta), &model, &inc).unwrap().m <= base);
            let z2 = (zeta + dz).min(0.99);
            prop_assert!(predict_m(&BoundParams::new(s, delta, z2), &model, &inc).unwrap().m <= base);
        }
    }

    #[test]
    fn specialized_predictions_are_monotone(
        n in 1u64..5,
        d in 1u64..4,
        s in 1.0f64..4.0,
        delta in 0.2f64..0.9,
        zeta in 0.01f64..0.5,
        atoms in 1u64..5000,
    ) {
        let t = tensor_m(n, d, s, delta, zeta, 1.0).unwrap();
        prop_assert!(t.iterations <= 200);
        prop_assert!(tensor_m(n + 1, d, s, delta, zeta, 1.0).unwrap().m >= t.m);
        prop_assert!(tensor_m(n, d + 1, s, delta, zeta, 1.0).unwrap().m >= t.m);
        prop_assert!(tensor_m(n, d, s * 1.5, delta, zeta, 1.0).unwrap().m >= t.m);
        prop_assert!(tensor_m(n, d, s, delta * 1.1, zeta, 1.0).unwrap().m <= t.m);

        let params = BoundParams::new(s, delta, zeta);
        let p = polytope_m(&params, atoms, 1.0).unwrap();
        prop_assert!(p.iterations <= 200);
        prop_assert!(polytope_m(&params, atoms * 2, 1.0).unwrap().m >= p.m);
        prop_assert!(polytope_m(&params, atoms, 1.3).unwrap().m >= p.m);

        let g = gordon_gaussian_m(n, d, delta, zeta, 1.0).unwrap();
        prop_assert!(gordon_gaussian_m(n + 1, d, delta, zeta, 1.0).unwrap() >= g);
        prop_assert!(gordon_gaussian_m(n, d, delta, zeta / 2.0, 1.0).unwrap() >= g);
        prop_assert!(gaussian_dual_norm_bound(n, d + 1, zeta).unwrap() > gaussian_dual_norm_bound(n, d, zeta).unwrap());
    }

    #[test]
    fn exponent_is_piecewise_constant(p in 1.0001f64..1.9999) {
        prop_assert_eq!(exponent_e(p), 1.0);
        prop_assert_eq!(exponent_e(2.0), 3.0);
    }
}
