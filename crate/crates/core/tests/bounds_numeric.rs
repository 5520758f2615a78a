use hardcore::bounds::{
    self, alpha_beta, asymptotic_occupancy, chif_upper, local_min, occupancy_arguments, occupancy_lower_bound, solve_z,
    BoundInputs,
};
use hardcore::lambert::{lambert_w, lambert_w_of_exp, BRANCH_POINT};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn lambert_reference_values() {
    // Ω, W(1) = 0.5671432904097838
    assert!(rel(lambert_w(1.0).unwrap(), 0.567_143_290_409_783_8) < 1e-15);
    assert!(rel(lambert_w(std::f64::consts::E).unwrap(), 1.0) < 1e-15);
    assert!(rel(lambert_w(10.0).unwrap(), 1.745_528_002_740_699_4) < 1e-14);
    assert!(rel(lambert_w(-0.2).unwrap(), -0.259_171_101_819_073_8) < 1e-14);
    assert!((lambert_w(BRANCH_POINT).unwrap() + 1.0).abs() < 1e-7);
    assert!(lambert_w(-0.5).is_err());
    assert!(lambert_w(f64::NAN).is_err());
}

#[test]
fn lambert_of_exp_continues_past_overflow() {
    for t in [1.0, 50.0, 599.0, 601.0, 1e3, 1e5, 1e10] {
        let w = lambert_w_of_exp(t);
        assert!(rel(w + w.ln(), t) < 1e-13, "t = {t}");
    }
    let a = lambert_w_of_exp(599.999);
    let b = lambert_w_of_exp(600.001);
    assert!(a < b && b - a < 1e-2);
}

proptest! {
    #[test]
    fn lambert_defining_identity(log_x in -30.0f64..300.0) {
        let x = log_x.exp();
        let w = lambert_w(x).unwrap();
        prop_assert!(rel(w * w.exp(), x) < 1e-13);
        prop_assert!(rel((-w).exp(), w / x) < 1e-13);
    }

    #[test]
    fn lambert_negative_branch(x in BRANCH_POINT * 0.999_999..0.0) {
        let w = lambert_w(x).unwrap();
        prop_assert!(w >= -1.0 && w < 0.0);
        prop_assert!((w * w.exp() - x).abs() < 1e-14);
    }

    #[test]
    fn balance_point_is_the_min_max(delta in 1usize..200, t in 0.0f64..1.0, log_lambda in -4.0f64..4.0) {
        let d = delta as f64;
        let f = 1.0 + t * d * d;
        let lambda = log_lambda.exp();
        let sol = solve_z(delta, f, lambda).unwrap();
        let inputs = BoundInputs::new(delta, f, lambda).unwrap();
        let (first, second) = occupancy_arguments(&inputs, sol.z_star);
        // the two terms balance at z_star
        prop_assert!(rel(first, second) < 1e-9);
        prop_assert!(sol.sandwich.0 <= sol.y_star * (1.0 + 1e-12));
        prop_assert!(sol.y_star <= sol.sandwich.1 * (1.0 + 1e-12));
        let bound = occupancy_lower_bound(delta, f, lambda).unwrap();
        prop_assert!(rel(bound.value, first) < 1e-9);
        // any other z gives a larger max
        for k in [0.5, 0.9, 0.99, 1.01, 1.1, 2.0] {
            let (a, b) = occupancy_arguments(&inputs, sol.z_star * k);
            prop_assert!(a.max(b) >= bound.value * (1.0 - 1e-12));
        }
    }

    #[test]
    fn certificate_weights_touch_one(delta in 1usize..60, t in 0.0f64..1.0, log_lambda in -3.0f64..3.0) {
        let d = delta as f64;
        let f = 1.0 + t * d * d;
        let lambda = log_lambda.exp();
        let ab = alpha_beta(delta, f, lambda).unwrap();
        prop_assert!(rel(ab.alpha + ab.beta * d, ab.total) < 1e-12);
        prop_assert!(rel(ab.curve(ab.z_star), 1.0) < 1e-9);
        let (z_min, m) = local_min(delta, f, lambda, ab.alpha, ab.beta).unwrap();
        prop_assert!(rel(z_min, ab.z_star) < 1e-6);
        prop_assert!(rel(lambda / (1.0 + lambda) * m, 1.0) < 1e-9);
        for k in [0.25, 0.5, 2.0, 4.0] {
            prop_assert!(ab.curve(ab.z_star * k) >= 1.0 - 1e-12);
        }
    }
}

#[test]
fn f_equal_two_balances_at_delta() {
    for delta in [1usize, 2, 5, 17, 100, 1000] {
        for lambda in [0.01, 0.5, 1.0, 3.0, 100.0] {
            let sol = solve_z(delta, 2.0, lambda).unwrap();
            assert!(rel(sol.z_star, delta as f64) < 1e-12, "Δ = {delta}, λ = {lambda}");
        }
    }
}

#[test]
fn bound_sits_below_ceiling_and_asymptote() {
    for delta in [2usize, 5, 20, 100] {
        let d = delta as f64;
        for lambda in [0.05, 0.5, 1.0, 4.0] {
            let triangle_free = occupancy_lower_bound(delta, d * d + 1.0, lambda).unwrap().value;
            let crowded = occupancy_lower_bound(delta, 2.0, lambda).unwrap().value;
            let asym = asymptotic_occupancy(delta, lambda).unwrap();
            // more triangles, weaker bound; the finite-f bound never beats the limit
            assert!(crowded < triangle_free);
            assert!(triangle_free <= asym * (1.0 + 1e-12));
            assert!(triangle_free < lambda / (1.0 + lambda));
        }
    }
}

#[test]
fn input_validation() {
    assert!(BoundInputs::new(0, 2.0, 1.0).is_err());
    assert!(BoundInputs::new(3, 0.5, 1.0).is_err());
    assert!(BoundInputs::new(3, 11.0, 1.0).is_err());
    assert!(BoundInputs::new(3, 10.0, 0.0).is_err());
    assert!(BoundInputs::new(3, 10.0, f64::INFINITY).is_err());
    assert!(local_min(3, 10.0, 1.0, -1.0, 1.0).is_err());
    assert!(bounds::admissibility(3, 10.0, 1.0).is_ok());
}

#[test]
fn chif_upper_improves_along_the_sweep() {
    let ratios: Vec<f64> = [4.0, 6.0, 8.0, 10.0, 12.0]
        .iter()
        .map(|e: &f64| {
            let f = 10f64.powf(*e);
            chif_upper(f.sqrt().round() as usize, f, 0.1).unwrap().ratio
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
}
