mod common;

use common::glover_projection as projection;
use ddro::milp::MilpModel;
use ddro::reformulation::glover_linearize;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn auxiliary_equals_product_for_every_binary_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for case in 0..100 {
        let m: f64 = rng.gen_range(0.5..1e4);
        // include the interval ends every few cases
        let w = match case % 10 {
            0 => 0.0,
            1 => m,
            _ => rng.gen_range(0.0..=m),
        };
        for z in [0.0, 1.0] {
            let (lo, hi) = projection(w, z, m);
            let tol = 1e-7 * (1.0 + m);
            assert!((lo - w * z).abs() <= tol, "case {case}: w={w} z={z} M={m} min {lo}");
            assert!((hi - w * z).abs() <= tol, "case {case}: w={w} z={z} M={m} max {hi}");
        }
    }
}

#[test]
fn documented_values() {
    assert_eq!(projection(3.5, 1.0, 10.0), (3.5, 3.5));
    assert_eq!(projection(3.5, 0.0, 10.0), (0.0, 0.0));
}

#[test]
fn unbounded_or_non_binary_factor_rejected() {
    let mut model = MilpModel::new("g");
    let w = model.continuous("w", 0.0, f64::INFINITY);
    let z = model.binary("z");
    assert!(glover_linearize(&mut model, w, z, 10.0, "v").is_err());
    let w2 = model.continuous("w2", 0.0, 5.0);
    let c = model.continuous("c", 0.0, 1.0);
    assert!(glover_linearize(&mut model, w2, c, 10.0, "v2").is_err());
}
