mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riemflow::curvature::{hessian_bound_check, CurvatureProfile};
use riemflow::{Flat, Hemisphere, Manifold, Spd};

fn check(m: &dyn Manifold, k_min: f64, diameter: f64, seed: u64) -> riemflow::curvature::HessianReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (_, k_max) = m.curvature_bounds();
    let profile = CurvatureProfile::new(k_min, k_max, diameter).unwrap();
    let z = m.random_point(&mut rng);
    hessian_bound_check(m, &z, 64, &profile, &mut rng).unwrap()
}

#[test]
fn sandwich_holds_on_every_manifold() {
    let cases: Vec<(Box<dyn Manifold>, f64)> = vec![
        (Box::new(Hemisphere::new(5)), 1.4),
        (Box::new(Spd::new(4)), 3.0),
        (Box::new(Flat::new(4)), 5.0),
    ];
    for (m, d) in cases {
        let (k_min, _) = m.curvature_bounds();
        for seed in 0..3 {
            let r = check(m.as_ref(), k_min, d, seed);
            assert!(r.samples.len() >= 50);
            assert!(
                r.passed(),
                "{}: {} violations, margins {:e} / {:e}",
                m.name(),
                r.violations,
                r.worst_lower_margin,
                r.worst_upper_margin
            );
        }
    }
}

#[test]
fn flat_sandwich_is_tight() {
    let r = check(&Flat::new(3), 0.0, 2.0, 9);
    for s in &r.samples {
        assert!((s.middle - s.speed_sq).abs() < 1e-6 * s.speed_sq);
    }
}

#[test]
fn spd_needs_its_true_curvature_bound() {
    // The affine-invariant cone has sectional curvature down to -1/2; the
    // milder K_min = -0.1 understates the distance Hessian already at d ~ 0.5.
    let mild = check(&Spd::new(4), -0.1, 0.5, 4);
    assert!(mild.worst_upper_margin < -1e-4, "upper margin {:e}", mild.worst_upper_margin);
    let tight = check(&Spd::new(4), -0.5, 0.5, 4);
    assert!(tight.passed(), "margins {:e} / {:e}", tight.worst_lower_margin, tight.worst_upper_margin);
}
