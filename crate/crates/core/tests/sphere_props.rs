mod common;

use std::f64::consts::{PI, TAU};

use hcsdr::sphere::canonicalize;
use hcsdr::{from_angles, to_angles, SeedSpec, SphereAngles, UnitDirection};
use proptest::prelude::*;

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn in_canonical_range(phi: &SphereAngles) -> bool {
    let k = phi.0.len();
    phi.0[..k - 1].iter().all(|t| (0.0..=PI).contains(t)) && (0.0..TAU).contains(&phi.0[k - 1])
}

#[test]
fn round_trip_over_4000_gaussian_directions() {
    let mut rng = SeedSpec::new(11, 0).rng();
    let mut worst = 0.0f64;
    for &p in &[2usize, 3, 5, 10] {
        for _ in 0..1000 {
            let a = UnitDirection::new(common::gaussian_vec(p, &mut rng)).unwrap();
            let phi = to_angles(&a);
            assert!(in_canonical_range(&phi), "{phi:?}");
            worst = worst.max(max_abs_diff(from_angles(&phi).as_slice(), a.as_slice()));
        }
    }
    assert!(worst <= 1e-10, "worst round-trip error {worst:e}");
}

fn direction(max_p: usize) -> impl Strategy<Value = UnitDirection> {
    (2..=max_p)
        .prop_flat_map(|p| prop::collection::vec(-1.0f64..1.0, p))
        .prop_filter_map("norm too small", |v| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            (norm > 1e-3).then(|| UnitDirection::new(v).unwrap())
        })
}

/// Directions with exact zeros, which exercise the axis conventions.
fn sparse_direction() -> impl Strategy<Value = UnitDirection> {
    prop::collection::vec(prop_oneof![Just(0.0), Just(-0.0), Just(1.0), Just(-1.0), -1.0f64..1.0], 2..8)
        .prop_filter_map("zero vector", |v| UnitDirection::new(v).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn round_trip(a in prop_oneof![direction(10), sparse_direction()]) {
        let phi = to_angles(&a);
        prop_assert!(in_canonical_range(&phi));
        prop_assert!(max_abs_diff(from_angles(&phi).as_slice(), a.as_slice()) <= 1e-10);
    }

    #[test]
    fn antipodes_keep_their_sign(a in direction(10)) {
        let back = from_angles(&to_angles(&a.negated()));
        prop_assert!(max_abs_diff(back.as_slice(), a.negated().as_slice()) <= 1e-10);
    }

    #[test]
    fn angles_give_unit_norm(phi in prop::collection::vec(-50.0f64..50.0, 1..12)) {
        let mut out = vec![0.0; phi.len() + 1];
        // raw product form, before the constructor renormalizes
        let mut sin_prod = 1.0;
        for (k, t) in phi.iter().enumerate() {
            out[k] = sin_prod * t.cos();
            sin_prod *= t.sin();
        }
        out[phi.len()] = sin_prod;
        let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() <= 1e-12);
        let a = from_angles(&SphereAngles(phi));
        prop_assert!(max_abs_diff(a.as_slice(), &out) <= 1e-12);
    }

    #[test]
    fn canonical_angles_name_the_same_direction(phi in prop::collection::vec(-20.0f64..20.0, 1..8)) {
        let phi = SphereAngles(phi);
        let c = canonicalize(&phi);
        prop_assert!(in_canonical_range(&c));
        prop_assert!(max_abs_diff(from_angles(&c).as_slice(), from_angles(&phi).as_slice()) <= 1e-10);
    }
}
