mod common;

use hcsdr::init::{dr_direction, random_direction, save_direction, sir_direction, whiten, InitialDirection};
use hcsdr::{subspace_delta, Dataset, Result, SeedSpec, SliceSpec, UnitDirection};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

type Method = fn(&Dataset, SliceSpec) -> Result<InitialDirection>;
const METHODS: [(&str, Method); 3] = [("sir", sir_direction), ("save", save_direction), ("dr", dr_direction)];

/// Signal along `(1, -1, 0, 0)` with both a mean and a variance effect.
fn signal_data(n: usize, seed: u64) -> Dataset {
    common::dataset_from(n, 4, seed, |x, noise| {
        let t = (x[0] - x[1]) / 2f64.sqrt();
        t + 0.5 * t * t + 0.2 * noise()
    })
}

fn transform(d: &Dataset, a: &DMatrix<f64>, shift: &[f64]) -> Dataset {
    let x = DMatrix::from_row_slice(d.n(), d.p(), d.x());
    let w = x * a.transpose();
    let mut rows = Vec::with_capacity(d.n() * d.p());
    for r in w.row_iter() {
        rows.extend(r.iter().zip(shift).map(|(v, s)| v + s));
    }
    Dataset::from_row_major(rows, d.p(), d.y().to_vec()).unwrap()
}

#[test]
fn spans_are_affine_equivariant() {
    let d = signal_data(2000, 1);
    let a = DMatrix::from_row_slice(4, 4, &[
        2.0, 0.3, 0.0, -0.5, //
        0.1, 1.0, 0.4, 0.0, //
        0.0, -0.7, 3.0, 0.2, //
        0.6, 0.0, 0.1, 0.5,
    ]);
    let w = transform(&d, &a, &[5.0, -2.0, 0.5, 10.0]);
    for (name, method) in METHODS {
        let s = SliceSpec::default();
        let orig = method(&d, s).unwrap().direction;
        let moved = method(&w, s).unwrap().direction;
        let back = a.transpose() * DVector::from_column_slice(moved.as_slice());
        let back = UnitDirection::new(back.as_slice().to_vec()).unwrap();
        let delta = subspace_delta(&orig, &back).unwrap();
        assert!(delta <= 1e-6, "{name}: {delta:e}");
    }
}

#[test]
fn directions_deterministic_and_sign_canonical() {
    let d = signal_data(300, 2);
    for (name, method) in METHODS {
        let a = method(&d, SliceSpec::default()).unwrap();
        let b = method(&d, SliceSpec::default()).unwrap();
        assert_eq!(a, b, "{name}");
        let first = a.direction.as_slice().iter().find(|c| **c != 0.0).unwrap();
        assert!(*first > 0.0, "{name}");
    }
}

#[test]
fn random_directions_centred_and_unit() {
    let mut sum = [0.0f64; 3];
    for r in 0..10_000 {
        let v = random_direction(3, SeedSpec::new(17, r)).unwrap();
        let norm = v.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() <= 1e-12);
        sum.iter_mut().zip(v.as_slice()).for_each(|(s, x)| *s += x);
    }
    assert!(sum.iter().all(|s| (s / 10_000.0).abs() <= 0.05), "{sum:?}");
    assert_eq!(random_direction(3, SeedSpec::new(1, 2)).unwrap(), random_direction(3, SeedSpec::new(1, 2)).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn whitening_gives_identity_covariance(
        seed in any::<u64>(),
        scales in prop::collection::vec(0.1f64..10.0, 2..6),
        mix in -0.9f64..0.9,
    ) {
        let p = scales.len();
        let d = common::dataset_from(80, p, seed, |_, noise| noise());
        let x: Vec<f64> = d
            .rows()
            .flat_map(|r| {
                let r0 = r[0];
                r.iter().zip(&scales).enumerate().map(move |(j, (v, s))| s * (v + if j > 0 { mix * r0 } else { 0.0 })).collect::<Vec<_>>()
            })
            .collect();
        let d = Dataset::from_row_major(x, p, d.y().to_vec()).unwrap();
        let (w, z) = whiten(&d).unwrap();
        prop_assert!((&w.half_inverse * &w.half - DMatrix::identity(p, p)).amax() <= 1e-8);
        prop_assert!((&w.half_inverse - w.half_inverse.transpose()).amax() <= 1e-10);
        let mean = z.row_mean();
        prop_assert!(mean.amax() <= 1e-6);
        let cov = z.tr_mul(&z) / (d.n() as f64 - 1.0);
        prop_assert!((cov - DMatrix::identity(p, p)).amax() <= 1e-6);
    }
}
