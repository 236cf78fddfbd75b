//! Hyperspherical coordinates on the unit sphere of `R^p`.
//!
//! A direction `a` corresponds to angles `phi_1..phi_{p-1}` through
//!
//! ```text
//! a_1     = cos(phi_1)
//! a_2     = sin(phi_1) cos(phi_2)
//! ...
//! a_{p-1} = sin(phi_1) ... sin(phi_{p-2}) cos(phi_{p-1})
//! a_p     = sin(phi_1) ... sin(phi_{p-2}) sin(phi_{p-1})
//! ```
//!
//! The inverse uses two-argument arctangents so that signs survive:
//! `phi_k = atan2(|a_{k+1..p}|, a_k)` lies in `[0, pi]` and the last angle
//! `atan2(a_p, a_{p-1})` is shifted into `[0, 2 pi)`.

use std::f64::consts::TAU;

use crate::types::{SphereAngles, UnitDirection};

/// Canonical angles of `alpha`.
///
/// When every trailing coordinate after position `k` is zero, the remaining
/// angles are set to 0.
pub fn to_angles(alpha: &UnitDirection) -> SphereAngles {
    let a = alpha.as_slice();
    let p = a.len();
    // tail[k] = sqrt(a_k^2 + ... + a_{p-1}^2), 0-based
    let mut tail = vec![0.0f64; p + 1];
    for k in (0..p).rev() {
        tail[k] = (tail[k + 1].powi(2) + a[k] * a[k]).sqrt();
    }
    let mut phi = vec![0.0; p - 1];
    for k in 0..p - 1 {
        if tail[k + 1] == 0.0 {
            if k == p - 2 {
                phi[k] = canonical_last(0f64.atan2(a[k]));
            } else {
                phi[k] = 0f64.atan2(a[k]);
            }
            break;
        }
        phi[k] = if k == p - 2 {
            canonical_last(a[p - 1].atan2(a[p - 2]))
        } else {
            tail[k + 1].atan2(a[k])
        };
    }
    SphereAngles(phi)
}

fn canonical_last(t: f64) -> f64 {
    if t < 0.0 {
        let shifted = t + TAU;
        // t tiny negative rounds to exactly TAU
        if shifted >= TAU {
            0.0
        } else {
            shifted
        }
    } else {
        t
    }
}

/// Direction with the given angles. Any real angles are accepted.
pub fn from_angles(phi: &SphereAngles) -> UnitDirection {
    let mut out = vec![0.0; phi.p()];
    angles_into(phi.as_slice(), &mut out);
    UnitDirection::new(out).expect("product of sines and cosines has unit norm")
}

/// Writes the coordinates for `phi` into `out` (length `phi.len() + 1`)
/// without renormalizing.
pub(crate) fn angles_into(phi: &[f64], out: &mut [f64]) {
    debug_assert_eq!(out.len(), phi.len() + 1);
    let mut sin_prod = 1.0;
    for (k, &angle) in phi.iter().enumerate() {
        let (s, c) = angle.sin_cos();
        out[k] = sin_prod * c;
        sin_prod *= s;
    }
    out[phi.len()] = sin_prod;
}

/// Maps arbitrary angles to their canonical representative.
pub fn canonicalize(phi: &SphereAngles) -> SphereAngles {
    to_angles(&from_angles(phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn dir(v: &[f64]) -> UnitDirection {
        UnitDirection::new(v.to_vec()).unwrap()
    }

    #[test]
    fn two_dim_axes() {
        assert_eq!(to_angles(&dir(&[1.0, 0.0])).0, vec![0.0]);
        assert_abs_diff_eq!(to_angles(&dir(&[0.0, 1.0])).0[0], FRAC_PI_2);
        assert_eq!(from_angles(&SphereAngles(vec![0.0])).as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn diagonal_in_three_dims() {
        let phi = to_angles(&dir(&[1.0, 1.0, 1.0]));
        assert_abs_diff_eq!(phi.0[0], 2f64.sqrt().atan(), epsilon = 1e-12);
        assert_abs_diff_eq!(phi.0[0], 0.95532, epsilon = 1e-5);
        assert_abs_diff_eq!(phi.0[1], FRAC_PI_4, epsilon = 1e-12);
    }

    #[test]
    fn axis_from_angles() {
        let a = from_angles(&SphereAngles(vec![FRAC_PI_2, FRAC_PI_2]));
        assert_abs_diff_eq!(a.as_slice()[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.as_slice()[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.as_slice()[2], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn periodic_in_last_angle() {
        let phi = SphereAngles(vec![0.3, 1.2, 4.0]);
        let shifted = SphereAngles(vec![0.3, 1.2, 4.0 + TAU]);
        let (a, b) = (from_angles(&phi), from_angles(&shifted));
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn negative_axis_round_trip() {
        for v in [[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0], [0.0, -1.0, -0.0]] {
            let d = dir(&v);
            let phi = to_angles(&d);
            assert!(phi.0[..1].iter().all(|t| (0.0..=PI).contains(t)));
            assert!((0.0..TAU).contains(&phi.0[1]));
            let back = from_angles(&phi);
            for (x, y) in back.as_slice().iter().zip(d.as_slice()) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn canonicalize_wraps_into_range() {
        let phi = canonicalize(&SphereAngles(vec![-0.4, 7.0, -2.0]));
        assert!(phi.0[..2].iter().all(|t| (0.0..=PI).contains(t)));
        assert!((0.0..TAU).contains(&phi.0[2]));
    }
}
