//! Pseudo-observations, nearest-neighbour radii and the empirical
//! Bhattacharyya affinity / Hellinger correlation of a bivariate sample.
//!
//! For a sample `(x_i, y_i)` the pseudo-observations are
//! `u_i = (rank(x_i), rank(y_i)) / (n + 1)`, with tied values sharing their
//! midrank. With `r_i` the distance from `u_i` to its nearest other
//! pseudo-observation, the affinity estimate is
//!
//! ```text
//! b = 2 sqrt(n - 1) / n * sum_i r_i
//! ```
//!
//! and the Hellinger correlation is `h_map(b)`, where
//! `h_map(b) = 2 / b^2 * sqrt(b^4 + sqrt(4 - 3 b^4) - 2)`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower clamp applied to the affinity before mapping it to a correlation.
pub const AFFINITY_FLOOR: f64 = 1e-6;

/// Rank-transformed sample, one point per observation, in observation order.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSample {
    pub points: Vec<[f64; 2]>,
}

impl PseudoSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// First (x) coordinates.
    pub fn u(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p[0])
    }

    /// Second (y) coordinates.
    pub fn v(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p[1])
    }
}

/// Affinity and correlation estimates for one bivariate sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinityEstimate {
    /// The raw nearest-neighbour sum; may exceed 1 in finite samples.
    pub b_hat_raw: f64,
    /// `b_hat_raw` clamped to `[1e-6, 1]`.
    pub b_hat: f64,
    /// `h_map(b_hat)`.
    pub h_hat: f64,
}

impl AffinityEstimate {
    pub fn from_raw(b_hat_raw: f64) -> Self {
        let b_hat = b_hat_raw.clamp(AFFINITY_FLOOR, 1.0);
        let h_hat = h_map(b_hat).expect("clamped affinity is inside (0, 1]");
        Self { b_hat_raw, b_hat, h_hat }
    }
}

/// Indices that sort `v` ascending; ties keep their original order.
pub(crate) fn argsort(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(Ordering::Equal));
    idx
}

/// Midranks (1-based) of `v`, scaled by `1 / (n + 1)`.
pub fn pseudo_values(v: &[f64]) -> Vec<f64> {
    let order = argsort(v);
    let mut out = vec![0.0; v.len()];
    fill_pseudo_values(v, &order, &mut out);
    out
}

fn fill_pseudo_values(v: &[f64], order: &[usize], out: &mut [f64]) {
    let denom = v.len() as f64 + 1.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && v[order[end]] == v[order[start]] {
            end += 1;
        }
        // positions start..end (0-based) hold equal values; midrank of
        // 1-based ranks start+1..=end
        let midrank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            out[i] = midrank / denom;
        }
        start = end;
    }
}

fn check_pair(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < min {
        return Err(Error::TooFewRows { got: x.len(), min });
    }
    Ok(())
}

/// Empirical copula pseudo-observations of `(x, y)` using midranks.
pub fn rank_transform(x: &[f64], y: &[f64]) -> Result<PseudoSample> {
    check_pair(x, y, 2)?;
    let u = pseudo_values(x);
    let v = pseudo_values(y);
    Ok(PseudoSample { points: u.into_iter().zip(v).map(|(a, b)| [a, b]).collect() })
}

/// Distance from each pseudo-observation to its nearest other point.
///
/// Points are swept in order of their first coordinate; the scan in each
/// direction stops once the horizontal gap alone exceeds the best distance
/// found so far. The result equals an all-pairs scan exactly.
pub fn nn_radii(u: &PseudoSample) -> Result<Vec<f64>> {
    if u.len() < 2 {
        return Err(Error::TooFewRows { got: u.len(), min: 2 });
    }
    let first: Vec<f64> = u.u().collect();
    let order = argsort(&first);
    let sorted: Vec<[f64; 2]> = order.iter().map(|&i| u.points[i]).collect();
    let mut radii = vec![0.0; u.len()];
    for (pos, r2) in sorted_sweep(&sorted).into_iter().enumerate() {
        radii[order[pos]] = r2.sqrt();
    }
    Ok(radii)
}

/// Squared nearest-neighbour distances for points sorted by first coordinate.
fn sorted_sweep(pts: &[[f64; 2]]) -> Vec<f64> {
    let mut out = vec![f64::INFINITY; pts.len()];
    for (a, &[xa, ya]) in pts.iter().enumerate() {
        let mut best = f64::INFINITY;
        for &[xb, yb] in &pts[a + 1..] {
            let dx = xb - xa;
            let dx2 = dx * dx;
            if dx2 >= best {
                break;
            }
            let dy = yb - ya;
            best = best.min(dx2 + dy * dy);
        }
        for &[xb, yb] in pts[..a].iter().rev() {
            let dx = xb - xa;
            let dx2 = dx * dx;
            if dx2 >= best {
                break;
            }
            let dy = yb - ya;
            best = best.min(dx2 + dy * dy);
        }
        out[a] = best;
    }
    out
}

fn affinity_prefactor(n: usize) -> f64 {
    2.0 * ((n - 1) as f64).sqrt() / n as f64
}

/// Nearest-neighbour estimate of the Bhattacharyya affinity between the
/// copula of `(x, y)` and the independence copula.
///
/// Accepts `n = 2` so small hand-computed cases can be checked; statistical
/// use needs `n >= 3`.
pub fn bhattacharyya_hat(x: &[f64], y: &[f64]) -> Result<AffinityEstimate> {
    let u = rank_transform(x, y)?;
    let radii = nn_radii(&u)?;
    let sum: f64 = radii.iter().sum();
    Ok(AffinityEstimate::from_raw(affinity_prefactor(x.len()) * sum))
}

/// Maps an affinity `b` in `(0, 1]` to the Hellinger correlation.
///
/// Evaluated as `2 sqrt((s - 1) / (s + 2))` with `s = sqrt(4 - 3 b^4)`, an
/// algebraically equal form that stays accurate as `b -> 0` and `b -> 1`.
pub fn h_map(b: f64) -> Result<f64> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::DomainError { what: "h_map", value: b });
    }
    let b2 = b * b;
    let s = (4.0 - 3.0 * b2 * b2).sqrt();
    // s - 1 = 3 (1 - b^4) / (s + 1), with 1 - b^4 factored to avoid cancellation
    let one_minus_b4 = (1.0 - b) * (1.0 + b) * (1.0 + b2);
    let h = 2.0 * (3.0 * one_minus_b4 / ((s + 1.0) * (s + 2.0))).sqrt();
    Ok(h.clamp(0.0, 1.0))
}

/// Empirical Hellinger correlation of `(x, y)`.
pub fn hellinger_hat(x: &[f64], y: &[f64]) -> Result<AffinityEstimate> {
    check_pair(x, y, crate::types::MIN_ROWS)?;
    bhattacharyya_hat(x, y)
}

/// Population affinity and Hellinger correlation of a standard bivariate
/// normal with correlation `rho`.
pub fn closed_form_normal(rho: f64) -> Result<(f64, f64)> {
    if !(rho.abs() < 1.0) {
        return Err(Error::DomainError { what: "closed_form_normal", value: rho });
    }
    let r2 = rho * rho;
    let b = 2.0 * (1.0 - r2).powf(0.25) / (4.0 - r2).sqrt();
    Ok((b, rho.abs()))
}

/// Reusable evaluator of the affinity of `(z, y)` for a fixed response `y`.
///
/// The response's pseudo-values are computed once; each call ranks the new
/// projection and runs the sweep. Results are bit-identical to
/// [`bhattacharyya_hat`].
#[derive(Debug, Clone)]
pub struct AffinityEvaluator {
    v: Vec<f64>,
    prefactor: f64,
    order: Vec<usize>,
    u: Vec<f64>,
    sorted: Vec<[f64; 2]>,
    radii: Vec<f64>,
}

impl AffinityEvaluator {
    pub fn new(y: &[f64]) -> Result<Self> {
        if y.len() < 2 {
            return Err(Error::TooFewRows { got: y.len(), min: 2 });
        }
        let n = y.len();
        Ok(Self {
            v: pseudo_values(y),
            prefactor: affinity_prefactor(n),
            order: Vec::with_capacity(n),
            u: vec![0.0; n],
            sorted: Vec::with_capacity(n),
            radii: vec![0.0; n],
        })
    }

    pub fn evaluate(&mut self, z: &[f64]) -> AffinityEstimate {
        assert_eq!(z.len(), self.v.len(), "projection length must match the response");
        self.order.clear();
        self.order.extend(0..z.len());
        self.order.sort_by(|&a, &b| z[a].partial_cmp(&z[b]).unwrap_or(Ordering::Equal));
        fill_pseudo_values(z, &self.order, &mut self.u);
        self.sorted.clear();
        self.sorted.extend(self.order.iter().map(|&i| [self.u[i], self.v[i]]));
        for (pos, r2) in sorted_sweep(&self.sorted).into_iter().enumerate() {
            self.radii[self.order[pos]] = r2.sqrt();
        }
        let sum: f64 = self.radii.iter().sum();
        AffinityEstimate::from_raw(self.prefactor * sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rank_formula() {
        let u = rank_transform(&[5.2, -1.0, 7.0], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(u.u().collect::<Vec<_>>(), vec![0.5, 0.25, 0.75]);
    }

    #[test]
    fn monotone_map_gives_identical_columns() {
        let u = rank_transform(&[1.0, 2.0, 3.0], &[1.0, 4.0, 9.0]).unwrap();
        assert_eq!(u.u().collect::<Vec<_>>(), u.v().collect::<Vec<_>>());
    }

    #[test]
    fn ties_get_midranks() {
        let u = rank_transform(&[2.0, 2.0, 5.0], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(u.u().collect::<Vec<_>>(), vec![0.375, 0.375, 0.75]);
    }

    #[test]
    fn signed_zeros_tie() {
        assert_eq!(pseudo_values(&[0.0, -0.0, 1.0]), vec![0.375, 0.375, 0.75]);
    }

    #[test]
    fn rank_transform_needs_two() {
        assert!(matches!(rank_transform(&[1.0], &[1.0]), Err(Error::TooFewRows { .. })));
        assert!(matches!(
            rank_transform(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn radii_two_points() {
        let u = PseudoSample { points: vec![[1.0 / 3.0, 1.0 / 3.0], [2.0 / 3.0, 2.0 / 3.0]] };
        let r = nn_radii(&u).unwrap();
        assert_abs_diff_eq!(r[0], 2f64.sqrt() / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1], 0.4714, epsilon = 1e-4);
    }

    #[test]
    fn radii_collinear_grid() {
        let u = PseudoSample { points: vec![[0.25, 0.25], [0.5, 0.5], [0.75, 0.75]] };
        for r in nn_radii(&u).unwrap() {
            assert_abs_diff_eq!(r, 0.25 * 2f64.sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn duplicate_points_have_zero_radius() {
        let u = PseudoSample { points: vec![[0.5, 0.5], [0.2, 0.9], [0.5, 0.5]] };
        let r = nn_radii(&u).unwrap();
        assert_eq!(r[0], 0.0);
        assert_eq!(r[2], 0.0);
        assert!(r[1] > 0.0);
    }

    #[test]
    fn affinity_two_points() {
        let e = bhattacharyya_hat(&[0.0, 1.0], &[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(e.b_hat_raw, 2.0 * 2f64.sqrt() / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.b_hat_raw, 0.9428, epsilon = 1e-4);
    }

    #[test]
    fn perfect_dependence_small_n_is_one() {
        let e = bhattacharyya_hat(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(e.b_hat_raw, 1.0, epsilon = 1e-15);
        let h = hellinger_hat(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(h.h_hat, 0.0, epsilon = 1e-7);
    }

    #[test]
    fn hellinger_hat_needs_three() {
        assert!(matches!(
            hellinger_hat(&[0.0, 1.0], &[0.0, 1.0]),
            Err(Error::TooFewRows { got: 2, min: 3 })
        ));
    }

    #[test]
    fn affinity_monotone_invariant() {
        let x = [0.3, -1.2, 2.5, 0.0, 1.1, -0.4];
        let y = [1.0, 0.2, -0.7, 3.3, 0.9, 0.1];
        let gx: Vec<f64> = x.iter().map(|v: &f64| v.exp()).collect();
        assert_eq!(bhattacharyya_hat(&x, &y).unwrap(), bhattacharyya_hat(&gx, &y).unwrap());
    }

    #[test]
    fn h_map_values() {
        assert_eq!(h_map(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(h_map(0.9611).unwrap(), 0.5, epsilon = 1e-3);
        assert_abs_diff_eq!(h_map(1e-6).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn h_map_domain() {
        for b in [0.0, -0.5, 1.0 + 1e-12, f64::NAN] {
            assert!(matches!(h_map(b), Err(Error::DomainError { .. })), "b = {b}");
        }
    }

    #[test]
    fn h_map_matches_printed_form_in_the_interior() {
        // the printed form loses digits to cancellation near b = 0
        for i in 10..100 {
            let b = i as f64 / 100.0;
            let b4 = b.powi(4);
            let direct = 2.0 / (b * b) * (b4 + (4.0 - 3.0 * b4).sqrt() - 2.0).sqrt();
            assert_abs_diff_eq!(h_map(b).unwrap(), direct, epsilon = 1e-9);
        }
    }

    #[test]
    fn closed_form_values() {
        let (b, h) = closed_form_normal(0.0).unwrap();
        assert_eq!((b, h), (1.0, 0.0));
        let (b, h) = closed_form_normal(0.5).unwrap();
        assert_abs_diff_eq!(b, 0.9611, epsilon = 1e-4);
        assert_eq!(h, 0.5);
        let (b, _) = closed_form_normal(0.999_999).unwrap();
        assert!(h_map(b).unwrap() > 0.999);
        assert!(closed_form_normal(1.0).is_err());
        assert!(closed_form_normal(-1.5).is_err());
    }

    #[test]
    fn evaluator_matches_free_function() {
        let z = [0.3, -1.2, 2.5, 0.0, 1.1, -0.4, 0.3];
        let y = [1.0, 0.2, -0.7, 3.3, 0.9, 0.1, 0.1];
        let mut ev = AffinityEvaluator::new(&y).unwrap();
        assert_eq!(ev.evaluate(&z), bhattacharyya_hat(&z, &y).unwrap());
    }
}
