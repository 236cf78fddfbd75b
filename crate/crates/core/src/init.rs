//! Starting directions for the optimizer: sliced inverse regression (SIR),
//! sliced average variance estimation (SAVE), directional regression (DR)
//! and uniformly random directions.
//!
//! The three inverse-regression methods share one recipe. Predictors are
//! whitened to `Z = (X - mean) S^{-1/2}`, observations are sorted by the
//! response and cut into equal-frequency slices, a `p x p` kernel is built
//! from per-slice moments of `Z`, and its top eigenvector `v` is mapped back
//! to the original scale as `S^{-1/2} v`.

use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};

use crate::copula::argsort;
use crate::error::{Error, Result};
use crate::types::{Dataset, InitTag, SeedSpec, UnitDirection};

/// Top eigenvalue below which a kernel is reported as carrying no signal.
pub const LOW_SIGNAL: f64 = 1e-8;

/// Number of equal-frequency slices of the sorted response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SliceSpec {
    pub n_slices: usize,
}

impl Default for SliceSpec {
    fn default() -> Self {
        Self { n_slices: 10 }
    }
}

impl SliceSpec {
    pub fn new(n_slices: usize) -> Result<Self> {
        if n_slices < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 slices, got {n_slices}")));
        }
        Ok(Self { n_slices })
    }

    /// 10 slices when `n >= 100`, otherwise `max(2, n / 20)`.
    pub fn for_sample_size(n: usize) -> Self {
        if n >= 100 {
            Self { n_slices: 10 }
        } else {
            Self { n_slices: (n / 20).max(2) }
        }
    }

    /// Observation indices of each slice, ordered by response with ties kept
    /// in observation order.
    pub fn partition(&self, y: &[f64]) -> Result<Vec<Vec<usize>>> {
        let n = y.len();
        let h = self.n_slices;
        if h < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 slices, got {h}")));
        }
        let order = argsort(y);
        let slices: Vec<Vec<usize>> =
            (0..h).map(|s| order[s * n / h..(s + 1) * n / h].to_vec()).collect();
        if let Some((slice, s)) = slices.iter().enumerate().find(|(_, s)| s.len() < 2) {
            return Err(Error::EmptySlice { slice, count: s.len() });
        }
        Ok(slices)
    }
}

/// Affine map taking the predictors to zero mean and identity covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Whitening {
    pub mean: DVector<f64>,
    /// `S^{-1/2}`, symmetric.
    pub half_inverse: DMatrix<f64>,
    /// `S^{1/2}`, symmetric.
    pub half: DMatrix<f64>,
}

/// Whitens the predictors of `d`.
///
/// Returns the map and the `n x p` standardized matrix. The covariance uses
/// the `n - 1` denominator.
pub fn whiten(d: &Dataset) -> Result<(Whitening, DMatrix<f64>)> {
    let (n, p) = (d.n(), d.p());
    let x = DMatrix::from_row_slice(n, p, d.x());
    let mean = x.row_mean().transpose();
    let mut centered = x;
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let cov = centered.tr_mul(&centered) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(max > 0.0) || min <= 1e-10 * max {
        return Err(Error::SingularCovariance { ratio: if max > 0.0 { min / max } else { 0.0 } });
    }
    let v = &eig.eigenvectors;
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let half_inverse = symmetrize(v * inv_sqrt * v.transpose());
    let half = symmetrize(v * sqrt * v.transpose());
    let z = centered * &half_inverse;
    Ok((Whitening { mean, half_inverse, half }, z))
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Starting direction produced by an inverse-regression method.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDirection {
    pub direction: UnitDirection,
    /// Largest eigenvalue of the method's kernel.
    pub eigenvalue: f64,
    /// Set when `eigenvalue < 1e-8`; any unit vector is then as good as another.
    pub low_signal: bool,
}

struct SliceMoments {
    weight: f64,
    mean: DVector<f64>,
    /// Second moment `E[Z Z^T | slice]`.
    second: DMatrix<f64>,
    /// Covariance within the slice.
    cov: DMatrix<f64>,
}

fn slice_moments(z: &DMatrix<f64>, slices: &[Vec<usize>]) -> Vec<SliceMoments> {
    let (n, p) = z.shape();
    slices
        .iter()
        .map(|idx| {
            let m = idx.len() as f64;
            let mut mean = DVector::zeros(p);
            let mut second = DMatrix::zeros(p, p);
            for &i in idx {
                let row = z.row(i).transpose();
                mean += &row;
                second.ger(1.0, &row, &row, 1.0);
            }
            mean /= m;
            second /= m;
            let cov = &second - &mean * mean.transpose();
            SliceMoments { weight: m / n as f64, mean, second, cov }
        })
        .collect()
}

fn sir_kernel(moments: &[SliceMoments], p: usize) -> DMatrix<f64> {
    moments.iter().fold(DMatrix::zeros(p, p), |acc, s| acc + &s.mean * s.mean.transpose() * s.weight)
}

fn save_kernel(moments: &[SliceMoments], p: usize) -> DMatrix<f64> {
    let eye = DMatrix::<f64>::identity(p, p);
    moments.iter().fold(DMatrix::zeros(p, p), |acc, s| {
        let a = &eye - &s.cov;
        acc + &a * &a * s.weight
    })
}

/// `2 E[A^2] + 2 (E[m m^T])^2 + 2 E[m^T m] E[m m^T]` with
/// `A = E[Z Z^T | slice] - I` and `m = E[Z | slice]`.
fn dr_kernel(moments: &[SliceMoments], p: usize) -> DMatrix<f64> {
    let eye = DMatrix::<f64>::identity(p, p);
    let mut a2 = DMatrix::zeros(p, p);
    let mut mm = DMatrix::zeros(p, p);
    let mut mtm = 0.0;
    for s in moments {
        let a = &s.second - &eye;
        a2 += &a * &a * s.weight;
        mm += &s.mean * s.mean.transpose() * s.weight;
        mtm += s.mean.norm_squared() * s.weight;
    }
    a2 * 2.0 + &mm * &mm * 2.0 + mm * (2.0 * mtm)
}

fn top_direction(kernel: DMatrix<f64>, w: &Whitening) -> Result<InitialDirection> {
    let eig = SymmetricEigen::new(symmetrize(kernel));
    let top = eig.eigenvalues.imax();
    let eigenvalue = eig.eigenvalues[top];
    let v = eig.eigenvectors.column(top);
    let back = &w.half_inverse * v;
    let direction = UnitDirection::new(back.iter().copied().collect())?.sign_canonical();
    Ok(InitialDirection { direction, eigenvalue, low_signal: eigenvalue < LOW_SIGNAL })
}

fn sliced(
    d: &Dataset,
    s: SliceSpec,
    kernel: fn(&[SliceMoments], usize) -> DMatrix<f64>,
) -> Result<InitialDirection> {
    let slices = s.partition(d.y())?;
    let (w, z) = whiten(d)?;
    let moments = slice_moments(&z, &slices);
    top_direction(kernel(&moments, d.p()), &w)
}

/// Sliced inverse regression: top eigenvector of the weighted covariance of
/// slice means.
pub fn sir_direction(d: &Dataset, s: SliceSpec) -> Result<InitialDirection> {
    sliced(d, s, sir_kernel)
}

/// Sliced average variance estimation: top eigenvector of the weighted mean
/// of `(I - Cov(Z | slice))^2`.
pub fn save_direction(d: &Dataset, s: SliceSpec) -> Result<InitialDirection> {
    sliced(d, s, save_kernel)
}

/// Directional regression.
pub fn dr_direction(d: &Dataset, s: SliceSpec) -> Result<InitialDirection> {
    sliced(d, s, dr_kernel)
}

/// Uniformly distributed direction: a normalized standard normal vector.
pub fn random_direction(p: usize, seed: SeedSpec) -> Result<UnitDirection> {
    if p < 2 {
        return Err(Error::TooFewCols(p));
    }
    let mut rng = seed.rng();
    loop {
        let v: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Ok(d) = UnitDirection::new(v) {
            return Ok(d);
        }
    }
}

/// How the optimizer's starting point is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Initializer {
    Sir,
    Save,
    Dr,
    Random,
    Given(UnitDirection),
}

impl Initializer {
    pub fn tag(&self) -> InitTag {
        match self {
            Initializer::Sir => InitTag::Sir,
            Initializer::Save => InitTag::Save,
            Initializer::Dr => InitTag::Dr,
            Initializer::Random => InitTag::Random,
            Initializer::Given(_) => InitTag::Given,
        }
    }

    /// Starting direction for `d`. Slice counts follow
    /// [`SliceSpec::for_sample_size`] unless `slices` is given.
    pub fn start(
        &self,
        d: &Dataset,
        slices: Option<SliceSpec>,
        seed: SeedSpec,
    ) -> Result<InitialDirection> {
        let s = slices.unwrap_or_else(|| SliceSpec::for_sample_size(d.n()));
        match self {
            Initializer::Sir => sir_direction(d, s),
            Initializer::Save => save_direction(d, s),
            Initializer::Dr => dr_direction(d, s),
            Initializer::Random => Ok(InitialDirection {
                direction: random_direction(d.p(), seed)?,
                eigenvalue: f64::NAN,
                low_signal: false,
            }),
            Initializer::Given(v) => {
                if v.p() != d.p() {
                    return Err(Error::DimensionMismatch { left: v.p(), right: d.p() });
                }
                Ok(InitialDirection { direction: v.clone(), eigenvalue: f64::NAN, low_signal: false })
            }
        }
    }
}

impl From<InitTag> for Option<Initializer> {
    fn from(t: InitTag) -> Self {
        match t {
            InitTag::Sir => Some(Initializer::Sir),
            InitTag::Save => Some(Initializer::Save),
            InitTag::Dr => Some(Initializer::Dr),
            InitTag::Random => Some(Initializer::Random),
            InitTag::Given => None,
        }
    }
}

/// Parses a whitespace- or comma-separated vector.
pub fn parse_direction(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c.is_whitespace() || c == ',' || c == ';')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("cannot parse `{t}` as a number")))
        })
        .collect()
}

/// Reads a starting direction from a file; the vector is renormalized.
pub fn read_direction_file(path: &Path) -> Result<UnitDirection> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    UnitDirection::new(parse_direction(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn normal_dataset(n: usize, p: usize, seed: u64, f: impl Fn(&[f64]) -> f64) -> Dataset {
        let mut rng = SeedSpec::new(seed, 0).rng();
        let x: Vec<f64> = (0..n * p).map(|_| StandardNormal.sample(&mut rng)).collect();
        let y = x.chunks(p).map(|r| f(r) + 0.1 * rng.sample::<f64, _>(StandardNormal)).collect();
        Dataset::from_row_major(x, p, y).unwrap()
    }

    #[test]
    fn slice_counts() {
        assert_eq!(SliceSpec::for_sample_size(400).n_slices, 10);
        assert_eq!(SliceSpec::for_sample_size(99).n_slices, 4);
        assert_eq!(SliceSpec::for_sample_size(10).n_slices, 2);
        assert!(SliceSpec::new(1).is_err());
    }

    #[test]
    fn partition_is_equal_frequency() {
        let y: Vec<f64> = (0..23).map(|i| ((i * 7) % 23) as f64).collect();
        let parts = SliceSpec::new(5).unwrap().partition(&y).unwrap();
        let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
        assert_eq!(sizes.iter().sum::<usize>(), 23);
        assert!(sizes.iter().all(|s| (4..=5).contains(s)));
        let max0 = parts[0].iter().map(|&i| y[i]).fold(f64::MIN, f64::max);
        let min1 = parts[1].iter().map(|&i| y[i]).fold(f64::MAX, f64::min);
        assert!(max0 < min1);
    }

    #[test]
    fn too_many_slices_is_an_error() {
        let y = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(matches!(
            SliceSpec::new(3).unwrap().partition(&y),
            Err(Error::EmptySlice { .. })
        ));
    }

    #[test]
    fn whitening_identity_on_white_data() {
        // rows (+-1, +-1) in all four sign patterns: mean 0, covariance (4/3) I
        let x = vec![1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0];
        let d = Dataset::from_row_major(x, 2, vec![0.0; 4]).unwrap();
        let (w, z) = whiten(&d).unwrap();
        let expected = (3f64 / 4.0).sqrt();
        assert_abs_diff_eq!(w.half_inverse, DMatrix::identity(2, 2) * expected, epsilon = 1e-12);
        let cov = z.tr_mul(&z) / 3.0;
        assert_abs_diff_eq!(cov, DMatrix::identity(2, 2), epsilon = 1e-10);
    }

    #[test]
    fn whitening_scaled_coordinate() {
        let base = normal_dataset(500, 3, 1, |_| 0.0);
        let x: Vec<f64> = base
            .rows()
            .flat_map(|r| [3.0 * r[0], r[1], r[2]])
            .collect();
        let d = Dataset::from_row_major(x, 3, base.y().to_vec()).unwrap();
        let (w0, _) = whiten(&base).unwrap();
        let (w, z) = whiten(&d).unwrap();
        // exact relation from the eigen-decomposition: scaling column 0 by 3
        // with independent columns scales that diagonal entry by roughly 1/3
        assert_abs_diff_eq!(w.half_inverse[(0, 0)], w0.half_inverse[(0, 0)] / 3.0, epsilon = 0.02);
        assert_abs_diff_eq!(w.half_inverse[(0, 0)], 1.0 / 3.0, epsilon = 0.03);
        let cov = z.tr_mul(&z) / (d.n() as f64 - 1.0);
        assert_abs_diff_eq!(cov, DMatrix::identity(3, 3), epsilon = 1e-6);
        assert_abs_diff_eq!(z.row_mean().norm(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(&w.half_inverse * &w.half, DMatrix::identity(3, 3), epsilon = 1e-8);
        assert_abs_diff_eq!(w.half_inverse.clone(), w.half_inverse.transpose(), epsilon = 1e-10);
    }

    #[test]
    fn duplicate_column_is_singular() {
        let base = normal_dataset(50, 2, 2, |_| 0.0);
        let x: Vec<f64> = base.rows().flat_map(|r| [r[0], r[1], r[0]]).collect();
        let d = Dataset::from_row_major(x, 3, base.y().to_vec()).unwrap();
        assert!(matches!(whiten(&d), Err(Error::SingularCovariance { .. })));
    }

    #[test]
    fn linear_trend_recovered_by_sir_and_dr() {
        let d = normal_dataset(2000, 6, 3, |r| r[0]);
        let s = SliceSpec::default();
        for init in [sir_direction(&d, s), dr_direction(&d, s)] {
            let init = init.unwrap();
            assert!(init.direction.as_slice()[0].abs() >= 0.99, "{:?}", init.direction);
        }
    }

    #[test]
    fn save_recovers_symmetric_link() {
        let d = normal_dataset(2000, 6, 4, |r| r[1] * r[1]);
        let init = save_direction(&d, SliceSpec::default()).unwrap();
        assert!(init.direction.as_slice()[1].abs() >= 0.95, "{:?}", init.direction);
    }

    #[test]
    fn symmetric_slices_are_low_signal_for_sir() {
        // every slice holds pairs (v, -v), so all slice means vanish
        let mut rng = SeedSpec::new(9, 0).rng();
        let mut x = Vec::new();
        for _ in 0..20 {
            let v: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
            x.extend(v.iter().copied());
            x.extend(v.iter().map(|c| -c));
        }
        let y: Vec<f64> = (0..40).map(f64::from).collect();
        let d = Dataset::from_row_major(x, 3, y).unwrap();
        let init = sir_direction(&d, SliceSpec::new(2).unwrap()).unwrap();
        assert!(init.low_signal, "eigenvalue {}", init.eigenvalue);
        let norm: f64 = init.direction.as_slice().iter().map(|c| c * c).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn deterministic_and_sign_canonical() {
        let d = normal_dataset(300, 4, 5, |r| (r[0] + r[1]).sin());
        let a = dr_direction(&d, SliceSpec::default()).unwrap();
        let b = dr_direction(&d, SliceSpec::default()).unwrap();
        assert_eq!(a, b);
        let first = a.direction.as_slice().iter().find(|c| **c != 0.0).unwrap();
        assert!(*first > 0.0);
    }

    #[test]
    fn random_direction_properties() {
        let a = random_direction(5, SeedSpec::new(1, 2)).unwrap();
        assert_eq!(a, random_direction(5, SeedSpec::new(1, 2)).unwrap());
        let mut mean = [0.0; 3];
        for r in 0..10_000 {
            let v = random_direction(3, SeedSpec::new(11, r)).unwrap();
            let norm: f64 = v.as_slice().iter().map(|c| c * c).sum::<f64>().sqrt();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
            for (m, c) in mean.iter_mut().zip(v.as_slice()) {
                *m += c / 10_000.0;
            }
        }
        assert!(mean.iter().all(|m| m.abs() < 0.05), "{mean:?}");
        assert!(random_direction(1, SeedSpec::new(0, 0)).is_err());
    }

    #[test]
    fn parse_direction_separators() {
        assert_eq!(parse_direction("1, 2\n3;4 5").unwrap(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(parse_direction("1 x").is_err());
    }
}
