//! Subspace distance between estimated and true directions, and the tools
//! for judging a direction by prediction: a local quadratic smoother on the
//! reduced predictor and the test mean squared error.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::copula::argsort;
use crate::error::{Error, Result};
use crate::types::UnitDirection;

/// Orthogonal projection onto a one-dimensional subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix(pub DMatrix<f64>);

/// `v v^T`.
pub fn projection_matrix(v: &UnitDirection) -> ProjectionMatrix {
    let col = DVector::from_column_slice(v.as_slice());
    ProjectionMatrix(&col * col.transpose())
}

/// Spectral norm of `P_a - P_b`: 0 for equal spans, 1 for orthogonal lines.
///
/// The difference of two rank-one projections has eigenvalues `+s, -s` and
/// zeros, with `s = |sin t|` for the angle `t` between the lines; the largest
/// absolute eigenvalue is returned.
pub fn subspace_delta(a: &UnitDirection, b: &UnitDirection) -> Result<f64> {
    if a.p() != b.p() {
        return Err(Error::DimensionMismatch { left: a.p(), right: b.p() });
    }
    let diff = projection_matrix(a).0 - projection_matrix(b).0;
    let eig = SymmetricEigen::new(diff);
    let delta = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    Ok(delta.min(1.0))
}

/// Returns `estimate` or its negation, whichever points the same way as
/// `reference`. An orthogonal estimate is returned unchanged.
pub fn align_sign(estimate: &UnitDirection, reference: &UnitDirection) -> UnitDirection {
    if estimate.dot(reference) < 0.0 {
        estimate.negated()
    } else {
        estimate.clone()
    }
}

/// Local polynomial smoother settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmootherSpec {
    /// Fraction of the training sample used in each local fit.
    pub span: f64,
}

impl Default for SmootherSpec {
    fn default() -> Self {
        Self { span: 0.75 }
    }
}

impl SmootherSpec {
    /// Local polynomial degree; fixed at quadratic.
    pub const DEGREE: usize = 2;

    pub fn new(span: f64) -> Result<Self> {
        if !(span > 0.0 && span <= 1.0) {
            return Err(Error::InvalidConfig(format!("span must lie in (0, 1], got {span}")));
        }
        Ok(Self { span })
    }

    /// Neighbourhood size for a training sample of `n` points.
    pub fn neighbours(&self, n: usize) -> Result<usize> {
        let k = (self.span * n as f64).ceil() as usize;
        if self.span * (n as f64) < 6.0 {
            return Err(Error::InvalidConfig(format!(
                "span {} leaves fewer than 6 of {n} training points per local fit",
                self.span
            )));
        }
        Ok(k.min(n))
    }
}

/// Smoother predictions and how many query points fell back to a local mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoothed {
    pub fitted: Vec<f64>,
    /// Query points whose local design had rank below 3.
    pub ill_conditioned: usize,
}

/// Local quadratic regression of `train_y` on `train_z`, evaluated at each
/// query point.
///
/// Every query uses its `ceil(span * n)` nearest training points in `z`
/// (ties broken by training order) and an unweighted least-squares fit of
/// `1, (z - q), (z - q)^2`. When the local design has rank below 3 the local
/// mean is returned and counted in [`Smoothed::ill_conditioned`].
pub fn local_quadratic_predict(
    train_z: &[f64],
    train_y: &[f64],
    spec: SmootherSpec,
    query_z: &[f64],
) -> Result<Smoothed> {
    if train_z.len() != train_y.len() {
        return Err(Error::LengthMismatch { left: train_z.len(), right: train_y.len() });
    }
    let k = spec.neighbours(train_z.len())?;
    let mut ill_conditioned = 0;
    let mut fitted = Vec::with_capacity(query_z.len());
    let mut dist = vec![0.0; train_z.len()];
    for &q in query_z {
        for (d, z) in dist.iter_mut().zip(train_z) {
            *d = (z - q).abs();
        }
        let nearest = &argsort(&dist)[..k];
        let scale = nearest.iter().map(|&i| dist[i]).fold(0.0, f64::max);
        let ys = DVector::from_iterator(k, nearest.iter().map(|&i| train_y[i]));
        let local_mean = ys.mean();
        if scale == 0.0 {
            ill_conditioned += 1;
            fitted.push(local_mean);
            continue;
        }
        let design = DMatrix::from_fn(k, 3, |r, c| {
            let t = (train_z[nearest[r]] - q) / scale;
            t.powi(c as i32)
        });
        let svd = design.svd(true, true);
        let smax = svd.singular_values.max();
        let rank = svd.singular_values.iter().filter(|s| **s > 1e-10 * smax).count();
        if rank < 3 {
            ill_conditioned += 1;
            fitted.push(local_mean);
            continue;
        }
        let coef = svd.solve(&ys, 1e-12 * smax).map_err(|e| Error::ShapeMismatch(e.into()))?;
        fitted.push(coef[0]);
    }
    Ok(Smoothed { fitted, ill_conditioned })
}

/// Mean of squared differences.
pub fn test_mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch { left: pred.len(), right: truth.len() });
    }
    if pred.is_empty() {
        return Err(Error::TooFewRows { got: 0, min: 1 });
    }
    Ok(pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / pred.len() as f64)
}
