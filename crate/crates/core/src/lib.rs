//! Single-index sufficient dimension reduction by maximizing an empirical
//! Hellinger correlation.
//!
//! Given predictors `X` (`n x p`) and a response `Y`, [`fit_direction`] looks
//! for the unit vector `a` that makes `a^T X` and `Y` as dependent as
//! possible, with dependence measured by a rank-based nearest-neighbour
//! estimate of the Hellinger correlation. A classical inverse-regression
//! estimate (SIR, SAVE or DR) supplies the starting point; simulated
//! annealing followed by a downhill simplex refines it.
//!
//! ```
//! use hcsdr::{fit_direction, subspace_delta, FitConfig, Initializer, SeedSpec};
//! use hcsdr::sim::{generate, EtaKind, ExpParam, Model, ModelSpec, Predictors};
//!
//! let spec = ModelSpec::new(Model::III, EtaKind::Sparse, Predictors::Normal);
//! let data = generate(&spec, 200, SeedSpec::new(7, 0), ExpParam::Rate).unwrap();
//! let fit = fit_direction(&data, &Initializer::Dr, &FitConfig::default(), SeedSpec::new(7, 1)).unwrap();
//! let delta = subspace_delta(&spec.true_direction().unwrap(), &fit.direction).unwrap();
//! assert!(delta < 0.1);
//! ```
//!
//! The guide in `book/` walks through each step; its code listings are
//! compiled and run as doc-tests of this crate.

pub mod copula;
pub mod error;
pub mod eval;
pub mod init;
pub mod optim;
pub mod realdata;
pub mod sim;
pub mod sphere;
pub mod types;

pub use copula::{
    bhattacharyya_hat, closed_form_normal, h_map, hellinger_hat, nn_radii, rank_transform,
    AffinityEstimate, PseudoSample,
};
pub use error::{Error, Result};
pub use eval::{align_sign, projection_matrix, subspace_delta, test_mse, SmootherSpec};
pub use init::{Initializer, SliceSpec};
pub use optim::{fit_direction, objective, AnnealConfig, FitConfig, SimplexConfig};
pub use sphere::{from_angles, to_angles};
pub use types::{
    validate_dataset, Dataset, FitResult, InitTag, SeedSpec, SphereAngles, UnitDirection,
};

// Each chapter of the guide becomes a module so failing listings point at
// their chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/hellinger.md")]
    mod hellinger {}
    #[doc = include_str!("../../../book/src/sphere.md")]
    mod sphere {}
    #[doc = include_str!("../../../book/src/initializers.md")]
    mod initializers {}
    #[doc = include_str!("../../../book/src/optimization.md")]
    mod optimization {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/simulations.md")]
    mod simulations {}
    #[doc = include_str!("../../../book/src/real-data.md")]
    mod real_data {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
