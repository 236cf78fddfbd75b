//! Predictive evaluation of directions on a real dataset.
//!
//! The sample is split into training and test parts by a seeded permutation.
//! Predictors and response are standardized with training statistics. For
//! each initializer the raw direction and its refined version are fitted on
//! the training part, the response is smoothed on the reduced predictor with
//! a local quadratic fit, and the test MSE is reported for both.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{local_quadratic_predict, test_mse, SmootherSpec};
use crate::init::Initializer;
use crate::optim::{fit_from, FitConfig};
use crate::sim::mean_sd;
use crate::types::{Dataset, InitTag, SeedSpec, UnitDirection};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealDataConfig {
    pub target: String,
    pub drop: Vec<String>,
    pub train_size: usize,
    pub inits: Vec<InitTag>,
    pub span: f64,
    pub seed: u64,
    pub fit: FitConfig,
}

impl Default for RealDataConfig {
    fn default() -> Self {
        Self {
            target: String::new(),
            drop: Vec::new(),
            train_size: 300,
            inits: vec![InitTag::Sir, InitTag::Save, InitTag::Dr],
            span: 0.75,
            seed: 1,
            fit: FitConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub init: InitTag,
    pub mse_raw: f64,
    pub mse_hc: f64,
    pub direction_raw: UnitDirection,
    pub direction_hc: UnitDirection,
    pub hellinger_raw: f64,
    pub hellinger_hc: f64,
    /// Test points where the smoother fell back to a local mean.
    pub fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealDataReport {
    pub predictors: Vec<String>,
    pub n_train: usize,
    pub n_test: usize,
    pub methods: Vec<MethodReport>,
}

struct Standardizer {
    mean: f64,
    sd: f64,
}

impl Standardizer {
    fn fit(v: &[f64]) -> Result<Self> {
        let (mean, sd) = mean_sd(v);
        if !(sd > 0.0) {
            return Err(Error::SingularCovariance { ratio: 0.0 });
        }
        Ok(Self { mean, sd })
    }

    fn apply(&self, v: f64) -> f64 {
        (v - self.mean) / self.sd
    }
}

/// Runs the split, fit, smooth and score protocol on a numeric table.
///
/// `columns` names the columns of every row in `rows`.
pub fn evaluate_real(
    columns: &[String],
    rows: &[Vec<f64>],
    cfg: &RealDataConfig,
) -> Result<RealDataReport> {
    cfg.fit.validate()?;
    let spec = SmootherSpec::new(cfg.span)?;
    if cfg.inits.contains(&InitTag::Given) {
        return Err(Error::InvalidConfig("initializers must be sir, save, dr or random".into()));
    }
    let target = columns
        .iter()
        .position(|c| c == &cfg.target)
        .ok_or_else(|| Error::InvalidConfig(format!("target column `{}` not found", cfg.target)))?;
    if let Some(d) = cfg.drop.iter().find(|d| !columns.contains(d)) {
        return Err(Error::InvalidConfig(format!("dropped column `{d}` not found")));
    }
    let keep: Vec<usize> = (0..columns.len())
        .filter(|&j| j != target && !cfg.drop.contains(&columns[j]))
        .collect();
    let n = rows.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != columns.len()) {
        return Err(Error::ShapeMismatch(format!(
            "row {i} has {} fields, header has {}",
            r.len(),
            columns.len()
        )));
    }
    if cfg.train_size >= n {
        return Err(Error::InvalidConfig(format!(
            "train size {} leaves no test observations out of {n}",
            cfg.train_size
        )));
    }

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut SeedSpec::new(cfg.seed, 0).rng());
    let (train_idx, test_idx) = perm.split_at(cfg.train_size);

    let column = |idx: &[usize], j: usize| -> Vec<f64> { idx.iter().map(|&i| rows[i][j]).collect() };
    let x_scalers = keep
        .iter()
        .map(|&j| Standardizer::fit(&column(train_idx, j)))
        .collect::<Result<Vec<_>>>()?;
    let y_scaler = Standardizer::fit(&column(train_idx, target))?;
    let build = |idx: &[usize]| -> (Vec<f64>, Vec<f64>) {
        let x = idx
            .iter()
            .flat_map(|&i| keep.iter().zip(&x_scalers).map(move |(&j, s)| s.apply(rows[i][j])))
            .collect();
        let y = idx.iter().map(|&i| y_scaler.apply(rows[i][target])).collect();
        (x, y)
    };
    let (train_x, train_y) = build(train_idx);
    let (test_x, test_y) = build(test_idx);
    let train = Dataset::from_row_major(train_x, keep.len(), train_y)?;
    let test = Dataset::from_row_major(test_x, keep.len(), test_y)?;

    let score = |dir: &UnitDirection| -> Result<(f64, usize)> {
        let smoothed = local_quadratic_predict(&train.project(dir), train.y(), spec, &test.project(dir))?;
        Ok((test_mse(&smoothed.fitted, test.y())?, smoothed.ill_conditioned))
    };

    let methods = cfg
        .inits
        .iter()
        .map(|&tag| {
            let seed = SeedSpec::new(cfg.seed, 1).derive(tag as u64);
            let init: Option<Initializer> = tag.into();
            let init = init.expect("checked above");
            let start = init.start(&train, cfg.fit.slice_spec(), seed.derive(1))?;
            let fit = fit_from(&train, &start.direction, tag, &cfg.fit, seed)?;
            let (mse_raw, fb_raw) = score(&start.direction)?;
            let (mse_hc, fb_hc) = score(&fit.direction)?;
            Ok(MethodReport {
                init: tag,
                mse_raw,
                mse_hc,
                hellinger_raw: fit.stage_trace[0].hellinger,
                hellinger_hc: fit.hellinger,
                direction_raw: start.direction,
                direction_hc: fit.direction,
                fallbacks: fb_raw + fb_hc,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(RealDataReport {
        predictors: keep.iter().map(|&j| columns[j].clone()).collect(),
        n_train: train.n(),
        n_test: test.n(),
        methods,
    })
}
