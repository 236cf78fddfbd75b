//! Synthetic single-index models and the Monte-Carlo experiment grid.
//!
//! Three link functions are available, each with additive `N(0, 0.2^2)` noise:
//!
//! | model | response            | sparse `eta`          |
//! |-------|---------------------|-----------------------|
//! | I     | `(eta^T x)^2 + e`   | `(1, -1, 0, ..., 0)`  |
//! | II    | `exp(eta^T x) + e`  | `(1, 1, 1, 1, 1, 0, ..., 0)` |
//! | III   | `5 sin(eta^T x) + e`| `(1, 1, 0, ..., 0)`   |
//!
//! Predictors are ten-dimensional, either standard normal or a mix of
//! skewed and heavy-tailed marginals followed by five standard normals.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp, Normal, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::subspace_delta;
use crate::init::Initializer;
use crate::optim::{fit_from, FitConfig};
use crate::types::{mix_all, Dataset, InitTag, SeedSpec, UnitDirection};

/// Number of predictors in every synthetic model.
pub const P: usize = 10;

/// Standard deviation of the additive noise.
pub const NOISE_SD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Model {
    I,
    II,
    III,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::I, Model::II, Model::III];

    fn id(self) -> u64 {
        match self {
            Model::I => 1,
            Model::II => 2,
            Model::III => 3,
        }
    }

    /// Link function `g(t)` without noise.
    pub fn link(self, t: f64) -> f64 {
        match self {
            Model::I => t * t,
            Model::II => t.exp(),
            Model::III => 5.0 * t.sin(),
        }
    }

    /// Sparse `eta`, unnormalized.
    pub fn sparse_eta(self) -> Vec<f64> {
        let head: &[f64] = match self {
            Model::I => &[1.0, -1.0],
            Model::II => &[1.0, 1.0, 1.0, 1.0, 1.0],
            Model::III => &[1.0, 1.0],
        };
        let mut eta = vec![0.0; P];
        eta[..head.len()].copy_from_slice(head);
        eta
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::I => "I",
            Model::II => "II",
            Model::III => "III",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Model::I),
            "II" | "2" => Ok(Model::II),
            "III" | "3" => Ok(Model::III),
            _ => Err(Error::UnknownModel(s.to_string())),
        }
    }
}

/// Dense unit-norm `eta` used to check that sparsity does not matter.
pub fn nonsparse_eta(model: Model) -> UnitDirection {
    let v: Vec<f64> = match model {
        Model::I => vec![1.0; P],
        Model::II => vec![1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0, 1.0, 1.0, -1.0],
        Model::III => vec![3.0, -1.0, 4.0, -2.0, -4.0, 5.0, 1.0, -3.0, -5.0, 2.0],
    };
    UnitDirection::new(v).expect("nonzero")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Predictors {
    Normal,
    NonNormal,
}

impl Predictors {
    fn id(self) -> u64 {
        match self {
            Predictors::Normal => 1,
            Predictors::NonNormal => 2,
        }
    }
}

impl fmt::Display for Predictors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Predictors::Normal => "normal",
            Predictors::NonNormal => "nonnormal",
        })
    }
}

impl FromStr for Predictors {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "normal" => Ok(Predictors::Normal),
            "nonnormal" => Ok(Predictors::NonNormal),
            other => Err(Error::InvalidConfig(format!("unknown predictor kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaKind {
    Sparse,
    NonSparse,
}

impl EtaKind {
    fn id(self) -> u64 {
        match self {
            EtaKind::Sparse => 1,
            EtaKind::NonSparse => 2,
        }
    }
}

impl fmt::Display for EtaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EtaKind::Sparse => "sparse",
            EtaKind::NonSparse => "nonsparse",
        })
    }
}

impl FromStr for EtaKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "sparse" => Ok(EtaKind::Sparse),
            "nonsparse" | "dense" => Ok(EtaKind::NonSparse),
            other => Err(Error::InvalidConfig(format!("unknown eta kind `{other}`"))),
        }
    }
}

/// How `Exp(k)` in the non-normal design is read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpParam {
    /// `k` is the rate: density `k exp(-k x)`, mean `1 / k`.
    #[default]
    Rate,
    /// `k` is the mean.
    Mean,
}

/// Data-generating process of one experiment cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model: Model,
    /// Index vector as used in the link, not necessarily unit length.
    pub eta: Vec<f64>,
    pub noise_sd: f64,
    pub predictors: Predictors,
}

impl ModelSpec {
    pub fn new(model: Model, eta_kind: EtaKind, predictors: Predictors) -> Self {
        let eta = match eta_kind {
            EtaKind::Sparse => model.sparse_eta(),
            EtaKind::NonSparse => nonsparse_eta(model).into_vec(),
        };
        Self { model, eta, noise_sd: NOISE_SD, predictors }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eta.iter().all(|c| *c == 0.0) {
            return Err(Error::InvalidConfig("eta must be nonzero".into()));
        }
        if !(self.noise_sd > 0.0) {
            return Err(Error::InvalidConfig("noise_sd must be positive".into()));
        }
        Ok(())
    }

    /// `eta / |eta|`.
    pub fn true_direction(&self) -> Result<UnitDirection> {
        UnitDirection::new(self.eta.clone())
    }
}

/// Draws an `n x 10` row-major predictor matrix.
pub fn gen_predictors(kind: Predictors, n: usize, seed: SeedSpec, exp: ExpParam) -> Vec<f64> {
    let mut rng = seed.rng();
    let mut x = Vec::with_capacity(n * P);
    match kind {
        Predictors::Normal => {
            x.extend((0..n * P).map(|_| rng.sample::<f64, _>(StandardNormal)));
        }
        Predictors::NonNormal => {
            let exp_dist = |k: f64| match exp {
                ExpParam::Rate => Exp::new(k),
                ExpParam::Mean => Exp::new(1.0 / k),
            }
            .expect("positive rate");
            let e2 = exp_dist(2.0);
            let e4 = exp_dist(4.0);
            let chi5 = ChiSquared::new(5.0).expect("positive df");
            let t15 = StudentT::new(15.0).expect("positive df");
            let t3 = StudentT::new(3.0).expect("positive df");
            for _ in 0..n {
                x.push(e2.sample(&mut rng));
                x.push(e4.sample(&mut rng));
                x.push(chi5.sample(&mut rng));
                x.push(t15.sample(&mut rng));
                x.push(t3.sample(&mut rng));
                x.extend((0..5).map(|_| rng.sample::<f64, _>(StandardNormal)));
            }
        }
    }
    x
}

/// Response `g(eta^T x) + e` for each row of the row-major `x`.
pub fn gen_response(x: &[f64], spec: &ModelSpec, seed: SeedSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let p = spec.eta.len();
    if x.len() % p != 0 {
        return Err(Error::ShapeMismatch(format!(
            "buffer of length {} is not a multiple of eta length {p}",
            x.len()
        )));
    }
    let noise = Normal::new(0.0, spec.noise_sd)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut rng = seed.rng();
    Ok(x.chunks_exact(p)
        .map(|row| {
            let t: f64 = row.iter().zip(&spec.eta).map(|(a, b)| a * b).sum();
            spec.model.link(t) + noise.sample(&mut rng)
        })
        .collect())
}

/// Draws a full dataset; predictors and noise use separate streams of `seed`.
pub fn generate(spec: &ModelSpec, n: usize, seed: SeedSpec, exp: ExpParam) -> Result<Dataset> {
    let x = gen_predictors(spec.predictors, n, seed.derive(0), exp);
    let y = gen_response(&x, spec, seed.derive(1))?;
    Dataset::from_row_major(x, P, y)
}

/// Seed of the dataset for one replication of one `(model, predictors,
/// eta, n)` cell. Shared across initializers.
pub fn data_seed(
    master_seed: u64,
    model: Model,
    predictors: Predictors,
    eta: EtaKind,
    n: usize,
    rep: usize,
) -> SeedSpec {
    let cell = mix_all(&[master_seed, model.id(), predictors.id(), eta.id(), n as u64]);
    SeedSpec::new(cell, rep as u64)
}

fn init_id(tag: InitTag) -> u64 {
    match tag {
        InitTag::Sir => 1,
        InitTag::Save => 2,
        InitTag::Dr => 3,
        InitTag::Random => 4,
        InitTag::Given => 5,
    }
}

/// Seed of the optimizer for one initializer on a replication's dataset.
pub fn fit_seed(data: SeedSpec, init: InitTag) -> SeedSpec {
    data.derive(100 + init_id(init))
}

/// The Monte-Carlo design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub models: Vec<Model>,
    pub predictors: Vec<Predictors>,
    pub eta: EtaKind,
    pub inits: Vec<InitTag>,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    pub exp_param: ExpParam,
    pub fit: FitConfig,
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        Self {
            models: Model::ALL.to_vec(),
            predictors: vec![Predictors::Normal],
            eta: EtaKind::Sparse,
            inits: vec![InitTag::Sir, InitTag::Save, InitTag::Dr],
            sample_sizes: vec![100, 200, 400],
            replications: 100,
            master_seed: 20_240_601,
            exp_param: ExpParam::Rate,
            fit: FitConfig::default(),
        }
    }
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::InvalidConfig("replications must be at least 1".into()));
        }
        if self.models.is_empty() || self.predictors.is_empty() || self.inits.is_empty() {
            return Err(Error::InvalidConfig("grid has an empty axis".into()));
        }
        if self.inits.contains(&InitTag::Given) {
            return Err(Error::InvalidConfig("a fixed direction cannot seed simulations".into()));
        }
        if let Some(n) = self.sample_sizes.iter().find(|n| **n < 20) {
            return Err(Error::InvalidConfig(format!("sample size {n} is below 20")));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::InvalidConfig("no sample sizes".into()));
        }
        self.fit.validate()
    }
}

/// Outcome of one initializer on one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub model: Model,
    pub predictors: Predictors,
    pub eta: EtaKind,
    pub init: InitTag,
    pub n: usize,
    pub rep: usize,
    pub delta_raw: f64,
    pub delta_hc: f64,
    pub hellinger: f64,
    pub evaluations: usize,
    pub runtime_secs: f64,
    /// Set when the replication failed; `delta_*` are NaN then.
    pub error: Option<String>,
}

/// Aggregates for one `(model, predictors, init, n)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub model: Model,
    pub predictors: Predictors,
    pub eta: EtaKind,
    pub init: InitTag,
    pub n: usize,
    pub mean_raw: f64,
    pub sd_raw: f64,
    pub mean_hc: f64,
    pub sd_hc: f64,
    /// Successful replications.
    pub reps: usize,
    pub failures: usize,
    pub mean_runtime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub cells: Vec<CellSummary>,
    pub records: Vec<ReplicationRecord>,
}

/// Mean and sample standard deviation, summed in the given order.
pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

fn run_replication(
    grid: &ExperimentGrid,
    model: Model,
    predictors: Predictors,
    n: usize,
    rep: usize,
) -> Vec<ReplicationRecord> {
    let spec = ModelSpec::new(model, grid.eta, predictors);
    let seed = data_seed(grid.master_seed, model, predictors, grid.eta, n, rep);
    let record = |init: InitTag| ReplicationRecord {
        model,
        predictors,
        eta: grid.eta,
        init,
        n,
        rep,
        delta_raw: f64::NAN,
        delta_hc: f64::NAN,
        hellinger: f64::NAN,
        evaluations: 0,
        runtime_secs: 0.0,
        error: None,
    };
    let data = spec
        .true_direction()
        .and_then(|truth| Ok((truth, generate(&spec, n, seed, grid.exp_param)?)));
    let (truth, data) = match data {
        Ok(v) => v,
        Err(e) => {
            return grid
                .inits
                .iter()
                .map(|&i| ReplicationRecord { error: Some(e.to_string()), ..record(i) })
                .collect()
        }
    };
    grid.inits
        .iter()
        .map(|&tag| {
            let started = Instant::now();
            let seed = fit_seed(seed, tag);
            let outcome = (|| {
                let init: Option<Initializer> = tag.into();
                let init = init.expect("validated grid has no fixed directions");
                let start = init.start(&data, grid.fit.slice_spec(), seed.derive(1))?;
                let fit = fit_from(&data, &start.direction, tag, &grid.fit, seed)?;
                Ok::<_, Error>((
                    subspace_delta(&truth, &start.direction)?,
                    subspace_delta(&truth, &fit.direction)?,
                    fit,
                ))
            })();
            let runtime_secs = started.elapsed().as_secs_f64();
            match outcome {
                Ok((delta_raw, delta_hc, fit)) => ReplicationRecord {
                    delta_raw,
                    delta_hc,
                    hellinger: fit.hellinger,
                    evaluations: fit.evaluations,
                    runtime_secs,
                    ..record(tag)
                },
                Err(e) => {
                    log::warn!(
                        "replication failed (model {model}, {predictors}, {tag}, n={n}, rep={rep}, seed={seed:?}): {e}"
                    );
                    ReplicationRecord { runtime_secs, error: Some(e.to_string()), ..record(tag) }
                }
            }
        })
        .collect()
}

/// Runs every cell of the grid. Replications run in parallel on the current
/// rayon pool; results do not depend on scheduling.
pub fn run_experiment(grid: &ExperimentGrid) -> Result<ExperimentSummary> {
    grid.validate()?;
    let mut jobs = Vec::new();
    for &model in &grid.models {
        for &predictors in &grid.predictors {
            for &n in &grid.sample_sizes {
                for rep in 0..grid.replications {
                    jobs.push((model, predictors, n, rep));
                }
            }
        }
    }
    let records: Vec<ReplicationRecord> = jobs
        .par_iter()
        .flat_map_iter(|&(m, pr, n, rep)| run_replication(grid, m, pr, n, rep))
        .collect();

    let mut cells = Vec::new();
    for &model in &grid.models {
        for &predictors in &grid.predictors {
            for &init in &grid.inits {
                for &n in &grid.sample_sizes {
                    let in_cell: Vec<&ReplicationRecord> = records
                        .iter()
                        .filter(|r| {
                            r.model == model && r.predictors == predictors && r.init == init && r.n == n
                        })
                        .collect();
                    let ok: Vec<&&ReplicationRecord> =
                        in_cell.iter().filter(|r| r.error.is_none()).collect();
                    let failures = in_cell.len() - ok.len();
                    if failures * 20 > in_cell.len() {
                        log::warn!(
                            "{failures} of {} replications failed for model {model}, {predictors}, {init}, n={n}",
                            in_cell.len()
                        );
                    }
                    let raw: Vec<f64> = ok.iter().map(|r| r.delta_raw).collect();
                    let hc: Vec<f64> = ok.iter().map(|r| r.delta_hc).collect();
                    let rt: Vec<f64> = ok.iter().map(|r| r.runtime_secs).collect();
                    let (mean_raw, sd_raw) = mean_sd(&raw);
                    let (mean_hc, sd_hc) = mean_sd(&hc);
                    cells.push(CellSummary {
                        model,
                        predictors,
                        eta: grid.eta,
                        init,
                        n,
                        mean_raw,
                        sd_raw,
                        mean_hc,
                        sd_hc,
                        reps: ok.len(),
                        failures,
                        mean_runtime: mean_sd(&rt).0,
                    });
                }
            }
        }
    }
    Ok(ExperimentSummary { cells, records })
}

/// Round-trip exact representation with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

impl ExperimentSummary {
    /// One row per cell. Contains no timing data, so identical grids give
    /// byte-identical output.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "model,predictors,eta,init,n,mean_raw,sd_raw,mean_hc,sd_hc,reps,failures\n",
        );
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                c.model,
                c.predictors,
                c.eta,
                c.init,
                c.n,
                fmt17(c.mean_raw),
                fmt17(c.sd_raw),
                fmt17(c.mean_hc),
                fmt17(c.sd_hc),
                c.reps,
                c.failures
            );
        }
        out
    }

    /// Per-replication `delta` values, for box plots.
    pub fn records_csv(&self) -> String {
        let mut out =
            String::from("model,predictors,eta,init,n,rep,delta_raw,delta_hc,hellinger,evaluations,error\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.model,
                r.predictors,
                r.eta,
                r.init,
                r.n,
                r.rep,
                fmt17(r.delta_raw),
                fmt17(r.delta_hc),
                fmt17(r.hellinger),
                r.evaluations,
                r.error.as_deref().unwrap_or("").replace(',', ";")
            );
        }
        out
    }

    /// Human-readable table in the `mean (sd)` layout, 4 decimals.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<6}{:<11}{:<10}{:<7}{:>6}  {:>18}  {:>18}  {:>5}",
            "model", "predictors", "eta", "init", "n", "raw", "HC", "fail"
        );
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{:<6}{:<11}{:<10}{:<7}{:>6}  {:>8.4} ({:>7.4})  {:>8.4} ({:>7.4})  {:>5}",
                c.model.to_string(),
                c.predictors.to_string(),
                c.eta.to_string(),
                c.init.label(),
                c.n,
                c.mean_raw,
                c.sd_raw,
                c.mean_hc,
                c.sd_hc,
                c.failures
            );
        }
        out
    }

    pub fn cell(&self, model: Model, predictors: Predictors, init: InitTag, n: usize) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.model == model && c.predictors == predictors && c.init == init && c.n == n)
    }
}
