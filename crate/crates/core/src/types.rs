//! Shared domain types: validated datasets, unit directions, angle tuples,
//! fit results and seeding.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest sample size accepted for fitting.
pub const MIN_ROWS: usize = 3;

/// A predictor matrix paired with a response vector.
///
/// The predictor matrix is stored row-major by observation: row `i` holds the
/// `p` predictor values of observation `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
    n: usize,
    p: usize,
}

impl Dataset {
    /// Builds a dataset from a row-major `n x p` buffer and a length-`n` response.
    pub fn from_row_major(x: Vec<f64>, p: usize, y: Vec<f64>) -> Result<Self> {
        if p < 2 {
            return Err(Error::TooFewCols(p));
        }
        if x.len() % p != 0 {
            return Err(Error::ShapeMismatch(format!(
                "buffer of length {} is not a multiple of p = {p}",
                x.len()
            )));
        }
        let n = x.len() / p;
        if y.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "x has {n} rows but y has length {}",
                y.len()
            )));
        }
        if n < MIN_ROWS {
            return Err(Error::TooFewRows { got: n, min: MIN_ROWS });
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / p, col: pos % p });
        }
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, col: p });
        }
        Ok(Self { x, y, n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Row-major predictor buffer.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.x.chunks_exact(self.p)
    }

    /// Projects every observation onto `dir`, i.e. computes `X a`.
    pub fn project(&self, dir: &UnitDirection) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.project_into(dir.as_slice(), &mut out);
        out
    }

    pub(crate) fn project_into(&self, coef: &[f64], out: &mut [f64]) {
        debug_assert_eq!(coef.len(), self.p);
        for (o, row) in out.iter_mut().zip(self.rows()) {
            *o = row.iter().zip(coef).map(|(a, b)| a * b).sum();
        }
    }

    /// Keeps the observations at `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        let mut x = Vec::with_capacity(idx.len() * self.p);
        let mut y = Vec::with_capacity(idx.len());
        for &i in idx {
            x.extend_from_slice(self.row(i));
            y.push(self.y[i]);
        }
        Self::from_row_major(x, self.p, y)
    }
}

/// Validates a matrix given as rows and a response vector.
pub fn validate_dataset(x: &[Vec<f64>], y: &[f64]) -> Result<Dataset> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "x has {n} rows but y has length {}",
            y.len()
        )));
    }
    if n < MIN_ROWS {
        return Err(Error::TooFewRows { got: n, min: MIN_ROWS });
    }
    let p = x[0].len();
    if let Some(i) = x.iter().position(|r| r.len() != p) {
        return Err(Error::ShapeMismatch(format!(
            "row {i} has {} columns, expected {p}",
            x[i].len()
        )));
    }
    Dataset::from_row_major(x.concat(), p, y.to_vec())
}

/// A direction on the unit sphere of `R^p`. Always stored normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitDirection(Vec<f64>);

impl UnitDirection {
    const MIN_NORM: f64 = 1e-8;
    const MAX_NORM: f64 = 1e8;

    /// Normalizes `v`. Inputs whose norm lies outside `[1e-8, 1e8]`, or that
    /// contain non-finite values, are rejected.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        let norm = l2_norm(&v);
        if !norm.is_finite() || !(Self::MIN_NORM..=Self::MAX_NORM).contains(&norm) {
            return Err(Error::DegenerateDirection(norm));
        }
        Ok(Self(v.into_iter().map(|c| c / norm).collect()))
    }

    /// The `k`-th standard basis vector of `R^p`.
    pub fn axis(p: usize, k: usize) -> Self {
        let mut v = vec![0.0; p];
        v[k] = 1.0;
        Self(v)
    }

    pub fn p(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    /// Flips the sign so that the first nonzero coordinate is positive.
    pub fn sign_canonical(self) -> Self {
        match self.0.iter().find(|c| **c != 0.0) {
            Some(c) if *c < 0.0 => self.negated(),
            _ => self,
        }
    }
}

impl TryFrom<Vec<f64>> for UnitDirection {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<UnitDirection> for Vec<f64> {
    fn from(d: UnitDirection) -> Self {
        d.0
    }
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Hyperspherical angles `(phi_1, ..., phi_{p-1})` of a unit direction.
///
/// Canonical angles have `phi_1..phi_{p-2}` in `[0, pi]` and the last angle in
/// `[0, 2 pi)`. Optimizers are free to move angles outside these ranges; the
/// conversion back to a direction is periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereAngles(pub Vec<f64>);

impl SphereAngles {
    /// Dimension of the ambient space, `p = len + 1`.
    pub fn p(&self) -> usize {
        self.0.len() + 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Which starting direction a fit used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitTag {
    Sir,
    Save,
    Dr,
    Random,
    /// A user-supplied direction.
    Given,
}

impl InitTag {
    pub fn as_str(self) -> &'static str {
        match self {
            InitTag::Sir => "sir",
            InitTag::Save => "save",
            InitTag::Dr => "dr",
            InitTag::Random => "random",
            InitTag::Given => "given",
        }
    }

    /// Column label used in result tables, e.g. `SIR`.
    pub fn label(self) -> &'static str {
        match self {
            InitTag::Sir => "SIR",
            InitTag::Save => "SAVE",
            InitTag::Dr => "DR",
            InitTag::Random => "RANDOM",
            InitTag::Given => "GIVEN",
        }
    }
}

impl fmt::Display for InitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sir" => Ok(InitTag::Sir),
            "save" => Ok(InitTag::Save),
            "dr" => Ok(InitTag::Dr),
            "random" => Ok(InitTag::Random),
            "given" | "file" => Ok(InitTag::Given),
            other => Err(Error::InvalidConfig(format!("unknown initializer `{other}`"))),
        }
    }
}

/// Best objective recorded at the end of one optimization stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    /// Empirical Hellinger correlation at the stage's best point.
    pub hellinger: f64,
    /// Unclamped affinity estimate at the same point (the quantity minimized).
    pub affinity_raw: f64,
}

/// Outcome of the full initializer, annealing and simplex pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub direction: UnitDirection,
    pub hellinger: f64,
    /// Clamped affinity; `hellinger == h_map(bhattacharyya)`.
    pub bhattacharyya: f64,
    pub initializer: InitTag,
    /// Number of objective evaluations (cache misses) across all stages.
    pub evaluations: usize,
    pub stage_trace: Vec<StageRecord>,
}

/// Seed of one Monte-Carlo replication.
///
/// Each `(master_seed, replication_index)` pair selects an independent
/// ChaCha8 stream, so replications can run in any order or in parallel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replication_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, replication_index: u64) -> Self {
        Self { master_seed, replication_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.replication_index);
        rng
    }

    /// Derives an independent seed for a named purpose within the same
    /// replication, e.g. noise versus annealing proposals.
    pub fn derive(&self, tag: u64) -> Self {
        Self {
            master_seed: mix64(self.master_seed ^ mix64(tag.wrapping_add(0x9e37_79b9_7f4a_7c15))),
            replication_index: self.replication_index,
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one seed.
pub fn mix_all(words: &[u64]) -> u64 {
    words.iter().fold(0x6a09_e667_f3bc_c909, |acc, w| mix64(acc ^ mix64(*w)))
}
