//! Maximization of the empirical Hellinger correlation over the unit sphere.
//!
//! Directions are parametrized by unconstrained hyperspherical angles, so
//! both stages work in `R^{p-1}` without constraints:
//!
//! 1. simulated annealing from an initializer's direction, keeping the best
//!    point seen;
//! 2. a Nelder-Mead downhill simplex seeded at the annealing optimum.
//!
//! Maximizing the correlation is the same as minimizing the affinity
//! estimate, and both stages minimize the *unclamped* affinity. The clamped
//! correlation is flat at 0 wherever the raw affinity exceeds 1, which is
//! common far from the signal direction; the raw value still ranks those
//! directions.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::copula::{AffinityEstimate, AffinityEvaluator};
use crate::error::{Error, Result};
use crate::init::{Initializer, SliceSpec};
use crate::sphere::{angles_into, from_angles, to_angles};
use crate::types::{Dataset, FitResult, SeedSpec, SphereAngles, StageRecord, UnitDirection};

/// Cooling schedule of the annealing stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TempSchedule {
    /// `T_k = T_0 / ln(k + e)`.
    Logarithmic,
    /// `T_k = T_0 * 0.99^k`.
    Geometric,
}

impl TempSchedule {
    pub fn temperature(self, t0: f64, k: usize) -> f64 {
        match self {
            TempSchedule::Logarithmic => t0 / (k as f64 + std::f64::consts::E).ln(),
            TempSchedule::Geometric => t0 * 0.99f64.powi(k as i32),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealConfig {
    pub iterations: usize,
    /// Initial temperature, in units of the affinity estimate.
    pub initial_temp: f64,
    pub temp_schedule: TempSchedule,
    /// Proposal standard deviation in radians at `T_0`; scaled by `T_k / T_0`.
    pub step_scale: f64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            initial_temp: 0.1,
            temp_schedule: TempSchedule::Logarithmic,
            step_scale: 1.0,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::InvalidConfig("anneal.iterations must be at least 1".into()));
        }
        if !(self.initial_temp > 0.0) {
            return Err(Error::InvalidConfig("anneal.initial_temp must be positive".into()));
        }
        if !(self.step_scale > 0.0) {
            return Err(Error::InvalidConfig("anneal.step_scale must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimplexConfig {
    pub max_iterations: usize,
    /// Edge length of the initial simplex, in radians.
    pub init_step: f64,
    pub reflect: f64,
    pub expand: f64,
    pub contract: f64,
    pub shrink: f64,
    pub tol_f: f64,
    pub tol_x: f64,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            init_step: 0.1,
            reflect: 1.0,
            expand: 2.0,
            contract: 0.5,
            shrink: 0.5,
            tol_f: 1e-8,
            tol_x: 1e-8,
        }
    }
}

impl SimplexConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.init_step, self.reflect, self.expand, self.contract, self.shrink];
        if positive.iter().any(|c| !(*c > 0.0)) {
            return Err(Error::InvalidConfig("simplex coefficients must be positive".into()));
        }
        if !(self.expand > 1.0 && self.contract < 1.0 && self.shrink < 1.0) {
            return Err(Error::InvalidConfig(
                "simplex coefficients need expand > 1 > contract and shrink < 1".into(),
            ));
        }
        if self.tol_f < 0.0 || self.tol_x < 0.0 {
            return Err(Error::InvalidConfig("simplex tolerances must be non-negative".into()));
        }
        Ok(())
    }
}

/// Everything [`fit_direction`] needs besides the data and the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub anneal: AnnealConfig,
    pub simplex: SimplexConfig,
    /// Slice count for SIR/SAVE/DR; `None` picks one from the sample size.
    pub slices: Option<usize>,
    /// Independent annealing seeds tried; the best final objective wins.
    pub restarts: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            anneal: AnnealConfig::default(),
            simplex: SimplexConfig::default(),
            slices: None,
            restarts: 1,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        self.anneal.validate()?;
        self.simplex.validate()?;
        if self.restarts < 1 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if let Some(s) = self.slices {
            SliceSpec::new(s)?;
        }
        Ok(())
    }

    pub fn slice_spec(&self) -> Option<SliceSpec> {
        self.slices.map(|n_slices| SliceSpec { n_slices })
    }
}

/// Memo of objective values keyed by angle vectors rounded to `1e-9`.
#[derive(Debug, Clone, Default)]
pub struct ObjectiveCache {
    memo: HashMap<Vec<i64>, AffinityEstimate>,
    eval_count: usize,
}

impl ObjectiveCache {
    const QUANTUM: f64 = 1e-9;

    fn key(phi: &[f64]) -> Vec<i64> {
        phi.iter().map(|a| (a / Self::QUANTUM).round() as i64).collect()
    }

    /// Number of evaluations that missed the cache.
    pub fn eval_count(&self) -> usize {
        self.eval_count
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }
}

/// The fit objective bound to one dataset.
///
/// Each miss costs one projection (`O(n p)`), one sort and the
/// nearest-neighbour sweep; repeated simplex vertices hit the cache.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    data: &'a Dataset,
    evaluator: AffinityEvaluator,
    cache: ObjectiveCache,
    coef: Vec<f64>,
    z: Vec<f64>,
}

impl<'a> Objective<'a> {
    pub fn new(data: &'a Dataset) -> Result<Self> {
        Ok(Self {
            data,
            evaluator: AffinityEvaluator::new(data.y())?,
            cache: ObjectiveCache::default(),
            coef: vec![0.0; data.p()],
            z: vec![0.0; data.n()],
        })
    }

    /// Estimate at the direction with angles `phi` (any real values).
    pub fn at_angles(&mut self, phi: &[f64]) -> AffinityEstimate {
        assert_eq!(phi.len() + 1, self.data.p(), "angle count must be p - 1");
        let key = ObjectiveCache::key(phi);
        if let Some(hit) = self.cache.memo.get(&key) {
            return *hit;
        }
        angles_into(phi, &mut self.coef);
        let e = self.estimate();
        self.cache.memo.insert(key, e);
        e
    }

    /// Estimate at `dir`, bypassing the cache.
    pub fn at_direction(&mut self, dir: &UnitDirection) -> AffinityEstimate {
        self.coef.copy_from_slice(dir.as_slice());
        self.estimate()
    }

    fn estimate(&mut self) -> AffinityEstimate {
        self.cache.eval_count += 1;
        self.data.project_into(&self.coef, &mut self.z);
        self.evaluator.evaluate(&self.z)
    }

    pub fn cache(&self) -> &ObjectiveCache {
        &self.cache
    }

    pub fn evaluations(&self) -> usize {
        self.cache.eval_count
    }
}

/// Empirical Hellinger correlation between `X a` and `Y`, `a = from_angles(phi)`.
pub fn objective(d: &Dataset, phi: &SphereAngles) -> Result<f64> {
    if phi.p() != d.p() {
        return Err(Error::DimensionMismatch { left: phi.p(), right: d.p() });
    }
    Ok(Objective::new(d)?.at_angles(phi.as_slice()).h_hat)
}

/// Result of a generic maximization run.
#[derive(Debug, Clone, PartialEq)]
pub struct Maximum {
    pub point: Vec<f64>,
    pub value: f64,
    /// Best value after each iteration.
    pub trace: Vec<f64>,
}

/// Simulated annealing maximizing `f` from `start`.
///
/// Proposals add independent Gaussian noise with standard deviation
/// `step_scale * T_k / T_0` to every coordinate and are accepted by the
/// Metropolis rule at temperature `T_k`. Returns the best point seen,
/// including `start`.
pub fn anneal_with<F, R>(f: &mut F, start: &[f64], cfg: &AnnealConfig, rng: &mut R) -> Maximum
where
    F: FnMut(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let mut current = start.to_vec();
    let mut current_val = f(&current);
    let mut best = current.clone();
    let mut best_val = current_val;
    let mut trace = Vec::with_capacity(cfg.iterations);
    let mut proposal = vec![0.0; start.len()];
    for k in 0..cfg.iterations {
        let temp = cfg.temp_schedule.temperature(cfg.initial_temp, k);
        let step = cfg.step_scale * temp / cfg.initial_temp;
        for (p, c) in proposal.iter_mut().zip(&current) {
            let noise: f64 = StandardNormal.sample(rng);
            *p = c + step * noise;
        }
        let val = f(&proposal);
        let u: f64 = rng.random();
        if val >= current_val || u < ((val - current_val) / temp).exp() {
            current.copy_from_slice(&proposal);
            current_val = val;
            if val > best_val {
                best.copy_from_slice(&proposal);
                best_val = val;
            }
        }
        trace.push(best_val);
    }
    Maximum { point: best, value: best_val, trace }
}

/// Nelder-Mead downhill simplex maximizing `f` from `start`.
///
/// The initial simplex is `start` plus `start + init_step * e_i` for each
/// coordinate. Stops when both the spread of values across vertices is at
/// most `tol_f` and every vertex lies within `tol_x` (max-norm) of the best
/// one, or after `max_iterations` iterations. The best value never
/// decreases between iterations.
pub fn nelder_mead_with<F>(f: &mut F, start: &[f64], cfg: &SimplexConfig) -> Maximum
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = start.len();
    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    verts.push(start.to_vec());
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += cfg.init_step;
        verts.push(v);
    }
    let mut vals: Vec<f64> = verts.iter().map(|v| f(v)).collect();
    let mut trace = Vec::new();
    let mut order: Vec<usize> = (0..=dim).collect();

    for _ in 0..cfg.max_iterations {
        // best first; ties keep vertex order
        order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        let (best, worst, second_worst) = (order[0], order[dim], order[dim.saturating_sub(1)]);
        let spread_f = vals[best] - vals[worst];
        let spread_x = verts
            .iter()
            .flat_map(|v| v.iter().zip(&verts[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread_f <= cfg.tol_f && spread_x <= cfg.tol_x {
            break;
        }

        let mut centroid = vec![0.0; dim];
        for &i in &order[..dim] {
            for (c, x) in centroid.iter_mut().zip(&verts[i]) {
                *c += x / dim as f64;
            }
        }
        let along = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, x)| c + t * (c - x)).collect()
        };

        let reflected = along(cfg.reflect, &verts[worst]);
        let fr = f(&reflected);
        if fr > vals[best] {
            let expanded = along(cfg.reflect * cfg.expand, &verts[worst]);
            let fe = f(&expanded);
            if fe > fr {
                verts[worst] = expanded;
                vals[worst] = fe;
            } else {
                verts[worst] = reflected;
                vals[worst] = fr;
            }
        } else if fr > vals[second_worst] {
            verts[worst] = reflected;
            vals[worst] = fr;
        } else {
            let (contracted, threshold) = if fr > vals[worst] {
                (along(cfg.reflect * cfg.contract, &verts[worst]), fr)
            } else {
                (along(-cfg.contract, &verts[worst]), vals[worst])
            };
            let fc = f(&contracted);
            if fc > threshold {
                verts[worst] = contracted;
                vals[worst] = fc;
            } else {
                let anchor = verts[best].clone();
                for &i in &order[1..] {
                    for (x, a) in verts[i].iter_mut().zip(&anchor) {
                        *x = a + cfg.shrink * (*x - a);
                    }
                    vals[i] = f(&verts[i]);
                }
            }
        }
        trace.push(vals.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }

    let best = (0..=dim).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });
    Maximum { point: verts[best].clone(), value: vals[best], trace }
}

/// Annealing stage on a dataset. Returns the best angles and the empirical
/// Hellinger correlation there.
pub fn anneal(
    d: &Dataset,
    start: &UnitDirection,
    cfg: &AnnealConfig,
    seed: SeedSpec,
) -> Result<(SphereAngles, f64)> {
    cfg.validate()?;
    check_dim(d, start.p())?;
    let mut obj = Objective::new(d)?;
    let mut rng = seed.rng();
    let mut score = |phi: &[f64]| -obj.at_angles(phi).b_hat_raw;
    let m = anneal_with(&mut score, to_angles(start).as_slice(), cfg, &mut rng);
    let h = obj.at_angles(&m.point).h_hat;
    Ok((SphereAngles(m.point), h))
}

/// Simplex stage on a dataset. Returns the best angles and the empirical
/// Hellinger correlation there.
pub fn nelder_mead(
    d: &Dataset,
    start: &SphereAngles,
    cfg: &SimplexConfig,
) -> Result<(SphereAngles, f64)> {
    cfg.validate()?;
    check_dim(d, start.p())?;
    let mut obj = Objective::new(d)?;
    let mut score = |phi: &[f64]| -obj.at_angles(phi).b_hat_raw;
    let m = nelder_mead_with(&mut score, start.as_slice(), cfg);
    let h = obj.at_angles(&m.point).h_hat;
    Ok((SphereAngles(m.point), h))
}

fn check_dim(d: &Dataset, p: usize) -> Result<()> {
    if p != d.p() {
        return Err(Error::DimensionMismatch { left: p, right: d.p() });
    }
    Ok(())
}

fn record(stage: &str, e: AffinityEstimate) -> StageRecord {
    StageRecord { stage: stage.to_string(), hellinger: e.h_hat, affinity_raw: e.b_hat_raw }
}

/// Runs initializer, annealing and simplex and returns the refined direction.
///
/// The returned direction has its first nonzero coordinate positive. The
/// stage trace lists the objective at the start, after annealing and after
/// the simplex; each entry is at least as good as the one before it.
pub fn fit_direction(
    d: &Dataset,
    init: &Initializer,
    cfg: &FitConfig,
    seed: SeedSpec,
) -> Result<FitResult> {
    let start = init.start(d, cfg.slice_spec(), seed.derive(1))?;
    fit_from(d, &start.direction, init.tag(), cfg, seed)
}

/// Like [`fit_direction`] with an already computed starting direction.
pub fn fit_from(
    d: &Dataset,
    start: &UnitDirection,
    tag: crate::types::InitTag,
    cfg: &FitConfig,
    seed: SeedSpec,
) -> Result<FitResult> {
    cfg.validate()?;
    check_dim(d, start.p())?;
    let mut obj = Objective::new(d)?;
    let start_angles = to_angles(start);
    let start_est = obj.at_angles(start_angles.as_slice());

    let mut best: Option<(Vec<f64>, Vec<StageRecord>)> = None;
    for restart in 0..cfg.restarts {
        let mut rng = seed.derive(2 + restart as u64).rng();
        let mut score = |phi: &[f64]| -obj.at_angles(phi).b_hat_raw;
        let annealed = anneal_with(&mut score, start_angles.as_slice(), &cfg.anneal, &mut rng);
        let polished = nelder_mead_with(&mut score, &annealed.point, &cfg.simplex);
        let trace = vec![
            record("start", start_est),
            record("anneal", obj.at_angles(&annealed.point)),
            record("simplex", obj.at_angles(&polished.point)),
        ];
        let better = match &best {
            None => true,
            Some((_, t)) => trace[2].affinity_raw < t[2].affinity_raw,
        };
        if better {
            best = Some((polished.point, trace));
        }
    }
    let (phi, stage_trace) = best.expect("at least one restart");
    let final_est = obj.at_angles(&phi);
    let direction = from_angles(&SphereAngles(phi)).sign_canonical();
    Ok(FitResult {
        direction,
        hellinger: final_est.h_hat,
        bhattacharyya: final_est.b_hat,
        initializer: tag,
        evaluations: obj.evaluations(),
        stage_trace,
    })
}
