#![allow(dead_code)]

use hcsdr::{Dataset, SeedSpec};
use rand::Rng;
use rand_distr::StandardNormal;

/// All-pairs nearest-neighbour distances.
pub fn brute_radii(pts: &[[f64; 2]]) -> Vec<f64> {
    (0..pts.len())
        .map(|i| {
            let mut best = f64::INFINITY;
            for j in 0..pts.len() {
                if i == j {
                    continue;
                }
                let dx = pts[j][0] - pts[i][0];
                let dy = pts[j][1] - pts[i][1];
                best = best.min(dx * dx + dy * dy);
            }
            best.sqrt()
        })
        .collect()
}

/// Midrank of every entry divided by `n + 1`, by counting.
pub fn counted_midranks(v: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    v.iter()
        .map(|&a| {
            let below = v.iter().filter(|&&b| b < a).count() as f64;
            let equal = v.iter().filter(|&&b| b == a).count() as f64;
            (below + (equal + 1.0) / 2.0) / (n + 1.0)
        })
        .collect()
}

/// Affinity by the textbook recipe: counted ranks, all-pairs radii.
pub fn oracle_affinity(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let pts: Vec<[f64; 2]> =
        counted_midranks(x).into_iter().zip(counted_midranks(y)).map(|(a, b)| [a, b]).collect();
    let sum: f64 = brute_radii(&pts).iter().sum();
    2.0 * ((n - 1) as f64).sqrt() / n as f64 * sum
}

pub fn bivariate_normal(n: usize, rho: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = SeedSpec::new(seed, 0).rng();
    let c = (1.0 - rho * rho).sqrt();
    (0..n)
        .map(|_| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            (a, rho * a + c * b)
        })
        .unzip()
}

pub fn gaussian_vec(p: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..p).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Standard normal predictors and a response from `link(x)`.
pub fn dataset_from(n: usize, p: usize, seed: u64, link: impl Fn(&[f64], &mut dyn FnMut() -> f64) -> f64) -> Dataset {
    let mut rng = SeedSpec::new(seed, 0).rng();
    let mut x = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let row = gaussian_vec(p, &mut rng);
        let mut noise = || rng.sample::<f64, _>(StandardNormal);
        y.push(link(&row, &mut noise));
        x.extend(row);
    }
    Dataset::from_row_major(x, p, y).unwrap()
}
