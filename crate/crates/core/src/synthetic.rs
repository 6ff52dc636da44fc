//! Synthetic datasets used by the demos, tests and benchmarks.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::config::{LambdaMode, LessConfig};
use crate::data::Dataset;
use crate::error::Result;
use crate::estimators::Estimator;
use crate::less::{fit, LessModel};
use crate::scalar::Scalar;
use crate::seed::rng_from_seed;

/// Input range of the one-dimensional sinusoid: two full periods.
pub const SINUSOID_DOMAIN: (f64, f64) = (0.0, 4.0 * std::f64::consts::PI);
pub const SINUSOID_NOISE_STD: f64 = 0.25;
pub const SINUSOID_SAMPLES: usize = 200;

/// The noise-free sinusoid.
pub fn sinusoid_function(x: f64) -> f64 {
    x.sin()
}

fn to_dataset<T: Scalar>(x: Vec<f64>, y: Vec<f64>, p: usize) -> Dataset<T> {
    let n = y.len();
    let x = Array2::from_shape_vec((n, p), x.into_iter().map(T::lit).collect())
        .expect("generator shapes agree");
    let y = Array1::from_iter(y.into_iter().map(T::lit));
    Dataset::new(x, y).expect("generated data is finite and non-empty")
}

fn normal() -> Normal<f64> {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// `n` draws of `x ~ U(SINUSOID_DOMAIN)`, `y = sin(x) + noise_std * N(0, 1)`.
pub fn sinusoid<T: Scalar>(n: usize, noise_std: f64, seed: u64) -> Dataset<T> {
    let mut rng = rng_from_seed(seed);
    let u = Uniform::new(SINUSOID_DOMAIN.0, SINUSOID_DOMAIN.1).expect("valid range");
    let xs: Vec<f64> = (0..n).map(|_| u.sample(&mut rng)).collect();
    let ys = xs
        .iter()
        .map(|&x| sinusoid_function(x) + noise_std * normal().sample(&mut rng))
        .collect();
    to_dataset(xs, ys, 1)
}

/// Dense grid over the sinusoid domain, endpoints included.
pub fn sinusoid_grid(points: usize) -> Vec<f64> {
    let (a, b) = SINUSOID_DOMAIN;
    match points {
        0 => Vec::new(),
        1 => vec![(a + b) / 2.0],
        _ => (0..points)
            .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// `y = x beta + b + noise_std * N(0, 1)` with standard normal inputs and
/// coefficients. Returns the data and the true coefficients (slopes, then
/// intercept).
pub fn random_linear<T: Scalar>(n: usize, p: usize, noise_std: f64, seed: u64) -> (Dataset<T>, Vec<f64>) {
    let mut rng = rng_from_seed(seed);
    let nd = normal();
    let coef: Vec<f64> = (0..=p).map(|_| nd.sample(&mut rng)).collect();
    let mut xs = Vec::with_capacity(n * p);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..p).map(|_| nd.sample(&mut rng)).collect();
        let y = row.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>()
            + coef[p]
            + noise_std * nd.sample(&mut rng);
        xs.extend(row);
        ys.push(y);
    }
    (to_dataset(xs, ys, p), coef)
}

/// Centers and linear rules of the three-regime problem.
const REGIMES: [([f64; 2], [f64; 3]); 3] = [
    ([-6.0, 0.0], [2.0, -1.0, 3.0]),
    ([0.0, 6.0], [-3.0, 0.5, -2.0]),
    ([6.0, 0.0], [0.5, 2.5, 1.0]),
];

/// Two-dimensional data drawn around three well-separated centers, each
/// with its own linear rule `y = a x1 + b x2 + c + noise`.
pub fn piecewise_linear<T: Scalar>(n: usize, noise_std: f64, seed: u64) -> Dataset<T> {
    let mut rng = rng_from_seed(seed);
    let nd = normal();
    let mut xs = Vec::with_capacity(2 * n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let (center, rule) = REGIMES[i % REGIMES.len()];
        let x1 = center[0] + nd.sample(&mut rng);
        let x2 = center[1] + nd.sample(&mut rng);
        ys.push(rule[0] * x1 + rule[1] * x2 + rule[2] + noise_std * nd.sample(&mut rng));
        xs.push(x1);
        xs.push(x2);
    }
    to_dataset(xs, ys, 2)
}

/// Smooth nonlinear regression data with standard normal inputs:
/// `y = sum_i sin(x_i) + 0.1 sum_i x_i^2 / p + 0.1 N(0, 1)`.
pub fn smooth_nonlinear<T: Scalar>(n: usize, p: usize, seed: u64) -> Dataset<T> {
    let mut rng = rng_from_seed(seed);
    let nd = normal();
    let mut xs = Vec::with_capacity(n * p);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..p).map(|_| nd.sample(&mut rng)).collect();
        let y = row.iter().map(|v| v.sin()).sum::<f64>()
            + 0.1 * row.iter().map(|v| v * v).sum::<f64>() / p as f64
            + 0.1 * nd.sample(&mut rng);
        xs.extend(row);
        ys.push(y);
    }
    to_dataset(xs, ys, p)
}

/// Uniform draws in `[-1, 1]^p`, handy for property tests.
pub fn uniform_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize) -> Array2<f64> {
    let u = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    Array2::from_shape_fn((n, p), |_| u.sample(rng))
}

/// One local line of the sinusoid demo, in original units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSegment {
    pub replication: usize,
    pub subset: usize,
    pub x_start: f64,
    pub y_start: f64,
    pub x_end: f64,
    pub y_end: f64,
}

/// One `(m, r)` cell of the sinusoid demo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoCell {
    pub m: usize,
    pub r: usize,
    /// Rows of `(x, y_true, y_noisy, y_pred)` over the evaluation grid.
    pub rows: Vec<[f64; 4]>,
    /// Mean squared error of the prediction against the noise-free function.
    pub clean_mse: f64,
    pub segments: Vec<LocalSegment>,
}

/// Configuration of a demo cell: `m` random-anchor subsets of `k = n / m`
/// rows each, `r` replications, default weighting, linear learners.
pub fn demo_config(m: usize, r: usize, seed: u64) -> LessConfig {
    LessConfig {
        frac_of_samples: 1.0 / m.max(1) as f64,
        n_replications: r,
        lambda: LambdaMode::DefaultMMinus2,
        seed,
        ..LessConfig::default()
    }
}

/// Fits one cell on `train` and evaluates it over `grid_points` inputs.
/// `seed` drives both the fit and the noise added to the grid targets.
pub fn sinusoid_demo_cell(
    train: &Dataset<f64>,
    m: usize,
    r: usize,
    grid_points: usize,
    seed: u64,
) -> Result<DemoCell> {
    let model = fit(train, &demo_config(m, r, seed))?;
    let mut rng = rng_from_seed(seed ^ 0x6e6f_6973_65);
    let nd = normal();
    let mut rows = Vec::with_capacity(grid_points);
    let mut sq = 0.0;
    for x in sinusoid_grid(grid_points) {
        let truth = sinusoid_function(x);
        let pred = model.predict(&[x])?;
        sq += (pred - truth) * (pred - truth);
        rows.push([x, truth, truth + SINUSOID_NOISE_STD * nd.sample(&mut rng), pred]);
    }
    let clean_mse = if rows.is_empty() { 0.0 } else { sq / rows.len() as f64 };
    Ok(DemoCell {
        m,
        r,
        rows,
        clean_mse,
        segments: local_segments(&model, train),
    })
}

/// Each local line of the first replication, drawn across the x-range of
/// the training rows nearest to its centroid.
fn local_segments(model: &LessModel<f64>, train: &Dataset<f64>) -> Vec<LocalSegment> {
    let Some(rep) = model.replications.first() else {
        return Vec::new();
    };
    let norm = &model.norm;
    let xs: Vec<f64> = train.x().column(0).to_vec();
    let m = rep.n_subsets();
    // rows owned by each subset: nearest centroid in normalized space
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for &x in &xs {
        let xn = (x - norm.x_mean[0]) / norm.x_std[0];
        let j = (0..m)
            .min_by(|&a, &b| {
                (xn - rep.centroids[a][0])
                    .abs()
                    .total_cmp(&(xn - rep.centroids[b][0]).abs())
            })
            .unwrap_or(0);
        lo[j] = lo[j].min(x);
        hi[j] = hi[j].max(x);
    }
    rep.locals
        .iter()
        .enumerate()
        .filter_map(|(j, local)| {
            let Estimator::Linear(v) = local else { return None };
            if !lo[j].is_finite() {
                return None;
            }
            let line = |x: f64| {
                let xn = (x - norm.x_mean[0]) / norm.x_std[0];
                norm.denormalize_y(v.coefficients[0] * xn + v.coefficients[1])
            };
            Some(LocalSegment {
                replication: 0,
                subset: j,
                x_start: lo[j],
                y_start: line(lo[j]),
                x_end: hi[j],
                y_end: line(hi[j]),
            })
        })
        .collect()
}
