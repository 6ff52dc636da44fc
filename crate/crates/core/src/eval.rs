//! Nested cross-validation, hyperparameter grids and the experiment drivers.
//!
//! All errors are measured in the normalized output units of the training
//! split: predictions and targets are both standardized with the statistics
//! of the rows the model was fit on.

use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{
    Ablation, GlobalEstimator, LambdaMode, LessConfig, LocalEstimator, SubsetStrategy,
};
use crate::data::Dataset;
use crate::error::{LessError, Result};
use crate::less::fit;
use crate::scalar::Scalar;
use crate::seed::{derive_rng, derive_seed, STREAM_CV_FIT, STREAM_FOLDS};

pub const OUTER_FOLDS: usize = 5;
pub const INNER_FOLDS: usize = 4;

/// Subset-size fractions searched by every tuned experiment.
pub const FRAC_GRID: [f64; 4] = [0.01, 0.05, 0.10, 0.20];
/// Fixed weighting strengths searched besides the `m^-2` default.
pub const LAMBDA_GRID: [f64; 2] = [0.01, 0.1];
/// Cluster counts searched by the clustered variants.
pub const CLUSTER_GRID: [usize; 4] = [5, 10, 20, 100];
pub const DEFAULT_TREE_MIN_SPLIT: usize = 2;
pub const DEFAULT_FOREST_SIZE: usize = 100;

/// Mean squared error.
pub fn mse<T: Scalar>(yhat: &[T], y: &[T]) -> Result<T> {
    if yhat.len() != y.len() {
        return Err(LessError::DimensionMismatch {
            expected: y.len(),
            found: yhat.len(),
        });
    }
    if y.is_empty() {
        return Err(LessError::EmptyDataset("mse of empty vectors".into()));
    }
    let s = yhat
        .iter()
        .zip(y)
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
    Ok(s / T::from_count(y.len()))
}

/// Outer folds and, for each outer fold, inner folds of its training side.
/// All indices refer to rows of the original dataset and every list is sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n: usize,
    pub seed: u64,
    pub outer: Vec<Vec<usize>>,
    pub inner: Vec<Vec<Vec<usize>>>,
}

fn complement(n_rows: &[usize], held: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(n_rows.len() - held.len());
    let mut h = held.iter().peekable();
    for &i in n_rows {
        if h.peek() == Some(&&i) {
            h.next();
        } else {
            out.push(i);
        }
    }
    out
}

/// Shuffles `rows` and cuts them into `k` parts whose sizes differ by at most one.
fn split_shuffled(rows: &[usize], k: usize, seed: u64, path: &[u64]) -> Vec<Vec<usize>> {
    let mut perm = rows.to_vec();
    perm.shuffle(&mut derive_rng(seed, path));
    let (q, rem) = (perm.len() / k, perm.len() % k);
    let mut start = 0;
    (0..k)
        .map(|f| {
            let len = q + usize::from(f < rem);
            let mut fold = perm[start..start + len].to_vec();
            start += len;
            fold.sort_unstable();
            fold
        })
        .collect()
}

impl FoldPlan {
    pub fn n_outer(&self) -> usize {
        self.outer.len()
    }

    pub fn outer_train(&self, o: usize) -> Vec<usize> {
        let all: Vec<usize> = (0..self.n).collect();
        complement(&all, &self.outer[o])
    }

    pub fn inner_train(&self, o: usize, i: usize) -> Vec<usize> {
        complement(&self.outer_train(o), &self.inner[o][i])
    }

    /// Smallest training side over all inner splits.
    pub fn min_inner_train(&self) -> usize {
        (0..self.n_outer())
            .flat_map(|o| {
                let total = self.n - self.outer[o].len();
                self.inner[o].iter().map(move |f| total - f.len())
            })
            .min()
            .unwrap_or(0)
    }
}

pub fn make_folds(n: usize, outer: usize, inner: usize, seed: u64) -> Result<FoldPlan> {
    if outer < 2 || inner < 2 {
        return Err(LessError::InvalidConfig(
            "need at least two outer and two inner folds".into(),
        ));
    }
    if n < outer * inner {
        return Err(LessError::InvalidConfig(format!(
            "{n} rows cannot fill {outer}x{inner} nested folds"
        )));
    }
    let all: Vec<usize> = (0..n).collect();
    let outer_folds = split_shuffled(&all, outer, seed, &[STREAM_FOLDS]);
    let inner_folds = outer_folds
        .iter()
        .enumerate()
        .map(|(o, test)| {
            let train = complement(&all, test);
            split_shuffled(&train, inner, seed, &[STREAM_FOLDS, o as u64 + 1])
        })
        .collect();
    Ok(FoldPlan {
        n,
        seed,
        outer: outer_folds,
        inner: inner_folds,
    })
}

/// Changes applied to a base configuration; unset fields keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frac_of_samples: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<LambdaMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local_estimator: Option<LocalEstimator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global_estimator: Option<GlobalEstimator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset_strategy: Option<SubsetStrategy>,
}

impl GridPoint {
    pub fn apply(&self, base: &LessConfig) -> LessConfig {
        let mut c = base.clone();
        if let Some(v) = self.frac_of_samples {
            c.frac_of_samples = v;
        }
        if let Some(v) = self.lambda {
            c.lambda = v;
        }
        if let Some(v) = self.local_estimator {
            c.local_estimator = v;
        }
        if let Some(v) = self.global_estimator {
            c.global_estimator = v;
        }
        if let Some(v) = self.subset_strategy {
            c.subset_strategy = v;
        }
        c
    }
}

/// Candidate configurations, searched in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: Vec<GridPoint>,
}

impl GridSpec {
    pub fn new(points: Vec<GridPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(LessError::InvalidConfig("empty hyperparameter grid".into()));
        }
        Ok(Self { points })
    }

    /// The base configuration alone.
    pub fn singleton() -> Self {
        Self {
            points: vec![GridPoint::default()],
        }
    }

    /// Subset-size fraction only.
    pub fn frac_only() -> Self {
        Self {
            points: FRAC_GRID
                .iter()
                .map(|&f| GridPoint {
                    frac_of_samples: Some(f),
                    ..GridPoint::default()
                })
                .collect(),
        }
    }

    /// Fraction x weighting x local learner x global learner (48 points).
    pub fn full() -> Self {
        let lambdas: Vec<LambdaMode> = std::iter::once(LambdaMode::DefaultMMinus2)
            .chain(LAMBDA_GRID.iter().map(|&l| LambdaMode::Fixed(l)))
            .collect();
        let locals = [
            LocalEstimator::Linear,
            LocalEstimator::DecisionTree {
                min_samples_split: DEFAULT_TREE_MIN_SPLIT,
            },
        ];
        let globals = [
            GlobalEstimator::Linear,
            GlobalEstimator::RandomForest {
                n_estimators: DEFAULT_FOREST_SIZE,
            },
        ];
        let mut points = Vec::new();
        for &f in &FRAC_GRID {
            for &l in &lambdas {
                for &loc in &locals {
                    for &g in &globals {
                        points.push(GridPoint {
                            frac_of_samples: Some(f),
                            lambda: Some(l),
                            local_estimator: Some(loc),
                            global_estimator: Some(g),
                            subset_strategy: None,
                        });
                    }
                }
            }
        }
        Self { points }
    }

    /// k-means subsets with the given cluster counts.
    pub fn clusters(counts: &[usize]) -> Result<Self> {
        Self::new(
            counts
                .iter()
                .map(|&c| GridPoint {
                    subset_strategy: Some(SubsetStrategy::KMeans { n_clusters: c }),
                    ..GridPoint::default()
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Outcome of one outer fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub chosen_index: usize,
    pub chosen: GridPoint,
    /// Mean inner-fold MSE of every grid point; empty when nothing was tuned.
    pub inner_mse: Vec<f64>,
    pub test_mse: f64,
}

/// Wall-clock timings, kept apart from the reproducible part of a report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CvTimings {
    pub total_seconds: f64,
    pub fold_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVReport {
    pub n_samples: usize,
    pub n_features: usize,
    pub seed: u64,
    pub grid_size: usize,
    pub folds: Vec<FoldResult>,
    pub mean_mse: f64,
    /// Population standard deviation of the fold MSEs.
    pub std_mse: f64,
    #[serde(skip)]
    pub timings: CvTimings,
}

const REFIT: u64 = u64::MAX;

fn split_seed(base_seed: u64, outer: usize, inner: u64) -> u64 {
    derive_seed(base_seed, &[STREAM_CV_FIT, outer as u64, inner])
}

/// Fits on `train` rows and returns the MSE on `test` rows.
pub fn holdout_mse<T: Scalar>(data: &Dataset<T>, train: &[usize], test: &[usize], config: &LessConfig) -> Result<f64> {
    let tr = data.select_rows(train)?;
    let model = fit(&tr, config)?;
    let norm = &model.norm;
    let mut x = vec![T::zero(); data.n_features()];
    let mut total = 0.0;
    for &i in test {
        norm.normalize_row_into(data.row(i), &mut x);
        let pred = model.predict_normalized(&x)?;
        let d = (pred - norm.normalize_y(data.y()[i])).as_f64();
        total += d * d;
    }
    Ok(total / test.len().max(1) as f64)
}

fn with_fold<T>(fold: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| LessError::Fold {
        fold,
        source: Box::new(e),
    })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn run_outer_fold<T: Scalar>(
    data: &Dataset<T>,
    plan: &FoldPlan,
    grid: &GridSpec,
    base: &LessConfig,
    o: usize,
) -> Result<(FoldResult, f64)> {
    let start = Instant::now();
    let train = plan.outer_train(o);
    let test = &plan.outer[o];
    let (chosen_index, inner_mse) = if grid.len() == 1 {
        (0, Vec::new())
    } else {
        let jobs: Vec<(usize, usize)> = (0..grid.len())
            .flat_map(|g| (0..plan.inner[o].len()).map(move |i| (g, i)))
            .collect();
        let scores = jobs
            .par_iter()
            .map(|&(g, i)| {
                let mut cfg = grid.points[g].apply(base);
                cfg.seed = split_seed(base.seed, o, i as u64);
                holdout_mse(data, &plan.inner_train(o, i), &plan.inner[o][i], &cfg)
            })
            .collect::<Result<Vec<f64>>>();
        let scores = with_fold(o, scores)?;
        let k = plan.inner[o].len();
        let means: Vec<f64> = scores
            .chunks(k)
            .map(|c| c.iter().sum::<f64>() / k as f64)
            .collect();
        let mut best = 0;
        for (g, &v) in means.iter().enumerate() {
            if v < means[best] {
                best = g;
            }
        }
        (best, means)
    };
    let mut cfg = grid.points[chosen_index].apply(base);
    cfg.seed = split_seed(base.seed, o, REFIT);
    let test_mse = with_fold(o, holdout_mse(data, &train, test, &cfg))?;
    Ok((
        FoldResult {
            fold: o,
            n_train: train.len(),
            n_test: test.len(),
            chosen_index,
            chosen: grid.points[chosen_index].clone(),
            inner_mse,
            test_mse,
        },
        start.elapsed().as_secs_f64(),
    ))
}

/// Nested cross-validation over an explicit fold plan. Grid points with equal
/// inner MSE resolve to the earliest one. A single-point grid skips the inner
/// loop.
pub fn nested_cv_with_plan<T: Scalar>(
    data: &Dataset<T>,
    grid: &GridSpec,
    base: &LessConfig,
    plan: &FoldPlan,
) -> Result<CVReport> {
    if grid.is_empty() {
        return Err(LessError::InvalidConfig("empty hyperparameter grid".into()));
    }
    if plan.n != data.n_samples() {
        return Err(LessError::DimensionMismatch {
            expected: data.n_samples(),
            found: plan.n,
        });
    }
    base.validate()?;
    let start = Instant::now();
    let results = (0..plan.n_outer())
        .into_par_iter()
        .map(|o| run_outer_fold(data, plan, grid, base, o))
        .collect::<Result<Vec<_>>>()?;
    let (folds, fold_seconds): (Vec<FoldResult>, Vec<f64>) = results.into_iter().unzip();
    let (mean_mse, std_mse) = mean_std(&folds.iter().map(|f| f.test_mse).collect::<Vec<_>>());
    Ok(CVReport {
        n_samples: data.n_samples(),
        n_features: data.n_features(),
        seed: base.seed,
        grid_size: grid.len(),
        folds,
        mean_mse,
        std_mse,
        timings: CvTimings {
            total_seconds: start.elapsed().as_secs_f64(),
            fold_seconds,
        },
    })
}

/// 5x4 nested cross-validation with folds drawn from `base.seed`.
pub fn nested_cv<T: Scalar>(data: &Dataset<T>, grid: &GridSpec, base: &LessConfig) -> Result<CVReport> {
    let plan = make_folds(data.n_samples(), OUTER_FOLDS, INNER_FOLDS, base.seed)?;
    nested_cv_with_plan(data, grid, base, &plan)
}

/// Plain cross-validation of one configuration over the outer folds of `plan`.
pub fn cross_validate<T: Scalar>(data: &Dataset<T>, config: &LessConfig, plan: &FoldPlan) -> Result<Vec<f64>> {
    (0..plan.n_outer())
        .into_par_iter()
        .map(|o| {
            let mut cfg = config.clone();
            cfg.seed = split_seed(config.seed, o, REFIT);
            with_fold(o, holdout_mse(data, &plan.outer_train(o), &plan.outer[o], &cfg))
        })
        .collect()
}

/// One row of an experiment table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub method: String,
    pub mean_mse: f64,
    pub std_mse: f64,
    /// `mean_mse` divided by the largest mean in the table.
    pub scaled: f64,
    pub report: CVReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTable {
    pub rows: Vec<TableRow>,
}

impl ExperimentTable {
    fn from_reports(reports: Vec<(String, CVReport)>) -> Self {
        let max = reports
            .iter()
            .map(|(_, r)| r.mean_mse)
            .fold(f64::NEG_INFINITY, f64::max);
        let rows = reports
            .into_iter()
            .map(|(method, report)| TableRow {
                method,
                mean_mse: report.mean_mse,
                std_mse: report.std_mse,
                scaled: if max > 0.0 { report.mean_mse / max } else { 1.0 },
                report,
            })
            .collect();
        Self { rows }
    }

    pub fn get(&self, method: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

/// Full model and its three ablations, each tuned over the subset fraction only.
/// All modes share the same folds.
pub fn run_ablation<T: Scalar>(data: &Dataset<T>, base: &LessConfig) -> Result<ExperimentTable> {
    let plan = make_folds(data.n_samples(), OUTER_FOLDS, INNER_FOLDS, base.seed)?;
    let grid = GridSpec::frac_only();
    let reports = Ablation::ALL
        .iter()
        .map(|&a| {
            let cfg = LessConfig {
                ablation: a,
                ..base.clone()
            };
            Ok((a.label().to_string(), nested_cv_with_plan(data, &grid, &cfg, &plan)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentTable::from_reports(reports))
}

/// Cluster counts from [`CLUSTER_GRID`] that every inner training split can hold.
pub fn feasible_clusters(plan: &FoldPlan, validation_split: bool) -> Vec<usize> {
    let probe = LessConfig {
        use_validation_split: validation_split,
        ..LessConfig::default()
    };
    let rows = probe.local_rows(plan.min_inner_train());
    CLUSTER_GRID.iter().copied().filter(|&c| c <= rows).collect()
}

/// Anchor-based and clustered subsets, each with and without the validation split.
pub fn run_variants<T: Scalar>(data: &Dataset<T>, base: &LessConfig) -> Result<ExperimentTable> {
    let plan = make_folds(data.n_samples(), OUTER_FOLDS, INNER_FOLDS, base.seed)?;
    let mut reports = Vec::new();
    for (label, clustered, validation) in [
        ("LESS", false, false),
        ("LESS-C", true, false),
        ("LESS-V", false, true),
        ("LESS-C-V", true, true),
    ] {
        let cfg = LessConfig {
            use_validation_split: validation,
            subset_strategy: SubsetStrategy::RandomAnchors,
            ..base.clone()
        };
        let grid = if clustered {
            let counts = feasible_clusters(&plan, validation);
            if counts.is_empty() {
                return Err(LessError::InvalidConfig(format!(
                    "{label}: too few rows for any cluster count in {CLUSTER_GRID:?}"
                )));
            }
            GridSpec::clusters(&counts)?
        } else {
            GridSpec::frac_only()
        };
        reports.push((label.to_string(), nested_cv_with_plan(data, &grid, &cfg, &plan)?));
    }
    Ok(ExperimentTable::from_reports(reports))
}
