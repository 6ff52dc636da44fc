use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{GlobalStage, LessModel, ReplicationModel};
use crate::config::{
    Ablation, GlobalEstimator, LessConfig, LocalEstimator, ResolvedSizes, SubsetStrategy,
};
use crate::data::{normalize, Dataset};
use crate::error::{LessError, Result};
use crate::estimators::{fit_forest, fit_least_squares, fit_linear, fit_tree, Estimator};
use crate::scalar::Scalar;
use crate::seed::{derive_rng, STREAM_FOREST, STREAM_LOCAL, STREAM_REPLICATION};
use crate::subsets::{select_kmeans_subsets, select_random_anchor_subsets};

/// Minimum training rows when local and global learning use disjoint splits.
pub const MIN_ROWS_FOR_VALIDATION_SPLIT: usize = 10;

/// Coefficients of the global linear stage, one per subset.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalLinearCoefficients<T: Scalar> {
    pub beta: Vec<T>,
    pub ridge_eta: T,
}

/// Least squares of `y` on the columns of `z`, without an extra intercept
/// column: the local predictions already carry their own intercepts.
pub fn fit_global_linear<T: Scalar>(z: ArrayView2<'_, T>, y: ArrayView1<'_, T>) -> GlobalLinearCoefficients<T> {
    let m = fit_least_squares(z, y, false);
    GlobalLinearCoefficients {
        beta: m.coefficients,
        ridge_eta: m.ridge_eta,
    }
}

/// Fits a model on the current rayon pool.
///
/// The result depends only on `data` and `config` (seed included), never on
/// the number of worker threads.
pub fn fit<T: Scalar>(data: &Dataset<T>, config: &LessConfig) -> Result<LessModel<T>> {
    config.validate()?;
    let n = data.n_samples();
    if config.use_validation_split && n < MIN_ROWS_FOR_VALIDATION_SPLIT {
        return Err(LessError::InvalidConfig(format!(
            "validation split needs at least {MIN_ROWS_FOR_VALIDATION_SPLIT} rows, got {n}"
        )));
    }
    let sizes = config.resolve(config.local_rows(n))?;
    let (normalized, norm) = normalize(data)?;
    let replications = (0..config.n_replications)
        .into_par_iter()
        .map(|l| fit_replication(&normalized, config, sizes, l as u64))
        .collect::<Result<Vec<_>>>()?;
    Ok(LessModel {
        replications,
        norm,
        config: config.clone(),
        feature_names: data.feature_names().map(<[String]>::to_vec),
        target_name: data.target_name().map(str::to_owned),
    })
}

/// Fits on a dedicated pool of `threads` workers.
pub fn fit_with_threads<T: Scalar>(data: &Dataset<T>, config: &LessConfig, threads: usize) -> Result<LessModel<T>> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| LessError::InvalidConfig(format!("thread pool: {e}")))?
        .install(|| fit(data, config))
}

fn fit_local<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    estimator: LocalEstimator,
    seed: u64,
    path: [u64; 3],
) -> Estimator<T> {
    match estimator {
        LocalEstimator::Linear => Estimator::Linear(fit_linear(x, y)),
        LocalEstimator::DecisionTree { min_samples_split } => {
            let mut rng = derive_rng(seed, &path);
            Estimator::Tree(fit_tree(x, y, min_samples_split, &mut rng))
        }
    }
}

/// One replication on already-normalized data.
fn fit_replication<T: Scalar>(
    data: &Dataset<T>,
    config: &LessConfig,
    sizes: ResolvedSizes,
    index: u64,
) -> Result<ReplicationModel<T>> {
    let n = data.n_samples();
    let mut rng = derive_rng(config.seed, &[STREAM_REPLICATION, index]);

    let (local_rows, global_rows): (Vec<usize>, Vec<usize>) = if config.use_validation_split {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let (a, b) = perm.split_at(config.local_rows(n));
        let (mut a, mut b) = (a.to_vec(), b.to_vec());
        a.sort_unstable();
        b.sort_unstable();
        (a, b)
    } else {
        ((0..n).collect(), (0..n).collect())
    };

    let x = data.x();
    let x_local = x.select(Axis(0), &local_rows);
    let subsets = match config.subset_strategy {
        SubsetStrategy::RandomAnchors => {
            select_random_anchor_subsets(x_local.view(), sizes.m, sizes.k, &mut rng)?
        }
        SubsetStrategy::KMeans { .. } => select_kmeans_subsets(x_local.view(), sizes.m, &mut rng)?,
    };

    let y = data.y();
    let locals: Vec<Estimator<T>> = subsets
        .par_iter()
        .enumerate()
        .map(|(j, s)| {
            let rows: Vec<usize> = s.indices.iter().map(|&i| local_rows[i]).collect();
            let xs = x.select(Axis(0), &rows);
            let ys = y.select(Axis(0), &rows);
            fit_local(
                xs.view(),
                ys.view(),
                config.local_estimator,
                config.seed,
                [STREAM_LOCAL, index, j as u64],
            )
        })
        .collect();
    let centroids = subsets.into_iter().map(|s| s.centroid).collect();

    let mut rep = ReplicationModel {
        locals,
        centroids,
        lambda: T::lit(sizes.lambda),
        distance: config.distance,
        normalize_weights: config.normalize_weights,
        weighted: config.ablation.uses_weights(),
        global: GlobalStage::WeightedSum,
    };

    rep.global = match config.ablation {
        Ablation::NoGlobal => GlobalStage::WeightedSum,
        Ablation::Neither => GlobalStage::Mean,
        Ablation::Full | Ablation::NoWeighting => {
            let z = feature_matrix(&rep, data, &global_rows);
            let yg = y.select(Axis(0), &global_rows);
            let model = match config.global_estimator {
                GlobalEstimator::Linear => {
                    Estimator::Linear(fit_least_squares(z.view(), yg.view(), config.global_intercept))
                }
                GlobalEstimator::RandomForest { n_estimators } => {
                    let mut frng = derive_rng(config.seed, &[STREAM_FOREST, index]);
                    Estimator::Forest(fit_forest(z.view(), yg.view(), n_estimators, &mut frng))
                }
            };
            if let Estimator::Linear(m) = &model {
                if m.coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(LessError::Numeric(
                        "global least-squares produced non-finite coefficients".into(),
                    ));
                }
            }
            GlobalStage::Learned { model }
        }
    };
    Ok(rep)
}

/// Rows of `Z` for the given data rows.
pub(crate) fn feature_matrix<T: Scalar>(rep: &ReplicationModel<T>, data: &Dataset<T>, rows: &[usize]) -> Array2<T> {
    let m = rep.n_subsets();
    let mut z = Array2::zeros((rows.len(), m));
    z.as_slice_mut()
        .expect("fresh array is contiguous")
        .par_chunks_mut(m)
        .zip(rows.par_iter())
        .for_each_init(
            || vec![T::zero(); m],
            |dist, (out, &i)| rep.features_into(data.row(i), dist, out),
        );
    z
}
