//! Hyperparameters for a LESS fit and the switches for its variants and ablations.

use serde::{Deserialize, Serialize};

use crate::error::{LessError, Result};

/// How the weighting sharpness `lambda` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMode {
    /// `lambda = 1 / m^2`, with `m` the resolved number of subsets.
    #[default]
    DefaultMMinus2,
    Fixed(f64),
}

/// Distance used for neighborhoods and subset weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    #[default]
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LocalEstimator {
    #[default]
    Linear,
    DecisionTree {
        min_samples_split: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GlobalEstimator {
    #[default]
    Linear,
    RandomForest {
        n_estimators: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SubsetStrategy {
    /// `m` random anchors, each expanded to its `k` nearest samples.
    #[default]
    RandomAnchors,
    /// k-means clusters; `m = n_clusters`.
    KMeans { n_clusters: usize },
}

/// Which parts of the pipeline are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    /// Weighted features and a fitted global learner.
    #[default]
    Full,
    /// Unweighted local predictions fed to the global learner (NoW-G).
    NoWeighting,
    /// Weighted sum of local predictions, no global learner (W-NoG).
    NoGlobal,
    /// Plain mean of local predictions (NoW-NoG).
    Neither,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [
        Ablation::Full,
        Ablation::NoWeighting,
        Ablation::NoGlobal,
        Ablation::Neither,
    ];

    pub fn uses_weights(self) -> bool {
        matches!(self, Ablation::Full | Ablation::NoGlobal)
    }

    pub fn fits_global(self) -> bool {
        matches!(self, Ablation::Full | Ablation::NoWeighting)
    }

    pub fn label(self) -> &'static str {
        match self {
            Ablation::Full => "LESS",
            Ablation::NoWeighting => "NoW-G",
            Ablation::NoGlobal => "W-NoG",
            Ablation::Neither => "NoW-NoG",
        }
    }
}

/// Fraction of the training rows held out of local learning when the
/// validation split is on; the global learner is fit on these rows only.
pub const VALIDATION_GLOBAL_FRACTION: f64 = 0.3;

/// Complete configuration of a fit. Defaults reproduce the all-linear baseline
/// with 5% neighborhoods and 20 replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LessConfig {
    pub frac_of_samples: f64,
    pub n_replications: usize,
    pub lambda: LambdaMode,
    pub distance: DistanceMetric,
    pub normalize_weights: bool,
    pub local_estimator: LocalEstimator,
    pub global_estimator: GlobalEstimator,
    pub subset_strategy: SubsetStrategy,
    pub use_validation_split: bool,
    pub ablation: Ablation,
    /// Adds an intercept column to the linear global learner.
    pub global_intercept: bool,
    pub seed: u64,
}

impl Default for LessConfig {
    fn default() -> Self {
        Self {
            frac_of_samples: 0.05,
            n_replications: 20,
            lambda: LambdaMode::DefaultMMinus2,
            distance: DistanceMetric::Euclidean,
            normalize_weights: true,
            local_estimator: LocalEstimator::Linear,
            global_estimator: GlobalEstimator::Linear,
            subset_strategy: SubsetStrategy::RandomAnchors,
            use_validation_split: false,
            ablation: Ablation::Full,
            global_intercept: false,
            seed: 0,
        }
    }
}

/// Neighborhood size, subset count and lambda for a concrete sample count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSizes {
    pub k: usize,
    pub m: usize,
    pub lambda: f64,
}

impl LessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.frac_of_samples > 0.0 && self.frac_of_samples <= 1.0) {
            return Err(LessError::InvalidConfig(format!(
                "frac_of_samples must lie in (0, 1], got {}",
                self.frac_of_samples
            )));
        }
        if self.n_replications == 0 {
            return Err(LessError::InvalidConfig(
                "n_replications must be positive".into(),
            ));
        }
        if let LambdaMode::Fixed(l) = self.lambda {
            if !(l >= 0.0) {
                return Err(LessError::NegativeLambda(l));
            }
        }
        if let LocalEstimator::DecisionTree { min_samples_split } = self.local_estimator {
            if min_samples_split < 2 {
                return Err(LessError::InvalidConfig(
                    "min_samples_split must be at least 2".into(),
                ));
            }
        }
        if let GlobalEstimator::RandomForest { n_estimators } = self.global_estimator {
            if n_estimators == 0 {
                return Err(LessError::InvalidConfig(
                    "n_estimators must be positive".into(),
                ));
            }
        }
        if let SubsetStrategy::KMeans { n_clusters } = self.subset_strategy {
            if n_clusters == 0 {
                return Err(LessError::InvalidConfig(
                    "n_clusters must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    /// Resolves `k`, `m` and `lambda` for `n_local` rows available to local learning.
    pub fn resolve(&self, n_local: usize) -> Result<ResolvedSizes> {
        self.validate()?;
        if n_local == 0 {
            return Err(LessError::EmptyDataset("no rows for local learning".into()));
        }
        let (k, m) = match self.subset_strategy {
            SubsetStrategy::RandomAnchors => {
                let k = ((self.frac_of_samples * n_local as f64).round() as usize)
                    .max(2)
                    .min(n_local);
                (k, n_local.div_ceil(k))
            }
            SubsetStrategy::KMeans { n_clusters } => {
                (n_local.div_ceil(n_clusters).max(1), n_clusters)
            }
        };
        if m > n_local {
            return Err(LessError::TooManySubsets { m, n: n_local });
        }
        let lambda = match self.lambda {
            LambdaMode::DefaultMMinus2 => 1.0 / (m as f64 * m as f64),
            LambdaMode::Fixed(l) => l,
        };
        Ok(ResolvedSizes { k, m, lambda })
    }

    /// Number of rows given to local learning out of `n` training rows.
    pub fn local_rows(&self, n: usize) -> usize {
        if self.use_validation_split {
            let global = ((n as f64) * VALIDATION_GLOBAL_FRACTION).round() as usize;
            n - global.clamp(1, n.saturating_sub(1).max(1))
        } else {
            n
        }
    }
}
