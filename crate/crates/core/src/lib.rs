//! Learning with subset stacking.
//!
//! A regressor that fits simple learners on many localized subsets of the
//! inputs, weights their predictions by distance to each subset's centroid,
//! and stacks the weighted predictions with a global learner.
//!
//! Everything is generic over the floating type through [`Scalar`]; the
//! `*F64` / `*F32` aliases below name the common instantiations.
//!
//! ```
//! use less_core::{fit, DatasetF64, LessConfig};
//! use ndarray::{Array1, Array2};
//!
//! let x = Array2::from_shape_fn((60, 1), |(i, _)| i as f64 / 10.0);
//! let y = x.column(0).mapv(f64::sin);
//! let data = DatasetF64::new(x, Array1::from(y.to_vec())).unwrap();
//! let cfg = LessConfig { frac_of_samples: 0.2, n_replications: 3, ..LessConfig::default() };
//! let model = fit(&data, &cfg).unwrap();
//! let yhat = model.predict(&[1.5]).unwrap();
//! assert!((yhat - 1.5f64.sin()).abs() < 0.1);
//! ```

pub mod config;
pub mod data;
pub mod error;
pub mod estimators;
pub mod eval;
mod less;
mod linalg;
pub mod scalar;
pub mod seed;
pub mod subsets;
pub mod synthetic;
pub mod weighting;

pub use config::{
    Ablation, DistanceMetric, GlobalEstimator, LambdaMode, LessConfig, LocalEstimator,
    ResolvedSizes, SubsetStrategy,
};
pub use data::{denormalize_prediction, normalize, Dataset, NormStats};
pub use error::{LessError, Result};
pub use less::{
    fit, fit_global_linear, fit_with_threads, generate_features, kernel, local_coefficients,
    predict, FeatureVector, GlobalLinearCoefficients, GlobalStage, LessModel, LocalExplanation,
    ReplicationModel, MODEL_FORMAT, MODEL_FORMAT_VERSION,
};
pub use scalar::Scalar;
pub use subsets::SubsetSpec;
pub use weighting::{compute_weights, distance_weights, WeightVector};

pub type DatasetF64 = Dataset<f64>;
pub type DatasetF32 = Dataset<f32>;
pub type NormStatsF64 = NormStats<f64>;
pub type NormStatsF32 = NormStats<f32>;
pub type LessModelF64 = LessModel<f64>;
pub type LessModelF32 = LessModel<f32>;
pub type ReplicationModelF64 = ReplicationModel<f64>;
pub type ReplicationModelF32 = ReplicationModel<f32>;
