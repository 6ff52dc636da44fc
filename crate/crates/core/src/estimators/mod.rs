//! Base learners used for the local and global stages.

mod forest;
mod linear;
mod tree;

pub use forest::{default_max_features, fit_bootstrapped_tree, fit_forest, ForestModel};
pub use linear::{fit_least_squares, fit_linear, predict_linear, LinearModel};
pub use tree::{fit_tree, TreeModel, TreeNode};


use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::Scalar;

/// Any fitted base learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator<T: Scalar> {
    Linear(LinearModel<T>),
    Tree(TreeModel<T>),
    Forest(ForestModel<T>),
}

impl<T: Scalar> Estimator<T> {
    pub fn predict(&self, x: &[T]) -> Result<T> {
        match self {
            Estimator::Linear(m) => m.predict(x),
            Estimator::Tree(m) => m.predict(x),
            Estimator::Forest(m) => m.predict(x),
        }
    }

    #[inline]
    pub(crate) fn predict_unchecked(&self, x: &[T]) -> T {
        match self {
            Estimator::Linear(m) => m.predict_unchecked(x),
            Estimator::Tree(m) => m.predict_unchecked(x),
            Estimator::Forest(m) => m.predict_unchecked(x),
        }
    }

    pub fn as_linear(&self) -> Option<&LinearModel<T>> {
        match self {
            Estimator::Linear(m) => Some(m),
            _ => None,
        }
    }
}
