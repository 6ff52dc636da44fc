//! Versioned JSON model files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GlobalStage, LessModel};
use crate::error::{LessError, Result};
use crate::estimators::Estimator;
use crate::scalar::Scalar;

pub const MODEL_FORMAT: &str = "less-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct ModelFileOut<'a, T: Scalar> {
    format: &'static str,
    version: u32,
    scalar: &'static str,
    n_features: usize,
    n_replications: usize,
    model: &'a LessModel<T>,
}

#[derive(Deserialize)]
#[serde(bound = "")]
struct ModelFileIn<T: Scalar> {
    format: String,
    version: u32,
    scalar: String,
    n_features: usize,
    n_replications: usize,
    model: LessModel<T>,
}

impl<T: Scalar> LessModel<T> {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(&ModelFileOut {
            format: MODEL_FORMAT,
            version: MODEL_FORMAT_VERSION,
            scalar: T::NAME,
            n_features: self.n_features(),
            n_replications: self.replications.len(),
            model: self,
        })
        .map_err(|e| LessError::ModelFormat(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFileIn<T> =
            serde_json::from_str(text).map_err(|e| LessError::ModelFormat(e.to_string()))?;
        if file.format != MODEL_FORMAT {
            return Err(LessError::ModelFormat(format!(
                "unexpected format tag {:?}",
                file.format
            )));
        }
        if file.version != MODEL_FORMAT_VERSION {
            return Err(LessError::ModelFormat(format!(
                "unsupported version {} (expected {MODEL_FORMAT_VERSION})",
                file.version
            )));
        }
        if file.scalar != T::NAME {
            return Err(LessError::ModelFormat(format!(
                "model stores {} scalars, reader expects {}",
                file.scalar,
                T::NAME
            )));
        }
        let model = file.model;
        if model.n_features() != file.n_features || model.replications.len() != file.n_replications {
            return Err(LessError::ModelFormat("header disagrees with body".into()));
        }
        model.check_consistency()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path.as_ref(), self.to_json()?)
            .map_err(|e| LessError::ModelFormat(format!("{}: {e}", path.as_ref().display())))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())
            .map_err(|e| LessError::ModelFormat(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }

    fn check_consistency(&self) -> Result<()> {
        let p = self.n_features();
        let bad = |msg: String| Err(LessError::ModelFormat(msg));
        if self.norm.x_std.len() != p || p == 0 {
            return bad("normalization statistics have inconsistent width".into());
        }
        if self.replications.is_empty() {
            return bad("no replications".into());
        }
        for (l, rep) in self.replications.iter().enumerate() {
            let m = rep.locals.len();
            if m == 0 || rep.centroids.len() != m {
                return bad(format!("replication {l}: locals and centroids disagree"));
            }
            if rep.centroids.iter().any(|c| c.len() != p) {
                return bad(format!("replication {l}: centroid width differs from {p}"));
            }
            let local_ok = rep.locals.iter().all(|e| match e {
                Estimator::Linear(v) => v.n_features() == p,
                Estimator::Tree(t) => t.n_features == p,
                Estimator::Forest(f) => f.n_features() == p,
            });
            if !local_ok {
                return bad(format!("replication {l}: local model width differs from {p}"));
            }
            if let GlobalStage::Learned { model } = &rep.global {
                let width = match model {
                    Estimator::Linear(v) => v.n_features(),
                    Estimator::Tree(t) => t.n_features,
                    Estimator::Forest(f) => f.n_features(),
                };
                if width != m {
                    return bad(format!("replication {l}: global model expects {width} inputs, has {m} subsets"));
                }
            }
        }
        Ok(())
    }
}
