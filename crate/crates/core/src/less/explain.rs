//! Input-dependent linear coefficients of an all-linear model.
//!
//! With linear local learners `v_j` and a linear global stage `beta`, the
//! prediction at `x` is `[x; 1]^T sum_j v_j w_j(x) beta_j`, i.e. a linear
//! function of `x` whose coefficients depend on where `x` sits.

use super::{GlobalStage, LessModel, ReplicationModel};
use crate::error::{LessError, Result};
use crate::estimators::Estimator;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LocalExplanation<T: Scalar> {
    /// Coefficients on `[x_normalized; 1]`, normalized output units.
    pub normalized: Vec<T>,
    /// Coefficients on `[x; 1]` in the original feature and output units.
    pub raw: Vec<T>,
}

fn replication_coefficients<T: Scalar>(rep: &ReplicationModel<T>, x_norm: &[T]) -> Result<Vec<T>> {
    let m = rep.n_subsets();
    let p = rep.n_features();
    let mut dist = vec![T::zero(); m];
    let mut w = vec![T::zero(); m];
    rep.weights_into(x_norm, &mut dist, &mut w);

    let mut extra_intercept = T::zero();
    let beta: Vec<T> = match &rep.global {
        GlobalStage::Learned {
            model: Estimator::Linear(g),
        } => {
            extra_intercept = g.intercept_value();
            g.slopes().to_vec()
        }
        GlobalStage::Learned { .. } => {
            return Err(LessError::ExplanationsUnavailable(
                "global learner is not linear".into(),
            ))
        }
        GlobalStage::WeightedSum => vec![T::one(); m],
        GlobalStage::Mean => vec![T::one() / T::from_count(m); m],
    };

    let mut coef = vec![T::zero(); p + 1];
    for ((local, &wj), &bj) in rep.locals.iter().zip(&w).zip(&beta) {
        let v = local.as_linear().ok_or_else(|| {
            LessError::ExplanationsUnavailable("local learners are not linear".into())
        })?;
        let scale = wj * bj;
        for (c, &vi) in coef.iter_mut().zip(&v.coefficients) {
            *c += vi * scale;
        }
    }
    coef[p] += extra_intercept;
    Ok(coef)
}

/// Replication-averaged coefficients of the locally linear prediction at raw input `x0`.
pub fn local_coefficients<T: Scalar>(model: &LessModel<T>, x0: &[T]) -> Result<LocalExplanation<T>> {
    let x_norm = model.norm.normalize_row(x0)?;
    let p = model.n_features();
    let mut normalized = vec![T::zero(); p + 1];
    for rep in &model.replications {
        for (acc, c) in normalized
            .iter_mut()
            .zip(replication_coefficients(rep, &x_norm)?)
        {
            *acc += c;
        }
    }
    let r = T::from_count(model.replications.len());
    normalized.iter_mut().for_each(|c| *c /= r);

    let norm = &model.norm;
    let mut raw = vec![T::zero(); p + 1];
    let mut shift = T::zero();
    for i in 0..p {
        raw[i] = norm.y_std * normalized[i] / norm.x_std[i];
        shift += normalized[i] * norm.x_mean[i] / norm.x_std[i];
    }
    raw[p] = norm.y_std * (normalized[p] - shift) + norm.y_mean;
    Ok(LocalExplanation { normalized, raw })
}

impl<T: Scalar> LessModel<T> {
    pub fn local_coefficients(&self, x0: &[T]) -> Result<LocalExplanation<T>> {
        local_coefficients(self, x0)
    }
}
