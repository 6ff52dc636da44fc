//! Distance-based subset weights.
//!
//! `w_j(x) = exp(-lambda * d(x, c_j))`, optionally normalized to sum to one.
//! The normalized form subtracts the smallest distance before exponentiating
//! so that large `lambda` never produces `0 / 0`; at `lambda >= LAMBDA_CAP`
//! it returns the one-hot vector of the nearest centroid directly.

use crate::config::DistanceMetric;
use crate::error::{LessError, Result};
use crate::scalar::{cmp_scalar, Scalar};

/// Weighting sharpness at which the normalized weights collapse to one-hot.
pub const LAMBDA_CAP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<T: Scalar> {
    pub w: Vec<T>,
    pub normalized: bool,
}

#[inline]
pub(crate) fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    squared_euclidean(a, b).sqrt()
}

#[inline]
pub(crate) fn squared_euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

/// Euclidean distance between two points of equal dimension.
pub fn distance<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(LessError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(euclidean(a, b))
}

pub fn metric_distance<T: Scalar>(metric: DistanceMetric, a: &[T], b: &[T]) -> Result<T> {
    match metric {
        DistanceMetric::Euclidean => distance(a, b),
    }
}

/// Index of the smallest entry; lowest index on exact ties.
pub(crate) fn argmin<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = j;
        }
    }
    best
}

/// Weights from precomputed distances, written into `out`.
pub(crate) fn weights_from_distances<T: Scalar>(
    distances: &[T],
    lambda: T,
    normalized: bool,
    out: &mut [T],
) {
    if !normalized {
        for (o, &d) in out.iter_mut().zip(distances) {
            *o = (-lambda * d).exp();
        }
        return;
    }
    if lambda >= T::lit(LAMBDA_CAP) {
        out.iter_mut().for_each(|o| *o = T::zero());
        out[argmin(distances)] = T::one();
        return;
    }
    let d_min = distances
        .iter()
        .copied()
        .min_by(|a, b| cmp_scalar(*a, *b))
        .unwrap_or(T::zero());
    let mut total = T::zero();
    for (o, &d) in out.iter_mut().zip(distances) {
        *o = (-lambda * (d - d_min)).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

/// Weights from precomputed distances.
pub fn distance_weights<T: Scalar>(distances: &[T], lambda: T, normalized: bool) -> Result<WeightVector<T>> {
    if !(lambda >= T::zero()) {
        return Err(LessError::NegativeLambda(lambda.as_f64()));
    }
    if distances.is_empty() {
        return Err(LessError::InvalidConfig("no distances".into()));
    }
    let mut w = vec![T::zero(); distances.len()];
    weights_from_distances(distances, lambda, normalized, &mut w);
    Ok(WeightVector { w, normalized })
}

/// Weights of `x` with respect to each centroid.
pub fn compute_weights<T: Scalar>(
    x: &[T],
    centroids: &[Vec<T>],
    lambda: T,
    normalized: bool,
) -> Result<WeightVector<T>> {
    if !(lambda >= T::zero()) {
        return Err(LessError::NegativeLambda(lambda.as_f64()));
    }
    if centroids.is_empty() {
        return Err(LessError::InvalidConfig("no centroids".into()));
    }
    let distances = centroids
        .iter()
        .map(|c| distance(x, c))
        .collect::<Result<Vec<T>>>()?;
    let mut w = vec![T::zero(); centroids.len()];
    weights_from_distances(&distances, lambda, normalized, &mut w);
    Ok(WeightVector { w, normalized })
}
