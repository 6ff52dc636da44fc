//! Datasets and input/output standardization.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{LessError, Result};
use crate::scalar::Scalar;

/// An `n x p` input matrix with its `n` outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T: Scalar> {
    x: Array2<T>,
    y: Array1<T>,
    feature_names: Option<Vec<String>>,
    target_name: Option<String>,
}

impl<T: Scalar> Dataset<T> {
    /// Validates shape and finiteness.
    pub fn new(x: Array2<T>, y: Array1<T>) -> Result<Self> {
        let (n, p) = x.dim();
        if n == 0 {
            return Err(LessError::EmptyDataset("no rows".into()));
        }
        if p == 0 {
            return Err(LessError::EmptyDataset("no feature columns".into()));
        }
        if y.len() != n {
            return Err(LessError::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        for ((row, col), v) in x.indexed_iter() {
            if !v.is_finite() {
                return Err(LessError::NonFinite { row, col });
            }
        }
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(LessError::NonFinite { row, col: p });
        }
        let x = x.as_standard_layout().into_owned();
        Ok(Self {
            x,
            y,
            feature_names: None,
            target_name: None,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features() {
            return Err(LessError::DimensionMismatch {
                expected: self.n_features(),
                found: names.len(),
            });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn with_target_name(mut self, name: impl Into<String>) -> Self {
        self.target_name = Some(name.into());
        self
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> ArrayView2<'_, T> {
        self.x.view()
    }

    pub fn y(&self) -> ArrayView1<'_, T> {
        self.y.view()
    }

    /// Row `i` as a contiguous slice.
    pub fn row(&self, i: usize) -> &[T] {
        let p = self.n_features();
        &self.x.as_slice().expect("standard layout")[i * p..(i + 1) * p]
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn target_name(&self) -> Option<&str> {
        self.target_name.as_deref()
    }

    /// New dataset holding the given rows, in the given order (repeats allowed).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(LessError::EmptyDataset("row selection is empty".into()));
        }
        Ok(Self {
            x: self.x.select(Axis(0), rows),
            y: self.y.select(Axis(0), rows),
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
        })
    }

    pub(crate) fn from_parts_unchecked(
        x: Array2<T>,
        y: Array1<T>,
        feature_names: Option<Vec<String>>,
        target_name: Option<String>,
    ) -> Self {
        Self {
            x,
            y,
            feature_names,
            target_name,
        }
    }
}

/// Per-column standardization statistics plus the output's.
///
/// Population (divide-by-n) standard deviations; a column with zero spread
/// gets `std = 1`, so it maps to all zeros instead of dividing by zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NormStats<T: Scalar> {
    pub x_mean: Vec<T>,
    pub x_std: Vec<T>,
    pub y_mean: T,
    pub y_std: T,
}

fn mean_std<T: Scalar>(values: impl Iterator<Item = T> + Clone) -> (T, T) {
    let n = T::from_count(values.clone().count());
    let mean = values.clone().sum::<T>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<T>() / n;
    let std = var.sqrt();
    // spreads at round-off level of the mean count as constant
    let floor = T::epsilon() * T::lit(16.0) * mean.abs().max(T::min_positive_value());
    let std = if std > floor && std.is_finite() {
        std
    } else {
        T::one()
    };
    (mean, std)
}

impl<T: Scalar> NormStats<T> {
    pub fn fit(data: &Dataset<T>) -> Self {
        let (x_mean, x_std) = data
            .x
            .axis_iter(Axis(1))
            .map(|col| mean_std(col.iter().copied()))
            .unzip();
        let (y_mean, y_std) = mean_std(data.y.iter().copied());
        Self {
            x_mean,
            x_std,
            y_mean,
            y_std,
        }
    }

    pub fn n_features(&self) -> usize {
        self.x_mean.len()
    }

    pub fn normalize_row_into(&self, x: &[T], out: &mut [T]) {
        for (((o, &v), &m), &s) in out.iter_mut().zip(x).zip(&self.x_mean).zip(&self.x_std) {
            *o = (v - m) / s;
        }
    }

    pub fn normalize_row(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.n_features() {
            return Err(LessError::DimensionMismatch {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        let mut out = vec![T::zero(); x.len()];
        self.normalize_row_into(x, &mut out);
        Ok(out)
    }

    pub fn normalize_y(&self, y: T) -> T {
        (y - self.y_mean) / self.y_std
    }

    pub fn denormalize_y(&self, y: T) -> T {
        y * self.y_std + self.y_mean
    }

    pub fn denormalize_row(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .zip(&self.x_mean)
            .zip(&self.x_std)
            .map(|((&v, &m), &s)| v * s + m)
            .collect()
    }

    /// Applies these statistics to another dataset of the same width.
    pub fn apply(&self, data: &Dataset<T>) -> Result<Dataset<T>> {
        if data.n_features() != self.n_features() {
            return Err(LessError::DimensionMismatch {
                expected: self.n_features(),
                found: data.n_features(),
            });
        }
        let mut x = data.x.clone();
        for mut row in x.axis_iter_mut(Axis(0)) {
            for ((v, &m), &s) in row.iter_mut().zip(&self.x_mean).zip(&self.x_std) {
                *v = (*v - m) / s;
            }
        }
        let y = data.y.mapv(|v| self.normalize_y(v));
        Ok(Dataset::from_parts_unchecked(
            x,
            y,
            data.feature_names.clone(),
            data.target_name.clone(),
        ))
    }
}

/// Standardizes inputs and output, returning the statistics needed to undo it.
pub fn normalize<T: Scalar>(data: &Dataset<T>) -> Result<(Dataset<T>, NormStats<T>)> {
    if data.n_samples() == 0 || data.n_features() == 0 {
        return Err(LessError::EmptyDataset("cannot normalize".into()));
    }
    let stats = NormStats::fit(data);
    let normalized = stats.apply(data)?;
    Ok((normalized, stats))
}

/// Maps a prediction made in normalized output units back to original units.
pub fn denormalize_prediction<T: Scalar>(yhat_norm: T, norm: &NormStats<T>) -> T {
    norm.denormalize_y(yhat_norm)
}
