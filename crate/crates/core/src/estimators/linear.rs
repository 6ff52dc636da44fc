//! Least-squares linear regression with a ridge fallback for singular designs.
//!
//! The normal equations `X^T X v = X^T y` are solved by Cholesky. When the
//! factorization breaks down, or a pivot drops below `1e-10 * trace / d`,
//! the system is regularized with `eta = 1e-8 * trace / d` and the ridge
//! solution is then refined by iterated Tikhonov steps
//! `v <- v + (G + eta I)^-1 (X^T y - G v)`, which converge to the
//! minimum-norm least-squares solution on the well-determined directions
//! while leaving the null space at zero.

use ndarray::{ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LessError, Result};
use crate::linalg::{cholesky, cholesky_solve, dot, sym_mul};
use crate::scalar::Scalar;

const PIVOT_RTOL: f64 = 1e-10;
const RIDGE_RTOL: f64 = 1e-8;
const MAX_REFINE: usize = 100;
const GRAM_CHUNK: usize = 256;

/// Fitted `y ~ v^T [x; 1]` (or `v^T x` without intercept).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LinearModel<T: Scalar> {
    /// Slopes followed by the intercept when `intercept` is set.
    pub coefficients: Vec<T>,
    pub intercept: bool,
    /// Ridge parameter actually used; zero for a plain least-squares solve.
    pub ridge_eta: T,
}

impl<T: Scalar> LinearModel<T> {
    pub fn n_features(&self) -> usize {
        self.coefficients.len() - usize::from(self.intercept)
    }

    pub fn slopes(&self) -> &[T] {
        &self.coefficients[..self.n_features()]
    }

    pub fn intercept_value(&self) -> T {
        if self.intercept {
            *self.coefficients.last().expect("intercept present")
        } else {
            T::zero()
        }
    }

    pub fn predict(&self, x: &[T]) -> Result<T> {
        if x.len() != self.n_features() {
            return Err(LessError::DimensionMismatch {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        Ok(self.predict_unchecked(x))
    }

    #[inline]
    pub(crate) fn predict_unchecked(&self, x: &[T]) -> T {
        dot(self.slopes(), x) + self.intercept_value()
    }
}

/// Ordinary least squares with an intercept column appended.
pub fn fit_linear<T: Scalar>(x: ArrayView2<'_, T>, y: ArrayView1<'_, T>) -> LinearModel<T> {
    fit_least_squares(x, y, true)
}

/// Returns `v^T [x; 1]`.
pub fn predict_linear<T: Scalar>(model: &LinearModel<T>, x: &[T]) -> Result<T> {
    model.predict(x)
}

/// Least squares on the given design, optionally appending an intercept column.
pub fn fit_least_squares<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    intercept: bool,
) -> LinearModel<T> {
    let x = x.as_standard_layout();
    let (n, p) = x.dim();
    assert_eq!(n, y.len(), "design rows must match targets");
    let d = p + usize::from(intercept);
    let data = x.as_slice().expect("standard layout");
    let y: Vec<T> = y.iter().copied().collect();
    let (gram, rhs) = normal_equations(data, &y, p, intercept);
    let (coefficients, ridge_eta) = solve_normal_equations(&gram, &rhs, d);
    LinearModel {
        coefficients,
        intercept,
        ridge_eta,
    }
}

/// Accumulates `G = A^T A` and `b = A^T y` where `A = [X | 1]`.
///
/// Rows are processed in fixed chunks whose partial sums are added in chunk
/// order, so the result does not depend on the thread count.
fn normal_equations<T: Scalar>(data: &[T], y: &[T], p: usize, intercept: bool) -> (Vec<T>, Vec<T>) {
    let d = p + usize::from(intercept);
    let n = y.len();
    let chunk_sums = |start: usize| {
        let end = (start + GRAM_CHUNK).min(n);
        let mut g = vec![T::zero(); d * d];
        let mut b = vec![T::zero(); d];
        let mut row = vec![T::one(); d];
        for i in start..end {
            row[..p].copy_from_slice(&data[i * p..(i + 1) * p]);
            for a in 0..d {
                let ra = row[a];
                b[a] += ra * y[i];
                for c in a..d {
                    g[a * d + c] += ra * row[c];
                }
            }
        }
        (g, b)
    };
    let starts: Vec<usize> = (0..n).step_by(GRAM_CHUNK).collect();
    let partials: Vec<(Vec<T>, Vec<T>)> = if starts.len() > 1 {
        starts.par_iter().map(|&s| chunk_sums(s)).collect()
    } else {
        starts.iter().map(|&s| chunk_sums(s)).collect()
    };
    let mut g = vec![T::zero(); d * d];
    let mut b = vec![T::zero(); d];
    for (pg, pb) in partials {
        for (acc, v) in g.iter_mut().zip(pg) {
            *acc += v;
        }
        for (acc, v) in b.iter_mut().zip(pb) {
            *acc += v;
        }
    }
    for a in 0..d {
        for c in 0..a {
            g[a * d + c] = g[c * d + a];
        }
    }
    (g, b)
}

/// Solves the normal equations, returning the coefficients and the ridge `eta` used.
pub(crate) fn solve_normal_equations<T: Scalar>(gram: &[T], rhs: &[T], d: usize) -> (Vec<T>, T) {
    let trace: T = (0..d).map(|i| gram[i * d + i]).sum();
    let scale = trace / T::from_count(d.max(1));
    if !(scale > T::zero()) || !scale.is_finite() {
        return (vec![T::zero(); d], T::zero());
    }
    let pivot_rtol = T::lit(PIVOT_RTOL).max(T::lit(1e3) * T::epsilon());
    if let Some(l) = cholesky(gram, d, pivot_rtol * scale) {
        return (cholesky_solve(&l, d, rhs), T::zero());
    }

    let mut eta = T::lit(RIDGE_RTOL).max(T::lit(1e2) * T::epsilon()) * scale;
    let factor = loop {
        let mut shifted = gram.to_vec();
        for i in 0..d {
            shifted[i * d + i] += eta;
        }
        if let Some(l) = cholesky(&shifted, d, T::zero()) {
            break l;
        }
        eta *= T::lit(10.0);
    };

    let mut v = vec![T::zero(); d];
    let tol = T::epsilon() * T::lit(4.0);
    let mut last_step = T::infinity();
    for _ in 0..MAX_REFINE {
        let gv = sym_mul(gram, d, &v);
        let residual: Vec<T> = rhs.iter().zip(&gv).map(|(&b, &g)| b - g).collect();
        let step = cholesky_solve(&factor, d, &residual);
        let step_max = step.iter().fold(T::zero(), |m, s| m.max(s.abs()));
        // steps shrink geometrically; a growing one is rounding noise
        if !step_max.is_finite() || step_max > last_step {
            break;
        }
        last_step = step_max;
        let mut v_max = T::zero();
        for (vi, si) in v.iter_mut().zip(&step) {
            *vi += *si;
            v_max = v_max.max(vi.abs());
        }
        if step_max <= tol * v_max {
            break;
        }
    }
    (v, eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn exact_line() {
        let m = fit_linear(array![[1.0f64], [2.0], [3.0]].view(), array![2.0, 4.0, 6.0].view());
        assert!((m.coefficients[0] - 2.0).abs() < 1e-9);
        assert!(m.coefficients[1].abs() < 1e-9);
        assert_eq!(m.ridge_eta, 0.0);
        assert!((predict_linear(&m, &[3.0]).unwrap() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn duplicated_column_uses_ridge() {
        let x = array![[1.0f64, 1.0], [2.0, 2.0], [3.0, 3.0]];
        let y = array![1.0, 2.0, 3.0];
        let m = fit_linear(x.view(), y.view());
        assert!(m.ridge_eta > 0.0);
        assert!(m.coefficients.iter().all(|c| c.is_finite()));
        for (row, &target) in x.rows().into_iter().zip(&y) {
            let pred = m.predict(row.as_slice().unwrap()).unwrap();
            assert!((pred - target).abs() < 1e-6, "{pred} vs {target}");
        }
    }

    #[test]
    fn underdetermined_fit_interpolates() {
        // one point, two features plus intercept
        let m = fit_linear(array![[1.0f64, -2.0]].view(), array![3.0].view());
        assert!((m.predict(&[1.0, -2.0]).unwrap() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn zero_model_predicts_zero() {
        let m = LinearModel {
            coefficients: vec![0.0; 3],
            intercept: true,
            ridge_eta: 0.0,
        };
        assert_eq!(m.predict(&[5.0, -1.0]).unwrap(), 0.0);
        assert!(matches!(
            m.predict(&[1.0]),
            Err(LessError::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn no_intercept_single_column() {
        let z = array![[1.0f64], [2.0], [-1.0]];
        let m = fit_least_squares(z.view(), array![1.0, 2.0, -1.0].view(), false);
        assert!((m.coefficients[0] - 1.0).abs() < 1e-12);
        assert_eq!(m.coefficients.len(), 1);
    }

    #[test]
    fn all_zero_design() {
        let z = array![[0.0, 0.0], [0.0, 0.0]];
        let m = fit_least_squares(z.view(), array![1.0, 2.0].view(), false);
        assert_eq!(m.coefficients, vec![0.0, 0.0]);
    }
}
