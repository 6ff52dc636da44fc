//! Dense symmetric solves used by the least-squares estimators.
//!
//! Matrices are row-major `dim x dim` slices.

use crate::scalar::Scalar;

/// Lower Cholesky factor of `a`, or `None` if some pivot is `<= min_pivot`.
pub(crate) fn cholesky<T: Scalar>(a: &[T], dim: usize, min_pivot: T) -> Option<Vec<T>> {
    debug_assert_eq!(a.len(), dim * dim);
    let mut l = vec![T::zero(); dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if !(s > min_pivot) || !s.is_finite() {
                    return None;
                }
                l[i * dim + i] = s.sqrt();
            } else {
                l[i * dim + j] = s / l[j * dim + j];
            }
        }
    }
    Some(l)
}

/// Solves `L L^T x = b` given the factor from [`cholesky`].
pub(crate) fn cholesky_solve<T: Scalar>(l: &[T], dim: usize, b: &[T]) -> Vec<T> {
    let mut z = vec![T::zero(); dim];
    for i in 0..dim {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * dim + k] * z[k];
        }
        z[i] = s / l[i * dim + i];
    }
    let mut x = vec![T::zero(); dim];
    for i in (0..dim).rev() {
        let mut s = z[i];
        for k in i + 1..dim {
            s -= l[k * dim + i] * x[k];
        }
        x[i] = s / l[i * dim + i];
    }
    x
}

/// `g * v` for a row-major square `g`.
pub(crate) fn sym_mul<T: Scalar>(g: &[T], dim: usize, v: &[T]) -> Vec<T> {
    (0..dim)
        .map(|i| {
            g[i * dim..(i + 1) * dim]
                .iter()
                .zip(v)
                .map(|(&a, &b)| a * b)
                .sum()
        })
        .collect()
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system() {
        // [[4,2],[2,3]] x = [2, 1] -> x = [0.5, 0]
        let a = [4.0f64, 2.0, 2.0, 3.0];
        let l = cholesky(&a, 2, 0.0).unwrap();
        let x = cholesky_solve(&l, 2, &[2.0, 1.0]);
        assert!((x[0] - 0.5).abs() < 1e-15 && x[1].abs() < 1e-15);
    }

    #[test]
    fn singular_is_rejected() {
        let a = [1.0, 1.0, 1.0, 1.0];
        assert!(cholesky(&a, 2, 1e-12).is_none());
    }
}
