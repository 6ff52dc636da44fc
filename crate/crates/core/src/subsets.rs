//! Localized subset construction: random anchors expanded to their nearest
//! neighbors, or a k-means partition.

use ndarray::ArrayView2;
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LessError, Result};
use crate::scalar::{cmp_scalar, Scalar};
use crate::weighting::squared_euclidean;

/// Maximum number of Lloyd iterations.
pub const KMEANS_MAX_ITER: usize = 300;

/// Row indices of one subset and the mean of those rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SubsetSpec<T: Scalar> {
    pub indices: Vec<usize>,
    pub centroid: Vec<T>,
}

impl<T: Scalar> SubsetSpec<T> {
    pub(crate) fn from_indices(data: &[T], p: usize, indices: Vec<usize>) -> Self {
        let centroid = mean_of_rows(data, p, &indices);
        Self { indices, centroid }
    }
}

fn mean_of_rows<T: Scalar>(data: &[T], p: usize, rows: &[usize]) -> Vec<T> {
    let mut c = vec![T::zero(); p];
    for &i in rows {
        for (acc, &v) in c.iter_mut().zip(&data[i * p..(i + 1) * p]) {
            *acc += v;
        }
    }
    let n = T::from_count(rows.len().max(1));
    c.iter_mut().for_each(|v| *v /= n);
    c
}

/// The `k` rows nearest to `anchor`, ordered by distance then row index.
pub(crate) fn nearest_rows<T: Scalar>(data: &[T], p: usize, anchor: &[T], k: usize) -> Vec<usize> {
    let n = data.len() / p;
    let mut keyed: Vec<(T, usize)> = (0..n)
        .map(|i| (squared_euclidean(&data[i * p..(i + 1) * p], anchor), i))
        .collect();
    let order = |a: &(T, usize), b: &(T, usize)| cmp_scalar(a.0, b.0).then(a.1.cmp(&b.1));
    let k = k.min(n);
    if k < n {
        keyed.select_nth_unstable_by(k - 1, order);
        keyed.truncate(k);
    }
    keyed.sort_unstable_by(order);
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Draws `m` distinct anchor rows uniformly and expands each to its `k`
/// nearest rows (the anchor itself included). Ties at the k-th distance go
/// to the lower row index.
pub fn select_random_anchor_subsets<T: Scalar, R: Rng + ?Sized>(
    x: ArrayView2<'_, T>,
    m: usize,
    k: usize,
    rng: &mut R,
) -> Result<Vec<SubsetSpec<T>>> {
    let n = x.nrows();
    check_counts(m, n)?;
    if k == 0 {
        return Err(LessError::InvalidConfig("k must be positive".into()));
    }
    let anchors = sample(rng, n, m).into_vec();
    Ok(anchor_subsets(x, &anchors, k))
}

/// Subsets around the given anchor rows.
pub fn anchor_subsets<T: Scalar>(x: ArrayView2<'_, T>, anchors: &[usize], k: usize) -> Vec<SubsetSpec<T>> {
    let x = x.as_standard_layout();
    let p = x.ncols();
    let data = x.as_slice().expect("standard layout");
    anchors
        .par_iter()
        .map(|&a| {
            let rows = nearest_rows(data, p, &data[a * p..(a + 1) * p], k);
            SubsetSpec::from_indices(data, p, rows)
        })
        .collect()
}

fn check_counts(m: usize, n: usize) -> Result<()> {
    if m == 0 {
        return Err(LessError::InvalidConfig("need at least one subset".into()));
    }
    if m > n {
        return Err(LessError::TooManySubsets { m, n });
    }
    Ok(())
}

/// Result of a k-means run.
#[derive(Debug, Clone)]
pub struct KMeansResult<T: Scalar> {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<T>>,
    /// Within-cluster sum of squares after each update step.
    pub sse_history: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

fn nearest_centroid<T: Scalar>(row: &[T], centroids: &[Vec<T>]) -> (usize, T) {
    let mut best = (0, squared_euclidean(row, &centroids[0]));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = squared_euclidean(row, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn kmeans_plus_plus<T: Scalar, R: Rng + ?Sized>(data: &[T], p: usize, m: usize, rng: &mut R) -> Vec<Vec<T>> {
    let n = data.len() / p;
    let row = |i: usize| &data[i * p..(i + 1) * p];
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<T> = (0..n).map(|i| squared_euclidean(row(i), row(chosen[0]))).collect();
    while chosen.len() < m {
        let total: T = d2.iter().copied().sum();
        let next = if total > T::zero() {
            let target = T::lit(rng.random::<f64>()) * total;
            let mut acc = T::zero();
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > T::zero() && acc >= target {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| d2.iter().rposition(|&d| d > T::zero()).expect("positive mass"))
        } else {
            // every row coincides with a chosen center
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            let nd = squared_euclidean(row(i), row(next));
            if nd < *d {
                *d = nd;
            }
        }
    }
    chosen.into_iter().map(|i| row(i).to_vec()).collect()
}

/// Lloyd's algorithm from a k-means++ start. Stops when assignments no longer
/// change or after [`KMEANS_MAX_ITER`] iterations. An emptied cluster is
/// re-seeded with the point farthest from its current centroid (taken from a
/// cluster that keeps at least one member).
pub fn kmeans<T: Scalar, R: Rng + ?Sized>(x: ArrayView2<'_, T>, m: usize, rng: &mut R) -> Result<KMeansResult<T>> {
    let (n, p) = x.dim();
    check_counts(m, n)?;
    let x = x.as_standard_layout();
    let data = x.as_slice().expect("standard layout");
    let row = |i: usize| &data[i * p..(i + 1) * p];

    let mut centroids = kmeans_plus_plus(data, p, m, rng);
    // a point tied between its current cluster and another one stays put
    let reassign = |centroids: &[Vec<T>], current: &[usize]| -> Vec<usize> {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let (j, d) = nearest_centroid(row(i), centroids);
                let stay = current[i];
                if stay != j && !(d < squared_euclidean(row(i), &centroids[stay])) {
                    stay
                } else {
                    j
                }
            })
            .collect()
    };
    let mut assignments: Vec<usize> = (0..n)
        .into_par_iter()
        .map(|i| nearest_centroid(row(i), &centroids).0)
        .collect();
    let mut sse_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    loop {
        iterations += 1;
        // update step
        let mut counts = vec![0usize; m];
        let mut sums = vec![vec![T::zero(); p]; m];
        for (i, &a) in assignments.iter().enumerate() {
            counts[a] += 1;
            for (s, &v) in sums[a].iter_mut().zip(row(i)) {
                *s += v;
            }
        }
        for j in 0..m {
            if counts[j] > 0 {
                let c = T::from_count(counts[j]);
                centroids[j] = sums[j].iter().map(|&s| s / c).collect();
            }
        }
        let mut reseeded = false;
        for j in 0..m {
            if counts[j] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&i| counts[assignments[i]] > 1)
                .map(|i| (i, squared_euclidean(row(i), &centroids[assignments[i]])))
                .fold(None::<(usize, T)>, |best, cand| match best {
                    Some(b) if !(cand.1 > b.1) => Some(b),
                    _ => Some(cand),
                })
                .map(|(i, _)| i)
                .expect("m <= n leaves a donor cluster");
            counts[assignments[far]] -= 1;
            counts[j] = 1;
            assignments[far] = j;
            centroids[j] = row(far).to_vec();
            reseeded = true;
        }
        sse_history.push(
            (0..n)
                .map(|i| squared_euclidean(row(i), &centroids[assignments[i]]))
                .sum(),
        );
        if iterations >= KMEANS_MAX_ITER {
            break;
        }
        // assignment step
        let next = reassign(&centroids, &assignments);
        if next == assignments && !reseeded {
            converged = true;
            break;
        }
        assignments = next;
    }

    Ok(KMeansResult {
        assignments,
        centroids,
        sse_history,
        iterations,
        converged,
    })
}

/// k-means clusters as subsets; they partition the rows.
pub fn select_kmeans_subsets<T: Scalar, R: Rng + ?Sized>(
    x: ArrayView2<'_, T>,
    m: usize,
    rng: &mut R,
) -> Result<Vec<SubsetSpec<T>>> {
    let result = kmeans(x, m, rng)?;
    let x = x.as_standard_layout();
    let p = x.ncols();
    let data = x.as_slice().expect("standard layout");
    let mut members = vec![Vec::new(); m];
    for (i, &a) in result.assignments.iter().enumerate() {
        members[a].push(i);
    }
    Ok(members
        .into_iter()
        .map(|rows| SubsetSpec::from_indices(data, p, rows))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use ndarray::{array, Array2};

    #[test]
    fn full_neighborhood_is_everything() {
        let x = Array2::from_shape_fn((9, 2), |(i, j)| (i * 3 + j) as f64);
        let subsets = select_random_anchor_subsets(x.view(), 3, 9, &mut rng_from_seed(2)).unwrap();
        for s in &subsets {
            let mut idx = s.indices.clone();
            idx.sort();
            assert_eq!(idx, (0..9).collect::<Vec<_>>());
            assert!((s.centroid[0] - 12.0).abs() < 1e-12);
            assert!((s.centroid[1] - 13.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tie_goes_to_lower_index() {
        let x = array![[0.0f64], [1.0], [2.0], [10.0]];
        let s = anchor_subsets(x.view(), &[1], 2);
        assert_eq!(s[0].indices, vec![1, 0]);
        assert!((s[0].centroid[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn too_many_subsets() {
        let x = array![[0.0], [1.0]];
        assert!(matches!(
            select_random_anchor_subsets(x.view(), 3, 1, &mut rng_from_seed(0)),
            Err(LessError::TooManySubsets { m: 3, n: 2 })
        ));
        assert!(matches!(
            select_kmeans_subsets(x.view(), 3, &mut rng_from_seed(0)),
            Err(LessError::TooManySubsets { .. })
        ));
    }

    #[test]
    fn single_cluster_is_global_mean() {
        let x = array![[0.0f64, 1.0], [2.0, 3.0], [4.0, 8.0]];
        let s = select_kmeans_subsets(x.view(), 1, &mut rng_from_seed(4)).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].indices, vec![0, 1, 2]);
        assert!((s[0].centroid[0] - 2.0).abs() < 1e-12);
        assert!((s[0].centroid[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_points_still_fill_every_cluster() {
        let x = array![[1.0], [1.0], [1.0], [1.0]];
        let s = select_kmeans_subsets(x.view(), 3, &mut rng_from_seed(8)).unwrap();
        assert!(s.iter().all(|c| !c.indices.is_empty()));
        assert_eq!(s.iter().map(|c| c.indices.len()).sum::<usize>(), 4);
    }
}
