//! CART regression tree grown by greedy variance reduction.

use ndarray::{ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LessError, Result};
use crate::scalar::{cmp_scalar, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode<T: Scalar> {
    Leaf {
        value: T,
        n_samples: usize,
    },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
}

/// Binary regression tree stored as an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TreeModel<T: Scalar> {
    pub nodes: Vec<TreeNode<T>>,
    pub min_samples_split: usize,
    pub n_features: usize,
}

impl<T: Scalar> TreeModel<T> {
    pub fn predict(&self, x: &[T]) -> Result<T> {
        if x.len() != self.n_features {
            return Err(LessError::DimensionMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[T]) -> T {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    /// `(feature, threshold)` of every internal node.
    pub fn splits(&self) -> Vec<(usize, T)> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                TreeNode::Split {
                    feature, threshold, ..
                } => Some((*feature, *threshold)),
                TreeNode::Leaf { .. } => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub min_samples_split: usize,
    /// Features drawn per split; `None` searches all of them.
    pub max_features: Option<usize>,
}

/// Fits a CART tree on all rows. Splits are searched over every feature, so
/// the result does not depend on `rng`; it is accepted for a uniform
/// estimator interface.
pub fn fit_tree<T: Scalar, R: Rng + ?Sized>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    min_samples_split: usize,
    rng: &mut R,
) -> TreeModel<T> {
    let samples: Vec<usize> = (0..x.nrows()).collect();
    fit_tree_on(
        x,
        y,
        samples,
        TreeParams {
            min_samples_split,
            max_features: None,
        },
        rng,
    )
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SplitChoice<T> {
    pub feature: usize,
    pub threshold: T,
    pub gain: T,
}

/// Best variance-reducing split of `samples` over `features` (searched in the
/// given order, first maximum kept). The gain is the drop in squared error,
/// `n_l n_r / n * (mean_l - mean_r)^2`.
pub(crate) fn best_split<T: Scalar>(
    data: &[T],
    p: usize,
    y: &[T],
    samples: &[usize],
    features: &[usize],
) -> Option<SplitChoice<T>> {
    let n = samples.len();
    if n < 2 {
        return None;
    }
    let total: T = samples.iter().map(|&i| y[i]).sum();
    let n_t = T::from_count(n);
    let mut best: Option<SplitChoice<T>> = None;
    let mut pairs: Vec<(T, T)> = Vec::with_capacity(n);
    for &f in features {
        pairs.clear();
        pairs.extend(samples.iter().map(|&i| (data[i * p + f], y[i])));
        pairs.sort_by(|a, b| cmp_scalar(a.0, b.0));
        let mut left_sum = T::zero();
        for pos in 0..n - 1 {
            left_sum += pairs[pos].1;
            let (lo, hi) = (pairs[pos].0, pairs[pos + 1].0);
            if !(lo < hi) {
                continue;
            }
            let n_l = T::from_count(pos + 1);
            let n_r = n_t - n_l;
            let diff = left_sum / n_l - (total - left_sum) / n_r;
            let gain = n_l * n_r / n_t * diff * diff;
            if best.map_or(true, |b| gain > b.gain) {
                let mut threshold = (lo + hi) / T::lit(2.0);
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some(SplitChoice {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best.filter(|b| b.gain > T::zero())
}

pub(crate) fn fit_tree_on<T: Scalar, R: Rng + ?Sized>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    samples: Vec<usize>,
    params: TreeParams,
    rng: &mut R,
) -> TreeModel<T> {
    let x = x.as_standard_layout();
    let p = x.ncols();
    let data = x.as_slice().expect("standard layout");
    let y: Vec<T> = y.iter().copied().collect();
    let min_split = params.min_samples_split.max(2);

    let mut nodes: Vec<TreeNode<T>> = vec![TreeNode::Leaf {
        value: T::zero(),
        n_samples: 0,
    }];
    let mut stack = vec![(0usize, samples)];
    let mut feature_order: Vec<usize> = (0..p).collect();

    while let Some((id, members)) = stack.pop() {
        let n = members.len();
        let mean = members.iter().map(|&i| y[i]).sum::<T>() / T::from_count(n.max(1));
        let constant = members.iter().all(|&i| y[i] == y[members[0]]);
        let split = if n < min_split || constant {
            None
        } else {
            match params.max_features {
                Some(k) if k < p => {
                    feature_order.shuffle(rng);
                    let (head, tail) = feature_order.split_at(k);
                    let mut head = head.to_vec();
                    head.sort_unstable();
                    best_split(data, p, &y, &members, &head).or_else(|| {
                        let mut tail = tail.to_vec();
                        tail.sort_unstable();
                        best_split(data, p, &y, &members, &tail)
                    })
                }
                _ => {
                    let all: Vec<usize> = (0..p).collect();
                    best_split(data, p, &y, &members, &all)
                }
            }
        };
        match split {
            None => {
                nodes[id] = TreeNode::Leaf {
                    value: mean,
                    n_samples: n,
                }
            }
            Some(s) => {
                let (left, right): (Vec<usize>, Vec<usize>) = members
                    .into_iter()
                    .partition(|&i| data[i * p + s.feature] <= s.threshold);
                let left_id = nodes.len();
                let right_id = left_id + 1;
                nodes.push(TreeNode::Leaf {
                    value: T::zero(),
                    n_samples: 0,
                });
                nodes.push(TreeNode::Leaf {
                    value: T::zero(),
                    n_samples: 0,
                });
                nodes[id] = TreeNode::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left: left_id,
                    right: right_id,
                };
                stack.push((right_id, right));
                stack.push((left_id, left));
            }
        }
    }

    TreeModel {
        nodes,
        min_samples_split: min_split,
        n_features: p,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use ndarray::array;

    #[test]
    fn constant_target_is_single_leaf() {
        let mut rng = rng_from_seed(1);
        let t = fit_tree(array![[0.0], [1.0], [2.0]].view(), array![4.0, 4.0, 4.0].view(), 2, &mut rng);
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict(&[10.0]).unwrap(), 4.0);
    }

    #[test]
    fn step_data_single_split() {
        let mut rng = rng_from_seed(1);
        let t = fit_tree(
            array![[0.0], [1.0], [2.0], [3.0]].view(),
            array![0.0, 0.0, 10.0, 10.0].view(),
            2,
            &mut rng,
        );
        assert_eq!(t.splits(), vec![(0, 1.5)]);
        assert_eq!(t.predict(&[0.5]).unwrap(), 0.0);
        assert_eq!(t.predict(&[2.5]).unwrap(), 10.0);
        assert_eq!(t.n_leaves(), 2);
    }

    #[test]
    fn min_samples_split_stops_growth() {
        let mut rng = rng_from_seed(1);
        let x = array![[0.0f64], [1.0], [2.0], [3.0]];
        let y = array![0.0, 1.0, 5.0, 9.0];
        let t = fit_tree(x.view(), y.view(), 5, &mut rng);
        assert_eq!(t.nodes.len(), 1);
        assert!((t.predict(&[0.0]).unwrap() - 3.75).abs() < 1e-12);
    }

    #[test]
    fn tie_prefers_lowest_feature() {
        // both columns separate the targets identically
        let mut rng = rng_from_seed(1);
        let x = array![[0.0, 0.0], [1.0, 1.0]];
        let t = fit_tree(x.view(), array![0.0, 1.0].view(), 2, &mut rng);
        assert_eq!(t.splits(), vec![(0, 0.5)]);
    }

    #[test]
    fn dimension_checked() {
        let mut rng = rng_from_seed(1);
        let t = fit_tree(array![[0.0], [1.0]].view(), array![0.0, 1.0].view(), 2, &mut rng);
        assert!(t.predict(&[0.0, 1.0]).is_err());
    }
}
