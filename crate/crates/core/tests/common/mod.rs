//! Independent oracles and property checks shared by the integration suites.
#![allow(dead_code)]

use less_core::estimators::{fit_linear, fit_tree, TreeNode};
use less_core::eval::make_folds;
use less_core::seed::rng_from_seed;
use less_core::subsets::{anchor_subsets, kmeans};
use less_core::synthetic::smooth_nonlinear;
use less_core::{distance_weights, fit, kernel, Dataset, LessConfig, LessModel, NormStats};
use ndarray::{Array1, Array2};
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

/// Least squares by Householder QR on `[X | 1]` (or `X`), full column rank assumed.
pub fn ols_qr(x: &[Vec<f64>], y: &[f64], intercept: bool) -> Vec<f64> {
    let n = x.len();
    let d = x[0].len() + usize::from(intercept);
    let mut a: Vec<Vec<f64>> = x
        .iter()
        .map(|r| {
            let mut r = r.clone();
            if intercept {
                r.push(1.0);
            }
            r
        })
        .collect();
    let mut b = y.to_vec();
    for k in 0..d {
        let norm = (k..n).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..n).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vv = v.iter().map(|t| t * t).sum::<f64>();
        if vv == 0.0 {
            continue;
        }
        for j in k..d {
            let s = (k..n).map(|i| v[i - k] * a[i][j]).sum::<f64>() * 2.0 / vv;
            for i in k..n {
                a[i][j] -= s * v[i - k];
            }
        }
        let s = (k..n).map(|i| v[i - k] * b[i]).sum::<f64>() * 2.0 / vv;
        for i in k..n {
            b[i] -= s * v[i - k];
        }
    }
    let mut coef = vec![0.0; d];
    for k in (0..d).rev() {
        let s = b[k] - (k + 1..d).map(|j| a[k][j] * coef[j]).sum::<f64>();
        coef[k] = s / a[k][k];
    }
    coef
}

/// Numerical rank of a set of vectors by Gram-Schmidt with relative tolerance.
pub fn rank(vectors: &[Vec<f64>], rtol: f64) -> usize {
    let scale = vectors
        .iter()
        .map(|v| v.iter().map(|t| t * t).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
                w.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let nw = w.iter().map(|t| t * t).sum::<f64>().sqrt();
        if nw > rtol * scale.max(f64::MIN_POSITIVE) {
            basis.push(w.into_iter().map(|t| t / nw).collect());
        }
    }
    basis.len()
}

/// The `k` nearest rows to `anchor` by a full sort on (distance, index).
pub fn brute_knn(rows: &[Vec<f64>], anchor: &[f64], k: usize) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let d = r.iter().zip(anchor).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            (d, i)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    keyed.into_iter().take(k).map(|(_, i)| i).collect()
}

fn sse(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - m) * (v - m)).sum()
}

/// Largest reduction in squared error over all axis-aligned binary splits.
pub fn exhaustive_split_gain(rows: &[Vec<f64>], y: &[f64]) -> f64 {
    let total = sse(y);
    let p = rows[0].len();
    let mut best = 0.0f64;
    for f in 0..p {
        let mut values: Vec<f64> = rows.iter().map(|r| r[f]).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        for w in values.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let left: Vec<f64> = rows.iter().zip(y).filter(|(r, _)| r[f] <= t).map(|(_, &v)| v).collect();
            let right: Vec<f64> = rows.iter().zip(y).filter(|(r, _)| r[f] > t).map(|(_, &v)| v).collect();
            best = best.max(total - sse(&left) - sse(&right));
        }
    }
    best
}

pub fn to_rows(x: &Array2<f64>) -> Vec<Vec<f64>> {
    x.rows().into_iter().map(|r| r.to_vec()).collect()
}

pub fn matrix(rows: &[Vec<f64>]) -> Array2<f64> {
    let p = rows[0].len();
    Array2::from_shape_vec((rows.len(), p), rows.concat()).unwrap()
}

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

type Outcome = Result<(), String>;

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Outcome {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn matrix_strategy(n: std::ops::Range<usize>, p: std::ops::Range<usize>, lo: f64, hi: f64) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (n, p).prop_flat_map(move |(n, p)| vec(vec(lo..hi, p), n))
}

/// Small-integer coordinates, so that distance and split ties occur often.
fn tied_matrix(n: std::ops::Range<usize>, p: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (n, p).prop_flat_map(|(n, p)| vec(vec((-3i32..=3).prop_map(f64::from), p), n))
}

pub fn weight_normalization(cases: u32) -> Outcome {
    let s = (1usize..6).prop_flat_map(|p| {
        (vec(vec(-5.0..5.0f64, p), 1..20), vec(-5.0..5.0f64, p), 0.0..1e3f64)
    });
    run(cases, s, |(centroids, x, lambda)| {
        let w = less_core::compute_weights(&x, &centroids, lambda, true).unwrap();
        let total: f64 = w.w.iter().sum();
        check((total - 1.0).abs() <= 1e-10, || format!("sum {total}"))?;
        check(w.w.iter().all(|&v| (0.0..=1.0).contains(&v)), || format!("{:?}", w.w))
    })
}

pub fn softmax_shift_invariance(cases: u32) -> Outcome {
    let s = (vec(0.0..10.0f64, 1..20), 0.0..50.0f64, 0.0..50.0f64);
    run(cases, s, |(d, lambda, shift)| {
        let a = distance_weights(&d, lambda, true).unwrap();
        let shifted: Vec<f64> = d.iter().map(|v| v + shift).collect();
        let b = distance_weights(&shifted, lambda, true).unwrap();
        for (x, y) in a.w.iter().zip(&b.w) {
            check((x - y).abs() <= 1e-12, || format!("{x} vs {y}"))?;
        }
        Ok(())
    })
}

pub fn small_model(seed: u64) -> LessModel<f64> {
    let data: Dataset<f64> = smooth_nonlinear(120, 3, seed);
    fit(
        &data,
        &LessConfig {
            frac_of_samples: 0.1,
            n_replications: 5,
            seed,
            ..LessConfig::default()
        },
    )
    .unwrap()
}

pub fn kernel_properties(cases: u32) -> Outcome {
    let model = small_model(3);
    let s = (vec(-3.0..3.0f64, 3), vec(-3.0..3.0f64, 3));
    run(cases, s, |(a, b)| {
        for rep in &model.replications {
            let kab = kernel(rep, &a, &b).unwrap();
            let kba = kernel(rep, &b, &a).unwrap();
            check((kab - kba).abs() <= 1e-12 * (1.0 + kab.abs()), || format!("{kab} vs {kba}"))?;
            let kaa = kernel(rep, &a, &a).unwrap();
            let z = rep.generate_features(&a).unwrap().z;
            let zz: f64 = z.iter().map(|v| v * v).sum();
            check(kaa >= 0.0, || format!("k(a, a) = {kaa}"))?;
            check((kaa - zz).abs() <= 1e-12 * (1.0 + zz), || format!("{kaa} vs {zz}"))?;
        }
        Ok(())
    })
}

pub fn averaging_bounds(cases: u32) -> Outcome {
    let model = small_model(4);
    run(cases, vec(-3.0..3.0f64, 3), |x| {
        let preds = model.replication_predictions(&x).unwrap();
        let lo = preds.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = preds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let avg = model.predict_normalized(&x).unwrap();
        let tol = 1e-12 * (1.0 + hi.abs().max(lo.abs()));
        check(avg >= lo - tol && avg <= hi + tol, || format!("{avg} outside [{lo}, {hi}]"))
    })
}

pub fn normalization_round_trip(cases: u32) -> Outcome {
    let s = (matrix_strategy(2..30, 1..5, -1e3, 1e3), vec(-1e3..1e3f64, 30));
    run(cases, s, |(rows, ys)| {
        let n = rows.len();
        let data = Dataset::new(matrix(&rows), Array1::from(ys[..n].to_vec())).unwrap();
        let norm = NormStats::fit(&data);
        for (i, r) in rows.iter().enumerate() {
            let back = norm.denormalize_row(&norm.normalize_row(r).unwrap());
            for (a, b) in r.iter().zip(&back) {
                check((a - b).abs() <= 1e-12 * a.abs().max(1.0), || format!("{a} vs {b}"))?;
            }
            let y = ys[i];
            let yb = norm.denormalize_y(norm.normalize_y(y));
            check((y - yb).abs() <= 1e-12 * y.abs().max(1.0), || format!("{y} vs {yb}"))?;
        }
        Ok(())
    })
}

pub fn knn_matches_brute_force(cases: u32) -> Outcome {
    let s = tied_matrix(1..200, 1..4).prop_flat_map(|rows| {
        let n = rows.len();
        (Just(rows), 1..=n, vec(0..n, 1..5))
    });
    run(cases, s, |(rows, k, anchors)| {
        let got = anchor_subsets(matrix(&rows).view(), &anchors, k);
        for (a, subset) in anchors.iter().zip(&got) {
            let want = brute_knn(&rows, &rows[*a], k);
            check(subset.indices == want, || format!("anchor {a}: {:?} vs {want:?}", subset.indices))?;
        }
        Ok(())
    })
}

pub fn kmeans_sse_monotone(cases: u32) -> Outcome {
    let s = (matrix_strategy(2..60, 1..4, -5.0, 5.0), 1usize..7, any::<u64>());
    run(cases, s, |(rows, m, seed)| {
        let m = m.min(rows.len());
        let r = kmeans(matrix(&rows).view(), m, &mut rng_from_seed(seed)).unwrap();
        for w in r.sse_history.windows(2) {
            check(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, || format!("{:?}", r.sse_history))?;
        }
        let mut counts = vec![0usize; m];
        r.assignments.iter().for_each(|&a| counts[a] += 1);
        check(counts.iter().all(|&c| c > 0), || format!("empty cluster {counts:?}"))
    })
}

pub fn linear_normal_equations(cases: u32) -> Outcome {
    let s = matrix_strategy(1..40, 1..6, -1.0, 1.0).prop_flat_map(|rows| {
        let n = rows.len();
        (Just(rows), vec(-1.0..1.0f64, n))
    });
    run(cases, s, |(rows, y)| {
        let m = fit_linear(matrix(&rows).view(), Array1::from(y.clone()).view());
        let d = rows[0].len() + 1;
        let mut g = vec![0.0; d];
        for (r, &t) in rows.iter().zip(&y) {
            let mut a = r.clone();
            a.push(1.0);
            let res = a.iter().zip(&m.coefficients).map(|(u, v)| u * v).sum::<f64>() - t;
            g.iter_mut().zip(&a).for_each(|(gi, ai)| *gi += ai * res);
        }
        let worst = g.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        check(worst < 1e-6, || format!("normal-equation residual {worst}"))
    })
}

pub fn tree_split_matches_exhaustive(cases: u32) -> Outcome {
    let s = tied_matrix(2..21, 1..4).prop_flat_map(|rows| {
        let n = rows.len();
        (Just(rows), vec((-10i32..=10).prop_map(f64::from), n))
    });
    run(cases, s, |(rows, y)| {
        let oracle = exhaustive_split_gain(&rows, &y);
        let tree = fit_tree(matrix(&rows).view(), Array1::from(y.clone()).view(), 2, &mut rng_from_seed(0));
        match &tree.nodes[0] {
            TreeNode::Leaf { .. } => check(oracle <= 1e-9, || format!("leaf but oracle gain {oracle}")),
            TreeNode::Split { feature, threshold, .. } => {
                let left: Vec<f64> = rows.iter().zip(&y).filter(|(r, _)| r[*feature] <= *threshold).map(|(_, &v)| v).collect();
                let right: Vec<f64> = rows.iter().zip(&y).filter(|(r, _)| r[*feature] > *threshold).map(|(_, &v)| v).collect();
                let gain = sse(&y) - sse(&left) - sse(&right);
                check(!left.is_empty() && !right.is_empty(), || "empty child".into())?;
                check((gain - oracle).abs() <= 1e-9 * (1.0 + oracle), || format!("{gain} vs {oracle}"))
            }
        }
    })
}

pub fn fold_partitions(cases: u32) -> Outcome {
    let s = (20usize..300, any::<u64>());
    run(cases, s, |(n, seed)| {
        let plan = make_folds(n, 5, 4, seed).unwrap();
        let mut all: Vec<usize> = plan.outer.iter().flatten().copied().collect();
        all.sort_unstable();
        check(all == (0..n).collect::<Vec<_>>(), || "outer folds do not partition".into())?;
        let sizes: Vec<usize> = plan.outer.iter().map(Vec::len).collect();
        check(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1, || format!("{sizes:?}"))?;
        for o in 0..5 {
            let train = plan.outer_train(o);
            check(train.iter().all(|i| !plan.outer[o].contains(i)), || "test row in train".into())?;
            let mut inner: Vec<usize> = plan.inner[o].iter().flatten().copied().collect();
            inner.sort_unstable();
            check(inner == train, || "inner folds do not partition the outer train split".into())?;
            let sizes: Vec<usize> = plan.inner[o].iter().map(Vec::len).collect();
            check(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1, || format!("{sizes:?}"))?;
            for i in 0..4 {
                let tr = plan.inner_train(o, i);
                check(tr.iter().all(|r| !plan.inner[o][i].contains(r) && !plan.outer[o].contains(r)), || {
                    "inner train overlaps a held-out fold".into()
                })?;
            }
        }
        Ok(())
    })
}

/// Every property of the suite with its case count.
pub fn property_suite() -> Vec<(&'static str, fn(u32) -> Outcome, u32)> {
    vec![
        ("weight normalization", weight_normalization as fn(u32) -> Outcome, 1000),
        ("softmax shift invariance", softmax_shift_invariance, 500),
        ("kernel symmetry, positivity, z.z", kernel_properties, 300),
        ("averaging bounds", averaging_bounds, 300),
        ("normalize/denormalize round trip", normalization_round_trip, 300),
        ("kNN subsets vs brute force", knn_matches_brute_force, 200),
        ("k-means SSE monotone", kmeans_sse_monotone, 200),
        ("linear normal-equation residual", linear_normal_equations, 500),
        ("tree split vs exhaustive", tree_split_matches_exhaustive, 500),
        ("fold partitions", fold_partitions, 200),
    ]
}
