mod common;

use common::*;

#[test]
fn weights_sum_to_one() {
    weight_normalization(1000).unwrap();
}

#[test]
fn softmax_ignores_distance_shift() {
    softmax_shift_invariance(500).unwrap();
}

#[test]
fn kernel_is_symmetric_and_consistent() {
    kernel_properties(300).unwrap();
}

#[test]
fn average_lies_between_replications() {
    averaging_bounds(300).unwrap();
}

#[test]
fn normalization_inverts() {
    normalization_round_trip(300).unwrap();
}

#[test]
fn knn_subsets_match_full_sort() {
    knn_matches_brute_force(200).unwrap();
}

#[test]
fn kmeans_sse_never_increases() {
    kmeans_sse_monotone(200).unwrap();
}

#[test]
fn linear_fit_solves_normal_equations() {
    linear_normal_equations(500).unwrap();
}

#[test]
fn root_split_is_optimal() {
    tree_split_matches_exhaustive(500).unwrap();
}

#[test]
fn folds_partition_rows() {
    fold_partitions(200).unwrap();
}
