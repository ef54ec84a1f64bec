//! Closed forms against the dense-generator oracle over parameter grids.

use immunolearn_core::analytics::{
    collection_time_laplace, hitting_time_mean_exact, hitting_time_variance_exact, invariant_pmf,
    steady_allones_probability,
};
use immunolearn_core::oracle::{hitting_moments, stationary_solve, DenseGenerator};
use immunolearn_core::{ColumnState, MatrixParams, SingleColumnParams};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn pmf_matches_stationary_solve() {
    for m in 1..=12 {
        for alpha in [0.25, 1.0, 3.0] {
            for p in [0.05, 0.5, 0.95] {
                let params = SingleColumnParams::new(m, alpha, p).unwrap();
                let gen = DenseGenerator::single_column(&params).unwrap();
                let pi = stationary_solve(&gen).unwrap();
                assert!(gen.residual(&pi) < 1e-12);
                for (k, (a, b)) in invariant_pmf(&params).iter().zip(&pi).enumerate() {
                    assert!(rel(*a, *b) < 1e-10, "M={m} α={alpha} p={p} k={k}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn hitting_moments_match_from_every_start() {
    for m in [1, 2, 5, 17, 40] {
        for (alpha, p) in [(1.0, 0.5), (0.5, 0.1), (2.0, 0.9)] {
            let params = SingleColumnParams::new(m, alpha, p).unwrap();
            let (mean, second) = hitting_moments(&DenseGenerator::single_column(&params).unwrap(), &[m]).unwrap();
            for k in 0..m {
                let e = hitting_time_mean_exact(&params, ColumnState(k)).unwrap().value;
                let v = hitting_time_variance_exact(&params, ColumnState(k)).unwrap().value;
                assert!(rel(e, mean[k]) < 1e-9, "mean M={m} k={k}");
                assert!(rel(v, second[k] - mean[k] * mean[k]) < 1e-7, "variance M={m} k={k}");
            }
        }
    }
}

#[test]
fn steady_column_probability_matches_full_chain() {
    for (m, n) in [(1, 1), (1, 3), (2, 2), (3, 2), (2, 4), (3, 3)] {
        for (p, l) in [(0.5, 0.0), (0.3, 0.1), (0.8, 2.0)] {
            let params = MatrixParams::new(m, n, p, l).unwrap();
            let pi = stationary_solve(&DenseGenerator::matrix_model(&params).unwrap()).unwrap();
            for col in 0..n {
                let mask = (0..m).fold(0usize, |acc, i| acc | 1 << (i * n + col));
                let full: f64 = pi.iter().enumerate().filter(|(s, _)| s & mask == mask).map(|(_, x)| x).sum();
                assert!(rel(steady_allones_probability(&params).value, full) < 1e-10, "{m}x{n} p={p} λ={l}");
            }
        }
    }
}

#[test]
fn laplace_transform_matches_product_form() {
    for m in [1, 3, 10, 100, 1000] {
        for (q, s) in [(1.0, 1e-4), (0.9, 0.3), (1.9, 0.001)] {
            let product: f64 = (1..=m).map(|j| j as f64 * q / m as f64).map(|r| r / (r + s)).product();
            if product < f64::MIN_POSITIVE {
                // the reference product itself has left the normal range
                continue;
            }
            assert!(rel(collection_time_laplace(m, q, s).unwrap().value, product) < 1e-11, "M={m}");
        }
    }
}
