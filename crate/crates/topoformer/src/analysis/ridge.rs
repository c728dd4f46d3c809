//! Ridge encoding models with leave-one-out lambda selection.
//!
//! The LOO residuals come from the hat-matrix identity
//! `loo_i = e_i / (1 - h_i)` with `h_i = sum_j U_ij^2 s_j^2 / (s_j^2 + λ)`,
//! so the full lambda grid costs one SVD instead of n refits per value.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::stats::pearson;
use super::{ActivationMatrix, AnalysisError};

pub const TRAIN_FRACTION: f64 = 0.8;
/// Default lambda grid (log-spaced) when the caller does not supply one.
pub const DEFAULT_LAMBDAS: [f64; 13] = [
    1e-3, 1e-2, 1e-1, 1.0, 3.16, 10.0, 31.6, 100.0, 316.0, 1e3, 3.16e3, 1e4, 1e5,
];

#[derive(Debug, Clone, Serialize)]
pub struct RidgeResult {
    /// Lambda chosen for each target by leave-one-out error.
    pub best_lambdas: Vec<f64>,
    /// Held-out Pearson correlation per target (0 for constant predictions).
    pub test_correlations: Vec<f64>,
    pub mean_test_correlation: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

struct TrainSvd {
    u: DMatrix<f64>,
    singular: Vec<f64>,
    v: DMatrix<f64>,
}

fn thin_svd(x: &DMatrix<f64>) -> TrainSvd {
    let svd = x.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v = svd.v_t.expect("v_t requested").transpose();
    TrainSvd {
        u,
        singular: svd.singular_values.iter().cloned().collect(),
        v,
    }
}

/// Mean squared leave-one-out residual for each lambda, for a ridge model
/// without intercept on the rows of `x` (n×p, row-major).
pub fn ridge_loo_press(
    x: &[f64],
    y: &[f64],
    n: usize,
    p: usize,
    lambdas: &[f64],
) -> Result<Vec<f64>, AnalysisError> {
    if x.len() != n * p || y.len() != n {
        return Err(AnalysisError::ShapeMismatch(format!(
            "x has {} values and y has {} for n = {n}, p = {p}",
            x.len(),
            y.len()
        )));
    }
    if n < 3 {
        return Err(AnalysisError::TooFewRows(n));
    }
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(AnalysisError::BadParameter(
            "lambdas must be positive".into(),
        ));
    }
    let xm = DMatrix::from_row_slice(n, p, x);
    let svd = thin_svd(&xm);
    Ok(press_for_grid(&svd, y, lambdas))
}

fn press_for_grid(svd: &TrainSvd, y: &[f64], lambdas: &[f64]) -> Vec<f64> {
    let n = svd.u.nrows();
    let r = svd.singular.len();
    // c = U^T y, reused across the grid
    let c: Vec<f64> = (0..r)
        .map(|j| (0..n).map(|i| svd.u[(i, j)] * y[i]).sum())
        .collect();
    lambdas
        .iter()
        .map(|&lam| {
            let mut press = 0.0;
            for i in 0..n {
                let mut fit = 0.0;
                let mut h = 0.0;
                for j in 0..r {
                    let s2 = svd.singular[j] * svd.singular[j];
                    let f = s2 / (s2 + lam);
                    fit += svd.u[(i, j)] * f * c[j];
                    h += svd.u[(i, j)] * svd.u[(i, j)] * f;
                }
                let loo = (y[i] - fit) / (1.0 - h);
                press += loo * loo;
            }
            press / n as f64
        })
        .collect()
}

fn coefficients(svd: &TrainSvd, y: &[f64], lam: f64) -> Vec<f64> {
    let n = svd.u.nrows();
    let p = svd.v.nrows();
    let r = svd.singular.len();
    let mut w = vec![0.0; p];
    for j in 0..r {
        let s = svd.singular[j];
        let c: f64 = (0..n).map(|i| svd.u[(i, j)] * y[i]).sum();
        let scale = s / (s * s + lam);
        for k in 0..p {
            w[k] += svd.v[(k, j)] * scale * c;
        }
    }
    w
}

/// Fits one ridge model per target column: an 80/20 seeded split, lambda
/// chosen by leave-one-out error on the training rows, and held-out Pearson
/// correlation as the score. Features and targets are centered with training
/// means (an implicit intercept).
pub fn ridge_encode(
    features: &ActivationMatrix,
    targets: &ActivationMatrix,
    lambdas: &[f64],
    seed: u64,
) -> Result<RidgeResult, AnalysisError> {
    if features.n != targets.n {
        return Err(AnalysisError::ShapeMismatch(format!(
            "row counts differ: {} vs {}",
            features.n, targets.n
        )));
    }
    let lambdas = if lambdas.is_empty() {
        &DEFAULT_LAMBDAS[..]
    } else {
        lambdas
    };
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(AnalysisError::BadParameter(
            "lambdas must be positive".into(),
        ));
    }

    let mut idx: Vec<usize> = (0..features.n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let n_train = ((features.n as f64) * TRAIN_FRACTION).round() as usize;
    let test_idx = idx.split_off(n_train);
    let train_idx = idx;
    if train_idx.len() < 3 || test_idx.len() < 3 {
        return Err(AnalysisError::TooFewRows(features.n));
    }

    let p = features.d;
    let feat_means: Vec<f64> = (0..p)
        .map(|j| {
            train_idx
                .iter()
                .map(|&i| features.data[i * p + j])
                .sum::<f64>()
                / train_idx.len() as f64
        })
        .collect();
    let centered = |rows: &[usize]| -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), p, |r, c| {
            features.data[rows[r] * p + c] - feat_means[c]
        })
    };
    let xt = centered(&train_idx);
    let xs = centered(&test_idx);
    let svd = thin_svd(&xt);

    let mut best_lambdas = Vec::with_capacity(targets.d);
    let mut test_correlations = Vec::with_capacity(targets.d);
    for t in 0..targets.d {
        let y_mean: f64 = train_idx
            .iter()
            .map(|&i| targets.data[i * targets.d + t])
            .sum::<f64>()
            / train_idx.len() as f64;
        let yt: Vec<f64> = train_idx
            .iter()
            .map(|&i| targets.data[i * targets.d + t] - y_mean)
            .collect();
        let press = press_for_grid(&svd, &yt, lambdas);
        let mut best = 0;
        for (i, v) in press.iter().enumerate() {
            if *v < press[best] {
                best = i;
            }
        }
        let lam = lambdas[best];
        let w = coefficients(&svd, &yt, lam);

        let pred: Vec<f64> = (0..test_idx.len())
            .map(|i| y_mean + (0..p).map(|j| xs[(i, j)] * w[j]).sum::<f64>())
            .collect();
        let actual: Vec<f64> = test_idx
            .iter()
            .map(|&i| targets.data[i * targets.d + t])
            .collect();
        best_lambdas.push(lam);
        test_correlations.push(pearson(&pred, &actual).unwrap_or(0.0));
    }
    let mean_test_correlation =
        test_correlations.iter().sum::<f64>() / test_correlations.len() as f64;
    Ok(RidgeResult {
        best_lambdas,
        test_correlations,
        mean_test_correlation,
        n_train: train_idx.len(),
        n_test: test_idx.len(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, d: usize, seed: u64) -> ActivationMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ActivationMatrix::new(n, d, data, "t").unwrap()
    }

    /// Brute-force oracle: refit the ridge system n times, each with one row
    /// held out, by solving the normal equations directly.
    fn naive_loo_press(x: &[f64], y: &[f64], n: usize, p: usize, lam: f64) -> f64 {
        let mut press = 0.0;
        for hold in 0..n {
            let mut a = DMatrix::<f64>::zeros(p, p);
            let mut b = vec![0.0; p];
            for i in 0..n {
                if i == hold {
                    continue;
                }
                for j in 0..p {
                    b[j] += x[i * p + j] * y[i];
                    for k in 0..p {
                        a[(j, k)] += x[i * p + j] * x[i * p + k];
                    }
                }
            }
            for j in 0..p {
                a[(j, j)] += lam;
            }
            let rhs = DMatrix::from_column_slice(p, 1, &b);
            let w = a.lu().solve(&rhs).expect("regularized system is invertible");
            let pred: f64 = (0..p).map(|j| x[hold * p + j] * w[(j, 0)]).sum();
            press += (y[hold] - pred).powi(2);
        }
        press / n as f64
    }

    #[test]
    fn loo_shortcut_matches_refit_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (n, p) = (30, 5);
        let x: Vec<f64> = (0..n * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for lam in [0.01, 0.5, 3.0, 50.0] {
            let fast = ridge_loo_press(&x, &y, n, p, &[lam]).unwrap()[0];
            let slow = naive_loo_press(&x, &y, n, p, lam);
            assert!(
                (fast - slow).abs() < 1e-8,
                "lambda {lam}: fast {fast} vs oracle {slow}"
            );
        }
    }

    #[test]
    fn linear_targets_recovered_with_high_correlation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (n, p) = (200, 6);
        let feats = random_matrix(n, p, 3);
        let w_true: Vec<f64> = (0..p).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let targ: Vec<f64> = (0..n)
            .map(|i| {
                (0..p).map(|j| feats.data[i * p + j] * w_true[j]).sum::<f64>()
                    + 0.05 * rng.gen_range(-1.0..1.0)
            })
            .collect();
        let targets = ActivationMatrix::new(n, 1, targ, "t").unwrap();
        let r = ridge_encode(&feats, &targets, &[], 42).unwrap();
        assert!(r.test_correlations[0] > 0.95, "r = {}", r.test_correlations[0]);
    }

    #[test]
    fn unrelated_targets_score_near_zero() {
        let feats = random_matrix(300, 5, 4);
        let targets = random_matrix(300, 2, 5);
        let r = ridge_encode(&feats, &targets, &[], 7).unwrap();
        for c in &r.test_correlations {
            assert!(c.abs() < 0.3, "correlation {c} for unrelated target");
        }
    }

    #[test]
    fn noise_targets_prefer_larger_lambda_on_average() {
        // with pure noise targets, heavy shrinkage should win the LOO
        // criterion in the large majority of draws
        let mut wins = 0;
        for seed in 0..10 {
            let feats = random_matrix(200, 8, 100 + seed);
            let targets = random_matrix(200, 1, 200 + seed);
            let press =
                ridge_loo_press(&feats.data, &targets.data, 200, 8, &[0.01, 1e5]).unwrap();
            if press[1] < press[0] {
                wins += 1;
            }
        }
        assert!(wins >= 8, "heavy shrinkage won only {wins}/10 noise draws");
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let feats = random_matrix(80, 4, 8);
        let targets = random_matrix(80, 3, 9);
        let a = ridge_encode(&feats, &targets, &[], 11).unwrap();
        let b = ridge_encode(&feats, &targets, &[], 11).unwrap();
        assert_eq!(a.test_correlations, b.test_correlations);
        assert_eq!(a.best_lambdas, b.best_lambdas);
    }

    #[test]
    fn invalid_lambdas_rejected() {
        let feats = random_matrix(40, 3, 10);
        let targets = random_matrix(40, 1, 11);
        assert!(matches!(
            ridge_encode(&feats, &targets, &[0.0], 1),
            Err(AnalysisError::BadParameter(_))
        ));
        assert!(ridge_loo_press(&[1.0; 12], &[0.0; 4], 4, 3, &[-1.0]).is_err());
    }
}
