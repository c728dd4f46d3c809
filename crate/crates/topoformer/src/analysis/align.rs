//! PLS-SVD alignment between two activation matrices.
//!
//! Both matrices are z-scored with training-split statistics, the
//! cross-covariance X_trainᵀ·Y_train is decomposed by SVD, and the quality of
//! the alignment is the Pearson correlation between paired component scores
//! on the held-out rows.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::stats::pearson;
use super::{ActivationMatrix, AnalysisError};

pub const TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Serialize)]
pub struct AlignmentResult {
    /// Held-out Pearson correlation per component pair.
    pub test_correlations: Vec<f64>,
    pub train_correlations: Vec<f64>,
    pub singular_values: Vec<f64>,
    /// Per-component weight vectors in the original column spaces; dropped
    /// columns carry zero weight.
    pub x_weights: Vec<Vec<f64>>,
    pub y_weights: Vec<Vec<f64>>,
    pub n_components: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Zero-variance training columns excluded from each side.
    pub dropped_x: usize,
    pub dropped_y: usize,
    pub seed: u64,
}

struct Standardized {
    /// Columns kept (indices into the original matrix).
    kept: Vec<usize>,
    mu: Vec<f64>,
    sd: Vec<f64>,
}

fn fit_standardizer(x: &ActivationMatrix, rows: &[usize]) -> Standardized {
    let d = x.d;
    let n = rows.len() as f64;
    let mut kept = Vec::new();
    let mut mu = Vec::new();
    let mut sd = Vec::new();
    for j in 0..d {
        let m: f64 = rows.iter().map(|&i| x.data[i * d + j]).sum::<f64>() / n;
        let var: f64 = rows
            .iter()
            .map(|&i| (x.data[i * d + j] - m).powi(2))
            .sum::<f64>()
            / n;
        if var > 0.0 {
            kept.push(j);
            mu.push(m);
            sd.push(var.sqrt());
        }
    }
    Standardized { kept, mu, sd }
}

fn apply_standardizer(x: &ActivationMatrix, rows: &[usize], st: &Standardized) -> DMatrix<f64> {
    let k = st.kept.len();
    DMatrix::from_fn(rows.len(), k, |r, c| {
        let j = st.kept[c];
        (x.data[rows[r] * x.d + j] - st.mu[c]) / st.sd[c]
    })
}

/// Aligns two activation matrices over the same sentences with PLS-SVD.
pub fn pls_svd_align(
    x: &ActivationMatrix,
    y: &ActivationMatrix,
    n_components: usize,
    seed: u64,
) -> Result<AlignmentResult, AnalysisError> {
    if x.n != y.n {
        return Err(AnalysisError::ShapeMismatch(format!(
            "row counts differ: {} vs {}",
            x.n, y.n
        )));
    }
    if n_components == 0 {
        return Err(AnalysisError::BadParameter(
            "n_components must be >= 1".into(),
        ));
    }
    let mut idx: Vec<usize> = (0..x.n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let n_train = ((x.n as f64) * TRAIN_FRACTION).round() as usize;
    let test_idx = idx.split_off(n_train);
    let train_idx = idx;
    if train_idx.len() < 3 || test_idx.len() < 3 {
        return Err(AnalysisError::TooFewRows(x.n));
    }

    let st_x = fit_standardizer(x, &train_idx);
    let st_y = fit_standardizer(y, &train_idx);
    let dropped_x = x.d - st_x.kept.len();
    let dropped_y = y.d - st_y.kept.len();
    if st_x.kept.is_empty() || st_y.kept.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }

    let xt = apply_standardizer(x, &train_idx, &st_x);
    let yt = apply_standardizer(y, &train_idx, &st_y);
    let xs = apply_standardizer(x, &test_idx, &st_x);
    let ys = apply_standardizer(y, &test_idx, &st_y);

    let cross = xt.transpose() * &yt;
    let svd = cross.svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");

    let r = svd.singular_values.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let k = n_components.min(r);

    let du = st_x.kept.len();
    let dv = st_y.kept.len();
    let mut test_correlations = Vec::with_capacity(k);
    let mut train_correlations = Vec::with_capacity(k);
    let mut singular_values = Vec::with_capacity(k);
    let mut x_weights = Vec::with_capacity(k);
    let mut y_weights = Vec::with_capacity(k);
    for &oi in order.iter().take(k) {
        singular_values.push(svd.singular_values[oi]);
        // sign: largest-|.| entry of the x-side weight vector made positive,
        // flipping both sides together so the pairing is unchanged
        let mut max_j = 0;
        for j in 0..du {
            if u[(j, oi)].abs() > u[(max_j, oi)].abs() {
                max_j = j;
            }
        }
        let flip = if u[(max_j, oi)] < 0.0 { -1.0 } else { 1.0 };
        let wu: Vec<f64> = (0..du).map(|j| flip * u[(j, oi)]).collect();
        let wv: Vec<f64> = (0..dv).map(|j| flip * v_t[(oi, j)]).collect();

        let score = |m: &DMatrix<f64>, w: &[f64]| -> Vec<f64> {
            (0..m.nrows())
                .map(|i| (0..w.len()).map(|j| m[(i, j)] * w[j]).sum())
                .collect()
        };
        let tr = pearson(&score(&xt, &wu), &score(&yt, &wv)).unwrap_or(0.0);
        let te = pearson(&score(&xs, &wu), &score(&ys, &wv)).unwrap_or(0.0);
        train_correlations.push(tr);
        test_correlations.push(te);

        let mut full_u = vec![0.0; x.d];
        for (c, &j) in st_x.kept.iter().enumerate() {
            full_u[j] = wu[c];
        }
        let mut full_v = vec![0.0; y.d];
        for (c, &j) in st_y.kept.iter().enumerate() {
            full_v[j] = wv[c];
        }
        x_weights.push(full_u);
        y_weights.push(full_v);
    }

    Ok(AlignmentResult {
        test_correlations,
        train_correlations,
        singular_values,
        x_weights,
        y_weights,
        n_components: k,
        n_train: train_idx.len(),
        n_test: test_idx.len(),
        dropped_x,
        dropped_y,
        seed,
    })
}
