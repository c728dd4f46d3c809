//! PCA via SVD of the column-centered activation matrix.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{ActivationMatrix, AnalysisError};

#[derive(Debug, Clone, Serialize)]
pub struct PcaResult {
    /// d×k component weights, row-major; columns are orthonormal.
    pub weights: Vec<f64>,
    /// n×k component scores, row-major.
    pub scores: Vec<f64>,
    pub variance_ratios: Vec<f64>,
    pub k: usize,
    pub d: usize,
    pub n: usize,
    /// True when the requested component count exceeded the numerical rank.
    pub truncated: bool,
}

/// Column-centered SVD with a deterministic sign convention: each weight
/// vector's largest-magnitude entry is made positive.
pub fn pca(x: &ActivationMatrix, k: usize) -> Result<PcaResult, AnalysisError> {
    let (n, d) = (x.n, x.d);
    if k == 0 {
        return Err(AnalysisError::BadParameter("k must be >= 1".into()));
    }
    if k > n.saturating_sub(1).min(d) {
        return Err(AnalysisError::BadParameter(format!(
            "k = {k} exceeds min(n-1, d) = {}",
            (n - 1).min(d)
        )));
    }

    let mut centered = x.data.clone();
    for j in 0..d {
        let mean: f64 = (0..n).map(|i| x.data[i * d + j]).sum::<f64>() / n as f64;
        for i in 0..n {
            centered[i * d + j] -= mean;
        }
    }
    let m = DMatrix::from_row_slice(n, d, &centered);
    let svd = m.svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");

    // order components by descending singular value
    let r = svd.singular_values.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });

    let total_var: f64 = svd.singular_values.iter().map(|s| s * s).sum();
    let tol = svd.singular_values[order[0]] * (n.max(d) as f64) * f64::EPSILON;
    let rank = order
        .iter()
        .filter(|&&i| svd.singular_values[i] > tol)
        .count();
    let k_eff = k.min(rank.max(1));
    let truncated = k_eff < k;

    let mut weights = vec![0.0; d * k_eff];
    let mut scores = vec![0.0; n * k_eff];
    let mut variance_ratios = Vec::with_capacity(k_eff);
    for (c, &oi) in order.iter().take(k_eff).enumerate() {
        let sv = svd.singular_values[oi];
        variance_ratios.push(if total_var > 0.0 { sv * sv / total_var } else { 0.0 });
        // sign: largest-|.| weight entry positive
        let mut max_j = 0;
        for j in 0..d {
            if v_t[(oi, j)].abs() > v_t[(oi, max_j)].abs() {
                max_j = j;
            }
        }
        let flip = if v_t[(oi, max_j)] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            weights[j * k_eff + c] = flip * v_t[(oi, j)];
        }
        for i in 0..n {
            scores[i * k_eff + c] = flip * u[(i, oi)] * sv;
        }
    }

    Ok(PcaResult {
        weights,
        scores,
        variance_ratios,
        k: k_eff,
        d,
        n,
        truncated,
    })
}

impl PcaResult {
    /// d-vector of weights for component `c`.
    pub fn component_weights(&self, c: usize) -> Vec<f64> {
        (0..self.d).map(|j| self.weights[j * self.k + c]).collect()
    }

    /// Projects new rows (m×d, row-major) onto the fitted components after
    /// subtracting `means` (the training column means).
    pub fn project(&self, rows: &[f64], m: usize, means: &[f64]) -> Vec<f64> {
        assert_eq!(rows.len(), m * self.d);
        let mut out = vec![0.0; m * self.k];
        for i in 0..m {
            for c in 0..self.k {
                let mut acc = 0.0;
                for j in 0..self.d {
                    acc += (rows[i * self.d + j] - means[j]) * self.weights[j * self.k + c];
                }
                out[i * self.k + c] = acc;
            }
        }
        out
    }
}
