//! Binary decoding of sentence labels from activation principal components.
//!
//! Activations are split 80/20 with a seeded shuffle, PCA is fitted on the
//! training rows only, and a logistic regression is trained on the (z-scored)
//! training component scores by full-batch gradient descent.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::pca::pca;
use super::{ActivationMatrix, AnalysisError};

pub const TRAIN_FRACTION: f64 = 0.8;
const MAX_ITERS: usize = 10_000;
const GRAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct DecodeResult {
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    /// Components actually used (may be below the request on rank-deficient data).
    pub n_components: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
}

fn split_indices(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let n_train = ((n as f64) * TRAIN_FRACTION).round() as usize;
    let test = idx.split_off(n_train);
    (idx, test)
}

struct Logistic {
    w: Vec<f64>,
    b: f64,
    iterations: usize,
    converged: bool,
}

/// Full-batch gradient descent on the mean logistic loss. The step size is
/// halved whenever the loss fails to decrease.
fn fit_logistic(x: &[f64], y: &[f64], n: usize, k: usize) -> Logistic {
    let mut w = vec![0.0; k];
    let mut b = 0.0;
    let mut lr = 1.0;
    let mut prev_loss = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    for it in 0..MAX_ITERS {
        iterations = it + 1;
        let mut gw = vec![0.0; k];
        let mut gb = 0.0;
        let mut loss = 0.0;
        for i in 0..n {
            let mut z = b;
            for j in 0..k {
                z += w[j] * x[i * k + j];
            }
            // stable log(1 + exp(.)) and sigmoid
            let p = 1.0 / (1.0 + (-z).exp());
            loss += if z >= 0.0 {
                (1.0 + (-z).exp()).ln() + (1.0 - y[i]) * z
            } else {
                (1.0 + z.exp()).ln() - y[i] * z
            };
            let err = p - y[i];
            for j in 0..k {
                gw[j] += err * x[i * k + j];
            }
            gb += err;
        }
        loss /= n as f64;
        for g in gw.iter_mut() {
            *g /= n as f64;
        }
        gb /= n as f64;

        let gnorm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        if gnorm < GRAD_TOL {
            converged = true;
            break;
        }
        if loss > prev_loss {
            lr *= 0.5;
            if lr < 1e-12 {
                break;
            }
        }
        prev_loss = loss;
        for j in 0..k {
            w[j] -= lr * gw[j];
        }
        b -= lr * gb;
    }
    Logistic {
        w,
        b,
        iterations,
        converged,
    }
}

fn accuracy(model: &Logistic, x: &[f64], y: &[f64], n: usize, k: usize) -> f64 {
    let mut hits = 0usize;
    for i in 0..n {
        let mut z = model.b;
        for j in 0..k {
            z += model.w[j] * x[i * k + j];
        }
        let pred = if z > 0.0 { 1.0 } else { 0.0 };
        if pred == y[i] {
            hits += 1;
        }
    }
    hits as f64 / n as f64
}

/// Decodes binary labels from the top `n_components` principal components of
/// the activations. The split, the PCA fit, and the feature standardization
/// all use the training portion only.
pub fn decode(
    x: &ActivationMatrix,
    labels: &[u8],
    n_components: usize,
    seed: u64,
) -> Result<DecodeResult, AnalysisError> {
    if labels.len() != x.n {
        return Err(AnalysisError::ShapeMismatch(format!(
            "{} labels for {} rows",
            labels.len(),
            x.n
        )));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(AnalysisError::BadParameter("labels must be 0 or 1".into()));
    }
    if n_components == 0 {
        return Err(AnalysisError::BadParameter(
            "n_components must be >= 1".into(),
        ));
    }
    let (train_idx, test_idx) = split_indices(x.n, seed);
    if train_idx.len() < 4 || test_idx.is_empty() {
        return Err(AnalysisError::TooFewRows(x.n));
    }
    for idx in [&train_idx, &test_idx] {
        let ones = idx.iter().filter(|&&i| labels[i] == 1).count();
        if ones == 0 || ones == idx.len() {
            return Err(AnalysisError::SingleClassSplit);
        }
    }

    let n_train = train_idx.len();
    let n_test = test_idx.len();
    let d = x.d;
    let mut train_rows = Vec::with_capacity(n_train * d);
    for &i in &train_idx {
        train_rows.extend_from_slice(x.row(i));
    }
    let train_mat = ActivationMatrix::new(n_train, d, train_rows.clone(), &*x.sublayer)?;

    let k_req = n_components.min((n_train - 1).min(d));
    let fitted = pca(&train_mat, k_req)?;
    let k = fitted.k;

    let mut means = vec![0.0; d];
    for j in 0..d {
        means[j] = (0..n_train).map(|i| train_rows[i * d + j]).sum::<f64>() / n_train as f64;
    }
    let train_scores = fitted.scores.clone();
    let mut test_rows = Vec::with_capacity(n_test * d);
    for &i in &test_idx {
        test_rows.extend_from_slice(x.row(i));
    }
    let test_scores = fitted.project(&test_rows, n_test, &means);

    // standardize with training statistics
    let mut mu = vec![0.0; k];
    let mut sd = vec![0.0; k];
    for j in 0..k {
        mu[j] = (0..n_train).map(|i| train_scores[i * k + j]).sum::<f64>() / n_train as f64;
        let var = (0..n_train)
            .map(|i| (train_scores[i * k + j] - mu[j]).powi(2))
            .sum::<f64>()
            / n_train as f64;
        sd[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    let standardize = |scores: &[f64], n: usize| -> Vec<f64> {
        let mut out = vec![0.0; n * k];
        for i in 0..n {
            for j in 0..k {
                out[i * k + j] = (scores[i * k + j] - mu[j]) / sd[j];
            }
        }
        out
    };
    let xt = standardize(&train_scores, n_train);
    let xs = standardize(&test_scores, n_test);

    let yt: Vec<f64> = train_idx.iter().map(|&i| labels[i] as f64).collect();
    let ys: Vec<f64> = test_idx.iter().map(|&i| labels[i] as f64).collect();

    let model = fit_logistic(&xt, &yt, n_train, k);
    Ok(DecodeResult {
        train_accuracy: accuracy(&model, &xt, &yt, n_train, k),
        test_accuracy: accuracy(&model, &xs, &ys, n_test, k),
        n_components: k,
        n_train,
        n_test,
        iterations: model.iterations,
        converged: model.converged,
        seed,
    })
}
