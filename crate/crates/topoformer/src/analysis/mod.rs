//! Topographic probing pipeline over captured activation matrices.

mod align;
mod decode;
mod pca;
mod ridge;
mod selectivity;
pub mod stats;
mod topo;

pub use align::{pls_svd_align, AlignmentResult};
pub use decode::{decode, DecodeResult};
pub use pca::{pca, PcaResult};
pub use ridge::{ridge_encode, ridge_loo_press, RidgeResult};
pub use selectivity::{selectivity, SelectivityMap};
pub use topo::{
    permutation_null, scale_grid, topo_stat, topo_stat_profile, PermutationNull, TopoScales,
    TopoStatResult, TopoStatValue,
};

use std::fmt;

/// n sentences × d units of mean-pooled sublayer responses.
#[derive(Debug, Clone)]
pub struct ActivationMatrix {
    pub n: usize,
    pub d: usize,
    /// Row-major: row = sentence, column = unit.
    pub data: Vec<f64>,
    pub sublayer: String,
}

impl ActivationMatrix {
    pub fn new(n: usize, d: usize, data: Vec<f64>, sublayer: impl Into<String>) -> Result<Self, AnalysisError> {
        if n < 2 {
            return Err(AnalysisError::TooFewRows(n));
        }
        if data.len() != n * d {
            return Err(AnalysisError::ShapeMismatch(format!(
                "{} values for {n}x{d} matrix",
                data.len()
            )));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(AnalysisError::NonFinite);
        }
        Ok(Self {
            n,
            d,
            data,
            sublayer: sublayer.into(),
        })
    }

    /// Activity vector of one unit across sentences.
    pub fn unit(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.d + j]).collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

#[derive(Debug, Clone)]
pub enum AnalysisError {
    ShapeMismatch(String),
    NonFinite,
    TooFewRows(usize),
    TooFewPairs(usize),
    SingleClassSplit,
    EmptyInput,
    BadParameter(String),
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::ShapeMismatch(s) => write!(f, "shape mismatch: {s}"),
            AnalysisError::NonFinite => write!(f, "non-finite values in input"),
            AnalysisError::TooFewRows(n) => write!(f, "need at least 2 rows, got {n}"),
            AnalysisError::TooFewPairs(n) => write!(f, "only {n} valid unit pairs (need >= 10)"),
            AnalysisError::SingleClassSplit => write!(f, "train/test split left a single class"),
            AnalysisError::EmptyInput => write!(f, "empty input"),
            AnalysisError::BadParameter(s) => write!(f, "bad parameter: {s}"),
        }
    }
}

impl std::error::Error for AnalysisError {}
