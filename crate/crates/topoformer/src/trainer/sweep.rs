//! Receptive-field sweeps: how accuracy responds to r_sq and r_sr.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::stats::{simple_regression, spearman};
use crate::attention::AttentionMode;

use super::train::{train_with_data, TrainConfig};
use super::{LabeledCorpus, TrainError};

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    /// Which radius was varied: "r_sq" or "r_sr".
    pub factor: String,
    pub r_sq: f64,
    pub r_sr: f64,
    pub accuracy: Option<f64>,
    pub error: Option<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepFactor {
    pub factor: String,
    pub r_values: Vec<f64>,
    pub accuracies: Vec<f64>,
    pub spearman: Option<f64>,
    pub slope: Option<f64>,
    pub r_squared: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    pub factors: Vec<SweepFactor>,
}

impl SweepReport {
    /// `factor,r_sq,r_sr,accuracy,seed,error` CSV of every cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("factor,r_sq,r_sr,accuracy,seed,error\n");
        for c in &self.cells {
            let acc = c.accuracy.map(|a| a.to_string()).unwrap_or_default();
            let err = c.error.as_deref().unwrap_or("");
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.factor, c.r_sq, c.r_sr, acc, c.seed, err
            ));
        }
        out
    }

    pub fn factor(&self, name: &str) -> Option<&SweepFactor> {
        self.factors.iter().find(|f| f.factor == name)
    }
}

/// Trains one model per grid point: the r_sq grid runs spatial-querying
/// models, the r_sr grid runs querying-plus-reweighting models with the base
/// r_sq fixed. Cells get seeds `base_seed + index` so run-to-run variation
/// reflects the radius rather than shared noise. Failed cells are recorded
/// and the sweep continues.
pub fn rf_sweep(
    base: &TrainConfig,
    r_sq_grid: &[f64],
    r_sr_grid: &[f64],
    train_set: &LabeledCorpus,
    test_set: &LabeledCorpus,
) -> Result<SweepReport, TrainError> {
    if r_sq_grid.is_empty() && r_sr_grid.is_empty() {
        return Err(TrainError::Config("both sweep grids are empty".into()));
    }
    base.validate()?;

    let mut specs: Vec<(String, TrainConfig)> = Vec::new();
    for &r in r_sq_grid {
        let mut cfg = base.clone();
        cfg.mode = AttentionMode::Sq;
        cfg.r_sq = r;
        specs.push(("r_sq".into(), cfg));
    }
    for &r in r_sr_grid {
        let mut cfg = base.clone();
        cfg.mode = AttentionMode::Sqr;
        cfg.r_sr = r;
        specs.push(("r_sr".into(), cfg));
    }
    for (i, (_, cfg)) in specs.iter_mut().enumerate() {
        cfg.seed = base.seed + i as u64;
    }

    let cells: Vec<SweepCell> = specs
        .par_iter()
        .map(|(factor, cfg)| {
            let (accuracy, error) = match train_with_data(cfg, train_set, test_set) {
                Ok(out) => (Some(out.final_accuracy()), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepCell {
                factor: factor.clone(),
                r_sq: cfg.r_sq,
                r_sr: cfg.r_sr,
                accuracy,
                error,
                seed: cfg.seed,
            }
        })
        .collect();

    let factors = ["r_sq", "r_sr"]
        .iter()
        .filter_map(|name| summarize_factor(&cells, name))
        .collect();
    Ok(SweepReport { cells, factors })
}

fn summarize_factor(cells: &[SweepCell], name: &str) -> Option<SweepFactor> {
    let mut r_values = Vec::new();
    let mut accuracies = Vec::new();
    for c in cells.iter().filter(|c| c.factor == name) {
        if let Some(acc) = c.accuracy {
            let r = if name == "r_sq" { c.r_sq } else { c.r_sr };
            r_values.push(r);
            accuracies.push(acc);
        }
    }
    if r_values.is_empty() {
        return None;
    }
    // regression is undefined for a single point or a zero-variance grid
    let (spearman_v, slope, r_squared) = if r_values.len() >= 2 {
        let sp = spearman(&r_values, &accuracies);
        match simple_regression(&r_values, &accuracies) {
            Some((s, r2)) => (sp, Some(s), Some(r2)),
            None => (sp, None, None),
        }
    } else {
        (None, None, None)
    };
    Some(SweepFactor {
        factor: name.to_string(),
        r_values,
        accuracies,
        spearman: spearman_v,
        slope,
        r_squared,
    })
}
