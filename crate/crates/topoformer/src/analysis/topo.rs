//! Distance-decay topography statistics with permutation nulls.
//!
//! The core statistic is the Spearman rank correlation between negative
//! pairwise unit response correlations and pairwise grid distances, over
//! unordered unit pairs closer than a maximum distance. High values mean
//! nearby units respond more similarly than distant ones.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::stats::{percentile, spearman};
use super::{ActivationMatrix, AnalysisError};

/// Number of maximum-distance thresholds in a profile.
pub const N_SCALES: usize = 9;
/// Lower bound of the threshold grid: percentile of nonzero distances.
pub const SCALE_LOWER_PERCENTILE: f64 = 10.0;

const MIN_PAIRS: usize = 10;

#[derive(Debug, Clone, Serialize)]
pub struct TopoStatValue {
    pub t_g: f64,
    pub n_pairs: usize,
    /// Constant-activity units excluded from all pairs.
    pub excluded_units: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TopoStatResult {
    pub d_maxes: Vec<f64>,
    pub t_gd: Vec<f64>,
    pub mean: f64,
    pub excluded_units: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TopoScales {
    pub d_maxes: Vec<f64>,
}

/// Pairwise Pearson correlations between unit activity vectors.
/// `None` marks units with constant activity.
fn unit_correlations(x: &ActivationMatrix) -> (Vec<Option<Vec<f64>>>, Vec<bool>) {
    let d = x.d;
    let n = x.n;
    // standardize columns; constant columns are flagged
    let mut z: Vec<Option<Vec<f64>>> = Vec::with_capacity(d);
    let mut constant = vec![false; d];
    for j in 0..d {
        let col = x.unit(j);
        let mean: f64 = col.iter().sum::<f64>() / n as f64;
        let ss: f64 = col.iter().map(|v| (v - mean).powi(2)).sum();
        if ss == 0.0 {
            constant[j] = true;
            z.push(None);
        } else {
            let norm = ss.sqrt();
            z.push(Some(col.iter().map(|v| (v - mean) / norm).collect()));
        }
    }
    (z, constant)
}

fn pair_correlations(x: &ActivationMatrix) -> (Vec<f64>, Vec<bool>, usize) {
    let d = x.d;
    let (z, constant) = unit_correlations(x);
    let excluded = constant.iter().filter(|&&c| c).count();
    // full d×d matrix, NaN for excluded pairs
    let mut r = vec![f64::NAN; d * d];
    for i in 0..d {
        if let Some(zi) = &z[i] {
            r[i * d + i] = 1.0;
            for j in (i + 1)..d {
                if let Some(zj) = &z[j] {
                    let dot: f64 = zi.iter().zip(zj).map(|(a, b)| a * b).sum();
                    r[i * d + j] = dot;
                    r[j * d + i] = dot;
                }
            }
        }
    }
    (r, constant, excluded)
}

fn stat_from_pairs(
    r: &[f64],
    constant: &[bool],
    dist: &[f64],
    d: usize,
    d_max: Option<f64>,
    perm: Option<&[usize]>,
) -> Result<(f64, usize), AnalysisError> {
    let mut neg_r = Vec::new();
    let mut ds = Vec::new();
    for i in 0..d {
        if constant[i] {
            continue;
        }
        for j in (i + 1)..d {
            if constant[j] {
                continue;
            }
            let dij = match perm {
                Some(p) => dist[p[i] * d + p[j]],
                None => dist[i * d + j],
            };
            if let Some(m) = d_max {
                if dij >= m {
                    continue;
                }
            }
            neg_r.push(-r[i * d + j]);
            ds.push(dij);
        }
    }
    if neg_r.len() < MIN_PAIRS {
        return Err(AnalysisError::TooFewPairs(neg_r.len()));
    }
    let t_g = spearman(&neg_r, &ds).unwrap_or(0.0);
    Ok((t_g, neg_r.len()))
}

/// Spearman(-R, D) over unit pairs with distance below `d_max` (all pairs if
/// absent). Constant-activity units are excluded and counted.
pub fn topo_stat(
    x: &ActivationMatrix,
    dist: &[f64],
    d_max: Option<f64>,
) -> Result<TopoStatValue, AnalysisError> {
    let d = x.d;
    if dist.len() != d * d {
        return Err(AnalysisError::ShapeMismatch(format!(
            "distance matrix has {} entries for d = {d}",
            dist.len()
        )));
    }
    let (r, constant, excluded) = pair_correlations(x);
    let (t_g, n_pairs) = stat_from_pairs(&r, &constant, dist, d, d_max, None)?;
    Ok(TopoStatValue {
        t_g,
        n_pairs,
        excluded_units: excluded,
    })
}

/// Nine linearly spaced maximum distances, from the 10th percentile of
/// nonzero distances up to the maximum distance.
pub fn scale_grid(dist: &[f64], d: usize) -> Result<TopoScales, AnalysisError> {
    let nonzero: Vec<f64> = (0..d)
        .flat_map(|i| ((i + 1)..d).map(move |j| dist[i * d + j]))
        .filter(|&v| v > 0.0)
        .collect();
    if nonzero.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let lo = percentile(&nonzero, SCALE_LOWER_PERCENTILE);
    let hi = nonzero.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let d_maxes = (0..N_SCALES)
        .map(|i| lo + (hi - lo) * i as f64 / (N_SCALES - 1) as f64)
        .collect();
    Ok(TopoScales { d_maxes })
}

/// t_{g,d} at each of the nine distance scales plus their mean.
pub fn topo_stat_profile(
    x: &ActivationMatrix,
    dist: &[f64],
) -> Result<TopoStatResult, AnalysisError> {
    let scales = scale_grid(dist, x.d)?;
    profile_at(x, dist, &scales)
}

fn profile_at(
    x: &ActivationMatrix,
    dist: &[f64],
    scales: &TopoScales,
) -> Result<TopoStatResult, AnalysisError> {
    let (r, constant, excluded) = pair_correlations(x);
    let mut t_gd = Vec::with_capacity(scales.d_maxes.len());
    for &m in &scales.d_maxes {
        let (t, _) = stat_from_pairs(&r, &constant, dist, x.d, Some(m), None)?;
        t_gd.push(t);
    }
    let mean = t_gd.iter().sum::<f64>() / t_gd.len() as f64;
    Ok(TopoStatResult {
        d_maxes: scales.d_maxes.clone(),
        t_gd,
        mean,
        excluded_units: excluded,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PermutationNull {
    pub observed: f64,
    pub null: Vec<f64>,
    /// Fraction of null values at or below the observed statistic, in percent.
    pub percentile_of_observed: f64,
    /// Observed value exceeds the 95th percentile of the null.
    pub significant_95: bool,
    pub n_perm: usize,
    pub seed: u64,
}

/// Null distribution of the topography statistic under random unit-position
/// shuffles. When `scales` is given the statistic is the nine-scale mean;
/// otherwise the full-distance t_g.
pub fn permutation_null(
    x: &ActivationMatrix,
    dist: &[f64],
    scales: Option<&TopoScales>,
    n_perm: usize,
    seed: u64,
) -> Result<PermutationNull, AnalysisError> {
    if n_perm < 20 {
        return Err(AnalysisError::BadParameter(format!(
            "n_perm = {n_perm} (need >= 20)"
        )));
    }
    let d = x.d;
    if dist.len() != d * d {
        return Err(AnalysisError::ShapeMismatch(format!(
            "distance matrix has {} entries for d = {d}",
            dist.len()
        )));
    }
    let (r, constant, _) = pair_correlations(x);

    let stat = |perm: Option<&[usize]>| -> Result<f64, AnalysisError> {
        match scales {
            Some(sc) => {
                let mut acc = 0.0;
                for &m in &sc.d_maxes {
                    let (t, _) = stat_from_pairs(&r, &constant, dist, d, Some(m), perm)?;
                    acc += t;
                }
                Ok(acc / sc.d_maxes.len() as f64)
            }
            None => stat_from_pairs(&r, &constant, dist, d, None, perm).map(|(t, _)| t),
        }
    };

    let observed = stat(None)?;
    let null: Vec<f64> = (0..n_perm)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let mut perm: Vec<usize> = (0..d).collect();
            perm.shuffle(&mut rng);
            stat(Some(&perm))
        })
        .collect::<Result<Vec<f64>, AnalysisError>>()?;

    let below = null.iter().filter(|&&v| v <= observed).count();
    let percentile_of_observed = 100.0 * below as f64 / n_perm as f64;
    let significant_95 = observed > percentile(&null, 95.0);
    Ok(PermutationNull {
        observed,
        null,
        percentile_of_observed,
        significant_95,
        n_perm,
        seed,
    })
}
