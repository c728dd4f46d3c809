//! Correlation and test-statistic primitives shared by the pipeline.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// p-values are floored here before taking log10 so s-values stay finite.
pub const P_FLOOR: f64 = 1e-300;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n-1 denominator).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Pearson correlation; `None` when either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let _ = n;
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// Average ranks (1-based); ties receive the mean of their rank range.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&ranks(x), &ranks(y))
}

#[derive(Debug, Clone, Copy)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

/// Welch's unequal-variance two-sample t-test, two-tailed.
/// `None` when both groups have zero variance (degenerate).
pub fn welch_t(a: &[f64], b: &[f64]) -> Option<WelchResult> {
    assert!(a.len() >= 2 && b.len() >= 2, "welch_t needs >= 2 samples per group");
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (variance(a), variance(b));
    let sea = va / na;
    let seb = vb / nb;
    if sea + seb == 0.0 {
        return None;
    }
    let t = (mean(a) - mean(b)) / (sea + seb).sqrt();
    let df = (sea + seb).powi(2) / (sea * sea / (na - 1.0) + seb * seb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid dof");
    let p = (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(P_FLOOR, 1.0);
    Some(WelchResult { t, df, p })
}

/// Linear-interpolation percentile (q in [0, 100]) of unsorted data.
pub fn percentile(xs: &[f64], q: f64) -> f64 {
    assert!(!xs.is_empty());
    assert!((0.0..=100.0).contains(&q));
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

/// Ordinary least squares of y on a single regressor: (slope, r_squared).
/// `None` when the regressor has zero variance.
pub fn simple_regression(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let r = pearson(x, y)?;
    let slope = r * (variance(y) / variance(x)).sqrt();
    Some((slope, r * r))
}
