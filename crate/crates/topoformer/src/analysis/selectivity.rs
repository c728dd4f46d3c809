//! Per-unit two-condition selectivity maps.
//!
//! Each unit's responses under condition A are contrasted against condition B
//! with a Welch two-tailed t-test. The selectivity value is
//! `s = sign(t) * (-log10 p)`, so s = 2 means A-preferring at p = 0.01.

use serde::Serialize;

use super::stats::{welch_t, P_FLOOR};
use super::{ActivationMatrix, AnalysisError};

#[derive(Debug, Clone, Serialize)]
pub struct SelectivityMap {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    /// Units where both conditions were constant; s is reported as 0 there.
    pub degenerate: Vec<bool>,
    pub cond_a: String,
    pub cond_b: String,
}

pub fn selectivity(
    a: &ActivationMatrix,
    b: &ActivationMatrix,
) -> Result<SelectivityMap, AnalysisError> {
    if a.d != b.d {
        return Err(AnalysisError::ShapeMismatch(format!(
            "condition widths differ: {} vs {}",
            a.d, b.d
        )));
    }
    let d = a.d;
    let mut s = Vec::with_capacity(d);
    let mut t = Vec::with_capacity(d);
    let mut p = Vec::with_capacity(d);
    let mut degenerate = Vec::with_capacity(d);
    for j in 0..d {
        let ua = a.unit(j);
        let ub = b.unit(j);
        match welch_t(&ua, &ub) {
            Some(r) => {
                let sign = if r.t > 0.0 {
                    1.0
                } else if r.t < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                s.push(sign * (-r.p.max(P_FLOOR).log10()));
                t.push(r.t);
                p.push(r.p);
                degenerate.push(false);
            }
            None => {
                s.push(0.0);
                t.push(0.0);
                p.push(1.0);
                degenerate.push(true);
            }
        }
    }
    Ok(SelectivityMap {
        s,
        t,
        p,
        degenerate,
        cond_a: a.sublayer.clone(),
        cond_b: b.sublayer.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn matrix(n: usize, d: usize, data: Vec<f64>, tag: &str) -> ActivationMatrix {
        ActivationMatrix::new(n, d, data, tag).unwrap()
    }

    #[test]
    fn identical_conditions_give_zero_s() {
        let data = vec![1.0, 2.0, 0.5, 3.0, 2.0, 1.5, 0.0, 4.0, 1.0, 1.0, 2.0, 0.25];
        let a = matrix(4, 3, data.clone(), "a");
        let b = matrix(4, 3, data, "b");
        let map = selectivity(&a, &b).unwrap();
        assert_eq!(map.s, vec![0.0; 3]);
        assert_eq!(map.t, vec![0.0; 3]);
    }

    #[test]
    fn s_of_two_means_p_of_0_01() {
        // invert the convention directly: if p = 0.01 and t > 0, s must be 2
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // search offsets until a unit lands near p = 0.01, then check s = -log10 p
        let base: Vec<f64> = (0..38).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let shifted: Vec<f64> = base.iter().map(|x| x + 0.35).collect();
        let a = matrix(38, 1, shifted, "a");
        let b = matrix(38, 1, base, "b");
        let map = selectivity(&a, &b).unwrap();
        assert!(map.t[0] > 0.0);
        assert!((map.s[0] - (-map.p[0].log10())).abs() < 1e-12);
    }

    #[test]
    fn planted_large_effect_exceeds_ten() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mu = 0.7;
        let a_data: Vec<f64> = (0..38).map(|_| mu + 1.0 + rng.gen_range(-0.17..0.17)).collect();
        let b_data: Vec<f64> = (0..38).map(|_| mu + rng.gen_range(-0.17..0.17)).collect();
        let a = matrix(38, 1, a_data, "a");
        let b = matrix(38, 1, b_data, "b");
        let map = selectivity(&a, &b).unwrap();
        assert!(map.s[0].abs() > 10.0, "s = {}", map.s[0]);
    }

    #[test]
    fn antisymmetric_under_condition_swap() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = matrix(10, 4, (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect(), "a");
        let b = matrix(12, 4, (0..48).map(|_| rng.gen_range(-0.5..1.5)).collect(), "b");
        let ab = selectivity(&a, &b).unwrap();
        let ba = selectivity(&b, &a).unwrap();
        for (x, y) in ab.s.iter().zip(&ba.s) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn degenerate_units_flagged() {
        let a = matrix(3, 2, vec![5.0, 1.0, 5.0, 2.0, 5.0, 3.0], "a");
        let b = matrix(3, 2, vec![5.0, 4.0, 5.0, 5.0, 5.0, 6.0], "b");
        let map = selectivity(&a, &b).unwrap();
        assert!(map.degenerate[0]);
        assert_eq!(map.s[0], 0.0);
        assert!(!map.degenerate[1]);
    }

    #[test]
    fn width_mismatch_rejected() {
        let a = matrix(3, 2, vec![0.0; 6], "a");
        let b = matrix(3, 3, vec![0.0; 9], "b");
        assert!(matches!(
            selectivity(&a, &b),
            Err(AnalysisError::ShapeMismatch(_))
        ));
    }
}
