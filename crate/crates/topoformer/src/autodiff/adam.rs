//! Adam with bias correction, decoupled weight decay, and optional
//! global-norm gradient clipping.

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    /// Clip gradients so their global L2 norm does not exceed this value.
    pub clip_norm: Option<f64>,
}

impl AdamConfig {
    /// Small-model recipe: lr 0.001, no decay, no clipping.
    pub fn small(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
            clip_norm: None,
        }
    }

    /// Large-model recipe: decay 0.01, beta2 0.98, eps 1e-12, clip 0.5.
    pub fn large(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.98,
            eps: 1e-12,
            weight_decay: 0.01,
            clip_norm: Some(0.5),
        }
    }
}

/// First/second moment estimates for one parameter list.
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
}

impl AdamState {
    pub fn new(param_sizes: &[usize]) -> Self {
        Self {
            m: param_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: param_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One update over all parameters. `params` and `grads` must match the
    /// sizes this state was created with, in the same order.
    pub fn step(&mut self, cfg: &AdamConfig, params: &mut [&mut [f64]], grads: &[Vec<f64>]) {
        assert_eq!(params.len(), self.m.len(), "parameter count mismatch");
        assert_eq!(grads.len(), self.m.len(), "gradient count mismatch");
        for ((p, g), m) in params.iter().zip(grads).zip(&self.m) {
            assert_eq!(p.len(), m.len(), "parameter shape mismatch");
            assert_eq!(g.len(), m.len(), "gradient shape mismatch");
        }

        let clip_factor = match cfg.clip_norm {
            Some(max_norm) => {
                let sq: f64 = grads.iter().flat_map(|g| g.iter()).map(|x| x * x).sum();
                let norm = sq.sqrt();
                if norm > max_norm {
                    max_norm / norm
                } else {
                    1.0
                }
            }
            None => 1.0,
        };

        self.t += 1;
        let t = self.t as f64;
        let bc1 = 1.0 - cfg.beta1.powf(t);
        let bc2 = 1.0 - cfg.beta2.powf(t);

        for (i, grad) in grads.iter().enumerate() {
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            let p = &mut params[i];
            for j in 0..grad.len() {
                let g = grad[j] * clip_factor;
                m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g;
                v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g * g;
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                p[j] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
                if cfg.weight_decay > 0.0 {
                    p[j] -= cfg.lr * cfg.weight_decay * p[j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let cfg = AdamConfig::small(0.001);
        let mut state = AdamState::new(&[3]);
        let mut p = vec![1.0, -2.0, 0.5];
        let orig = p.clone();
        state.step(&cfg, &mut [&mut p], &[vec![0.0; 3]]);
        assert_eq!(p, orig);
    }

    #[test]
    fn first_step_matches_hand_computation() {
        // Large recipe without decay/clipping: g=1, t=1 gives m_hat=v_hat=1,
        // so the update is exactly -lr/(1+eps).
        let cfg = AdamConfig {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.98,
            eps: 1e-12,
            weight_decay: 0.0,
            clip_norm: None,
        };
        let mut state = AdamState::new(&[1]);
        let mut p = vec![0.0];
        state.step(&cfg, &mut [&mut p], &[vec![1.0]]);
        let expect = -0.001 / (1.0 + 1e-12);
        assert!((p[0] - expect).abs() < 1e-15);
        assert!((p[0] + 0.001).abs() < 1e-9);
    }

    #[test]
    fn clipping_scales_gradients_before_moments() {
        // grad vector (2, 0) has norm 2; clip at 0.5 scales by 0.25.
        let cfg = AdamConfig {
            clip_norm: Some(0.5),
            ..AdamConfig::small(0.001)
        };
        let mut clipped = AdamState::new(&[2]);
        let mut p1 = vec![0.0, 0.0];
        clipped.step(&cfg, &mut [&mut p1], &[vec![2.0, 0.0]]);

        let cfg_ref = AdamConfig {
            clip_norm: None,
            ..cfg
        };
        let mut reference = AdamState::new(&[2]);
        let mut p2 = vec![0.0, 0.0];
        reference.step(&cfg_ref, &mut [&mut p2], &[vec![0.5, 0.0]]);
        assert_eq!(p1, p2);
    }

    #[test]
    #[should_panic(expected = "shape mismatch")]
    fn shape_mismatch_panics() {
        let cfg = AdamConfig::small(0.001);
        let mut state = AdamState::new(&[3]);
        let mut p = vec![0.0; 3];
        state.step(&cfg, &mut [&mut p], &[vec![0.0; 2]]);
    }
}
