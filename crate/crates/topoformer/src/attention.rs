//! Single-head encoder block with spatial querying and reweighting.
//!
//! Three modes share one forward path:
//! - `Standard`: softmax(QK^T/sqrt(d)) V W^O
//! - `Sq`: softmax(QMK^T/sqrt(d)) V W^O, with M a binary grid pooling matrix
//! - `Sqr`: as Sq, plus W^O restricted to local connectivity and initialized
//!   to large positive values
//!
//! The block captures per-sentence mean-pooled queries, keys, values, and
//! fc_out (the attention output after W^O, before the residual add) for the
//! probing pipeline.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Var};
use crate::grid::{self, GridError, GridLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttentionMode {
    Standard,
    Sq,
    Sqr,
}

impl fmt::Display for AttentionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttentionMode::Standard => write!(f, "standard"),
            AttentionMode::Sq => write!(f, "sq"),
            AttentionMode::Sqr => write!(f, "sqr"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub d: usize,
    pub vocab_size: usize,
    pub max_len: usize,
    pub mode: AttentionMode,
    pub r_sq: f64,
    pub r_sr: f64,
    /// Multiplier applied inside |W^O * scale| at initialization (Sqr only).
    pub reweight_scale: f64,
    /// Learned positional embeddings added to token embeddings.
    pub positional: bool,
    /// Reapply |.| to W^O on every forward pass instead of only at init.
    pub clamp_positive: bool,
}

impl EncoderConfig {
    pub fn hidden(&self) -> usize {
        4 * self.d
    }
}

#[derive(Debug, Clone)]
pub enum ModelError {
    TokenOutOfVocab { id: usize, vocab: usize },
    SequenceTooLong { len: usize, max: usize },
    EmptySequence,
    Grid(GridError),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::TokenOutOfVocab { id, vocab } => {
                write!(f, "token id {id} outside vocabulary of size {vocab}")
            }
            ModelError::SequenceTooLong { len, max } => {
                write!(f, "sequence length {len} exceeds max_len {max}")
            }
            ModelError::EmptySequence => write!(f, "cannot encode an empty sequence"),
            ModelError::Grid(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ModelError {}

impl From<GridError> for ModelError {
    fn from(e: GridError) -> Self {
        ModelError::Grid(e)
    }
}

/// Structural masks derived from the grid. `None` means the dense path.
#[derive(Debug, Clone)]
pub struct Masks {
    pub m: Option<Vec<f64>>,
    pub o_mask: Option<Vec<f64>>,
    pub d: usize,
}

impl Masks {
    pub fn build(cfg: &EncoderConfig) -> Result<Self, ModelError> {
        let grid = GridLayout::new(cfg.d)?;
        let (m, o_mask) = match cfg.mode {
            AttentionMode::Standard => (None, None),
            AttentionMode::Sq => (Some(grid::pooling_matrix(&grid, cfg.r_sq)?.mask), None),
            AttentionMode::Sqr => (
                Some(grid::pooling_matrix(&grid, cfg.r_sq)?.mask),
                Some(grid::local_mask(&grid, cfg.r_sr)?),
            ),
        };
        Ok(Self { m, o_mask, d: cfg.d })
    }

    pub fn vars<'t>(&self, tape: &'t Tape) -> MaskVars<'t> {
        MaskVars {
            m: self.m.as_ref().map(|m| tape.constant(self.d, self.d, m)),
            o_mask: self
                .o_mask
                .as_ref()
                .map(|m| tape.constant(self.d, self.d, m)),
        }
    }
}

pub struct MaskVars<'t> {
    pub m: Option<Var<'t>>,
    pub o_mask: Option<Var<'t>>,
}

/// |W^O * scale| ⊙ mask: the positive locally connected initialization for
/// spatial reweighting. The sign constraint holds at init only; training may
/// flip signs, while the mask keeps out-of-field entries at zero.
pub fn init_reweighting(w_o: &[f64], o_mask: &[f64], scale: f64) -> Vec<f64> {
    assert_eq!(w_o.len(), o_mask.len());
    assert!(scale > 0.0);
    w_o.iter()
        .zip(o_mask)
        .map(|(w, m)| (w * scale).abs() * m)
        .collect()
}

/// All trainable weights of the 1-layer encoder classifier, in a fixed order
/// shared by the optimizer and the checkpoint section table.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub embedding: Vec<f64>,
    pub positional: Vec<f64>,
    pub w_q: Vec<f64>,
    pub w_k: Vec<f64>,
    pub w_v: Vec<f64>,
    pub w_o: Vec<f64>,
    pub ff_w1: Vec<f64>,
    pub ff_b1: Vec<f64>,
    pub ff_w2: Vec<f64>,
    pub ff_b2: Vec<f64>,
    pub ln1_gamma: Vec<f64>,
    pub ln1_beta: Vec<f64>,
    pub ln2_gamma: Vec<f64>,
    pub ln2_beta: Vec<f64>,
    pub cls_w: Vec<f64>,
    pub cls_b: Vec<f64>,
}

pub const PARAM_NAMES: [&str; 16] = [
    "embedding",
    "positional",
    "w_q",
    "w_k",
    "w_v",
    "w_o",
    "ff_w1",
    "ff_b1",
    "ff_w2",
    "ff_b2",
    "ln1_gamma",
    "ln1_beta",
    "ln2_gamma",
    "ln2_beta",
    "cls_w",
    "cls_b",
];

impl ModelParams {
    pub fn init(cfg: &EncoderConfig, masks: &Masks, rng: &mut impl Rng) -> Self {
        let d = cfg.d;
        let h = cfg.hidden();
        let uniform = |rng: &mut dyn rand::RngCore, n: usize, bound: f64| -> Vec<f64> {
            (0..n).map(|_| rng.gen_range(-bound..bound)).collect()
        };
        let bound_d = 1.0 / (d as f64).sqrt();
        let bound_h = 1.0 / (h as f64).sqrt();
        let embedding = uniform(rng, cfg.vocab_size * d, 0.1);
        let positional = uniform(rng, cfg.max_len * d, 0.1);
        let w_q = uniform(rng, d * d, bound_d);
        let w_k = uniform(rng, d * d, bound_d);
        let w_v = uniform(rng, d * d, bound_d);
        let mut w_o = uniform(rng, d * d, bound_d);
        if let Some(o_mask) = &masks.o_mask {
            w_o = init_reweighting(&w_o, o_mask, cfg.reweight_scale);
        }
        Self {
            embedding,
            positional,
            w_q,
            w_k,
            w_v,
            w_o,
            ff_w1: uniform(rng, d * h, bound_d),
            ff_b1: vec![0.0; h],
            ff_w2: uniform(rng, h * d, bound_h),
            ff_b2: vec![0.0; d],
            ln1_gamma: vec![1.0; d],
            ln1_beta: vec![0.0; d],
            ln2_gamma: vec![1.0; d],
            ln2_beta: vec![0.0; d],
            cls_w: uniform(rng, d * 2, bound_d),
            cls_b: vec![0.0; 2],
        }
    }

    pub fn fields(&self) -> [&Vec<f64>; 16] {
        [
            &self.embedding,
            &self.positional,
            &self.w_q,
            &self.w_k,
            &self.w_v,
            &self.w_o,
            &self.ff_w1,
            &self.ff_b1,
            &self.ff_w2,
            &self.ff_b2,
            &self.ln1_gamma,
            &self.ln1_beta,
            &self.ln2_gamma,
            &self.ln2_beta,
            &self.cls_w,
            &self.cls_b,
        ]
    }

    pub fn fields_mut(&mut self) -> [&mut Vec<f64>; 16] {
        [
            &mut self.embedding,
            &mut self.positional,
            &mut self.w_q,
            &mut self.w_k,
            &mut self.w_v,
            &mut self.w_o,
            &mut self.ff_w1,
            &mut self.ff_b1,
            &mut self.ff_w2,
            &mut self.ff_b2,
            &mut self.ln1_gamma,
            &mut self.ln1_beta,
            &mut self.ln2_gamma,
            &mut self.ln2_beta,
            &mut self.cls_w,
            &mut self.cls_b,
        ]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.fields().iter().map(|f| f.len()).collect()
    }

    /// Mounts all parameters onto a tape, in field order.
    pub fn vars<'t>(&self, tape: &'t Tape, cfg: &EncoderConfig, trainable: bool) -> ParamVars<'t> {
        let d = cfg.d;
        let h = cfg.hidden();
        ParamVars {
            embedding: tape.leaf(cfg.vocab_size, d, &self.embedding, trainable),
            positional: tape.leaf(cfg.max_len, d, &self.positional, trainable),
            w_q: tape.leaf(d, d, &self.w_q, trainable),
            w_k: tape.leaf(d, d, &self.w_k, trainable),
            w_v: tape.leaf(d, d, &self.w_v, trainable),
            w_o: tape.leaf(d, d, &self.w_o, trainable),
            ff_w1: tape.leaf(d, h, &self.ff_w1, trainable),
            ff_b1: tape.leaf(1, h, &self.ff_b1, trainable),
            ff_w2: tape.leaf(h, d, &self.ff_w2, trainable),
            ff_b2: tape.leaf(1, d, &self.ff_b2, trainable),
            ln1_gamma: tape.leaf(1, d, &self.ln1_gamma, trainable),
            ln1_beta: tape.leaf(1, d, &self.ln1_beta, trainable),
            ln2_gamma: tape.leaf(1, d, &self.ln2_gamma, trainable),
            ln2_beta: tape.leaf(1, d, &self.ln2_beta, trainable),
            cls_w: tape.leaf(d, 2, &self.cls_w, trainable),
            cls_b: tape.leaf(1, 2, &self.cls_b, trainable),
        }
    }
}

pub struct ParamVars<'t> {
    pub embedding: Var<'t>,
    pub positional: Var<'t>,
    pub w_q: Var<'t>,
    pub w_k: Var<'t>,
    pub w_v: Var<'t>,
    pub w_o: Var<'t>,
    pub ff_w1: Var<'t>,
    pub ff_b1: Var<'t>,
    pub ff_w2: Var<'t>,
    pub ff_b2: Var<'t>,
    pub ln1_gamma: Var<'t>,
    pub ln1_beta: Var<'t>,
    pub ln2_gamma: Var<'t>,
    pub ln2_beta: Var<'t>,
    pub cls_w: Var<'t>,
    pub cls_b: Var<'t>,
}

impl<'t> ParamVars<'t> {
    pub fn list(&self) -> [Var<'t>; 16] {
        [
            self.embedding,
            self.positional,
            self.w_q,
            self.w_k,
            self.w_v,
            self.w_o,
            self.ff_w1,
            self.ff_b1,
            self.ff_w2,
            self.ff_b2,
            self.ln1_gamma,
            self.ln1_beta,
            self.ln2_gamma,
            self.ln2_beta,
            self.cls_w,
            self.cls_b,
        ]
    }
}

/// Row-wise softmax((Q M K^T)/sqrt(d)). With `m = None` this is standard
/// scaled dot-product attention.
pub fn attention_scores_sq<'t>(q: Var<'t>, k: Var<'t>, m: Option<Var<'t>>) -> Var<'t> {
    let d = q.cols();
    let qm = match m {
        Some(m) => q.matmul(m),
        None => q,
    };
    qm.matmul(k.t()).scale(1.0 / (d as f64).sqrt()).softmax_rows()
}

/// One encoder pass over a token sequence.
pub struct ForwardOutput<'t> {
    pub pooled: Var<'t>,
    pub logits: Var<'t>,
    pub attn: Var<'t>,
    /// Per-sentence sublayer captures: mean over tokens, each 1×d.
    pub queries: Var<'t>,
    pub keys: Var<'t>,
    pub values: Var<'t>,
    pub fc_out: Var<'t>,
}

pub fn encoder_forward<'t>(
    params: &ParamVars<'t>,
    masks: &MaskVars<'t>,
    cfg: &EncoderConfig,
    token_ids: &[usize],
) -> Result<ForwardOutput<'t>, ModelError> {
    if token_ids.is_empty() {
        return Err(ModelError::EmptySequence);
    }
    if token_ids.len() > cfg.max_len {
        return Err(ModelError::SequenceTooLong {
            len: token_ids.len(),
            max: cfg.max_len,
        });
    }
    if let Some(&id) = token_ids.iter().find(|&&id| id >= cfg.vocab_size) {
        return Err(ModelError::TokenOutOfVocab {
            id,
            vocab: cfg.vocab_size,
        });
    }

    let mut x = params.embedding.gather(token_ids);
    if cfg.positional {
        let pos: Vec<usize> = (0..token_ids.len()).collect();
        x = x.add(params.positional.gather(&pos));
    }

    let q = x.matmul(params.w_q);
    let k = x.matmul(params.w_k);
    let v = x.matmul(params.w_v);
    let attn = attention_scores_sq(q, k, masks.m);
    let ctx = attn.matmul(v);

    let w_o_eff = {
        let base = if cfg.clamp_positive {
            params.w_o.abs()
        } else {
            params.w_o
        };
        match masks.o_mask {
            Some(mask) => base.apply_mask(mask),
            None => base,
        }
    };
    let fc = ctx.matmul(w_o_eff);

    let h1 = x
        .add(fc)
        .layer_norm()
        .mul_row(params.ln1_gamma)
        .add_row(params.ln1_beta);
    let ff = h1
        .matmul(params.ff_w1)
        .add_row(params.ff_b1)
        .gelu()
        .matmul(params.ff_w2)
        .add_row(params.ff_b2);
    let h2 = h1
        .add(ff)
        .layer_norm()
        .mul_row(params.ln2_gamma)
        .add_row(params.ln2_beta);

    let pooled = h2.mean_rows();
    let logits = pooled.matmul(params.cls_w).add_row(params.cls_b);

    Ok(ForwardOutput {
        pooled,
        logits,
        attn,
        queries: q.mean_rows(),
        keys: k.mean_rows(),
        values: v.mean_rows(),
        fc_out: fc.mean_rows(),
    })
}
