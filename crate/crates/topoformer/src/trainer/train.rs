//! The supervised training loop for the 1-layer encoder classifier.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attention::{
    encoder_forward, AttentionMode, EncoderConfig, Masks, ModelParams,
};
use crate::autodiff::{AdamConfig, AdamState, Tape};

use super::vocab::build_vocab;
use super::{LabeledCorpus, TrainError, Vocab};

fn default_r_sq() -> f64 {
    0.3
}
fn default_r_sr() -> f64 {
    0.1
}
fn default_epochs() -> usize {
    20
}
fn default_lr() -> f64 {
    0.001
}
fn default_scale() -> f64 {
    10.0
}
fn default_min_freq() -> usize {
    1
}
fn default_max_len() -> usize {
    256
}
fn default_positional() -> bool {
    true
}

/// Full description of one training run. Unknown keys in a JSON config are
/// rejected so typos surface as config errors instead of silent defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub mode: AttentionMode,
    pub d: usize,
    #[serde(default = "default_r_sq")]
    pub r_sq: f64,
    #[serde(default = "default_r_sr")]
    pub r_sr: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    /// Absent means the per-mode default: 256 for SQR, 128 otherwise.
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default)]
    pub seed: u64,
    /// Reweighting init multiplier (SQR only).
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default = "default_positional")]
    pub positional: bool,
    #[serde(default = "default_min_freq")]
    pub min_freq: usize,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    #[serde(default)]
    pub train_corpus: Option<String>,
    #[serde(default)]
    pub test_corpus: Option<String>,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let side = (self.d as f64).sqrt().round() as usize;
        if self.d == 0 || side * side != self.d {
            return Err(TrainError::Config(format!(
                "d = {} is not a perfect square",
                self.d
            )));
        }
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be >= 1".into()));
        }
        if self.batch_size == Some(0) {
            return Err(TrainError::Config("batch_size must be >= 1".into()));
        }
        for (name, r) in [("r_sq", self.r_sq), ("r_sr", self.r_sr)] {
            if !(r > 0.0 && r <= 1.0) {
                return Err(TrainError::Config(format!("{name} = {r} outside (0, 1]")));
            }
        }
        if !(self.lr > 0.0) {
            return Err(TrainError::Config(format!("lr = {} must be > 0", self.lr)));
        }
        if !(self.scale > 0.0) {
            return Err(TrainError::Config(format!(
                "scale = {} must be > 0",
                self.scale
            )));
        }
        if self.max_len == 0 {
            return Err(TrainError::Config("max_len must be >= 1".into()));
        }
        Ok(())
    }

    pub fn effective_batch_size(&self) -> usize {
        self.batch_size.unwrap_or(match self.mode {
            AttentionMode::Sqr => 256,
            _ => 128,
        })
    }

    pub fn encoder_config(&self, vocab_size: usize) -> EncoderConfig {
        EncoderConfig {
            d: self.d,
            vocab_size,
            max_len: self.max_len,
            mode: self.mode,
            r_sq: self.r_sq,
            r_sr: self.r_sr,
            reweight_scale: self.scale,
            positional: self.positional,
            clamp_positive: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

pub struct TrainOutcome {
    pub config: TrainConfig,
    pub encoder: EncoderConfig,
    pub params: ModelParams,
    pub masks: Masks,
    pub vocab: Vocab,
    pub history: Vec<EpochMetrics>,
}

impl TrainOutcome {
    pub fn final_accuracy(&self) -> f64 {
        self.history.last().map(|m| m.accuracy).unwrap_or(0.0)
    }

    /// `epoch,loss,accuracy` CSV of the metrics history.
    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("epoch,loss,accuracy\n");
        for m in &self.history {
            out.push_str(&format!("{},{},{}\n", m.epoch, m.loss, m.accuracy));
        }
        out
    }
}

/// Loads the corpora named in the config and trains.
pub fn train(config: &TrainConfig) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    let train_path = config
        .train_corpus
        .as_deref()
        .ok_or_else(|| TrainError::Config("train_corpus path is required".into()))?;
    let test_path = config
        .test_corpus
        .as_deref()
        .ok_or_else(|| TrainError::Config("test_corpus path is required".into()))?;
    let train_set = LabeledCorpus::from_tsv_path(Path::new(train_path), "train")?;
    let test_set = LabeledCorpus::from_tsv_path(Path::new(test_path), "test")?;
    train_with_data(config, &train_set, &test_set)
}

/// Trains on already-loaded corpora. Fully reproducible from `config.seed`.
pub fn train_with_data(
    config: &TrainConfig,
    train_set: &LabeledCorpus,
    test_set: &LabeledCorpus,
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    if train_set.is_empty() || test_set.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }

    let vocab = build_vocab(train_set, config.min_freq, config.max_len)?;
    let encoder = config.encoder_config(vocab.len());
    let masks = Masks::build(&encoder)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = ModelParams::init(&encoder, &masks, &mut rng);
    let adam_cfg = AdamConfig::small(config.lr);
    let mut adam = AdamState::new(&params.sizes());

    let encoded_train: Vec<(Vec<usize>, usize)> = train_set
        .examples
        .iter()
        .map(|(l, t)| (vocab.encode(t), *l as usize))
        .collect();
    let encoded_test: Vec<(Vec<usize>, usize)> = test_set
        .examples
        .iter()
        .map(|(l, t)| (vocab.encode(t), *l as usize))
        .collect();

    let batch_size = config.effective_batch_size();
    let mut order: Vec<usize> = (0..encoded_train.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(batch_size) {
            let loss =
                batch_step(&mut params, &mut adam, &adam_cfg, &encoder, &masks, |p, m| {
                    batch_loss(p, m, &encoder, &encoded_train, batch)
                })?;
            if !loss.is_finite() {
                return Err(TrainError::DivergedLoss { epoch });
            }
            loss_sum += loss * batch.len() as f64;
        }
        let loss = loss_sum / encoded_train.len() as f64;
        let accuracy = evaluate(&params, &masks, &encoder, &encoded_test)?;
        history.push(EpochMetrics {
            epoch,
            loss,
            accuracy,
        });
    }

    Ok(TrainOutcome {
        config: config.clone(),
        encoder,
        params,
        masks,
        vocab,
        history,
    })
}

fn batch_loss<'t>(
    params: &crate::attention::ParamVars<'t>,
    masks: &crate::attention::MaskVars<'t>,
    encoder: &EncoderConfig,
    examples: &[(Vec<usize>, usize)],
    batch: &[usize],
) -> Result<crate::autodiff::Var<'t>, TrainError> {
    let mut total: Option<crate::autodiff::Var<'t>> = None;
    for &i in batch {
        let (ids, label) = &examples[i];
        let out = encoder_forward(params, masks, encoder, ids)?;
        let l = out.logits.cross_entropy(&[*label]);
        total = Some(match total {
            Some(acc) => acc.add(l),
            None => l,
        });
    }
    Ok(total.expect("nonempty batch").scale(1.0 / batch.len() as f64))
}

fn batch_step<F>(
    params: &mut ModelParams,
    adam: &mut AdamState,
    adam_cfg: &AdamConfig,
    encoder: &EncoderConfig,
    masks: &Masks,
    loss_fn: F,
) -> Result<f64, TrainError>
where
    F: for<'t> FnOnce(
        &crate::attention::ParamVars<'t>,
        &crate::attention::MaskVars<'t>,
    ) -> Result<crate::autodiff::Var<'t>, TrainError>,
{
    let tape = Tape::new();
    let pvars = params.vars(&tape, encoder, true);
    let mvars = masks.vars(&tape);
    let loss = loss_fn(&pvars, &mvars)?;
    let loss_value = loss.value()[0];
    let grads = tape.backward(loss);
    let grad_vecs: Vec<Vec<f64>> = pvars.list().iter().map(|v| grads.wrt(*v)).collect();
    let mut fields = params.fields_mut();
    let mut slices: Vec<&mut [f64]> = fields.iter_mut().map(|f| f.as_mut_slice()).collect();
    adam.step(adam_cfg, &mut slices, &grad_vecs);
    Ok(loss_value)
}

/// Fraction of examples whose argmax logit matches the label.
pub fn evaluate(
    params: &ModelParams,
    masks: &Masks,
    encoder: &EncoderConfig,
    examples: &[(Vec<usize>, usize)],
) -> Result<f64, TrainError> {
    let mut hits = 0usize;
    for (ids, label) in examples {
        let tape = Tape::new();
        let pvars = params.vars(&tape, encoder, false);
        let mvars = masks.vars(&tape);
        let out = encoder_forward(&pvars, &mvars, encoder, ids)?;
        let logits = out.logits.value();
        let pred = if logits[1] > logits[0] { 1 } else { 0 };
        if pred == *label {
            hits += 1;
        }
    }
    Ok(hits as f64 / examples.len() as f64)
}

/// Mean cross-entropy of the current parameters over a set of examples.
pub fn mean_loss(
    params: &ModelParams,
    masks: &Masks,
    encoder: &EncoderConfig,
    examples: &[(Vec<usize>, usize)],
) -> Result<f64, TrainError> {
    let mut sum = 0.0;
    for (ids, label) in examples {
        let tape = Tape::new();
        let pvars = params.vars(&tape, encoder, false);
        let mvars = masks.vars(&tape);
        let out = encoder_forward(&pvars, &mvars, encoder, ids)?;
        sum += out.logits.cross_entropy(&[*label]).value()[0];
    }
    Ok(sum / examples.len() as f64)
}
