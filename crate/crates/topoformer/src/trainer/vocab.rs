//! Word-level vocabulary with deterministic id assignment.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{LabeledCorpus, TrainError};

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocab {
    /// id -> token, with ids 0 and 1 reserved for PAD and UNK.
    tokens: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    pub max_len: usize,
}

/// Lowercases, strips `<...>` markup spans, and splits on any run of
/// non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut cleaned = String::with_capacity(text.len());
    let mut in_tag = false;
    for ch in text.chars() {
        match ch {
            '<' => in_tag = true,
            '>' if in_tag => {
                in_tag = false;
                cleaned.push(' ');
            }
            c if !in_tag => cleaned.push(c),
            _ => {}
        }
    }
    cleaned
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// Ids are assigned by descending corpus frequency, ties broken by token
/// order, so the mapping is a pure function of the corpus and `min_freq`.
pub fn build_vocab(
    corpus: &LabeledCorpus,
    min_freq: usize,
    max_len: usize,
) -> Result<Vocab, TrainError> {
    if corpus.examples.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    for (_, text) in &corpus.examples {
        for tok in tokenize(text) {
            *counts.entry(tok).or_insert(0) += 1;
        }
    }
    let mut entries: Vec<(String, usize)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= min_freq.max(1))
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut tokens = vec!["<pad>".to_string(), "<unk>".to_string()];
    tokens.extend(entries.into_iter().map(|(t, _)| t));
    Ok(Vocab::from_tokens(tokens, max_len))
}

impl Vocab {
    pub fn from_tokens(tokens: Vec<String>, max_len: usize) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self {
            tokens,
            index,
            max_len,
        }
    }

    /// Rebuilds the lookup index after deserialization.
    pub fn reindex(&mut self) {
        self.index = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(|s| s.as_str())
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Token ids for a text, truncated to `max_len`. Out-of-vocabulary tokens
    /// map to UNK; a text with no tokens encodes as a single UNK so every
    /// example still produces a sequence.
    pub fn encode(&self, text: &str) -> Vec<usize> {
        let ids: Vec<usize> = tokenize(text)
            .iter()
            .take(self.max_len)
            .map(|t| self.id(t).unwrap_or(UNK_ID))
            .collect();
        if ids.is_empty() {
            vec![UNK_ID]
        } else {
            ids
        }
    }

    /// Fraction of encoded tokens that fell back to UNK.
    pub fn unk_fraction(&self, texts: &[&str]) -> f64 {
        let mut total = 0usize;
        let mut unk = 0usize;
        for t in texts {
            for id in self.encode(t) {
                total += 1;
                if id == UNK_ID {
                    unk += 1;
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            unk as f64 / total as f64
        }
    }
}
