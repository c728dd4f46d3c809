//! Labeled two-class corpora in `label<TAB>text` TSV form.

use std::path::Path;

use super::TrainError;

#[derive(Debug, Clone)]
pub struct LabeledCorpus {
    /// (label, text) pairs; labels are 0 or 1.
    pub examples: Vec<(u8, String)>,
    pub split: String,
}

impl LabeledCorpus {
    /// Parses TSV content: one example per line, `label<TAB>text`, labels
    /// "0"/"1". Blank lines are skipped.
    pub fn from_tsv_str(content: &str, split: impl Into<String>) -> Result<Self, TrainError> {
        let mut examples = Vec::new();
        for (i, raw) in content.lines().enumerate() {
            let line_no = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let (label, text) = raw
                .split_once('\t')
                .ok_or(TrainError::BadLine { line: line_no })?;
            let label = match label {
                "0" => 0u8,
                "1" => 1u8,
                other => {
                    return Err(TrainError::BadLabel {
                        line: line_no,
                        found: other.to_string(),
                    })
                }
            };
            examples.push((label, text.to_string()));
        }
        if examples.is_empty() {
            return Err(TrainError::EmptyCorpus);
        }
        Ok(Self {
            examples,
            split: split.into(),
        })
    }

    pub fn from_tsv_path(path: &Path, split: impl Into<String>) -> Result<Self, TrainError> {
        let content = std::fs::read_to_string(path).map_err(|source| TrainError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_tsv_str(&content, split)
    }

    pub fn to_tsv_string(&self) -> String {
        let mut out = String::new();
        for (label, text) in &self.examples {
            out.push_str(&format!("{label}\t{text}\n"));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Fraction of examples carrying the majority label.
    pub fn majority_baseline(&self) -> f64 {
        let ones = self.examples.iter().filter(|(l, _)| *l == 1).count();
        let n = self.examples.len();
        ones.max(n - ones) as f64 / n as f64
    }
}
