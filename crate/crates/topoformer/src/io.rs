//! File formats and digests: activation dumps, checkpoints, run manifests.
//!
//! All writes go through a temp-file-plus-rename so readers never observe a
//! partial file. Weights are stored as little-endian 32-bit floats; in-memory
//! computation stays 64-bit.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::attention::{ModelParams, PARAM_NAMES};
use crate::trainer::{TrainConfig, Vocab};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"TOPOCKPT";

#[derive(Debug)]
pub enum IoError {
    Io { path: String, source: std::io::Error },
    BadFormat { path: String, reason: String },
    Json { path: String, source: serde_json::Error },
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoError::Io { path, source } => write!(f, "{path}: {source}"),
            IoError::BadFormat { path, reason } => write!(f, "{path}: {reason}"),
            IoError::Json { path, source } => write!(f, "{path}: {source}"),
        }
    }
}

impl std::error::Error for IoError {}

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn format_err(path: &Path, reason: impl Into<String>) -> IoError {
    IoError::BadFormat {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Hex SHA-256 of a byte slice.
pub fn digest_bytes(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

pub fn digest_file(path: &Path) -> Result<String, IoError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(digest_bytes(&bytes))
}

/// Writes via a temp file in the same directory plus an atomic rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.flush().map_err(|e| io_err(path, e))?;
    tmp.persist(path)
        .map_err(|e| io_err(path, e.error))?;
    Ok(())
}

fn f64s_to_f32_le(values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len() * 4);
    for &v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

fn f32_le_to_f64s(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect()
}

/// Sidecar metadata for one activation dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DumpMeta {
    pub n: usize,
    pub d: usize,
    pub sublayer: String,
    pub layer: usize,
    pub model_digest: String,
    pub seed: u64,
    /// Blob file name, relative to the sidecar.
    pub blob: String,
}

/// Writes `<dir>/<name>.json` (sidecar) and `<dir>/<name>.bin` (row-major
/// n·d little-endian f32 values). Returns the sidecar path.
pub fn write_dump(
    dir: &Path,
    name: &str,
    meta: &DumpMeta,
    data: &[f64],
) -> Result<PathBuf, IoError> {
    let json_path = dir.join(format!("{name}.json"));
    if data.len() != meta.n * meta.d {
        return Err(format_err(
            &json_path,
            format!("{} values for {}x{} dump", data.len(), meta.n, meta.d),
        ));
    }
    let side = (meta.d as f64).sqrt().round() as usize;
    if side * side != meta.d {
        return Err(format_err(
            &json_path,
            format!("d = {} is not a perfect square", meta.d),
        ));
    }
    let mut meta = meta.clone();
    meta.blob = format!("{name}.bin");
    let bin_path = dir.join(&meta.blob);
    atomic_write(&bin_path, &f64s_to_f32_le(data))?;
    let json = serde_json::to_vec_pretty(&meta).expect("serializable meta");
    atomic_write(&json_path, &json)?;
    Ok(json_path)
}

/// Reads a dump given its sidecar path.
pub fn read_dump(json_path: &Path) -> Result<(DumpMeta, Vec<f64>), IoError> {
    let content = fs::read(json_path).map_err(|e| io_err(json_path, e))?;
    let meta: DumpMeta = serde_json::from_slice(&content).map_err(|source| IoError::Json {
        path: json_path.display().to_string(),
        source,
    })?;
    let bin_path = json_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&meta.blob);
    let blob = fs::read(&bin_path).map_err(|e| io_err(&bin_path, e))?;
    if blob.len() != 4 * meta.n * meta.d {
        return Err(format_err(
            &bin_path,
            format!(
                "blob is {} bytes, expected {} for {}x{}",
                blob.len(),
                4 * meta.n * meta.d,
                meta.n,
                meta.d
            ),
        ));
    }
    Ok((meta, f32_le_to_f64s(&blob)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Section {
    name: String,
    /// Byte offset into the weight blob (after the header).
    offset: usize,
    /// Length in bytes.
    len: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CheckpointHeader {
    config: TrainConfig,
    vocab_tokens: Vec<String>,
    vocab_max_len: usize,
    sections: Vec<Section>,
}

pub struct Checkpoint {
    pub config: TrainConfig,
    pub vocab: Vocab,
    pub params: ModelParams,
}

/// Layout: 8-byte magic, u32 little-endian header length, JSON header with a
/// section table of byte offsets, then the concatenated f32 weight blob.
pub fn write_checkpoint(
    path: &Path,
    config: &TrainConfig,
    vocab: &Vocab,
    params: &ModelParams,
) -> Result<(), IoError> {
    let fields = params.fields();
    let mut sections = Vec::with_capacity(fields.len());
    let mut blob = Vec::new();
    for (name, field) in PARAM_NAMES.iter().zip(fields.iter()) {
        let bytes = f64s_to_f32_le(field);
        sections.push(Section {
            name: name.to_string(),
            offset: blob.len(),
            len: bytes.len(),
        });
        blob.extend_from_slice(&bytes);
    }
    let header = CheckpointHeader {
        config: config.clone(),
        vocab_tokens: vocab.tokens().to_vec(),
        vocab_max_len: vocab.max_len,
        sections,
    };
    let header_json = serde_json::to_vec(&header).expect("serializable header");

    let mut out = Vec::with_capacity(12 + header_json.len() + blob.len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&header_json);
    out.extend_from_slice(&blob);
    atomic_write(path, &out)
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, IoError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.len() < 12 || &bytes[..8] != CHECKPOINT_MAGIC {
        return Err(format_err(path, "missing checkpoint magic"));
    }
    let header_len = u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize;
    let header_end = 12 + header_len;
    if bytes.len() < header_end {
        return Err(format_err(path, "truncated header"));
    }
    let header: CheckpointHeader =
        serde_json::from_slice(&bytes[12..header_end]).map_err(|source| IoError::Json {
            path: path.display().to_string(),
            source,
        })?;
    let blob = &bytes[header_end..];

    let mut by_name: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for s in &header.sections {
        let end = s.offset + s.len;
        if end > blob.len() {
            return Err(format_err(
                path,
                format!("section {} runs past the blob ({} > {})", s.name, end, blob.len()),
            ));
        }
        by_name.insert(s.name.as_str(), f32_le_to_f64s(&blob[s.offset..end]));
    }
    let mut take = |name: &str| -> Result<Vec<f64>, IoError> {
        by_name
            .remove(name)
            .ok_or_else(|| format_err(path, format!("missing section {name}")))
    };
    let params = ModelParams {
        embedding: take("embedding")?,
        positional: take("positional")?,
        w_q: take("w_q")?,
        w_k: take("w_k")?,
        w_v: take("w_v")?,
        w_o: take("w_o")?,
        ff_w1: take("ff_w1")?,
        ff_b1: take("ff_b1")?,
        ff_w2: take("ff_w2")?,
        ff_b2: take("ff_b2")?,
        ln1_gamma: take("ln1_gamma")?,
        ln1_beta: take("ln1_beta")?,
        ln2_gamma: take("ln2_gamma")?,
        ln2_beta: take("ln2_beta")?,
        cls_w: take("cls_w")?,
        cls_b: take("cls_b")?,
    };
    let vocab = Vocab::from_tokens(header.vocab_tokens, header.vocab_max_len);

    // consistency: the embedding section must match the stored vocabulary
    if params.embedding.len() != vocab.len() * header.config.d {
        return Err(format_err(
            path,
            format!(
                "embedding has {} values for vocab {} x d {}",
                params.embedding.len(),
                vocab.len(),
                header.config.d
            ),
        ));
    }
    Ok(Checkpoint {
        config: header.config,
        vocab,
        params,
    })
}

/// Provenance record written next to every output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    /// input label -> content digest
    pub input_digests: BTreeMap<String, String>,
    pub tool_version: String,
    pub seed: u64,
    pub wall_time_secs: f64,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        Self {
            command: command.into(),
            config_digest: String::new(),
            input_digests: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            wall_time_secs: 0.0,
        }
    }

    /// Writes `<output>.manifest.json` atomically.
    pub fn write_for(&self, output: &Path) -> Result<PathBuf, IoError> {
        let mut name = output
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "output".into());
        name.push_str(".manifest.json");
        let path = output.with_file_name(name);
        let json = serde_json::to_vec_pretty(self).expect("serializable manifest");
        atomic_write(&path, &json)?;
        Ok(path)
    }
}
