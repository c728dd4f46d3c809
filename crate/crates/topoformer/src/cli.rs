//! Command-line surface: training, activation capture, analyses, and sweeps.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
//! failure. Every output file gets a `.manifest.json` neighbor recording the
//! command, input content digests, seed, and wall time.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::analysis::{
    decode, pca, permutation_null, pls_svd_align, ridge_encode, scale_grid, selectivity,
    topo_stat_profile, ActivationMatrix, AnalysisError,
};
use crate::attention::{encoder_forward, Masks, ModelError};
use crate::autodiff::Tape;
use crate::grid::GridLayout;
use crate::io::{
    atomic_write, digest_bytes, digest_file, read_checkpoint, read_dump, write_checkpoint,
    write_dump, DumpMeta, IoError, RunManifest,
};
use crate::trainer::{rf_sweep, train_with_data, LabeledCorpus, TrainConfig, TrainError};
use crate::viz::{Colormap, Heatmap, Range, VizError};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

pub const SUBLAYERS: [&str; 4] = ["queries", "keys", "values", "fc_out"];

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: msg.into(),
        }
    }
    fn data(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: msg.into(),
        }
    }
    fn numeric(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERIC,
            message: msg.into(),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        let code = match &e {
            TrainError::Config(_) => EXIT_CONFIG,
            TrainError::DivergedLoss { .. } => EXIT_NUMERIC,
            TrainError::Model(m) => match m {
                ModelError::TokenOutOfVocab { .. } | ModelError::EmptySequence => EXIT_DATA,
                _ => EXIT_CONFIG,
            },
            _ => EXIT_DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        let code = match &e {
            AnalysisError::ShapeMismatch(_) | AnalysisError::BadParameter(_) => EXIT_CONFIG,
            AnalysisError::NonFinite | AnalysisError::TooFewPairs(_) => EXIT_NUMERIC,
            _ => EXIT_DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<VizError> for CliError {
    fn from(e: VizError) -> Self {
        match &e {
            VizError::NonFiniteValue(_) => CliError::numeric(e.to_string()),
            _ => CliError::config(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "topoformer",
    version,
    about = "Spatially organized 1-layer transformer workbench"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from a JSON config; writes a checkpoint and metrics CSV.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a checkpoint over a corpus and dump mean-pooled sublayer activations.
    Capture {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// One of queries, keys, values, fc_out, or all.
        #[arg(long, default_value = "all")]
        sublayer: String,
        #[arg(long)]
        out_dir: PathBuf,
        /// Warn when more than this fraction of tokens map to UNK.
        #[arg(long, default_value_t = 0.5)]
        unk_threshold: f64,
    },
    /// Statistical analyses over activation dumps.
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCommand,
    },
    /// PLS-SVD alignment between two dumps over the same sentences.
    Align {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value_t = 10)]
        components: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Receptive-field sweep over r_sq and r_sr grids.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated r_sq values (spatial-querying models).
        #[arg(long, default_value = "")]
        r_sq: String,
        /// Comma-separated r_sr values (querying-plus-reweighting models).
        #[arg(long, default_value = "")]
        r_sr: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Per-unit signed log10 p selectivity map between two condition dumps.
    Selectivity {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Colormap clamp: s-values render on [-range, range].
        #[arg(long, default_value_t = 10.0)]
        range: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Principal components of one dump; weights rendered as grid heatmaps.
    Pca {
        #[arg(long)]
        dump: PathBuf,
        #[arg(long, default_value_t = 2)]
        components: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Topography statistic profile plus its permutation null.
    Topo {
        #[arg(long)]
        dump: PathBuf,
        #[arg(long, default_value_t = 100)]
        n_perm: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Decode corpus labels from dump principal components.
    Decode {
        #[arg(long)]
        dump: PathBuf,
        /// TSV corpus providing one label per dump row, in row order.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 50)]
        components: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Ridge encoding of target units from feature units, lambda by LOO.
    Encode {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        targets: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    if let Ok(threads) = std::env::var("TOPOFORMER_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            // ignore failure when a pool already exists (tests, reentry)
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap prints its own message; help/version are successes
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Train {
            config,
            out_dir,
            seed,
        } => cmd_train(&config, &out_dir, seed),
        Command::Capture {
            checkpoint,
            corpus,
            sublayer,
            out_dir,
            unk_threshold,
        } => cmd_capture(&checkpoint, &corpus, &sublayer, &out_dir, unk_threshold),
        Command::Analyze { what } => match what {
            AnalyzeCommand::Selectivity {
                a,
                b,
                range,
                out_dir,
            } => cmd_selectivity(&a, &b, range, &out_dir),
            AnalyzeCommand::Pca {
                dump,
                components,
                out_dir,
            } => cmd_pca(&dump, components, &out_dir),
            AnalyzeCommand::Topo {
                dump,
                n_perm,
                seed,
                out_dir,
            } => cmd_topo(&dump, n_perm, seed, &out_dir),
            AnalyzeCommand::Decode {
                dump,
                corpus,
                components,
                seed,
                out_dir,
            } => cmd_decode(&dump, &corpus, components, seed, &out_dir),
            AnalyzeCommand::Encode {
                features,
                targets,
                seed,
                out_dir,
            } => cmd_encode(&features, &targets, seed, &out_dir),
        },
        Command::Align {
            x,
            y,
            components,
            seed,
            out_dir,
        } => cmd_align(&x, &y, components, seed, &out_dir),
        Command::Sweep {
            config,
            r_sq,
            r_sr,
            out_dir,
        } => cmd_sweep(&config, &r_sq, &r_sr, &out_dir),
    }
}

/// Collects input digests and writes one manifest per output file.
struct Provenance {
    command: String,
    seed: u64,
    config_digest: String,
    inputs: BTreeMap<String, String>,
    started: Instant,
}

impl Provenance {
    fn new(command: impl Into<String>, seed: u64) -> Self {
        Self {
            command: command.into(),
            seed,
            config_digest: String::new(),
            inputs: BTreeMap::new(),
            started: Instant::now(),
        }
    }

    fn input_file(&mut self, label: &str, path: &Path) -> Result<(), CliError> {
        self.inputs.insert(label.into(), digest_file(path)?);
        Ok(())
    }

    fn stamp(&self, output: &Path) -> Result<(), CliError> {
        let mut m = RunManifest::new(self.command.clone(), self.seed);
        m.config_digest = self.config_digest.clone();
        m.input_digests = self.inputs.clone();
        m.wall_time_secs = self.started.elapsed().as_secs_f64();
        m.write_for(output)?;
        Ok(())
    }

    fn write_output(&self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        atomic_write(path, bytes)?;
        self.stamp(path)?;
        Ok(())
    }
}

fn read_config(path: &Path) -> Result<TrainConfig, CliError> {
    let content = std::fs::read(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let cfg: TrainConfig = serde_json::from_slice(&content)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

fn load_corpora(cfg: &TrainConfig) -> Result<(LabeledCorpus, LabeledCorpus), CliError> {
    let train_path = cfg
        .train_corpus
        .as_deref()
        .ok_or_else(|| CliError::config("train_corpus path is required"))?;
    let test_path = cfg
        .test_corpus
        .as_deref()
        .ok_or_else(|| CliError::config("test_corpus path is required"))?;
    let train_set = LabeledCorpus::from_tsv_path(Path::new(train_path), "train")?;
    let test_set = LabeledCorpus::from_tsv_path(Path::new(test_path), "test")?;
    Ok((train_set, test_set))
}

fn cmd_train(config_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let mut cfg = read_config(config_path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let mut prov = Provenance::new("train", cfg.seed);
    prov.config_digest = digest_bytes(&serde_json::to_vec(&cfg).expect("serializable config"));
    prov.input_file("config", config_path)?;
    let (train_set, test_set) = load_corpora(&cfg)?;
    if let Some(p) = cfg.train_corpus.as_deref() {
        prov.input_file("train_corpus", Path::new(p))?;
    }
    if let Some(p) = cfg.test_corpus.as_deref() {
        prov.input_file("test_corpus", Path::new(p))?;
    }

    let outcome = train_with_data(&cfg, &train_set, &test_set)?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::data(format!("{}: {e}", out_dir.display())))?;
    let ckpt_path = out_dir.join("model.ckpt");
    write_checkpoint(&ckpt_path, &cfg, &outcome.vocab, &outcome.params)?;
    prov.stamp(&ckpt_path)?;
    let metrics_path = out_dir.join("metrics.csv");
    prov.write_output(&metrics_path, outcome.metrics_csv().as_bytes())?;

    println!(
        "trained {} model: d={} epochs={} final test accuracy {:.4}",
        cfg.mode,
        cfg.d,
        cfg.epochs,
        outcome.final_accuracy()
    );
    println!("checkpoint: {}", ckpt_path.display());
    println!("metrics: {}", metrics_path.display());
    Ok(())
}

fn cmd_capture(
    checkpoint: &Path,
    corpus: &Path,
    sublayer: &str,
    out_dir: &Path,
    unk_threshold: f64,
) -> Result<(), CliError> {
    let wanted: Vec<&str> = if sublayer == "all" {
        SUBLAYERS.to_vec()
    } else if SUBLAYERS.contains(&sublayer) {
        vec![sublayer]
    } else {
        return Err(CliError::config(format!(
            "unknown sublayer {sublayer:?}; expected one of queries, keys, values, fc_out, all"
        )));
    };

    let ckpt = read_checkpoint(checkpoint)?;
    let corpus_set = LabeledCorpus::from_tsv_path(corpus, "capture")?;
    let mut prov = Provenance::new(format!("capture --sublayer {sublayer}"), ckpt.config.seed);
    prov.input_file("checkpoint", checkpoint)?;
    prov.input_file("corpus", corpus)?;
    let model_digest = digest_file(checkpoint)?;

    let texts: Vec<&str> = corpus_set.examples.iter().map(|(_, t)| t.as_str()).collect();
    let unk = ckpt.vocab.unk_fraction(&texts);
    if unk > unk_threshold {
        eprintln!(
            "warning: {:.1}% of tokens map to UNK (threshold {:.1}%); \
             the corpus may not match the checkpoint vocabulary",
            unk * 100.0,
            unk_threshold * 100.0
        );
    }

    let encoder = ckpt.config.encoder_config(ckpt.vocab.len());
    let masks = Masks::build(&encoder).map_err(TrainError::from)?;
    let n = corpus_set.len();
    let d = encoder.d;
    let mut captures: BTreeMap<&str, Vec<f64>> =
        SUBLAYERS.iter().map(|s| (*s, vec![0.0; n * d])).collect();
    for (i, (_, text)) in corpus_set.examples.iter().enumerate() {
        let ids = ckpt.vocab.encode(text);
        let tape = Tape::new();
        let pvars = ckpt.params.vars(&tape, &encoder, false);
        let mvars = masks.vars(&tape);
        let out = encoder_forward(&pvars, &mvars, &encoder, &ids).map_err(TrainError::from)?;
        for (name, var) in [
            ("queries", out.queries),
            ("keys", out.keys),
            ("values", out.values),
            ("fc_out", out.fc_out),
        ] {
            captures.get_mut(name).expect("known sublayer")[i * d..(i + 1) * d]
                .copy_from_slice(&var.value());
        }
    }

    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::data(format!("{}: {e}", out_dir.display())))?;
    for name in wanted {
        let meta = DumpMeta {
            n,
            d,
            sublayer: name.to_string(),
            layer: 0,
            model_digest: model_digest.clone(),
            seed: ckpt.config.seed,
            blob: String::new(),
        };
        let json_path = write_dump(out_dir, name, &meta, &captures[name])?;
        prov.stamp(&json_path)?;
        prov.stamp(&out_dir.join(format!("{name}.bin")))?;
        println!("dump: {}", json_path.display());
    }
    Ok(())
}

fn load_matrix(path: &Path) -> Result<(DumpMeta, ActivationMatrix), CliError> {
    let (meta, data) = read_dump(path)?;
    let m = ActivationMatrix::new(meta.n, meta.d, data, meta.sublayer.clone())?;
    Ok((meta, m))
}

fn write_grid_heatmaps(
    prov: &Provenance,
    out_dir: &Path,
    stem: &str,
    values: &[f64],
    colormap: Colormap,
    range: Range,
) -> Result<(), CliError> {
    let h = Heatmap::new(values.to_vec(), colormap, range)?;
    prov.write_output(&out_dir.join(format!("{stem}.pgm")), &h.to_pgm())?;
    prov.write_output(&out_dir.join(format!("{stem}.svg")), h.to_svg().as_bytes())?;
    Ok(())
}

fn ensure_out_dir(out_dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::data(format!("{}: {e}", out_dir.display())))
}

fn cmd_selectivity(a: &Path, b: &Path, range: f64, out_dir: &Path) -> Result<(), CliError> {
    if !(range > 0.0) {
        return Err(CliError::config(format!("range {range} must be > 0")));
    }
    let (meta_a, mat_a) = load_matrix(a)?;
    let (meta_b, mat_b) = load_matrix(b)?;
    if meta_a.d != meta_b.d {
        return Err(CliError::config(format!(
            "dump widths differ: {} vs {}",
            meta_a.d, meta_b.d
        )));
    }
    let mut prov = Provenance::new(format!("analyze selectivity --range {range}"), meta_a.seed);
    prov.input_file("a", a)?;
    prov.input_file("b", b)?;

    let map = selectivity(&mat_a, &mat_b)?;

    #[derive(serde::Serialize)]
    struct Report<'r> {
        range: f64,
        n_a: usize,
        n_b: usize,
        map: &'r crate::analysis::SelectivityMap,
    }
    ensure_out_dir(out_dir)?;
    let report = serde_json::to_vec_pretty(&Report {
        range,
        n_a: mat_a.n,
        n_b: mat_b.n,
        map: &map,
    })
    .expect("serializable report");
    prov.write_output(&out_dir.join("selectivity.json"), &report)?;
    write_grid_heatmaps(
        &prov,
        out_dir,
        "selectivity",
        &map.s,
        Colormap::Diverging,
        Range::Symmetric(range),
    )?;
    println!("selectivity report: {}", out_dir.join("selectivity.json").display());
    Ok(())
}

fn cmd_pca(dump: &Path, components: usize, out_dir: &Path) -> Result<(), CliError> {
    let (meta, mat) = load_matrix(dump)?;
    let mut prov = Provenance::new(format!("analyze pca --components {components}"), meta.seed);
    prov.input_file("dump", dump)?;

    let result = pca(&mat, components)?;

    ensure_out_dir(out_dir)?;
    let report = serde_json::to_vec_pretty(&result).expect("serializable result");
    prov.write_output(&out_dir.join("pca.json"), &report)?;
    for c in 0..result.k {
        write_grid_heatmaps(
            &prov,
            out_dir,
            &format!("pc{}", c + 1),
            &result.component_weights(c),
            Colormap::Sequential,
            Range::MinMax,
        )?;
    }
    println!("pca report: {}", out_dir.join("pca.json").display());
    Ok(())
}

fn cmd_topo(dump: &Path, n_perm: usize, seed: u64, out_dir: &Path) -> Result<(), CliError> {
    let (_, mat) = load_matrix(dump)?;
    let mut prov = Provenance::new(format!("analyze topo --n-perm {n_perm}"), seed);
    prov.input_file("dump", dump)?;

    let grid = GridLayout::new(mat.d).map_err(|e| CliError::config(e.to_string()))?;
    let dist = grid.distance_matrix();
    let profile = topo_stat_profile(&mat, &dist)?;
    let scales = scale_grid(&dist, mat.d)?;
    let null = permutation_null(&mat, &dist, Some(&scales), n_perm, seed)?;

    #[derive(serde::Serialize)]
    struct Report {
        profile: crate::analysis::TopoStatResult,
        null: crate::analysis::PermutationNull,
    }
    ensure_out_dir(out_dir)?;
    let report = serde_json::to_vec_pretty(&Report { profile, null }).expect("serializable");
    prov.write_output(&out_dir.join("topo.json"), &report)?;
    println!("topo report: {}", out_dir.join("topo.json").display());
    Ok(())
}

fn cmd_decode(
    dump: &Path,
    corpus: &Path,
    components: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let (_, mat) = load_matrix(dump)?;
    let corpus_set = LabeledCorpus::from_tsv_path(corpus, "decode")?;
    if corpus_set.len() != mat.n {
        return Err(CliError::config(format!(
            "corpus has {} examples but the dump has {} rows",
            corpus_set.len(),
            mat.n
        )));
    }
    let mut prov = Provenance::new(format!("analyze decode --components {components}"), seed);
    prov.input_file("dump", dump)?;
    prov.input_file("corpus", corpus)?;

    let labels: Vec<u8> = corpus_set.examples.iter().map(|(l, _)| *l).collect();
    let result = decode(&mat, &labels, components, seed)?;

    ensure_out_dir(out_dir)?;
    let report = serde_json::to_vec_pretty(&result).expect("serializable");
    prov.write_output(&out_dir.join("decode.json"), &report)?;
    println!("decode report: {}", out_dir.join("decode.json").display());
    Ok(())
}

fn cmd_encode(features: &Path, targets: &Path, seed: u64, out_dir: &Path) -> Result<(), CliError> {
    let (_, feat) = load_matrix(features)?;
    let (_, targ) = load_matrix(targets)?;
    let mut prov = Provenance::new("analyze encode", seed);
    prov.input_file("features", features)?;
    prov.input_file("targets", targets)?;

    let result = ridge_encode(&feat, &targ, &[], seed)?;

    ensure_out_dir(out_dir)?;
    let report = serde_json::to_vec_pretty(&result).expect("serializable");
    prov.write_output(&out_dir.join("encode.json"), &report)?;
    println!("encode report: {}", out_dir.join("encode.json").display());
    Ok(())
}

fn cmd_align(
    x: &Path,
    y: &Path,
    components: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let (_, mat_x) = load_matrix(x)?;
    let (_, mat_y) = load_matrix(y)?;
    let mut prov = Provenance::new(format!("align --components {components}"), seed);
    prov.input_file("x", x)?;
    prov.input_file("y", y)?;

    let result = pls_svd_align(&mat_x, &mat_y, components, seed)?;

    ensure_out_dir(out_dir)?;
    let report = serde_json::to_vec_pretty(&result).expect("serializable");
    prov.write_output(&out_dir.join("align.json"), &report)?;
    for (c, w) in result.y_weights.iter().enumerate() {
        let limit = w.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-12);
        write_grid_heatmaps(
            &prov,
            out_dir,
            &format!("align_y{}", c + 1),
            w,
            Colormap::Diverging,
            Range::Symmetric(limit),
        )?;
    }
    println!("align report: {}", out_dir.join("align.json").display());
    Ok(())
}

fn parse_grid(s: &str, name: &str) -> Result<Vec<f64>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::config(format!("bad {name} value {p:?}")))
        })
        .collect()
}

fn cmd_sweep(config_path: &Path, r_sq: &str, r_sr: &str, out_dir: &Path) -> Result<(), CliError> {
    let cfg = read_config(config_path)?;
    let r_sq_grid = parse_grid(r_sq, "r_sq")?;
    let r_sr_grid = parse_grid(r_sr, "r_sr")?;
    if r_sq_grid.is_empty() && r_sr_grid.is_empty() {
        return Err(CliError::config("both sweep grids are empty"));
    }
    let mut prov = Provenance::new(
        format!("sweep --r-sq {r_sq} --r-sr {r_sr}"),
        cfg.seed,
    );
    prov.config_digest = digest_bytes(&serde_json::to_vec(&cfg).expect("serializable config"));
    prov.input_file("config", config_path)?;
    let (train_set, test_set) = load_corpora(&cfg)?;

    let report = rf_sweep(&cfg, &r_sq_grid, &r_sr_grid, &train_set, &test_set)?;

    ensure_out_dir(out_dir)?;
    prov.write_output(&out_dir.join("sweep.csv"), report.to_csv().as_bytes())?;
    let json = serde_json::to_vec_pretty(&report).expect("serializable");
    prov.write_output(&out_dir.join("sweep.json"), &json)?;
    for f in &report.factors {
        println!(
            "{}: spearman {:?} slope {:?} r_squared {:?}",
            f.factor, f.spearman, f.slope, f.r_squared
        );
    }
    println!("sweep table: {}", out_dir.join("sweep.csv").display());
    Ok(())
}
