//! Acceptance suite. Each test checks one claimed property of the crate and
//! prints a single PASS/FAIL line (run with `--nocapture` to see them).
//!
//! Desk-scale tests finish in minutes. The full IMDB replication is marked
//! `#[ignore]` and reads corpus paths from TOPOFORMER_IMDB_TRAIN and
//! TOPOFORMER_IMDB_TEST.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topoformer::analysis::stats::{percentile, spearman, welch_t};
use topoformer::analysis::{
    permutation_null, pls_svd_align, ridge_loo_press, scale_grid, selectivity, topo_stat,
    ActivationMatrix,
};
use topoformer::attention::{
    encoder_forward, AttentionMode, EncoderConfig, Masks, ModelParams,
};
use topoformer::autodiff::Tape;
use topoformer::grid::GridLayout;
use topoformer::trainer::{synth, train_with_data, LabeledCorpus, TrainConfig, TrainOutcome};

fn criterion(name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {name}: {verdict} ({detail})");
    assert!(pass, "{name}: {detail}");
}

// ---------------------------------------------------------------------------
// gradient correctness

fn encoder_loss(cfg: &EncoderConfig, masks: &Masks, params: &ModelParams, ids: &[usize]) -> f64 {
    let tape = Tape::new();
    let pv = params.vars(&tape, cfg, false);
    let mv = masks.vars(&tape);
    let out = encoder_forward(&pv, &mv, cfg, ids).unwrap();
    out.logits.cross_entropy(&[1]).item()
}

/// Max relative error between analytic and central-difference gradients over
/// every parameter of the encoder.
fn encoder_grad_error(cfg: &EncoderConfig, seed: u64) -> f64 {
    let masks = Masks::build(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = ModelParams::init(cfg, &masks, &mut rng);
    let ids = [2usize, 5, 3, 7, 1];

    let tape = Tape::new();
    let pv = params.vars(&tape, cfg, true);
    let mv = masks.vars(&tape);
    let out = encoder_forward(&pv, &mv, cfg, &ids).unwrap();
    let loss = out.logits.cross_entropy(&[1]);
    let grads = tape.backward(loss);
    let analytic: Vec<Vec<f64>> = pv.list().iter().map(|v| grads.wrt(*v)).collect();

    let h = 1e-5;
    let mut max_err = 0.0f64;
    for (fi, field) in params.fields().iter().enumerate() {
        for ci in 0..field.len() {
            let mut plus = params.clone();
            plus.fields_mut()[fi][ci] += h;
            let mut minus = params.clone();
            minus.fields_mut()[fi][ci] -= h;
            let fd = (encoder_loss(cfg, &masks, &plus, &ids)
                - encoder_loss(cfg, &masks, &minus, &ids))
                / (2.0 * h);
            let a = analytic[fi][ci];
            let err = (a - fd).abs() / f64::max(1.0, a.abs());
            max_err = max_err.max(err);
        }
    }
    max_err
}

#[test]
fn gradient_correctness() {
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        for mode in [AttentionMode::Sq, AttentionMode::Sqr] {
            let cfg = EncoderConfig {
                d: 9,
                vocab_size: 10,
                max_len: 8,
                mode,
                r_sq: 0.5,
                r_sr: 0.5,
                reweight_scale: 1.0,
                positional: true,
                // exercise the |W^O| forward path on half the seeds
                clamp_positive: mode == AttentionMode::Sqr && seed % 2 == 0,
            };
            worst = worst.max(encoder_grad_error(&cfg, seed));
        }
    }
    criterion(
        "gradient-correctness",
        worst < 1e-4,
        &format!("max relative error {worst:.2e} over 10 seeds, sq and sqr"),
    );
}

// ---------------------------------------------------------------------------
// reduction identities

fn forward_logits(
    cfg: &EncoderConfig,
    m: Option<&[f64]>,
    o_mask: Option<&[f64]>,
    params: &ModelParams,
    ids: &[usize],
) -> Vec<f64> {
    let tape = Tape::new();
    let pv = params.vars(&tape, cfg, false);
    let mv = topoformer::attention::MaskVars {
        m: m.map(|v| tape.constant(cfg.d, cfg.d, v)),
        o_mask: o_mask.map(|v| tape.constant(cfg.d, cfg.d, v)),
    };
    let out = encoder_forward(&pv, &mv, cfg, ids).unwrap();
    out.logits.value()
}

#[test]
fn reduction_identities() {
    let d = 16;
    let cfg = EncoderConfig {
        d,
        vocab_size: 12,
        max_len: 10,
        mode: AttentionMode::Standard,
        r_sq: 0.5,
        r_sr: 0.5,
        reweight_scale: 1.0,
        positional: true,
        clamp_positive: false,
    };
    let masks = Masks::build(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let params = ModelParams::init(&cfg, &masks, &mut rng);
    let ids = [3usize, 1, 8, 4, 2, 9];

    let mut identity = vec![0.0; d * d];
    for i in 0..d {
        identity[i * d + i] = 1.0;
    }
    let standard = forward_logits(&cfg, None, None, &params, &ids);
    let sq_identity = forward_logits(&cfg, Some(&identity), None, &params, &ids);
    let first = standard == sq_identity;

    let grid = GridLayout::new(d).unwrap();
    let m = topoformer::grid::pooling_matrix(&grid, 0.5).unwrap().mask;
    let ones = vec![1.0; d * d];
    let sq = forward_logits(&cfg, Some(&m), None, &params, &ids);
    let sqr_allones = forward_logits(&cfg, Some(&m), Some(&ones), &params, &ids);
    let second = sq == sqr_allones;

    criterion(
        "reduction-identities",
        first && second,
        &format!("identity-M == standard: {first}; all-ones mask == sq: {second}"),
    );
}

// ---------------------------------------------------------------------------
// topography at desk scale

fn desk_config(mode: AttentionMode) -> TrainConfig {
    TrainConfig {
        mode,
        d: 64,
        r_sq: 0.3,
        r_sr: 0.1,
        epochs: 20,
        batch_size: None,
        lr: 0.001,
        seed: 7,
        scale: 10.0,
        positional: true,
        min_freq: 1,
        max_len: 32,
        train_corpus: None,
        test_corpus: None,
    }
}

fn capture_sublayer(out: &TrainOutcome, corpus: &LabeledCorpus, which: &str) -> ActivationMatrix {
    let d = out.encoder.d;
    let n = corpus.len();
    let mut data = vec![0.0; n * d];
    for (i, (_, text)) in corpus.examples.iter().enumerate() {
        let ids = out.vocab.encode(text);
        let tape = Tape::new();
        let pv = out.params.vars(&tape, &out.encoder, false);
        let mv = out.masks.vars(&tape);
        let fwd = encoder_forward(&pv, &mv, &out.encoder, &ids).unwrap();
        let v = match which {
            "keys" => fwd.keys,
            "fc_out" => fwd.fc_out,
            _ => unreachable!(),
        };
        data[i * d..(i + 1) * d].copy_from_slice(&v.value());
    }
    ActivationMatrix::new(n, d, data, which).unwrap()
}

fn null_for(mat: &ActivationMatrix) -> topoformer::analysis::PermutationNull {
    let grid = GridLayout::new(mat.d).unwrap();
    let dist = grid.distance_matrix();
    let scales = scale_grid(&dist, mat.d).unwrap();
    permutation_null(mat, &dist, Some(&scales), 100, 42).unwrap()
}

#[test]
fn topography_emerges_in_keys() {
    let (train_set, test_set) = synth::separable_corpus(2000, 8, 11);
    let sq = train_with_data(&desk_config(AttentionMode::Sq), &train_set, &test_set).unwrap();
    let control =
        train_with_data(&desk_config(AttentionMode::Standard), &train_set, &test_set).unwrap();

    let sq_null = null_for(&capture_sublayer(&sq, &test_set, "keys"));
    let ctl_null = null_for(&capture_sublayer(&control, &test_set, "keys"));
    let ctl_p99 = percentile(&ctl_null.null, 99.0);
    let pass = sq_null.significant_95 && ctl_null.observed <= ctl_p99;
    criterion(
        "topography-emerges",
        pass,
        &format!(
            "sq keys t={:.4} (null p95 {:.4}); control keys t={:.4} (null p99 {:.4})",
            sq_null.observed,
            percentile(&sq_null.null, 95.0),
            ctl_null.observed,
            ctl_p99
        ),
    );
}

#[test]
fn reweighting_extends_topography_to_fc_out() {
    let (train_set, test_set) = synth::separable_corpus(2000, 8, 11);
    let sqr = train_with_data(&desk_config(AttentionMode::Sqr), &train_set, &test_set).unwrap();
    let null = null_for(&capture_sublayer(&sqr, &test_set, "fc_out"));
    criterion(
        "reweighting-extends-topography",
        null.significant_95,
        &format!(
            "sqr fc_out t={:.4}, null p95 {:.4}",
            null.observed,
            percentile(&null.null, 95.0)
        ),
    );
}

// ---------------------------------------------------------------------------
// receptive-field sweep direction

#[test]
fn rf_sweep_direction() {
    let (train_set, test_set) = synth::noisy_corpus(800, 10, 0.45, 21);
    let grid = [0.05, 0.3, 0.6, 0.9];
    // average each cell over three base seeds to damp single-run noise
    let seeds = [100u64, 200, 300];
    let mut acc_sq = vec![0.0; grid.len()];
    let mut acc_sr = vec![0.0; grid.len()];
    for &seed in &seeds {
        let base = TrainConfig {
            mode: AttentionMode::Sq,
            d: 36,
            r_sq: 0.3,
            r_sr: 0.3,
            epochs: 10,
            batch_size: Some(64),
            lr: 0.001,
            seed,
            scale: 10.0,
            positional: true,
            min_freq: 1,
            max_len: 32,
            train_corpus: None,
            test_corpus: None,
        };
        let report =
            topoformer::trainer::rf_sweep(&base, &grid, &grid, &train_set, &test_set).unwrap();
        for (i, cell) in report.cells.iter().enumerate() {
            let acc = cell.accuracy.expect("sweep cell trained");
            if i < grid.len() {
                acc_sq[i] += acc / seeds.len() as f64;
            } else {
                acc_sr[i - grid.len()] += acc / seeds.len() as f64;
            }
        }
    }
    let rho_sq = spearman(&grid, &acc_sq).unwrap();
    let rho_sr = spearman(&grid, &acc_sr).unwrap();
    criterion(
        "rf-sweep-direction",
        rho_sq < 0.0 && rho_sr.abs() < rho_sq.abs(),
        &format!("spearman(r_sq, acc) = {rho_sq:.3}, spearman(r_sr, acc) = {rho_sr:.3}"),
    );
}

// ---------------------------------------------------------------------------
// statistics against brute-force oracles

fn oracle_ranks(xs: &[f64]) -> Vec<f64> {
    // midrank by counting, quadratic on purpose
    xs.iter()
        .map(|&x| {
            let less = xs.iter().filter(|&&y| y < x).count() as f64;
            let equal = xs.iter().filter(|&&y| y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx.sqrt() * vy.sqrt())
}

#[test]
fn statistics_match_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut failures: Vec<String> = Vec::new();

    // spearman on data with ties
    let x: Vec<f64> = (0..30).map(|_| (rng.gen_range(0..10) as f64) / 2.0).collect();
    let y: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let ours = spearman(&x, &y).unwrap();
    let oracle = oracle_pearson(&oracle_ranks(&x), &oracle_ranks(&y));
    if (ours - oracle).abs() >= 1e-8 {
        failures.push(format!("spearman {ours} vs {oracle}"));
    }

    // topo stat on a 25-unit grid, against an explicit pair enumeration
    let d = 25;
    let n = 40;
    let data: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mat = ActivationMatrix::new(n, d, data.clone(), "oracle").unwrap();
    let grid = GridLayout::new(d).unwrap();
    let dist = grid.distance_matrix();
    for d_max in [Some(2.5), None] {
        let ours = topo_stat(&mat, &dist, d_max).unwrap();
        let mut neg_r = Vec::new();
        let mut ds = Vec::new();
        for i in 0..d {
            for j in (i + 1)..d {
                let dij = dist[i * d + j];
                if let Some(dm) = d_max {
                    if dij >= dm {
                        continue;
                    }
                }
                let ci: Vec<f64> = (0..n).map(|r| data[r * d + i]).collect();
                let cj: Vec<f64> = (0..n).map(|r| data[r * d + j]).collect();
                neg_r.push(-oracle_pearson(&ci, &cj));
                ds.push(dij);
            }
        }
        let oracle = oracle_pearson(&oracle_ranks(&neg_r), &oracle_ranks(&ds));
        if (ours.t_g - oracle).abs() >= 1e-8 || ours.n_pairs != neg_r.len() {
            failures.push(format!(
                "topo_stat d_max={d_max:?}: {} vs {oracle} ({} vs {} pairs)",
                ours.t_g,
                ours.n_pairs,
                neg_r.len()
            ));
        }
    }

    // welch p-values against scipy.stats.ttest_ind(equal_var=False)
    let cases: [(&[f64], &[f64], f64, f64); 2] = [
        (
            &[
                -0.802, -1.324, -0.248, 0.42, 1.136, 0.11, -0.553, -0.785, 0.749,
            ],
            &[
                3.252, 1.209, -1.05, -0.637, 3.2, 1.104, -1.798, 0.674, -0.945, -0.144, 0.068,
                -0.27, 1.63, 0.705,
            ],
            -1.3315857131785893,
            0.19756517749571975,
        ),
        (
            &[1.2, 1.9, 0.7, 1.5, 1.1],
            &[0.8, 0.9, 1.0, 0.6],
            2.083483889952708,
            0.08807363056293632,
        ),
    ];
    for (a, b, t_ref, p_ref) in cases {
        let r = welch_t(a, b).unwrap();
        if (r.t - t_ref).abs() >= 1e-8 || (r.p - p_ref).abs() >= 1e-6 {
            failures.push(format!("welch t={} p={} vs t={t_ref} p={p_ref}", r.t, r.p));
        }
    }

    // ridge LOO shortcut against per-row refits
    let (n, p) = (25, 6);
    let xd: Vec<f64> = (0..n * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let yd: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let lambdas = [0.05, 1.0, 20.0];
    let ours = ridge_loo_press(&xd, &yd, n, p, &lambdas).unwrap();
    for (li, &lam) in lambdas.iter().enumerate() {
        let mut press = 0.0;
        for i in 0..n {
            let rows: Vec<usize> = (0..n).filter(|&r| r != i).collect();
            let mut xs = DMatrix::zeros(n - 1, p);
            let mut ys = DMatrix::zeros(n - 1, 1);
            for (ri, &r) in rows.iter().enumerate() {
                for c in 0..p {
                    xs[(ri, c)] = xd[r * p + c];
                }
                ys[(ri, 0)] = yd[r];
            }
            let xtx = xs.transpose() * &xs + DMatrix::identity(p, p) * lam;
            let beta = xtx.lu().solve(&(xs.transpose() * ys)).unwrap();
            let pred: f64 = (0..p).map(|c| xd[i * p + c] * beta[(c, 0)]).sum();
            press += (yd[i] - pred).powi(2) / n as f64;
        }
        if (ours[li] - press).abs() >= 1e-8 {
            failures.push(format!("ridge loo lambda={lam}: {} vs {press}", ours[li]));
        }
    }

    criterion(
        "statistics-oracles",
        failures.is_empty(),
        &if failures.is_empty() {
            "spearman, topo stat, welch p, ridge loo all within tolerance".to_string()
        } else {
            failures.join("; ")
        },
    );
}

// ---------------------------------------------------------------------------
// selectivity calibration

#[test]
fn selectivity_calibration() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (n, d) = (40, 16);
    let planted: BTreeSet<usize> = [0, 3, 7, 12].into_iter().collect();
    let noise = |rng: &mut ChaCha8Rng| rng.gen_range(-1.0..1.0);
    let mut a_data = vec![0.0; n * d];
    let mut b_data = vec![0.0; n * d];
    for i in 0..n {
        for j in 0..d {
            let shift = if planted.contains(&j) { 2.0 } else { 0.0 };
            a_data[i * d + j] = noise(&mut rng) + shift;
            b_data[i * d + j] = noise(&mut rng);
        }
    }
    let a = ActivationMatrix::new(n, d, a_data, "a").unwrap();
    let b = ActivationMatrix::new(n, d, b_data, "b").unwrap();

    let map = selectivity(&a, &b).unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for j in 0..d {
        // s crosses 2 exactly when p crosses 0.01
        if (map.s[j].abs() >= 2.0) != (map.p[j] <= 0.01) {
            ok = false;
            detail = format!("unit {j}: s={} p={}", map.s[j], map.p[j]);
        }
        let expect_sig = planted.contains(&j);
        if (map.p[j] <= 0.01) != expect_sig || (expect_sig && map.s[j] <= 0.0) {
            ok = false;
            detail = format!("unit {j}: planted={expect_sig} s={} p={}", map.s[j], map.p[j]);
        }
    }

    let self_map = selectivity(&a, &a).unwrap();
    if self_map.s.iter().any(|&s| s != 0.0) {
        ok = false;
        detail = "nonzero s under identical conditions".into();
    }
    let swapped = selectivity(&b, &a).unwrap();
    for j in 0..d {
        if swapped.s[j] != -map.s[j] {
            ok = false;
            detail = format!("antisymmetry broken at unit {j}");
        }
    }
    criterion(
        "selectivity-calibration",
        ok,
        &if ok {
            format!("{} planted units recovered, A=A flat, swap antisymmetric", planted.len())
        } else {
            detail
        },
    );
}

// ---------------------------------------------------------------------------
// cross-decomposition alignment

#[test]
fn pls_svd_alignment_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 500;
    let dx = 12;
    let x: Vec<f64> = (0..n * dx).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let mat = |n: usize, d: usize, data: &[f64]| {
        ActivationMatrix::new(n, d, data.to_vec(), "align").unwrap()
    };

    let self_aligned = pls_svd_align(&mat(n, dx, &x), &mat(n, dx, &x), 3, 0).unwrap();
    let self_ok = self_aligned.test_correlations.iter().all(|&r| r >= 0.99);

    // orthogonal rotation of the same data
    let raw: Vec<f64> = (0..dx * dx).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let q = DMatrix::from_row_slice(dx, dx, &raw).qr().q();
    let xm = DMatrix::from_row_slice(n, dx, &x);
    let ym = &xm * &q;
    let y: Vec<f64> = ym.row_iter().flat_map(|r| r.iter().cloned().collect::<Vec<_>>()).collect();
    let rotated = pls_svd_align(&mat(n, dx, &x), &mat(n, dx, &y), 3, 0).unwrap();
    let rot_ok = rotated.test_correlations.iter().all(|&r| r > 0.9);

    // independent noise
    let x2: Vec<f64> = (0..n * 10).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y2: Vec<f64> = (0..n * 8).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let indep = pls_svd_align(&mat(n, 10, &x2), &mat(n, 8, &y2), 3, 0).unwrap();
    let indep_ok = indep.test_correlations.iter().all(|&r| r.abs() < 0.2);

    criterion(
        "pls-svd-alignment",
        self_ok && rot_ok && indep_ok,
        &format!(
            "self {:?}; rotated {:?}; independent {:?}",
            self_aligned.test_correlations, rotated.test_correlations, indep.test_correlations
        ),
    );
}

// ---------------------------------------------------------------------------
// CLI determinism

#[test]
fn cli_pipeline_determinism() {
    use std::process::Command;
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let (train_set, test_set) = synth::separable_corpus(160, 6, 9);
    let train_tsv = root.join("train.tsv");
    let test_tsv = root.join("test.tsv");
    std::fs::write(&train_tsv, train_set.to_tsv_string()).unwrap();
    std::fs::write(&test_tsv, test_set.to_tsv_string()).unwrap();
    let config = root.join("config.json");
    std::fs::write(
        &config,
        format!(
            r#"{{"mode": "sq", "d": 36, "epochs": 3, "batch_size": 32, "seed": 5,
                "max_len": 32, "train_corpus": {:?}, "test_corpus": {:?}}}"#,
            train_tsv.to_str().unwrap(),
            test_tsv.to_str().unwrap()
        ),
    )
    .unwrap();

    let pipeline = |tag: &str| -> Vec<(String, String)> {
        let out_dir = root.join(tag);
        let run = |args: &[&str]| {
            let out = Command::new(env!("CARGO_BIN_EXE_topoformer"))
                .args(args)
                .output()
                .unwrap();
            assert!(
                out.status.success(),
                "stderr: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        };
        let od = out_dir.to_str().unwrap();
        run(&["train", "--config", config.to_str().unwrap(), "--out-dir", od]);
        let ckpt = out_dir.join("model.ckpt");
        run(&[
            "capture",
            "--checkpoint",
            ckpt.to_str().unwrap(),
            "--corpus",
            test_tsv.to_str().unwrap(),
            "--out-dir",
            od,
        ]);
        let keys = out_dir.join("keys.json");
        run(&[
            "analyze", "topo", "--dump", keys.to_str().unwrap(), "--n-perm", "25", "--seed",
            "3", "--out-dir", od,
        ]);
        run(&[
            "analyze", "pca", "--dump", keys.to_str().unwrap(), "--out-dir", od,
        ]);
        let mut digests = Vec::new();
        for entry in std::fs::read_dir(&out_dir).unwrap() {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            if name.ends_with(".manifest.json") {
                continue; // manifests record wall time
            }
            digests.push((name, topoformer::io::digest_file(&path).unwrap()));
        }
        digests.sort();
        digests
    };

    let a = pipeline("a");
    let b = pipeline("b");
    criterion(
        "cli-determinism",
        !a.is_empty() && a == b,
        &format!("{} artifacts digest-identical across reruns", a.len()),
    );
}

// ---------------------------------------------------------------------------
// full-size replication (opt-in, multi-hour)

#[test]
#[ignore]
fn imdb_replication() {
    let train_path = std::env::var("TOPOFORMER_IMDB_TRAIN")
        .expect("set TOPOFORMER_IMDB_TRAIN to a label<TAB>text TSV");
    let test_path = std::env::var("TOPOFORMER_IMDB_TEST")
        .expect("set TOPOFORMER_IMDB_TEST to a label<TAB>text TSV");
    let train_set =
        LabeledCorpus::from_tsv_path(std::path::Path::new(&train_path), "train").unwrap();
    let test_set =
        LabeledCorpus::from_tsv_path(std::path::Path::new(&test_path), "test").unwrap();

    let full = |mode: AttentionMode, r_sq: f64, r_sr: f64| -> f64 {
        let cfg = TrainConfig {
            mode,
            d: 400,
            r_sq,
            r_sr,
            epochs: 20,
            batch_size: None,
            lr: 0.001,
            seed: 1,
            scale: 10.0,
            positional: true,
            min_freq: 2,
            max_len: 256,
            train_corpus: None,
            test_corpus: None,
        };
        let out = train_with_data(&cfg, &train_set, &test_set).unwrap();
        out.final_accuracy()
    };

    let standard = full(AttentionMode::Standard, 0.3, 0.1);
    let sq = full(AttentionMode::Sq, 0.3, 0.1);
    let sqr = full(AttentionMode::Sqr, 0.3, 0.1);
    let ok = (standard - 0.83).abs() <= 0.03
        && (sq - 0.81).abs() <= 0.03
        && (sqr - 0.75).abs() <= 0.03
        && (standard - sq).abs() <= 0.05;
    criterion(
        "imdb-replication",
        ok,
        &format!("standard {standard:.3}, sq {sq:.3}, sqr {sqr:.3}"),
    );
}
