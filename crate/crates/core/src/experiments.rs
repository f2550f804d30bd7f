// SPDX-License-Identifier: Apache-2.0

//! Preset experiments, evaluation with on-the-fly test corruption, and sweeps.
//!
//! Seed derivations (all from one master seed):
//! - training data: `derive_named(seed, "train-data")`
//! - validation data: `derive_named(seed, "val-data")`
//! - test data: `derive_named(seed, "test-data")`
//! - weight init: `derive_named(seed, "init")`
//! - shuffling and augmentation: `derive_named(seed, "training")`
//! - evaluation noise: `derive_named(seed, "eval-noise")`
//!
//! Data seeds do not depend on the preset name, so presets that share a data
//! configuration (e.g. a clean and a noise-augmented model) see the same
//! samples.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{generate_dataset, load_dataset, spec_from_target, Dataset, DatasetMeta, Dephasing};
use crate::error::{Error, Result};
use crate::neuralnet::{
    cosine_similarity, load_checkpoint, mse_loss, predict_all, save_checkpoint, train, AdamConfig,
    AdamState, Checkpoint, EpochMetrics, Network, NetworkArch, TrainConfig,
};
use crate::qsim::Family;
use crate::record::{add_noise_in_place, flatten_record, record_trajectory, NoiseSpec, SamplingGrid};
use crate::seeds::{derive_named, derive_seed};

/// Default sampling interval, in units of `pi / J0`.
pub const TAU: f64 = 0.02 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    /// Scaled-down configurations that finish in minutes on one core.
    Desk,
    /// Full-size configurations; hours to days.
    Paper,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Desk => "desk",
            Tier::Paper => "paper",
        })
    }
}

impl FromStr for Tier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Tier::Desk),
            "paper" => Ok(Tier::Paper),
            _ => Err(Error::Config(format!("unknown tier `{s}` (expected desk or paper)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn label(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "val",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPreset {
    pub name: String,
    pub tier: Tier,
    pub description: String,
    /// Data configuration; `n_samples` and `master_seed` are filled per split.
    pub data: DatasetMeta,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub hidden: usize,
    pub train: TrainConfig,
}

impl ExperimentPreset {
    /// Dataset description of one split under master `seed`.
    ///
    /// Test data is always clean; corruption is applied at evaluation time.
    pub fn split_meta(&self, split: Split, seed: u64) -> DatasetMeta {
        let mut meta = self.data.clone();
        let (n, stream) = match split {
            Split::Train => (self.n_train, "train-data"),
            Split::Validation => (self.n_val, "val-data"),
            Split::Test => (self.n_test, "test-data"),
        };
        meta.n_samples = n;
        meta.master_seed = derive_named(seed, stream);
        if split == Split::Test {
            meta.noise = Default::default();
        }
        meta
    }

    pub fn arch(&self) -> NetworkArch {
        NetworkArch::for_dataset(&self.data, self.hidden)
    }

    pub fn validate(&self) -> Result<()> {
        self.data.validate()?;
        self.arch().validate()?;
        self.train.validate()?;
        if self.n_train == 0 || self.n_val == 0 || self.n_test == 0 {
            return Err(Error::Config(format!("{}: every split needs samples", self.name)));
        }
        Ok(())
    }

    /// Training configuration with derived seed and worker count filled in.
    pub fn effective_train(&self, seed: u64, jobs: usize) -> TrainConfig {
        TrainConfig {
            seed: derive_named(seed, "training"),
            jobs,
            ..self.train.clone()
        }
    }
}

/// Everything needed to reproduce one preset run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveConfig {
    pub seed: u64,
    pub preset: ExperimentPreset,
}

impl EffectiveConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Short hash of the echoed configuration.
    pub fn digest(&self) -> Result<String> {
        Ok(format!("{:016x}", derive_named(0, &self.to_toml()?)))
    }
}

fn desk_train(epochs: usize, learning_rate: f64) -> TrainConfig {
    TrainConfig {
        batch_size: 64,
        epochs,
        learning_rate,
        lr_decay: 0.85,
        grad_clip: Some(1.0),
        patience: None,
        ..TrainConfig::default()
    }
}

fn paper_train() -> TrainConfig {
    TrainConfig {
        batch_size: 256,
        epochs: 200,
        learning_rate: 1e-3,
        lr_decay: 0.98,
        grad_clip: Some(1.0),
        patience: Some(20),
        ..TrainConfig::default()
    }
}

#[allow(clippy::too_many_arguments)]
fn preset(
    name: &str,
    tier: Tier,
    description: &str,
    family: Family,
    n_qubits: usize,
    n_points: usize,
    sizes: (usize, usize, usize),
    hidden: usize,
    train: TrainConfig,
) -> ExperimentPreset {
    let grid = SamplingGrid { tau: TAU, n_points };
    ExperimentPreset {
        name: name.to_string(),
        tier,
        description: description.to_string(),
        data: DatasetMeta::new(family, n_qubits, grid, 0, 0),
        n_train: sizes.0,
        n_val: sizes.1,
        n_test: sizes.2,
        hidden,
        train,
    }
}

fn with_noise(mut p: ExperimentPreset, name: &str, sigma: f64) -> ExperimentPreset {
    p.name = name.to_string();
    p.description = format!("{} (trained with eps = {sigma} input noise)", p.description);
    p.train.noise_sigma = sigma;
    p
}

fn with_dephasing(mut p: ExperimentPreset, name: &str, low: f64, high: f64) -> ExperimentPreset {
    p.name = name.to_string();
    p.description = format!("{} (trained on records dephased with T2 ~ U[{low:.4}, {high:.4}])", p.description);
    p.data.noise.dephasing = Dephasing::Uniform { low, high };
    p
}

fn with_points(mut p: ExperimentPreset, name: &str, n_points: usize) -> ExperimentPreset {
    p.name = name.to_string();
    p.description = p.description.replace(&format!("S={}", p.data.n_points), &format!("S={n_points}"));
    p.data.n_points = n_points;
    p
}

/// All presets of one tier.
pub fn presets(tier: Tier) -> Vec<ExperimentPreset> {
    use Family::*;
    match tier {
        Tier::Desk => {
            let ising1 = preset(
                "ising1_2q",
                tier,
                "XY chain with z fields, N=2, S=25",
                XyChainZfield,
                2,
                25,
                (20_000, 1_000, 1_000),
                32,
                desk_train(10, 3e-3),
            );
            let ising1_s50 = with_points(ising1.clone(), "ising1_2q_s50", 50);
            let mut timedep = preset(
                "timedep_3q",
                tier,
                "time-dependent z field (W=3 Fourier terms), N=1, S=100",
                XyChainTdZfield,
                1,
                100,
                (20_000, 1_000, 1_000),
                32,
                desk_train(5, 1e-3),
            );
            timedep.data.fourier_terms = 3;
            let decoherence = preset(
                "decoherence_2q_clean",
                tier,
                "XY chain with z fields, N=2, S=150",
                XyChainZfield,
                2,
                150,
                (10_000, 500, 1_000),
                32,
                desk_train(8, 3e-3),
            );
            vec![
                with_noise(ising1.clone(), "ising1_2q_noisy", 0.1),
                with_noise(ising1_s50.clone(), "ising1_2q_s50_noisy", 0.1),
                ising1,
                ising1_s50,
                preset(
                    "ising2_3q",
                    tier,
                    "XYZ chain with z fields, N=3, S=75",
                    XyzChain,
                    3,
                    75,
                    (20_000, 1_000, 1_000),
                    48,
                    desk_train(10, 2e-3),
                ),
                timedep,
                with_dephasing(decoherence.clone(), "decoherence_2q", PI, 6.0 * PI),
                decoherence,
            ]
        }
        Tier::Paper => {
            let ising1 = preset(
                "ising1_7q",
                tier,
                "XY chain with z fields, N=7, S=25",
                XyChainZfield,
                7,
                25,
                (100_000, 5_000, 5_000),
                256,
                paper_train(),
            );
            let ising1_s50 = with_points(ising1.clone(), "ising1_7q_s50", 50);
            let decoherence = preset(
                "decoherence_7q_clean",
                tier,
                "XY chain with z fields, N=7, S=150",
                XyChainZfield,
                7,
                150,
                (100_000, 5_000, 5_000),
                256,
                paper_train(),
            );
            vec![
                with_noise(ising1.clone(), "ising1_7q_noisy", 0.1),
                with_noise(ising1_s50.clone(), "ising1_7q_s50_noisy", 0.1),
                ising1,
                ising1_s50,
                preset(
                    "ising2_6q",
                    tier,
                    "XYZ chain with z fields, N=6, S=75",
                    XyzChain,
                    6,
                    75,
                    (200_000, 5_000, 5_000),
                    256,
                    paper_train(),
                ),
                preset(
                    "timedep_3q",
                    tier,
                    "time-dependent z fields (W=10 Fourier terms), N=3, S=300",
                    XyChainTdZfield,
                    3,
                    300,
                    (100_000, 5_000, 5_000),
                    256,
                    paper_train(),
                ),
                with_dephasing(decoherence.clone(), "decoherence_7q", PI, 6.0 * PI),
                decoherence,
            ]
        }
    }
}

pub fn preset_names(tier: Tier) -> Vec<String> {
    let mut names: Vec<String> = presets(tier).into_iter().map(|p| p.name).collect();
    names.sort();
    names
}

pub fn find_preset(name: &str, tier: Tier) -> Result<ExperimentPreset> {
    presets(tier)
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownPreset {
            name: name.to_string(),
            valid: format!("{} ({tier} tier)", preset_names(tier).join(", ")),
        })
}

/// Test-time corruption of a clean dataset.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Corruption {
    /// Standard deviation of additive Gaussian noise.
    pub gauss_eps: f64,
    /// Coherence time applied to every qubit; records are re-simulated.
    pub t2: Option<f64>,
    pub seed: u64,
}

impl Corruption {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_identity(&self) -> bool {
        self.gauss_eps == 0.0 && self.t2.is_none()
    }
}

/// Inputs of `data` after applying `c`, sample by sample.
pub fn corrupt_inputs(data: &Dataset, c: &Corruption, jobs: usize) -> Result<Vec<Vec<f64>>> {
    if !(c.gauss_eps >= 0.0 && c.gauss_eps.is_finite()) {
        return Err(Error::Validation(format!("gauss_eps must be >= 0, got {}", c.gauss_eps)));
    }
    if matches!(c.t2, Some(t) if !(t > 0.0)) {
        return Err(Error::Validation("t2 must be > 0".into()));
    }
    if c.is_identity() {
        return Ok(data.samples.iter().map(|s| s.input.clone()).collect());
    }
    let grid = data.meta.grid();
    let one = |i: usize| -> Result<Vec<f64>> {
        let sample = &data.samples[i];
        let mut input = match c.t2 {
            Some(t2) => {
                let spec = spec_from_target(&data.meta, &sample.target)?;
                let noise = NoiseSpec {
                    gaussian_sigma: 0.0,
                    t2: Some(vec![t2; data.meta.n_qubits]),
                    rng_seed: 0,
                };
                flatten_record(&record_trajectory(&spec, &grid, &noise)?)
            }
            None => sample.input.clone(),
        };
        add_noise_in_place(&mut input, c.gauss_eps, derive_seed(c.seed, i as u64));
        Ok(input)
    };
    let pool = crate::neuralnet::thread_pool(jobs)?;
    pool.install(|| (0..data.samples.len()).into_par_iter().map(one).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Mean cosine similarity over samples where it is defined.
    pub mean_similarity: f64,
    /// Per-sample similarity; `None` where a norm vanished.
    pub similarities: Vec<Option<f64>>,
    pub mse: f64,
    pub per_sample_mse: Vec<f64>,
    pub excluded: usize,
    pub runtime_secs: f64,
    pub config_digest: String,
}

impl EvalReport {
    pub fn n_samples(&self) -> usize {
        self.similarities.len()
    }

    /// Report metrics that must reproduce bit-exactly (runtime excluded).
    pub fn metric_bits(&self) -> Vec<u64> {
        let mut bits = vec![self.mean_similarity.to_bits(), self.mse.to_bits(), self.excluded as u64];
        bits.extend(self.similarities.iter().map(|s| s.map_or(u64::MAX, f64::to_bits)));
        bits.extend(self.per_sample_mse.iter().map(|m| m.to_bits()));
        bits
    }

    /// Summary row; the per-sample values go to a separate file.
    pub fn write_csv(&self, path: &Path, samples_path: &Path) -> Result<()> {
        let mut w = fs::File::create(path)?;
        writeln!(w, "mean_similarity,mse,n_samples,excluded,runtime_secs,config_digest,per_sample_file")?;
        writeln!(
            w,
            "{:.16e},{:.16e},{},{},{:.3},{},{}",
            self.mean_similarity,
            self.mse,
            self.n_samples(),
            self.excluded,
            self.runtime_secs,
            self.config_digest,
            samples_path.display()
        )?;
        let mut w = fs::File::create(samples_path)?;
        writeln!(w, "index,similarity,mse")?;
        for (i, (s, m)) in self.similarities.iter().zip(&self.per_sample_mse).enumerate() {
            match s {
                Some(s) => writeln!(w, "{i},{s:.16e},{m:.16e}")?,
                None => writeln!(w, "{i},,{m:.16e}")?,
            }
        }
        Ok(())
    }
}

/// Scores `net` on `data` after corrupting its inputs with `corruption`.
pub fn evaluate(
    net: &Network,
    data: &Dataset,
    corruption: &Corruption,
    digest: &str,
    jobs: usize,
) -> Result<EvalReport> {
    let start = Instant::now();
    net.arch.check_dataset(&data.meta)?;
    if data.samples.is_empty() {
        return Err(Error::Validation("cannot evaluate on an empty dataset".into()));
    }
    let inputs = corrupt_inputs(data, corruption, jobs)?;
    let x: Vec<&[f64]> = inputs.iter().map(Vec::as_slice).collect();
    let preds = predict_all(net, &x)?;
    let mut similarities = Vec::with_capacity(preds.len());
    let mut per_sample_mse = Vec::with_capacity(preds.len());
    for (p, s) in preds.iter().zip(&data.samples) {
        per_sample_mse.push(mse_loss(p, &s.target)?);
        similarities.push(match cosine_similarity(p, &s.target) {
            Ok(c) => Some(c),
            Err(Error::UndefinedSimilarity { .. }) => None,
            Err(e) => return Err(e),
        });
    }
    let defined: Vec<f64> = similarities.iter().flatten().copied().collect();
    let mean_similarity = if defined.is_empty() {
        f64::NAN
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    Ok(EvalReport {
        mean_similarity,
        excluded: similarities.len() - defined.len(),
        mse: per_sample_mse.iter().sum::<f64>() / per_sample_mse.len() as f64,
        similarities,
        per_sample_mse,
        runtime_secs: start.elapsed().as_secs_f64(),
        config_digest: digest.to_string(),
    })
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub jobs: usize,
    /// Artifacts go to `<out_dir>/<preset name>/`; nothing is written when `None`.
    pub out_dir: Option<PathBuf>,
}

impl RunOptions {
    pub fn in_memory(jobs: usize) -> Self {
        Self { jobs, out_dir: None }
    }
}

#[derive(Debug, Clone)]
pub struct PresetRun {
    pub config: EffectiveConfig,
    pub network: Network,
    pub metrics: Vec<EpochMetrics>,
    pub test: Dataset,
    pub report: EvalReport,
    /// Whether the model came from a cached checkpoint.
    pub reused: bool,
}

impl PresetRun {
    pub fn digest(&self) -> String {
        self.report.config_digest.clone()
    }

    pub fn evaluate(&self, corruption: &Corruption, jobs: usize) -> Result<EvalReport> {
        evaluate(&self.network, &self.test, corruption, &self.report.config_digest, jobs)
    }
}

pub fn write_metrics_csv(path: &Path, metrics: &[EpochMetrics]) -> Result<()> {
    let mut w = fs::File::create(path)?;
    writeln!(w, "epoch,train_loss,val_loss,val_F")?;
    for m in metrics {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e}",
            m.epoch, m.train_loss, m.val_loss, m.val_similarity
        )?;
    }
    Ok(())
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<EpochMetrics>> {
    let text = fs::read_to_string(path)?;
    let bad = |line: &str| Error::corrupt(path, format!("bad metrics line `{line}`"));
    text.lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad(line));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
            Ok(EpochMetrics {
                epoch: f[0].parse().map_err(|_| bad(line))?,
                train_loss: num(f[1])?,
                val_loss: num(f[2])?,
                val_similarity: num(f[3])?,
            })
        })
        .collect()
}

/// Loads `path` if it holds exactly `meta`, otherwise generates and saves it.
fn cached_dataset(meta: &DatasetMeta, path: Option<&Path>, jobs: usize) -> Result<Dataset> {
    if let Some(p) = path {
        if p.exists() {
            match load_dataset(p) {
                Ok(ds) if ds.meta == *meta => {
                    info!("reusing {}", p.display());
                    return Ok(ds);
                }
                Ok(_) => info!("{} has a different configuration; regenerating", p.display()),
                Err(e) => info!("cannot reuse {}: {e}; regenerating", p.display()),
            }
        }
    }
    let ds = generate_dataset(meta, jobs)?;
    if let Some(p) = path {
        ds.save(p)?;
    }
    Ok(ds)
}

/// Generates (or reuses) the data, trains, and evaluates on the clean test split.
pub fn run_preset(preset: &ExperimentPreset, seed: u64, opts: &RunOptions) -> Result<PresetRun> {
    preset.validate()?;
    let jobs = opts.jobs.max(1);
    let config = EffectiveConfig {
        seed,
        preset: preset.clone(),
    };
    let digest = config.digest()?;
    let dir = opts.out_dir.as_ref().map(|d| d.join(&preset.name));
    if let Some(d) = &dir {
        fs::create_dir_all(d)?;
    }
    let file = |name: &str| dir.as_ref().map(|d| d.join(name));
    let data_file = |split: Split| file(&format!("{}.dat", split.label()));

    let test = cached_dataset(&preset.split_meta(Split::Test, seed), data_file(Split::Test).as_deref(), jobs)?;

    let echo = config.to_toml()?;
    let ckpt_path = file("model.ckpt");
    let metrics_path = file("metrics.csv");
    let cached = match (&dir, &ckpt_path, &metrics_path) {
        (Some(d), Some(c), Some(m)) if c.exists() && m.exists() => {
            fs::read_to_string(d.join("config.toml")).ok().as_deref() == Some(echo.as_str())
        }
        _ => false,
    };
    let (network, metrics) = if cached {
        let ckpt = load_checkpoint(ckpt_path.as_deref().expect("cached implies a directory"))?;
        let metrics = read_metrics_csv(metrics_path.as_deref().expect("cached implies a directory"))?;
        info!("{}: reusing trained checkpoint", preset.name);
        (ckpt.network, metrics)
    } else {
        let train_set = cached_dataset(
            &preset.split_meta(Split::Train, seed),
            data_file(Split::Train).as_deref(),
            jobs,
        )?;
        let val_set = cached_dataset(
            &preset.split_meta(Split::Validation, seed),
            data_file(Split::Validation).as_deref(),
            jobs,
        )?;
        let arch = preset.arch();
        let mut net = Network::new(arch, derive_named(seed, "init"))?;
        let cfg = preset.effective_train(seed, jobs);
        let mut adam = AdamState::new(
            &arch,
            AdamConfig {
                learning_rate: cfg.learning_rate,
                ..AdamConfig::default()
            },
        );
        info!("{}: training on {} samples", preset.name, train_set.samples.len());
        let outcome = train(&mut net, &mut adam, &train_set.samples, &val_set.samples, &cfg, 0, |_| {})?;
        if let (Some(c), Some(m)) = (&ckpt_path, &metrics_path) {
            save_checkpoint(
                c,
                &Checkpoint {
                    network: net.clone(),
                    adam: Some(adam),
                    seed: cfg.seed,
                    epoch: outcome.last_epoch,
                },
            )?;
            write_metrics_csv(m, &outcome.metrics)?;
            fs::write(dir.as_ref().expect("paths imply a directory").join("config.toml"), &echo)?;
        }
        (net, outcome.metrics)
    };

    let report = evaluate(&network, &test, &Corruption::none(), &digest, jobs)?;
    if let (Some(r), Some(s)) = (file("report.csv"), file("samples.csv")) {
        report.write_csv(&r, &s)?;
    }
    info!("{}: mean F = {:.5}", preset.name, report.mean_similarity);
    Ok(PresetRun {
        config,
        network,
        metrics,
        test,
        report,
        reused: cached,
    })
}

/// One row of the noise-robustness table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseRow {
    pub model: String,
    pub n_points: usize,
    pub train_eps: f64,
    pub test_eps: f64,
    pub mean_similarity: f64,
}

pub const NOISE_EPS_GRID: [f64; 5] = [0.02, 0.04, 0.06, 0.08, 0.10];

/// Names of the four models compared under measurement noise.
pub fn noise_models(tier: Tier) -> [&'static str; 4] {
    match tier {
        Tier::Desk => ["ising1_2q", "ising1_2q_noisy", "ising1_2q_s50", "ising1_2q_s50_noisy"],
        Tier::Paper => ["ising1_7q", "ising1_7q_noisy", "ising1_7q_s50", "ising1_7q_s50_noisy"],
    }
}

/// Noisy test samples per noise level.
pub fn noise_test_samples(tier: Tier) -> usize {
    match tier {
        Tier::Desk => 500,
        Tier::Paper => 5_000,
    }
}

fn head(data: &Dataset, n: usize) -> Dataset {
    let n = n.min(data.samples.len());
    let mut meta = data.meta.clone();
    meta.n_samples = n;
    Dataset {
        meta,
        samples: data.samples[..n].to_vec(),
    }
}

/// Mean F of the four noise models against test noise levels `eps_grid`.
pub fn run_noise_robustness(tier: Tier, seed: u64, eps_grid: &[f64], opts: &RunOptions) -> Result<Vec<NoiseRow>> {
    let mut rows = Vec::new();
    for name in noise_models(tier) {
        let run = run_preset(&find_preset(name, tier)?, seed, opts)?;
        let test = head(&run.test, noise_test_samples(tier));
        for &eps in eps_grid {
            let c = Corruption {
                gauss_eps: eps,
                t2: None,
                seed: derive_named(seed, "eval-noise"),
            };
            let report = evaluate(&run.network, &test, &c, &run.digest(), opts.jobs)?;
            rows.push(NoiseRow {
                model: name.to_string(),
                n_points: run.config.preset.data.n_points,
                train_eps: run.config.preset.train.noise_sigma,
                test_eps: eps,
                mean_similarity: report.mean_similarity,
            });
        }
    }
    Ok(rows)
}

pub fn noise_csv(rows: &[NoiseRow]) -> String {
    let mut s = String::from("model,n_points,train_eps,test_eps,mean_F\n");
    for r in rows {
        s += &format!("{},{},{},{},{:.16e}\n", r.model, r.n_points, r.train_eps, r.test_eps, r.mean_similarity);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoherenceRow {
    /// `None` is the clean test set.
    pub t2: Option<f64>,
    pub clean_model: f64,
    pub decoherence_model: f64,
}

pub fn decoherence_models(tier: Tier) -> [&'static str; 2] {
    match tier {
        Tier::Desk => ["decoherence_2q_clean", "decoherence_2q"],
        Tier::Paper => ["decoherence_7q_clean", "decoherence_7q"],
    }
}

/// `T2 = pi, 2 pi, ..., 6 pi`.
pub fn default_t2_grid() -> Vec<f64> {
    (1..=6).map(|k| k as f64 * PI).collect()
}

/// Mean F of the clean-trained and decoherence-trained models on dephased test data.
///
/// The first row is the clean test set.
pub fn run_decoherence_robustness(
    tier: Tier,
    seed: u64,
    t2_grid: &[f64],
    opts: &RunOptions,
) -> Result<Vec<DecoherenceRow>> {
    let [clean_name, deco_name] = decoherence_models(tier);
    let clean = run_preset(&find_preset(clean_name, tier)?, seed, opts)?;
    let deco = run_preset(&find_preset(deco_name, tier)?, seed, opts)?;
    let mut rows = vec![DecoherenceRow {
        t2: None,
        clean_model: clean.report.mean_similarity,
        decoherence_model: deco.report.mean_similarity,
    }];
    for &t2 in t2_grid {
        let c = Corruption {
            gauss_eps: 0.0,
            t2: Some(t2),
            seed: 0,
        };
        rows.push(DecoherenceRow {
            t2: Some(t2),
            clean_model: clean.evaluate(&c, opts.jobs)?.mean_similarity,
            decoherence_model: deco.evaluate(&c, opts.jobs)?.mean_similarity,
        });
    }
    Ok(rows)
}

pub fn decoherence_csv(rows: &[DecoherenceRow]) -> String {
    let mut s = String::from("t2,clean_model_F,decoherence_model_F\n");
    for r in rows {
        let t2 = r.t2.map_or_else(|| "inf".to_string(), |t| format!("{t:.16e}"));
        s += &format!("{t2},{:.16e},{:.16e}\n", r.clean_model, r.decoherence_model);
    }
    s
}

/// Three-qubit XY chain used by the sampling-interval and scaling sweeps.
fn sweep_base(tier: Tier, n_qubits: usize, n_points: usize, tau: f64) -> ExperimentPreset {
    let (sizes, hidden, train) = match tier {
        Tier::Desk => ((5_000, 500, 500), 32, desk_train(8, 3e-3)),
        Tier::Paper => ((100_000, 5_000, 5_000), 256, paper_train()),
    };
    let mut p = preset(
        &format!("sweep_{n_qubits}q_s{n_points}_tau{:.4}pi", tau / PI),
        tier,
        &format!("XY chain with z fields, N={n_qubits}, S={n_points}, tau={:.4} pi", tau / PI),
        Family::XyChainZfield,
        n_qubits,
        n_points,
        sizes,
        hidden,
        train,
    );
    p.data.tau = tau;
    p
}

/// Sampling intervals swept, in the same units as the grid.
pub fn default_interval_grid(tier: Tier) -> Vec<f64> {
    let ks: Vec<f64> = match tier {
        Tier::Desk => vec![0.01, 0.02, 0.05, 0.09],
        Tier::Paper => (1..=9).map(|k| k as f64 * 0.01).collect(),
    };
    ks.into_iter().map(|k| k * PI).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalRow {
    pub tau: f64,
    pub mean_similarity: f64,
}

/// One model per sampling interval on the three-qubit chain, S = 25.
pub fn run_interval_sweep(tier: Tier, seed: u64, taus: &[f64], opts: &RunOptions) -> Result<Vec<IntervalRow>> {
    let mut taus = taus.to_vec();
    taus.sort_by(f64::total_cmp);
    taus.iter()
        .map(|&tau| {
            let run = run_preset(&sweep_base(tier, 3, 25, tau), seed, opts)?;
            Ok(IntervalRow {
                tau,
                mean_similarity: run.report.mean_similarity,
            })
        })
        .collect()
}

pub fn interval_csv(rows: &[IntervalRow]) -> String {
    let mut s = String::from("tau,tau_over_pi,mean_F\n");
    for r in rows {
        s += &format!("{:.16e},{:.4},{:.16e}\n", r.tau, r.tau / PI, r.mean_similarity);
    }
    s
}

/// Accuracy matrix over qubit counts and sample counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingMatrix {
    pub n_grid: Vec<usize>,
    pub s_grid: Vec<usize>,
    /// `values[i][j]` is the mean F at `(n_grid[i], s_grid[j])`.
    pub values: Vec<Vec<f64>>,
    pub threshold: f64,
}

impl ScalingMatrix {
    /// Smallest S reaching the threshold, per N.
    pub fn frontier(&self) -> Vec<(usize, Option<usize>)> {
        self.n_grid
            .iter()
            .zip(&self.values)
            .map(|(&n, row)| (n, self.s_grid.iter().zip(row).find(|(_, &f)| f >= self.threshold).map(|(&s, _)| s)))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n_qubits,n_points,mean_F,reaches_threshold\n");
        for (i, &n) in self.n_grid.iter().enumerate() {
            for (j, &pts) in self.s_grid.iter().enumerate() {
                let f = self.values[i][j];
                s += &format!("{n},{pts},{f:.16e},{}\n", f >= self.threshold);
            }
        }
        s
    }
}

pub fn default_scaling_grid(tier: Tier) -> (Vec<usize>, Vec<usize>) {
    match tier {
        Tier::Desk => (vec![1, 2, 3], vec![5, 10, 25]),
        Tier::Paper => ((2..=7).collect(), vec![5, 10, 25, 50, 75]),
    }
}

/// Largest qubit count a sweep may request without an explicit override.
pub fn scaling_cap(tier: Tier) -> usize {
    match tier {
        Tier::Desk => 4,
        Tier::Paper => crate::qsim::DEFAULT_MAX_QUBITS,
    }
}

pub fn run_scaling_sweep(
    tier: Tier,
    seed: u64,
    n_grid: &[usize],
    s_grid: &[usize],
    max_qubits: usize,
    opts: &RunOptions,
) -> Result<ScalingMatrix> {
    if let Some(&n) = n_grid.iter().find(|&&n| n > max_qubits) {
        return Err(Error::Capacity {
            what: "scaling sweep qubits",
            requested: n,
            max: max_qubits,
        });
    }
    let mut values = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let mut row = Vec::with_capacity(s_grid.len());
        for &s in s_grid {
            row.push(run_preset(&sweep_base(tier, n, s, TAU), seed, opts)?.report.mean_similarity);
        }
        values.push(row);
    }
    Ok(ScalingMatrix {
        n_grid: n_grid.to_vec(),
        s_grid: s_grid.to_vec(),
        values,
        threshold: 0.99,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Sample;
    use crate::neuralnet::HeadArch;

    #[test]
    fn preset_names_are_unique_and_valid() {
        for tier in [Tier::Desk, Tier::Paper] {
            let names = preset_names(tier);
            let mut dedup = names.clone();
            dedup.dedup();
            assert_eq!(names, dedup);
            for p in presets(tier) {
                p.validate().unwrap();
                assert_eq!(p.tier, tier);
            }
        }
        assert!(find_preset("timedep_3q", Tier::Desk).is_ok());
        assert!(find_preset("timedep_3q", Tier::Paper).is_ok());
    }

    #[test]
    fn paper_tier_sizes() {
        let p = find_preset("ising1_7q", Tier::Paper).unwrap();
        assert_eq!((p.data.n_qubits, p.data.n_points, p.n_train, p.n_test), (7, 25, 100_000, 5_000));
        let p = find_preset("ising2_6q", Tier::Paper).unwrap();
        assert_eq!((p.data.n_qubits, p.data.n_points, p.n_train), (6, 75, 200_000));
        let p = find_preset("timedep_3q", Tier::Paper).unwrap();
        assert_eq!((p.data.n_qubits, p.data.n_points, p.data.fourier_terms), (3, 300, 10));
        let p = find_preset("timedep_3q", Tier::Desk).unwrap();
        assert_eq!((p.data.n_qubits, p.data.n_points, p.data.fourier_terms, p.n_train), (1, 100, 3, 20_000));
    }

    #[test]
    fn unknown_preset_lists_names() {
        let err = find_preset("nope", Tier::Desk).unwrap_err().to_string();
        assert!(err.contains("ising1_2q") && err.contains("nope"));
    }

    #[test]
    fn clean_and_noisy_presets_share_data() {
        let a = find_preset("ising1_2q", Tier::Desk).unwrap();
        let b = find_preset("ising1_2q_noisy", Tier::Desk).unwrap();
        for split in [Split::Train, Split::Validation, Split::Test] {
            assert_eq!(a.split_meta(split, 3), b.split_meta(split, 3));
        }
        let d = find_preset("decoherence_2q", Tier::Desk).unwrap();
        assert_eq!(d.split_meta(Split::Test, 3).noise, Default::default());
        assert_ne!(d.split_meta(Split::Train, 3).noise, Default::default());
    }

    fn oracle_network(meta: &DatasetMeta) -> Network {
        // Zero weights and a bias equal to the (shared) target give exact predictions.
        let arch = NetworkArch {
            input_dim: 3 * meta.n_qubits,
            seq_len: meta.n_points,
            hidden: 2,
            head: HeadArch::Static {
                outputs: meta.target_len(),
            },
        };
        Network {
            arch,
            params: crate::neuralnet::Params::zeros(&arch),
        }
    }

    fn constant_target_set(target: Vec<f64>, n: usize) -> Dataset {
        let grid = SamplingGrid { tau: TAU, n_points: 3 };
        let mut meta = DatasetMeta::new(Family::XyChainZfield, 1, grid, n, 0);
        meta.n_samples = n;
        let samples = (0..n)
            .map(|i| Sample {
                input: vec![i as f64 * 0.1; meta.input_len()],
                target: target.clone(),
            })
            .collect();
        Dataset { meta, samples }
    }

    #[test]
    fn perfect_oracle_scores_one() {
        let data = constant_target_set(vec![0.4], 4);
        let mut net = oracle_network(&data.meta);
        for (name, t) in net.params.tensors_mut() {
            if name == "head.bias" {
                t[0] = 0.4;
            }
        }
        let r = evaluate(&net, &data, &Corruption::none(), "x", 1).unwrap();
        assert_eq!(r.mean_similarity, 1.0);
        assert_eq!(r.mse, 0.0);
        assert_eq!(r.excluded, 0);
    }

    #[test]
    fn zero_prediction_is_excluded() {
        let data = constant_target_set(vec![0.4], 3);
        let net = oracle_network(&data.meta);
        let r = evaluate(&net, &data, &Corruption::none(), "x", 1).unwrap();
        assert_eq!(r.excluded, 3);
        assert!(r.mean_similarity.is_nan());
    }

    #[test]
    fn single_sample_mean_is_that_sample() {
        let meta = find_preset("ising1_2q", Tier::Desk).unwrap().split_meta(Split::Test, 1);
        let data = head(&generate_dataset(&DatasetMeta { n_samples: 1, ..meta }, 1).unwrap(), 1);
        let net = Network::new(NetworkArch::for_dataset(&data.meta, 4), 2).unwrap();
        let r = evaluate(&net, &data, &Corruption::none(), "x", 1).unwrap();
        assert_eq!(Some(r.mean_similarity), r.similarities[0]);
    }

    #[test]
    fn corruption_behaviour() {
        let mut meta = find_preset("ising1_2q", Tier::Desk).unwrap().split_meta(Split::Test, 1);
        meta.n_samples = 5;
        meta.n_points = 6;
        let data = generate_dataset(&meta, 1).unwrap();
        let clean: Vec<Vec<f64>> = data.samples.iter().map(|s| s.input.clone()).collect();
        let zero = Corruption { gauss_eps: 0.0, t2: None, seed: 9 };
        assert_eq!(corrupt_inputs(&data, &zero, 1).unwrap(), clean);
        let noisy = Corruption { gauss_eps: 0.05, t2: None, seed: 9 };
        let a = corrupt_inputs(&data, &noisy, 1).unwrap();
        assert_eq!(a, corrupt_inputs(&data, &noisy, 2).unwrap());
        assert_ne!(a, clean);
        let long = Corruption { gauss_eps: 0.0, t2: Some(1e9), seed: 0 };
        for (x, y) in corrupt_inputs(&data, &long, 1).unwrap().iter().zip(&clean) {
            for (u, v) in x.iter().zip(y) {
                assert!((u - v).abs() < 1e-7);
            }
        }
        let short = Corruption { gauss_eps: 0.0, t2: Some(PI), seed: 0 };
        assert_ne!(corrupt_inputs(&data, &short, 1).unwrap(), clean);
    }

    #[test]
    fn scaling_cap_is_enforced() {
        let err = run_scaling_sweep(Tier::Desk, 0, &[5], &[5], 4, &RunOptions::in_memory(1)).unwrap_err();
        assert!(matches!(err, Error::Capacity { requested: 5, max: 4, .. }));
    }

    #[test]
    fn frontier_picks_smallest_s() {
        let m = ScalingMatrix {
            n_grid: vec![1, 2],
            s_grid: vec![5, 10],
            values: vec![vec![0.995, 0.999], vec![0.9, 0.95]],
            threshold: 0.99,
        };
        assert_eq!(m.frontier(), vec![(1, Some(5)), (2, None)]);
        assert_eq!(m.to_csv().lines().count(), 5);
    }

    #[test]
    fn effective_config_round_trips_through_toml() {
        let cfg = EffectiveConfig {
            seed: 5,
            preset: find_preset("decoherence_2q", Tier::Desk).unwrap(),
        };
        let back: EffectiveConfig = toml::from_str(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.digest().unwrap().len(), 16);
    }
}
