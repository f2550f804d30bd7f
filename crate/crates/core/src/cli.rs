// SPDX-License-Identifier: Apache-2.0

//! The `hamlearn` command line.
//!
//! Configuration is layered: built-in defaults, then an optional TOML file
//! (`--config`), then `--set section.key=value` overrides, then dedicated
//! flags. The effective configuration is echoed next to every artifact and
//! can be fed back through `--config` to reproduce it.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};

use crate::dataset::{
    generate_dataset, load_dataset, split_dataset, Dataset, DatasetMeta, Dephasing, DEFAULT_FOURIER_TERMS,
};
use crate::error::{Error, Result};
use crate::experiments::{
    self, decoherence_csv, find_preset, interval_csv, noise_csv, presets, Corruption, RunOptions, Tier,
    NOISE_EPS_GRID,
};
use crate::neuralnet::{
    load_checkpoint, save_checkpoint, train, AdamConfig, AdamState, Checkpoint, Network, NetworkArch, TrainConfig,
};
use crate::qsim::Family;
use crate::record::SamplingGrid;
use crate::seeds::derive_named;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    /// Artifact stem: files are `<out>/<name>.train`, `<name>.test`, ...
    pub name: String,
    pub family: Family,
    pub n_qubits: usize,
    pub n_points: usize,
    pub tau: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub gaussian_sigma: f64,
    /// Fixed T2 per qubit; a single value applies to every qubit. Empty disables.
    pub t2: Vec<f64>,
    /// `[low, high]` for per-sample uniform T2. Empty disables.
    pub t2_range: Vec<f64>,
    /// Fourier terms per field; 0 picks the family default.
    pub fourier_terms: usize,
    pub j0: f64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            name: "data".into(),
            family: Family::XyChainZfield,
            n_qubits: 2,
            n_points: 25,
            tau: experiments::TAU,
            n_train: 1000,
            n_test: 100,
            gaussian_sigma: 0.0,
            t2: Vec::new(),
            t2_range: Vec::new(),
            fourier_terms: 0,
            j0: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub hidden: usize,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self { hidden: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub lr_decay: f64,
    pub noise_sigma: f64,
    /// Global gradient-norm clip; 0 disables.
    pub grad_clip: f64,
    /// Early-stopping patience in epochs; 0 disables.
    pub patience: usize,
    /// Share of the training file held out for validation.
    pub val_fraction: f64,
    /// Checkpoint to continue from.
    pub resume: Option<PathBuf>,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            batch_size: 64,
            epochs: 10,
            learning_rate: 3e-3,
            lr_decay: 0.85,
            noise_sigma: 0.0,
            grad_clip: 1.0,
            patience: 0,
            val_fraction: 0.05,
            resume: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Defaults to `<out>/<name>.ckpt`.
    pub checkpoint: Option<PathBuf>,
    /// Defaults to `<out>/<name>.test`.
    pub data: Option<PathBuf>,
    pub gauss_eps: f64,
    pub t2: Option<f64>,
    /// Defaults to `<out>/<name>.report.csv`.
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub eps_grid: Vec<f64>,
    pub t2_grid: Vec<f64>,
    /// Empty picks the tier default.
    pub taus: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub s_grid: Vec<usize>,
    /// 0 picks the tier cap.
    pub max_qubits: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            eps_grid: NOISE_EPS_GRID.to_vec(),
            t2_grid: experiments::default_t2_grid(),
            taus: Vec::new(),
            n_grid: Vec::new(),
            s_grid: Vec::new(),
            max_qubits: 0,
        }
    }
}

/// Effective configuration of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub seed: u64,
    pub jobs: usize,
    pub tier: Tier,
    pub out: PathBuf,
    pub dataset: DatasetSection,
    pub network: NetworkSection,
    pub train: TrainSection,
    pub eval: EvalSection,
    pub sweep: SweepSection,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            jobs: 1,
            tier: Tier::Desk,
            out: PathBuf::from("out"),
            dataset: DatasetSection::default(),
            network: NetworkSection::default(),
            train: TrainSection::default(),
            eval: EvalSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

impl CliConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn artifact(&self, suffix: &str) -> PathBuf {
        self.out.join(format!("{}.{suffix}", self.dataset.name))
    }

    /// Dataset description of the training (`test = false`) or test file.
    pub fn dataset_meta(&self, test: bool) -> Result<DatasetMeta> {
        let d = &self.dataset;
        let grid = SamplingGrid {
            tau: d.tau,
            n_points: d.n_points,
        };
        let (n, stream) = if test { (d.n_test, "test-data") } else { (d.n_train, "train-data") };
        let mut meta = DatasetMeta::new(d.family, d.n_qubits, grid, n, derive_named(self.seed, stream));
        meta.j0 = d.j0;
        if d.fourier_terms > 0 {
            meta.fourier_terms = d.fourier_terms;
        } else if d.family.is_time_dependent() {
            meta.fourier_terms = DEFAULT_FOURIER_TERMS;
        }
        meta.noise.gaussian_sigma = d.gaussian_sigma;
        meta.noise.dephasing = match (d.t2.as_slice(), d.t2_range.as_slice()) {
            ([], []) => Dephasing::None,
            ([t], []) => Dephasing::Fixed { t2: vec![*t; d.n_qubits] },
            (t, []) => Dephasing::Fixed { t2: t.to_vec() },
            ([], [low, high]) => Dephasing::Uniform { low: *low, high: *high },
            ([], _) => return Err(Error::Config("dataset.t2_range needs exactly [low, high]".into())),
            _ => return Err(Error::Config("set at most one of dataset.t2 and dataset.t2_range".into())),
        };
        meta.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(meta)
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let t = &self.train;
        let cfg = TrainConfig {
            batch_size: t.batch_size,
            epochs: t.epochs,
            learning_rate: t.learning_rate,
            lr_decay: t.lr_decay,
            seed: derive_named(self.seed, "training"),
            noise_sigma: t.noise_sigma,
            grad_clip: (t.grad_clip > 0.0).then_some(t.grad_clip),
            patience: (t.patience > 0).then_some(t.patience),
            jobs: self.jobs,
        };
        cfg.validate()?;
        if !(t.val_fraction > 0.0 && t.val_fraction < 1.0) {
            return Err(Error::Config(format!("train.val_fraction must be in (0, 1), got {}", t.val_fraction)));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Parser)]
#[command(name = "hamlearn", version, about = "Learn spin-chain Hamiltonians from single-qubit measurement records")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set train.epochs=20`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 1 guarantees bit-reproducibility.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: Option<u64>,
    #[arg(long, global = true, value_parser = ["desk", "paper"])]
    pub tier: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Artifact stem.
    #[arg(long, global = true)]
    pub name: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate `<name>.train` and `<name>.test` dataset files.
    Gen(GenArgs),
    /// Train a network on `<name>.train`.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a (optionally corrupted) dataset.
    Eval(EvalArgs),
    /// Run a sweep: noise, decoherence, interval or scaling.
    Sweep(SweepArgs),
    /// List presets, or run one with `--run`.
    Presets(PresetArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub s: Option<u64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub train: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub test: Option<u64>,
    /// Gaussian measurement noise baked into both files.
    #[arg(long)]
    pub gauss_eps: Option<f64>,
    /// Fixed T2 for every qubit.
    #[arg(long)]
    pub t2: Option<f64>,
    #[arg(long)]
    pub fourier_terms: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub hidden: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_size: Option<u64>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Fresh Gaussian noise added to training inputs every epoch.
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Continue from this checkpoint, restoring the optimizer state.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub gauss_eps: Option<f64>,
    #[arg(long)]
    pub t2: Option<f64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// One of: noise, decoherence, interval, scaling.
    pub kind: String,
}

#[derive(Debug, Args)]
pub struct PresetArgs {
    /// Preset to train and evaluate.
    #[arg(long)]
    pub run: Option<String>,
}

pub const SWEEPS: [&str; 4] = ["noise", "decoherence", "interval", "scaling"];

fn toml_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Sets dotted `key` in `table`, creating sections as needed.
pub fn apply_override(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| Error::Config(format!("empty key `{key}`")))?;
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{p}` in `{key}` is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn path_value(p: &Path) -> toml::Value {
    toml::Value::String(p.display().to_string())
}

fn flag_overrides(cli: &Cli) -> Vec<(&'static str, toml::Value)> {
    use toml::Value::{Array, Float, Integer, String as Str};
    let g = &cli.global;
    let int = |v: u64| Integer(v as i64);
    let mut o: Vec<(&'static str, toml::Value)> = Vec::new();
    let mut push = |k: &'static str, v: Option<toml::Value>| {
        if let Some(v) = v {
            o.push((k, v));
        }
    };
    push("seed", g.seed.map(int));
    push("jobs", g.jobs.map(int));
    push("tier", g.tier.clone().map(Str));
    push("out", g.out.as_deref().map(path_value));
    push("dataset.name", g.name.clone().map(Str));
    match &cli.command {
        Command::Gen(a) => {
            push("dataset.family", a.family.clone().map(Str));
            push("dataset.n_qubits", a.n.map(int));
            push("dataset.n_points", a.s.map(int));
            push("dataset.tau", a.tau.map(Float));
            push("dataset.n_train", a.train.map(int));
            push("dataset.n_test", a.test.map(int));
            push("dataset.gaussian_sigma", a.gauss_eps.map(Float));
            push("dataset.t2", a.t2.map(|t| Array(vec![Float(t)])));
            push("dataset.fourier_terms", a.fourier_terms.map(int));
        }
        Command::Train(a) => {
            push("network.hidden", a.hidden.map(int));
            push("train.epochs", a.epochs.map(int));
            push("train.batch_size", a.batch_size.map(int));
            push("train.learning_rate", a.lr.map(Float));
            push("train.noise_sigma", a.noise_sigma.map(Float));
            push("train.resume", a.resume.as_deref().map(path_value));
        }
        Command::Eval(a) => {
            push("eval.checkpoint", a.checkpoint.as_deref().map(path_value));
            push("eval.data", a.data.as_deref().map(path_value));
            push("eval.gauss_eps", a.gauss_eps.map(Float));
            push("eval.t2", a.t2.map(Float));
            push("eval.report", a.report.as_deref().map(path_value));
        }
        Command::Sweep(_) | Command::Presets(_) => {}
    }
    o
}

/// Builds the effective configuration: file, then `--set`, then flags.
pub fn resolve_config(cli: &Cli) -> Result<CliConfig> {
    let mut table = match &cli.global.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            toml::from_str::<toml::Table>(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    for raw in &cli.global.overrides {
        let (k, v) = raw
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{raw}` is not KEY=VALUE")))?;
        apply_override(&mut table, k.trim(), toml_value(v.trim()))?;
    }
    for (k, v) in flag_overrides(cli) {
        apply_override(&mut table, k, v)?;
    }
    let cfg: CliConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    if cfg.jobs == 0 {
        return Err(Error::Config("jobs must be >= 1".into()));
    }
    Ok(cfg)
}

fn echo(cfg: &CliConfig, path: &Path) -> Result<()> {
    fs::write(path, cfg.to_toml()?)?;
    info!("effective configuration written to {}", path.display());
    Ok(())
}

fn cmd_gen(cfg: &CliConfig) -> Result<()> {
    let train_meta = cfg.dataset_meta(false)?;
    let test_meta = cfg.dataset_meta(true)?;
    fs::create_dir_all(&cfg.out)?;
    for (meta, suffix) in [(&train_meta, "train"), (&test_meta, "test")] {
        let path = cfg.artifact(suffix);
        generate_dataset(meta, cfg.jobs)?.save(&path)?;
        println!("wrote {} ({} samples)", path.display(), meta.n_samples);
    }
    echo(cfg, &cfg.artifact("gen.toml"))
}

fn load_for_training(path: &Path) -> Result<Dataset> {
    let ds = load_dataset(path)?;
    ds.check_conformance()?;
    Ok(ds)
}

fn cmd_train(cfg: &CliConfig) -> Result<()> {
    let tcfg = cfg.train_config()?;
    let data = load_for_training(&cfg.artifact("train"))?;
    let (train_set, val_set) =
        split_dataset(&data.samples, 1.0 - cfg.train.val_fraction, derive_named(cfg.seed, "split"))?;
    let (mut net, mut adam, start_epoch) = match &cfg.train.resume {
        Some(p) => {
            let ck = load_checkpoint(p)?;
            ck.network.arch.check_dataset(&data.meta)?;
            let mut adam = ck.adam.unwrap_or_else(|| AdamState::new(&ck.network.arch, AdamConfig::default()));
            adam.config.learning_rate = tcfg.learning_rate;
            info!("resuming from {} at epoch {}", p.display(), ck.epoch);
            (ck.network, adam, ck.epoch)
        }
        None => {
            let arch = NetworkArch::for_dataset(&data.meta, cfg.network.hidden);
            let net = Network::new(arch, derive_named(cfg.seed, "init"))?;
            let adam = AdamState::new(
                &arch,
                AdamConfig {
                    learning_rate: tcfg.learning_rate,
                    ..AdamConfig::default()
                },
            );
            (net, adam, 0)
        }
    };
    fs::create_dir_all(&cfg.out)?;
    let outcome = train(&mut net, &mut adam, &train_set, &val_set, &tcfg, start_epoch, |m| {
        println!(
            "epoch {:>4}  train {:.4e}  val {:.4e}  F {:.5}",
            m.epoch, m.train_loss, m.val_loss, m.val_similarity
        )
    })?;
    let ckpt_path = cfg.artifact("ckpt");
    save_checkpoint(
        &ckpt_path,
        &Checkpoint {
            network: net,
            adam: Some(adam),
            seed: tcfg.seed,
            epoch: outcome.last_epoch,
        },
    )?;
    let metrics_path = cfg.artifact("metrics.csv");
    let mut metrics = Vec::new();
    if start_epoch > 0 && metrics_path.exists() {
        metrics = experiments::read_metrics_csv(&metrics_path)?;
        metrics.retain(|m| m.epoch <= start_epoch);
    }
    metrics.extend(outcome.metrics.iter().copied());
    experiments::write_metrics_csv(&metrics_path, &metrics)?;
    echo(cfg, &cfg.artifact("train.toml"))?;
    let best = outcome
        .metrics
        .iter()
        .find(|m| m.epoch == outcome.best_epoch)
        .map_or(f64::NAN, |m| m.val_similarity);
    println!("wrote {} and {}", ckpt_path.display(), metrics_path.display());
    println!("final validation F = {best:.6}");
    Ok(())
}

fn cmd_eval(cfg: &CliConfig) -> Result<()> {
    let e = &cfg.eval;
    let ckpt_path = e.checkpoint.clone().unwrap_or_else(|| cfg.artifact("ckpt"));
    let data_path = e.data.clone().unwrap_or_else(|| cfg.artifact("test"));
    let report_path = e.report.clone().unwrap_or_else(|| cfg.artifact("report.csv"));
    let ck = load_checkpoint(&ckpt_path)?;
    let data = load_dataset(&data_path)?;
    let corruption = Corruption {
        gauss_eps: e.gauss_eps,
        t2: e.t2,
        seed: derive_named(cfg.seed, "eval-noise"),
    };
    let digest = format!("{:016x}", derive_named(0, &cfg.to_toml()?));
    let report = experiments::evaluate(&ck.network, &data, &corruption, &digest, cfg.jobs)?;
    if let Some(parent) = report_path.parent() {
        fs::create_dir_all(parent)?;
    }
    let samples_path = report_path.with_extension("samples.csv");
    report.write_csv(&report_path, &samples_path)?;
    echo(cfg, &report_path.with_extension("toml"))?;
    println!("mean F = {:.6}  MSE = {:.6e}  excluded = {}", report.mean_similarity, report.mse, report.excluded);
    println!("wrote {} and {}", report_path.display(), samples_path.display());
    Ok(())
}

fn cmd_sweep(cfg: &CliConfig, kind: &str) -> Result<()> {
    if !SWEEPS.contains(&kind) {
        return Err(Error::UnknownPreset {
            name: kind.to_string(),
            valid: SWEEPS.join(", "),
        });
    }
    let tier = cfg.tier;
    let opts = RunOptions {
        jobs: cfg.jobs,
        out_dir: Some(cfg.out.join(tier.to_string())),
    };
    let s = &cfg.sweep;
    let csv = match kind {
        "noise" => noise_csv(&experiments::run_noise_robustness(tier, cfg.seed, &s.eps_grid, &opts)?),
        "decoherence" => decoherence_csv(&experiments::run_decoherence_robustness(tier, cfg.seed, &s.t2_grid, &opts)?),
        "interval" => {
            let taus = if s.taus.is_empty() { experiments::default_interval_grid(tier) } else { s.taus.clone() };
            interval_csv(&experiments::run_interval_sweep(tier, cfg.seed, &taus, &opts)?)
        }
        _ => {
            let (dn, ds) = experiments::default_scaling_grid(tier);
            let n_grid = if s.n_grid.is_empty() { dn } else { s.n_grid.clone() };
            let s_grid = if s.s_grid.is_empty() { ds } else { s.s_grid.clone() };
            let cap = if s.max_qubits == 0 { experiments::scaling_cap(tier) } else { s.max_qubits };
            let m = experiments::run_scaling_sweep(tier, cfg.seed, &n_grid, &s_grid, cap, &opts)?;
            for (n, frontier) in m.frontier() {
                match frontier {
                    Some(pts) => println!("N={n}: F >= {} from S={pts}", m.threshold),
                    None => println!("N={n}: F >= {} not reached", m.threshold),
                }
            }
            m.to_csv()
        }
    };
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join(format!("sweep_{kind}_{tier}.csv"));
    fs::write(&path, &csv)?;
    echo(cfg, &path.with_extension("toml"))?;
    print!("{csv}");
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_presets(cfg: &CliConfig, run: Option<&str>) -> Result<()> {
    let Some(name) = run else {
        for p in presets(cfg.tier) {
            println!(
                "{:<22} {:<6} train {:>7}  test {:>5}  hidden {:>3}  {}",
                p.name, p.tier, p.n_train, p.n_test, p.hidden, p.description
            );
        }
        return Ok(());
    };
    let preset = find_preset(name, cfg.tier)?;
    let opts = RunOptions {
        jobs: cfg.jobs,
        out_dir: Some(cfg.out.join(cfg.tier.to_string())),
    };
    let run = experiments::run_preset(&preset, cfg.seed, &opts)?;
    println!(
        "{}: mean F = {:.6}  MSE = {:.6e}  ({} test samples, {} excluded)",
        preset.name,
        run.report.mean_similarity,
        run.report.mse,
        run.report.n_samples(),
        run.report.excluded
    );
    Ok(())
}

/// Exit code for a failed command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::UnknownPreset { .. } => 2,
        _ => 1,
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(cli)?;
    match &cli.command {
        Command::Gen(_) => cmd_gen(&cfg),
        Command::Train(_) => cmd_train(&cfg),
        Command::Eval(_) => cmd_eval(&cfg),
        Command::Sweep(a) => cmd_sweep(&cfg, &a.kind),
        Command::Presets(a) => cmd_presets(&cfg, a.run.as_deref()),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
