// SPDX-License-Identifier: Apache-2.0

//! Labelled datasets of (measurement record, Hamiltonian parameters) pairs.
//!
//! On-disk layout (`format_version` 1):
//!
//! ```text
//! hamlearn-dataset {"format_version":1,"family":"xy_chain_zfield",...}
//! <input_0> ... <input_{3NS-1}> <target_0> ... <target_{M-1}>
//! ...
//! ```
//!
//! The first line is a JSON object carrying [`DatasetMeta`]. Each following
//! line is one sample, space-separated, every number written with 17
//! significant digits so a reload is bit-exact. The file ends with a newline.

use std::f64::consts::TAU;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{Family, FourierTerm, HamiltonianSpec, DEFAULT_MAX_QUBITS};
use crate::record::{flatten_record, record_trajectory, NoiseSpec, SamplingGrid};
use crate::seeds::derive_seed;

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_FOURIER_TERMS: usize = 10;
const MAGIC: &str = "hamlearn-dataset";

/// How dephasing is applied when generating records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dephasing {
    #[default]
    None,
    /// The same per-qubit T2 values for every sample.
    Fixed { t2: Vec<f64> },
    /// Each qubit of each sample draws T2 uniformly from `[low, high]`.
    Uniform { low: f64, high: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DataNoise {
    pub gaussian_sigma: f64,
    pub dephasing: Dephasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub format_version: u32,
    pub family: Family,
    pub n_qubits: usize,
    pub tau: f64,
    pub n_points: usize,
    pub noise: DataNoise,
    pub j0: f64,
    /// Fourier components per qubit (time-dependent family only, 0 otherwise).
    pub fourier_terms: usize,
    pub n_samples: usize,
    pub master_seed: u64,
}

impl DatasetMeta {
    pub fn new(family: Family, n_qubits: usize, grid: SamplingGrid, n_samples: usize, master_seed: u64) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            family,
            n_qubits,
            tau: grid.tau,
            n_points: grid.n_points,
            noise: DataNoise::default(),
            j0: 1.0,
            fourier_terms: if family.is_time_dependent() { DEFAULT_FOURIER_TERMS } else { 0 },
            n_samples,
            master_seed,
        }
    }

    pub fn grid(&self) -> SamplingGrid {
        SamplingGrid {
            tau: self.tau,
            n_points: self.n_points,
        }
    }

    pub fn input_len(&self) -> usize {
        3 * self.n_qubits * self.n_points
    }

    /// Number of time-dependent targets per decoder step (0 for static families).
    pub fn per_step_targets(&self) -> usize {
        if self.family.is_time_dependent() {
            self.n_qubits
        } else {
            0
        }
    }

    pub fn n_static_targets(&self) -> usize {
        self.family.n_static_params(self.n_qubits)
    }

    /// `M`: static parameters, or `S * N` field values followed by `N - 1` couplings.
    pub fn target_len(&self) -> usize {
        self.per_step_targets() * self.n_points + self.n_static_targets()
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "format_version {} unsupported",
                self.format_version
            )));
        }
        if self.n_qubits == 0 {
            return Err(Error::Spec("n_qubits must be >= 1".into()));
        }
        if self.n_qubits > DEFAULT_MAX_QUBITS {
            return Err(Error::Capacity {
                what: "n_qubits",
                requested: self.n_qubits,
                max: DEFAULT_MAX_QUBITS,
            });
        }
        self.grid().validate()?;
        if !(self.j0 > 0.0 && self.j0.is_finite()) {
            return Err(Error::Spec(format!("j0 must be > 0, got {}", self.j0)));
        }
        if self.family.is_time_dependent() != (self.fourier_terms > 0) {
            return Err(Error::Spec(format!(
                "{} requires fourier_terms {} 0",
                self.family,
                if self.family.is_time_dependent() { ">" } else { "=" }
            )));
        }
        if !(self.noise.gaussian_sigma >= 0.0 && self.noise.gaussian_sigma.is_finite()) {
            return Err(Error::Validation("gaussian_sigma must be >= 0".into()));
        }
        match &self.noise.dephasing {
            Dephasing::None => {}
            Dephasing::Fixed { t2 } => {
                if t2.len() != self.n_qubits || t2.iter().any(|t| !(*t > 0.0)) {
                    return Err(Error::Validation(format!(
                        "fixed dephasing needs {} positive T2 values",
                        self.n_qubits
                    )));
                }
            }
            Dephasing::Uniform { low, high } => {
                if !(*low > 0.0 && high >= low && high.is_finite()) {
                    return Err(Error::Validation(format!("bad T2 range [{low}, {high}]")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub samples: Vec<Sample>,
}

/// Draws every parameter of a `family` chain uniformly from its range.
pub fn sample_parameters<R: Rng + ?Sized>(
    family: Family,
    n_qubits: usize,
    fourier_terms: usize,
    j0: f64,
    rng: &mut R,
) -> Result<HamiltonianSpec> {
    let mut uniform = |lo: f64, hi: f64| rng.random_range(lo..=hi);
    let static_params: Vec<f64> = (0..family.n_static_params(n_qubits))
        .map(|_| uniform(-j0, j0))
        .collect();
    let fourier = if family.is_time_dependent() {
        if fourier_terms == 0 {
            return Err(Error::Spec("time-dependent family needs W >= 1".into()));
        }
        Some(
            (0..n_qubits)
                .map(|_| {
                    (0..fourier_terms)
                        .map(|_| FourierTerm {
                            amplitude: uniform(-j0, j0),
                            frequency: uniform(-j0, j0),
                            phase: uniform(0.0, TAU),
                        })
                        .collect()
                })
                .collect(),
        )
    } else {
        None
    };
    let spec = HamiltonianSpec {
        family,
        n_qubits,
        static_params,
        fourier,
        j0,
    };
    spec.validate()?;
    Ok(spec)
}

/// Regression target of `spec` on `grid`.
pub fn targets(spec: &HamiltonianSpec, grid: &SamplingGrid) -> Vec<f64> {
    if !spec.family.is_time_dependent() {
        return spec.static_params.clone();
    }
    let mut out = Vec::with_capacity(grid.n_points * spec.n_qubits + spec.static_params.len());
    for t in grid.times() {
        out.extend((0..spec.n_qubits).map(|q| spec.field(q, t)));
    }
    out.extend_from_slice(&spec.static_params);
    out
}

/// Rebuilds the Hamiltonian of a static-family sample from its target.
pub fn spec_from_target(meta: &DatasetMeta, target: &[f64]) -> Result<HamiltonianSpec> {
    if meta.family.is_time_dependent() {
        return Err(Error::Spec(
            "time-dependent targets do not determine the Fourier parameters".into(),
        ));
    }
    let spec = HamiltonianSpec {
        family: meta.family,
        n_qubits: meta.n_qubits,
        static_params: target.to_vec(),
        fourier: None,
        j0: meta.j0,
    };
    spec.validate()?;
    Ok(spec)
}

/// Sample `index` of `meta`; depends only on `(master_seed, index)`.
pub fn generate_sample(meta: &DatasetMeta, index: u64) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(meta.master_seed, index));
    let spec = sample_parameters(meta.family, meta.n_qubits, meta.fourier_terms, meta.j0, &mut rng)?;
    let t2 = match &meta.noise.dephasing {
        Dephasing::None => None,
        Dephasing::Fixed { t2 } => Some(t2.clone()),
        Dephasing::Uniform { low, high } => {
            Some((0..meta.n_qubits).map(|_| rng.random_range(*low..=*high)).collect())
        }
    };
    let noise = NoiseSpec {
        gaussian_sigma: meta.noise.gaussian_sigma,
        t2,
        rng_seed: rng.next_u64(),
    };
    let grid = meta.grid();
    let record = record_trajectory(&spec, &grid, &noise)?;
    Ok(Sample {
        input: flatten_record(&record),
        target: targets(&spec, &grid),
    })
}

/// Generates all samples of `meta`, in index order, on up to `jobs` threads.
pub fn generate_dataset(meta: &DatasetMeta, jobs: usize) -> Result<Dataset> {
    meta.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let samples = pool.install(|| {
        (0..meta.n_samples as u64)
            .into_par_iter()
            .map(|i| generate_sample(meta, i))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(Dataset {
        meta: meta.clone(),
        samples,
    })
}

pub fn generate_dataset_file(meta: &DatasetMeta, path: &Path, jobs: usize) -> Result<Dataset> {
    let ds = generate_dataset(meta, jobs)?;
    ds.save(path)?;
    Ok(ds)
}

pub(crate) fn write_floats<W: Write>(w: &mut W, values: &[f64]) -> std::io::Result<()> {
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            w.write_all(b" ")?;
        }
        write!(w, "{v:.16e}")?;
    }
    Ok(())
}

pub(crate) fn parse_floats(line: &str) -> std::result::Result<Vec<f64>, String> {
    line.split_ascii_whitespace()
        .map(|tok| tok.parse::<f64>().map_err(|e| format!("bad number `{tok}`: {e}")))
        .collect()
}

impl Dataset {
    pub fn input_len(&self) -> usize {
        self.meta.input_len()
    }

    pub fn target_len(&self) -> usize {
        self.meta.target_len()
    }

    pub fn check_conformance(&self) -> Result<()> {
        let (il, tl) = (self.meta.input_len(), self.meta.target_len());
        if self.samples.len() != self.meta.n_samples {
            return Err(Error::Shape(format!(
                "{} samples, meta declares {}",
                self.samples.len(),
                self.meta.n_samples
            )));
        }
        for (i, s) in self.samples.iter().enumerate() {
            if s.input.len() != il || s.target.len() != tl {
                return Err(Error::Shape(format!(
                    "sample {i}: input {} / target {}, expected {il} / {tl}",
                    s.input.len(),
                    s.target.len()
                )));
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.check_conformance()?;
        let mut w = BufWriter::new(fs::File::create(path)?);
        let meta = serde_json::to_string(&self.meta).map_err(|e| Error::Config(e.to_string()))?;
        writeln!(w, "{MAGIC} {meta}")?;
        for s in &self.samples {
            write_floats(&mut w, &s.input)?;
            w.write_all(b" ")?;
            write_floats(&mut w, &s.target)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads and validates a dataset file.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    if !text.ends_with('\n') {
        return Err(Error::corrupt(path, "file does not end with a newline (truncated?)"));
    }
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::corrupt(path, "empty file"))?;
    let json = header
        .strip_prefix(MAGIC)
        .map(str::trim_start)
        .ok_or_else(|| Error::corrupt(path, "missing dataset header"))?;
    let raw: serde_json::Value =
        serde_json::from_str(json).map_err(|e| Error::corrupt(path, format!("header: {e}")))?;
    let version = raw
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::corrupt(path, "header lacks format_version"))?;
    if version != u64::from(FORMAT_VERSION) {
        return Err(Error::Version {
            path: path.to_path_buf(),
            found: version as u32,
            expected: FORMAT_VERSION,
        });
    }
    let meta: DatasetMeta =
        serde_json::from_value(raw).map_err(|e| Error::corrupt(path, format!("header: {e}")))?;
    meta.validate()
        .map_err(|e| Error::corrupt(path, format!("header: {e}")))?;
    let (il, tl) = (meta.input_len(), meta.target_len());
    let mut samples = Vec::with_capacity(meta.n_samples);
    for (k, line) in lines.enumerate() {
        let mut values =
            parse_floats(line).map_err(|e| Error::corrupt(path, format!("sample {k}: {e}")))?;
        if values.len() != il + tl {
            return Err(Error::corrupt(
                path,
                format!("sample {k} has {} numbers, expected {}", values.len(), il + tl),
            ));
        }
        let target = values.split_off(il);
        samples.push(Sample { input: values, target });
    }
    if samples.len() != meta.n_samples {
        return Err(Error::corrupt(
            path,
            format!("{} samples present, header declares {}", samples.len(), meta.n_samples),
        ));
    }
    Ok(Dataset { meta, samples })
}

/// Deterministic shuffle-then-split into `(train, validation)`.
pub fn split_dataset(samples: &[Sample], fraction: f64, seed: u64) -> Result<(Vec<Sample>, Vec<Sample>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Validation(format!("split fraction must be in (0, 1), got {fraction}")));
    }
    let n = samples.len();
    let n_first = (fraction * n as f64).round() as usize;
    if n_first == 0 || n_first == n {
        return Err(Error::Validation(format!(
            "split of {n} samples at {fraction} leaves an empty side"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |idx: &[usize]| idx.iter().map(|&i| samples[i].clone()).collect::<Vec<_>>();
    Ok((pick(&order[..n_first]), pick(&order[n_first..])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn meta(n_samples: usize) -> DatasetMeta {
        DatasetMeta::new(
            Family::XyChainZfield,
            2,
            SamplingGrid::new(0.02 * PI, 5).unwrap(),
            n_samples,
            11,
        )
    }

    #[test]
    fn uniform_parameter_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| sample_parameters(Family::XyChainZfield, 1, 0, 1.0, &mut rng).unwrap().static_params[0])
            .collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let min = draws.iter().copied().fold(f64::INFINITY, f64::min);
        let max = draws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(mean.abs() < 0.01, "{mean}");
        assert!(min < -0.99 && max > 0.99);
    }

    #[test]
    fn sampling_is_seeded() {
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            sample_parameters(Family::XyChainTdZfield, 3, 10, 1.0, &mut rng).unwrap()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn three_qubit_target_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = sample_parameters(Family::XyChainZfield, 3, 0, 1.0, &mut rng).unwrap();
        let grid = SamplingGrid::new(0.1, 4).unwrap();
        assert_eq!(targets(&spec, &grid).len(), 5);
    }

    #[test]
    fn time_dependent_target_layout() {
        let m = DatasetMeta {
            fourier_terms: 3,
            ..DatasetMeta::new(Family::XyChainTdZfield, 2, SamplingGrid::new(0.1, 4).unwrap(), 1, 5)
        };
        assert_eq!(m.target_len(), 4 * 2 + 1);
        let s = generate_sample(&m, 0).unwrap();
        assert_eq!(s.input.len(), 24);
        assert_eq!(s.target.len(), 9);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(5, 0));
        let spec = sample_parameters(m.family, 2, 3, 1.0, &mut rng).unwrap();
        // time-major: qubit 1 and 2 at tau, then at 2 tau, ...
        assert_eq!(s.target[0], spec.field(0, 0.1));
        assert_eq!(s.target[1], spec.field(1, 0.1));
        assert_eq!(s.target[2], spec.field(0, 0.2));
        assert_eq!(s.target[8], spec.static_params[0]);
    }

    #[test]
    fn empty_dataset_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.train");
        let ds = generate_dataset_file(&meta(0), &path, 1).unwrap();
        assert!(ds.samples.is_empty());
        assert_eq!(load_dataset(&path).unwrap(), ds);
    }

    #[test]
    fn generation_is_order_independent() {
        let m = meta(12);
        let serial = generate_dataset(&m, 1).unwrap();
        let parallel = generate_dataset(&m, 4).unwrap();
        assert_eq!(serial, parallel);
        assert_eq!(generate_sample(&m, 7).unwrap(), serial.samples[7]);
    }

    #[test]
    fn truncation_and_version_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.train");
        generate_dataset_file(&meta(3), &path, 1).unwrap();
        let text = fs::read_to_string(&path).unwrap();

        let cut = dir.path().join("cut.train");
        fs::write(&cut, &text[..text.len() - 10]).unwrap();
        assert!(matches!(load_dataset(&cut), Err(Error::Corrupt { .. })));

        let short = dir.path().join("short.train");
        let keep: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        fs::write(&short, keep).unwrap();
        assert!(matches!(load_dataset(&short), Err(Error::Corrupt { .. })));

        let v2 = dir.path().join("v2.train");
        fs::write(&v2, text.replacen("\"format_version\":1", "\"format_version\":2", 1)).unwrap();
        assert!(matches!(load_dataset(&v2), Err(Error::Version { found: 2, .. })));

        let junk = dir.path().join("junk.train");
        fs::write(&junk, text.replacen(" ", " x", 2)).unwrap();
        assert!(load_dataset(&junk).is_err());
    }

    #[test]
    fn split_cases() {
        let samples: Vec<Sample> = (0..10)
            .map(|i| Sample { input: vec![i as f64], target: vec![] })
            .collect();
        let (a, b) = split_dataset(&samples, 0.9, 3).unwrap();
        assert_eq!((a.len(), b.len()), (9, 1));
        let mut all: Vec<f64> = a.iter().chain(&b).map(|s| s.input[0]).collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, (0..10).map(f64::from).collect::<Vec<_>>());
        assert_eq!(split_dataset(&samples, 0.9, 3).unwrap(), (a, b));
        assert!(split_dataset(&samples, 0.0, 3).is_err());
        assert!(split_dataset(&samples, 0.99, 3).is_err());
    }

    #[test]
    fn static_spec_recovers_from_target() {
        let m = meta(1);
        let s = generate_sample(&m, 0).unwrap();
        let spec = spec_from_target(&m, &s.target).unwrap();
        let rec = record_trajectory(&spec, &m.grid(), &NoiseSpec::noiseless()).unwrap();
        assert_eq!(flatten_record(&rec), s.input);
    }
}
