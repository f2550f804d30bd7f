// SPDX-License-Identifier: Apache-2.0

//! Shared property probes. Each returns the worst observed error so callers
//! can both assert and report it.

#![allow(dead_code)]

use std::fs;
use std::path::Path;

use hamlearn::dataset::{generate_dataset, load_dataset, sample_parameters, DatasetMeta};
use hamlearn::neuralnet::{load_checkpoint, save_checkpoint, AdamConfig, AdamState, Checkpoint, HeadArch, Network, NetworkArch};
use hamlearn::qsim::{
    apply_dephasing, assemble_hamiltonian, bloch_components, energy, evolve_pure, initial_state, propagator,
    DensityMatrix, Family, HamiltonianSpec,
};
use hamlearn::record::SamplingGrid;
use hamlearn::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_spec(family: Family, n: usize, seed: u64) -> HamiltonianSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_parameters(family, n, if family.is_time_dependent() { 3 } else { 0 }, 1.0, &mut rng).unwrap()
}

/// `max |U U^dag - I|` over every family and `N <= max_n`.
pub fn unitarity_error(max_n: usize, seed: u64) -> f64 {
    let mut worst = 0.0f64;
    for n in 1..=max_n {
        for (k, family) in Family::ALL.into_iter().enumerate() {
            let spec = random_spec(family, n, seed ^ (n * 31 + k) as u64);
            for dt in [0.01, 0.7, 5.3] {
                let u = propagator(&assemble_hamiltonian(&spec, 0.4).unwrap(), dt).unwrap();
                let dev = &u * u.adjoint() - DMatrix::<Complex64>::identity(u.nrows(), u.ncols());
                worst = dev.iter().map(|z| z.norm()).fold(worst, f64::max);
            }
        }
    }
    worst
}

/// Largest energy change along a 25-point grid for static chains up to `max_n`.
pub fn energy_drift(max_n: usize, seed: u64) -> f64 {
    let grid = SamplingGrid::new(0.02 * std::f64::consts::PI, 25).unwrap();
    let mut worst = 0.0f64;
    for n in 1..=max_n {
        for family in [Family::XyChainZfield, Family::XyzChain] {
            let spec = random_spec(family, n, seed + n as u64);
            let h = assemble_hamiltonian(&spec, 0.0).unwrap();
            let psi0 = initial_state(n).unwrap();
            let e0 = energy(&psi0, &h);
            for t in grid.times() {
                let psi = evolve_pure(&psi0, &spec, t, 1).unwrap();
                worst = worst.max((energy(&psi, &h) - e0).abs());
            }
        }
    }
    worst
}

fn evolved_density(n: usize, seed: u64) -> DensityMatrix {
    let spec = random_spec(Family::XyzChain, n, seed);
    let psi = evolve_pure(&initial_state(n).unwrap(), &spec, 1.3, 1).unwrap();
    DensityMatrix::from_pure(&psi)
}

/// `(trace error, off-diagonal decay error)` of one dephasing slice.
///
/// Entry `(a, b)` must scale by `prod_k exp(-dtau / T2_k)` over the qubits
/// `k` where the basis states `a` and `b` differ.
pub fn dephasing_errors(max_n: usize, seed: u64) -> (f64, f64) {
    let (mut trace_err, mut decay_err) = (0.0f64, 0.0f64);
    for n in 1..=max_n {
        let rho = evolved_density(n, seed + n as u64);
        let t2: Vec<f64> = (0..n).map(|k| 0.8 + 1.7 * k as f64).collect();
        for dtau in [0.01, 0.2, 1.5] {
            let out = apply_dephasing(&rho, &t2, dtau).unwrap();
            trace_err = trace_err.max((out.trace() - rho.trace()).norm());
            let dim = 1usize << n;
            for a in 0..dim {
                for b in 0..dim {
                    let factor: f64 = (0..n)
                        .filter(|&k| ((a ^ b) >> (n - 1 - k)) & 1 == 1)
                        .map(|k| (-dtau / t2[k]).exp())
                        .product();
                    let want = rho.matrix()[(a, b)] * factor;
                    decay_err = decay_err.max((out.matrix()[(a, b)] - want).norm());
                }
            }
        }
    }
    (trace_err, decay_err)
}

/// One qubit under `H = a sigma_z` against the closed-form Bloch rotation on `t in [0, pi]`.
pub fn heisenberg_error(seed: u64) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..5 {
        let spec = random_spec(Family::XyChainZfield, 1, seed + k);
        let a = spec.static_params[0];
        let psi0 = initial_state(1).unwrap();
        let b0 = bloch_components(&psi0).unwrap();
        for step in 0..=64 {
            let t = std::f64::consts::PI * step as f64 / 64.0;
            let b = bloch_components(&evolve_pure(&psi0, &spec, t, 1).unwrap()).unwrap();
            let (c, s) = ((2.0 * a * t).cos(), (2.0 * a * t).sin());
            let want = [b0[0] * c - b0[1] * s, b0[0] * s + b0[1] * c, b0[2]];
            worst = (0..3).map(|i| (b[i] - want[i]).abs()).fold(worst, f64::max);
        }
    }
    worst
}

/// Saves and reloads a dataset; `true` when every value survives bit for bit.
pub fn dataset_round_trip(dir: &Path) -> bool {
    let grid = SamplingGrid::new(0.02 * std::f64::consts::PI, 4).unwrap();
    let mut ok = true;
    for (k, family) in Family::ALL.into_iter().enumerate() {
        let mut meta = DatasetMeta::new(family, 2, grid, 7, 40 + k as u64);
        meta.noise.gaussian_sigma = 0.03;
        if family.is_time_dependent() {
            meta.fourier_terms = 2;
        }
        let ds = generate_dataset(&meta, 1).unwrap();
        let path = dir.join(format!("{family}.dat"));
        ds.save(&path).unwrap();
        let back = load_dataset(&path).unwrap();
        ok &= back.meta == ds.meta;
        ok &= back.samples.len() == ds.samples.len();
        for (x, y) in back.samples.iter().zip(&ds.samples) {
            let bits = |v: &[f64]| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
            ok &= bits(&x.input) == bits(&y.input) && bits(&x.target) == bits(&y.target);
        }
    }
    ok
}

pub fn sample_checkpoint() -> Checkpoint {
    let arch = NetworkArch {
        input_dim: 6,
        seq_len: 4,
        hidden: 5,
        head: HeadArch::Sequence { per_step: 2, steps: 4, statics: 1 },
    };
    let network = Network::new(arch, 17).unwrap();
    let mut adam = AdamState::new(&arch, AdamConfig::default());
    // Non-trivial moments so the optimizer block is exercised.
    let x = vec![0.3; arch.input_len()];
    let y = vec![-0.2; arch.output_len()];
    let (_, g) = network.loss_and_gradient(&[&x], &[&y]).unwrap();
    let mut params = network.params.clone();
    hamlearn::neuralnet::adam_step(&mut params, &g, &mut adam).unwrap();
    Checkpoint {
        network: Network { arch, params },
        adam: Some(adam),
        seed: 99,
        epoch: 3,
    }
}

pub fn checkpoint_round_trip(dir: &Path) -> bool {
    let ckpt = sample_checkpoint();
    let path = dir.join("model.ckpt");
    save_checkpoint(&path, &ckpt).unwrap();
    let back = load_checkpoint(&path).unwrap();
    let bits = |c: &Checkpoint| -> Vec<u64> {
        let mut v: Vec<u64> = c.network.params.tensors().iter().flat_map(|(_, t)| t.iter().map(|x| x.to_bits())).collect();
        if let Some(a) = &c.adam {
            for p in [&a.m, &a.v] {
                v.extend(p.tensors().iter().flat_map(|(_, t)| t.iter().map(|x| x.to_bits())));
            }
        }
        v
    };
    back == ckpt && bits(&back) == bits(&ckpt)
}

/// Damaged variants of a valid file, each paired with a label.
fn damaged(text: &str) -> Vec<(&'static str, String)> {
    let lines: Vec<&str> = text.lines().collect();
    let mut out = vec![
        ("truncated mid-line", text[..text.len() - 7].to_string()),
        ("missing last line", lines[..lines.len() - 1].join("\n") + "\n"),
        ("empty", String::new()),
        ("bad header", text.replacen("hamlearn-", "hamlearm-", 1)),
        ("future version", text.replacen("\"format_version\":1", "\"format_version\":2", 1)),
        ("non-numeric value", {
            let mut l: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
            let last = l.len() - 1;
            l[last] = l[last].replacen('e', "x", 1);
            l.join("\n") + "\n"
        }),
        ("extra line", format!("{text}{}\n", lines[lines.len() - 1])),
    ];
    out.retain(|(_, s)| s != text);
    out
}

/// Every damaged variant must fail to load with a corruption or version error.
pub fn corrupted_files_rejected(dir: &Path) -> Vec<String> {
    let mut failures = Vec::new();
    let ds_path = dir.join("good.dat");
    let meta = DatasetMeta::new(Family::XyChainZfield, 1, SamplingGrid::new(0.1, 3).unwrap(), 3, 5);
    generate_dataset(&meta, 1).unwrap().save(&ds_path).unwrap();
    let ck_path = dir.join("good.ckpt");
    save_checkpoint(&ck_path, &sample_checkpoint()).unwrap();
    for (kind, good) in [("dataset", &ds_path), ("checkpoint", &ck_path)] {
        let text = fs::read_to_string(good).unwrap();
        for (label, bad) in damaged(&text) {
            let path = dir.join(format!("bad-{kind}"));
            fs::write(&path, bad).unwrap();
            let result = if kind == "dataset" {
                load_dataset(&path).map(|_| ())
            } else {
                load_checkpoint(&path).map(|_| ())
            };
            match result {
                Err(Error::Corrupt { .. } | Error::Version { .. }) => {}
                Err(e) => failures.push(format!("{kind} / {label}: unexpected error kind: {e}")),
                Ok(()) => failures.push(format!("{kind} / {label}: accepted")),
            }
        }
    }
    failures
}

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-5;
/// Denominator floor for entries whose gradient is essentially zero.
const FLOOR: f64 = 1e-6;

fn fd_batch(rng: &mut ChaCha8Rng, n: usize, input_len: usize, output_len: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let xs = (0..n)
        .map(|_| (0..input_len).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let ys = (0..n)
        .map(|_| (0..output_len).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    (xs, ys)
}

/// Worst relative error of analytic vs central-difference gradients, the
/// parameter count, and a description of the worst entry.
pub fn worst_relative_error(arch: NetworkArch, seed: u64) -> (f64, usize, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::new(arch, seed).unwrap();
    // Perturb biases away from their initial constants so every path is exercised.
    for (_, t) in net.params.tensors_mut() {
        for v in t.iter_mut() {
            *v += rng.random_range(-0.3..0.3);
        }
    }
    let (xs, ys) = fd_batch(&mut rng, 2, arch.input_len(), arch.output_len());
    let x: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let y: Vec<&[f64]> = ys.iter().map(Vec::as_slice).collect();
    let (_, grad) = net.loss_and_gradient(&x, &y).unwrap();
    let analytic: Vec<(String, f64)> = grad
        .tensors()
        .iter()
        .flat_map(|(name, t)| t.iter().enumerate().map(move |(k, g)| (format!("{name}[{k}]"), *g)))
        .collect();

    let mut worst = (0.0f64, String::new());
    let mut idx = 0;
    let n_tensors = net.params.tensors().len();
    for ti in 0..n_tensors {
        let len = net.params.tensors()[ti].1.len();
        for k in 0..len {
            let original = net.params.tensors()[ti].1[k];
            net.params.tensors_mut()[ti].1[k] = original + STEP;
            let plus = net.loss(&x, &y).unwrap();
            net.params.tensors_mut()[ti].1[k] = original - STEP;
            let minus = net.loss(&x, &y).unwrap();
            net.params.tensors_mut()[ti].1[k] = original;
            let numeric = (plus - minus) / (2.0 * STEP);
            let (name, a) = &analytic[idx];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(FLOOR);
            if rel > worst.0 {
                worst = (rel, format!("{name}: analytic {a:e}, numeric {numeric:e}"));
            }
            idx += 1;
        }
    }
    (worst.0, idx, worst.1)
}
