// SPDX-License-Identifier: Apache-2.0

//! Temporal records of single-qubit Pauli expectations.
//!
//! Row `s - 1` of a record holds the `3N` expectations at time `s * tau`
//! (`s = 1..=S`), ordered `(x, y, z)` within each qubit and qubits ascending.
//! The `t = 0` point is never stored.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{
    apply_dephasing, assemble_hamiltonian, bloch_components, initial_state, interval_propagator,
    DensityMatrix, HamiltonianSpec,
};

/// Uniform sampling grid: `n_points` samples separated by `tau` (units of `1/j0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub tau: f64,
    pub n_points: usize,
}

impl SamplingGrid {
    pub fn new(tau: f64, n_points: usize) -> Result<Self> {
        let grid = Self { tau, n_points };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Validation(format!("tau must be > 0, got {}", self.tau)));
        }
        if self.n_points == 0 {
            return Err(Error::Validation("grid needs at least one sampling point".into()));
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.n_points as f64 * self.tau
    }

    /// Sampling times `tau, 2 tau, ..., S tau`.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.n_points).map(move |s| s as f64 * self.tau)
    }
}

/// Measurement corruption: additive Gaussian noise and/or per-qubit dephasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub gaussian_sigma: f64,
    pub t2: Option<Vec<f64>>,
    pub rng_seed: u64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            gaussian_sigma: 0.0,
            t2: None,
            rng_seed: 0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.gaussian_sigma == 0.0 && self.t2.is_none()
    }
}

/// Knobs of the internal integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Midpoint slices per sampling interval for time-dependent Hamiltonians.
    pub slices_per_interval: usize,
    /// Unitary-then-dephasing slices per sampling interval on the density-matrix path.
    pub dephasing_substeps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            slices_per_interval: 10,
            dephasing_substeps: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordOrdering {
    /// Rows are times; columns are `(x, y, z)` blocks per qubit, qubits ascending.
    TimeMajorQubitXyz,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub values: Array2<f64>,
    pub grid: SamplingGrid,
    pub ordering: RecordOrdering,
}

impl MeasurementRecord {
    pub fn n_qubits(&self) -> usize {
        self.values.ncols() / 3
    }

    /// Sanity guard: every entry inside `[-1 - 8 eps, 1 + 8 eps]`.
    pub fn check_bounds(&self, sigma: f64) -> Result<()> {
        let bound = 1.0 + 8.0 * sigma + 1e-10;
        match self.values.iter().find(|v| !(v.abs() <= bound)) {
            Some(v) => Err(Error::Validation(format!("record entry {v} outside +-{bound}"))),
            None => Ok(()),
        }
    }
}

pub fn record_trajectory(
    spec: &HamiltonianSpec,
    grid: &SamplingGrid,
    noise: &NoiseSpec,
) -> Result<MeasurementRecord> {
    record_trajectory_with(spec, grid, noise, &IntegratorConfig::default())
}

pub fn record_trajectory_with(
    spec: &HamiltonianSpec,
    grid: &SamplingGrid,
    noise: &NoiseSpec,
    cfg: &IntegratorConfig,
) -> Result<MeasurementRecord> {
    spec.validate()?;
    grid.validate()?;
    if cfg.slices_per_interval == 0 || cfg.dephasing_substeps == 0 {
        return Err(Error::Validation("integrator slice counts must be >= 1".into()));
    }
    let n = spec.n_qubits;
    let mut values = Array2::zeros((grid.n_points, 3 * n));
    let psi0 = initial_state(n)?;

    match &noise.t2 {
        None if !spec.family.is_time_dependent() => {
            let spectrum = assemble_hamiltonian(spec, 0.0)?.eigen();
            let coeffs = spectrum.project(psi0.amplitudes());
            for (s, t) in grid.times().enumerate() {
                let psi = spectrum.rebuild(&coeffs, t);
                let psi = crate::qsim::StateVector::new_unchecked(psi);
                write_row(&mut values, s, &bloch_components(&psi)?);
            }
        }
        None => {
            let mut psi = psi0;
            for s in 0..grid.n_points {
                let u = interval_propagator(
                    spec,
                    s as f64 * grid.tau,
                    grid.tau,
                    cfg.slices_per_interval,
                )?;
                psi = psi.apply(&u);
                write_row(&mut values, s, &bloch_components(&psi)?);
            }
        }
        Some(t2) => {
            if t2.len() != n {
                return Err(Error::Shape(format!("{} T2 values for {n} qubits", t2.len())));
            }
            let sub = cfg.dephasing_substeps;
            let dtau = grid.tau / sub as f64;
            let per_sub = cfg.slices_per_interval.div_ceil(sub).max(1);
            let fixed = if spec.family.is_time_dependent() {
                None
            } else {
                Some(assemble_hamiltonian(spec, 0.0)?.eigen().propagator(dtau))
            };
            let mut rho = DensityMatrix::from_pure(&psi0);
            for s in 0..grid.n_points {
                for k in 0..sub {
                    let u = match &fixed {
                        Some(u) => u.clone(),
                        None => {
                            let start = s as f64 * grid.tau + k as f64 * dtau;
                            interval_propagator(spec, start, dtau, per_sub)?
                        }
                    };
                    rho = apply_dephasing(&rho.conjugate(&u), t2, dtau)?;
                }
                write_row(&mut values, s, &bloch_components(&rho)?);
            }
        }
    }

    let rec = MeasurementRecord {
        values,
        grid: *grid,
        ordering: RecordOrdering::TimeMajorQubitXyz,
    };
    add_gaussian_noise(&rec, noise.gaussian_sigma, noise.rng_seed)
}

fn write_row(values: &mut Array2<f64>, s: usize, row: &[f64]) {
    for (dst, &v) in values.row_mut(s).iter_mut().zip(row) {
        *dst = v;
    }
}

/// Adds i.i.d. `N(0, sigma)` to every entry, drawn in row-major order from `seed`.
pub fn add_gaussian_noise(rec: &MeasurementRecord, sigma: f64, seed: u64) -> Result<MeasurementRecord> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Validation(format!("noise sigma must be >= 0, got {sigma}")));
    }
    let mut out = rec.clone();
    if sigma == 0.0 {
        return Ok(out);
    }
    add_noise_in_place(out.values.as_slice_mut().expect("standard layout"), sigma, seed);
    Ok(out)
}

/// In-place Gaussian corruption of a flat buffer.
pub fn add_noise_in_place(values: &mut [f64], sigma: f64, seed: u64) {
    if sigma == 0.0 {
        return;
    }
    let normal = Normal::new(0.0, sigma).expect("finite non-negative sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in values {
        *v += normal.sample(&mut rng);
    }
}

/// Time-major flattening: `(x, y, z)` of every qubit at `tau`, then at `2 tau`, ...
pub fn flatten_record(rec: &MeasurementRecord) -> Vec<f64> {
    rec.values.iter().copied().collect()
}

pub fn unflatten_record(flat: &[f64], grid: &SamplingGrid, n_qubits: usize) -> Result<MeasurementRecord> {
    let cols = 3 * n_qubits;
    if flat.len() != grid.n_points * cols {
        return Err(Error::Shape(format!(
            "flat record has {} entries, expected {} x {cols}",
            flat.len(),
            grid.n_points
        )));
    }
    let values = Array2::from_shape_vec((grid.n_points, cols), flat.to_vec())
        .map_err(|e| Error::Shape(e.to_string()))?;
    Ok(MeasurementRecord {
        values,
        grid: *grid,
        ordering: RecordOrdering::TimeMajorQubitXyz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::Family;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn grid(tau: f64, s: usize) -> SamplingGrid {
        SamplingGrid::new(tau, s).unwrap()
    }

    #[test]
    fn zero_hamiltonian_freezes_initial_bloch_vector() {
        let spec = HamiltonianSpec::new_static(Family::XyChainZfield, vec![0.0; 5]).unwrap();
        let rec = record_trajectory(&spec, &grid(0.02 * PI, 7), &NoiseSpec::noiseless()).unwrap();
        assert_eq!(rec.values.dim(), (7, 9));
        for row in rec.values.rows() {
            for q in 0..3 {
                assert_abs_diff_eq!(row[3 * q], 0.5, epsilon = 1e-12);
                assert_abs_diff_eq!(row[3 * q + 1], 0.5, epsilon = 1e-12);
                assert_abs_diff_eq!(row[3 * q + 2], FRAC_1_SQRT_2, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn single_qubit_z_rotation_row() {
        let spec = HamiltonianSpec::new_static(Family::XyChainZfield, vec![1.0]).unwrap();
        let rec = record_trajectory(&spec, &grid(FRAC_PI_4, 1), &NoiseSpec::noiseless()).unwrap();
        let row = rec.values.row(0);
        assert_abs_diff_eq!(row[0], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(row[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(row[2], FRAC_1_SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn records_are_deterministic() {
        let spec = HamiltonianSpec::new_static(Family::XyChainZfield, vec![0.3, -0.7, 0.4]).unwrap();
        let g = grid(0.02 * PI, 25);
        for sigma in [0.0, 0.05] {
            let noise = NoiseSpec { gaussian_sigma: sigma, t2: None, rng_seed: 99 };
            let a = record_trajectory(&spec, &g, &noise).unwrap();
            let b = record_trajectory(&spec, &g, &noise).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn noise_statistics() {
        let rec = MeasurementRecord {
            values: Array2::zeros((1000, 100)),
            grid: grid(0.1, 1000),
            ordering: RecordOrdering::TimeMajorQubitXyz,
        };
        let noisy = add_gaussian_noise(&rec, 0.1, 2024).unwrap();
        let n = noisy.values.len() as f64;
        let mean = noisy.values.sum() / n;
        let std = (noisy.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() < 0.002, "mean {mean}");
        assert!((std - 0.1).abs() < 0.005, "std {std}");
        assert_eq!(noisy, add_gaussian_noise(&rec, 0.1, 2024).unwrap());
        assert_eq!(add_gaussian_noise(&rec, 0.0, 5).unwrap(), rec);
        assert!(add_gaussian_noise(&rec, -0.1, 5).is_err());
    }

    #[test]
    fn flatten_is_time_major() {
        let values = Array2::from_shape_vec((2, 3), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let rec = MeasurementRecord {
            values,
            grid: grid(0.1, 2),
            ordering: RecordOrdering::TimeMajorQubitXyz,
        };
        let flat = flatten_record(&rec);
        assert_eq!(flat, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(unflatten_record(&flat, &rec.grid, 1).unwrap(), rec);
        assert!(unflatten_record(&flat[..5], &rec.grid, 1).is_err());
    }

    #[test]
    fn dephased_free_decay() {
        // Zero Hamiltonian: transverse components decay as exp(-t / T2), z is untouched.
        let spec = HamiltonianSpec::new_static(Family::XyChainZfield, vec![0.0; 3]).unwrap();
        let t2 = 0.8;
        let g = grid(0.05, 30);
        let noise = NoiseSpec { gaussian_sigma: 0.0, t2: Some(vec![t2; 2]), rng_seed: 0 };
        let rec = record_trajectory(&spec, &g, &noise).unwrap();
        for (s, t) in g.times().enumerate() {
            let decay = (-t / t2).exp();
            for q in 0..2 {
                assert_abs_diff_eq!(rec.values[(s, 3 * q)], 0.5 * decay, epsilon = 1e-8);
                assert_abs_diff_eq!(rec.values[(s, 3 * q + 1)], 0.5 * decay, epsilon = 1e-8);
                assert_abs_diff_eq!(rec.values[(s, 3 * q + 2)], FRAC_1_SQRT_2, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn weak_dephasing_matches_pure_path() {
        let spec = HamiltonianSpec::new_static(Family::XyChainZfield, vec![0.4, -0.9, 0.2, 0.6, -0.5]).unwrap();
        let g = grid(0.02 * PI, 40);
        let pure = record_trajectory(&spec, &g, &NoiseSpec::noiseless()).unwrap();
        let noise = NoiseSpec { gaussian_sigma: 0.0, t2: Some(vec![1e9; 3]), rng_seed: 0 };
        let mixed = record_trajectory(&spec, &g, &noise).unwrap();
        for (a, b) in pure.values.iter().zip(mixed.values.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-6);
        }
    }

    #[test]
    fn dephasing_slice_convergence() {
        // Splitting error of one unitary+channel step per interval against a
        // 16-substep reference; it shrinks as T2 grows.
        let spec = HamiltonianSpec::new_static(Family::XyChainZfield, vec![0.8, -0.3, 0.5]).unwrap();
        let g = grid(0.02 * PI, 150);
        let mut previous = f64::INFINITY;
        for (t2, bound) in [(PI, 5e-3), (3.0 * PI, 2e-3), (5.0 * PI, 1e-3)] {
            let noise = NoiseSpec { gaussian_sigma: 0.0, t2: Some(vec![t2; 2]), rng_seed: 0 };
            let coarse = record_trajectory(&spec, &g, &noise).unwrap();
            let cfg = IntegratorConfig { dephasing_substeps: 16, ..Default::default() };
            let fine = record_trajectory_with(&spec, &g, &noise, &cfg).unwrap();
            let worst = coarse
                .values
                .iter()
                .zip(fine.values.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(worst < bound, "T2={t2}: {worst}");
            assert!(worst < previous);
            previous = worst;
        }
    }

    #[test]
    fn t2_length_must_match_qubits() {
        let spec = HamiltonianSpec::new_static(Family::XyChainZfield, vec![0.1; 3]).unwrap();
        let noise = NoiseSpec { gaussian_sigma: 0.0, t2: Some(vec![1.0]), rng_seed: 0 };
        assert!(record_trajectory(&spec, &grid(0.1, 3), &noise).is_err());
    }
}
