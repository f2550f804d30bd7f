// SPDX-License-Identifier: Apache-2.0

//! Dense simulation of spin-chain dynamics.
//!
//! Basis convention: qubit 1 is the most-significant tensor factor, so for an
//! `n`-qubit register the bit of qubit `i` (1-based) in basis index `b` is
//! `(b >> (n - i)) & 1`. Every operator in this module follows that order.
//!
//! Static Hamiltonians are exponentiated through their eigendecomposition,
//! which is computed once and reused for every sampling time. Time-dependent
//! Hamiltonians are integrated with piecewise-constant propagators evaluated
//! at slice midpoints.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the simulator accepts unless a caller raises the cap.
pub const DEFAULT_MAX_QUBITS: usize = 10;

const HERMITIAN_TOL: f64 = 1e-12;
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> DMatrix<Complex64> {
        let e = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -I, I, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        DMatrix::from_row_slice(2, 2, &e)
    }
}

/// Measurement axis of a single-qubit Pauli observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

/// A tensor product of single-site Pauli matrices on `n_qubits` sites.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::Validation("Pauli string needs at least one site".into()));
        }
        Ok(Self { letters })
    }

    /// Identity everywhere except the given (1-based) sites.
    pub fn with_sites(n_qubits: usize, sites: &[(usize, Pauli)]) -> Result<Self> {
        let mut letters = vec![Pauli::I; n_qubits];
        for &(site, p) in sites {
            if site == 0 || site > n_qubits {
                return Err(Error::QubitIndex {
                    index: site,
                    n_qubits,
                });
            }
            letters[site - 1] = p;
        }
        Self::new(letters)
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Action on a computational basis state: `P|b> = phase * |b ^ flip>`.
    fn action(&self, basis: usize) -> (usize, Complex64) {
        let n = self.letters.len();
        let mut target = basis;
        let mut phase = ONE;
        for (k, p) in self.letters.iter().enumerate() {
            let shift = n - 1 - k;
            let bit = (basis >> shift) & 1;
            match p {
                Pauli::I => {}
                Pauli::X => target ^= 1 << shift,
                Pauli::Y => {
                    target ^= 1 << shift;
                    phase *= if bit == 0 { I } else { -I };
                }
                Pauli::Z => {
                    if bit == 1 {
                        phase = -phase;
                    }
                }
            }
        }
        (target, phase)
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Validation(format!("not a Pauli letter: {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{p:?}")?;
        }
        Ok(())
    }
}

fn check_capacity(n_qubits: usize, max_qubits: usize) -> Result<()> {
    if n_qubits > max_qubits {
        return Err(Error::Capacity {
            what: "n_qubits",
            requested: n_qubits,
            max: max_qubits,
        });
    }
    Ok(())
}

fn max_hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// A square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(DMatrix<Complex64>);

impl HermitianOperator {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!("operator is {}x{}", m.nrows(), m.ncols())));
        }
        let defect = max_hermitian_defect(&m);
        if defect > HERMITIAN_TOL {
            return Err(Error::Validation(format!(
                "operator is not Hermitian (max |A - A^dag| = {defect:e})"
            )));
        }
        Ok(Self(m))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Adds `coef * P` in place without forming `P` densely.
    fn add_term(&mut self, coef: f64, ps: &PauliString) {
        if coef == 0.0 {
            return;
        }
        for col in 0..self.0.ncols() {
            let (row, phase) = ps.action(col);
            self.0[(row, col)] += phase * coef;
        }
    }

    pub fn eigen(&self) -> Spectrum {
        let eig = self.0.clone().symmetric_eigen();
        Spectrum {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }
}

/// Kronecker product of the single-site matrices, site 1 leftmost.
pub fn pauli_matrix(ps: &PauliString) -> Result<HermitianOperator> {
    pauli_matrix_capped(ps, DEFAULT_MAX_QUBITS)
}

pub fn pauli_matrix_capped(ps: &PauliString, max_qubits: usize) -> Result<HermitianOperator> {
    check_capacity(ps.n_qubits(), max_qubits)?;
    let mut out = DMatrix::from_element(1, 1, ONE);
    for p in ps.letters() {
        out = out.kronecker(&p.matrix());
    }
    Ok(HermitianOperator(out))
}

/// Eigendecomposition `H = V diag(E) V^dag` of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl Spectrum {
    /// `exp(-i H dt)`.
    pub fn propagator(&self, dt: f64) -> DMatrix<Complex64> {
        let mut scaled = self.vectors.clone();
        for (k, &e) in self.values.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -e * dt);
            for v in scaled.column_mut(k).iter_mut() {
                *v *= phase;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    /// Coefficients of `psi` in the eigenbasis.
    pub(crate) fn project(&self, psi: &DVector<Complex64>) -> DVector<Complex64> {
        self.vectors.adjoint() * psi
    }

    pub(crate) fn rebuild(&self, coeffs: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let phased = DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(&self.values)
                .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t)),
        );
        &self.vectors * phased
    }
}

/// `exp(-i h dt)` via eigendecomposition.
pub fn propagator(h: &HermitianOperator, dt: f64) -> Result<DMatrix<Complex64>> {
    if !(dt >= 0.0) {
        return Err(Error::Validation(format!("duration must be >= 0, got {dt}")));
    }
    let defect = max_hermitian_defect(h.matrix());
    if defect > HERMITIAN_TOL {
        return Err(Error::Validation(format!(
            "generator is not Hermitian (defect {defect:e})"
        )));
    }
    Ok(h.eigen().propagator(dt))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Nearest-neighbour XY couplings in a static z field.
    XyChainZfield,
    /// Nearest-neighbour XX, YY and ZZ couplings with independent strengths, static z field.
    XyzChain,
    /// XY couplings with a z field that varies in time as a Fourier series.
    XyChainTdZfield,
}

impl Family {
    pub const ALL: [Family; 3] = [
        Family::XyChainZfield,
        Family::XyzChain,
        Family::XyChainTdZfield,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::XyChainZfield => "xy_chain_zfield",
            Family::XyzChain => "xyz_chain",
            Family::XyChainTdZfield => "xy_chain_td_zfield",
        }
    }

    pub fn is_time_dependent(self) -> bool {
        matches!(self, Family::XyChainTdZfield)
    }

    /// Length of `static_params` for an `n`-qubit chain.
    pub fn n_static_params(self, n: usize) -> usize {
        let bonds = n.saturating_sub(1);
        match self {
            Family::XyChainZfield => n + bonds,
            Family::XyzChain => n + 3 * bonds,
            Family::XyChainTdZfield => bonds,
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Spec(format!(
                    "unknown family `{s}` (expected one of xy_chain_zfield, xyz_chain, xy_chain_td_zfield)"
                ))
            })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One cosine component `amplitude * cos(frequency * t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

/// Model family plus parameters. Every coefficient lies in `[-j0, j0]`.
///
/// `static_params` layout:
/// - `XyChainZfield`: `[a_z(1..=N), J(1..N)]`
/// - `XyzChain`: `[a_z(1..=N), J_x(1..N), J_y(1..N), J_z(1..N)]`
/// - `XyChainTdZfield`: `[J(1..N)]`, with one Fourier series per qubit in `fourier`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub family: Family,
    pub n_qubits: usize,
    pub static_params: Vec<f64>,
    pub fourier: Option<Vec<Vec<FourierTerm>>>,
    pub j0: f64,
}

impl HamiltonianSpec {
    pub fn new_static(family: Family, static_params: Vec<f64>) -> Result<Self> {
        if family.is_time_dependent() {
            return Err(Error::Spec("time-dependent family needs Fourier fields".into()));
        }
        let n = infer_qubits(family, static_params.len())?;
        let spec = Self {
            family,
            n_qubits: n,
            static_params,
            fourier: None,
            j0: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn new_time_dependent(couplings: Vec<f64>, fields: Vec<Vec<FourierTerm>>) -> Result<Self> {
        let spec = Self {
            family: Family::XyChainTdZfield,
            n_qubits: fields.len(),
            static_params: couplings,
            fourier: Some(fields),
            j0: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        if n == 0 {
            return Err(Error::Spec("n_qubits must be positive".into()));
        }
        check_capacity(n, DEFAULT_MAX_QUBITS)?;
        if !(self.j0 > 0.0 && self.j0.is_finite()) {
            return Err(Error::Spec(format!("j0 must be positive, got {}", self.j0)));
        }
        let expected = self.family.n_static_params(n);
        if self.static_params.len() != expected {
            return Err(Error::Spec(format!(
                "{} with {n} qubits needs {expected} static parameters, got {}",
                self.family,
                self.static_params.len()
            )));
        }
        let bound = self.j0 * (1.0 + 1e-12);
        let in_range = |x: f64| x.is_finite() && x.abs() <= bound;
        if let Some(bad) = self.static_params.iter().find(|x| !in_range(**x)) {
            return Err(Error::Spec(format!("parameter {bad} outside [-j0, j0]")));
        }
        match (&self.fourier, self.family.is_time_dependent()) {
            (None, false) => Ok(()),
            (Some(_), false) => Err(Error::Spec(format!(
                "{} takes no Fourier fields",
                self.family
            ))),
            (None, true) => Err(Error::Spec("missing Fourier fields".into())),
            (Some(fields), true) => {
                if fields.len() != n {
                    return Err(Error::Spec(format!(
                        "need one Fourier series per qubit ({n}), got {}",
                        fields.len()
                    )));
                }
                for series in fields {
                    if series.is_empty() || series.len() != fields[0].len() {
                        return Err(Error::Spec(
                            "Fourier series must be non-empty and share one length W".into(),
                        ));
                    }
                    for term in series {
                        let phase_ok = (-1e-12..=2.0 * std::f64::consts::PI + 1e-12)
                            .contains(&term.phase);
                        if !in_range(term.amplitude) || !in_range(term.frequency) || !phase_ok {
                            return Err(Error::Spec(format!("Fourier term out of range: {term:?}")));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Number of Fourier components per qubit (0 for static families).
    pub fn n_fourier_terms(&self) -> usize {
        self.fourier
            .as_ref()
            .and_then(|f| f.first())
            .map_or(0, Vec::len)
    }

    /// z-field on qubit `i` (0-based) at time `t`.
    pub fn field(&self, qubit: usize, t: f64) -> f64 {
        match &self.fourier {
            Some(fields) => {
                let series = &fields[qubit];
                let sum: f64 = series
                    .iter()
                    .map(|w| w.amplitude * (w.frequency * t + w.phase).cos())
                    .sum();
                sum / series.len() as f64
            }
            None => self.static_params[qubit],
        }
    }

    /// Coefficient/operator pairs of the Hamiltonian at time `t`.
    pub fn terms(&self, t: f64) -> Result<Vec<(f64, PauliString)>> {
        self.validate()?;
        let n = self.n_qubits;
        let bonds = n - 1;
        let mut out = Vec::new();
        for i in 0..n {
            out.push((self.field(i, t), PauliString::with_sites(n, &[(i + 1, Pauli::Z)])?));
        }
        let bond = |j: usize, p: Pauli| PauliString::with_sites(n, &[(j + 1, p), (j + 2, p)]);
        match self.family {
            Family::XyChainZfield | Family::XyChainTdZfield => {
                let couplings = match self.family {
                    Family::XyChainZfield => &self.static_params[n..],
                    _ => &self.static_params[..],
                };
                for (j, &c) in couplings.iter().enumerate() {
                    out.push((c, bond(j, Pauli::X)?));
                    out.push((c, bond(j, Pauli::Y)?));
                }
            }
            Family::XyzChain => {
                for (block, p) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
                    let start = n + block * bonds;
                    for j in 0..bonds {
                        out.push((self.static_params[start + j], bond(j, p)?));
                    }
                }
            }
        }
        Ok(out)
    }
}

fn infer_qubits(family: Family, len: usize) -> Result<usize> {
    (1..=DEFAULT_MAX_QUBITS)
        .find(|&n| family.n_static_params(n) == len)
        .ok_or_else(|| Error::Spec(format!("no {family} chain has {len} static parameters")))
}

/// `sum_m a_m(t) B_m` for the family's term list.
pub fn assemble_hamiltonian(spec: &HamiltonianSpec, t: f64) -> Result<HermitianOperator> {
    let dim = 1usize << spec.n_qubits;
    let mut h = HermitianOperator::zeros(dim);
    for (coef, ps) in spec.terms(t)? {
        h.add_term(coef, &ps);
    }
    Ok(h)
}

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<Complex64>);

impl StateVector {
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Shape(format!("state length {dim} is not 2^N")));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self(amplitudes))
    }

    pub(crate) fn new_unchecked(amplitudes: DVector<Complex64>) -> Self {
        Self(amplitudes)
    }

    /// Computational basis state `|b>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_capacity(n_qubits, DEFAULT_MAX_QUBITS)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Validation(format!("basis index {index} >= {dim}")));
        }
        let mut v = DVector::zeros(dim);
        v[index] = ONE;
        Ok(Self(v))
    }

    pub fn n_qubits(&self) -> usize {
        self.0.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn apply(&self, u: &DMatrix<Complex64>) -> Self {
        Self(u * &self.0)
    }
}

/// `Rz(pi/4) Ry(pi/4) |0>` on every qubit, with `R_a(theta) = exp(-i theta sigma_a / 2)`.
///
/// Each qubit starts at Bloch vector `(1/2, 1/2, 1/sqrt 2)`.
pub fn initial_state(n_qubits: usize) -> Result<StateVector> {
    if n_qubits == 0 {
        return Err(Error::Validation("n_qubits must be >= 1".into()));
    }
    check_capacity(n_qubits, DEFAULT_MAX_QUBITS)?;
    let half = FRAC_PI_4 / 2.0;
    // Ry(pi/4)|0> = (cos(pi/8), sin(pi/8)); Rz(pi/4) = diag(e^{-i pi/8}, e^{i pi/8})
    let single = [
        Complex64::from_polar(half.cos(), -half),
        Complex64::from_polar(half.sin(), half),
    ];
    let dim = 1usize << n_qubits;
    let amps = DVector::from_iterator(
        dim,
        (0..dim).map(|b| {
            (0..n_qubits).fold(ONE, |acc, k| acc * single[(b >> (n_qubits - 1 - k)) & 1])
        }),
    );
    Ok(StateVector(amps))
}

/// Evolves `state` to `t_final` under `spec`.
///
/// Static families use a single exact propagator regardless of `n_slices`;
/// time-dependent families apply `n_slices` midpoint propagators.
pub fn evolve_pure(
    state: &StateVector,
    spec: &HamiltonianSpec,
    t_final: f64,
    n_slices: usize,
) -> Result<StateVector> {
    evolve_pure_from(state, spec, 0.0, t_final, n_slices)
}

pub(crate) fn evolve_pure_from(
    state: &StateVector,
    spec: &HamiltonianSpec,
    t_start: f64,
    duration: f64,
    n_slices: usize,
) -> Result<StateVector> {
    if n_slices < 1 {
        return Err(Error::Validation("n_slices must be >= 1".into()));
    }
    if !(duration >= 0.0) {
        return Err(Error::Validation(format!("duration must be >= 0, got {duration}")));
    }
    if duration == 0.0 {
        return Ok(state.clone());
    }
    let u = interval_propagator(spec, t_start, duration, n_slices)?;
    Ok(state.apply(&u))
}

/// Propagator over `[t_start, t_start + duration]`.
pub(crate) fn interval_propagator(
    spec: &HamiltonianSpec,
    t_start: f64,
    duration: f64,
    n_slices: usize,
) -> Result<DMatrix<Complex64>> {
    if !spec.family.is_time_dependent() {
        return Ok(assemble_hamiltonian(spec, 0.0)?.eigen().propagator(duration));
    }
    let dt = duration / n_slices as f64;
    let dim = 1usize << spec.n_qubits;
    let mut u = DMatrix::identity(dim, dim);
    for k in 0..n_slices {
        let mid = t_start + (k as f64 + 0.5) * dt;
        let step = assemble_hamiltonian(spec, mid)?.eigen().propagator(dt);
        u = step * u;
    }
    Ok(u)
}

/// Energy expectation `<psi|H|psi>`.
pub fn energy(state: &StateVector, h: &HermitianOperator) -> f64 {
    (state.0.adjoint() * h.matrix() * &state.0)[(0, 0)].re
}

/// A Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(DMatrix<Complex64>);

impl DensityMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() || m.nrows() < 2 || !m.nrows().is_power_of_two() {
            return Err(Error::Shape(format!(
                "density matrix is {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = max_hermitian_defect(&m);
        if defect > HERMITIAN_TOL {
            return Err(Error::Validation(format!(
                "density matrix not Hermitian (defect {defect:e})"
            )));
        }
        let trace = m.trace();
        if (trace.re - 1.0).abs() > HERMITIAN_TOL || trace.im.abs() > HERMITIAN_TOL {
            return Err(Error::Validation(format!("density matrix trace is {trace}")));
        }
        let min_eig = m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(Error::Validation(format!(
                "density matrix has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self(m))
    }

    pub fn from_pure(state: &StateVector) -> Self {
        Self(&state.0 * state.0.adjoint())
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_capacity(n_qubits, DEFAULT_MAX_QUBITS)?;
        let dim = 1usize << n_qubits;
        Ok(Self(DMatrix::identity(dim, dim) / Complex64::from(dim as f64)))
    }

    pub fn n_qubits(&self) -> usize {
        self.0.nrows().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `U rho U^dag`.
    pub fn conjugate(&self, u: &DMatrix<Complex64>) -> Self {
        Self(u * &self.0 * u.adjoint())
    }
}

/// Dephasing strength `lambda = (1 + exp(-dtau / T2)) / 2` of one slice.
pub fn dephasing_lambda(t2: f64, dtau: f64) -> f64 {
    (1.0 + (-dtau / t2).exp()) / 2.0
}

/// Applies the per-qubit Kraus channel `{sqrt(l) I, sqrt(1 - l) Z_i}` for every qubit.
pub fn apply_dephasing(rho: &DensityMatrix, t2: &[f64], dtau: f64) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    if t2.len() != n {
        return Err(Error::Shape(format!("{} T2 values for {n} qubits", t2.len())));
    }
    if !(dtau > 0.0) {
        return Err(Error::Validation(format!("slice duration must be > 0, got {dtau}")));
    }
    if let Some(bad) = t2.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::Validation(format!("T2 must be > 0, got {bad}")));
    }
    let dim = 1usize << n;
    let mut out = rho.0.clone();
    for (i, &t) in t2.iter().enumerate() {
        let lambda = dephasing_lambda(t, dtau);
        let shift = n - 1 - i;
        // E0 rho E0^dag + E1 rho E1^dag with Z_i diagonal: entry (a, b) picks up z_a z_b.
        for c in 0..dim {
            let zc = if (c >> shift) & 1 == 0 { 1.0 } else { -1.0 };
            for r in 0..dim {
                let zr = if (r >> shift) & 1 == 0 { 1.0 } else { -1.0 };
                let v = out[(r, c)];
                out[(r, c)] = v * lambda + v * ((1.0 - lambda) * zr * zc);
            }
        }
    }
    Ok(DensityMatrix(out))
}

/// Either a pure state or a density matrix.
pub enum QuantumState<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a StateVector> for QuantumState<'a> {
    fn from(s: &'a StateVector) -> Self {
        QuantumState::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for QuantumState<'a> {
    fn from(r: &'a DensityMatrix) -> Self {
        QuantumState::Mixed(r)
    }
}

/// `<sigma_axis>` on qubit `qubit` (1-based).
pub fn expectation_single_qubit<'a>(
    state: impl Into<QuantumState<'a>>,
    qubit: usize,
    axis: Axis,
) -> Result<f64> {
    let state = state.into();
    let n = match &state {
        QuantumState::Pure(s) => s.n_qubits(),
        QuantumState::Mixed(r) => r.n_qubits(),
    };
    if qubit == 0 || qubit > n {
        return Err(Error::QubitIndex { index: qubit, n_qubits: n });
    }
    let mask = 1usize << (n - qubit);
    let dim = 1usize << n;
    let mut acc = 0.0;
    match state {
        QuantumState::Pure(s) => {
            let psi = &s.0;
            for b0 in (0..dim).filter(|b| b & mask == 0) {
                let (a0, a1) = (psi[b0], psi[b0 | mask]);
                acc += match axis {
                    Axis::X => 2.0 * (a0.conj() * a1).re,
                    Axis::Y => 2.0 * (a0.conj() * a1).im,
                    Axis::Z => a0.norm_sqr() - a1.norm_sqr(),
                };
            }
        }
        QuantumState::Mixed(r) => {
            let rho = &r.0;
            for b0 in (0..dim).filter(|b| b & mask == 0) {
                let b1 = b0 | mask;
                acc += match axis {
                    Axis::X => 2.0 * rho[(b0, b1)].re,
                    Axis::Y => -2.0 * rho[(b0, b1)].im,
                    Axis::Z => rho[(b0, b0)].re - rho[(b1, b1)].re,
                };
            }
        }
    }
    if acc.abs() > 1.0 + 1e-9 {
        return Err(Error::Validation(format!("expectation {acc} outside [-1, 1]")));
    }
    Ok(acc)
}

/// All `3N` single-qubit expectations, ordered `(x, y, z)` per qubit, qubits ascending.
pub fn bloch_components<'a>(state: impl Into<QuantumState<'a>>) -> Result<Vec<f64>> {
    let state = state.into();
    let n = match &state {
        QuantumState::Pure(s) => s.n_qubits(),
        QuantumState::Mixed(r) => r.n_qubits(),
    };
    let mut out = Vec::with_capacity(3 * n);
    for q in 1..=n {
        for axis in Axis::ALL {
            let v = match &state {
                QuantumState::Pure(s) => expectation_single_qubit(*s, q, axis)?,
                QuantumState::Mixed(r) => expectation_single_qubit(*r, q, axis)?,
            };
            out.push(v);
        }
    }
    Ok(out)
}
