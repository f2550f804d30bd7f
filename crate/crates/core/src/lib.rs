// SPDX-License-Identifier: Apache-2.0

//! Learning spin-chain Hamiltonian parameters from temporal records of
//! single-qubit measurements.
//!
//! The crate is organised bottom-up:
//! - [`qsim`]: dense state-vector and density-matrix simulation
//! - [`record`]: measurement records on a uniform time grid, with noise
//! - [`dataset`]: parameter sampling and the on-disk dataset format
//! - [`neuralnet`]: LSTM encoder, output heads, BPTT, Adam
//! - [`experiments`]: presets, evaluation and sweeps
//! - [`cli`]: the `hamlearn` command-line front end

pub mod error;
pub mod qsim;
pub mod record;
pub mod dataset;
pub mod seeds;
pub mod neuralnet;
pub mod experiments;
pub mod cli;

pub use error::{Error, Result};
