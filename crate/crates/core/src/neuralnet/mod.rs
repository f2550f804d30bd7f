// SPDX-License-Identifier: Apache-2.0

//! LSTM sequence regression with hand-derived gradients.

pub mod adam;
pub mod checkpoint;
pub mod loss;
pub mod lstm;
pub mod network;
pub mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use loss::{cosine_similarity, mse_loss};
pub use lstm::{lstm_cell_forward, Gate, LstmParams, StepCache};
pub use network::{init_params, Dense, ForwardCache, HeadArch, HeadParams, Network, NetworkArch, Params, DEFAULT_HIDDEN};
pub use train::{batch_gradient, predict_all, score, train, EpochMetrics, TrainConfig, TrainOutcome};
pub(crate) use train::thread_pool;
