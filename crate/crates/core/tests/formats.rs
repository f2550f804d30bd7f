// SPDX-License-Identifier: Apache-2.0

mod common;

use hamlearn::neuralnet::{load_checkpoint, save_checkpoint, Checkpoint};

#[test]
fn datasets_reload_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    assert!(common::dataset_round_trip(dir.path()));
}

#[test]
fn checkpoints_reload_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    assert!(common::checkpoint_round_trip(dir.path()));
}

#[test]
fn damaged_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let failures = common::corrupted_files_rejected(dir.path());
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn checkpoint_without_optimizer_state() {
    let dir = tempfile::tempdir().unwrap();
    let mut ckpt = common::sample_checkpoint();
    ckpt.adam = None;
    let path = dir.path().join("weights.ckpt");
    save_checkpoint(&path, &ckpt).unwrap();
    let back: Checkpoint = load_checkpoint(&path).unwrap();
    assert_eq!(back, ckpt);
}

#[test]
fn checkpoint_tensor_length_mismatch_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ckpt");
    save_checkpoint(&path, &common::sample_checkpoint()).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let damaged: Vec<String> = text
        .lines()
        .map(|l| {
            if l.starts_with("param encoder.bias ") {
                l.rsplit_once(' ').unwrap().0.to_string()
            } else {
                l.to_string()
            }
        })
        .collect();
    std::fs::write(&path, damaged.join("\n") + "\n").unwrap();
    let err = load_checkpoint(&path).unwrap_err().to_string();
    assert!(err.contains("encoder.bias"), "{err}");
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_checkpoint(std::path::Path::new("/nonexistent/x.ckpt")).unwrap_err();
    assert!(matches!(err, hamlearn::Error::Io(_)));
}
