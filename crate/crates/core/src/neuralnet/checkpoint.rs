// SPDX-License-Identifier: Apache-2.0

//! Checkpoint files.
//!
//! ```text
//! hamlearn-checkpoint {"format_version":1,"arch":{...},"seed":7,"epoch":40,"adam":{...}}
//! param encoder.weights <values...>
//! param encoder.bias <values...>
//! ...
//! adam_m encoder.weights <values...>
//! ...
//! adam_v encoder.weights <values...>
//! ...
//! ```
//!
//! Tensors appear in [`Params::tensors`] order. Optimizer moments are present
//! only when the header carries an `adam` entry.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::network::{Network, NetworkArch, Params};
use crate::dataset::{parse_floats, write_floats};
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &str = "hamlearn-checkpoint";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct AdamHeader {
    config: AdamConfig,
    step: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    arch: NetworkArch,
    seed: u64,
    epoch: usize,
    adam: Option<AdamHeader>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub network: Network,
    pub adam: Option<AdamState>,
    pub seed: u64,
    pub epoch: usize,
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let header = Header {
        format_version: CHECKPOINT_VERSION,
        arch: ckpt.network.arch,
        seed: ckpt.seed,
        epoch: ckpt.epoch,
        adam: ckpt.adam.as_ref().map(|a| AdamHeader {
            config: a.config,
            step: a.step,
        }),
    };
    let mut w = BufWriter::new(fs::File::create(path)?);
    let json = serde_json::to_string(&header).map_err(|e| Error::Config(e.to_string()))?;
    writeln!(w, "{MAGIC} {json}")?;
    let mut blocks: Vec<(&str, &Params)> = vec![("param", &ckpt.network.params)];
    if let Some(a) = &ckpt.adam {
        blocks.push(("adam_m", &a.m));
        blocks.push(("adam_v", &a.v));
    }
    for (kind, params) in blocks {
        for (name, values) in params.tensors() {
            write!(w, "{kind} {name}")?;
            if !values.is_empty() {
                w.write_all(b" ")?;
                write_floats(&mut w, values)?;
            }
            w.write_all(b"\n")?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = fs::read_to_string(path)?;
    if !text.ends_with('\n') {
        return Err(Error::corrupt(path, "file does not end with a newline (truncated?)"));
    }
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| Error::corrupt(path, "empty file"))?;
    let json = first
        .strip_prefix(MAGIC)
        .map(str::trim_start)
        .ok_or_else(|| Error::corrupt(path, "missing checkpoint header"))?;
    let raw: serde_json::Value =
        serde_json::from_str(json).map_err(|e| Error::corrupt(path, format!("header: {e}")))?;
    let version = raw
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::corrupt(path, "header lacks format_version"))?;
    if version != u64::from(CHECKPOINT_VERSION) {
        return Err(Error::Version {
            path: path.to_path_buf(),
            found: version as u32,
            expected: CHECKPOINT_VERSION,
        });
    }
    let header: Header =
        serde_json::from_value(raw).map_err(|e| Error::corrupt(path, format!("header: {e}")))?;
    header
        .arch
        .validate()
        .map_err(|e| Error::corrupt(path, format!("header: {e}")))?;

    let mut read_block = |kind: &str, into: &mut Params| -> Result<()> {
        for (name, dst) in into.tensors_mut() {
            let line = lines
                .next()
                .ok_or_else(|| Error::corrupt(path, format!("missing {kind} {name}")))?;
            let mut parts = line.splitn(3, ' ');
            let (k, n) = (parts.next().unwrap_or(""), parts.next().unwrap_or(""));
            if k != kind || n != name {
                return Err(Error::corrupt(path, format!("expected `{kind} {name}`, found `{k} {n}`")));
            }
            let values = parse_floats(parts.next().unwrap_or(""))
                .map_err(|e| Error::corrupt(path, format!("{kind} {name}: {e}")))?;
            if values.len() != dst.len() {
                return Err(Error::corrupt(
                    path,
                    format!("{kind} {name} has {} values, expected {}", values.len(), dst.len()),
                ));
            }
            dst.copy_from_slice(&values);
        }
        Ok(())
    };

    let mut params = Params::zeros(&header.arch);
    read_block("param", &mut params)?;
    let adam = match header.adam {
        Some(h) => {
            let mut st = AdamState::new(&header.arch, h.config);
            st.step = h.step;
            read_block("adam_m", &mut st.m)?;
            read_block("adam_v", &mut st.v)?;
            Some(st)
        }
        None => None,
    };
    if lines.next().is_some() {
        return Err(Error::corrupt(path, "trailing data after last tensor"));
    }
    Ok(Checkpoint {
        network: Network {
            arch: header.arch,
            params,
        },
        adam,
        seed: header.seed,
        epoch: header.epoch,
    })
}
