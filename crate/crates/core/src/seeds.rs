// SPDX-License-Identifier: Apache-2.0

//! Seed derivation. Every random stream in the crate is keyed from a single
//! master seed through these mixes, so results do not depend on the order in
//! which work items are scheduled.

/// One round of the splitmix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of work item `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

/// Named sub-stream of `master` (e.g. "test", "init").
pub fn derive_named(master: u64, name: &str) -> u64 {
    // FNV-1a of the label, then mixed with the master seed.
    let tag = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    });
    derive_seed(master, tag)
}
