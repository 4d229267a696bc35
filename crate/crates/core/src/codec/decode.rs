use serde::{Deserialize, Serialize};

use super::codebook::Codebook;
use super::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    U,
    K,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Failure {
    /// No candidate is typical.
    Absent,
    /// Typical candidates disagree on the message index.
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("decoding failed at stage {stage:?}: {failure:?}")]
pub struct DecodeError {
    pub stage: Stage,
    pub failure: Failure,
}

impl DecodeError {
    fn new(stage: Stage, failure: Failure) -> Self {
        Self { stage, failure }
    }
}

/// Receiver 1's estimate: common message and `k` bin index (the
/// confidential message, or the ciphertext in the feedback schemes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rx1Decision {
    pub t: usize,
    pub bin: usize,
}

/// Two-stage typicality decoding at receiver 1.
///
/// Stage U collects every `u` typical with `y`; they must all lie in one
/// bin `t`. Stage K collects every `k`, across the codebooks of those `u`,
/// typical with `(u, y)`; they must all lie in one bin.
pub fn decode_rx1(y: &[Symbol], cb: &Codebook, eps: f64) -> Result<Rx1Decision, DecodeError> {
    let obs_y: Vec<usize> = y.iter().map(|&s| s as usize).collect();
    let us: Vec<usize> = (0..cb.counts.u_total())
        .filter(|&ui| cb.tables.dec1_u.is_typical(cb.u_seq(ui), &obs_y, eps))
        .collect();
    let t = unique(us.iter().map(|&ui| cb.u_bin(ui))).map_err(|f| DecodeError::new(Stage::U, f))?;

    let ny = cb.alphabets.y;
    let mut bins = Vec::new();
    for &ui in &us {
        let obs_uy: Vec<usize> = cb.u_seq(ui).iter().zip(y).map(|(&u, &y)| u as usize * ny + y as usize).collect();
        bins.extend(
            (0..cb.counts.k_total())
                .filter(|&ki| cb.tables.dec1_k.is_typical(cb.k_seq(ui, ki), &obs_uy, eps))
                .map(|ki| cb.k_bin(ki)),
        );
    }
    let bin = unique(bins.into_iter()).map_err(|f| DecodeError::new(Stage::K, f))?;
    Ok(Rx1Decision { t, bin })
}

/// Typicality decoding of the common message at receiver 2. Several typical
/// `u` sequences are accepted when they share one bin.
pub fn decode_rx2(z: &[Symbol], cb: &Codebook, eps: f64) -> Result<usize, DecodeError> {
    let obs_z: Vec<usize> = z.iter().map(|&s| s as usize).collect();
    let bins = (0..cb.counts.u_total())
        .filter(|&ui| cb.tables.dec2_u.is_typical(cb.u_seq(ui), &obs_z, eps))
        .map(|ui| cb.u_bin(ui));
    unique(bins).map_err(|f| DecodeError::new(Stage::U, f))
}

fn unique(mut it: impl Iterator<Item = usize>) -> Result<usize, Failure> {
    let first = it.next().ok_or(Failure::Absent)?;
    if it.all(|x| x == first) {
        Ok(first)
    } else {
        Err(Failure::Ambiguous)
    }
}
