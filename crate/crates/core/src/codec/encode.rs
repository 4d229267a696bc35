use rand::Rng;
use serde::{Deserialize, Serialize};

use super::codebook::Codebook;
use super::Symbol;
use crate::rng::sample_index;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
pub enum EncodeError {
    #[error("no u sequence in the bin is typical with the state")]
    NoTypicalU,
    #[error("no k sequence in the bin is typical with the state")]
    NoTypicalK,
}

/// Gel'fand-Pinsker search: the smallest-index `u` in bin `t` typical with
/// `v`, then the smallest-index `k` in bin `bin` of that `u`'s codebook
/// typical with `(u, v)`. Returns `(u_index, k_index)` into the codebook.
pub fn gp_encode(
    t: usize,
    bin: usize,
    v: &[Symbol],
    cb: &Codebook,
    eps: f64,
) -> Result<(usize, usize), EncodeError> {
    let u_order: Vec<usize> = (0..cb.counts.u_per_bin).collect();
    let k_order: Vec<usize> = (0..cb.counts.k_per_bin).collect();
    gp_encode_scan(t, bin, v, cb, eps, &u_order, &k_order)
}

/// As [`gp_encode`], visiting candidates in the given within-bin order. The
/// result does not depend on the order.
pub(crate) fn gp_encode_scan(
    t: usize,
    bin: usize,
    v: &[Symbol],
    cb: &Codebook,
    eps: f64,
    u_order: &[usize],
    k_order: &[usize],
) -> Result<(usize, usize), EncodeError> {
    let obs_v: Vec<usize> = v.iter().map(|&x| x as usize).collect();
    let u_idx = u_order
        .iter()
        .map(|&i| cb.u_index(t, i))
        .filter(|&ui| cb.tables.enc_u.is_typical(cb.u_seq(ui), &obs_v, eps))
        .min()
        .ok_or(EncodeError::NoTypicalU)?;
    let nv = cb.alphabets.v;
    let obs_uv: Vec<usize> = cb.u_seq(u_idx).iter().zip(v).map(|(&u, &v)| u as usize * nv + v as usize).collect();
    let k_idx = k_order
        .iter()
        .map(|&i| cb.k_index(bin, i))
        .filter(|&ki| cb.tables.enc_k.is_typical(cb.k_seq(u_idx, ki), &obs_uv, eps))
        .min()
        .ok_or(EncodeError::NoTypicalK)?;
    Ok((u_idx, k_idx))
}

/// Law of the transmitted codeword pair given messages and state:
/// `(probability, u_index, k_index)`. Noncausal schemes are deterministic
/// (an encoder failure falls back to the first sequence of the bin);
/// causal schemes pick the `k` uniformly inside its bin.
pub fn codeword_law(cb: &Codebook, t: usize, bin: usize, v: &[Symbol], eps: f64) -> Vec<(f64, usize, usize)> {
    if cb.mode.is_causal() {
        let u = cb.u_index(t, 0);
        let w = 1.0 / cb.counts.k_per_bin as f64;
        return (0..cb.counts.k_per_bin).map(|i| (w, u, cb.k_index(bin, i))).collect();
    }
    let (u, k) = match gp_encode(t, bin, v, cb, eps) {
        Ok(pair) => pair,
        Err(EncodeError::NoTypicalK) => {
            let u = first_typical_u(t, v, cb, eps).expect("u stage succeeded");
            (u, cb.k_index(bin, 0))
        }
        Err(EncodeError::NoTypicalU) => (cb.u_index(t, 0), cb.k_index(bin, 0)),
    };
    vec![(1.0, u, k)]
}

fn first_typical_u(t: usize, v: &[Symbol], cb: &Codebook, eps: f64) -> Option<usize> {
    let obs_v: Vec<usize> = v.iter().map(|&x| x as usize).collect();
    (0..cb.counts.u_per_bin)
        .map(|i| cb.u_index(t, i))
        .find(|&ui| cb.tables.enc_u.is_typical(cb.u_seq(ui), &obs_v, eps))
}

/// Componentwise draws `x_i ~ p(x | u_i, k_i, v_i)`.
pub fn synthesize_x<R: Rng + ?Sized>(u: &[Symbol], k: &[Symbol], v: &[Symbol], cb: &Codebook, rng: &mut R) -> Vec<Symbol> {
    assert!(u.len() == k.len() && k.len() == v.len(), "sequence lengths differ");
    u.iter()
        .zip(k)
        .zip(v)
        .map(|((&ui, &ki), &vi)| sample_index(cb.x_row(ui, ki, vi), rng) as Symbol)
        .collect()
}

/// Symbol-by-symbol encoder for the causal schemes. It sees the state one
/// symbol at a time and never the future.
#[derive(Debug)]
pub struct CausalEncoder<'a> {
    cb: &'a Codebook,
    u: &'a [Symbol],
    k: &'a [Symbol],
    pos: usize,
}

impl<'a> CausalEncoder<'a> {
    pub fn new(cb: &'a Codebook, u_idx: usize, k_idx: usize) -> Self {
        Self { cb, u: cb.u_seq(u_idx), k: cb.k_seq(u_idx, k_idx), pos: 0 }
    }

    /// Emit `x_i` given the current state symbol `v_i`.
    pub fn next_symbol<R: Rng + ?Sized>(&mut self, v: Symbol, rng: &mut R) -> Option<Symbol> {
        let i = self.pos;
        if i >= self.u.len() {
            return None;
        }
        self.pos += 1;
        Some(sample_index(self.cb.x_row(self.u[i], self.k[i], v), rng) as Symbol)
    }

    pub fn position(&self) -> usize {
        self.pos
    }
}
