use serde::{Deserialize, Serialize};

use super::params::CodeParams;
use super::typical::CondTable;
use super::Symbol;
use crate::channels::{ChannelModel, SideInfoMode, V, Y, Z};
use crate::probcore::{conditional_mutual_information, mutual_information, JointPmf};
use crate::regions::{extend_to_full_joint, AuxiliaryJoint, K, U};
use crate::rng::{sample_index, stream, TAG_CODEBOOK};
use crate::{Error, Result};

/// Refuse codebooks with more symbols than this.
const MAX_CODEBOOK_SYMBOLS: usize = 1 << 27;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabets {
    pub u: usize,
    pub k: usize,
    pub x: usize,
    pub v: usize,
    pub y: usize,
    pub z: usize,
}

/// Codebook populations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    /// Common messages = number of `u` bins.
    pub t: usize,
    pub u_per_bin: usize,
    /// Confidential messages (or ciphertexts) = number of `k` bins per `u`.
    pub s: usize,
    pub k_per_bin: usize,
    /// Subbins per `k` bin; 1 when the scheme has no double binning.
    pub subbins: usize,
}

impl Counts {
    pub fn u_total(&self) -> usize {
        self.t * self.u_per_bin
    }

    pub fn k_total(&self) -> usize {
        self.s * self.k_per_bin
    }

    pub fn subbin_size(&self) -> usize {
        self.k_per_bin.div_ceil(self.subbins)
    }
}

/// Information quantities of the auxiliary joint that sized the codebook.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Targets {
    pub i_uv: f64,
    pub i_kv_given_u: f64,
    pub i_kz_given_u: f64,
}

/// Conditional laws used by the typicality encoder and decoders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tables {
    /// `u | v`
    pub enc_u: CondTable,
    /// `k | (u, v)`
    pub enc_k: CondTable,
    /// `u | y`
    pub dec1_u: CondTable,
    /// `k | (u, y)`
    pub dec1_k: CondTable,
    /// `u | z`
    pub dec2_u: CondTable,
}

/// A fixed random codebook. `u` sequences are laid out bin by bin, and each
/// `u` owns a `k` codebook laid out bin by bin, subbins contiguous within a
/// bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub mode: SideInfoMode,
    pub n: usize,
    pub seed: u64,
    pub alphabets: Alphabets,
    pub counts: Counts,
    pub targets: Targets,
    pub tables: Tables,
    /// `p(x | u, k, v)`, rows indexed `(u * |K| + k) * |V| + v`.
    pub x_kernel: Vec<f64>,
    pub pv: Vec<f64>,
    u_seqs: Vec<Vec<Symbol>>,
    k_seqs: Vec<Vec<Vec<Symbol>>>,
}

impl Codebook {
    pub fn u_index(&self, t: usize, i: usize) -> usize {
        t * self.counts.u_per_bin + i
    }

    pub fn u_bin(&self, u_idx: usize) -> usize {
        u_idx / self.counts.u_per_bin
    }

    pub fn k_index(&self, bin: usize, i: usize) -> usize {
        bin * self.counts.k_per_bin + i
    }

    pub fn k_bin(&self, k_idx: usize) -> usize {
        k_idx / self.counts.k_per_bin
    }

    /// Subbin label of a `k` codeword (bookkeeping only, never transmitted).
    pub fn subbin(&self, k_idx: usize) -> usize {
        (k_idx % self.counts.k_per_bin) / self.counts.subbin_size()
    }

    pub fn u_seq(&self, u_idx: usize) -> &[Symbol] {
        &self.u_seqs[u_idx]
    }

    pub fn k_seq(&self, u_idx: usize, k_idx: usize) -> &[Symbol] {
        &self.k_seqs[u_idx][k_idx]
    }

    pub fn x_row(&self, u: Symbol, k: Symbol, v: Symbol) -> &[f64] {
        let a = self.alphabets;
        let r = (u as usize * a.k + k as usize) * a.v + v as usize;
        &self.x_kernel[r * a.x..(r + 1) * a.x]
    }

    /// Replace the sequences and populations, keeping the laws. Used to
    /// engineer small codebooks.
    pub fn with_sequences(
        mut self,
        counts: Counts,
        u_seqs: Vec<Vec<Symbol>>,
        k_seqs: Vec<Vec<Vec<Symbol>>>,
    ) -> Result<Self> {
        if counts.t == 0 || counts.u_per_bin == 0 || counts.s == 0 || counts.k_per_bin == 0 {
            return Err(Error::Parameter("codebook populations must be positive".into()));
        }
        if counts.subbins == 0 || counts.subbins > counts.k_per_bin {
            return Err(Error::Parameter("subbin count must be in 1..=k_per_bin".into()));
        }
        if u_seqs.len() != counts.u_total() || k_seqs.len() != counts.u_total() {
            return Err(Error::Parameter("u sequence count does not match populations".into()));
        }
        let a = self.alphabets;
        let ok = |s: &Vec<Symbol>, size: usize| s.len() == self.n && s.iter().all(|&x| (x as usize) < size);
        for (u, ks) in u_seqs.iter().zip(&k_seqs) {
            if !ok(u, a.u) || ks.len() != counts.k_total() || !ks.iter().all(|k| ok(k, a.k)) {
                return Err(Error::Parameter("malformed engineered codebook".into()));
            }
        }
        self.counts = counts;
        self.u_seqs = u_seqs;
        self.k_seqs = k_seqs;
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("codebook serialises")
    }
}

/// Generate the codebook of scheme `mode` for auxiliary joint `aux`.
///
/// | mode | `u` bins × per bin | `k` bins × per bin | subbins |
/// |------|--------------------|--------------------|---------|
/// | n    | `2^{NR0}` × `2^{N(I(U;V)+γ)}` | `2^{NR1}` × `2^{N(I(K;V\|U)+γ1)}` | `2^{N(max(I(K;V\|U),I(K;Z\|U))-I(K;Z\|U))}` |
/// | c    | `2^{NR0}` × 1 | `2^{NR1}` × `2^{Nγ1}` | 1 |
/// | nf   | as n | `2^{NR1}` × `2^{N(I(K;V\|U)+γ1)}` | 1 |
/// | cf   | as c | `2^{NR1}` × 1 | 1 |
pub fn build_codebook(
    m: &ChannelModel,
    aux: &AuxiliaryJoint,
    params: &CodeParams,
    mode: SideInfoMode,
) -> Result<Codebook> {
    params.validate()?;
    if aux.has_a() {
        return Err(Error::Usage("the auxiliary A has no encoder role; drop it before coding".into()));
    }
    let aux = aux.with_mode(if mode.is_causal() { SideInfoMode::CAUSAL } else { aux.mode() })?;
    let full = extend_to_full_joint(&aux, m)?;
    let targets = Targets {
        i_uv: mutual_information(&full, &[U], &[V])?,
        i_kv_given_u: conditional_mutual_information(&full, &[K], &[V], &[U])?,
        i_kz_given_u: conditional_mutual_information(&full, &[K], &[Z], &[U])?,
    };
    let counts = counts_for(params, mode, &targets)?;
    let dims = aux.dims();
    let alphabets = Alphabets { u: dims.u, k: dims.k, x: m.nx(), v: m.nv(), y: m.ny(), z: m.nz() };
    if alphabets.u.max(alphabets.k) > Symbol::MAX as usize {
        return Err(Error::Parameter("auxiliary alphabet too large".into()));
    }
    let symbols = counts.u_total().saturating_mul(1 + counts.k_total()).saturating_mul(params.n_block);
    if symbols > MAX_CODEBOOK_SYMBOLS {
        return Err(Error::Parameter(format!("codebook of {symbols} symbols exceeds the size limit")));
    }

    let tables = tables_for(&full)?;
    let pu = full.marginal_masses(&[full.axis_index(U)?]);
    let uk = full.marginal_masses(&full.axis_indices(&[U, K])?);
    let n = params.n_block;
    let mut rng = stream(params.seed, &[TAG_CODEBOOK]);
    let mut u_seqs = Vec::with_capacity(counts.u_total());
    let mut k_seqs = Vec::with_capacity(counts.u_total());
    for _ in 0..counts.u_total() {
        let u: Vec<Symbol> = (0..n).map(|_| sample_index(&pu, &mut rng) as Symbol).collect();
        let ks = (0..counts.k_total())
            .map(|_| {
                u.iter()
                    .map(|&ui| {
                        let row = &uk[ui as usize * dims.k..(ui as usize + 1) * dims.k];
                        sample_index(row, &mut rng) as Symbol
                    })
                    .collect()
            })
            .collect();
        u_seqs.push(u);
        k_seqs.push(ks);
    }

    Ok(Codebook {
        mode,
        n,
        seed: params.seed,
        alphabets,
        counts,
        targets,
        tables,
        x_kernel: aux.x_kernel()?.kernel().to_vec(),
        pv: m.pv().mass().to_vec(),
        u_seqs,
        k_seqs,
    })
}

fn counts_for(p: &CodeParams, mode: SideInfoMode, tg: &Targets) -> Result<Counts> {
    let t = p.pop(p.r0)?;
    let s = p.pop(p.r1)?;
    let noncausal = !mode.is_causal();
    let u_per_bin = if noncausal { p.pop(tg.i_uv + p.gamma)? } else { 1 };
    let k_per_bin = match (noncausal, mode.feedback) {
        (true, _) => p.pop(tg.i_kv_given_u + p.gamma1)?,
        (false, false) => p.pop(p.gamma1)?,
        (false, true) => 1,
    };
    let subbins = if noncausal && !mode.feedback {
        let extra = tg.i_kv_given_u.max(tg.i_kz_given_u) - tg.i_kz_given_u;
        p.pop(extra)?.clamp(1, k_per_bin)
    } else {
        1
    };
    Ok(Counts { t, u_per_bin, s, k_per_bin, subbins })
}

fn tables_for(full: &JointPmf) -> Result<Tables> {
    Ok(Tables {
        enc_u: CondTable::from_joint(full, U, &[V])?,
        enc_k: CondTable::from_joint(full, K, &[U, V])?,
        dec1_u: CondTable::from_joint(full, U, &[Y])?,
        dec1_k: CondTable::from_joint(full, K, &[U, Y])?,
        dec2_u: CondTable::from_joint(full, U, &[Z])?,
    })
}
