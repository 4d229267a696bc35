use rand::Rng;
use serde::{Deserialize, Serialize};

use super::codebook::Codebook;
use super::decode::{decode_rx1, decode_rx2, DecodeError};
use super::encode::{codeword_law, gp_encode, synthesize_x, CausalEncoder, EncodeError};
use super::feedback::{decrypt, encrypt, FeedbackSession};
use super::Symbol;
use crate::channels::{ChannelModel, SideInfoMode};
use crate::rng::{sample_index, stream, StreamRng, TAG_TRIAL};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub t: usize,
    pub s: usize,
}

/// A receiver's estimate; `s` is absent for receiver 2 and in the first
/// feedback block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RxOutcome {
    pub t: usize,
    pub s: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    /// 1-based.
    pub block: usize,
    pub t: usize,
    /// Confidential message; absent in the first feedback block.
    pub s: Option<usize>,
    /// Key `k*` from the previous block's feedback.
    pub key: Option<usize>,
    /// `k` bin actually used: `s`, `s + k*`, or a dummy in block 1.
    pub sent_bin: usize,
    pub u_index: usize,
    pub k_index: usize,
    pub encode_error: Option<EncodeError>,
    pub v: Vec<Symbol>,
    pub x: Vec<Symbol>,
    pub y: Vec<Symbol>,
    pub z: Vec<Symbol>,
    pub rx1: std::result::Result<RxOutcome, DecodeError>,
    pub rx2: std::result::Result<usize, DecodeError>,
}

impl BlockRecord {
    /// Receiver 1 recovered every message carried by the block and the
    /// encoder did not fail.
    pub fn rx1_correct(&self) -> bool {
        self.encode_error.is_none()
            && matches!(self.rx1, Ok(RxOutcome { t, s }) if t == self.t && s == self.s)
    }

    pub fn rx2_correct(&self) -> bool {
        self.encode_error.is_none() && self.rx2 == Ok(self.t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub mode: SideInfoMode,
    pub n: usize,
    pub blocks: Vec<BlockRecord>,
}

impl Transcript {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("transcript serialises")
    }
}

/// Output of one channel use of length `N`.
pub(crate) struct Transmission {
    pub u_index: usize,
    pub k_index: usize,
    pub encode_error: Option<EncodeError>,
    pub v: Vec<Symbol>,
    pub x: Vec<Symbol>,
    pub y: Vec<Symbol>,
    pub z: Vec<Symbol>,
}

/// Draw a state sequence, encode `(t, bin)`, and pass the result through
/// both channels. A noncausal encoder failure is recorded and the first
/// codeword of the bin is sent instead.
pub(crate) fn transmit(m: &ChannelModel, cb: &Codebook, eps: f64, t: usize, bin: usize, rng: &mut StreamRng) -> Transmission {
    let n = cb.n;
    let v: Vec<Symbol> = (0..n).map(|_| sample_index(&cb.pv, rng) as Symbol).collect();
    let (u_index, k_index, encode_error, x) = if cb.mode.is_causal() {
        let u = cb.u_index(t, 0);
        let k = cb.k_index(bin, rng.random_range(0..cb.counts.k_per_bin));
        let mut enc = CausalEncoder::new(cb, u, k);
        let x = v.iter().map(|&vi| enc.next_symbol(vi, rng).expect("within block")).collect();
        (u, k, None, x)
    } else {
        let err = gp_encode(t, bin, &v, cb, eps).err();
        let (_, u, k) = codeword_law(cb, t, bin, &v, eps)[0];
        let x = synthesize_x(cb.u_seq(u), cb.k_seq(u, k), &v, cb, rng);
        (u, k, err, x)
    };
    let (nv, ny, nz) = (m.nv(), m.ny(), m.nz());
    let q1 = m.q1().kernel();
    let q2 = m.q2().kernel();
    let y: Vec<Symbol> = x
        .iter()
        .zip(&v)
        .map(|(&xi, &vi)| {
            let r = xi as usize * nv + vi as usize;
            sample_index(&q1[r * ny..(r + 1) * ny], rng) as Symbol
        })
        .collect();
    let z = y
        .iter()
        .map(|&yi| sample_index(&q2[yi as usize * nz..(yi as usize + 1) * nz], rng) as Symbol)
        .collect();
    Transmission { u_index, k_index, encode_error, v, x, y, z }
}

/// Send `messages`, one per block, through the scheme of `cb`. In the
/// feedback schemes block 1 carries no confidential message and every later
/// block encrypts `s` with the key derived from the previous block's `y`.
pub fn run_block_markov(
    m: &ChannelModel,
    cb: &Codebook,
    eps: f64,
    messages: &[Message],
    seed: u64,
) -> Result<Transcript> {
    run_blocks(m, cb, eps, messages, &mut stream(seed, &[TAG_TRIAL]))
}

pub(crate) fn run_blocks(
    m: &ChannelModel,
    cb: &Codebook,
    eps: f64,
    messages: &[Message],
    rng: &mut StreamRng,
) -> Result<Transcript> {
    let c = cb.counts;
    if cb.mode.feedback && messages.len() < 2 {
        return Err(Error::Parameter("feedback schemes need at least two blocks".into()));
    }
    if let Some(bad) = messages.iter().find(|msg| msg.t >= c.t || msg.s >= c.s) {
        return Err(Error::Parameter(format!(
            "message ({}, {}) outside {}x{}",
            bad.t, bad.s, c.t, c.s
        )));
    }
    let mut session = FeedbackSession::new(c.s, cb.alphabets.y);
    let mut blocks = Vec::with_capacity(messages.len());
    for (i, msg) in messages.iter().enumerate() {
        let key = session.key();
        let (s, sent_bin) = match (cb.mode.feedback, key) {
            (false, _) => (Some(msg.s), msg.s),
            (true, None) => (None, rng.random_range(0..c.s)),
            (true, Some(k)) => (Some(msg.s), encrypt(msg.s, k, c.s)?),
        };
        let tx = transmit(m, cb, eps, msg.t, sent_bin, rng);
        let rx1 = decode_rx1(&tx.y, cb, eps).map(|d| {
            let s_hat = match (cb.mode.feedback, key) {
                (false, _) => Some(d.bin),
                (true, None) => None,
                // receiver 1 recomputes k* from its own previous output
                (true, Some(k)) => Some(decrypt(d.bin, k, c.s).expect("in range")),
            };
            RxOutcome { t: d.t, s: s_hat }
        });
        let rx2 = decode_rx2(&tx.z, cb, eps);
        if cb.mode.feedback {
            session.advance(tx.y.clone())?;
        }
        blocks.push(BlockRecord {
            block: i + 1,
            t: msg.t,
            s,
            key,
            sent_bin,
            u_index: tx.u_index,
            k_index: tx.k_index,
            encode_error: tx.encode_error,
            v: tx.v,
            x: tx.x,
            y: tx.y,
            z: tx.z,
            rx1,
            rx2,
        });
    }
    Ok(Transcript { mode: cb.mode, n: cb.n, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::binary_example_model;
    use crate::codec::{build_codebook, CodeParams};
    use crate::probcore::{Axis, CondPmf, FinitePmf};
    use crate::regions::AuxiliaryJoint;

    fn noiseless() -> ChannelModel {
        let ax = |n: &str| Axis::indexed(n, 2);
        let q1 = CondPmf::from_fn(vec![ax("X"), ax("V")], vec![ax("Y")], |g, o| (g[0] == o[0]) as u8 as f64).unwrap();
        let q2 = CondPmf::from_fn(vec![ax("Y")], vec![ax("Z")], |g, o| (g[0] == o[0]) as u8 as f64).unwrap();
        ChannelModel::new(q1, q2, FinitePmf::indexed(vec![0.5, 0.5]).unwrap()).unwrap()
    }

    fn params(n: usize, r1: f64, seed: u64) -> CodeParams {
        CodeParams { n_block: n, r0: 0.0, r1, gamma: 0.0, gamma1: 0.0, eps_typ: 0.01, seed }
    }

    #[test]
    fn noiseless_feedback_recovers_second_message() {
        let m = noiseless();
        // U constant, X = K
        let aux = AuxiliaryJoint::binary_example(0.5, [1.0, 1.0, 0.0, 0.0]).unwrap();
        let p = params(12, 0.25, 3);
        let cb = build_codebook(&m, &aux, &p, SideInfoMode::CAUSAL_FEEDBACK).unwrap();
        let distinct = (0..cb.counts.s).all(|a| (0..a).all(|b| cb.k_seq(0, a) != cb.k_seq(0, b)));
        assert!(distinct, "choose a seed with a collision-free codebook");
        let msgs = [Message { t: 0, s: 0 }, Message { t: 0, s: 5 }];
        let tr = run_block_markov(&m, &cb, p.eps_typ, &msgs, 1).unwrap();
        assert_eq!(tr.blocks.len(), 2);
        assert_eq!(tr.blocks[0].s, None);
        assert!(tr.blocks[0].rx1_correct());
        let b2 = &tr.blocks[1];
        assert_eq!(b2.key, Some(super::super::key_from_feedback(&tr.blocks[0].y, 2, cb.counts.s).unwrap()));
        assert_eq!(b2.rx1, Ok(RxOutcome { t: 0, s: Some(5) }));
        assert!(b2.rx2_correct());
    }

    #[test]
    fn transcript_is_deterministic() {
        let m = binary_example_model(0.1, 0.2).unwrap();
        let aux = AuxiliaryJoint::binary_example_optimum();
        let p = CodeParams { eps_typ: 0.15, ..params(8, 0.3, 4) };
        for mode in [
            SideInfoMode::NONCAUSAL,
            SideInfoMode::CAUSAL,
            SideInfoMode::NONCAUSAL_FEEDBACK,
            SideInfoMode::CAUSAL_FEEDBACK,
        ] {
            let cb = build_codebook(&m, &aux, &p, mode).unwrap();
            let msgs: Vec<Message> = (0..4).map(|i| Message { t: 0, s: i % cb.counts.s }).collect();
            let a = run_block_markov(&m, &cb, p.eps_typ, &msgs, 11).unwrap();
            let b = run_block_markov(&m, &cb, p.eps_typ, &msgs, 11).unwrap();
            assert_eq!(a.to_json(), b.to_json());
            let back: Transcript = serde_json::from_str(&a.to_json()).unwrap();
            assert_eq!(back, a);
        }
    }

    #[test]
    fn feedback_needs_two_blocks() {
        let m = binary_example_model(0.1, 0.2).unwrap();
        let aux = AuxiliaryJoint::binary_example_optimum();
        let cb = build_codebook(&m, &aux, &params(8, 0.25, 1), SideInfoMode::CAUSAL_FEEDBACK).unwrap();
        assert!(run_block_markov(&m, &cb, 0.1, &[Message { t: 0, s: 0 }], 1).is_err());
        assert!(run_block_markov(&m, &cb, 0.1, &[Message { t: 0, s: 99 }; 2], 1).is_err());
    }
}
