//! Random-binning codebooks, typicality encoders and decoders, and the
//! block-Markov feedback key machinery for the four coding schemes.

mod block;
mod calibrate;
mod codebook;
mod decode;
mod encode;
mod feedback;
mod params;
mod typical;

pub(crate) use block::run_blocks;
pub use block::{run_block_markov, BlockRecord, Message, RxOutcome, Transcript};
pub use calibrate::calibrate_eps;
pub use codebook::{build_codebook, Alphabets, Codebook, Counts, Tables, Targets};
pub use decode::{decode_rx1, decode_rx2, DecodeError, Failure, Rx1Decision, Stage};
pub use encode::{codeword_law, gp_encode, synthesize_x, CausalEncoder, EncodeError};
pub use feedback::{decrypt, encrypt, key_from_feedback, FeedbackSession};
pub use params::{population, CodeParams};
pub use typical::CondTable;

/// Symbols of all sequences are alphabet indices.
pub type Symbol = u32;
