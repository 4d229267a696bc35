//! Capacity-equivocation bounds and desk-scale coding simulation for the
//! degraded broadcast channel with side information, confidential messages
//! and (optionally) noiseless feedback.
//!
//! The crate is organised bottom-up:
//!
//! * [`probcore`] - exact finite-alphabet distributions and information measures.
//! * [`channels`] - the two-stage channel `(X,V) -> Y -> Z` and the binary example.
//! * [`regions`] - the seven bound families, membership tests and the auxiliary search.
//! * [`codec`] - random-binning codebooks, typicality encoders/decoders, feedback keys.
//! * [`simharness`] - Monte-Carlo error rates and exact equivocation.
//!
//! Data-parallel loops go through [`exec::Exec`], which uses rayon when the
//! `parallel` feature is enabled and a plain iterator otherwise. Results never
//! depend on which path ran.

pub mod channels;
pub mod codec;
mod error;
pub mod exec;
pub mod probcore;
pub mod regions;
pub mod rng;
pub mod simharness;

pub use error::{Error, Result};
pub use exec::Exec;
