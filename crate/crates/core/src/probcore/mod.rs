//! Exact finite-alphabet probability and information measures.
//!
//! All logarithms are base 2 and `0 log 0 = 0`. Distributions are dense and
//! immutable once built.

mod measures;
mod pmf;

pub use measures::{
    binary_entropy, conditional_mutual_information, entropy, entropy_bits, is_markov_chain,
    mutual_information,
};
pub use pmf::{Axis, CondPmf, FinitePmf, JointPmf};

/// Normalisation tolerance applied on construction.
pub const NORM_TOL: f64 = 1e-12;
/// Negative information values down to this magnitude are rounding noise.
pub const CLAMP_TOL: f64 = 1e-12;

/// Compensated sum; keeps normalisation checks meaningful on large joints.
pub(crate) fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}
