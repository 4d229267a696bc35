use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exponents above this are refused: the codebook would not fit in memory.
const MAX_POPULATION_BITS: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    /// Blocklength `N`.
    pub n_block: usize,
    /// Common-message rate, bits per symbol.
    pub r0: f64,
    /// Confidential-message rate, bits per symbol.
    pub r1: f64,
    /// Slack rate of the `U` covering bins.
    pub gamma: f64,
    /// Slack rate of the `K` bins.
    pub gamma1: f64,
    /// L-infinity tolerance of the typicality tests.
    pub eps_typ: f64,
    pub seed: u64,
}

impl CodeParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_block == 0 {
            return Err(Error::Parameter("blocklength must be at least 1".into()));
        }
        for (name, r) in [("r0", self.r0), ("r1", self.r1), ("gamma", self.gamma), ("gamma1", self.gamma1)] {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::Parameter(format!("{name} = {r} must be finite and nonnegative")));
            }
        }
        if !(self.eps_typ > 0.0 && self.eps_typ.is_finite()) {
            return Err(Error::Parameter(format!("eps_typ = {} must be positive", self.eps_typ)));
        }
        Ok(())
    }

    /// `population(N * rate)`
    pub fn pop(&self, rate: f64) -> Result<usize> {
        population(self.n_block as f64 * rate)
    }
}

/// `round(2^bits)` with a floor of 1.
pub fn population(bits: f64) -> Result<usize> {
    if bits.is_nan() {
        return Err(Error::Parameter("population exponent is NaN".into()));
    }
    if bits > MAX_POPULATION_BITS {
        return Err(Error::Parameter(format!("population 2^{bits:.2} is too large")));
    }
    Ok((bits.exp2().round() as usize).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> CodeParams {
        CodeParams { n_block: 8, r0: 0.0, r1: 0.25, gamma: 0.0, gamma1: 0.1, eps_typ: 0.1, seed: 1 }
    }

    #[test]
    fn population_rounding() {
        assert_eq!(population(0.0).unwrap(), 1);
        assert_eq!(population(-3.0).unwrap(), 1);
        assert_eq!(population(3.0).unwrap(), 8);
        assert_eq!(population(3.4).unwrap(), 11);
        assert!(population(64.0).is_err());
        assert_eq!(params().pop(0.25).unwrap(), 4);
    }

    #[test]
    fn validation() {
        assert!(params().validate().is_ok());
        assert!(CodeParams { n_block: 0, ..params() }.validate().is_err());
        assert!(CodeParams { r1: -0.1, ..params() }.validate().is_err());
        assert!(CodeParams { eps_typ: 0.0, ..params() }.validate().is_err());
    }
}
