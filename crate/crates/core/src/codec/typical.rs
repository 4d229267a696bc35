use serde::{Deserialize, Serialize};

use super::Symbol;
use crate::probcore::JointPmf;
use crate::Result;

/// Conditional law `p(c | o)` of a candidate symbol given an observed
/// symbol tuple, used for conditional strong typicality.
///
/// A candidate sequence `c^N` is typical with an observed sequence `o^N`
/// when every observed symbol has positive probability and
/// `|N(c,o) - N(o) p(c|o)| / N <= eps` for every pair `(c, o)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondTable {
    n_obs: usize,
    n_cand: usize,
    /// row-major `[o][c]`
    p: Vec<f64>,
    support: Vec<bool>,
}

impl CondTable {
    pub fn new(n_obs: usize, n_cand: usize, joint_oc: &[f64]) -> Self {
        let mut p = vec![0.0; n_obs * n_cand];
        let mut support = vec![false; n_obs];
        for o in 0..n_obs {
            let row = &joint_oc[o * n_cand..(o + 1) * n_cand];
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                support[o] = true;
                for c in 0..n_cand {
                    p[o * n_cand + c] = row[c] / s;
                }
            }
        }
        Self { n_obs, n_cand, p, support }
    }

    /// Build from a joint by naming the candidate axis and the observed
    /// axes (observed index is row-major over `obs` in the listed order).
    pub fn from_joint(j: &JointPmf, cand: &str, obs: &[&str]) -> Result<Self> {
        let mut names = obs.to_vec();
        names.push(cand);
        let keep = j.axis_indices(&names)?;
        let mass = j.marginal_masses(&keep);
        let n_cand = j.axis(cand)?.len();
        Ok(Self::new(mass.len() / n_cand, n_cand, &mass))
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn n_cand(&self) -> usize {
        self.n_cand
    }

    pub fn prob(&self, o: usize, c: usize) -> f64 {
        self.p[o * self.n_cand + c]
    }

    /// `max |N(c,o) - N(o) p(c|o)| / N`, infinite when an observed symbol
    /// has zero probability.
    pub fn deviation(&self, cand: &[Symbol], obs: &[usize]) -> f64 {
        let n = cand.len();
        if n == 0 {
            return 0.0;
        }
        let mut counts = vec![0u32; self.n_obs * self.n_cand];
        let mut obs_counts = vec![0u32; self.n_obs];
        for (&c, &o) in cand.iter().zip(obs) {
            if !self.support[o] {
                return f64::INFINITY;
            }
            counts[o * self.n_cand + c as usize] += 1;
            obs_counts[o] += 1;
        }
        let mut worst = 0.0f64;
        for o in 0..self.n_obs {
            let no = obs_counts[o] as f64;
            for c in 0..self.n_cand {
                let dev = counts[o * self.n_cand + c] as f64 - no * self.p[o * self.n_cand + c];
                worst = worst.max(dev.abs());
            }
        }
        worst / n as f64
    }

    pub fn is_typical(&self, cand: &[Symbol], obs: &[usize], eps: f64) -> bool {
        debug_assert_eq!(cand.len(), obs.len());
        let n = cand.len();
        if n == 0 {
            return true;
        }
        let mut counts = vec![0u32; self.n_obs * self.n_cand];
        let mut obs_counts = vec![0u32; self.n_obs];
        for (&c, &o) in cand.iter().zip(obs) {
            if !self.support[o] {
                return false;
            }
            counts[o * self.n_cand + c as usize] += 1;
            obs_counts[o] += 1;
        }
        let limit = eps * n as f64;
        for o in 0..self.n_obs {
            if obs_counts[o] == 0 {
                continue;
            }
            let no = obs_counts[o] as f64;
            for c in 0..self.n_cand {
                let dev = counts[o * self.n_cand + c] as f64 - no * self.p[o * self.n_cand + c];
                if dev.abs() > limit {
                    return false;
                }
            }
        }
        true
    }
}
