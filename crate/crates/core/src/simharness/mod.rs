//! Monte-Carlo error rates and exact equivocation of the coding schemes.

mod equivocation;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use equivocation::{exact_equivocation, DEFAULT_ENUMERATION_CAP};

use crate::channels::{ChannelModel, SideInfoMode, Y, Z};
use crate::codec::{build_codebook, run_blocks, CodeParams, Codebook, Message, Symbol};
use crate::regions::{extend_to_full_joint, AuxiliaryJoint};
use crate::rng::{sample_index, stream, TAG_TRIAL};
use crate::{Error, Exec, Result};

/// Normal-approximation half-widths are quoted only from this many samples.
pub const MIN_SAMPLES_FOR_CI: usize = 100;
const Z_95: f64 = 1.959_963_984_540_054;

pub const CSV_HEADER: &str = "scheme,N,trials,pe1,pe1_ci,pe2,pe2_ci,delta_exact,hyz";

/// Everything that determines a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scheme: SideInfoMode,
    pub params: CodeParams,
    pub trials: usize,
    /// Blocks per trial. Feedback schemes need at least 2.
    pub blocks: usize,
    /// Seed of the trial streams (the codebook uses `params.seed`).
    pub seed: u64,
    /// Enumeration limit for the exact equivocation; 0 skips it.
    pub enumeration_cap: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    /// Number of blocks over which the error rates are measured.
    pub blocks_evaluated: usize,
    pub pe1: f64,
    /// 95% half-width, present from [`MIN_SAMPLES_FOR_CI`] blocks.
    pub pe1_ci: Option<f64>,
    pub pe2: f64,
    pub pe2_ci: Option<f64>,
    pub encoder_failures: usize,
    /// `H(S | Z^N) / N` for the codebook, when enumerable.
    pub delta_exact: Option<f64>,
    /// `min{log|S| / N, H(Y|Z)}`, the key-rate target of the feedback schemes.
    pub delta_lower_key: f64,
    /// Single-letter `H(Y|Z)` of the auxiliary joint.
    pub hyz: f64,
    pub codebook_counts: crate::codec::Counts,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.config.scheme.tag(),
            self.config.params.n_block,
            self.config.trials,
            self.pe1,
            opt(self.pe1_ci),
            self.pe2,
            opt(self.pe2_ci),
            opt(self.delta_exact),
            self.hyz
        )
    }
}

/// 95% normal-approximation half-width of a proportion.
pub fn binomial_half_width(p: f64, n: usize) -> Option<f64> {
    (n >= MIN_SAMPLES_FOR_CI).then(|| Z_95 * (p * (1.0 - p) / n as f64).sqrt())
}

/// Build the codebook and run `trials` independent trials.
pub fn run_trials(m: &ChannelModel, aux: &AuxiliaryJoint, cfg: &SimConfig, exec: Exec) -> Result<SimReport> {
    let cb = build_codebook(m, aux, &cfg.params, cfg.scheme)?;
    run_trials_with_codebook(m, aux, &cb, cfg, exec)
}

/// Trials on a given codebook. Trial `i` draws its messages, states and
/// channel noise from its own stream, so the report does not depend on
/// `exec`.
pub fn run_trials_with_codebook(
    m: &ChannelModel,
    aux: &AuxiliaryJoint,
    cb: &Codebook,
    cfg: &SimConfig,
    exec: Exec,
) -> Result<SimReport> {
    if cfg.trials == 0 || cfg.blocks == 0 {
        return Err(Error::Parameter("trials and blocks must be positive".into()));
    }
    if cfg.scheme != cb.mode {
        return Err(Error::Parameter("codebook was built for a different scheme".into()));
    }
    let eps = cfg.params.eps_typ;
    let counts = cb.counts;
    let tallies = exec.map_indexed(cfg.trials, |i| -> Result<[usize; 3]> {
        let mut rng = stream(cfg.seed, &[TAG_TRIAL, i as u64]);
        let msgs: Vec<Message> = (0..cfg.blocks)
            .map(|_| Message { t: rng.random_range(0..counts.t), s: rng.random_range(0..counts.s) })
            .collect();
        let tr = run_blocks(m, cb, eps, &msgs, &mut rng)?;
        let mut tally = [0usize; 3];
        for b in &tr.blocks {
            tally[0] += !b.rx1_correct() as usize;
            tally[1] += !b.rx2_correct() as usize;
            tally[2] += b.encode_error.is_some() as usize;
        }
        Ok(tally)
    });
    let mut totals = [0usize; 3];
    for t in tallies {
        let t = t?;
        totals.iter_mut().zip(t).for_each(|(a, b)| *a += b);
    }
    let blocks = cfg.trials * cfg.blocks;
    let pe1 = totals[0] as f64 / blocks as f64;
    let pe2 = totals[1] as f64 / blocks as f64;
    let delta_exact = if cfg.enumeration_cap == 0 {
        None
    } else {
        match exact_equivocation(cb, m, eps, cfg.enumeration_cap) {
            Ok(d) => Some(d),
            Err(Error::EnumerationTooLarge { .. }) => None,
            Err(e) => return Err(e),
        }
    };
    let hyz = conditional_output_entropy_rate(m, aux)?;
    let key_rate = (counts.s as f64).log2() / cb.n as f64;
    Ok(SimReport {
        config: cfg.clone(),
        blocks_evaluated: blocks,
        pe1,
        pe1_ci: binomial_half_width(pe1, blocks),
        pe2,
        pe2_ci: binomial_half_width(pe2, blocks),
        encoder_failures: totals[2],
        delta_exact,
        delta_lower_key: key_rate.min(hyz),
        hyz,
        codebook_counts: counts,
    })
}

/// Exact single-letter `H(Y|Z)` of the auxiliary joint through the channel.
pub fn conditional_output_entropy_rate(m: &ChannelModel, aux: &AuxiliaryJoint) -> Result<f64> {
    let full = extend_to_full_joint(aux, m)?;
    Ok((full.entropy_of(&[Y, Z])? - full.entropy_of(&[Z])?).max(0.0))
}

/// Plug-in estimate of `H(Y|Z)` from paired output sequences.
pub fn empirical_conditional_entropy(y: &[Symbol], z: &[Symbol], ny: usize, nz: usize) -> f64 {
    assert_eq!(y.len(), z.len(), "sequence lengths differ");
    if y.is_empty() {
        return 0.0;
    }
    let mut joint = vec![0usize; ny * nz];
    let mut zc = vec![0usize; nz];
    for (&a, &b) in y.iter().zip(z) {
        joint[a as usize * nz + b as usize] += 1;
        zc[b as usize] += 1;
    }
    let n = y.len() as f64;
    let h = |c: &[usize]| -> f64 {
        c.iter()
            .filter(|&&x| x > 0)
            .map(|&x| {
                let p = x as f64 / n;
                -p * p.log2()
            })
            .sum()
    };
    (h(&joint) - h(&zc)).max(0.0)
}

/// `H(Y|Z)` estimated from `samples` i.i.d. draws of the full joint.
pub fn sampled_conditional_output_entropy(
    m: &ChannelModel,
    aux: &AuxiliaryJoint,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let full = extend_to_full_joint(aux, m)?;
    let keep = full.axis_indices(&[Y, Z])?;
    let pyz = full.marginal_masses(&keep);
    let nz = m.nz();
    let mut rng = stream(seed, &[TAG_TRIAL]);
    let (y, z): (Vec<Symbol>, Vec<Symbol>) = (0..samples)
        .map(|_| {
            let c = sample_index(&pyz, &mut rng);
            ((c / nz) as Symbol, (c % nz) as Symbol)
        })
        .unzip();
    Ok(empirical_conditional_entropy(&y, &z, m.ny(), nz))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::binary_example_model;
    use crate::probcore::{binary_entropy, Axis, CondPmf, FinitePmf};

    fn noiseless() -> ChannelModel {
        let ax = |n: &str| Axis::indexed(n, 2);
        let q1 = CondPmf::from_fn(vec![ax("X"), ax("V")], vec![ax("Y")], |g, o| (g[0] == o[0]) as u8 as f64).unwrap();
        let q2 = CondPmf::from_fn(vec![ax("Y")], vec![ax("Z")], |g, o| (g[0] == o[0]) as u8 as f64).unwrap();
        ChannelModel::new(q1, q2, FinitePmf::indexed(vec![0.5, 0.5]).unwrap()).unwrap()
    }

    fn config(scheme: SideInfoMode, n: usize, r1: f64, eps: f64, trials: usize) -> SimConfig {
        SimConfig {
            scheme,
            params: CodeParams { n_block: n, r0: 0.0, r1, gamma: 0.0, gamma1: 0.0, eps_typ: eps, seed: 3 },
            trials,
            blocks: 2,
            seed: 7,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    #[test]
    fn noiseless_low_rate_has_no_errors() {
        let m = noiseless();
        let aux = AuxiliaryJoint::binary_example(0.5, [1.0, 1.0, 0.0, 0.0]).unwrap();
        let cfg = config(SideInfoMode::CAUSAL_FEEDBACK, 12, 0.2, 0.01, 200);
        let r = run_trials(&m, &aux, &cfg, Exec::default()).unwrap();
        assert_eq!(r.pe1, 0.0);
        assert_eq!(r.pe2, 0.0);
        assert_eq!(r.blocks_evaluated, 400);
        assert_eq!(r.pe1_ci, Some(0.0));
        assert_eq!(r.hyz, 0.0);
    }

    #[test]
    fn overstuffed_bins_fail() {
        let m = binary_example_model(0.1, 0.2).unwrap();
        let aux = AuxiliaryJoint::binary_example_optimum();
        // rate 1 bit/symbol against a cap of 1 - h(0.1) = 0.53
        let cfg = config(SideInfoMode::CAUSAL_FEEDBACK, 12, 1.0, 0.1, 200);
        let r = run_trials(&m, &aux, &cfg, Exec::default()).unwrap();
        assert!(r.pe1 > 0.9, "{}", r.pe1);
    }

    #[test]
    fn report_is_reproducible() {
        let m = binary_example_model(0.1, 0.2).unwrap();
        let aux = AuxiliaryJoint::binary_example_optimum();
        let cfg = config(SideInfoMode::NONCAUSAL, 8, 0.25, 0.15, 40);
        let a = run_trials(&m, &aux, &cfg, Exec::Sequential).unwrap();
        let b = run_trials(&m, &aux, &cfg, Exec::Parallel).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.pe1_ci, None);
        let back: SimReport = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(back, a);
        assert_eq!(a.csv_row().split(',').count(), CSV_HEADER.split(',').count());
    }

    #[test]
    fn hyz_at_optimum_is_hq() {
        let m = binary_example_model(0.1, 0.2).unwrap();
        let aux = AuxiliaryJoint::binary_example_optimum();
        let h = conditional_output_entropy_rate(&m, &aux).unwrap();
        assert!((h - binary_entropy(0.2).unwrap()).abs() < 1e-12);
        let s = sampled_conditional_output_entropy(&m, &aux, 200_000, 1).unwrap();
        assert!((s - h).abs() < 0.01, "{s} vs {h}");
    }

    #[test]
    fn hyz_zero_for_identity_second_channel() {
        let m = noiseless();
        let aux = AuxiliaryJoint::binary_example(0.3, [0.2, 0.9, 0.5, 0.4]).unwrap();
        assert_eq!(conditional_output_entropy_rate(&m, &aux).unwrap(), 0.0);
    }

    #[test]
    fn ci_floor() {
        assert_eq!(binomial_half_width(0.5, 99), None);
        let w = binomial_half_width(0.5, 100).unwrap();
        assert!((w - 1.959963984540054 * 0.05).abs() < 1e-12);
    }
}
