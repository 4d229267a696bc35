//! The two-stage channel `(X,V) -> Y -> Z` with encoder side information `V`.

mod config;

pub use config::{parse_model_config, write_model_config};

use serde::{Deserialize, Serialize};

use crate::probcore::{binary_entropy, Axis, CondPmf, FinitePmf};
use crate::{Error, Result};

pub const X: &str = "X";
pub const V: &str = "V";
pub const Y: &str = "Y";
pub const Z: &str = "Z";

/// When the encoder sees the state sequence, and whether receiver 1 feeds its
/// output back to the encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Causality {
    Noncausal,
    Causal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SideInfoMode {
    pub causality: Causality,
    pub feedback: bool,
}

impl SideInfoMode {
    pub const NONCAUSAL: Self = Self { causality: Causality::Noncausal, feedback: false };
    pub const CAUSAL: Self = Self { causality: Causality::Causal, feedback: false };
    pub const NONCAUSAL_FEEDBACK: Self = Self { causality: Causality::Noncausal, feedback: true };
    pub const CAUSAL_FEEDBACK: Self = Self { causality: Causality::Causal, feedback: true };

    pub fn is_causal(self) -> bool {
        self.causality == Causality::Causal
    }

    /// Short tag: `n`, `c`, `nf` or `cf`.
    pub fn tag(self) -> &'static str {
        match (self.causality, self.feedback) {
            (Causality::Noncausal, false) => "n",
            (Causality::Causal, false) => "c",
            (Causality::Noncausal, true) => "nf",
            (Causality::Causal, true) => "cf",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "n" => Some(Self::NONCAUSAL),
            "c" => Some(Self::CAUSAL),
            "nf" => Some(Self::NONCAUSAL_FEEDBACK),
            "cf" => Some(Self::CAUSAL_FEEDBACK),
            _ => None,
        }
    }
}

/// Channel 1 `Q1(y|x,v)`, channel 2 `Q2(z|y)` and the state source `p_V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    q1: CondPmf,
    q2: CondPmf,
    pv: FinitePmf,
}

impl ChannelModel {
    pub fn new(q1: CondPmf, q2: CondPmf, pv: FinitePmf) -> Result<Self> {
        let names = |axes: &[Axis]| axes.iter().map(|a| a.name.clone()).collect::<Vec<_>>();
        if names(q1.given()) != [X, V] || names(q1.out()) != [Y] {
            return Err(Error::Validation("q1 must map (X,V) to Y".into()));
        }
        if names(q2.given()) != [Y] || names(q2.out()) != [Z] {
            return Err(Error::Validation("q2 must map Y to Z".into()));
        }
        if q1.out()[0].labels != q2.given()[0].labels {
            return Err(Error::Validation("Y alphabet of q1 and q2 differ".into()));
        }
        if q1.given()[1].labels != pv.labels() {
            return Err(Error::Validation("V alphabet of q1 and p_V differ".into()));
        }
        Ok(Self { q1, q2, pv })
    }

    pub fn q1(&self) -> &CondPmf {
        &self.q1
    }

    pub fn q2(&self) -> &CondPmf {
        &self.q2
    }

    pub fn pv(&self) -> &FinitePmf {
        &self.pv
    }

    pub fn x_axis(&self) -> &Axis {
        &self.q1.given()[0]
    }

    pub fn v_axis(&self) -> &Axis {
        &self.q1.given()[1]
    }

    pub fn y_axis(&self) -> &Axis {
        &self.q1.out()[0]
    }

    pub fn z_axis(&self) -> &Axis {
        &self.q2.out()[0]
    }

    pub fn nx(&self) -> usize {
        self.x_axis().len()
    }

    pub fn nv(&self) -> usize {
        self.v_axis().len()
    }

    pub fn ny(&self) -> usize {
        self.y_axis().len()
    }

    pub fn nz(&self) -> usize {
        self.z_axis().len()
    }

    /// `Q1(y|x,v)` by symbol index.
    #[inline]
    pub fn q1_at(&self, y: usize, x: usize, v: usize) -> f64 {
        self.q1.kernel()[(x * self.nv() + v) * self.ny() + y]
    }

    /// `Q2(z|y)` by symbol index.
    #[inline]
    pub fn q2_at(&self, z: usize, y: usize) -> f64 {
        self.q2.kernel()[y * self.nz() + z]
    }
}

/// `Q3(z|x,v) = sum_y Q2(z|y) Q1(y|x,v)`.
pub fn cascade(m: &ChannelModel) -> Result<CondPmf> {
    let given = m.q1.given().to_vec();
    let out = vec![m.z_axis().clone()];
    CondPmf::from_fn(given, out, |g, o| {
        (0..m.ny()).map(|y| m.q2_at(o[0], y) * m.q1_at(y, g[0], g[1])).sum()
    })
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name}={p} outside [0,1]")))
    }
}

fn bit_axis(name: &str) -> Axis {
    Axis::indexed(name, 2)
}

/// Binary state-flipped channel followed by `BSC(q)`.
///
/// With `v = 0` channel 1 flips the input with probability `p`; with `v = 1`
/// it flips with probability `1 - p`. `V` is uniform.
pub fn binary_example_model(p: f64, q: f64) -> Result<ChannelModel> {
    check_prob("p", p)?;
    check_prob("q", q)?;
    let q1 = CondPmf::from_fn(vec![bit_axis(X), bit_axis(V)], vec![bit_axis(Y)], |g, o| {
        let same = g[0] == o[0];
        match (g[1], same) {
            (0, true) | (1, false) => 1.0 - p,
            _ => p,
        }
    })?;
    let q2 = bsc(Y, Z, q)?;
    let pv = FinitePmf::indexed(vec![0.5, 0.5])?;
    ChannelModel::new(q1, q2, pv)
}

/// Binary symmetric kernel between two named binary axes.
pub fn bsc(input: &str, output: &str, q: f64) -> Result<CondPmf> {
    check_prob("crossover", q)?;
    CondPmf::from_fn(vec![bit_axis(input)], vec![bit_axis(output)], |g, o| {
        if g[0] == o[0] {
            1.0 - q
        } else {
            q
        }
    })
}

/// `min{1 - h(p), h(q)}`, the closed-form secrecy capacity of the binary example.
pub fn binary_secrecy_capacity_oracle(p: f64, q: f64) -> Result<f64> {
    check_prob("p", p)?;
    check_prob("q", q)?;
    Ok((1.0 - binary_entropy(p)?).min(binary_entropy(q)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(input: &str, output: &str, n: usize) -> CondPmf {
        CondPmf::from_fn(
            vec![Axis::indexed(input, n)],
            vec![Axis::indexed(output, n)],
            |g, o| if g[0] == o[0] { 1.0 } else { 0.0 },
        )
        .unwrap()
    }

    #[test]
    fn cascade_with_identity_q2_is_q1() {
        let m = binary_example_model(0.13, 0.0).unwrap();
        let m = ChannelModel::new(m.q1().clone(), identity(Y, Z, 2), m.pv().clone()).unwrap();
        let q3 = cascade(&m).unwrap();
        for (a, b) in q3.kernel().iter().zip(m.q1().kernel()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn cascade_deterministic_q1_gives_bsc_rows() {
        // y = x xor v
        let q1 = CondPmf::from_fn(vec![bit_axis(X), bit_axis(V)], vec![bit_axis(Y)], |g, o| {
            if (g[0] ^ g[1]) == o[0] {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let m = ChannelModel::new(q1, bsc(Y, Z, 0.3).unwrap(), FinitePmf::indexed(vec![0.5, 0.5]).unwrap())
            .unwrap();
        let q3 = cascade(&m).unwrap();
        for x in 0..2 {
            for v in 0..2 {
                let y = x ^ v;
                assert!((q3.prob(&[x, v], &[y]) - 0.7).abs() < 1e-15);
                assert!((q3.prob(&[x, v], &[1 - y]) - 0.3).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cascade_binary_example_matches_brute_force() {
        let m = binary_example_model(0.1, 0.2).unwrap();
        let q3 = cascade(&m).unwrap();
        // explicit matrix product, written out from the channel definitions
        let q1 = |y: usize, x: usize, v: usize| -> f64 {
            let flip = if v == 0 { 0.1 } else { 0.9 };
            if y == x {
                1.0 - flip
            } else {
                flip
            }
        };
        let q2 = |z: usize, y: usize| if z == y { 0.8 } else { 0.2 };
        for x in 0..2 {
            for v in 0..2 {
                for z in 0..2 {
                    let direct: f64 = (0..2).map(|y| q2(z, y) * q1(y, x, v)).sum();
                    assert!((q3.prob(&[x, v], &[z]) - direct).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn binary_example_entries() {
        let m = binary_example_model(0.0, 0.3).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(m.q1_at(y, x, 0), if x == y { 1.0 } else { 0.0 });
            }
        }
        let m = binary_example_model(0.5, 0.3).unwrap();
        assert!(m.q1().kernel().iter().all(|&p| p == 0.5));

        let m = binary_example_model(0.1, 0.2).unwrap();
        assert_eq!(m.q1_at(0, 0, 0), 0.9);
        assert_eq!(m.q1_at(1, 0, 0), 0.1);
        assert_eq!(m.q1_at(0, 0, 1), 0.1);
        assert_eq!(m.q1_at(1, 0, 1), 0.9);
        assert_eq!(m.q1_at(1, 1, 1), 0.1);
        assert_eq!(m.q2_at(1, 0), 0.2);
        assert_eq!(m.q2_at(1, 1), 0.8);
        assert_eq!(m.pv().mass(), &[0.5, 0.5]);
        assert!(matches!(binary_example_model(1.1, 0.2), Err(Error::Domain(_))));
        assert!(binary_example_model(0.1, -0.2).is_err());
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(binary_secrecy_capacity_oracle(0.5, 0.37).unwrap(), 0.0);
        assert_eq!(binary_secrecy_capacity_oracle(0.2, 0.0).unwrap(), 0.0);
        let expect = (1.0 - binary_entropy(0.1).unwrap()).min(binary_entropy(0.2).unwrap());
        assert_eq!(binary_secrecy_capacity_oracle(0.1, 0.2).unwrap(), expect);
        assert!((expect - 0.531_004_406_410_718_6).abs() < 1e-12);
        assert!(binary_secrecy_capacity_oracle(2.0, 0.2).is_err());
    }

    #[test]
    fn model_rejects_mismatched_alphabets() {
        let m = binary_example_model(0.1, 0.2).unwrap();
        let q2 = identity(Y, Z, 3);
        assert!(ChannelModel::new(m.q1().clone(), q2, m.pv().clone()).is_err());
    }
}
