use crate::channels::ChannelModel;
use crate::codec::{codeword_law, key_from_feedback, Codebook, Symbol};
use crate::{Error, Result};

/// Default limit on enumerated states.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 24;

/// Per-symbol transition laws from `(u, k, v)` to the channel outputs.
struct Kernels {
    /// `p(z | u,k,v)`
    wz: Vec<f64>,
    /// `p(y,z | u,k,v)`, `y` major
    wyz: Vec<f64>,
    nz: usize,
    nyz: usize,
}

impl Kernels {
    fn new(cb: &Codebook, m: &ChannelModel) -> Self {
        let a = cb.alphabets;
        let (ny, nz) = (a.y, a.z);
        let mut wz = Vec::with_capacity(a.u * a.k * a.v * nz);
        let mut wyz = Vec::with_capacity(a.u * a.k * a.v * ny * nz);
        for u in 0..a.u {
            for k in 0..a.k {
                for v in 0..a.v {
                    let px = cb.x_row(u as Symbol, k as Symbol, v as Symbol);
                    let mut yz = vec![0.0; ny * nz];
                    for (x, &p) in px.iter().enumerate() {
                        if p == 0.0 {
                            continue;
                        }
                        for y in 0..ny {
                            let py = p * m.q1_at(y, x, v);
                            for z in 0..nz {
                                yz[y * nz + z] += py * m.q2_at(z, y);
                            }
                        }
                    }
                    wz.extend((0..nz).map(|z| (0..ny).map(|y| yz[y * nz + z]).sum::<f64>()));
                    wyz.extend(yz);
                }
            }
        }
        Self { wz, wyz, nz, nyz: ny * nz }
    }

    fn row(&self, table: &[f64], width: usize, cb: &Codebook, u: Symbol, k: Symbol, v: Symbol) -> Vec<f64> {
        let a = cb.alphabets;
        let r = (u as usize * a.k + k as usize) * a.v + v as usize;
        table[r * width..(r + 1) * width].to_vec()
    }

    /// Per-position rows for a codeword pair; `v = None` averages over `p_V`.
    fn rows(&self, cb: &Codebook, joint_yz: bool, u_idx: usize, k_idx: usize, v: Option<&[Symbol]>) -> Vec<Vec<f64>> {
        let (table, width) = if joint_yz { (&self.wyz, self.nyz) } else { (&self.wz, self.nz) };
        let (u, k) = (cb.u_seq(u_idx), cb.k_seq(u_idx, k_idx));
        (0..cb.n)
            .map(|i| match v {
                Some(v) => self.row(table, width, cb, u[i], k[i], v[i]),
                None => {
                    let mut acc = vec![0.0; width];
                    for (vv, &pv) in cb.pv.iter().enumerate() {
                        let r = self.row(table, width, cb, u[i], k[i], vv as Symbol);
                        acc.iter_mut().zip(r).for_each(|(a, b)| *a += pv * b);
                    }
                    acc
                }
            })
            .collect()
    }
}

/// `acc[idx] += w * prod_i rows[i][digit_i(idx)]`, first position most
/// significant.
fn add_product(acc: &mut [f64], w: f64, rows: &[Vec<f64>]) {
    let mut table = vec![w];
    for row in rows {
        let mut next = Vec::with_capacity(table.len() * row.len());
        for &p in &table {
            next.extend(row.iter().map(|&r| p * r));
        }
        table = next;
    }
    acc.iter_mut().zip(table).for_each(|(a, b)| *a += b);
}

/// Visit every state sequence with its probability.
fn for_each_state(cb: &Codebook, mut f: impl FnMut(&[Symbol], f64)) {
    let nv = cb.alphabets.v;
    let mut v = vec![0 as Symbol; cb.n];
    loop {
        let p: f64 = v.iter().map(|&x| cb.pv[x as usize]).product();
        if p > 0.0 {
            f(&v, p);
        }
        let mut i = cb.n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            v[i] += 1;
            if (v[i] as usize) < nv {
                break;
            }
            v[i] = 0;
        }
    }
}

fn plogp(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

fn pow(base: usize, exp: usize) -> u128 {
    (base as u128).saturating_pow(exp as u32)
}

fn check_cap(states: u128, cap: u128) -> Result<()> {
    if states > cap {
        Err(Error::EnumerationTooLarge { states, cap })
    } else {
        Ok(())
    }
}

/// `P(out^N | bin)` for every `k` bin, averaged over uniform `t`, the
/// state, and the encoder's own randomness. `out` is `z` or the pair `(y,z)`.
fn output_given_bin(cb: &Codebook, ker: &Kernels, eps: f64, joint_yz: bool) -> Vec<Vec<f64>> {
    let width = if joint_yz { ker.nyz } else { ker.nz };
    let size = width.pow(cb.n as u32);
    let c = cb.counts;
    let wt = 1.0 / c.t as f64;
    (0..c.s)
        .map(|bin| {
            let mut acc = vec![0.0; size];
            for t in 0..c.t {
                if cb.mode.is_causal() {
                    for (w, u, k) in codeword_law(cb, t, bin, &[], eps) {
                        add_product(&mut acc, wt * w, &ker.rows(cb, joint_yz, u, k, None));
                    }
                } else {
                    for_each_state(cb, |v, pv| {
                        for (w, u, k) in codeword_law(cb, t, bin, v, eps) {
                            add_product(&mut acc, wt * pv * w, &ker.rows(cb, joint_yz, u, k, Some(v)));
                        }
                    });
                }
            }
            acc
        })
        .collect()
}

/// States touched when tabulating `output_given_bin`.
fn tabulation_states(cb: &Codebook, width: usize) -> u128 {
    let c = cb.counts;
    let inner = if cb.mode.is_causal() { c.k_per_bin as u128 } else { pow(cb.alphabets.v, cb.n) };
    (c.s as u128)
        .saturating_mul(c.t as u128)
        .saturating_mul(inner)
        .saturating_mul(pow(width, cb.n))
}

/// Exact `H(S | Z^N) / N` for the fixed codebook, with `T` and `S` uniform.
///
/// In the feedback schemes the eavesdropper holds both blocks' outputs and
/// the value is `H(S_2 | Z_1^N, Z_2^N) / N`, where block 1 carries a
/// uniformly random dummy index and the key is `g_f(Y_1^N)`.
pub fn exact_equivocation(cb: &Codebook, m: &ChannelModel, eps: f64, cap: u128) -> Result<f64> {
    let ker = Kernels::new(cb, m);
    let a = cb.alphabets;
    let ns = cb.counts.s;
    check_cap(tabulation_states(cb, a.z), cap)?;
    let pz_given = output_given_bin(cb, &ker, eps, false);
    if !cb.mode.feedback {
        let joint: Vec<f64> = pz_given.iter().flatten().map(|p| p / ns as f64).collect();
        return Ok(conditional_entropy_first(&joint, ns) / cb.n as f64);
    }

    check_cap(tabulation_states(cb, a.y * a.z), cap)?;
    check_cap((ns as u128).pow(2).saturating_mul(pow(a.z, 2 * cb.n)), cap)?;
    let nz_seq = a.z.pow(cb.n as u32);
    // block 1: the dummy index is uniform over bins
    let pyz: Vec<f64> = {
        let per_bin = output_given_bin(cb, &ker, eps, true);
        let mut acc = vec![0.0; per_bin[0].len()];
        for t in per_bin {
            acc.iter_mut().zip(t).for_each(|(x, y)| *x += y / ns as f64);
        }
        acc
    };
    let mut key_z1 = vec![0.0; ns * nz_seq];
    let mut y = vec![0 as Symbol; cb.n];
    for (idx, &p) in pyz.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut rest = idx;
        let mut zi = 0usize;
        let mut zmul = 1usize;
        for i in (0..cb.n).rev() {
            let d = rest % ker.nyz;
            rest /= ker.nyz;
            y[i] = (d / a.z) as Symbol;
            zi += (d % a.z) * zmul;
            zmul *= a.z;
        }
        let key = key_from_feedback(&y, a.y, ns)?;
        key_z1[key * nz_seq + zi] += p;
    }

    // P(s, z1, z2) = 1/|S| sum_k P(k, z1) P(z2 | s + k)
    let mut joint = vec![0.0; ns * nz_seq * nz_seq];
    for s in 0..ns {
        for k in 0..ns {
            let c = (s + k) % ns;
            for z1 in 0..nz_seq {
                let p1 = key_z1[k * nz_seq + z1] / ns as f64;
                if p1 == 0.0 {
                    continue;
                }
                let base = (s * nz_seq + z1) * nz_seq;
                for (z2, &p2) in pz_given[c].iter().enumerate() {
                    joint[base + z2] += p1 * p2;
                }
            }
        }
    }
    Ok(conditional_entropy_first(&joint, ns) / cb.n as f64)
}

/// `H(A | B)` for a table laid out `[a][b]`.
fn conditional_entropy_first(joint: &[f64], na: usize) -> f64 {
    let nb = joint.len() / na;
    let mut pb = vec![0.0; nb];
    for row in joint.chunks(nb) {
        pb.iter_mut().zip(row).for_each(|(x, y)| *x += y);
    }
    (plogp(joint) - plogp(&pb)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{binary_example_model, SideInfoMode};
    use crate::codec::{build_codebook, CodeParams, Counts};
    use crate::probcore::{Axis, CondPmf, FinitePmf};
    use crate::regions::AuxiliaryJoint;

    fn noiseless() -> ChannelModel {
        let ax = |n: &str| Axis::indexed(n, 2);
        let q1 = CondPmf::from_fn(vec![ax("X"), ax("V")], vec![ax("Y")], |g, o| (g[0] == o[0]) as u8 as f64).unwrap();
        let q2 = CondPmf::from_fn(vec![ax("Y")], vec![ax("Z")], |g, o| (g[0] == o[0]) as u8 as f64).unwrap();
        ChannelModel::new(q1, q2, FinitePmf::indexed(vec![0.5, 0.5]).unwrap()).unwrap()
    }

    fn params(n: usize, r1: f64) -> CodeParams {
        CodeParams { n_block: n, r0: 0.0, r1, gamma: 0.0, gamma1: 0.0, eps_typ: 0.1, seed: 2 }
    }

    #[test]
    fn uncoded_over_identity_leaks_everything() {
        // X = K, noiseless: Z^N reveals the codeword and hence S
        let m = noiseless();
        let aux = AuxiliaryJoint::binary_example(0.5, [1.0, 1.0, 0.0, 0.0]).unwrap();
        let cb = build_codebook(&m, &aux, &params(2, 1.0), SideInfoMode::CAUSAL).unwrap();
        let seqs: Vec<Vec<Symbol>> = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let counts = Counts { t: 1, u_per_bin: 1, s: 4, k_per_bin: 1, subbins: 1 };
        let cb = cb.with_sequences(counts, vec![vec![0, 0]], vec![seqs]).unwrap();
        let d = exact_equivocation(&cb, &m, 0.1, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(d.abs() < 1e-12, "{d}");
    }

    #[test]
    fn pure_noise_output_gives_full_equivocation() {
        // q = 1/2 on the second channel: Z independent of everything
        let m = binary_example_model(0.1, 0.5).unwrap();
        let aux = AuxiliaryJoint::binary_example_optimum();
        for mode in [SideInfoMode::CAUSAL, SideInfoMode::CAUSAL_FEEDBACK, SideInfoMode::NONCAUSAL] {
            let cb = build_codebook(&m, &aux, &params(4, 0.5), mode).unwrap();
            let d = exact_equivocation(&cb, &m, 0.1, DEFAULT_ENUMERATION_CAP).unwrap();
            let full = (cb.counts.s as f64).log2() / 4.0;
            assert!((d - full).abs() < 1e-12, "{mode:?}: {d} vs {full}");
        }
    }

    #[test]
    fn one_time_pad_over_noiseless_feedback() {
        // |Y|^N = |S|: the key is a bijection of y1, which Z reveals in full,
        // so the pad is transparent
        let m = noiseless();
        let aux = AuxiliaryJoint::binary_example(0.5, [1.0, 1.0, 0.0, 0.0]).unwrap();
        let cb = build_codebook(&m, &aux, &params(2, 1.0), SideInfoMode::CAUSAL_FEEDBACK).unwrap();
        let seqs: Vec<Vec<Symbol>> = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let counts = Counts { t: 1, u_per_bin: 1, s: 4, k_per_bin: 1, subbins: 1 };
        let cb = cb.with_sequences(counts, vec![vec![0, 0]], vec![seqs]).unwrap();
        let d = exact_equivocation(&cb, &m, 0.1, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(d.abs() < 1e-12, "{d}");
    }

    #[test]
    fn cap_is_enforced() {
        let m = binary_example_model(0.1, 0.2).unwrap();
        let aux = AuxiliaryJoint::binary_example_optimum();
        let cb = build_codebook(&m, &aux, &params(4, 0.5), SideInfoMode::NONCAUSAL).unwrap();
        match exact_equivocation(&cb, &m, 0.1, 10) {
            Err(Error::EnumerationTooLarge { states, cap }) => {
                assert_eq!(cap, 10);
                assert!(states > 10);
            }
            other => panic!("{other:?}"),
        }
    }
}
