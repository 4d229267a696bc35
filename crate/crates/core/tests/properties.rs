use proptest::prelude::*;

use secbc::channels::{ChannelModel, SideInfoMode, V, X, Y, Z};
use secbc::codec::{decrypt, encrypt, key_from_feedback};
use secbc::probcore::{
    conditional_mutual_information, entropy_bits, is_markov_chain, mutual_information, Axis, CondPmf,
    FinitePmf, JointPmf,
};
use secbc::regions::{
    eval_bounds, extend_to_full_joint, membership, AuxDims, AuxiliaryJoint, Theorem, K, U,
};

const TOL: f64 = 1e-9;

fn normalize(mut w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    if s <= 0.0 {
        w.iter_mut().for_each(|x| *x = 0.0);
        w[0] = 1.0;
    } else {
        w.iter_mut().for_each(|x| *x /= s);
    }
    w
}

/// A probability vector of length `n`, with exact zeros allowed.
fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.0..1.0f64], n).prop_map(normalize)
}

fn rows(count: usize, width: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(simplex(width), count).prop_map(|r| r.concat())
}

/// Joint of `A -> B -> C` built from kernels.
fn chain_joint() -> impl Strategy<Value = JointPmf> {
    (1usize..=4, 1usize..=4, 1usize..=4).prop_flat_map(|(a, b, c)| {
        (simplex(a), rows(a, b), rows(b, c)).prop_map(move |(pa, ab, bc)| {
            let axes = vec![Axis::indexed("A", a), Axis::indexed("B", b), Axis::indexed("C", c)];
            JointPmf::from_fn(axes, |i| pa[i[0]] * ab[i[0] * b + i[1]] * bc[i[1] * c + i[2]]).unwrap()
        })
    })
}

/// Unstructured joint over three axes.
fn any_joint() -> impl Strategy<Value = JointPmf> {
    (1usize..=4, 1usize..=4, 1usize..=4).prop_flat_map(|(a, b, c)| {
        simplex(a * b * c).prop_map(move |m| {
            let axes = vec![Axis::indexed("A", a), Axis::indexed("B", b), Axis::indexed("C", c)];
            JointPmf::new(axes, m).unwrap()
        })
    })
}

fn binary_model() -> impl Strategy<Value = ChannelModel> {
    (rows(4, 2), rows(2, 2), simplex(2)).prop_map(|(q1, q2, pv)| {
        let bit = |n: &str| Axis::indexed(n, 2);
        ChannelModel::new(
            CondPmf::new(vec![bit(X), bit(V)], vec![bit(Y)], q1).unwrap(),
            CondPmf::new(vec![bit(Y)], vec![bit(Z)], q2).unwrap(),
            FinitePmf::indexed(pv).unwrap(),
        )
        .unwrap()
    })
}

/// A binary model with a noncausal auxiliary conditional `p(u,k,x|v)`,
/// `U` and `K` binary.
fn model_and_cond() -> impl Strategy<Value = (ChannelModel, Vec<f64>)> {
    (binary_model(), rows(2, 8))
}

fn noncausal(m: &ChannelModel, dims: AuxDims, cond: &[f64]) -> AuxiliaryJoint {
    AuxiliaryJoint::from_noncausal_parts(dims, m.x_axis(), m.v_axis(), m.pv().mass(), cond).unwrap()
}

fn bounds_at(theorem: Theorem, aux: &AuxiliaryJoint, m: &ChannelModel) -> secbc::regions::BoundSet {
    let aux = aux.with_mode(theorem.mode()).unwrap();
    eval_bounds(theorem, &extend_to_full_joint(&aux, m).unwrap()).unwrap()
}

fn h_given_first(j: &JointPmf) -> f64 {
    let d = j.dims();
    (0..d[0])
        .map(|a| {
            let row: Vec<f64> = (0..d[1] * d[2]).map(|bc| j.prob(&[a, bc / d[2], bc % d[2]])).collect();
            let pa: f64 = row.iter().sum();
            if pa == 0.0 {
                0.0
            } else {
                pa * entropy_bits(&row.iter().map(|x| x / pa).collect::<Vec<_>>()).unwrap()
            }
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn chain_rule(j in any_joint()) {
        let lhs = j.entropy_of(&["A", "B", "C"]).unwrap();
        let rhs = j.entropy_of(&["A"]).unwrap() + h_given_first(&j);
        prop_assert!((lhs - rhs).abs() <= TOL);
    }

    #[test]
    fn information_is_nonnegative(j in any_joint()) {
        prop_assert!(j.entropy_of(&["A", "B"]).unwrap() >= 0.0);
        prop_assert!(mutual_information(&j, &["A"], &["B", "C"]).unwrap() >= -TOL);
        prop_assert!(conditional_mutual_information(&j, &["A"], &["C"], &["B"]).unwrap() >= -TOL);
    }

    #[test]
    fn data_processing(j in chain_joint()) {
        let ab = mutual_information(&j, &["A"], &["B"]).unwrap();
        let ac = mutual_information(&j, &["A"], &["C"]).unwrap();
        let bc = mutual_information(&j, &["B"], &["C"]).unwrap();
        prop_assert!(ac <= ab + TOL);
        prop_assert!(ac <= bc + TOL);
        prop_assert!(is_markov_chain(&j, &[&["A"], &["B"], &["C"]], TOL).unwrap());
    }

    #[test]
    fn relabeling_preserves_measures(j in any_joint(), seed in any::<u64>()) {
        let n = j.dims()[1];
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let r = j.permute_axis("B", &perm).unwrap();
        for names in [&["B"][..], &["A", "B"], &["B", "C"], &["A", "B", "C"]] {
            prop_assert!((j.entropy_of(names).unwrap() - r.entropy_of(names).unwrap()).abs() <= TOL);
        }
        let i0 = conditional_mutual_information(&j, &["A"], &["C"], &["B"]).unwrap();
        let i1 = conditional_mutual_information(&r, &["A"], &["C"], &["B"]).unwrap();
        prop_assert!((i0 - i1).abs() <= TOL);
    }

    #[test]
    fn constant_a_reduces_outer_bounds((m, cond) in model_and_cond()) {
        let plain = AuxDims { u: 2, k: 2, a: None };
        let with_a = AuxDims { a: Some(1), ..plain };
        let (aux, aux_a) = (noncausal(&m, plain, &cond), noncausal(&m, with_a, &cond));
        let (t1, t2) = (bounds_at(Theorem::T1, &aux, &m), bounds_at(Theorem::T2, &aux_a, &m));
        prop_assert!((t1.r1_cap - t2.r1_cap).abs() <= TOL);
        prop_assert!((t1.re_cap - t2.re_cap).abs() <= TOL);
        let (t5, t6) = (bounds_at(Theorem::T5, &aux, &m), bounds_at(Theorem::T6, &aux_a, &m));
        prop_assert!((t5.r1_cap - t6.r1_cap).abs() <= TOL);
    }

    #[test]
    fn feedback_gain_is_bounded((m, cond) in model_and_cond()) {
        let aux = noncausal(&m, AuxDims { u: 2, k: 2, a: None }, &cond);
        let full = extend_to_full_joint(&aux, &m).unwrap();
        let gain = conditional_mutual_information(&full, &[K], &[Y], &[U]).unwrap()
            - conditional_mutual_information(&full, &[K], &[Z], &[U]).unwrap();
        let hyz = full.entropy_of(&[Y, Z]).unwrap() - full.entropy_of(&[Z]).unwrap();
        prop_assert!(gain <= hyz + TOL);
    }

    #[test]
    fn bounds_ignore_auxiliary_labels((m, cond) in model_and_cond(), theorem in prop::sample::select(vec![Theorem::T1, Theorem::T5])) {
        let aux = noncausal(&m, AuxDims { u: 2, k: 2, a: None }, &cond).with_mode(theorem.mode()).unwrap();
        let swapped = AuxiliaryJoint::new(aux.joint().permute_axis(K, &[1, 0]).unwrap(), aux.mode()).unwrap();
        let (b0, b1) = (bounds_at(theorem, &aux, &m), bounds_at(theorem, &swapped, &m));
        prop_assert!((b0.r0_cap - b1.r0_cap).abs() <= TOL);
        prop_assert!((b0.r1_cap - b1.r1_cap).abs() <= TOL);
        prop_assert!((b0.re_cap - b1.re_cap).abs() <= TOL);
    }

    #[test]
    fn corner_points_are_members((m, cond) in model_and_cond(), idx in 0usize..7) {
        let theorem = Theorem::ALL[idx];
        let dims = AuxDims { u: 2, k: 2, a: theorem.uses_a().then_some(1) };
        let mode = theorem.mode();
        let aux = noncausal(&m, dims, &cond);
        // causal theorems need (U,K,A) independent of V
        let aux = if mode.is_causal() {
            let pv = m.pv().mass();
            let j = aux.joint();
            let w = dims.w();
            let prior: Vec<f64> = (0..w).map(|i| (0..2).map(|x| (0..2).map(|v| j.mass()[(i * 2 + x) * 2 + v]).sum::<f64>()).sum()).collect();
            let kernel: Vec<f64> = (0..w * 2).flat_map(|_| [0.5, 0.5]).collect();
            AuxiliaryJoint::from_causal_parts(dims, m.x_axis(), m.v_axis(), pv, &prior, &kernel).unwrap()
        } else {
            aux.with_mode(mode).unwrap()
        };
        let b = eval_bounds(theorem, &extend_to_full_joint(&aux, &m).unwrap()).unwrap();
        for t in b.corner_points() {
            prop_assert!(membership(&b, &t));
        }
    }

    #[test]
    fn one_time_pad_round_trip(n in 1usize..64, s in 0usize..64, key in 0usize..64) {
        let (s, key) = (s % n, key % n);
        let c = encrypt(s, key, n).unwrap();
        prop_assert!(c < n);
        prop_assert_eq!(decrypt(c, key, n).unwrap(), s);
    }

    #[test]
    fn ciphertext_is_uniform_for_uniform_key(ps in (1usize..12).prop_flat_map(simplex)) {
        let n = ps.len();
        let mut mass = vec![0.0; n * n];
        for (s, &p) in ps.iter().enumerate() {
            for key in 0..n {
                mass[s * n + encrypt(s, key, n).unwrap()] += p / n as f64;
            }
        }
        let j = JointPmf::new(vec![Axis::indexed("S", n), Axis::indexed("C", n)], mass).unwrap();
        prop_assert!(mutual_information(&j, &["S"], &["C"]).unwrap().abs() <= 1e-12);
        for &pc in j.marginal_pmf("C").unwrap().mass() {
            prop_assert!((pc - 1.0 / n as f64).abs() <= 1e-12);
        }
    }

    #[test]
    fn feedback_key_in_range(y in prop::collection::vec(0u32..3, 1..10), s in 1usize..50) {
        let key = key_from_feedback(&y, 3, s);
        if 3usize.pow(y.len() as u32) >= s {
            prop_assert!(key.unwrap() < s);
        } else {
            prop_assert!(key.is_err());
        }
    }
}

#[test]
fn modes_cover_all_theorems() {
    let modes: Vec<SideInfoMode> = Theorem::ALL.iter().map(|t| t.mode()).collect();
    for m in [SideInfoMode::NONCAUSAL, SideInfoMode::CAUSAL, SideInfoMode::NONCAUSAL_FEEDBACK, SideInfoMode::CAUSAL_FEEDBACK] {
        assert!(modes.contains(&m));
    }
}
