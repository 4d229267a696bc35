use super::{neumaier_sum, FinitePmf, JointPmf, CLAMP_TOL, NORM_TOL};
use crate::{Error, Result};

fn plogp_sum(mass: &[f64]) -> f64 {
    -mass
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Shannon entropy in bits.
pub fn entropy(p: &FinitePmf) -> f64 {
    plogp_sum(p.mass()).max(0.0)
}

/// Entropy of a raw mass vector, validating it first.
pub fn entropy_bits(mass: &[f64]) -> Result<f64> {
    if mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(Error::Validation("negative or non-finite mass".into()));
    }
    let total = neumaier_sum(mass.iter().copied());
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::Validation(format!("mass sums to {total}")));
    }
    Ok(plogp_sum(mass).max(0.0))
}

/// `h(x) = -x log x - (1-x) log(1-x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("binary entropy argument {x} outside [0,1]")));
    }
    Ok(plogp_sum(&[x, 1.0 - x]).max(0.0))
}

impl JointPmf {
    /// Joint entropy of the named axes (empty list gives 0).
    pub fn entropy_of(&self, names: &[&str]) -> Result<f64> {
        let keep = self.axis_indices(names)?;
        Ok(self.entropy_at(&keep))
    }

    pub(crate) fn entropy_at(&self, keep: &[usize]) -> f64 {
        if keep.is_empty() {
            return 0.0;
        }
        plogp_sum(&self.marginal_masses(keep)).max(0.0)
    }
}

fn resolve_groups(j: &JointPmf, groups: &[&[&str]]) -> Result<Vec<Vec<usize>>> {
    let mut seen: Vec<usize> = Vec::new();
    let mut out = Vec::with_capacity(groups.len());
    for g in groups {
        let idx = j.axis_indices(g)?;
        for &i in &idx {
            if seen.contains(&i) {
                return Err(Error::Usage(format!(
                    "axis {} appears in more than one group",
                    j.axes()[i].name
                )));
            }
            seen.push(i);
        }
        out.push(idx);
    }
    Ok(out)
}

fn clamp_info(x: f64) -> f64 {
    if (-CLAMP_TOL..0.0).contains(&x) {
        0.0
    } else {
        x
    }
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    v
}

/// `I(A;B|C)` from index groups, using `H(A,C) + H(B,C) - H(A,B,C) - H(C)`.
pub(crate) fn cmi_at(j: &JointPmf, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
    let ac = union(a, c);
    let bc = union(b, c);
    let abc = union(&ac, b);
    clamp_info(j.entropy_at(&ac) + j.entropy_at(&bc) - j.entropy_at(&abc) - j.entropy_at(c))
}

/// `I(A;B)` in bits for two disjoint, nonempty axis groups.
pub fn mutual_information(j: &JointPmf, group_a: &[&str], group_b: &[&str]) -> Result<f64> {
    conditional_mutual_information(j, group_a, group_b, &[])
}

/// `I(A;B|C)` in bits. `C` may be empty.
pub fn conditional_mutual_information(
    j: &JointPmf,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Usage("mutual information needs two nonempty groups".into()));
    }
    let g = resolve_groups(j, &[a, b, c])?;
    Ok(cmi_at(j, &g[0], &g[1], &g[2]))
}

/// Checks `G1 -> G2 -> ... -> Gm` by requiring
/// `I(G1..G(i-1); G(i+1) | Gi) <= tol` for every interior group `Gi`.
pub fn is_markov_chain(j: &JointPmf, chain: &[&[&str]], tol: f64) -> Result<bool> {
    let groups = resolve_groups(j, chain)?;
    if groups.iter().any(Vec::is_empty) {
        return Err(Error::Usage("empty group in Markov chain".into()));
    }
    let mut past: Vec<usize> = Vec::new();
    for w in 1..groups.len().saturating_sub(1) {
        past.extend_from_slice(&groups[w - 1]);
        if cmi_at(j, &past, &groups[w + 1], &groups[w]) > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probcore::Axis;

    fn bits(name: &str) -> Axis {
        Axis::indexed(name, 2)
    }

    // independent two-term summation
    fn h2(x: f64) -> f64 {
        let mut s = 0.0;
        for p in [x, 1.0 - x] {
            if p > 0.0 {
                s -= p * p.ln() / std::f64::consts::LN_2;
            }
        }
        s
    }

    #[test]
    fn entropy_examples() {
        let u = FinitePmf::indexed(vec![0.5, 0.5]).unwrap();
        assert_eq!(entropy(&u), 1.0);
        let d = FinitePmf::indexed(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(entropy(&d), 0.0);
        let p = FinitePmf::indexed(vec![0.11, 0.89]).unwrap();
        assert!((entropy(&p) - h2(0.11)).abs() < 1e-14);
        assert!(entropy_bits(&[0.7, 0.7]).is_err());
        assert!(entropy_bits(&[-0.1, 1.1]).is_err());
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.2).unwrap() - h2(0.2)).abs() < 1e-14);
        assert!((binary_entropy(0.3).unwrap() - binary_entropy(0.7).unwrap()).abs() < 1e-15);
        assert!(matches!(binary_entropy(1.2), Err(Error::Domain(_))));
        assert!(binary_entropy(-0.01).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let prod = JointPmf::from_fn(vec![bits("A"), bits("B")], |i| {
            [0.3, 0.7][i[0]] * [0.6, 0.4][i[1]]
        })
        .unwrap();
        assert!(mutual_information(&prod, &["A"], &["B"]).unwrap().abs() < 1e-12);

        let copy = JointPmf::new(vec![bits("A"), bits("B")], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((mutual_information(&copy, &["A"], &["B"]).unwrap() - 1.0).abs() < 1e-12);

        // uniform input through BSC(q): brute-force sum over the four cells
        let q = 0.17;
        let bsc = JointPmf::from_fn(vec![bits("X"), bits("Y")], |i| {
            0.5 * if i[0] == i[1] { 1.0 - q } else { q }
        })
        .unwrap();
        let mut brute = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                let pxy: f64 = bsc.prob(&[x, y]);
                brute += pxy * (pxy / (0.5 * 0.5)).log2();
            }
        }
        let mi = mutual_information(&bsc, &["X"], &["Y"]).unwrap();
        assert!((mi - brute).abs() < 1e-12);
        assert!((mi - (1.0 - binary_entropy(q).unwrap())).abs() < 1e-12);
    }

    #[test]
    fn overlapping_groups_rejected() {
        let j = JointPmf::new(vec![bits("A"), bits("B")], vec![0.25; 4]).unwrap();
        assert!(matches!(
            mutual_information(&j, &["A"], &["A", "B"]),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            conditional_mutual_information(&j, &["A"], &["B"], &["B"]),
            Err(Error::Usage(_))
        ));
        assert!(mutual_information(&j, &[], &["B"]).is_err());
        assert!(mutual_information(&j, &["A"], &["Q"]).is_err());
    }

    #[test]
    fn cmi_examples() {
        // C independent of (A,B)
        let j = JointPmf::from_fn(vec![bits("A"), bits("B"), bits("C")], |i| {
            [[0.4, 0.1], [0.2, 0.3]][i[0]][i[1]] * [0.35, 0.65][i[2]]
        })
        .unwrap();
        let cmi = conditional_mutual_information(&j, &["A"], &["B"], &["C"]).unwrap();
        let mi = mutual_information(&j, &["A"], &["B"]).unwrap();
        assert!((cmi - mi).abs() < 1e-12);

        // A = C
        let j = JointPmf::from_fn(vec![bits("A"), bits("B"), bits("C")], |i| {
            if i[0] == i[2] {
                [[0.4, 0.1], [0.2, 0.3]][i[0]][i[1]]
            } else {
                0.0
            }
        })
        .unwrap();
        assert!(conditional_mutual_information(&j, &["A"], &["B"], &["C"]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn cmi_matches_conditional_entropy_oracle() {
        let mass = [0.05, 0.12, 0.2, 0.03, 0.15, 0.1, 0.07, 0.28];
        let j = JointPmf::new(vec![bits("A"), bits("B"), bits("C")], mass.to_vec()).unwrap();
        // H(A|C)+H(B|C)-H(A,B|C), each conditional entropy summed per slice of C
        let mut oracle = 0.0;
        for c in 0..2 {
            let pc: f64 = (0..4).map(|ab| mass[ab * 2 + c]).sum();
            let slice = |a: usize, b: usize| mass[(a * 2 + b) * 2 + c] / pc;
            let ha: f64 = (0..2)
                .map(|a| slice(a, 0) + slice(a, 1))
                .map(|p| if p > 0.0 { -p * p.log2() } else { 0.0 })
                .sum();
            let hb: f64 = (0..2)
                .map(|b| slice(0, b) + slice(1, b))
                .map(|p| if p > 0.0 { -p * p.log2() } else { 0.0 })
                .sum();
            let hab: f64 = (0..4)
                .map(|ab| slice(ab / 2, ab % 2))
                .map(|p| if p > 0.0 { -p * p.log2() } else { 0.0 })
                .sum();
            oracle += pc * (ha + hb - hab);
        }
        let cmi = conditional_mutual_information(&j, &["A"], &["B"], &["C"]).unwrap();
        assert!((cmi - oracle).abs() < 1e-12, "{cmi} vs {oracle}");
    }

    fn chain_joint(leak: f64) -> JointPmf {
        // A -> B -> C with an optional direct A -> C leak
        let pa = [0.3, 0.7];
        let pba = [[0.8, 0.2], [0.25, 0.75]];
        let pcb = [[0.9, 0.1], [0.4, 0.6]];
        JointPmf::from_fn(vec![bits("A"), bits("B"), bits("C")], |i| {
            let (a, b, c) = (i[0], i[1], i[2]);
            let mut row = pcb[b];
            row[a] += leak;
            let z = row[0] + row[1];
            pa[a] * pba[a][b] * row[c] / z
        })
        .unwrap()
    }

    #[test]
    fn markov_chain_examples() {
        let j = chain_joint(0.0);
        assert!(is_markov_chain(&j, &[&["A"], &["B"], &["C"]], 1e-9).unwrap());

        // copy A into C, bypassing B
        let copy = JointPmf::from_fn(vec![bits("A"), bits("B"), bits("C")], |i| {
            if i[0] == i[2] {
                [[0.4, 0.1], [0.2, 0.3]][i[0]][i[1]]
            } else {
                0.0
            }
        })
        .unwrap();
        assert!(!is_markov_chain(&copy, &[&["A"], &["B"], &["C"]], 1e-9).unwrap());

        let leaky = chain_joint(0.01);
        let skip = conditional_mutual_information(&leaky, &["A"], &["C"], &["B"]).unwrap();
        assert!(skip > 1e-6 && skip < 1e-2, "leak cmi {skip}");
        assert!(!is_markov_chain(&leaky, &[&["A"], &["B"], &["C"]], 1e-6).unwrap());
        assert!(is_markov_chain(&leaky, &[&["A"], &["B"], &["C"]], 1e-2).unwrap());
    }
}
