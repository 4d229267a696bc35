use serde::{Deserialize, Serialize};

use crate::channels::{ChannelModel, SideInfoMode, V, X, Y, Z};
use crate::probcore::{Axis, CondPmf, JointPmf};
use crate::{Error, Result};

pub const U: &str = "U";
pub const K: &str = "K";
pub const A: &str = "A";

/// Tolerance for the causal-mode independence of `(U,K,A)` and `V`, and for
/// matching the state marginal to `p_V`.
pub(crate) const INDEP_TOL: f64 = 1e-9;

/// The seven bound families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
}

impl Theorem {
    pub const ALL: [Theorem; 7] = [
        Theorem::T1,
        Theorem::T2,
        Theorem::T3,
        Theorem::T4,
        Theorem::T5,
        Theorem::T6,
        Theorem::T7,
    ];

    pub fn mode(self) -> SideInfoMode {
        use Theorem::*;
        match self {
            T1 | T2 => SideInfoMode::NONCAUSAL,
            T3 | T4 => SideInfoMode::CAUSAL,
            T5 | T6 => SideInfoMode::NONCAUSAL_FEEDBACK,
            T7 => SideInfoMode::CAUSAL_FEEDBACK,
        }
    }

    /// Outer bounds carry the extra auxiliary `A`.
    pub fn uses_a(self) -> bool {
        matches!(self, Theorem::T2 | Theorem::T4 | Theorem::T6)
    }

    pub fn has_sum_cap(self) -> bool {
        matches!(self, Theorem::T2 | Theorem::T6)
    }

    /// Cardinality caps on `U`, `K` (and `A`) for channel alphabets of size
    /// `nx` and `nv`.
    pub fn remark_caps(self, nx: usize, nv: usize) -> AuxDims {
        use Theorem::*;
        let m = nx * nv;
        match self {
            T1 => AuxDims { u: m + 2, k: (m + 2) * (m + 2), a: None },
            T2 | T6 => AuxDims {
                u: m + 2,
                k: (m + 2) * (m + 1) * (m + 2) * (m + 2),
                a: Some((m + 2) * (m + 1)),
            },
            T3 => AuxDims { u: m + 1, k: (m + 1) * (m + 1), a: None },
            T4 => AuxDims { u: m + 1, k: (m + 1) * (m + 1) * m, a: Some(m) },
            T5 => AuxDims { u: m + 2, k: (m + 2) * (m + 1), a: None },
            T7 => AuxDims { u: m + 1, k: (m + 1) * m, a: None },
        }
    }

    pub fn name(self) -> &'static str {
        use Theorem::*;
        match self {
            T1 => "T1",
            T2 => "T2",
            T3 => "T3",
            T4 => "T4",
            T5 => "T5",
            T6 => "T6",
            T7 => "T7",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Theorem::ALL.into_iter().find(|t| t.name().eq_ignore_ascii_case(s))
    }
}

impl std::fmt::Display for Theorem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Secrecy-capacity expressions, one per side-information/feedback setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    N,
    C,
    Nf,
    Cf,
}

impl Variant {
    /// The inner bound whose `min(r1, re)` the variant maximises.
    pub fn theorem(self) -> Theorem {
        match self {
            Variant::N => Theorem::T1,
            Variant::C => Theorem::T3,
            Variant::Nf => Theorem::T5,
            Variant::Cf => Theorem::T7,
        }
    }

    pub fn mode(self) -> SideInfoMode {
        self.theorem().mode()
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "n" => Some(Variant::N),
            "c" => Some(Variant::C),
            "nf" => Some(Variant::Nf),
            "cf" => Some(Variant::Cf),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        self.mode().tag()
    }
}

/// Alphabet sizes of the auxiliaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxDims {
    pub u: usize,
    pub k: usize,
    pub a: Option<usize>,
}

impl AuxDims {
    /// `|U| |K| |A|`
    pub fn w(&self) -> usize {
        self.u * self.k * self.a.unwrap_or(1)
    }

    /// Shrink `K`, then `A`, then `U` until the full joint over
    /// `(U,K,A,V,X,Y,Z)` has at most `max_cells` cells.
    pub fn fit_cells(mut self, channel_cells: usize, max_cells: usize) -> Self {
        let cells = |d: &AuxDims| d.w() * channel_cells;
        while cells(&self) > max_cells {
            let other = self.u * self.a.unwrap_or(1) * channel_cells;
            if self.k > 2 {
                self.k = (max_cells / other).clamp(2, self.k - 1);
                continue;
            }
            match self.a {
                Some(a) if a > 2 => self.a = Some(a - 1),
                _ if self.u > 1 => self.u -= 1,
                _ => break,
            }
        }
        self
    }

    /// True when every size is within `caps`.
    pub fn within(&self, caps: &AuxDims) -> bool {
        self.u <= caps.u
            && self.k <= caps.k
            && match (self.a, caps.a) {
                (None, _) => true,
                (Some(a), Some(c)) => a <= c,
                (Some(_), None) => false,
            }
    }
}

/// Joint pmf over `(U, K, [A], X, V)` together with the scheme family it is
/// meant for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryJoint {
    joint: JointPmf,
    mode: SideInfoMode,
}

impl AuxiliaryJoint {
    pub fn new(joint: JointPmf, mode: SideInfoMode) -> Result<Self> {
        let names: Vec<&str> = joint.axes().iter().map(|a| a.name.as_str()).collect();
        if names != [U, K, X, V] && names != [U, K, A, X, V] {
            return Err(Error::Validation(format!(
                "auxiliary joint must have axes (U,K,[A],X,V), got {names:?}"
            )));
        }
        let aux = Self { joint, mode };
        if mode.is_causal() {
            let dev = aux.independence_gap();
            if dev > INDEP_TOL {
                return Err(Error::Validation(format!(
                    "causal auxiliary joint: (U,K,A) and V are dependent (gap {dev:.3e})"
                )));
            }
        }
        Ok(aux)
    }

    fn aux_axes(dims: AuxDims, x: &Axis, v: &Axis) -> Vec<Axis> {
        let mut axes = vec![Axis::indexed(U, dims.u), Axis::indexed(K, dims.k)];
        if let Some(a) = dims.a {
            axes.push(Axis::indexed(A, a));
        }
        axes.push(Axis::new(X, x.labels.clone()));
        axes.push(Axis::new(V, v.labels.clone()));
        axes
    }

    /// `p(w) p_V(v) p(x|w,v)` where `w = (u,k,a)` is flattened row-major.
    /// `kernel` holds `|W| |V|` rows of length `|X|`, row index `w |V| + v`.
    pub fn from_causal_parts(
        dims: AuxDims,
        x: &Axis,
        v: &Axis,
        pv: &[f64],
        prior: &[f64],
        kernel: &[f64],
    ) -> Result<Self> {
        let (nx, nv) = (x.len(), v.len());
        let mass = (0..dims.w())
            .flat_map(|w| {
                (0..nx).flat_map(move |xi| {
                    (0..nv).map(move |vi| prior[w] * pv[vi] * kernel[(w * nv + vi) * nx + xi])
                })
            })
            .collect();
        let joint = JointPmf::new(Self::aux_axes(dims, x, v), mass)?;
        Self::new(joint, SideInfoMode::CAUSAL)
    }

    /// `p_V(v) p(w,x|v)`; `cond` holds `|V|` rows of length `|W| |X|`.
    pub fn from_noncausal_parts(
        dims: AuxDims,
        x: &Axis,
        v: &Axis,
        pv: &[f64],
        cond: &[f64],
    ) -> Result<Self> {
        let (nx, nv) = (x.len(), v.len());
        let wx = dims.w() * nx;
        let mass = (0..dims.w())
            .flat_map(|w| {
                (0..nx).flat_map(move |xi| (0..nv).map(move |vi| pv[vi] * cond[vi * wx + w * nx + xi]))
            })
            .collect();
        let joint = JointPmf::new(Self::aux_axes(dims, x, v), mass)?;
        Self::new(joint, SideInfoMode::NONCAUSAL)
    }

    /// The binary-example family: `U` constant, `p_K(0) = alpha`,
    /// `p(X=0|K,V)` given by `betas = [b(0,0), b(0,1), b(1,0), b(1,1)]`,
    /// `V` uniform and independent of `K`.
    pub fn binary_example(alpha: f64, betas: [f64; 4]) -> Result<Self> {
        for (i, b) in betas.iter().enumerate() {
            if !(0.0..=1.0).contains(b) {
                return Err(Error::Domain(format!("beta{} = {b} outside [0,1]", i + 1)));
            }
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Domain(format!("alpha = {alpha} outside [0,1]")));
        }
        let bit = |n: &str| Axis::indexed(n, 2);
        let dims = AuxDims { u: 1, k: 2, a: None };
        let kernel: Vec<f64> = (0..2)
            .flat_map(|k| (0..2).flat_map(move |v| [betas[k * 2 + v], 1.0 - betas[k * 2 + v]]))
            .collect();
        Self::from_causal_parts(dims, &bit(X), &bit(V), &[0.5, 0.5], &[alpha, 1.0 - alpha], &kernel)
    }

    /// The binary-example maximiser: `alpha = 1/2`, `X = K xor V`.
    pub fn binary_example_optimum() -> Self {
        Self::binary_example(0.5, [1.0, 0.0, 0.0, 1.0]).expect("valid parameters")
    }

    pub fn joint(&self) -> &JointPmf {
        &self.joint
    }

    pub fn mode(&self) -> SideInfoMode {
        self.mode
    }

    /// Same joint tagged for a different scheme family (re-validated).
    pub fn with_mode(&self, mode: SideInfoMode) -> Result<Self> {
        Self::new(self.joint.clone(), mode)
    }

    pub fn has_a(&self) -> bool {
        self.joint.has_axis(A)
    }

    pub fn dims(&self) -> AuxDims {
        let d = self.joint.dims();
        if self.has_a() {
            AuxDims { u: d[0], k: d[1], a: Some(d[2]) }
        } else {
            AuxDims { u: d[0], k: d[1], a: None }
        }
    }

    pub fn x_axis(&self) -> &Axis {
        self.joint.axis(X).expect("validated")
    }

    pub fn v_axis(&self) -> &Axis {
        self.joint.axis(V).expect("validated")
    }

    /// `max |p(w,v) - p(w) p(v)|` over `w = (u,k,a)`.
    pub fn independence_gap(&self) -> f64 {
        let n = self.joint.axes().len();
        let w_axes: Vec<usize> = (0..n - 2).collect();
        let pw = self.joint.marginal_masses(&w_axes);
        let pv = self.joint.marginal_masses(&[n - 1]);
        let mut keep = w_axes;
        keep.push(n - 1);
        let pwv = self.joint.marginal_masses(&keep);
        let nv = pv.len();
        pwv.iter()
            .enumerate()
            .map(|(i, &m)| (m - pw[i / nv] * pv[i % nv]).abs())
            .fold(0.0, f64::max)
    }

    /// `p(x | u, k, v)` with `A` marginalised out. Rows with zero
    /// probability are filled uniformly.
    pub fn x_kernel(&self) -> Result<CondPmf> {
        let j = &self.joint;
        let keep = j.axis_indices(&[U, K, V, X])?;
        let ukvx = j.marginal_masses(&keep);
        let nx = self.x_axis().len();
        let mut kernel = Vec::with_capacity(ukvx.len());
        for row in ukvx.chunks(nx) {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                kernel.extend(row.iter().map(|p| p / s));
            } else {
                kernel.extend(std::iter::repeat_n(1.0 / nx as f64, nx));
            }
        }
        CondPmf::new(
            vec![j.axis(U)?.clone(), j.axis(K)?.clone(), j.axis(V)?.clone()],
            vec![j.axis(X)?.clone()],
            kernel,
        )
    }
}

/// Attach the channel: `p(u,k,a,x,v) Q1(y|x,v) Q2(z|y)` over
/// `(U, K, [A], V, X, Y, Z)`.
pub fn extend_to_full_joint(aux: &AuxiliaryJoint, m: &ChannelModel) -> Result<JointPmf> {
    if aux.x_axis().labels != m.x_axis().labels {
        return Err(Error::Validation("auxiliary X alphabet differs from the channel".into()));
    }
    if aux.v_axis().labels != m.v_axis().labels {
        return Err(Error::Validation("auxiliary V alphabet differs from the channel".into()));
    }
    let nax = aux.joint.axes().len();
    let pv_aux = aux.joint.marginal_masses(&[nax - 1]);
    let gap = pv_aux
        .iter()
        .zip(m.pv().mass())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if gap > INDEP_TOL {
        return Err(Error::Validation(format!(
            "auxiliary state marginal differs from p_V by {gap:.3e}"
        )));
    }
    if aux.mode.is_causal() && aux.independence_gap() > INDEP_TOL {
        return Err(Error::Validation("causal auxiliary joint violates V-independence".into()));
    }

    let (nx, nv, ny, nz) = (m.nx(), m.nv(), m.ny(), m.nz());
    let w = aux.dims().w();
    let src = aux.joint.mass();
    let mut mass = Vec::with_capacity(w * nv * nx * ny * nz);
    for wi in 0..w {
        for v in 0..nv {
            for x in 0..nx {
                let p = src[(wi * nx + x) * nv + v];
                for y in 0..ny {
                    let pxy = p * m.q1_at(y, x, v);
                    for z in 0..nz {
                        mass.push(pxy * m.q2_at(z, y));
                    }
                }
            }
        }
    }
    let mut axes: Vec<Axis> = aux.joint.axes()[..nax - 2].to_vec();
    axes.push(m.v_axis().clone());
    axes.push(m.x_axis().clone());
    axes.push(m.y_axis().clone());
    axes.push(m.z_axis().clone());
    debug_assert_eq!(axes.iter().map(|a| a.name.as_str()).filter(|n| *n == Y || *n == Z).count(), 2);
    JointPmf::new(axes, mass)
}
