use super::codebook::Codebook;
use super::Symbol;
use crate::channels::{ChannelModel, V, X, Y, Z};
use crate::regions::{extend_to_full_joint, AuxiliaryJoint, K, U};
use crate::rng::{sample_index, stream, StreamRng, TAG_CALIBRATE};
use crate::Result;

/// Deviation statistics of one typicality test: for matched tuples drawn
/// from the joint, and for a candidate drawn independently of the
/// observation.
struct StageStats {
    matched: Vec<f64>,
    independent: Vec<f64>,
    /// Decoding: number of wrong competitors. Covering: candidates per bin.
    weight: usize,
    covering: bool,
}

impl StageStats {
    fn miss(&self, eps: f64) -> f64 {
        frac(&self.matched, |d| d > eps)
    }

    fn hit_independent(&self, eps: f64) -> f64 {
        frac(&self.independent, |d| d <= eps)
    }

    /// Estimated failure probability of the stage at tolerance `eps`.
    fn failure(&self, eps: f64) -> f64 {
        if self.covering {
            (1.0 - self.hit_independent(eps)).powi(self.weight as i32)
        } else {
            (self.miss(eps) + self.weight as f64 * self.hit_independent(eps)).min(1.0)
        }
    }
}

fn frac(xs: &[f64], pred: impl Fn(f64) -> bool) -> f64 {
    xs.iter().filter(|&&x| pred(x)).count() as f64 / xs.len().max(1) as f64
}

/// Tuple of sequences drawn i.i.d. from the full joint.
struct Draw {
    u: Vec<Symbol>,
    k: Vec<Symbol>,
    v: Vec<Symbol>,
    y: Vec<Symbol>,
    z: Vec<Symbol>,
}

/// Pick the typicality tolerance for `cb` that minimises the summed
/// union-bound estimates of the encoder covering failures and the decoder
/// miss/false-accept rates, from `samples` Monte-Carlo draws of length-`N`
/// sequence tuples.
///
/// The tolerance is the midpoint between two consecutive observed deviation
/// values, so the choice never sits on a count-lattice boundary.
pub fn calibrate_eps(cb: &Codebook, m: &ChannelModel, aux: &AuxiliaryJoint, samples: usize, seed: u64) -> Result<f64> {
    let full = extend_to_full_joint(aux, m)?;
    let order = full.axis_indices(&[U, K, V, X, Y, Z])?;
    let flat = full.marginal_masses(&order);
    let a = cb.alphabets;
    let pu = full.marginal_masses(&[full.axis_index(U)?]);
    let puk = full.marginal_masses(&full.axis_indices(&[U, K])?);
    let mut rng = stream(seed, &[TAG_CALIBRATE]);
    let n = cb.n;

    let draw = |rng: &mut StreamRng| -> Draw {
        let mut d = Draw { u: vec![], k: vec![], v: vec![], y: vec![], z: vec![] };
        for _ in 0..n {
            // row-major over (U, K, V, X, Y, Z)
            let mut c = sample_index(&flat, rng);
            d.z.push((c % a.z) as Symbol);
            c /= a.z;
            d.y.push((c % a.y) as Symbol);
            c /= a.y * a.x;
            d.v.push((c % a.v) as Symbol);
            c /= a.v;
            d.k.push((c % a.k) as Symbol);
            d.u.push((c / a.k) as Symbol);
        }
        d
    };

    let c = cb.counts;
    let t = &cb.tables;
    let stage = |weight: usize, covering: bool| StageStats { matched: vec![], independent: vec![], weight, covering };
    // rx1 u, rx1 k, rx2 u, then the two covering stages of the noncausal encoders
    let mut stages = vec![
        (stage(c.u_total() - c.u_per_bin, false), &t.dec1_u),
        (stage(c.u_per_bin * c.k_total() - c.k_per_bin, false), &t.dec1_k),
        (stage(c.u_total() - c.u_per_bin, false), &t.dec2_u),
    ];
    if !cb.mode.is_causal() {
        stages.push((stage(c.u_per_bin, true), &t.enc_u));
        stages.push((stage(c.k_per_bin, true), &t.enc_k));
    }

    let idx = |s: &[Symbol]| -> Vec<usize> { s.iter().map(|&x| x as usize).collect() };
    let pair = |p: &[Symbol], q: &[Symbol], nq: usize| -> Vec<usize> {
        p.iter().zip(q).map(|(&x, &y)| x as usize * nq + y as usize).collect()
    };
    for _ in 0..samples {
        let d = draw(&mut rng);
        // competitors: u independent of everything, k independent given u
        let u2: Vec<Symbol> = (0..n).map(|_| sample_index(&pu, &mut rng) as Symbol).collect();
        let k2: Vec<Symbol> = d
            .u
            .iter()
            .map(|&ui| sample_index(&puk[ui as usize * a.k..(ui as usize + 1) * a.k], &mut rng) as Symbol)
            .collect();
        let (oy, oz, ov) = (idx(&d.y), idx(&d.z), idx(&d.v));
        let (ouy, ouv) = (pair(&d.u, &d.y, a.y), pair(&d.u, &d.v, a.v));
        let rows: [(&[Symbol], &[Symbol], &[usize]); 5] =
            [(&d.u, &u2, &oy), (&d.k, &k2, &ouy), (&d.u, &u2, &oz), (&d.u, &u2, &ov), (&d.k, &k2, &ouv)];
        for ((st, table), (mat, ind, obs)) in stages.iter_mut().zip(rows) {
            st.matched.push(table.deviation(mat, obs));
            st.independent.push(table.deviation(ind, obs));
        }
    }

    let mut grid: Vec<f64> = stages
        .iter()
        .flat_map(|(s, _)| s.matched.iter().chain(&s.independent))
        .copied()
        .filter(|x| x.is_finite())
        .collect();
    grid.push(0.0);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let candidates: Vec<f64> = grid
        .windows(2)
        .map(|w| 0.5 * (w[0] + w[1]))
        .chain(std::iter::once(grid.last().copied().unwrap_or(0.0) + 0.5 / n as f64))
        .collect();

    let cost = |eps: f64| -> f64 { stages.iter().map(|(s, _)| s.failure(eps)).sum() };
    let mut best = (f64::INFINITY, candidates[0]);
    for &eps in &candidates {
        let j = cost(eps);
        if j < best.0 - 1e-12 {
            best = (j, eps);
        }
    }
    Ok(best.1)
}
