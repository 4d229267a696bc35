use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::aux::{extend_to_full_joint, AuxDims, AuxiliaryJoint, Theorem, Variant};
use super::bounds::{eval_bounds, BoundSet, RateTriple, MEMBERSHIP_SLACK};
use crate::channels::ChannelModel;
use crate::rng::{stream, StreamRng, TAG_CHAIN, TAG_WEIGHTS};
use crate::{Error, Exec, Result};

const CONCENTRATIONS: [f64; 3] = [0.05, 0.2, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Auxiliary alphabet sizes; `None` uses the cardinality caps shrunk to
    /// fit `max_cells`.
    pub dims: Option<AuxDims>,
    /// Candidates per restart chain.
    pub chain_len: usize,
    /// Upper limit on cells of the full joint.
    pub max_cells: usize,
    pub exec: Exec,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { dims: None, chain_len: 500, max_cells: 1 << 16, exec: Exec::default() }
    }
}

impl SearchConfig {
    fn resolve_dims(&self, m: &ChannelModel, theorem: Theorem) -> Result<AuxDims> {
        let channel_cells = m.nx() * m.nv() * m.ny() * m.nz();
        let dims = match self.dims {
            Some(d) => d,
            None => theorem.remark_caps(m.nx(), m.nv()).fit_cells(channel_cells, self.max_cells),
        };
        if dims.u == 0 || dims.k == 0 || dims.a == Some(0) {
            return Err(Error::Usage("auxiliary alphabets must be nonempty".into()));
        }
        if theorem.uses_a() != dims.a.is_some() {
            return Err(Error::Usage(format!(
                "{theorem} {} an auxiliary A",
                if theorem.uses_a() { "requires" } else { "does not take" }
            )));
        }
        if self.chain_len == 0 {
            return Err(Error::Usage("chain length must be positive".into()));
        }
        Ok(dims)
    }
}

/// One point of an estimated frontier together with the auxiliary
/// distribution that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub triple: RateTriple,
    pub bounds: BoundSet,
    pub candidate_index: usize,
    pub aux: AuxiliaryJoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub variant: Variant,
    pub value: f64,
    pub bounds: BoundSet,
    pub candidate_index: usize,
    pub aux: AuxiliaryJoint,
}

/// Row-stochastic parameterisation of an auxiliary joint.
#[derive(Debug, Clone)]
struct Params {
    /// Causal: `p(u)`, then `|U|` rows of `p(k,a|u)`, then `|W||V|` rows of
    /// `p(x|w,v)`.
    /// Noncausal: `|V|` rows of `p(w,x|v)`.
    rows: Vec<Vec<f64>>,
}

struct Space<'a> {
    m: &'a ChannelModel,
    theorem: Theorem,
    dims: AuxDims,
}

impl Space<'_> {
    /// Rows holding the distribution of the auxiliaries (causal form).
    fn mixing_rows(&self) -> usize {
        1 + self.dims.u
    }

    fn row_shapes(&self) -> Vec<usize> {
        let (w, nx, nv) = (self.dims.w(), self.m.nx(), self.m.nv());
        if self.theorem.mode().is_causal() {
            let (nu, per_u) = (self.dims.u, w / self.dims.u);
            std::iter::once(nu)
                .chain(std::iter::repeat_n(per_u, nu))
                .chain(std::iter::repeat_n(nx, w * nv))
                .collect()
        } else {
            vec![w * nx; nv]
        }
    }

    fn sample(&self, conc: f64, rng: &mut StreamRng) -> Params {
        let gamma = Gamma::new(conc, 1.0).expect("positive shape");
        let rows = self
            .row_shapes()
            .into_iter()
            .map(|n| {
                let mut r: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
                let s: f64 = r.iter().sum();
                if s > 0.0 && s.is_finite() {
                    r.iter_mut().for_each(|x| *x /= s);
                } else {
                    r.iter_mut().for_each(|x| *x = 0.0);
                    r[rng.random_range(0..n)] = 1.0;
                }
                r
            })
            .collect();
        Params { rows }
    }

    /// One refinement move: jitter a cell, move mass between two cells of a
    /// row, or snap `X` to a deterministic function of `(W, V)`.
    fn perturb(&self, p: &Params, scale: f64, rng: &mut StreamRng) -> Params {
        let mut out = p.clone();
        if rng.random_bool(0.05) {
            self.snap_x(&mut out);
            return out;
        }
        let causal = self.theorem.mode().is_causal();
        // the mixing rows of the causal form get half of all moves
        let r = if causal && rng.random_bool(0.5) {
            rng.random_range(0..self.mixing_rows())
        } else {
            rng.random_range(0..out.rows.len())
        };
        let row = &mut out.rows[r];
        let n = row.len();
        if n == 1 {
            return out;
        }
        let i = rng.random_range(0..n);
        if rng.random_bool(0.4) {
            let d: f64 = rng.random_range(-1.0..1.0) * scale;
            row[i] = (row[i] + d * row[i].max(scale)).max(0.0);
        } else {
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let f = if rng.random_bool(0.25) { 1.0 } else { rng.random::<f64>() };
            let moved = row[j] * f;
            row[j] -= moved;
            row[i] += moved;
        }
        let s: f64 = row.iter().sum();
        if s <= 0.0 {
            return p.clone();
        }
        row.iter_mut().for_each(|x| *x /= s);
        out
    }

    /// Move all mass of each `(w, v)` onto its most likely `x`.
    fn snap_x(&self, p: &mut Params) {
        let nx = self.m.nx();
        let skip = if self.theorem.mode().is_causal() { self.mixing_rows() } else { 0 };
        let rows = &mut p.rows[skip..];
        for row in rows {
            for group in row.chunks_mut(nx) {
                let total: f64 = group.iter().sum();
                let best = (0..nx).fold(0, |b, i| if group[i] > group[b] { i } else { b });
                group.iter_mut().for_each(|x| *x = 0.0);
                group[best] = total;
            }
        }
    }

    fn build(&self, p: &Params) -> Result<AuxiliaryJoint> {
        let (x, v, pv) = (self.m.x_axis(), self.m.v_axis(), self.m.pv().mass());
        if self.theorem.mode().is_causal() {
            let mix = self.mixing_rows();
            let prior: Vec<f64> = p.rows[1..mix]
                .iter()
                .zip(&p.rows[0])
                .flat_map(|(row, &pu)| row.iter().map(move |&q| pu * q))
                .collect();
            let kernel: Vec<f64> = p.rows[mix..].concat();
            AuxiliaryJoint::from_causal_parts(self.dims, x, v, pv, &prior, &kernel)
        } else {
            AuxiliaryJoint::from_noncausal_parts(self.dims, x, v, pv, &p.rows.concat())
        }
    }

    fn evaluate(&self, aux: &AuxiliaryJoint) -> Result<BoundSet> {
        eval_bounds(self.theorem, &extend_to_full_joint(aux, self.m)?)
    }
}

/// Runs the chains covering candidates `0..budget` and hands every
/// evaluated candidate to `visit(chain, index, aux, bounds)`. Each chain
/// greedily improves `objective`. Returns one accumulator per chain.
fn run_chains<T, O, F>(
    m: &ChannelModel,
    theorem: Theorem,
    budget: usize,
    seed: u64,
    cfg: &SearchConfig,
    objective: O,
    visit: F,
) -> Result<Vec<T>>
where
    T: Default + Send,
    O: Fn(usize, &BoundSet) -> f64 + Sync + Send,
    F: Fn(&mut T, usize, &AuxiliaryJoint, &BoundSet) + Sync + Send,
{
    let dims = cfg.resolve_dims(m, theorem)?;
    let space = Space { m, theorem, dims };
    let len = cfg.chain_len;
    let chains = budget.div_ceil(len);
    let results = cfg.exec.map_indexed(chains, |c| -> Result<T> {
        let mut rng = stream(seed, &[TAG_CHAIN, c as u64]);
        let steps = len.min(budget - c * len);
        let conc = CONCENTRATIONS[c % CONCENTRATIONS.len()];
        let mut acc = T::default();
        let mut cur = space.sample(conc, &mut rng);
        let aux = space.build(&cur)?;
        let b = space.evaluate(&aux)?;
        let mut best = objective(c, &b);
        visit(&mut acc, c * len, &aux, &b);
        for t in 1..steps {
            let scale = 0.5 * (1.0 - t as f64 / len as f64) + 0.02;
            let cand = space.perturb(&cur, scale, &mut rng);
            let aux = space.build(&cand)?;
            let b = space.evaluate(&aux)?;
            visit(&mut acc, c * len + t, &aux, &b);
            let score = objective(c, &b);
            if score > best {
                best = score;
                cur = cand;
            }
        }
        Ok(acc)
    });
    results.into_iter().collect()
}

fn chain_weights(seed: u64, chain: usize) -> [f64; 3] {
    let mut rng = stream(seed, &[TAG_WEIGHTS, chain as u64]);
    let mut w = [0.0; 3];
    for x in &mut w {
        *x = -(1.0 - rng.random::<f64>()).ln();
    }
    // odd chains explore the zero-common-rate face
    if chain % 2 == 1 {
        w[0] = 0.0;
    }
    let s: f64 = w.iter().sum();
    w.map(|x| x / s)
}

/// `a` weakly dominates `b` in every coordinate and the two are not equal
/// within slack; or the two match and `a` came first.
fn dominates(a: &FrontierPoint, b: &FrontierPoint) -> bool {
    let (x, y) = (a.triple.as_array(), b.triple.as_array());
    let geq = x.iter().zip(&y).all(|(p, q)| *p >= q - MEMBERSHIP_SLACK);
    if !geq {
        return false;
    }
    let strict = x.iter().zip(&y).any(|(p, q)| *p > q + MEMBERSHIP_SLACK);
    strict || a.candidate_index < b.candidate_index
}

fn insert_pareto(front: &mut Vec<FrontierPoint>, p: FrontierPoint) {
    if front.iter().any(|f| dominates(f, &p)) {
        return;
    }
    front.retain(|f| !dominates(&p, f));
    front.push(p);
}

/// Non-dominated subset of `points`, ordered by candidate index.
pub fn pareto_frontier(mut points: Vec<FrontierPoint>) -> Vec<FrontierPoint> {
    points.sort_by_key(|p| p.candidate_index);
    let mut front = Vec::new();
    for p in points {
        insert_pareto(&mut front, p);
    }
    front.sort_by(|a, b| {
        a.candidate_index
            .cmp(&b.candidate_index)
            .then(a.triple.r0.total_cmp(&b.triple.r0))
    });
    front
}

fn corner_points_of(index: usize, aux: &AuxiliaryJoint, b: &BoundSet) -> Vec<FrontierPoint> {
    b.corner_points()
        .into_iter()
        .map(|triple| FrontierPoint { triple, bounds: *b, candidate_index: index, aux: aux.clone() })
        .collect()
}

/// Estimated maximal points of the region of `theorem` from `budget`
/// candidate auxiliary distributions.
pub fn region_scan(m: &ChannelModel, theorem: Theorem, budget: usize, seed: u64) -> Result<Vec<FrontierPoint>> {
    region_scan_with(m, theorem, budget, seed, &SearchConfig::default())
}

pub fn region_scan_with(
    m: &ChannelModel,
    theorem: Theorem,
    budget: usize,
    seed: u64,
    cfg: &SearchConfig,
) -> Result<Vec<FrontierPoint>> {
    if budget == 0 {
        return Err(Error::Usage("search budget must be positive".into()));
    }
    let weights: Vec<[f64; 3]> = (0..budget.div_ceil(cfg.chain_len.max(1)))
        .map(|c| chain_weights(seed, c))
        .collect();
    // every fourth chain climbs along the diagonal r1 = re of the r0 = 0
    // face (Chebyshev scalarisation); the rest use weighted sums
    let objective = |c: usize, b: &BoundSet| {
        let w = weights[c];
        b.corner_points()
            .iter()
            .map(|t| {
                if c % 4 == 1 {
                    t.r1.min(t.re)
                } else {
                    w[0] * t.r0 + w[1] * t.r1 + w[2] * t.re
                }
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let visit = |front: &mut Vec<FrontierPoint>, i: usize, aux: &AuxiliaryJoint, b: &BoundSet| {
        for p in corner_points_of(i, aux, b) {
            insert_pareto(front, p);
        }
    };
    let locals = run_chains(m, theorem, budget, seed, cfg, objective, visit)?;
    Ok(pareto_frontier(locals.into_iter().flatten().collect()))
}

/// Largest `min(r1_cap, re_cap)` over `budget` candidates of the variant's
/// inner bound.
pub fn secrecy_capacity(m: &ChannelModel, variant: Variant, budget: usize, seed: u64) -> Result<CapacityEstimate> {
    secrecy_capacity_with(m, variant, budget, seed, &SearchConfig::default())
}

pub fn secrecy_capacity_with(
    m: &ChannelModel,
    variant: Variant,
    budget: usize,
    seed: u64,
    cfg: &SearchConfig,
) -> Result<CapacityEstimate> {
    if budget == 0 {
        return Err(Error::Usage("search budget must be positive".into()));
    }
    type Best = Option<(f64, usize, BoundSet, AuxiliaryJoint)>;
    let visit = |best: &mut Best, i: usize, aux: &AuxiliaryJoint, b: &BoundSet| {
        let v = b.secrecy_rate();
        if best.as_ref().is_none_or(|(bv, ..)| v > *bv) {
            *best = Some((v, i, *b, aux.clone()));
        }
    };
    let locals: Vec<Best> =
        run_chains(m, variant.theorem(), budget, seed, cfg, |_, b| b.secrecy_rate(), visit)?;
    // chains are visited in index order, so strict comparison keeps the
    // earliest maximiser
    let (value, candidate_index, bounds, aux) = locals
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("budget is positive");
    Ok(CapacityEstimate { variant, value, bounds, candidate_index, aux })
}

/// The first `n` candidates of the random-restart sampler for the scheme
/// family of `theorem`, without refinement. Theorems sharing a mode and
/// auxiliary sizes see identical candidates.
pub fn sample_candidates(
    m: &ChannelModel,
    theorem: Theorem,
    dims: AuxDims,
    n: usize,
    seed: u64,
) -> Result<Vec<AuxiliaryJoint>> {
    let cfg = SearchConfig { dims: Some(dims), ..SearchConfig::default() };
    let dims = cfg.resolve_dims(m, theorem)?;
    let space = Space { m, theorem, dims };
    (0..n)
        .map(|i| {
            let mut rng = stream(seed, &[TAG_CHAIN, i as u64]);
            let conc = CONCENTRATIONS[i % CONCENTRATIONS.len()];
            space.build(&space.sample(conc, &mut rng))
        })
        .collect()
}

/// Bounds of `theorem` at each auxiliary distribution.
pub fn evaluate_candidates(
    m: &ChannelModel,
    theorem: Theorem,
    candidates: &[AuxiliaryJoint],
    exec: Exec,
) -> Result<Vec<BoundSet>> {
    exec.map_slice(candidates, |aux| {
        let aux = aux.with_mode(theorem.mode())?;
        eval_bounds(theorem, &extend_to_full_joint(&aux, m)?)
    })
    .into_iter()
    .collect()
}
