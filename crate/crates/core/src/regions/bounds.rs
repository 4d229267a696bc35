use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::aux::{Theorem, A, INDEP_TOL, K, U};
use crate::channels::{V, Y, Z};
use crate::probcore::{JointPmf, CLAMP_TOL};
use crate::{Error, Result};

/// Slack used when testing whether a rate triple lies in a region.
pub const MEMBERSHIP_SLACK: f64 = 1e-9;

/// Caps of one bound family at one auxiliary distribution. Every cap is
/// nonnegative; `clamped` records whether any raw expression was negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub theorem: Theorem,
    pub r0_cap: f64,
    pub r1_cap: f64,
    pub re_cap: f64,
    pub sum_cap: Option<f64>,
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateTriple {
    pub r0: f64,
    pub r1: f64,
    pub re: f64,
}

impl RateTriple {
    pub fn new(r0: f64, r1: f64, re: f64) -> Self {
        Self { r0, r1, re }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.r0, self.r1, self.re]
    }
}

impl BoundSet {
    /// Maximal points of the region slice for this auxiliary distribution.
    /// One point, or two when a sum-rate cap trades `r0` against `r1`.
    pub fn corner_points(&self) -> Vec<RateTriple> {
        let point = |r0: f64, r1: f64| RateTriple::new(r0, r1, self.re_cap.min(r1));
        match self.sum_cap {
            None => vec![point(self.r0_cap, self.r1_cap)],
            Some(s) => {
                let r0a = self.r0_cap.min(s);
                let a = point(r0a, self.r1_cap.min(s - r0a));
                let r1b = self.r1_cap.min(s);
                let b = point(self.r0_cap.min(s - r1b), r1b);
                if (a.r0 - b.r0).abs() <= MEMBERSHIP_SLACK && (a.r1 - b.r1).abs() <= MEMBERSHIP_SLACK {
                    vec![a]
                } else {
                    vec![a, b]
                }
            }
        }
    }

    /// `min(r1_cap, re_cap)`: the secrecy rate supported at this point.
    pub fn secrecy_rate(&self) -> f64 {
        self.r1_cap.min(self.re_cap)
    }
}

/// Whether `t` satisfies every inequality of `b` (within
/// [`MEMBERSHIP_SLACK`]).
pub fn membership(b: &BoundSet, t: &RateTriple) -> bool {
    let s = MEMBERSHIP_SLACK;
    t.r0 >= -s
        && t.r1 >= -s
        && t.re >= -s
        && t.r0 <= b.r0_cap + s
        && t.r1 <= b.r1_cap + s
        && t.re <= b.re_cap + s
        && t.re <= t.r1 + s
        && b.sum_cap.is_none_or(|c| t.r0 + t.r1 <= c + s)
}

/// Memoised entropies of axis subsets of one joint.
struct Info<'a> {
    j: &'a JointPmf,
    cache: HashMap<Vec<usize>, f64>,
}

impl<'a> Info<'a> {
    fn new(j: &'a JointPmf) -> Self {
        Self { j, cache: HashMap::new() }
    }

    fn h(&mut self, set: &[usize]) -> f64 {
        let mut key = set.to_vec();
        key.sort_unstable();
        key.dedup();
        if let Some(&v) = self.cache.get(&key) {
            return v;
        }
        let v = self.j.entropy_at(&key);
        self.cache.insert(key, v);
        v
    }

    /// `I(a; b | c)`
    fn i(&mut self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        let cat = |x: &[usize], y: &[usize]| [x, y].concat();
        let v = self.h(&cat(a, c)) + self.h(&cat(b, c)) - self.h(&[a, b, c].concat()) - self.h(c);
        if (-CLAMP_TOL..0.0).contains(&v) {
            0.0
        } else {
            v
        }
    }
}

/// Evaluate the caps of `theorem` on a full joint over
/// `(U, K, [A], V, X, Y, Z)` as produced by
/// [`extend_to_full_joint`](super::extend_to_full_joint).
pub fn eval_bounds(theorem: Theorem, full: &JointPmf) -> Result<BoundSet> {
    if theorem.uses_a() && !full.has_axis(A) {
        return Err(Error::Usage(format!("{theorem} needs an auxiliary A axis")));
    }
    // X never appears in any expression
    let mut names = vec![U, K];
    if full.has_axis(A) {
        names.push(A);
    }
    names.extend([V, Y, Z]);
    let j = full.marginal(&names)?;
    let ix = |n: &str| j.axis_index(n).map(|i| vec![i]);
    let (u, k, v, y, z) = (ix(U)?, ix(K)?, ix(V)?, ix(Y)?, ix(Z)?);
    let a = if j.has_axis(A) { ix(A)? } else { Vec::new() };

    if theorem.mode().is_causal() {
        let w: Vec<usize> = [&u[..], &k, &a].concat();
        let gap = independence_gap(&j, &w, v[0]);
        if gap > INDEP_TOL {
            return Err(Error::Validation(format!(
                "{theorem} requires (U,K,A) independent of V (gap {gap:.3e})"
            )));
        }
    }

    let mut f = Info::new(&j);
    let ua: Vec<usize> = [&u[..], &a].concat();
    let uak: Vec<usize> = [&ua[..], &k].concat();
    use Theorem::*;
    let r0 = match theorem {
        T1 | T2 | T5 | T6 => f.i(&u, &z, &[]) - f.i(&u, &v, &[]),
        T3 | T4 | T7 => f.i(&u, &z, &[]),
    };
    let r1 = match theorem {
        T1 | T5 => f.i(&k, &y, &u) - f.i(&k, &v, &u),
        T2 | T6 => f.i(&k, &y, &ua) - f.i(&k, &v, &ua),
        T3 | T4 | T7 => f.i(&k, &y, &u),
    };
    let sum = match theorem {
        T2 | T6 => Some(f.i(&uak, &y, &[]) - f.i(&uak, &v, &[])),
        _ => None,
    };
    let re = match theorem {
        T1 => f.i(&k, &y, &u) - f.i(&k, &z, &u),
        T2 => f.i(&k, &y, &ua) - f.i(&k, &v, &ua) - f.i(&k, &z, &u) + f.i(&k, &v, &u),
        T3 => f.i(&k, &y, &u) - f.i(&k, &z, &u),
        T4 => f.i(&k, &y, &u) - f.i(&k, &z, &a),
        T5 | T6 | T7 => f.h(&[y[0], z[0]]) - f.h(&z),
    };

    let mut clamped = false;
    let mut cap = |x: f64| {
        if x < -CLAMP_TOL {
            clamped = true;
        }
        x.max(0.0)
    };
    Ok(BoundSet {
        theorem,
        r0_cap: cap(r0),
        r1_cap: cap(r1),
        re_cap: cap(re),
        sum_cap: sum.map(&mut cap),
        clamped,
    })
}

fn independence_gap(j: &JointPmf, w: &[usize], v: usize) -> f64 {
    let pw = j.marginal_masses(w);
    let pv = j.marginal_masses(&[v]);
    let pwv = j.marginal_masses(&[w, &[v]].concat());
    let nv = pv.len();
    pwv.iter()
        .enumerate()
        .map(|(i, &m)| (m - pw[i / nv] * pv[i % nv]).abs())
        .fold(0.0, f64::max)
}
