use serde::{Deserialize, Serialize};

use super::{neumaier_sum, NORM_TOL};
use crate::{Error, Result};

fn check_labels(what: &str, labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::Validation(format!("{what}: empty alphabet")));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::Validation(format!("{what}: duplicate label {l:?}")));
        }
    }
    Ok(())
}

fn check_mass(what: &str, mass: &[f64], tol: f64) -> Result<()> {
    if let Some(m) = mass.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
        return Err(Error::Validation(format!("{what}: mass {m} is not a nonnegative number")));
    }
    let total = neumaier_sum(mass.iter().copied());
    if (total - 1.0).abs() > tol {
        return Err(Error::Validation(format!("{what}: total mass {total} is not 1")));
    }
    Ok(())
}

/// Distribution over one labelled alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinitePmf {
    labels: Vec<String>,
    mass: Vec<f64>,
}

impl FinitePmf {
    pub fn new(labels: Vec<String>, mass: Vec<f64>) -> Result<Self> {
        check_labels("pmf", &labels)?;
        if labels.len() != mass.len() {
            return Err(Error::Validation(format!(
                "pmf: {} labels but {} masses",
                labels.len(),
                mass.len()
            )));
        }
        check_mass("pmf", &mass, NORM_TOL)?;
        Ok(Self { labels, mass })
    }

    /// Labels `0..n` as strings.
    pub fn indexed(mass: Vec<f64>) -> Result<Self> {
        Self::new(index_labels(mass.len()), mass)
    }

    pub fn uniform(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        Self::new(labels, vec![1.0 / n as f64; n])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn prob_of(&self, label: &str) -> Option<f64> {
        self.labels.iter().position(|l| l == label).map(|i| self.mass[i])
    }
}

pub(crate) fn index_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// A named random variable and its alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub labels: Vec<String>,
}

impl Axis {
    pub fn new(name: impl Into<String>, labels: Vec<String>) -> Self {
        Self { name: name.into(), labels }
    }

    /// Axis with labels `0..size`.
    pub fn indexed(name: impl Into<String>, size: usize) -> Self {
        Self::new(name, index_labels(size))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn check_axes(what: &str, axes: &[Axis]) -> Result<()> {
    for (i, a) in axes.iter().enumerate() {
        check_labels(&format!("{what} axis {}", a.name), &a.labels)?;
        if axes[..i].iter().any(|b| b.name == a.name) {
            return Err(Error::Validation(format!("{what}: duplicate axis {}", a.name)));
        }
    }
    Ok(())
}

fn shape_len(axes: &[Axis]) -> usize {
    axes.iter().map(Axis::len).product()
}

/// Dense joint distribution. Storage is row-major in axis declaration order
/// (the last axis varies fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    axes: Vec<Axis>,
    mass: Vec<f64>,
}

impl JointPmf {
    pub fn new(axes: Vec<Axis>, mass: Vec<f64>) -> Result<Self> {
        check_axes("joint", &axes)?;
        if shape_len(&axes) != mass.len() {
            return Err(Error::Validation(format!(
                "joint: shape holds {} cells but {} masses given",
                shape_len(&axes),
                mass.len()
            )));
        }
        check_mass("joint", &mass, NORM_TOL)?;
        Ok(Self { axes, mass })
    }

    /// Build from a function of the multi-index.
    pub fn from_fn(axes: Vec<Axis>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let dims: Vec<usize> = axes.iter().map(Axis::len).collect();
        let mut mass = Vec::with_capacity(dims.iter().product());
        for_each_index(&dims, |idx| mass.push(f(idx)));
        Self::new(axes, mass)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn dims(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    pub fn has_axis(&self, name: &str) -> bool {
        self.axes.iter().any(|a| a.name == name)
    }

    pub fn axis(&self, name: &str) -> Result<&Axis> {
        self.axes
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| Error::Usage(format!("joint has no axis {name:?}")))
    }

    pub fn axis_index(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::Usage(format!("joint has no axis {name:?}")))
    }

    pub fn axis_indices(&self, names: &[&str]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.axis_index(n)).collect()
    }

    /// Probability at a multi-index.
    pub fn prob(&self, idx: &[usize]) -> f64 {
        let mut flat = 0;
        for (a, &i) in self.axes.iter().zip(idx) {
            flat = flat * a.len() + i;
        }
        self.mass[flat]
    }

    /// Marginal masses over the given axis positions, laid out row-major in
    /// the order the positions are listed.
    pub(crate) fn marginal_masses(&self, keep: &[usize]) -> Vec<f64> {
        let dims = self.dims();
        let mut out_stride = vec![0usize; dims.len()];
        let mut s = 1;
        for &k in keep.iter().rev() {
            out_stride[k] += s;
            s *= dims[k];
        }
        let mut out = vec![0.0; s];
        if keep.is_empty() {
            out[0] = self.mass.iter().sum();
            return out;
        }
        // odometer over all cells, tracking the output offset incrementally
        let n = dims.len();
        let mut idx = vec![0usize; n];
        let mut target = 0usize;
        for &m in &self.mass {
            out[target] += m;
            let mut ax = n;
            while ax > 0 {
                ax -= 1;
                idx[ax] += 1;
                target += out_stride[ax];
                if idx[ax] < dims[ax] {
                    break;
                }
                target -= out_stride[ax] * dims[ax];
                idx[ax] = 0;
            }
        }
        out
    }

    /// Marginal joint over the named axes, in the listed order.
    pub fn marginal(&self, names: &[&str]) -> Result<JointPmf> {
        let keep = self.axis_indices(names)?;
        let mass = self.marginal_masses(&keep);
        let axes = keep.iter().map(|&k| self.axes[k].clone()).collect();
        JointPmf::new(axes, mass)
    }

    pub fn marginal_pmf(&self, name: &str) -> Result<FinitePmf> {
        let k = self.axis_index(name)?;
        FinitePmf::new(self.axes[k].labels.clone(), self.marginal_masses(&[k]))
    }

    /// Reorder the symbols of one axis: new symbol `j` is old symbol `perm[j]`.
    pub fn permute_axis(&self, name: &str, perm: &[usize]) -> Result<JointPmf> {
        let k = self.axis_index(name)?;
        let dims = self.dims();
        if perm.len() != dims[k] {
            return Err(Error::Usage("permutation length mismatch".into()));
        }
        let mut old = vec![0usize; dims.len()];
        let mut axes = self.axes.clone();
        axes[k].labels = perm.iter().map(|&p| self.axes[k].labels[p].clone()).collect();
        JointPmf::from_fn(axes, |idx| {
            old.copy_from_slice(idx);
            old[k] = perm[idx[k]];
            self.prob(&old)
        })
    }
}

/// Visit every multi-index of `dims` in row-major order.
pub(crate) fn for_each_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    if dims.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; dims.len()];
    loop {
        f(&idx);
        let mut ax = dims.len();
        loop {
            if ax == 0 {
                return;
            }
            ax -= 1;
            idx[ax] += 1;
            if idx[ax] < dims[ax] {
                break;
            }
            idx[ax] = 0;
        }
    }
}

/// Stochastic kernel from a tuple of given axes to a tuple of output axes.
/// Row `r` (row-major over the given axes) is a distribution over the output
/// tuple (row-major over the output axes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondPmf {
    given: Vec<Axis>,
    out: Vec<Axis>,
    kernel: Vec<f64>,
}

impl CondPmf {
    pub fn new(given: Vec<Axis>, out: Vec<Axis>, kernel: Vec<f64>) -> Result<Self> {
        let mut all = given.clone();
        all.extend(out.iter().cloned());
        check_axes("kernel", &all)?;
        let rows = shape_len(&given);
        let width = shape_len(&out);
        if rows * width != kernel.len() {
            return Err(Error::Validation(format!(
                "kernel: expected {} entries, got {}",
                rows * width,
                kernel.len()
            )));
        }
        for r in 0..rows {
            check_mass(&format!("kernel row {r}"), &kernel[r * width..(r + 1) * width], NORM_TOL)?;
        }
        Ok(Self { given, out, kernel })
    }

    pub fn from_fn(
        given: Vec<Axis>,
        out: Vec<Axis>,
        mut f: impl FnMut(&[usize], &[usize]) -> f64,
    ) -> Result<Self> {
        let gd: Vec<usize> = given.iter().map(Axis::len).collect();
        let od: Vec<usize> = out.iter().map(Axis::len).collect();
        let mut kernel = Vec::with_capacity(gd.iter().product::<usize>() * od.iter().product::<usize>());
        for_each_index(&gd, |g| for_each_index(&od, |o| kernel.push(f(g, o))));
        Self::new(given, out, kernel)
    }

    pub fn given(&self) -> &[Axis] {
        &self.given
    }

    pub fn out(&self) -> &[Axis] {
        &self.out
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    pub fn rows(&self) -> usize {
        shape_len(&self.given)
    }

    pub fn width(&self) -> usize {
        shape_len(&self.out)
    }

    fn flat(axes: &[Axis], idx: &[usize]) -> usize {
        axes.iter().zip(idx).fold(0, |acc, (a, &i)| acc * a.len() + i)
    }

    pub fn row(&self, given_idx: &[usize]) -> &[f64] {
        let r = Self::flat(&self.given, given_idx);
        self.row_flat(r)
    }

    pub fn row_flat(&self, r: usize) -> &[f64] {
        let w = self.width();
        &self.kernel[r * w..(r + 1) * w]
    }

    pub fn prob(&self, given_idx: &[usize], out_idx: &[usize]) -> f64 {
        self.row(given_idx)[Self::flat(&self.out, out_idx)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(name: &str) -> Axis {
        Axis::indexed(name, 2)
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(FinitePmf::indexed(vec![0.5, 0.6]).is_err());
        assert!(FinitePmf::indexed(vec![1.5, -0.5]).is_err());
        assert!(FinitePmf::new(vec!["a".into(), "a".into()], vec![0.5, 0.5]).is_err());
        assert!(FinitePmf::indexed(vec![0.25; 4]).is_ok());
    }

    #[test]
    fn joint_rejects_duplicate_axes() {
        let r = JointPmf::new(vec![bits("A"), bits("A")], vec![0.25; 4]);
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn marginal_matches_manual_sum() {
        let mass = vec![0.1, 0.2, 0.05, 0.15, 0.0, 0.3, 0.1, 0.1];
        let j = JointPmf::new(vec![bits("A"), bits("B"), bits("C")], mass.clone()).unwrap();
        let ac = j.marginal(&["C", "A"]).unwrap();
        // (c, a) row-major
        let expect = [
            mass[0] + mass[2],
            mass[4] + mass[6],
            mass[1] + mass[3],
            mass[5] + mass[7],
        ];
        for (x, y) in ac.mass().iter().zip(expect) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn cond_rows_validated() {
        let r = CondPmf::new(vec![bits("X")], vec![bits("Y")], vec![0.9, 0.1, 0.5, 0.4]);
        assert!(r.is_err());
        let k = CondPmf::new(vec![bits("X")], vec![bits("Y")], vec![0.9, 0.1, 0.5, 0.5]).unwrap();
        assert_eq!(k.prob(&[1], &[0]), 0.5);
    }
}
