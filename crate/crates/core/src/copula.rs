//! Checkerboard copulas: d-dimensional grids with a piecewise-uniform density.
//!
//! A [`CheckerboardCopula`] stores one probability mass per grid cell in
//! row-major order (last axis fastest). The induced distribution function is
//! the multilinear interpolation of the cumulative cell masses, which is
//! exactly the distribution function of a density that is constant inside
//! each cell. Singular copulas such as the comonotone upper bound are
//! represented by their grid approximations.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::reduce::{canonical_sum, pairwise_sum, pairwise_sum_by};

/// Tolerance for the copula invariants (mass, marginal uniformity).
pub const VALIDITY_TOL: f64 = 1e-9;

/// Tolerance for identities that hold exactly in real arithmetic.
pub const EXACT_TOL: f64 = 1e-12;

pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

/// Flat offsets of every cell of the sub-grid spanned by `axes`, enumerated
/// row-major in the order the axes are listed.
pub(crate) fn axis_offsets(shape: &[usize], axes: &[usize]) -> Vec<usize> {
    let st = strides(shape);
    let mut out = vec![0usize];
    for &a in axes {
        let mut next = Vec::with_capacity(out.len() * shape[a]);
        for &base in &out {
            for j in 0..shape[a] {
                next.push(base + j * st[a]);
            }
        }
        out = next;
    }
    out
}

/// Sums `data` over every axis not in `kept`; output is row-major over
/// `kept` in the order given.
pub(crate) fn reduce_to_axes(data: &[f64], shape: &[usize], kept: &[usize]) -> Vec<f64> {
    let removed: Vec<usize> = (0..shape.len()).filter(|a| !kept.contains(a)).collect();
    let kept_off = axis_offsets(shape, kept);
    let removed_off = axis_offsets(shape, &removed);
    kept_off
        .iter()
        .map(|&base| pairwise_sum_by(removed_off.len(), &|r| data[base + removed_off[r]]))
        .collect()
}

/// Per-slab sums along `axis`. Same summation tree as
/// [`reduce_to_axes`]`(data, shape, &[axis])`, but reads `data` front to back.
pub(crate) fn slab_sums(data: &[f64], shape: &[usize], axis: usize) -> Vec<f64> {
    let m = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let block = m * inner;
    // The removed cells of slab j are visited as (outer index, inner index)
    // in row-major order, matching `axis_offsets` over the removed axes.
    let removed = outer * inner;
    let value = |j: usize, r: usize| data[(r / inner) * block + j * inner + r % inner];
    fn go<F: Fn(usize, usize) -> f64>(m: usize, lo: usize, hi: usize, value: &F) -> Vec<f64> {
        if hi - lo <= 8 {
            let mut acc = vec![0.0; m];
            for r in lo..hi {
                for (j, a) in acc.iter_mut().enumerate() {
                    *a += value(j, r);
                }
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        let left = go(m, lo, mid, value);
        let right = go(m, mid, hi, value);
        left.into_iter().zip(right).map(|(a, b)| a + b).collect()
    }
    go(m, 0, removed, &value)
}

/// Re-indexes `data` so that new axis `i` is old axis `perm[i]`.
pub(crate) fn permute_data(data: &[f64], shape: &[usize], perm: &[usize]) -> Vec<f64> {
    axis_offsets(shape, perm)
        .into_iter()
        .map(|o| data[o])
        .collect()
}

/// Replaces each entry along `axis` by the sum of the preceding entries plus
/// `own` times the entry itself. `own = 1` gives inclusive prefix sums,
/// `own = 0.5` gives the cumulative mass at cell midpoints.
pub(crate) fn cumulate_axis(data: &mut [f64], shape: &[usize], axis: usize, own: f64) {
    let st = strides(shape);
    let m = shape[axis];
    let stride = st[axis];
    let block = stride * m;
    for outer in (0..data.len()).step_by(block) {
        for inner in 0..stride {
            let mut acc = 0.0;
            for j in 0..m {
                let idx = outer + inner + j * stride;
                let v = data[idx];
                data[idx] = acc + own * v;
                acc += v;
            }
        }
    }
}

/// Fraction of grid cell `j` (of `m`) lying below coordinate `p`.
#[inline]
pub(crate) fn cell_fraction(p: f64, m: usize, j: usize) -> f64 {
    (p * m as f64 - j as f64).clamp(0.0, 1.0)
}

/// Multilinear distribution function of a mass grid at `point`.
///
/// Contracts the last axis first; only cells with a nonzero weight on every
/// axis are visited.
pub(crate) fn grid_cdf(data: &[f64], shape: &[usize], point: &[f64]) -> f64 {
    let mut cur: Vec<f64> = data.to_vec();
    for axis in (0..shape.len()).rev() {
        let m = shape[axis];
        let p = point[axis];
        let weights: Vec<f64> = (0..m).map(|j| cell_fraction(p, m, j)).collect();
        let used = weights.iter().rposition(|&w| w > 0.0).map_or(0, |i| i + 1);
        cur = cur
            .chunks_exact(m)
            .map(|chunk| pairwise_sum_by(used, &|j| chunk[j] * weights[j]))
            .collect();
    }
    cur[0]
}

fn check_point(point: &[f64], dims: usize) -> Result<()> {
    if point.len() != dims {
        return Err(Error::invalid(format!(
            "point has {} coordinates, expected {dims}",
            point.len()
        )));
    }
    if let Some((k, p)) = point
        .iter()
        .enumerate()
        .find(|(_, p)| !(0.0..=1.0).contains(*p))
    {
        return Err(Error::invalid(format!(
            "coordinate {k} = {p} lies outside [0, 1]"
        )));
    }
    Ok(())
}

/// Fréchet–Hoeffding lower bound `max(Σu − d + 1, 0)`.
///
/// This is a bound function only; it is not a copula for more than two
/// dimensions.
pub fn frechet_w_value(point: &[f64]) -> Result<f64> {
    check_point(point, point.len())?;
    let d = point.len() as f64;
    Ok((point.iter().sum::<f64>() - d + 1.0).max(0.0))
}

/// Fréchet–Hoeffding upper bound `min(u)`.
pub fn frechet_m_value(point: &[f64]) -> Result<f64> {
    check_point(point, point.len())?;
    Ok(point.iter().copied().fold(1.0, f64::min))
}

/// Axis-aligned box `[lower, upper]` inside the unit cube.
#[derive(Debug, Clone, PartialEq)]
pub struct GridBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl GridBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::invalid("box corners must have equal nonzero length"));
        }
        check_point(&lower, lower.len())?;
        check_point(&upper, upper.len())?;
        if lower.iter().zip(&upper).any(|(a, b)| a > b) {
            return Err(Error::invalid("box lower corner exceeds upper corner"));
        }
        Ok(Self { lower, upper })
    }

    pub fn unit(dims: usize) -> Self {
        Self {
            lower: vec![0.0; dims],
            upper: vec![1.0; dims],
        }
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Iterates the `2^d` vertices with their inclusion–exclusion signs.
    fn signed_vertices(&self) -> impl Iterator<Item = (f64, Vec<f64>)> + '_ {
        let d = self.dims();
        (0..1usize << d).map(move |mask| {
            let mut lower_count = 0;
            let v = (0..d)
                .map(|k| {
                    if mask >> k & 1 == 1 {
                        self.upper[k]
                    } else {
                        lower_count += 1;
                        self.lower[k]
                    }
                })
                .collect();
            let sign = if lower_count % 2 == 0 { 1.0 } else { -1.0 };
            (sign, v)
        })
    }
}

/// Partition of the axes into a conditioning block `u` and a target block `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupSplit {
    u_axes: Vec<usize>,
    v_axes: Vec<usize>,
}

impl GroupSplit {
    pub fn new(u_axes: Vec<usize>, v_axes: Vec<usize>, dims: usize) -> Result<Self> {
        if u_axes.is_empty() || v_axes.is_empty() {
            return Err(Error::invalid(
                "both blocks of a split need at least one axis",
            ));
        }
        let mut seen = vec![false; dims];
        for &a in u_axes.iter().chain(&v_axes) {
            if a >= dims {
                return Err(Error::invalid(format!(
                    "axis {a} out of range for {dims} dims"
                )));
            }
            if std::mem::replace(&mut seen[a], true) {
                return Err(Error::invalid(format!("axis {a} appears twice in split")));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("split does not cover every axis"));
        }
        Ok(Self { u_axes, v_axes })
    }

    /// Conditioning on every axis but the last.
    pub fn last_as_target(dims: usize) -> Result<Self> {
        if dims < 2 {
            return Err(Error::invalid("a split needs at least two axes"));
        }
        Self::new((0..dims - 1).collect(), vec![dims - 1], dims)
    }

    pub fn u_axes(&self) -> &[usize] {
        &self.u_axes
    }

    pub fn v_axes(&self) -> &[usize] {
        &self.v_axes
    }

    pub fn dims(&self) -> usize {
        self.u_axes.len() + self.v_axes.len()
    }
}

/// Result of [`CheckerboardCopula::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Most negative cell mass (0 when none is negative).
    pub max_negative_mass: f64,
    pub negative_cell: Option<Vec<usize>>,
    /// `|Σ mass − 1|`.
    pub total_mass_error: f64,
    /// Largest `|slab mass − 1/m_k|` over all axes and slabs.
    pub marginal_error: f64,
    /// `(axis, slab)` of the worst marginal error.
    pub marginal_location: Option<(usize, usize)>,
    pub non_finite: bool,
    pub pass: bool,
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: min mass {:.3e}",
            if self.pass { "valid" } else { "invalid" },
            self.max_negative_mass
        )?;
        if let Some(cell) = &self.negative_cell {
            write!(f, " at cell {cell:?}")?;
        }
        write!(
            f,
            ", total mass error {:.3e}, marginal error {:.3e}",
            self.total_mass_error, self.marginal_error
        )?;
        if let Some((axis, slab)) = self.marginal_location {
            write!(f, " (axis {axis}, slab {slab})")?;
        }
        if self.non_finite {
            write!(f, ", non-finite masses present")?;
        }
        Ok(())
    }
}

/// A d-dimensional copula with constant density on each cell of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckerboardCopula {
    resolutions: Vec<usize>,
    mass: Vec<f64>,
}

impl CheckerboardCopula {
    /// Builds a copula and rejects it unless [`validate`](Self::validate) passes.
    pub fn new(resolutions: Vec<usize>, mass: Vec<f64>) -> Result<Self> {
        let c = Self::from_mass_unchecked(resolutions, mass)?;
        let diag = c.validate();
        if !diag.pass {
            return Err(Error::Validation(diag));
        }
        Ok(c)
    }

    /// Builds a grid after checking only the shape. Used for intermediate
    /// grids (raw counts, rebalancing input) that need not be copulas yet.
    pub fn from_mass_unchecked(resolutions: Vec<usize>, mass: Vec<f64>) -> Result<Self> {
        if resolutions.is_empty() {
            return Err(Error::invalid("a copula needs at least one axis"));
        }
        if resolutions.contains(&0) {
            return Err(Error::invalid("resolutions must be positive"));
        }
        let cells = resolutions
            .iter()
            .try_fold(1usize, |acc, &m| acc.checked_mul(m))
            .ok_or_else(|| Error::invalid("grid is too large"))?;
        if mass.len() != cells {
            return Err(Error::invalid(format!(
                "mass has {} entries, resolutions imply {cells}",
                mass.len()
            )));
        }
        Ok(Self { resolutions, mass })
    }

    /// Independence copula `Π`: every cell carries `∏ 1/m_k`.
    pub fn independence(resolutions: &[usize]) -> Result<Self> {
        if resolutions.is_empty() || resolutions.contains(&0) {
            return Err(Error::invalid("resolutions must be nonempty and positive"));
        }
        let cells: usize = resolutions.iter().product();
        let m: f64 = resolutions.iter().map(|&r| 1.0 / r as f64).product();
        Self::new(resolutions.to_vec(), vec![m; cells])
    }

    /// Grid approximation of the comonotone copula `M`: mass `1/m` on each
    /// diagonal cell.
    pub fn comonotone(dims: usize, m: usize) -> Result<Self> {
        if dims < 2 {
            return Err(Error::invalid("comonotone copula needs at least two axes"));
        }
        if m == 0 {
            return Err(Error::invalid("resolution must be positive"));
        }
        let resolutions = vec![m; dims];
        let cells = m
            .checked_pow(dims as u32)
            .ok_or_else(|| Error::invalid("grid is too large"))?;
        let diag_step: usize = strides(&resolutions).iter().sum();
        let mut mass = vec![0.0; cells];
        for i in 0..m {
            mass[i * diag_step] = 1.0 / m as f64;
        }
        // Valid by construction.
        Self::from_mass_unchecked(resolutions, mass)
    }

    pub fn dims(&self) -> usize {
        self.resolutions.len()
    }

    pub fn resolutions(&self) -> &[usize] {
        &self.resolutions
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn into_mass(self) -> Vec<f64> {
        self.mass
    }

    pub fn cell_count(&self) -> usize {
        self.mass.len()
    }

    pub fn flat_index(&self, cell: &[usize]) -> usize {
        strides(&self.resolutions)
            .iter()
            .zip(cell)
            .map(|(s, i)| s * i)
            .sum()
    }

    pub fn cell_index(&self, mut flat: usize) -> Vec<usize> {
        let mut cell = vec![0; self.dims()];
        for k in (0..self.dims()).rev() {
            cell[k] = flat % self.resolutions[k];
            flat /= self.resolutions[k];
        }
        cell
    }

    pub fn cell_mass(&self, cell: &[usize]) -> f64 {
        self.mass[self.flat_index(cell)]
    }

    /// Mass of each slab along `axis`.
    pub fn slab_masses(&self, axis: usize) -> Vec<f64> {
        slab_sums(&self.mass, &self.resolutions, axis)
    }

    /// Checks nonnegativity, unit total mass and uniform one-dimensional
    /// marginals, all at [`VALIDITY_TOL`]. Never fails; the verdict is in
    /// [`Diagnostics::pass`].
    pub fn validate(&self) -> Diagnostics {
        let mut non_finite = false;
        let mut min_mass = 0.0;
        let mut negative_at = None;
        for (i, &p) in self.mass.iter().enumerate() {
            if !p.is_finite() {
                non_finite = true;
            } else if p < min_mass {
                min_mass = p;
                negative_at = Some(i);
            }
        }
        let total_mass_error = (pairwise_sum(&self.mass) - 1.0).abs();
        let mut marginal_error = 0.0;
        let mut marginal_location = None;
        for axis in 0..self.dims() {
            let target = 1.0 / self.resolutions[axis] as f64;
            for (slab, s) in self.slab_masses(axis).into_iter().enumerate() {
                let err = (s - target).abs();
                if err > marginal_error || err.is_nan() {
                    marginal_error = err;
                    marginal_location = Some((axis, slab));
                }
            }
        }
        let pass = !non_finite
            && min_mass >= -VALIDITY_TOL
            && total_mass_error <= VALIDITY_TOL
            && marginal_error <= VALIDITY_TOL;
        Diagnostics {
            max_negative_mass: min_mass,
            negative_cell: negative_at.map(|i| self.cell_index(i)),
            total_mass_error,
            marginal_error,
            marginal_location,
            non_finite,
            pass,
        }
    }

    /// Distribution function at `point`: multilinear interpolation of the
    /// cumulative masses, exact at grid vertices.
    pub fn cdf(&self, point: &[f64]) -> Result<f64> {
        check_point(point, self.dims())?;
        Ok(grid_cdf(&self.mass, &self.resolutions, point))
    }

    /// Cumulative masses at every grid vertex, for repeated evaluation.
    pub fn cdf_table(&self) -> CdfTable {
        let shape: Vec<usize> = self.resolutions.iter().map(|m| m + 1).collect();
        let st = strides(&shape);
        let mut values = vec![0.0; shape.iter().product()];
        for (i, &p) in self.mass.iter().enumerate() {
            let idx: usize = self
                .cell_index(i)
                .iter()
                .zip(&st)
                .map(|(j, s)| (j + 1) * s)
                .sum();
            values[idx] = p;
        }
        for axis in 0..shape.len() {
            cumulate_axis(&mut values, &shape, axis, 1.0);
        }
        CdfTable {
            resolutions: self.resolutions.clone(),
            strides: st,
            values,
        }
    }

    /// C-volume of `bx` by inclusion–exclusion over its `2^d` vertices.
    pub fn c_volume(&self, bx: &GridBox) -> Result<f64> {
        if bx.dims() != self.dims() {
            return Err(Error::invalid("box dimension does not match copula"));
        }
        let mut terms = Vec::with_capacity(1 << bx.dims());
        for (sign, v) in bx.signed_vertices() {
            terms.push(sign * grid_cdf(&self.mass, &self.resolutions, &v));
        }
        Ok(pairwise_sum(&terms))
    }

    /// k-th sub-volume: the k-fold difference over `bx` on the first k axes
    /// with the remaining coordinates held at `tail`.
    pub fn sub_volume(&self, bx: &GridBox, tail: &[f64]) -> Result<f64> {
        let k = bx.dims();
        if k >= self.dims() || k + tail.len() != self.dims() {
            return Err(Error::invalid(format!(
                "sub-volume needs a k-box with k < {} and {} tail coordinates",
                self.dims(),
                self.dims().saturating_sub(k)
            )));
        }
        check_point(tail, tail.len())?;
        let mut terms = Vec::with_capacity(1 << k);
        for (sign, mut v) in bx.signed_vertices() {
            v.extend_from_slice(tail);
            terms.push(sign * grid_cdf(&self.mass, &self.resolutions, &v));
        }
        Ok(pairwise_sum(&terms))
    }

    /// Marginal copula on `axes`, in the order given.
    pub fn marginal(&self, axes: &[usize]) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::invalid("marginal needs at least one axis"));
        }
        check_axes(axes, self.dims(), false)?;
        let mass = reduce_to_axes(&self.mass, &self.resolutions, axes);
        let res = axes.iter().map(|&a| self.resolutions[a]).collect();
        Self::from_mass_unchecked(res, mass)
    }

    /// New axis `i` is old axis `perm[i]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self> {
        check_axes(perm, self.dims(), true)?;
        let mass = permute_data(&self.mass, &self.resolutions, perm);
        let res = perm.iter().map(|&a| self.resolutions[a]).collect();
        Self::from_mass_unchecked(res, mass)
    }

    /// Reflects `axis` (`u ↦ 1 − u`), the grid image of a strictly
    /// decreasing transform of that coordinate.
    pub fn reverse_axis(&self, axis: usize) -> Result<Self> {
        if axis >= self.dims() {
            return Err(Error::invalid(format!("axis {axis} out of range")));
        }
        let st = strides(&self.resolutions);
        let m = self.resolutions[axis];
        let mut mass = vec![0.0; self.mass.len()];
        for (i, &p) in self.mass.iter().enumerate() {
            let j = (i / st[axis]) % m;
            let target = i - j * st[axis] + (m - 1 - j) * st[axis];
            mass[target] = p;
        }
        Self::from_mass_unchecked(self.resolutions.clone(), mass)
    }

    /// Largest cellwise difference to another grid of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> Option<f64> {
        if self.resolutions != other.resolutions {
            return None;
        }
        Some(
            self.mass
                .iter()
                .zip(&other.mass)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    /// True when every cell is the product of its `u` and `v` marginal
    /// masses within `tol`.
    pub fn factorizes(&self, split: &GroupSplit, tol: f64) -> Result<bool> {
        if split.dims() != self.dims() {
            return Err(Error::invalid("split does not match copula dimension"));
        }
        let mu = reduce_to_axes(&self.mass, &self.resolutions, split.u_axes());
        let mv = reduce_to_axes(&self.mass, &self.resolutions, split.v_axes());
        let order: Vec<usize> = split
            .u_axes()
            .iter()
            .chain(split.v_axes())
            .copied()
            .collect();
        let joint = permute_data(&self.mass, &self.resolutions, &order);
        let nv = mv.len();
        Ok(joint
            .iter()
            .enumerate()
            .all(|(i, &p)| (p - mu[i / nv] * mv[i % nv]).abs() <= tol))
    }

    /// Sum of all masses in canonical order.
    pub fn total_mass(&self) -> f64 {
        let mut m = self.mass.clone();
        canonical_sum(&mut m)
    }
}

/// Distribution function tabulated at the grid vertices. Evaluation is
/// multilinear within a cell and agrees with [`CheckerboardCopula::cdf`].
#[derive(Debug, Clone)]
pub struct CdfTable {
    resolutions: Vec<usize>,
    strides: Vec<usize>,
    values: Vec<f64>,
}

impl CdfTable {
    /// Value at `point`; coordinates are clamped to `[0, 1]`.
    pub fn eval(&self, point: &[f64]) -> f64 {
        let d = self.resolutions.len();
        debug_assert_eq!(point.len(), d);
        let mut base = 0;
        let mut frac = Vec::with_capacity(d);
        for k in 0..d {
            let m = self.resolutions[k];
            let x = point[k].clamp(0.0, 1.0) * m as f64;
            let j = (x.floor() as usize).min(m - 1);
            base += j * self.strides[k];
            frac.push(x - j as f64);
        }
        let mut total = 0.0;
        for mask in 0..1usize << d {
            let mut w = 1.0;
            let mut idx = base;
            for (k, &t) in frac.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    w *= t;
                    idx += self.strides[k];
                } else {
                    w *= 1.0 - t;
                }
            }
            if w != 0.0 {
                total += w * self.values[idx];
            }
        }
        total
    }
}

fn check_axes(axes: &[usize], dims: usize, full: bool) -> Result<()> {
    let mut seen = vec![false; dims];
    for &a in axes {
        if a >= dims || std::mem::replace(&mut seen[a], true) {
            return Err(Error::invalid(format!("malformed axis list {axes:?}")));
        }
    }
    if full && axes.len() != dims {
        return Err(Error::invalid(format!(
            "permutation {axes:?} does not cover {dims} axes"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn independence_cells() {
        let c = CheckerboardCopula::independence(&[2, 2]).unwrap();
        assert_eq!(c.mass(), &[0.25; 4]);
        let c = CheckerboardCopula::independence(&[3]).unwrap();
        assert_eq!(c.mass(), &[1.0 / 3.0; 3]);
        let c = CheckerboardCopula::independence(&[2, 2, 2]).unwrap();
        assert!(close(c.cdf(&[1.0, 1.0, 1.0]).unwrap(), 1.0, EXACT_TOL));
        assert!(CheckerboardCopula::independence(&[2, 0]).is_err());
    }

    #[test]
    fn comonotone_cells() {
        let c = CheckerboardCopula::comonotone(2, 2).unwrap();
        assert_eq!(c.mass(), &[0.5, 0.0, 0.0, 0.5]);
        let c = CheckerboardCopula::comonotone(3, 4).unwrap();
        assert!(close(c.cdf(&[0.5, 0.5, 0.5]).unwrap(), 0.5, EXACT_TOL));
        assert!(CheckerboardCopula::comonotone(1, 4).is_err());
    }

    #[test]
    fn comonotone_cdf_matches_brute_force_at_vertices() {
        // Oracle: sum the masses of every cell lying wholly below the vertex.
        let c = CheckerboardCopula::comonotone(2, 4).unwrap();
        for a in 0..=4 {
            for b in 0..=4 {
                let mut brute = 0.0;
                for i in 0..a {
                    for j in 0..b {
                        brute += c.cell_mass(&[i, j]);
                    }
                }
                let p = [a as f64 / 4.0, b as f64 / 4.0];
                assert!(close(c.cdf(&p).unwrap(), brute, EXACT_TOL));
                assert!(close(brute, p[0].min(p[1]), EXACT_TOL));
            }
        }
        assert!(close(c.cdf(&[0.25, 0.75]).unwrap(), 0.25, EXACT_TOL));
        assert!(close(c.cdf(&[0.5, 1.0]).unwrap(), 0.5, EXACT_TOL));
    }

    #[test]
    fn frechet_w() {
        assert_eq!(frechet_w_value(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(frechet_w_value(&[0.5, 0.5, 0.5]).unwrap(), 0.0);
        assert!(close(frechet_w_value(&[0.9, 0.9]).unwrap(), 0.8, EXACT_TOL));
        assert!(frechet_w_value(&[1.2, 0.5]).is_err());
    }

    #[test]
    fn cdf_edges() {
        let pi = CheckerboardCopula::independence(&[4, 4]).unwrap();
        assert_eq!(pi.cdf(&[0.0, 0.7]).unwrap(), 0.0);
        assert!(close(pi.cdf(&[0.3, 0.7]).unwrap(), 0.21, EXACT_TOL));
        assert!(pi.cdf(&[0.3]).is_err());
        assert!(pi.cdf(&[-0.1, 0.5]).is_err());
    }

    #[test]
    fn volumes() {
        let pi3 = CheckerboardCopula::independence(&[4, 4, 4]).unwrap();
        assert!(close(
            pi3.c_volume(&GridBox::unit(3)).unwrap(),
            1.0,
            EXACT_TOL
        ));
        let b = GridBox::new(vec![0.0; 3], vec![0.5; 3]).unwrap();
        assert!(close(pi3.c_volume(&b).unwrap(), 0.125, EXACT_TOL));

        let m = CheckerboardCopula::comonotone(2, 8).unwrap();
        let b = GridBox::new(vec![0.25, 0.5], vec![0.75, 1.0]).unwrap();
        // Oracle: the two intervals overlap on [0.5, 0.75].
        assert!(close(m.c_volume(&b).unwrap(), 0.25, EXACT_TOL));
    }

    #[test]
    fn sub_volumes() {
        let pi3 = CheckerboardCopula::independence(&[4, 4, 4]).unwrap();
        let b = GridBox::new(vec![0.0, 0.0], vec![0.5, 0.5]).unwrap();
        assert!(close(pi3.sub_volume(&b, &[0.5]).unwrap(), 0.125, EXACT_TOL));
        assert_eq!(pi3.sub_volume(&b, &[0.0]).unwrap(), 0.0);
        let full = pi3.sub_volume(&b, &[1.0]).unwrap();
        let marg = pi3.marginal(&[0, 1]).unwrap().c_volume(&b).unwrap();
        assert!(close(full, marg, EXACT_TOL));
        assert!(pi3.sub_volume(&GridBox::unit(3), &[]).is_err());
    }

    #[test]
    fn marginals() {
        let pi3 = CheckerboardCopula::independence(&[4, 4, 4]).unwrap();
        assert_eq!(pi3.marginal(&[0, 1, 2]).unwrap(), pi3);
        let pi2 = pi3.marginal(&[2, 0]).unwrap();
        assert!(
            pi2.max_abs_diff(&CheckerboardCopula::independence(&[4, 4]).unwrap())
                .unwrap()
                < EXACT_TOL
        );
        let m3 = CheckerboardCopula::comonotone(3, 4).unwrap();
        let m2 = CheckerboardCopula::comonotone(2, 4).unwrap();
        for pair in [[0, 1], [0, 2], [1, 2]] {
            assert_eq!(m3.marginal(&pair).unwrap(), m2);
        }
        assert!(pi3.marginal(&[]).is_err());
        assert!(pi3.marginal(&[0, 0]).is_err());
    }

    #[test]
    fn validate_locates_negative_mass() {
        let mut mass = vec![0.25; 4];
        mass[2] = -0.1;
        let bad = CheckerboardCopula::from_mass_unchecked(vec![2, 2], mass).unwrap();
        let d = bad.validate();
        assert!(!d.pass);
        assert_eq!(d.negative_cell, Some(vec![1, 0]));
        assert!(close(d.max_negative_mass, -0.1, EXACT_TOL));
        assert!(CheckerboardCopula::new(vec![2, 2], vec![0.25, 0.25, -0.1, 0.25]).is_err());
        assert!(CheckerboardCopula::new(vec![2, 2], vec![0.25; 3]).is_err());
    }

    #[test]
    fn permute_and_reverse() {
        let m = CheckerboardCopula::comonotone(2, 4).unwrap();
        assert_eq!(m.permute_axes(&[0, 1]).unwrap(), m);
        let twice = m.reverse_axis(0).unwrap().reverse_axis(1).unwrap();
        assert_eq!(twice, m);
        let anti = m.reverse_axis(1).unwrap();
        for i in 0..4 {
            assert_eq!(anti.cell_mass(&[i, 3 - i]), 0.25);
        }
        assert!(anti.validate().pass);
        assert_eq!(anti.reverse_axis(1).unwrap(), m);
        assert!(m.permute_axes(&[0, 0]).is_err());
        assert!(m.permute_axes(&[1]).is_err());
        assert!(m.reverse_axis(2).is_err());
    }

    #[test]
    fn split_rules() {
        assert!(GroupSplit::new(vec![0], vec![1], 2).is_ok());
        assert!(GroupSplit::new(vec![0], vec![0], 2).is_err());
        assert!(GroupSplit::new(vec![0], vec![2], 3).is_err());
        assert!(GroupSplit::new(vec![], vec![0, 1], 2).is_err());
        assert!(GroupSplit::new(vec![0], vec![3], 3).is_err());
    }

    #[test]
    fn slab_sums_match_reduction_bitwise() {
        let shape = [3, 5, 4];
        let data: Vec<f64> = (0..60)
            .map(|i| ((i * 37 % 11) as f64 + 0.1) / 97.0)
            .collect();
        for axis in 0..3 {
            let a = slab_sums(&data, &shape, axis);
            let b = reduce_to_axes(&data, &shape, &[axis]);
            assert_eq!(a, b, "axis {axis}");
        }
    }

    #[test]
    fn midpoint_cumulation() {
        let mut d = vec![0.5, 0.5];
        cumulate_axis(&mut d, &[2], 0, 0.5);
        assert_eq!(d, vec![0.25, 0.75]);
        let mut d = vec![1.0, 2.0, 3.0, 4.0];
        cumulate_axis(&mut d, &[2, 2], 1, 1.0);
        assert_eq!(d, vec![1.0, 3.0, 3.0, 7.0]);
    }

    #[test]
    fn cdf_table_matches_cdf() {
        let c = CheckerboardCopula::new(
            vec![2, 3],
            vec![
                0.2,
                0.1,
                0.2,
                1.0 / 3.0 - 0.2,
                1.0 / 3.0 - 0.1,
                1.0 / 3.0 - 0.2,
            ],
        )
        .unwrap();
        let t = c.cdf_table();
        for p in [
            [0.0, 0.0],
            [0.3, 0.9],
            [0.5, 1.0 / 3.0],
            [1.0, 0.7],
            [1.0, 1.0],
        ] {
            assert!((t.eval(&p) - c.cdf(&p).unwrap()).abs() < 1e-15, "{p:?}");
        }
    }
}
