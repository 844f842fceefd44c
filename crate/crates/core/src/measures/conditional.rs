use std::borrow::Cow;

use rayon::prelude::*;

use crate::copula::{grid_cdf, permute_data, CheckerboardCopula, GroupSplit};
use crate::error::{Error, Result};
use crate::reduce::{canonical_sum, pairwise_sum};

/// A copula re-laid out as a matrix: one row per conditioning cell, one
/// column per target cell (target cells row-major over the target axes).
pub(crate) struct SplitGrid<'a> {
    pub v_res: Vec<usize>,
    pub n_v: usize,
    pub joint: Cow<'a, [f64]>,
    /// Mass of each conditioning cell.
    pub weights: Vec<f64>,
}

impl<'a> SplitGrid<'a> {
    pub fn new(copula: &'a CheckerboardCopula, split: &GroupSplit) -> Result<Self> {
        if split.dims() != copula.dims() {
            return Err(Error::invalid(format!(
                "split covers {} axes, copula has {}",
                split.dims(),
                copula.dims()
            )));
        }
        let order: Vec<usize> = split
            .u_axes()
            .iter()
            .chain(split.v_axes())
            .copied()
            .collect();
        let joint = if order.iter().enumerate().all(|(i, &a)| i == a) {
            Cow::Borrowed(copula.mass())
        } else {
            Cow::Owned(permute_data(copula.mass(), copula.resolutions(), &order))
        };
        let v_res: Vec<usize> = split
            .v_axes()
            .iter()
            .map(|&a| copula.resolutions()[a])
            .collect();
        let n_v: usize = v_res.iter().product();
        let weights = joint.chunks_exact(n_v).map(pairwise_sum).collect();
        Ok(Self {
            v_res,
            n_v,
            joint,
            weights,
        })
    }

    pub fn rows(&self) -> impl IndexedParallelIterator<Item = (&[f64], f64)> + '_ {
        self.joint
            .par_chunks_exact(self.n_v)
            .zip(self.weights.par_iter().copied())
    }

    /// `Σ_u f(row_u, w_u)` over conditioning cells with positive mass, in
    /// canonical order. Cells of zero mass contribute nothing.
    pub fn sum_rows<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64], f64) -> f64 + Sync,
    {
        let mut terms: Vec<f64> = self
            .rows()
            .map(|(row, w)| if w > 0.0 { f(row, w) } else { 0.0 })
            .collect();
        canonical_sum(&mut terms)
    }

    /// Target-block marginal masses, each summed over conditioning cells in
    /// canonical order.
    pub fn v_marginal(&self) -> Vec<f64> {
        let mut columns = vec![Vec::with_capacity(self.weights.len()); self.n_v];
        for row in self.joint.chunks_exact(self.n_v) {
            for (col, &p) in columns.iter_mut().zip(row) {
                col.push(p);
            }
        }
        columns
            .par_iter_mut()
            .map(|col| canonical_sum(col))
            .collect()
    }
}

/// Conditional distribution of the target block given the conditioning
/// cell `u_cell`, evaluated at `v`.
///
/// Equals (mass of the cell below `v`)/(mass of the cell), which is
/// piecewise linear in each target coordinate. A conditioning cell without
/// mass yields 0.
pub fn conditional_cdf(
    copula: &CheckerboardCopula,
    split: &GroupSplit,
    u_cell: &[usize],
    v: &[f64],
) -> Result<f64> {
    let grid = SplitGrid::new(copula, split)?;
    if u_cell.len() != split.u_axes().len() {
        return Err(Error::invalid("conditioning cell index has wrong length"));
    }
    if v.len() != split.v_axes().len() || v.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::invalid("target point must lie in the unit cube"));
    }
    let mut row = 0;
    for (&i, &a) in u_cell.iter().zip(split.u_axes()) {
        let m = copula.resolutions()[a];
        if i >= m {
            return Err(Error::invalid(format!(
                "cell index {i} out of range on axis {a}"
            )));
        }
        row = row * m + i;
    }
    let w = grid.weights[row];
    if w <= 0.0 {
        return Ok(0.0);
    }
    let slice = &grid.joint[row * grid.n_v..(row + 1) * grid.n_v];
    Ok((grid_cdf(slice, &grid.v_res, v) / w).clamp(0.0, 1.0))
}
