//! Measures of a target group on a conditioning group, the Kendall
//! distribution of the target block and the resulting upper bound.
//!
//! Integrals against the target-block copula measure use one point per
//! target cell, the cell midpoint, weighted by the cell's marginal mass.
//! Both the conditional distribution and the target-block copula are
//! evaluated at that point, so the bound `τ ≤ 6 Σ ŵ (C − C²)` holds
//! exactly on the grid.

use serde::Serialize;

use crate::copula::{cumulate_axis, CheckerboardCopula, GroupSplit};
use crate::error::{Error, Result};
use crate::reduce::pairwise_sum;

use super::conditional::SplitGrid;
use super::single::tau_quadratic_value;

/// Target-block weights and copula values at the target-cell midpoints.
pub(crate) struct TargetReference {
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

fn midpoint_cumulate(data: &mut [f64], shape: &[usize]) {
    for axis in 0..shape.len() {
        cumulate_axis(data, shape, axis, 0.5);
    }
}

impl TargetReference {
    pub fn new(grid: &SplitGrid<'_>) -> Self {
        let weights = grid.v_marginal();
        let mut values = weights.clone();
        midpoint_cumulate(&mut values, &grid.v_res);
        Self { weights, values }
    }
}

/// `Σ_u w Σ_cells ŵ φ(G_u − C_V)` where `G_u` is the conditional
/// distribution of the target block at each target-cell midpoint.
pub(crate) fn group_phi_integral<P>(
    grid: &SplitGrid<'_>,
    reference: &TargetReference,
    phi: &P,
) -> f64
where
    P: Fn(f64) -> f64 + Sync,
{
    grid.sum_rows(|row, w| {
        let mut g = row.to_vec();
        midpoint_cumulate(&mut g, &grid.v_res);
        let terms: Vec<f64> = g
            .iter()
            .zip(&reference.weights)
            .zip(&reference.values)
            .map(|((&s, &wv), &c)| wv * phi(s / w - c))
            .collect();
        w * pairwise_sum(&terms)
    })
}

pub(crate) fn group_grid<'a>(
    copula: &'a CheckerboardCopula,
    split: &GroupSplit,
) -> Result<SplitGrid<'a>> {
    if split.v_axes().len() < 2 {
        return Err(Error::invalid(
            "group measures need at least two target axes; use tau_quadratic",
        ));
    }
    SplitGrid::new(copula, split)
}

/// Quadratic group measure and its Kendall upper bound.
pub(crate) fn group_tau_value(
    copula: &CheckerboardCopula,
    split: &GroupSplit,
) -> Result<(f64, f64)> {
    let grid = group_grid(copula, split)?;
    let reference = TargetReference::new(&grid);
    let tau = 6.0 * group_phi_integral(&grid, &reference, &|x| x * x);
    let bound =
        KendallCdf::from_weighted_values(&reference.values, &reference.weights)?.max_bound();
    Ok((tau, bound))
}

/// Distribution function `K(t) = P(C(V) ≤ t)` of the target-block copula
/// evaluated at its own random vector.
///
/// Stored as knots `(t, K)` joined by straight segments; a jump is two knots
/// with the same `t`. The function is right-continuous.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KendallCdf {
    knots: Vec<(f64, f64)>,
}

impl KendallCdf {
    pub fn from_knots(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::invalid(
                "a Kendall distribution needs at least two knots",
            ));
        }
        for w in knots.windows(2) {
            if w[1].0 < w[0].0 || w[1].1 < w[0].1 {
                return Err(Error::invalid("Kendall knots must be nondecreasing"));
            }
        }
        let ok_range = knots
            .iter()
            .all(|&(t, k)| (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&k));
        if !ok_range || knots[0].1 != 0.0 || knots[knots.len() - 1].1 != 1.0 {
            return Err(Error::invalid(
                "Kendall knots must lie in [0,1]^2 and run from K = 0 to K = 1",
            ));
        }
        Ok(Self { knots })
    }

    /// `K(t) = t`.
    pub fn uniform() -> Self {
        Self {
            knots: vec![(0.0, 0.0), (1.0, 1.0)],
        }
    }

    /// Step function putting mass `weights[i]` at `values[i]`.
    pub(crate) fn from_weighted_values(values: &[f64], weights: &[f64]) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = values
            .iter()
            .zip(weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&t, &w)| (t.clamp(0.0, 1.0), w))
            .collect();
        if atoms.is_empty() {
            return Err(Error::invalid("target block carries no mass"));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total = pairwise_sum(&atoms.iter().map(|a| a.1).collect::<Vec<_>>());
        let mut knots = Vec::with_capacity(2 * atoms.len());
        let mut acc = 0.0;
        let mut i = 0;
        while i < atoms.len() {
            let t = atoms[i].0;
            let before = acc;
            while i < atoms.len() && atoms[i].0 == t {
                acc += atoms[i].1;
                i += 1;
            }
            knots.push((t, before / total));
            knots.push((
                t,
                if i == atoms.len() {
                    1.0
                } else {
                    (acc / total).min(1.0)
                },
            ));
        }
        Self::from_knots(knots)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < self.knots[0].0 {
            return 0.0;
        }
        let i = self.knots.partition_point(|&(x, _)| x <= t) - 1;
        match self.knots.get(i + 1) {
            Some(&(t1, k1)) if t1 > self.knots[i].0 => {
                let (t0, k0) = self.knots[i];
                k0 + (k1 - k0) * (t - t0) / (t1 - t0)
            }
            _ => self.knots[i].1,
        }
    }

    /// `6 ∫ (t − t²) dK(t)` as a Stieltjes sum: jumps contribute
    /// `(t − t²) ΔK`, linear pieces are integrated in closed form.
    pub fn max_bound(&self) -> f64 {
        let terms: Vec<f64> = self
            .knots
            .windows(2)
            .map(|w| {
                let ((t0, k0), (t1, k1)) = (w[0], w[1]);
                if t1 == t0 {
                    (t0 - t0 * t0) * (k1 - k0)
                } else {
                    let slope = (k1 - k0) / (t1 - t0);
                    slope * ((t1 * t1 - t0 * t0) / 2.0 - (t1.powi(3) - t0.powi(3)) / 3.0)
                }
            })
            .collect();
        6.0 * pairwise_sum(&terms)
    }
}

/// Kendall distribution of the marginal copula on `v_axes`. A single axis is
/// uniform, so `K(t) = t` exactly; otherwise each target cell contributes
/// its mass at the copula value of its midpoint.
pub fn kendall_cdf(copula: &CheckerboardCopula, v_axes: &[usize]) -> Result<KendallCdf> {
    if v_axes.is_empty() {
        return Err(Error::invalid("kendall_cdf needs at least one axis"));
    }
    let marginal = copula.marginal(v_axes)?;
    if v_axes.len() == 1 {
        return Ok(KendallCdf::uniform());
    }
    let mut values = marginal.mass().to_vec();
    midpoint_cumulate(&mut values, marginal.resolutions());
    KendallCdf::from_weighted_values(&values, marginal.mass())
}

/// Mean of the single-target quadratic measures of each target axis on the
/// conditioning block.
pub(crate) fn averaged_dependence_value(
    copula: &CheckerboardCopula,
    split: &GroupSplit,
) -> Result<f64> {
    let n = split.u_axes().len();
    let mut values = Vec::with_capacity(split.v_axes().len());
    for &v in split.v_axes() {
        let mut axes = split.u_axes().to_vec();
        axes.push(v);
        let sub = copula.marginal(&axes)?;
        let sub_split = GroupSplit::new((0..n).collect(), vec![n], n + 1)?;
        values.push(tau_quadratic_value(&sub, &sub_split)?);
    }
    Ok(pairwise_sum(&values) / values.len() as f64)
}
