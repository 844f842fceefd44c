//! From raw samples to a fitted checkerboard copula.
//!
//! Columns are rank-transformed to pseudo-observations `(rank − 0.5)/N` and
//! binned on the grid. Each observation covers its rank interval, so the
//! fitted marginals are uniform; iterative proportional fitting remains as
//! a final correction for grids built from other values.

use crate::copula::{reduce_to_axes, strides, CheckerboardCopula};
use crate::error::{Error, Result};

/// Marginal error at which rebalancing stops.
pub const REBALANCE_TOL: f64 = 1e-10;
pub const REBALANCE_MAX_SWEEPS: usize = 50;

/// Rank-transformed sample, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoObservations {
    columns: Vec<Vec<f64>>,
    ties: usize,
    ranked: bool,
}

impl PseudoObservations {
    /// Wraps precomputed values; every entry must lie strictly inside (0, 1).
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if columns.is_empty() || n == 0 {
            return Err(Error::InsufficientData("no observations".into()));
        }
        for (c, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::invalid("columns differ in length"));
            }
            if let Some(v) = col.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
                return Err(Error::InvalidData {
                    column: c,
                    message: format!("{v} is not strictly inside (0, 1)"),
                });
            }
        }
        Ok(Self {
            columns,
            ties: 0,
            ranked: false,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.columns[c]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Number of tied values that were broken by row order.
    pub fn tie_count(&self) -> usize {
        self.ties
    }

    pub fn select(&self, cols: &[usize]) -> Self {
        Self {
            columns: cols.iter().map(|&c| self.columns[c].clone()).collect(),
            ties: self.ties,
            ranked: self.ranked,
        }
    }
}

/// Column-wise ranks mapped to `(rank − 0.5)/N`; ties go to the earlier row
/// first.
pub fn pseudo_observations(columns: &[Vec<f64>]) -> Result<PseudoObservations> {
    let n = columns.first().map_or(0, Vec::len);
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 rows, got {n}"
        )));
    }
    let mut ties = 0;
    let mut out = Vec::with_capacity(columns.len());
    for (c, col) in columns.iter().enumerate() {
        if col.len() != n {
            return Err(Error::invalid("columns differ in length"));
        }
        if let Some(row) = col.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData {
                column: c,
                message: format!("non-finite value at row {row}"),
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        // Stable sort keeps equal values in row order.
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
        ties += order.windows(2).filter(|w| col[w[0]] == col[w[1]]).count();
        let mut ranks = vec![0.0; n];
        for (r, &row) in order.iter().enumerate() {
            ranks[row] = (r as f64 + 0.5) / n as f64;
        }
        out.push(ranks);
    }
    Ok(PseudoObservations {
        columns: out,
        ties,
        ranked: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolutionMode {
    Fixed(usize),
    Automatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolutionPolicy {
    pub mode: ResolutionMode,
    pub min_m: usize,
    pub max_m: usize,
}

impl Default for ResolutionPolicy {
    fn default() -> Self {
        Self {
            mode: ResolutionMode::Automatic,
            min_m: 2,
            max_m: 128,
        }
    }
}

impl ResolutionPolicy {
    pub fn fixed(m: usize) -> Self {
        Self {
            mode: ResolutionMode::Fixed(m),
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.min_m < 2 || self.min_m > self.max_m {
            return Err(Error::invalid(format!(
                "resolution bounds need 2 <= min ({}) <= max ({})",
                self.min_m, self.max_m
            )));
        }
        if let ResolutionMode::Fixed(0) = self.mode {
            return Err(Error::invalid("fixed resolution must be positive"));
        }
        Ok(())
    }
}

/// Largest integer `m` with `m^p <= n`.
fn integer_root(n: usize, p: u32) -> usize {
    let mut m = (n as f64).powf(1.0 / p as f64).floor() as usize;
    let pow = |m: usize| (m as u128).checked_pow(p).unwrap_or(u128::MAX);
    while pow(m + 1) <= n as u128 {
        m += 1;
    }
    while m > 0 && pow(m) > n as u128 {
        m -= 1;
    }
    m
}

/// Per-axis resolutions for `n` rows in `d` dimensions.
///
/// The automatic rule `clamp(⌊N^{1/(d+1)}⌋, min_m, max_m)` is a heuristic
/// that trades cell count against samples per cell; it carries no
/// consistency guarantee.
pub fn choose_resolution(n: usize, d: usize, policy: &ResolutionPolicy) -> Result<Vec<usize>> {
    policy.check()?;
    if n < 2 || d < 2 {
        return Err(Error::InsufficientData(format!(
            "need N >= 2 and d >= 2, got N = {n}, d = {d}"
        )));
    }
    let m = match policy.mode {
        ResolutionMode::Fixed(m) => m,
        ResolutionMode::Automatic => {
            integer_root(n, d as u32 + 1).clamp(policy.min_m, policy.max_m)
        }
    };
    Ok(vec![m; d])
}

/// Bins pseudo-observations at the default resolution cap and rebalances.
pub fn fit_checkerboard(
    pseudo: &PseudoObservations,
    resolutions: &[usize],
) -> Result<CheckerboardCopula> {
    fit_checkerboard_with(pseudo, resolutions, &ResolutionPolicy::default())
}

/// Bins pseudo-observations into cell frequencies, then restores uniform
/// marginals with [`rebalance_marginals`].
///
/// Rank-derived observations spread their mass evenly over their rank
/// interval on each axis, so every slab receives exactly its share and
/// rebalancing has nothing left to correct; when `m` divides `N` this is
/// plain counting. Other values are counted in the cell containing them,
/// and a value on an interior cell boundary belongs to the upper cell.
pub fn fit_checkerboard_with(
    pseudo: &PseudoObservations,
    resolutions: &[usize],
    policy: &ResolutionPolicy,
) -> Result<CheckerboardCopula> {
    if resolutions.len() != pseudo.n_cols() {
        return Err(Error::invalid(format!(
            "{} resolutions for {} columns",
            resolutions.len(),
            pseudo.n_cols()
        )));
    }
    if let Some(&m) = resolutions.iter().find(|&&m| m == 0 || m > policy.max_m) {
        return Err(Error::invalid(format!(
            "resolution {m} outside 1..={}",
            policy.max_m
        )));
    }
    let st = strides(resolutions);
    let cells: usize = resolutions.iter().product();
    let n = pseudo.n_rows();
    let mut weights = vec![0.0; cells];
    let mut parts: Vec<(usize, f64)> = Vec::new();
    let mut next: Vec<(usize, f64)> = Vec::new();
    for row in 0..n {
        parts.clear();
        parts.push((0, 1.0));
        for (k, &m) in resolutions.iter().enumerate() {
            let p = pseudo.columns[k][row];
            next.clear();
            if pseudo.ranked {
                let r = (p * n as f64 - 0.5).round() as usize;
                for (j, f) in rank_bins(r, n, m) {
                    next.extend(parts.iter().map(|&(idx, w)| (idx + j * st[k], w * f)));
                }
            } else {
                let j = ((p * m as f64).floor() as usize).min(m - 1);
                next.extend(parts.iter().map(|&(idx, w)| (idx + j * st[k], w)));
            }
            std::mem::swap(&mut parts, &mut next);
        }
        for &(idx, w) in &parts {
            weights[idx] += w;
        }
    }
    let mass = weights.into_iter().map(|w| w / n as f64).collect();
    let raw = CheckerboardCopula::from_mass_unchecked(resolutions.to_vec(), mass)?;
    rebalance_marginals(raw)
}

/// Bins met by the rank interval `[r/n, (r+1)/n]` on an `m`-cell axis, with
/// the fraction of the interval in each.
fn rank_bins(r: usize, n: usize, m: usize) -> Vec<(usize, f64)> {
    // Bin j spans [j n, (j+1) n] in units of 1/(n m).
    let (start, end) = (r * m, (r + 1) * m);
    let first = start / n;
    let last = ((end - 1) / n).min(m - 1);
    (first..=last)
        .map(|j| {
            let overlap = end.min((j + 1) * n) - start.max(j * n);
            (j, overlap as f64 / m as f64)
        })
        .collect()
}

fn worst_marginal_error(grid: &CheckerboardCopula) -> f64 {
    let mut worst = 0.0f64;
    for axis in 0..grid.dims() {
        let target = 1.0 / grid.resolutions()[axis] as f64;
        for s in grid.slab_masses(axis) {
            worst = worst.max((s - target).abs());
        }
    }
    worst
}

/// Iterative proportional fitting: rescales the slabs of each axis in turn
/// to mass `1/m_k` until every marginal is uniform within
/// [`REBALANCE_TOL`].
pub fn rebalance_marginals(grid: CheckerboardCopula) -> Result<CheckerboardCopula> {
    rebalance_within(grid, REBALANCE_MAX_SWEEPS)
}

pub(crate) fn rebalance_within(
    grid: CheckerboardCopula,
    max_sweeps: usize,
) -> Result<CheckerboardCopula> {
    if let Some(p) = grid.mass().iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::invalid(format!("cannot rebalance mass {p}")));
    }
    let res = grid.resolutions().to_vec();
    let st = strides(&res);
    let mut current = grid;
    let mut residual = worst_marginal_error(&current);
    let mut sweeps = 0;
    while residual >= REBALANCE_TOL {
        if sweeps == max_sweeps {
            return Err(Error::RebalanceFailed { residual, sweeps });
        }
        let mut mass = current.into_mass();
        for axis in 0..res.len() {
            let m = res[axis];
            let slabs = reduce_to_axes(&mass, &res, &[axis]);
            if let Some(slab) = slabs.iter().position(|&s| s <= 0.0) {
                return Err(Error::DegenerateMarginal { axis, slab });
            }
            let factors: Vec<f64> = slabs.iter().map(|s| 1.0 / (m as f64 * s)).collect();
            for (i, p) in mass.iter_mut().enumerate() {
                *p *= factors[(i / st[axis]) % m];
            }
        }
        current = CheckerboardCopula::from_mass_unchecked(res.clone(), mass)?;
        residual = worst_marginal_error(&current);
        sweeps += 1;
    }
    let diag = current.validate();
    if !diag.pass {
        return Err(Error::Validation(diag));
    }
    Ok(current)
}
