//! Measures of one target variable on a conditioning block.
//!
//! Inside conditioning cell `u` the conditional distribution of the target is
//! piecewise linear: on target cell `j` it rises from `F_j` with slope
//! `q_j · m`, where `q_j` is the conditional mass of the cell. Every
//! integral over the target coordinate is therefore done cell by cell.

use crate::copula::{CheckerboardCopula, GroupSplit};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::reduce::pairwise_sum;

use super::conditional::SplitGrid;

const ADAPTIVE_TOL: f64 = 1e-12;
const ADAPTIVE_DEPTH: usize = 12;

/// Conditional masses and left-endpoint values of one conditioning cell.
struct Ramp {
    q: Vec<f64>,
    f: Vec<f64>,
}

impl Ramp {
    fn new(row: &[f64], w: f64) -> Self {
        let q: Vec<f64> = row.iter().map(|p| p / w).collect();
        let mut f = Vec::with_capacity(q.len());
        let mut acc = 0.0;
        for &qj in &q {
            f.push(acc);
            acc += qj;
        }
        Self { q, f }
    }

    fn cells(&self) -> usize {
        self.q.len()
    }

    /// `F(v) − v = a + b t` on cell `j`, with `t ∈ [0, 1]` the position
    /// inside the cell.
    fn deviation(&self, j: usize) -> (f64, f64) {
        let m = self.cells() as f64;
        (self.f[j] - j as f64 / m, self.q[j] - 1.0 / m)
    }

    fn value(&self, j: usize, v: f64) -> f64 {
        let m = self.cells() as f64;
        self.f[j] + self.q[j] * (v * m - j as f64)
    }
}

pub(crate) fn single_target_grid<'a>(
    copula: &'a CheckerboardCopula,
    split: &GroupSplit,
) -> Result<SplitGrid<'a>> {
    if split.v_axes().len() != 1 {
        return Err(Error::invalid(format!(
            "this measure needs exactly one target axis, got {}; use group_tau",
            split.v_axes().len()
        )));
    }
    SplitGrid::new(copula, split)
}

/// `Σ_u w ∫ (F − v)² dv`, closed form per target cell.
pub(crate) fn quadratic_integral(grid: &SplitGrid<'_>) -> f64 {
    grid.sum_rows(|row, w| {
        let ramp = Ramp::new(row, w);
        let m = ramp.cells();
        let terms: Vec<f64> = (0..m)
            .map(|j| {
                let (a, b) = ramp.deviation(j);
                (a * a + a * b + b * b / 3.0) / m as f64
            })
            .collect();
        w * pairwise_sum(&terms)
    })
}

/// `Σ_u w ∫ φ(F − v) dv` by Gauss–Legendre on each target cell, split where
/// `F − v` changes sign.
pub(crate) fn phi_integral<P>(grid: &SplitGrid<'_>, phi: &P, rule: &GaussLegendre) -> Result<f64>
where
    P: Fn(f64) -> f64 + Sync,
{
    let total = grid.sum_rows(|row, w| {
        let ramp = Ramp::new(row, w);
        let m = ramp.cells();
        let terms: Vec<f64> = (0..m)
            .map(|j| {
                let (a, b) = ramp.deviation(j);
                let kink = if b != 0.0 { -a / b } else { f64::NAN };
                rule.integrate_split(|t| phi(a + b * t), 0.0, 1.0, kink) / m as f64
            })
            .collect();
        w * pairwise_sum(&terms)
    });
    if !total.is_finite() {
        return Err(Error::EvaluationFailed(format!(
            "integrand produced non-finite total {total}"
        )));
    }
    Ok(total)
}

/// `Σ_u w ∫ g(F(v)/v) dv`. On the first target cell `F(v)/v` is the
/// constant `q_0 m`; elsewhere the ratio is smooth and is integrated
/// adaptively.
fn ratio_integral<G>(grid: &SplitGrid<'_>, g: &G, rule: &GaussLegendre) -> f64
where
    G: Fn(f64) -> f64 + Sync,
{
    grid.sum_rows(|row, w| {
        let ramp = Ramp::new(row, w);
        let m = ramp.cells();
        let width = 1.0 / m as f64;
        let terms: Vec<f64> = (0..m)
            .map(|j| {
                if j == 0 {
                    return g(ramp.q[0] * m as f64) * width;
                }
                if ramp.f[j] == 0.0 && ramp.q[j] == 0.0 {
                    return g(0.0) * width;
                }
                let lo = j as f64 * width;
                let hi = (j + 1) as f64 * width;
                rule.integrate_adaptive(
                    &|v: f64| g(ramp.value(j, v) / v),
                    lo,
                    hi,
                    ADAPTIVE_TOL,
                    ADAPTIVE_DEPTH,
                )
            })
            .collect();
        w * pairwise_sum(&terms)
    })
}

/// `(α + 1)(α + 2)/2`, the value that maps complete dependence to 1.
pub fn alpha_normalizer(alpha: f64) -> f64 {
    (alpha + 1.0) * (alpha + 2.0) / 2.0
}

pub(crate) fn tau_quadratic_value(copula: &CheckerboardCopula, split: &GroupSplit) -> Result<f64> {
    let grid = single_target_grid(copula, split)?;
    Ok(6.0 * quadratic_integral(&grid))
}

pub(crate) fn tau_alpha_value(
    copula: &CheckerboardCopula,
    split: &GroupSplit,
    alpha: f64,
    rule: &GaussLegendre,
) -> Result<f64> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!(
            "tau_alpha needs alpha >= 1, got {alpha}"
        )));
    }
    if alpha == 2.0 {
        return tau_quadratic_value(copula, split);
    }
    let grid = single_target_grid(copula, split)?;
    let raw = phi_integral(&grid, &|x: f64| x.abs().powf(alpha), rule)?;
    Ok(alpha_normalizer(alpha) * raw)
}

pub(crate) fn renyi_alpha_value(
    copula: &CheckerboardCopula,
    split: &GroupSplit,
    alpha: f64,
    rule: &GaussLegendre,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) || alpha == 1.0 {
        return Err(Error::invalid(format!(
            "renyi_alpha needs 0 < alpha < 2 and alpha != 1, got {alpha}"
        )));
    }
    let grid = single_target_grid(copula, split)?;
    // Integrate r^α − 1 so that independence gives exactly 0.
    let excess = ratio_integral(&grid, &|r: f64| r.powf(alpha) - 1.0, rule);
    let value = excess.ln_1p() / (alpha - 1.0);
    if !value.is_finite() {
        return Err(Error::EvaluationFailed(format!(
            "renyi_alpha diverged ({value})"
        )));
    }
    Ok(value)
}

pub(crate) fn renyi_limit_value(
    copula: &CheckerboardCopula,
    split: &GroupSplit,
    rule: &GaussLegendre,
) -> Result<f64> {
    let grid = single_target_grid(copula, split)?;
    let xlogx = |r: f64| if r > 0.0 { r * r.ln() } else { 0.0 };
    Ok(ratio_integral(&grid, &xlogx, rule))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule() -> GaussLegendre {
        GaussLegendre::new(16).unwrap()
    }

    /// Midpoint Riemann sum of `Σ_u w ∫ (F − v)² dv` using the conditional
    /// CDF evaluated pointwise from cumulative masses.
    fn riemann_tau(c: &CheckerboardCopula, points: usize) -> f64 {
        let d = c.dims();
        let m = c.resolutions()[d - 1];
        let n_u = c.cell_count() / m;
        let mut total = 0.0;
        for u in 0..n_u {
            let row = &c.mass()[u * m..(u + 1) * m];
            let w: f64 = row.iter().sum();
            if w == 0.0 {
                continue;
            }
            let mut acc = 0.0;
            for k in 0..points {
                let v = (k as f64 + 0.5) / points as f64;
                let mut f = 0.0;
                for (j, p) in row.iter().enumerate() {
                    f += p * (v * m as f64 - j as f64).clamp(0.0, 1.0);
                }
                acc += (f / w - v).powi(2);
            }
            total += w * acc / points as f64;
        }
        6.0 * total
    }

    #[test]
    fn independence_is_zero() {
        for dims in 2..=4 {
            let pi = CheckerboardCopula::independence(&vec![8; dims]).unwrap();
            let s = GroupSplit::last_as_target(dims).unwrap();
            assert_eq!(tau_quadratic_value(&pi, &s).unwrap(), 0.0);
            assert_eq!(tau_alpha_value(&pi, &s, 1.0, &rule()).unwrap(), 0.0);
            assert_eq!(renyi_alpha_value(&pi, &s, 1.5, &rule()).unwrap(), 0.0);
            assert_eq!(renyi_limit_value(&pi, &s, &rule()).unwrap(), 0.0);
        }
    }

    #[test]
    fn comonotone_closed_form_matches_riemann_oracle() {
        for dims in [2, 3] {
            for m in [4, 16] {
                let c = CheckerboardCopula::comonotone(dims, m).unwrap();
                let s = GroupSplit::last_as_target(dims).unwrap();
                let tau = tau_quadratic_value(&c, &s).unwrap();
                assert!((tau - (1.0 - 1.0 / m as f64)).abs() < 1e-12);
                let oracle = riemann_tau(&c, 10_000);
                assert!((tau - oracle).abs() < 1e-6, "{tau} vs {oracle}");
            }
        }
    }

    #[test]
    fn alpha_two_is_quadratic() {
        let c = crate::generators::mixture_copula(0.6, 16).unwrap();
        let s = GroupSplit::last_as_target(2).unwrap();
        let a = tau_alpha_value(&c, &s, 2.0, &rule()).unwrap();
        let b = tau_quadratic_value(&c, &s).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn alpha_normalizer_matches_uniform_threshold() {
        // Oracle: under complete dependence the threshold u of 1{v >= u} is
        // uniform, so ∫∫ |1{v>=u} − v|^α = 2/((α+1)(α+2)). Check by a 2-D
        // midpoint rule.
        for alpha in [1.0, 1.5, 2.0, 3.0] {
            let n = 2000;
            let mut acc = 0.0;
            for i in 0..n {
                let u = (i as f64 + 0.5) / n as f64;
                for k in 0..n {
                    let v = (k as f64 + 0.5) / n as f64;
                    let ind = if v >= u { 1.0 } else { 0.0 };
                    acc += f64::abs(ind - v).powf(alpha);
                }
            }
            let integral = acc / (n * n) as f64;
            assert!(
                (alpha_normalizer(alpha) * integral - 1.0).abs() < 2e-3,
                "alpha {alpha}"
            );
        }
    }

    #[test]
    fn alpha_range() {
        let c = CheckerboardCopula::independence(&[4, 4]).unwrap();
        let s = GroupSplit::last_as_target(2).unwrap();
        assert!(tau_alpha_value(&c, &s, 0.5, &rule()).is_err());
        assert!(renyi_alpha_value(&c, &s, 1.0, &rule()).is_err());
        assert!(renyi_alpha_value(&c, &s, 2.0, &rule()).is_err());
        assert!(renyi_alpha_value(&c, &s, 0.0, &rule()).is_err());
        let g = CheckerboardCopula::independence(&[4, 4, 4]).unwrap();
        let split = GroupSplit::new(vec![0], vec![1, 2], 3).unwrap();
        assert!(tau_quadratic_value(&g, &split).is_err());
    }

    #[test]
    fn comonotone_entropy_forms_approach_continuous_values() {
        let c = CheckerboardCopula::comonotone(2, 512).unwrap();
        let s = GroupSplit::last_as_target(2).unwrap();
        let r = renyi_limit_value(&c, &s, &rule()).unwrap();
        assert!((r - 1.0).abs() < 0.05, "R = {r}");
        // Oracle: per-cell adaptive quadrature of (F/v)^1.5 plus the closed
        // tail beyond each diagonal cell, evaluated independently.
        let r15 = renyi_alpha_value(&c, &s, 1.5, &rule()).unwrap();
        assert!((r15 - 1.3329386442905025).abs() < 1e-9, "R_1.5 = {r15}");
        let coarse = CheckerboardCopula::comonotone(2, 64).unwrap();
        let r15_coarse = renyi_alpha_value(&coarse, &s, 1.5, &rule()).unwrap();
        assert!((r15_coarse - 1.23372324373828).abs() < 1e-9);
        assert!(r15_coarse < r15 && r15 < 2.0 * 2f64.ln());
    }

    #[test]
    fn renyi_grows_as_alpha_approaches_two() {
        let c = CheckerboardCopula::comonotone(2, 256).unwrap();
        let s = GroupSplit::last_as_target(2).unwrap();
        let vals: Vec<f64> = [1.5, 1.9, 1.99]
            .iter()
            .map(|&a| renyi_alpha_value(&c, &s, a, &rule()).unwrap())
            .collect();
        assert!(vals[0] < vals[1] && vals[1] < vals[2], "{vals:?}");
    }
}
