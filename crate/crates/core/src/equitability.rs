//! Invariance checks: a measure recomputed after transforms that should
//! leave it unchanged.

use std::fmt;

use serde::Serialize;

use crate::copula::{CheckerboardCopula, GroupSplit, EXACT_TOL};
use crate::error::{Error, Result};
use crate::estimation::{
    choose_resolution, fit_checkerboard_with, pseudo_observations, ResolutionPolicy,
};
use crate::measures::{measure, MeasureKind, MeasureOptions};

/// Strictly increasing maps applied to a raw data column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonotoneMap {
    Exp,
    Cube,
    /// `x ↦ scale · x + shift` with `scale > 0`.
    Affine {
        scale: f64,
        shift: f64,
    },
}

impl MonotoneMap {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            MonotoneMap::Exp => x.exp(),
            MonotoneMap::Cube => x * x * x,
            MonotoneMap::Affine { scale, shift } => scale * x + shift,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    /// Strictly increasing map of one raw data column.
    Monotone { column: usize, map: MonotoneMap },
    /// Reorders the conditioning block: new position `i` holds old position
    /// `order[i]`.
    PermuteConditioning(Vec<usize>),
    /// Reflects the `k`-th conditioning axis.
    ReverseConditioning(usize),
    /// Reflects the single target axis.
    ReverseTarget,
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Monotone { column, map } => write!(f, "monotone {map:?} on column {column}"),
            Transform::PermuteConditioning(order) => write!(f, "permute conditioning {order:?}"),
            Transform::ReverseConditioning(k) => write!(f, "reverse conditioning axis {k}"),
            Transform::ReverseTarget => f.write_str("reverse target"),
        }
    }
}

impl Transform {
    /// Parses `exp:COL`, `cube:COL`, `affine:COL:SCALE:SHIFT`,
    /// `permute:I,J,…`, `reverse_u:K` or `reverse_v`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let index = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad index '{s}' in transform '{text}'")))
        };
        let real = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad number '{s}' in transform '{text}'")))
        };
        let t = match parts.as_slice() {
            ["exp", c] => Transform::Monotone {
                column: index(c)?,
                map: MonotoneMap::Exp,
            },
            ["cube", c] => Transform::Monotone {
                column: index(c)?,
                map: MonotoneMap::Cube,
            },
            ["affine", c, a, b] => Transform::Monotone {
                column: index(c)?,
                map: MonotoneMap::Affine {
                    scale: real(a)?,
                    shift: real(b)?,
                },
            },
            ["permute", order] => {
                Transform::PermuteConditioning(order.split(',').map(index).collect::<Result<_>>()?)
            }
            ["reverse_u", k] => Transform::ReverseConditioning(index(k)?),
            ["reverse_v"] => Transform::ReverseTarget,
            _ => return Err(Error::invalid(format!("unsupported transform '{text}'"))),
        };
        Ok(t)
    }

    /// Allowed deviation: zero for rank-preserving and relabeling transforms.
    pub fn tolerance(&self) -> f64 {
        match self {
            Transform::ReverseTarget => EXACT_TOL,
            _ => 0.0,
        }
    }
}

/// Raw data to be fitted, or a fitted copula.
#[derive(Debug, Clone)]
pub enum EquitabilityInput<'a> {
    Data {
        columns: &'a [Vec<f64>],
        policy: ResolutionPolicy,
    },
    Copula(&'a CheckerboardCopula),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquitabilityCase {
    pub transform: String,
    pub value: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquitabilityReport {
    pub kind: String,
    pub baseline: f64,
    pub cases: Vec<EquitabilityCase>,
    pub max_deviation: f64,
    pub pass: bool,
}

fn fit(columns: &[Vec<f64>], policy: &ResolutionPolicy) -> Result<CheckerboardCopula> {
    let pseudo = pseudo_observations(columns)?;
    let res = choose_resolution(pseudo.n_rows(), pseudo.n_cols(), policy)?;
    fit_checkerboard_with(&pseudo, &res, policy)
}

fn check_transform(t: &Transform, split: &GroupSplit, data_cols: Option<usize>) -> Result<()> {
    let n_u = split.u_axes().len();
    match t {
        Transform::Monotone { column, map } => {
            let Some(cols) = data_cols else {
                return Err(Error::invalid("monotone transforms need raw data input"));
            };
            if *column >= cols {
                return Err(Error::invalid(format!("column {column} out of range")));
            }
            if let MonotoneMap::Affine { scale, shift } = map {
                if !(*scale > 0.0 && scale.is_finite() && shift.is_finite()) {
                    return Err(Error::invalid(
                        "affine transforms need a finite positive scale",
                    ));
                }
            }
        }
        Transform::PermuteConditioning(order) => {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            if sorted != (0..n_u).collect::<Vec<_>>() {
                return Err(Error::invalid(format!(
                    "{order:?} is not a permutation of the {n_u} conditioning axes"
                )));
            }
        }
        Transform::ReverseConditioning(k) if *k >= n_u => {
            return Err(Error::invalid(format!(
                "conditioning axis {k} out of range"
            )));
        }
        Transform::ReverseTarget if split.v_axes().len() != 1 => {
            return Err(Error::invalid("target reversal needs a single target axis"));
        }
        _ => {}
    }
    Ok(())
}

/// Recomputes `kind` after each transform and compares with the baseline.
///
/// Raw-data transforms refit the grid with the same policy; the others act
/// on the fitted grid.
pub fn equitability_suite(
    input: EquitabilityInput<'_>,
    split: &GroupSplit,
    kind: MeasureKind,
    transforms: &[Transform],
    opts: &MeasureOptions,
) -> Result<EquitabilityReport> {
    let data_cols = match &input {
        EquitabilityInput::Data { columns, .. } => Some(columns.len()),
        EquitabilityInput::Copula(_) => None,
    };
    for t in transforms {
        check_transform(t, split, data_cols)?;
    }
    let base = match &input {
        EquitabilityInput::Data { columns, policy } => fit(columns, policy)?,
        EquitabilityInput::Copula(c) => (*c).clone(),
    };
    let baseline = measure(&base, split, kind, opts)?.value;
    let mut cases = Vec::with_capacity(transforms.len());
    for t in transforms {
        let copula = match t {
            Transform::Monotone { column, map } => {
                let EquitabilityInput::Data { columns, policy } = &input else {
                    unreachable!("checked above");
                };
                let mut cols = columns.to_vec();
                for x in cols[*column].iter_mut() {
                    *x = map.apply(*x);
                }
                fit(&cols, policy)?
            }
            Transform::PermuteConditioning(order) => {
                let u = split.u_axes();
                let mut perm: Vec<usize> = (0..base.dims()).collect();
                for (i, &j) in order.iter().enumerate() {
                    perm[u[i]] = u[j];
                }
                base.permute_axes(&perm)?
            }
            Transform::ReverseConditioning(k) => base.reverse_axis(split.u_axes()[*k])?,
            Transform::ReverseTarget => base.reverse_axis(split.v_axes()[0])?,
        };
        let value = measure(&copula, split, kind, opts)?.value;
        let deviation = (value - baseline).abs();
        let tolerance = t.tolerance();
        cases.push(EquitabilityCase {
            transform: t.to_string(),
            value,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        });
    }
    let max_deviation = cases.iter().map(|c| c.deviation).fold(0.0, f64::max);
    let pass = cases.iter().all(|c| c.pass);
    Ok(EquitabilityReport {
        kind: kind.to_string(),
        baseline,
        cases,
        max_deviation,
        pass,
    })
}
