//! Nonsymmetric dependence measures on checkerboard copulas.
//!
//! | kind | target | value |
//! |------|--------|-------|
//! | `tau_quadratic` | one axis | `6 Σ_u w ∫ (F(v|u) − v)² dv` |
//! | `tau_alpha` | one axis | `(α+1)(α+2)/2 · Σ_u w ∫ |F(v|u) − v|^α dv`, α ≥ 1 |
//! | `renyi_alpha` | one axis | `ln(Σ_u w ∫ (F(v|u)/v)^α dv) / (α − 1)`, 0 < α < 2 |
//! | `renyi_limit` | one axis | `Σ_u w ∫ (F/v) ln(F/v) dv` |
//! | `mutual_information` | all axes | plug-in grid mutual information |
//! | `group_tau` | ≥ 2 axes | `6 Σ_u w ∫ (F(v|u) − C_V(v))² dC_V(v)` with its Kendall bound |
//! | `group_tau_normalized` | ≥ 2 axes | `group_tau` divided by its bound |
//! | `averaged_dependence` | ≥ 1 axis | mean of `tau_quadratic` over the target axes |
//!
//! The τ kinds lie in `[0, 1]`; the entropy kinds and mutual information are
//! unbounded above. Conditioning cells without mass contribute nothing.
//! Sums over conditioning cells are taken in sorted order, so relabeling or
//! reflecting conditioning axes leaves every value bit-identical.

mod conditional;
mod group;
mod information;
mod single;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::copula::{CheckerboardCopula, GroupSplit, VALIDITY_TOL};
use crate::error::{Error, Result};
use crate::quadrature::{GaussLegendre, DEFAULT_ORDER};

pub use conditional::conditional_cdf;
pub use group::{kendall_cdf, KendallCdf};
pub use single::alpha_normalizer;

/// Bounds below this cannot normalize a group measure.
pub const DEGENERATE_BOUND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureKind {
    TauQuadratic,
    TauAlpha(f64),
    RenyiAlpha(f64),
    RenyiLimit,
    MutualInformation,
    GroupTau,
    GroupTauNormalized,
    AveragedDependence,
}

impl MeasureKind {
    pub const TAGS: [&'static str; 8] = [
        "tau_quadratic",
        "tau_alpha",
        "renyi_alpha",
        "renyi_limit",
        "mutual_information",
        "group_tau",
        "group_tau_normalized",
        "averaged_dependence",
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            MeasureKind::TauQuadratic => "tau_quadratic",
            MeasureKind::TauAlpha(_) => "tau_alpha",
            MeasureKind::RenyiAlpha(_) => "renyi_alpha",
            MeasureKind::RenyiLimit => "renyi_limit",
            MeasureKind::MutualInformation => "mutual_information",
            MeasureKind::GroupTau => "group_tau",
            MeasureKind::GroupTauNormalized => "group_tau_normalized",
            MeasureKind::AveragedDependence => "averaged_dependence",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            MeasureKind::TauAlpha(a) | MeasureKind::RenyiAlpha(a) => Some(a),
            _ => None,
        }
    }

    /// Builds a kind from its tag; `alpha` is required exactly for the
    /// parameterized kinds.
    pub fn from_tag(tag: &str, alpha: Option<f64>) -> Result<Self> {
        let kind = match (tag, alpha) {
            ("tau_alpha", Some(a)) => MeasureKind::TauAlpha(a),
            ("renyi_alpha", Some(a)) => MeasureKind::RenyiAlpha(a),
            ("tau_alpha" | "renyi_alpha", None) => {
                return Err(Error::invalid(format!("{tag} needs an alpha")))
            }
            (_, Some(_)) if Self::TAGS.contains(&tag) => {
                return Err(Error::invalid(format!("{tag} takes no alpha")))
            }
            ("tau_quadratic", None) => MeasureKind::TauQuadratic,
            ("renyi_limit", None) => MeasureKind::RenyiLimit,
            ("mutual_information", None) => MeasureKind::MutualInformation,
            ("group_tau", None) => MeasureKind::GroupTau,
            ("group_tau_normalized", None) => MeasureKind::GroupTauNormalized,
            ("averaged_dependence", None) => MeasureKind::AveragedDependence,
            _ => return Err(Error::invalid(format!("unknown measure kind '{tag}'"))),
        };
        kind.check()?;
        Ok(kind)
    }

    pub fn check(&self) -> Result<()> {
        match *self {
            MeasureKind::TauAlpha(a) if !(a >= 1.0 && a.is_finite()) => Err(Error::invalid(
                format!("tau_alpha needs alpha >= 1, got {a}"),
            )),
            MeasureKind::RenyiAlpha(a) if !(a > 0.0 && a < 2.0) || a == 1.0 => Err(Error::invalid(
                format!("renyi_alpha needs 0 < alpha < 2, alpha != 1, got {a}"),
            )),
            _ => Ok(()),
        }
    }

    /// Kinds bounded by 1 (the τ family).
    pub fn is_bounded(&self) -> bool {
        !matches!(
            self,
            MeasureKind::RenyiAlpha(_) | MeasureKind::RenyiLimit | MeasureKind::MutualInformation
        )
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.alpha() {
            Some(a) => write!(f, "{}(alpha={a})", self.tag()),
            None => f.write_str(self.tag()),
        }
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_tag(s, None)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureOptions {
    /// Gauss–Legendre points per target cell.
    pub quad_order: usize,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self {
            quad_order: DEFAULT_ORDER,
        }
    }
}

impl MeasureOptions {
    fn rule(&self) -> Result<GaussLegendre> {
        GaussLegendre::new(self.quad_order)
    }
}

/// One computed measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    pub kind: MeasureKind,
    pub value: f64,
    pub split: GroupSplit,
    pub resolutions: Vec<usize>,
    /// Kendall bound of the target block (group kinds).
    pub upper_bound: Option<f64>,
    /// `value / upper_bound` (group kinds, when the bound is not degenerate).
    pub normalized: Option<f64>,
    /// `c_α` for `tau_alpha`.
    pub normalizer: Option<f64>,
    pub sample_size: Option<usize>,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    kind: &'static str,
    alpha: Option<f64>,
    value: f64,
    upper_bound: Option<f64>,
    normalizer: Option<f64>,
    u_axes: &'a [usize],
    v_axes: &'a [usize],
    resolutions: &'a [usize],
    sample_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalized_value: Option<f64>,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    warnings: &'a [String],
}

impl Serialize for MeasureReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ReportJson {
            kind: self.kind.tag(),
            alpha: self.kind.alpha(),
            value: self.value,
            upper_bound: self.upper_bound,
            normalizer: self.normalizer,
            u_axes: self.split.u_axes(),
            v_axes: self.split.v_axes(),
            resolutions: &self.resolutions,
            sample_size: self.sample_size,
            normalized_value: self.normalized,
            warnings: &self.warnings,
        }
        .serialize(s)
    }
}

impl MeasureReport {
    fn new(kind: MeasureKind, value: f64, copula: &CheckerboardCopula, split: &GroupSplit) -> Self {
        let mut warnings = Vec::new();
        if kind.is_bounded() && !(-VALIDITY_TOL..=1.0 + VALIDITY_TOL).contains(&value) {
            warnings.push(format!("{kind} value {value} outside [0, 1]"));
        }
        Self {
            kind,
            value,
            split: split.clone(),
            resolutions: copula.resolutions().to_vec(),
            upper_bound: None,
            normalized: None,
            normalizer: None,
            sample_size: None,
            warnings,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

/// Quadratic measure of a single target axis on the conditioning block.
pub fn tau_quadratic(copula: &CheckerboardCopula, split: &GroupSplit) -> Result<MeasureReport> {
    let value = single::tau_quadratic_value(copula, split)?;
    Ok(MeasureReport::new(
        MeasureKind::TauQuadratic,
        value,
        copula,
        split,
    ))
}

/// `|·|^α` distance measure, normalized so complete dependence maps to 1.
/// `α = 2` takes the closed-form quadratic path.
pub fn tau_alpha(
    copula: &CheckerboardCopula,
    split: &GroupSplit,
    alpha: f64,
    opts: &MeasureOptions,
) -> Result<MeasureReport> {
    let value = single::tau_alpha_value(copula, split, alpha, &opts.rule()?)?;
    let mut r = MeasureReport::new(MeasureKind::TauAlpha(alpha), value, copula, split);
    r.normalizer = Some(alpha_normalizer(alpha));
    Ok(r)
}

/// Rényi-type entropy form, `0 < α < 2`, `α ≠ 1`.
pub fn renyi_alpha(
    copula: &CheckerboardCopula,
    split: &GroupSplit,
    alpha: f64,
    opts: &MeasureOptions,
) -> Result<MeasureReport> {
    let value = single::renyi_alpha_value(copula, split, alpha, &opts.rule()?)?;
    Ok(MeasureReport::new(
        MeasureKind::RenyiAlpha(alpha),
        value,
        copula,
        split,
    ))
}

/// The `α → 1` limit of [`renyi_alpha`].
pub fn renyi_limit(
    copula: &CheckerboardCopula,
    split: &GroupSplit,
    opts: &MeasureOptions,
) -> Result<MeasureReport> {
    let value = single::renyi_limit_value(copula, split, &opts.rule()?)?;
    Ok(MeasureReport::new(
        MeasureKind::RenyiLimit,
        value,
        copula,
        split,
    ))
}

/// Plug-in mutual information of the whole grid. The split is only recorded
/// in the report.
pub fn mutual_information(
    copula: &CheckerboardCopula,
    split: &GroupSplit,
) -> Result<MeasureReport> {
    if split.dims() != copula.dims() {
        return Err(Error::invalid("split does not match copula dimension"));
    }
    let value = information::mutual_information_value(copula);
    Ok(MeasureReport::new(
        MeasureKind::MutualInformation,
        value,
        copula,
        split,
    ))
}

/// Unnormalized convex-φ measure. With one target axis the reference is
/// `v` and each target cell is integrated by Gauss–Legendre; with several
/// the reference is the target-block copula at the cell midpoints.
pub fn generic_measure<P>(
    copula: &CheckerboardCopula,
    split: &GroupSplit,
    phi: P,
    opts: &MeasureOptions,
) -> Result<f64>
where
    P: Fn(f64) -> f64 + Sync,
{
    if split.v_axes().len() == 1 {
        let grid = single::single_target_grid(copula, split)?;
        single::phi_integral(&grid, &phi, &opts.rule()?)
    } else {
        let grid = group::group_grid(copula, split)?;
        let reference = group::TargetReference::new(&grid);
        let value = group::group_phi_integral(&grid, &reference, &phi);
        if !value.is_finite() {
            return Err(Error::EvaluationFailed(format!("non-finite total {value}")));
        }
        Ok(value)
    }
}

/// Quadratic measure of a target group on the conditioning block, with the
/// Kendall upper bound attached.
pub fn group_tau(copula: &CheckerboardCopula, split: &GroupSplit) -> Result<MeasureReport> {
    let (value, bound) = group::group_tau_value(copula, split)?;
    let mut r = MeasureReport::new(MeasureKind::GroupTau, value, copula, split);
    if value > bound + VALIDITY_TOL {
        r.warnings
            .push(format!("value {value} exceeds bound {bound}"));
    }
    r.upper_bound = Some(bound);
    r.normalized = (bound >= DEGENERATE_BOUND).then(|| value / bound);
    Ok(r)
}

/// [`group_tau`] divided by its bound.
pub fn group_tau_normalized(
    copula: &CheckerboardCopula,
    split: &GroupSplit,
) -> Result<MeasureReport> {
    let (value, bound) = group::group_tau_value(copula, split)?;
    if bound < DEGENERATE_BOUND {
        return Err(Error::DegenerateBound(bound));
    }
    let mut r = MeasureReport::new(
        MeasureKind::GroupTauNormalized,
        value / bound,
        copula,
        split,
    );
    r.upper_bound = Some(bound);
    r.normalized = Some(value / bound);
    Ok(r)
}

/// Mean over target axes of the single-target quadratic measure.
pub fn averaged_dependence(
    copula: &CheckerboardCopula,
    split: &GroupSplit,
) -> Result<MeasureReport> {
    let value = group::averaged_dependence_value(copula, split)?;
    Ok(MeasureReport::new(
        MeasureKind::AveragedDependence,
        value,
        copula,
        split,
    ))
}

/// `6 ∫ (t − t²) dK(t)`.
pub fn max_bound(kendall: &KendallCdf) -> f64 {
    kendall.max_bound()
}

/// Computes any measure kind. Group kinds with a single target axis fall
/// back to `tau_quadratic`, whose bound is 1.
pub fn measure(
    copula: &CheckerboardCopula,
    split: &GroupSplit,
    kind: MeasureKind,
    opts: &MeasureOptions,
) -> Result<MeasureReport> {
    kind.check()?;
    match kind {
        MeasureKind::TauQuadratic => tau_quadratic(copula, split),
        MeasureKind::TauAlpha(a) => tau_alpha(copula, split, a, opts),
        MeasureKind::RenyiAlpha(a) => renyi_alpha(copula, split, a, opts),
        MeasureKind::RenyiLimit => renyi_limit(copula, split, opts),
        MeasureKind::MutualInformation => mutual_information(copula, split),
        MeasureKind::GroupTau | MeasureKind::GroupTauNormalized if split.v_axes().len() == 1 => {
            let mut r = tau_quadratic(copula, split)?;
            r.kind = kind;
            r.upper_bound = Some(1.0);
            r.normalized = Some(r.value);
            Ok(r)
        }
        MeasureKind::GroupTau => group_tau(copula, split),
        MeasureKind::GroupTauNormalized => group_tau_normalized(copula, split),
        MeasureKind::AveragedDependence => averaged_dependence(copula, split),
    }
}
