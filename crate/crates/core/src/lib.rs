//! Nonsymmetric dependence measures of a target block on a conditioning
//! block, estimated through checkerboard copulas.
//!
//! ```
//! use copdep::{measure, CheckerboardCopula, GroupSplit, MeasureKind, MeasureOptions};
//!
//! let c = CheckerboardCopula::comonotone(2, 64).unwrap();
//! let split = GroupSplit::last_as_target(2).unwrap();
//! let r = measure(&c, &split, MeasureKind::TauQuadratic, &MeasureOptions::default()).unwrap();
//! assert!((r.value - (1.0 - 1.0 / 64.0)).abs() < 1e-12);
//! ```

pub mod copula;
pub mod equitability;
pub mod error;
pub mod estimation;
pub mod generators;
pub mod io;
pub mod measures;
pub mod quadrature;
pub mod reduce;
pub mod star;
pub mod verify;

pub use copula::{CdfTable, CheckerboardCopula, Diagnostics, GridBox, GroupSplit};
pub use error::{Error, Result};
pub use estimation::{
    choose_resolution, fit_checkerboard, fit_checkerboard_with, pseudo_observations,
    rebalance_marginals, PseudoObservations, ResolutionMode, ResolutionPolicy,
};
pub use measures::{
    alpha_normalizer, averaged_dependence, conditional_cdf, generic_measure, group_tau,
    group_tau_normalized, kendall_cdf, measure, mutual_information, renyi_alpha, renyi_limit,
    tau_alpha, tau_quadratic, KendallCdf, MeasureKind, MeasureOptions, MeasureReport,
};
pub use star::{compatibility_check, dpi_report, identity_coupling, star};
