//! The `*` product of a `(u, s)` copula with an `(s, v)` copula.
//!
//! `A` has axes `u₁…u_n, s₁…s_n`; `B` has axes `s₁…s_n, v₁…v_k`. The
//! product links `u` to `v` through the shared block `s`, as if `u` and `v`
//! were conditionally independent given `s`:
//!
//! `(A * B)[u, v] = Σ_s A(u | s) · B[s, v]`
//!
//! where `A(u | s) = A[u, s] / D[s]` is the conditional cell mass of `A`
//! given its `s`-cell, zero when the `s`-cell is empty. Checkerboard
//! conditionals are constant within cells, so the sum is exact.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::copula::{CheckerboardCopula, GroupSplit, VALIDITY_TOL};
use crate::error::{Error, Result};
use crate::generators::random_copula;
use crate::measures::{measure, MeasureKind, MeasureOptions};
use crate::reduce::canonical_sum;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Compatibility {
    /// Largest cellwise difference between the two `s`-marginals.
    pub max_discrepancy: f64,
    pub pass: bool,
}

fn block_sizes(
    a: &CheckerboardCopula,
    b: &CheckerboardCopula,
    n: usize,
) -> Result<(usize, usize, usize)> {
    if n == 0 {
        return Err(Error::invalid("the shared block needs at least one axis"));
    }
    if a.dims() != 2 * n {
        return Err(Error::invalid(format!(
            "left operand has {} axes, expected {}",
            a.dims(),
            2 * n
        )));
    }
    if b.dims() <= n {
        return Err(Error::invalid(format!(
            "right operand has {} axes, needs more than {n}",
            b.dims()
        )));
    }
    if a.resolutions()[n..] != b.resolutions()[..n] {
        return Err(Error::IncompatibleOperands(format!(
            "shared block resolutions differ: {:?} vs {:?}",
            &a.resolutions()[n..],
            &b.resolutions()[..n]
        )));
    }
    let n_u = a.resolutions()[..n].iter().product();
    let n_s = b.resolutions()[..n].iter().product();
    let n_v = b.resolutions()[n..].iter().product();
    Ok((n_u, n_s, n_v))
}

/// Compares the `s`-marginal of `a` (its last `n` axes) with that of `b`
/// (its first `n` axes).
pub fn compatibility_check(
    a: &CheckerboardCopula,
    b: &CheckerboardCopula,
    n: usize,
) -> Result<Compatibility> {
    block_sizes(a, b, n)?;
    let s_axes_a: Vec<usize> = (n..2 * n).collect();
    let s_axes_b: Vec<usize> = (0..n).collect();
    let da = a.marginal(&s_axes_a)?;
    let db = b.marginal(&s_axes_b)?;
    let max_discrepancy = da.max_abs_diff(&db).expect("same shape");
    Ok(Compatibility {
        max_discrepancy,
        pass: max_discrepancy < VALIDITY_TOL,
    })
}

/// The product `A * B`, with axes `u` then `v`.
pub fn star(
    a: &CheckerboardCopula,
    b: &CheckerboardCopula,
    n: usize,
) -> Result<CheckerboardCopula> {
    let (n_u, n_s, n_v) = block_sizes(a, b, n)?;
    let compat = compatibility_check(a, b, n)?;
    if !compat.pass {
        return Err(Error::IncompatibleOperands(format!(
            "shared-block marginals differ by {:.3e}",
            compat.max_discrepancy
        )));
    }
    let pa = a.mass();
    let pb = b.mass();
    let d: Vec<f64> = (0..n_s)
        .map(|s| {
            let mut col: Vec<f64> = (0..n_u).map(|u| pa[u * n_s + s]).collect();
            canonical_sum(&mut col)
        })
        .collect();
    let mass: Vec<f64> = (0..n_u * n_v)
        .into_par_iter()
        .map(|cell| {
            let (u, v) = (cell / n_v, cell % n_v);
            let mut terms: Vec<f64> = (0..n_s)
                .filter(|&s| d[s] > 0.0)
                .map(|s| pa[u * n_s + s] / d[s] * pb[s * n_v + v])
                .collect();
            canonical_sum(&mut terms)
        })
        .collect();
    let res = a.resolutions()[..n]
        .iter()
        .chain(&b.resolutions()[n..])
        .copied()
        .collect();
    CheckerboardCopula::new(res, mass)
}

/// `2n`-dimensional grid with mass `m^{−n}` on cells whose first `n`
/// indices equal their last `n`. Starring with it returns the right operand.
pub fn identity_coupling(n: usize, m: usize) -> Result<CheckerboardCopula> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("identity coupling needs n >= 1 and m >= 1"));
    }
    let block = m
        .checked_pow(n as u32)
        .ok_or_else(|| Error::invalid("grid is too large"))?;
    let mut mass = vec![0.0; block * block];
    let w = 1.0 / block as f64;
    for i in 0..block {
        mass[i * block + i] = w;
    }
    CheckerboardCopula::new(vec![m; 2 * n], mass)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpiReport {
    /// Measure of `v` on `u` in `A * B`.
    pub chain: f64,
    /// Measure of `v` on `s` in `B`.
    pub direct: f64,
    pub holds: bool,
}

/// Checks that dependence of `v` on `u` through `s` does not exceed the
/// direct dependence of `v` on `s`.
pub fn dpi_report(
    a: &CheckerboardCopula,
    b: &CheckerboardCopula,
    n: usize,
    kind: MeasureKind,
    opts: &MeasureOptions,
) -> Result<DpiReport> {
    if kind == MeasureKind::MutualInformation {
        return Err(Error::invalid(
            "mutual_information does not condition on a block; pick a directed kind",
        ));
    }
    let product = star(a, b, n)?;
    let k = b.dims() - n;
    let split = GroupSplit::new((0..n).collect(), (n..n + k).collect(), n + k)?;
    let chain = measure(&product, &split, kind, opts)?.value;
    let direct = measure(b, &split, kind, opts)?.value;
    Ok(DpiReport {
        chain,
        direct,
        holds: chain <= direct + VALIDITY_TOL,
    })
}

/// Random compatible operands: a positive `(u, s, v)` grid with `n` axes in
/// each of `u` and `s` and `v_dims` axes in `v`, split into its `(u, s)`
/// and `(s, v)` marginals.
pub fn random_star_operands<R: Rng>(
    rng: &mut R,
    n: usize,
    v_dims: usize,
    m: usize,
    concentration: f64,
) -> Result<(CheckerboardCopula, CheckerboardCopula)> {
    if n == 0 || v_dims == 0 {
        return Err(Error::invalid("blocks need at least one axis"));
    }
    let joint = random_copula(rng, &vec![m; 2 * n + v_dims], concentration)?;
    let a = joint.marginal(&(0..2 * n).collect::<Vec<_>>())?;
    let b = joint.marginal(&(n..2 * n + v_dims).collect::<Vec<_>>())?;
    Ok((a, b))
}

/// Random `(s, v)` operand with `n` shared axes, one target axis and an
/// independent shared block, hence compatible with [`identity_coupling`].
pub fn random_uniform_link<R: Rng>(
    rng: &mut R,
    n: usize,
    m: usize,
    concentration: f64,
) -> Result<CheckerboardCopula> {
    if n == 0 {
        return Err(Error::invalid("the shared block needs at least one axis"));
    }
    let block = m
        .checked_pow(n as u32)
        .ok_or_else(|| Error::invalid("grid is too large"))?;
    let flat = random_copula(rng, &[block, m], concentration)?;
    CheckerboardCopula::new(vec![m; n + 1], flat.into_mass())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::seeded_rng;

    #[test]
    fn identity_coupling_cells() {
        assert_eq!(
            identity_coupling(1, 2).unwrap().mass(),
            &[0.5, 0.0, 0.0, 0.5]
        );
        let c = identity_coupling(2, 2).unwrap();
        let diag: Vec<usize> = (0..16).filter(|&i| c.mass()[i] > 0.0).collect();
        assert_eq!(diag, vec![0, 5, 10, 15]);
        assert!(c.mass().iter().all(|&p| p == 0.0 || p == 0.25));
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = seeded_rng(11);
        for n in [1, 2] {
            let b = random_uniform_link(&mut rng, n, 4, 0.7).unwrap();
            let c = star(&identity_coupling(n, 4).unwrap(), &b, n).unwrap();
            assert_eq!(c.max_abs_diff(&b).unwrap(), 0.0);
        }
    }

    #[test]
    fn independent_operands() {
        let a = CheckerboardCopula::independence(&[4, 4]).unwrap();
        let b = CheckerboardCopula::independence(&[4, 3]).unwrap();
        let c = compatibility_check(&a, &b, 1).unwrap();
        assert!(c.pass);
        let p = star(&a, &b, 1).unwrap();
        assert!(
            p.max_abs_diff(&CheckerboardCopula::independence(&[4, 3]).unwrap())
                .unwrap()
                < 1e-15
        );
    }

    #[test]
    fn v_independent_of_s_gives_product() {
        let mut rng = seeded_rng(2);
        let (a, _) = random_star_operands(&mut rng, 1, 1, 4, 0.5).unwrap();
        let b = CheckerboardCopula::independence(&[4, 4]).unwrap();
        let p = star(&a, &b, 1).unwrap();
        assert!(p.max_abs_diff(&b).unwrap() < VALIDITY_TOL);
    }

    #[test]
    fn incompatible_operands_are_rejected() {
        let a = CheckerboardCopula::independence(&[4, 4, 4, 4]).unwrap();
        let b = CheckerboardCopula::independence(&[4, 4, 4]).unwrap();
        assert!(compatibility_check(&a, &b, 2).unwrap().pass);
        let co = crate::copula::CheckerboardCopula::comonotone(3, 4).unwrap();
        assert!(!compatibility_check(&a, &co, 2).unwrap().pass);
        assert!(matches!(
            star(&a, &co, 2),
            Err(Error::IncompatibleOperands(_))
        ));
        assert!(compatibility_check(&a, &b, 1).is_err());
        let b3 = CheckerboardCopula::independence(&[3, 4, 4]).unwrap();
        assert!(matches!(
            compatibility_check(&a, &b3, 2),
            Err(Error::IncompatibleOperands(_))
        ));
    }

    #[test]
    fn star_preserves_u_marginal() {
        let mut rng = seeded_rng(4);
        let (a, b) = random_star_operands(&mut rng, 2, 1, 3, 0.5).unwrap();
        let p = star(&a, &b, 2).unwrap();
        let pu = p.marginal(&[0, 1]).unwrap();
        let au = a.marginal(&[0, 1]).unwrap();
        assert!(pu.max_abs_diff(&au).unwrap() <= 1e-12);
    }

    #[test]
    fn dpi_on_random_operands() {
        let mut rng = seeded_rng(9);
        let opts = MeasureOptions::default();
        for _ in 0..10 {
            let (a, b) = random_star_operands(&mut rng, 1, 1, 6, 0.5).unwrap();
            let r = dpi_report(&a, &b, 1, MeasureKind::TauQuadratic, &opts).unwrap();
            assert!(r.holds, "{r:?}");
            assert!(r.chain >= 0.0);
        }
        let (a, b) = random_star_operands(&mut rng, 1, 2, 4, 0.5).unwrap();
        let r = dpi_report(&a, &b, 1, MeasureKind::GroupTau, &opts).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(dpi_report(&a, &b, 1, MeasureKind::MutualInformation, &opts).is_err());
    }
}
