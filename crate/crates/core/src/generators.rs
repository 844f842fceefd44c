//! Synthetic samples and grids with known dependence.
//!
//! Every sampler draws from a ChaCha20 stream seeded with the caller's
//! 64-bit seed, one row at a time, so output is identical across runs and
//! platforms for the same seed.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::copula::CheckerboardCopula;
use crate::error::{Error, Result};
use crate::estimation::rebalance_within;
use crate::io::Table;

/// Deterministic generator used throughout the crate.
pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Deterministic target functions for [`SynthModel::Functional`]. Inputs are
/// uniform on `(−1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetFunction {
    /// `y = sin(x1) + x2²`
    SinPlusSquare,
    /// `y = x1 + … + xk`
    Sum(usize),
    /// `y = x1 · … · xk`
    Product(usize),
}

impl TargetFunction {
    pub fn inputs(&self) -> usize {
        match *self {
            TargetFunction::SinPlusSquare => 2,
            TargetFunction::Sum(k) | TargetFunction::Product(k) => k,
        }
    }

    pub fn apply(&self, x: &[f64]) -> f64 {
        match self {
            TargetFunction::SinPlusSquare => x[0].sin() + x[1] * x[1],
            TargetFunction::Sum(_) => x.iter().sum(),
            TargetFunction::Product(_) => x.iter().product(),
        }
    }

    /// Parses `sin_plus_square`, `sum:K` or `product:K`.
    pub fn parse(text: &str) -> Result<Self> {
        let (name, arg) = match text.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (text, None),
        };
        let count = |a: Option<&str>| -> Result<usize> {
            match a.map(str::parse::<usize>) {
                Some(Ok(k)) if k >= 1 => Ok(k),
                _ => Err(Error::invalid(format!(
                    "'{text}' needs a positive input count"
                ))),
            }
        };
        match name {
            "sin_plus_square" if arg.is_none() => Ok(TargetFunction::SinPlusSquare),
            "sum" => Ok(TargetFunction::Sum(count(arg)?)),
            "product" => Ok(TargetFunction::Product(count(arg)?)),
            _ => Err(Error::invalid(format!("unknown target function '{text}'"))),
        }
    }
}

impl fmt::Display for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetFunction::SinPlusSquare => f.write_str("sin_plus_square"),
            TargetFunction::Sum(k) => write!(f, "sum:{k}"),
            TargetFunction::Product(k) => write!(f, "product:{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthModel {
    /// Independent uniforms.
    Independent { dims: usize },
    /// One uniform repeated in every column.
    Comonotone { dims: usize },
    /// `(U, V)` with `V = U` with probability `theta`, otherwise independent.
    Mixture { theta: f64 },
    /// Uniform inputs and `y = f(x) + sigma · N(0, 1)`.
    Functional {
        function: TargetFunction,
        sigma: f64,
    },
    /// Normal scores with the given correlation, mapped through the normal CDF.
    Gaussian { correlation: Vec<Vec<f64>> },
    /// `X ~ U(−1, 1)`, `Y = X²`.
    SquareLaw,
}

impl SynthModel {
    pub fn dims(&self) -> usize {
        match self {
            SynthModel::Independent { dims } | SynthModel::Comonotone { dims } => *dims,
            SynthModel::Mixture { .. } | SynthModel::SquareLaw => 2,
            SynthModel::Functional { function, .. } => function.inputs() + 1,
            SynthModel::Gaussian { correlation } => correlation.len(),
        }
    }

    pub fn check(&self) -> Result<()> {
        match self {
            SynthModel::Independent { dims } | SynthModel::Comonotone { dims } if *dims < 2 => {
                Err(Error::invalid("synthetic data needs at least two columns"))
            }
            SynthModel::Mixture { theta } if !(0.0..=1.0).contains(theta) => {
                Err(Error::invalid(format!("theta {theta} outside [0, 1]")))
            }
            SynthModel::Functional { sigma, .. } if !(*sigma >= 0.0 && sigma.is_finite()) => Err(
                Error::invalid(format!("noise level {sigma} must be finite and >= 0")),
            ),
            SynthModel::Gaussian { correlation } => cholesky(correlation).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Column names: `x1, …, x(d−1), y`.
    pub fn headers(&self) -> Vec<String> {
        let d = self.dims();
        (1..d)
            .map(|k| format!("x{k}"))
            .chain(["y".to_string()])
            .collect()
    }
}

/// Lower-triangular factor of a correlation matrix. Rejects matrices that
/// are not square, symmetric with unit diagonal, and positive definite.
pub fn cholesky(corr: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = corr.len();
    if d < 2 || corr.iter().any(|r| r.len() != d) {
        return Err(Error::invalid(
            "correlation matrix must be square with d >= 2",
        ));
    }
    for i in 0..d {
        if (corr[i][i] - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("correlation matrix needs a unit diagonal"));
        }
        for j in 0..i {
            if (corr[i][j] - corr[j][i]).abs() > 1e-12 || !corr[i][j].is_finite() {
                return Err(Error::invalid("correlation matrix is not symmetric"));
            }
        }
    }
    let mut l = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let dot: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let pivot = corr[i][i] - dot;
                if pivot <= 1e-12 {
                    return Err(Error::invalid(
                        "correlation matrix is not positive definite",
                    ));
                }
                l[i][i] = pivot.sqrt();
            } else {
                l[i][j] = (corr[i][j] - dot) / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Draws `n` rows from `model`.
pub fn generate(model: &SynthModel, n: usize, seed: u64) -> Result<Table> {
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 rows, got {n}")));
    }
    model.check()?;
    let d = model.dims();
    let mut rng = seeded_rng(seed);
    let factor = match model {
        SynthModel::Gaussian { correlation } => Some(cholesky(correlation)?),
        _ => None,
    };
    let normal = Normal::standard();
    let mut columns = vec![Vec::with_capacity(n); d];
    let mut row = vec![0.0; d];
    for _ in 0..n {
        match model {
            SynthModel::Independent { .. } => {
                for x in row.iter_mut() {
                    *x = rng.random::<f64>();
                }
            }
            SynthModel::Comonotone { .. } => row.fill(rng.random::<f64>()),
            SynthModel::Mixture { theta } => {
                let u: f64 = rng.random();
                let tied = rng.random::<f64>() < *theta;
                let v: f64 = rng.random();
                row[0] = u;
                row[1] = if tied { u } else { v };
            }
            SynthModel::Functional { function, sigma } => {
                let k = function.inputs();
                for x in row[..k].iter_mut() {
                    *x = rng.random_range(-1.0..1.0);
                }
                let noise: f64 = rng.sample(StandardNormal);
                row[k] = function.apply(&row[..k]) + sigma * noise;
            }
            SynthModel::Gaussian { .. } => {
                let l = factor.as_ref().expect("factor computed above");
                let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                for i in 0..d {
                    let s: f64 = (0..=i).map(|k| l[i][k] * z[k]).sum();
                    row[i] = normal.cdf(s);
                }
            }
            SynthModel::SquareLaw => {
                let x = rng.random_range(-1.0..1.0);
                row[0] = x;
                row[1] = x * x;
            }
        }
        for (col, &x) in columns.iter_mut().zip(&row) {
            col.push(x);
        }
    }
    Ok(Table {
        headers: Some(model.headers()),
        columns,
    })
}

/// `θ · M + (1 − θ) · Π` on a two-dimensional `m × m` grid.
pub fn mixture_copula(theta: f64, m: usize) -> Result<CheckerboardCopula> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::invalid(format!("theta {theta} outside [0, 1]")));
    }
    let pi = CheckerboardCopula::independence(&[m, m])?;
    let co = CheckerboardCopula::comonotone(2, m)?;
    let mass = pi
        .mass()
        .iter()
        .zip(co.mass())
        .map(|(p, c)| theta * c + (1.0 - theta) * p)
        .collect();
    CheckerboardCopula::new(vec![m, m], mass)
}

/// Random copula: cell masses from a symmetric Dirichlet with the given
/// concentration, rebalanced to uniform marginals.
pub fn random_copula<R: Rng>(
    rng: &mut R,
    resolutions: &[usize],
    concentration: f64,
) -> Result<CheckerboardCopula> {
    if !(concentration > 0.0 && concentration.is_finite()) {
        return Err(Error::invalid(format!(
            "concentration {concentration} must be positive"
        )));
    }
    let cells: usize = resolutions.iter().product();
    let gamma = Gamma::new(concentration, 1.0).map_err(|e| Error::invalid(e.to_string()))?;
    let mut mass: Vec<f64> = (0..cells)
        .map(|_| gamma.sample(rng).max(f64::MIN_POSITIVE))
        .collect();
    let total: f64 = mass.iter().sum();
    for p in mass.iter_mut() {
        *p /= total;
    }
    rebalance_within(
        CheckerboardCopula::from_mass_unchecked(resolutions.to_vec(), mass)?,
        5000,
    )
}

/// Random copula whose `u` and `v` blocks are independent: the product of
/// two random copulas on `u_res` and `v_res` (axes `u` first).
pub fn random_product_copula<R: Rng>(
    rng: &mut R,
    u_res: &[usize],
    v_res: &[usize],
    concentration: f64,
) -> Result<CheckerboardCopula> {
    let a = random_block(rng, u_res, concentration)?;
    let b = random_block(rng, v_res, concentration)?;
    let mass = a
        .iter()
        .flat_map(|&p| b.iter().map(move |&q| p * q))
        .collect();
    let res = u_res.iter().chain(v_res).copied().collect();
    CheckerboardCopula::new(res, mass)
}

fn random_block<R: Rng>(rng: &mut R, res: &[usize], concentration: f64) -> Result<Vec<f64>> {
    if res.len() == 1 {
        return Ok(vec![1.0 / res[0] as f64; res[0]]);
    }
    Ok(random_copula(rng, res, concentration)?.into_mass())
}

/// `n` points drawn from the checkerboard density: a cell is chosen by mass,
/// then a point uniformly inside it. Returned row by row.
pub fn sample_copula<R: Rng>(copula: &CheckerboardCopula, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut cum = Vec::with_capacity(copula.cell_count());
    let mut acc = 0.0;
    for &p in copula.mass() {
        acc += p;
        cum.push(acc);
    }
    let res = copula.resolutions();
    (0..n)
        .map(|_| {
            let r = rng.random::<f64>() * acc;
            let flat = cum.partition_point(|&c| c <= r).min(cum.len() - 1);
            copula
                .cell_index(flat)
                .iter()
                .zip(res)
                .map(|(&j, &m)| (j as f64 + rng.random::<f64>()) / m as f64)
                .collect()
        })
        .collect()
}
