//! Gauss–Legendre quadrature on finite intervals.

use crate::error::{Error, Result};
use crate::reduce::pairwise_sum;

pub const DEFAULT_ORDER: usize = 16;

/// Nodes and weights of an n-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

impl GaussLegendre {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 || order > 256 {
            return Err(Error::invalid(format!(
                "quadrature order {order} outside 1..=256"
            )));
        }
        if order == 1 {
            return Ok(Self {
                nodes: vec![0.0],
                weights: vec![2.0],
            });
        }
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            // Tricomi initial guess, then Newton.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(order, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(order, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .collect();
        half * pairwise_sum(&terms)
    }

    /// `∫_a^b f` with the interval split at `kink` when it lies inside.
    pub fn integrate_split<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, kink: f64) -> f64 {
        if kink > a && kink < b {
            self.integrate(&f, a, kink) + self.integrate(&f, kink, b)
        } else {
            self.integrate(f, a, b)
        }
    }

    /// Adaptive bisection: accepts a panel once the one-panel and two-panel
    /// estimates agree within `tol` (relative to the running magnitude) or
    /// `max_depth` is reached.
    pub fn integrate_adaptive<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        tol: f64,
        max_depth: usize,
    ) -> f64 {
        let whole = self.integrate(f, a, b);
        self.adapt(f, a, b, whole, tol, max_depth)
    }

    fn adapt<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let mid = 0.5 * (a + b);
        let left = self.integrate(f, a, mid);
        let right = self.integrate(f, mid, b);
        let refined = left + right;
        if depth == 0 || (refined - whole).abs() <= tol * refined.abs().max(1e-300) {
            return refined;
        }
        self.adapt(f, a, mid, left, tol, depth - 1) + self.adapt(f, mid, b, right, tol, depth - 1)
    }
}
