//! Independent check of the half-plane crack: Gauss-Chebyshev collocation of
//! the singular integral equation for the opening density.
//!
//! With chi(rho) = phi(u)/sqrt(1-u^2), rho = c + h u, the equation
//!   (1/4 pi) int chi(rho) [1/(rho - r) + k(r, rho)] d rho = p(r)
//! is collocated at the interior Chebyshev points v_j = cos(j pi/n) and closed
//! by sum phi = 0 (zero net opening volume).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollocationGrid {
    pub n_nodes: usize,
    /// Chebyshev nodes of the first kind, cos((2k-1) pi/(2n)).
    pub nodes: Vec<f64>,
    /// cos(j pi/n), j = 1..n-1.
    pub collocation_points: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

impl CollocationGrid {
    pub fn new(a: f64, b: f64, n_nodes: usize) -> Result<Self> {
        if n_nodes < 8 {
            return Err(Error::Invalid(format!("collocation needs at least 8 nodes, got {n_nodes}")));
        }
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(Error::Invalid(format!("collocation needs 0 < a < b, got a = {a}, b = {b}")));
        }
        let n = n_nodes as f64;
        let nodes = (1..=n_nodes).map(|k| ((2 * k - 1) as f64 * PI / (2.0 * n)).cos()).collect();
        let collocation_points = (1..n_nodes).map(|j| (j as f64 * PI / n).cos()).collect();
        Ok(CollocationGrid { n_nodes, nodes, collocation_points, a, b })
    }

    fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    fn half(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    pub fn rho(&self, u: f64) -> f64 {
        self.center() + self.half() * u
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SieSolution {
    pub grid: CollocationGrid,
    /// phi at the nodes; the density is phi(u)/sqrt(1 - u^2).
    pub phi: Vec<f64>,
    pub k_minus: f64,
    pub k_plus: f64,
    /// |sum phi|.
    pub side_residual: f64,
    /// Condition estimate of the collocation matrix (ratio of extreme LU pivots).
    pub pivot_ratio: f64,
}

/// Regular part of the half-plane kernel.
fn regular_kernel(r: f64, rho: f64) -> f64 {
    (r * r + 4.0 * r * rho - rho * rho) / (rho + r).powi(3)
}

/// Solve for the density under the normal load p(r); `regular = false` drops the boundary term.
pub fn sie_solve_with(a: f64, b: f64, p: &dyn Fn(f64) -> f64, n_nodes: usize, regular: bool) -> Result<SieSolution> {
    let grid = CollocationGrid::new(a, b, n_nodes)?;
    let n = n_nodes;
    let h = grid.half();
    let w = PI / n as f64;
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (j, &v) in grid.collocation_points.iter().enumerate() {
        let r = grid.rho(v);
        for (k, &u) in grid.nodes.iter().enumerate() {
            let mut kern = 1.0 / (u - v);
            if regular {
                kern += h * regular_kernel(r, grid.rho(u));
            }
            m[(j, k)] = w / (4.0 * PI) * kern;
        }
        rhs[j] = p(r);
    }
    for k in 0..n {
        m[(n - 1, k)] = 1.0;
    }
    let lu = m.lu();
    let piv: Vec<f64> = lu.u().diagonal().iter().map(|x| x.abs()).collect();
    let pmax = piv.iter().cloned().fold(0.0, f64::max);
    let pmin = piv.iter().cloned().fold(f64::INFINITY, f64::min);
    let pivot_ratio = pmax / pmin;
    if !(pivot_ratio < 1e12) {
        return Err(Error::Singular(format!("collocation matrix ill-conditioned (pivot ratio {pivot_ratio:.2e})")));
    }
    let phi = lu.solve(&rhs).ok_or_else(|| Error::Singular("collocation matrix is singular".into()))?;
    // phi(+-1) from the Chebyshev interpolant through the nodes
    let nf = n as f64;
    let mut end_plus = 0.0;
    let mut end_minus = 0.0;
    for i in 0..n {
        let mut c = 0.0;
        for (k, ph) in phi.iter().enumerate() {
            c += ph * (i as f64 * (2 * k + 1) as f64 * PI / (2.0 * nf)).cos();
        }
        c *= 2.0 / nf;
        if i == 0 {
            c *= 0.5;
        }
        end_plus += c;
        end_minus += if i % 2 == 0 { c } else { -c };
    }
    let scale = (PI * h).sqrt() / 4.0;
    let side_residual = phi.iter().sum::<f64>().abs();
    Ok(SieSolution {
        phi: phi.iter().cloned().collect(),
        k_minus: -end_minus * scale,
        k_plus: end_plus * scale,
        side_residual,
        pivot_ratio,
        grid,
    })
}

pub fn sie_solve(a: f64, b: f64, p: &dyn Fn(f64) -> f64, n_nodes: usize) -> Result<SieSolution> {
    sie_solve_with(a, b, p, n_nodes, true)
}
