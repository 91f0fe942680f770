//! Radial grids and finite-difference stencils.
//!
//! All derivatives are three-point Lagrange differences written in
//! divided-difference form, so that first derivatives of linear data and
//! second derivatives of linear data come out exactly (bitwise) right.
//! That exactness is what makes the exact cone a true fixed point of the
//! discrete flow. At the two boundary nodes the stencils are one-sided:
//! second-order for first derivatives, first-order for second
//! derivatives (the wider one-sided second-derivative stencil is not
//! used; it destabilizes explicit stepping near the tip).

use crate::{Error, Result};

/// Strictly increasing radial nodes with the tip excised (`x_min > 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub grading_p: f64,
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Smallest cell width.
    pub fn min_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Graded grid `x_i = x_min + (x_max - x_min) (i/N)^p` with `N + 1` nodes.
pub fn make_grid(x_min: f64, x_max: f64, n_cells: usize, grading_p: f64) -> Result<RadialGrid> {
    if !(x_min > 0.0) {
        return Err(Error::InvalidParameter(format!("x_min must be > 0, got {x_min}")));
    }
    if !(x_max > x_min) {
        return Err(Error::InvalidParameter(format!(
            "x_max must exceed x_min, got [{x_min}, {x_max}]"
        )));
    }
    if n_cells < 2 {
        return Err(Error::InvalidParameter(format!("N must be >= 2, got {n_cells}")));
    }
    if !(grading_p >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "grading exponent must be >= 1, got {grading_p}"
        )));
    }
    let span = x_max - x_min;
    let nodes: Vec<f64> = (0..=n_cells)
        .map(|i| x_min + span * (i as f64 / n_cells as f64).powf(grading_p))
        .collect();
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("grid not strictly increasing".into()));
    }
    Ok(RadialGrid { nodes, grading_p })
}

/// First derivative at every node (centered interior, one-sided ends).
pub fn d1(grid: &RadialGrid, f: &[f64]) -> Vec<f64> {
    let x = &grid.nodes;
    let n = x.len();
    debug_assert_eq!(f.len(), n);
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let hl = x[i] - x[i - 1];
        let hr = x[i + 1] - x[i];
        let sl = (f[i] - f[i - 1]) / hl;
        let sr = (f[i + 1] - f[i]) / hr;
        out[i] = (sl * hr + sr * hl) / (hl + hr);
    }
    out[0] = onesided_d1(x[0], x[1], x[2], f[0], f[1], f[2]);
    out[n - 1] = onesided_d1(x[n - 1], x[n - 2], x[n - 3], f[n - 1], f[n - 2], f[n - 3]);
    out
}

/// Second derivative at every node.
pub fn d2(grid: &RadialGrid, f: &[f64]) -> Vec<f64> {
    let x = &grid.nodes;
    let n = x.len();
    debug_assert_eq!(f.len(), n);
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let hl = x[i] - x[i - 1];
        let hr = x[i + 1] - x[i];
        let sl = (f[i] - f[i - 1]) / hl;
        let sr = (f[i + 1] - f[i]) / hr;
        out[i] = 2.0 * (sr - sl) / (hl + hr);
    }
    out[0] = onesided_d2(x[0], x[1], x[2], f[0], f[1], f[2]);
    out[n - 1] = onesided_d2(x[n - 1], x[n - 2], x[n - 3], f[n - 1], f[n - 2], f[n - 3]);
    out
}

// Derivative of the interpolating parabola through (x0,f0),(x1,f1),(x2,f2)
// at x0, in Newton form: f[01] + f[012] (x0 - x1).
fn onesided_d1(x0: f64, x1: f64, x2: f64, f0: f64, f1: f64, f2: f64) -> f64 {
    let s01 = (f1 - f0) / (x1 - x0);
    let s12 = (f2 - f1) / (x2 - x1);
    let dd = (s12 - s01) / (x2 - x0);
    s01 + dd * (x0 - x1)
}

// Second derivative of the same parabola: 2 f[012].
fn onesided_d2(x0: f64, x1: f64, x2: f64, f0: f64, f1: f64, f2: f64) -> f64 {
    let s01 = (f1 - f0) / (x1 - x0);
    let s12 = (f2 - f1) / (x2 - x1);
    2.0 * (s12 - s01) / (x2 - x0)
}
