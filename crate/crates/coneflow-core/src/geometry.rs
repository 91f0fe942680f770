//! Closed-form differential geometry of rotationally symmetric
//! warped-product metrics `g = q(x) dx^2 + phi(x)^2 g_F` with an Einstein
//! cross-section normalized to `Ric_F = (n-1) g_F`.
//!
//! Arclength derivatives are written `f_s = f' / sqrt(q)` and
//! `f_ss = (f'' - f' q'/(2q)) / q`. The scalar Laplacian is the positive
//! one, `Δf = -(f_ss + n (phi_s/phi) f_s)`; the flow equation is
//! parabolic with this sign.

use crate::grid::{d1, d2, RadialGrid};
use crate::{Error, Result};

/// Warped-product metric snapshot: per-node `q` and warp factor `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedMetric {
    pub grid: RadialGrid,
    pub q: Vec<f64>,
    pub phi: Vec<f64>,
}

impl WarpedMetric {
    pub fn exact_cone(grid: &RadialGrid) -> Self {
        WarpedMetric {
            grid: grid.clone(),
            q: vec![1.0; grid.len()],
            phi: grid.nodes.clone(),
        }
    }

    pub fn check_positive(&self) -> Result<()> {
        for i in 0..self.grid.len() {
            if !(self.q[i] > 0.0) || !(self.phi[i] > 0.0) {
                return Err(Error::PositivityLoss(format!(
                    "q or phi nonpositive at node {i} (x = {})",
                    self.grid.nodes[i]
                )));
            }
        }
        Ok(())
    }

    fn same_grid(&self, other: &WarpedMetric) -> Result<()> {
        if self.grid.nodes != other.grid.nodes {
            return Err(Error::GridMismatch(
                "metrics live on different radial grids".into(),
            ));
        }
        Ok(())
    }
}

/// Rotationally symmetric 2-tensor in the g-orthonormal frame:
/// `t_rr` on the unit radial vector, `t_sph` on any unit cross-section
/// vector. Frame-norm squared is `t_rr^2 + n t_sph^2` pointwise.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalTwoTensor {
    pub t_rr: Vec<f64>,
    pub t_sph: Vec<f64>,
}

impl DiagonalTwoTensor {
    pub fn frame_norm(&self, n: u32) -> Vec<f64> {
        self.t_rr
            .iter()
            .zip(&self.t_sph)
            .map(|(a, b)| (a * a + n as f64 * b * b).sqrt())
            .collect()
    }
}

/// Radial vector field by its coordinate component `W^x`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialVectorField {
    pub wx: Vec<f64>,
}

/// Curvature of a warped metric: Ricci in the orthonormal frame, scalar
/// curvature, and the two sectional curvatures (radial plane, tangent
/// plane).
#[derive(Debug, Clone)]
pub struct Curvature {
    pub ric: DiagonalTwoTensor,
    pub scal: Vec<f64>,
    pub k_rad: Vec<f64>,
    pub k_sph: Vec<f64>,
}

/// Arclength first and second derivatives of a per-node field.
pub(crate) fn arclength_derivs(g: &WarpedMetric, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let fp = d1(&g.grid, f);
    let fpp = d2(&g.grid, f);
    let qp = d1(&g.grid, &g.q);
    let n = g.grid.len();
    let mut fs = vec![0.0; n];
    let mut fss = vec![0.0; n];
    for i in 0..n {
        let q = g.q[i];
        fs[i] = fp[i] / q.sqrt();
        fss[i] = (fpp[i] - fp[i] * qp[i] / (2.0 * q)) / q;
    }
    (fs, fss)
}

/// Positive scalar Laplacian `Δf = -(f_ss + n (phi_s/phi) f_s)`.
pub fn scalar_laplacian(g: &WarpedMetric, cs_n: u32, f: &[f64]) -> Vec<f64> {
    let (fs, fss) = arclength_derivs(g, f);
    let (phis, _) = arclength_derivs(g, &g.phi);
    (0..g.grid.len())
        .map(|i| -(fss[i] + cs_n as f64 * (phis[i] / g.phi[i]) * fs[i]))
        .collect()
}

/// Ricci, scalar, and sectional curvatures of `g`:
/// `ric_rr = -n phi_ss/phi`, `ric_sph = -phi_ss/phi + (n-1)(1-phi_s^2)/phi^2`,
/// `scal = -2n phi_ss/phi + n(n-1)(1-phi_s^2)/phi^2`.
pub fn curvature(g: &WarpedMetric, cs_n: u32) -> Result<Curvature> {
    g.check_positive()?;
    let n = cs_n as f64;
    let (phis, phiss) = arclength_derivs(g, &g.phi);
    let len = g.grid.len();
    let mut t_rr = vec![0.0; len];
    let mut t_sph = vec![0.0; len];
    let mut scal = vec![0.0; len];
    let mut k_rad = vec![0.0; len];
    let mut k_sph = vec![0.0; len];
    for i in 0..len {
        let phi = g.phi[i];
        let kr = -phiss[i] / phi;
        let ks = (1.0 - phis[i] * phis[i]) / (phi * phi);
        k_rad[i] = kr;
        k_sph[i] = ks;
        t_rr[i] = n * kr;
        t_sph[i] = kr + (n - 1.0) * ks;
        scal[i] = 2.0 * n * kr + n * (n - 1.0) * ks;
    }
    Ok(Curvature {
        ric: DiagonalTwoTensor { t_rr, t_sph },
        scal,
        k_rad,
        k_sph,
    })
}

/// The three nonzero radial Christoffel families of `g`:
/// `Γ^x_xx = q'/(2q)`, the coefficient `Γ^x_ab / (g_F)_ab = -phi phi'/q`,
/// and `Γ^a_xb / δ^a_b = phi'/phi`.
#[derive(Debug, Clone)]
pub struct RadialChristoffels {
    pub g_xxx: Vec<f64>,
    pub g_x_sph: Vec<f64>,
    pub g_sph_x: Vec<f64>,
}

pub fn christoffels(g: &WarpedMetric) -> RadialChristoffels {
    let qp = d1(&g.grid, &g.q);
    let phip = d1(&g.grid, &g.phi);
    let len = g.grid.len();
    let mut g_xxx = vec![0.0; len];
    let mut g_x_sph = vec![0.0; len];
    let mut g_sph_x = vec![0.0; len];
    for i in 0..len {
        g_xxx[i] = qp[i] / (2.0 * g.q[i]);
        g_x_sph[i] = -g.phi[i] * phip[i] / g.q[i];
        g_sph_x[i] = phip[i] / g.phi[i];
    }
    RadialChristoffels {
        g_xxx,
        g_x_sph,
        g_sph_x,
    }
}

/// De Turck field of `g` relative to the background `h`:
/// `W^x = q'/(2q^2) - q̃'/(2q q̃) - n phi'/(q phi) + n phĩ phĩ'/(q̃ phi^2)`.
pub fn de_turck_field(g: &WarpedMetric, h: &WarpedMetric, cs_n: u32) -> Result<RadialVectorField> {
    g.same_grid(h)?;
    let n = cs_n as f64;
    let qp = d1(&g.grid, &g.q);
    let qtp = d1(&h.grid, &h.q);
    let phip = d1(&g.grid, &g.phi);
    let phitp = d1(&h.grid, &h.phi);
    // grouped as Christoffel differences so that g == h cancels exactly
    let wx = (0..g.grid.len())
        .map(|i| {
            let (q, qt) = (g.q[i], h.q[i]);
            let (phi, phit) = (g.phi[i], h.phi[i]);
            let radial = qp[i] / (2.0 * q) - qtp[i] / (2.0 * qt);
            let tangential = phit * phitp[i] / qt - phi * phip[i] / q;
            radial / q + n * tangential / (phi * phi)
        })
        .collect();
    Ok(RadialVectorField { wx })
}

/// Coordinate components of the Lie derivative of `g` along a radial
/// field: `(L_W g)_xx = wx q' + 2 q wx'` and the `g_F` coefficient
/// `wx (phi^2)'`.
pub struct RadialLie {
    pub xx: Vec<f64>,
    pub sph_coeff: Vec<f64>,
}

pub fn lie_derivative_radial(w: &RadialVectorField, g: &WarpedMetric) -> RadialLie {
    let qp = d1(&g.grid, &g.q);
    let u: Vec<f64> = g.phi.iter().map(|p| p * p).collect();
    let up = d1(&g.grid, &u);
    let wxp = d1(&g.grid, &w.wx);
    let len = g.grid.len();
    let mut xx = vec![0.0; len];
    let mut sph = vec![0.0; len];
    for i in 0..len {
        xx[i] = w.wx[i] * qp[i] + 2.0 * g.q[i] * wxp[i];
        sph[i] = w.wx[i] * up[i];
    }
    RadialLie { xx, sph_coeff: sph }
}

/// Ricci curvature of the conformally rescaled metric `(1+u) g` for a
/// radial factor, via the conformal transformation rule with
/// `1 + u = e^{2 c}` (so `c = ln(1+u)/2`), returned in the frame of `g`:
///
/// `Ric((1+u)g) = Ric(g) - (n-1)(Hess c - dc ⊗ dc) + (Δc - (n-1)|dc|^2) g`.
pub fn conformal_ricci(g: &WarpedMetric, u: &[f64], cs_n: u32) -> Result<DiagonalTwoTensor> {
    if u.iter().any(|v| !(1.0 + v > 0.0)) {
        return Err(Error::PositivityLoss("1 + u must stay positive".into()));
    }
    let n = cs_n as f64;
    let base = curvature(g, cs_n)?;
    let c: Vec<f64> = u.iter().map(|v| 0.5 * (1.0 + v).ln()).collect();
    let (cs_, css) = arclength_derivs(g, &c);
    let (phis, _) = arclength_derivs(g, &g.phi);
    let len = g.grid.len();
    let mut t_rr = vec![0.0; len];
    let mut t_sph = vec![0.0; len];
    for i in 0..len {
        let a = phis[i] / g.phi[i];
        let hess_rr = css[i];
        let hess_sph = a * cs_[i];
        let grad2 = cs_[i] * cs_[i];
        let lap = -(css[i] + n * a * cs_[i]);
        let common = lap - (n - 1.0) * grad2;
        t_rr[i] = base.ric.t_rr[i] - (n - 1.0) * (hess_rr - grad2) + common;
        t_sph[i] = base.ric.t_sph[i] - (n - 1.0) * hess_sph + common;
    }
    Ok(DiagonalTwoTensor { t_rr, t_sph })
}

/// Lichnerowicz Laplacian on the rotationally symmetric diagonal class.
///
/// With `A = phi_s/phi` and `K_r = -phi_ss/phi`,
/// `(Δ_L T)_rr = Δ t_rr + 2n (A^2 + K_r)(t_rr - t_sph)` and
/// `(Δ_L T)_sph = Δ t_sph - 2 (A^2 + K_r)(t_rr - t_sph)`.
/// The frame trace `t_rr + n t_sph` therefore evolves by the plain scalar
/// Laplacian, which is the contracted identity the diagnostics rely on.
pub fn lichnerowicz_diagonal(
    g: &WarpedMetric,
    t: &DiagonalTwoTensor,
    cs_n: u32,
) -> DiagonalTwoTensor {
    let n = cs_n as f64;
    let lap_rr = scalar_laplacian(g, cs_n, &t.t_rr);
    let lap_sph = scalar_laplacian(g, cs_n, &t.t_sph);
    let (phis, phiss) = arclength_derivs(g, &g.phi);
    let len = g.grid.len();
    let mut t_rr = vec![0.0; len];
    let mut t_sph = vec![0.0; len];
    for i in 0..len {
        let a = phis[i] / g.phi[i];
        let kr = -phiss[i] / g.phi[i];
        let coupling = (a * a + kr) * (t.t_rr[i] - t.t_sph[i]);
        t_rr[i] = lap_rr[i] + 2.0 * n * coupling;
        t_sph[i] = lap_sph[i] - 2.0 * coupling;
    }
    DiagonalTwoTensor { t_rr, t_sph }
}

/// Decay-exponent estimate for `g - gbar` on the inner third of the grid.
#[derive(Debug, Clone)]
pub enum DecayEstimate {
    /// `g == gbar` on the fitted window.
    Exact,
    Fit {
        gamma_hat: f64,
        /// Standard error of the fitted slope.
        stderr: f64,
        /// RMS residual of the log-log fit.
        residual: f64,
    },
}

/// Which component of the perturbation the decay fit sees.
///
/// The trace part of a perturbation is only bounded near the tip, not
/// decaying, so fits of the full frame norm degenerate once any trace
/// component is present; `TraceFree` projects it out first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecayComponent {
    #[default]
    Full,
    TraceFree,
}

/// Least-squares slope of `log |g - gbar|_frame` against `log x` over the
/// inner third of the grid (skipping the three tip-adjacent nodes where
/// boundary treatment dominates).
pub fn perturbation_decay(
    g: &WarpedMetric,
    gbar: &WarpedMetric,
    cs_n: u32,
    component: DecayComponent,
) -> Result<DecayEstimate> {
    g.same_grid(gbar)?;
    let n = cs_n as f64;
    let len = g.grid.len();
    let lo = 3.min(len / 6);
    let hi = (len / 3).max(lo + 4).min(len);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in lo..hi {
        let h_rr = g.q[i] / gbar.q[i] - 1.0;
        let h_sph = (g.phi[i] * g.phi[i]) / (gbar.phi[i] * gbar.phi[i]) - 1.0;
        let norm = match component {
            DecayComponent::Full => (h_rr * h_rr + n * h_sph * h_sph).sqrt(),
            DecayComponent::TraceFree => {
                let trace = (h_rr + n * h_sph) / (n + 1.0);
                let (a, b) = (h_rr - trace, h_sph - trace);
                (a * a + n * b * b).sqrt()
            }
        };
        if norm > 0.0 {
            xs.push(g.grid.nodes[i].ln());
            ys.push(norm.ln());
        }
    }
    if xs.len() < 4 {
        return Ok(DecayEstimate::Exact);
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let dof = (m - 2.0).max(1.0);
    let stderr = (ss_res / dof / sxx).sqrt();
    Ok(DecayEstimate::Fit {
        gamma_hat: slope,
        stderr,
        residual: (ss_res / m).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn cone(n_cells: usize) -> WarpedMetric {
        let grid = make_grid(0.01, 1.01, n_cells, 1.0).unwrap();
        WarpedMetric::exact_cone(&grid)
    }

    #[test]
    fn exact_cone_is_flat_to_machine_zero() {
        let g = cone(200);
        let c = curvature(&g, 3).unwrap();
        for i in 0..g.grid.len() {
            assert_eq!(c.ric.t_rr[i], 0.0);
            assert_eq!(c.ric.t_sph[i], 0.0);
            assert_eq!(c.scal[i], 0.0);
        }
    }

    #[test]
    fn scaled_cone_curvature_closed_form() {
        // phi = c x with c != 1: t_rr = 0, t_sph = (n-1)(1-c^2)/(c^2 x^2)
        let grid = make_grid(0.1, 1.1, 100, 1.0).unwrap();
        let c = 1.3;
        let g = WarpedMetric {
            q: vec![1.0; grid.len()],
            phi: grid.nodes.iter().map(|x| c * x).collect(),
            grid,
        };
        let curv = curvature(&g, 3).unwrap();
        for i in 0..g.grid.len() {
            let x = g.grid.nodes[i];
            assert!(curv.ric.t_rr[i].abs() < 1e-8, "t_rr = {}", curv.ric.t_rr[i]);
            let want = 2.0 * (1.0 - c * c) / (c * c * x * x);
            assert!((curv.ric.t_sph[i] - want).abs() < 1e-7 * want.abs());
        }
    }

    #[test]
    fn round_sphere_curvature() {
        // q = 1, phi = sin x over S^3 gives the unit round 4-sphere:
        // scal = n(n+1), ric = n in the frame
        let grid = make_grid(0.4, std::f64::consts::PI - 0.4, 400, 1.0).unwrap();
        let g = WarpedMetric {
            q: vec![1.0; grid.len()],
            phi: grid.nodes.iter().map(|x| x.sin()).collect(),
            grid,
        };
        let c = curvature(&g, 3).unwrap();
        for i in 2..g.grid.len() - 2 {
            assert!((c.ric.t_rr[i] - 3.0).abs() < 2e-4);
            assert!((c.ric.t_sph[i] - 3.0).abs() < 2e-4);
            assert!((c.scal[i] - 12.0).abs() < 1e-3);
        }
    }

    #[test]
    fn christoffels_cone_and_scale_invariance() {
        let g = cone(60);
        let ch = christoffels(&g);
        for i in 0..g.grid.len() {
            let x = g.grid.nodes[i];
            assert_eq!(ch.g_xxx[i], 0.0);
            assert!((ch.g_x_sph[i] + x).abs() < 1e-12);
            assert!((ch.g_sph_x[i] - 1.0 / x).abs() < 1e-12);
        }
        // scaling g -> c^2 g leaves all three families unchanged
        let c2 = 2.7f64;
        let scaled = WarpedMetric {
            grid: g.grid.clone(),
            q: g.q.iter().map(|q| c2 * q).collect(),
            phi: g.phi.iter().map(|p| c2.sqrt() * p).collect(),
        };
        let ch2 = christoffels(&scaled);
        for i in 0..g.grid.len() {
            assert!((ch.g_xxx[i] - ch2.g_xxx[i]).abs() < 1e-12);
            assert!((ch.g_x_sph[i] - ch2.g_x_sph[i]).abs() < 1e-9);
            assert!((ch.g_sph_x[i] - ch2.g_sph_x[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn de_turck_vanishes_for_matching_and_scaled_backgrounds() {
        let g = cone(80);
        let w = de_turck_field(&g, &g, 3).unwrap();
        assert!(w.wx.iter().all(|v| *v == 0.0));

        let c2 = 1.9;
        let scaled = WarpedMetric {
            grid: g.grid.clone(),
            q: g.q.iter().map(|q| c2 * q).collect(),
            phi: g.phi.iter().map(|p| c2.sqrt() * p).collect(),
        };
        let w = de_turck_field(&scaled, &g, 3).unwrap();
        for v in &w.wx {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn de_turck_linear_stretch_closed_form() {
        // g with phi = (1+eps) x against the cone: wx = (n/x)(1/(1+eps)^2 - 1)
        let grid = make_grid(0.1, 1.1, 120, 1.0).unwrap();
        let h = WarpedMetric::exact_cone(&grid);
        let eps = 0.05;
        let g = WarpedMetric {
            grid: grid.clone(),
            q: vec![1.0; grid.len()],
            phi: grid.nodes.iter().map(|x| (1.0 + eps) * x).collect(),
        };
        let w = de_turck_field(&g, &h, 3).unwrap();
        let factor = 1.0 / ((1.0 + eps) * (1.0 + eps)) - 1.0;
        for i in 0..grid.len() {
            let want = 3.0 / grid.nodes[i] * factor;
            assert!((w.wx[i] - want).abs() < 1e-10 * want.abs());
        }
    }

    #[test]
    fn lie_derivative_euler_field() {
        // wx = x on the exact cone generates a homothety: L_W g = 2 g
        let g = cone(80);
        let w = RadialVectorField {
            wx: g.grid.nodes.clone(),
        };
        let lie = lie_derivative_radial(&w, &g);
        for i in 0..g.grid.len() {
            let x = g.grid.nodes[i];
            assert!((lie.xx[i] - 2.0).abs() < 1e-12);
            assert!((lie.sph_coeff[i] - 2.0 * x * x).abs() < 1e-9);
        }
        let zero = RadialVectorField {
            wx: vec![0.0; g.grid.len()],
        };
        let lie = lie_derivative_radial(&zero, &g);
        assert!(lie.xx.iter().all(|v| *v == 0.0));
        assert!(lie.sph_coeff.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn conformal_ricci_trivial_cases() {
        let grid = make_grid(0.3, 1.3, 90, 1.0).unwrap();
        let g = WarpedMetric {
            q: vec![1.0; grid.len()],
            phi: grid.nodes.iter().map(|x| x.sin()).collect(),
            grid,
        };
        let base = curvature(&g, 3).unwrap();
        let zero = vec![0.0; g.grid.len()];
        let r0 = conformal_ricci(&g, &zero, 3).unwrap();
        for i in 0..g.grid.len() {
            assert_eq!(r0.t_rr[i], base.ric.t_rr[i]);
            assert_eq!(r0.t_sph[i], base.ric.t_sph[i]);
        }
        // constant u: Ricci unchanged as a tensor
        let cst = vec![0.4; g.grid.len()];
        let rc = conformal_ricci(&g, &cst, 3).unwrap();
        for i in 1..g.grid.len() - 1 {
            assert!((rc.t_rr[i] - base.ric.t_rr[i]).abs() < 1e-9);
            assert!((rc.t_sph[i] - base.ric.t_sph[i]).abs() < 1e-9);
        }
        assert!(conformal_ricci(&g, &vec![-2.0; g.grid.len()], 3).is_err());
    }

    #[test]
    fn conformal_ricci_matches_rescaled_metric() {
        // generic radial u: compare against curvature() of the warped
        // metric with q -> (1+u) q, phi -> sqrt(1+u) phi (frame factors
        // differ by 1+u)
        let grid = make_grid(0.3, 1.3, 240, 1.0).unwrap();
        let g = WarpedMetric {
            q: grid.nodes.iter().map(|x| 1.0 + 0.1 * (2.0 * x).sin()).collect(),
            phi: grid.nodes.iter().map(|x| x * (1.0 + 0.05 * x * x)).collect(),
            grid,
        };
        let u: Vec<f64> = g.grid.nodes.iter().map(|x| 0.2 * (1.5 * x).cos()).collect();
        let direct = conformal_ricci(&g, &u, 3).unwrap();
        let rescaled = WarpedMetric {
            grid: g.grid.clone(),
            q: g.q.iter().zip(&u).map(|(q, v)| (1.0 + v) * q).collect(),
            phi: g.phi.iter().zip(&u).map(|(p, v)| (1.0 + v).sqrt() * p).collect(),
        };
        let via = curvature(&rescaled, 3).unwrap();
        for i in 3..g.grid.len() - 3 {
            let want_rr = via.ric.t_rr[i] * (1.0 + u[i]);
            let want_sph = via.ric.t_sph[i] * (1.0 + u[i]);
            assert!((direct.t_rr[i] - want_rr).abs() < 2e-3, "node {i}");
            assert!((direct.t_sph[i] - want_sph).abs() < 2e-3, "node {i}");
        }
    }

    #[test]
    fn lichnerowicz_kills_the_metric() {
        let grid = make_grid(0.3, 1.3, 100, 1.0).unwrap();
        let g = WarpedMetric {
            q: grid.nodes.iter().map(|x| 1.0 + 0.2 * x).collect(),
            phi: grid.nodes.iter().map(|x| x * (1.0 + 0.1 * x)).collect(),
            grid,
        };
        let t = DiagonalTwoTensor {
            t_rr: vec![1.0; g.grid.len()],
            t_sph: vec![1.0; g.grid.len()],
        };
        let dl = lichnerowicz_diagonal(&g, &t, 3);
        for i in 0..g.grid.len() {
            assert_eq!(dl.t_rr[i], 0.0);
            assert_eq!(dl.t_sph[i], 0.0);
        }
    }

    #[test]
    fn lichnerowicz_on_pure_trace_is_scalar_laplacian() {
        let grid = make_grid(0.3, 1.3, 100, 1.0).unwrap();
        let g = WarpedMetric {
            q: grid.nodes.iter().map(|x| 1.0 + 0.15 * (3.0 * x).sin()).collect(),
            phi: grid.nodes.iter().map(|x| x * (1.0 + 0.07 * x)).collect(),
            grid,
        };
        let f: Vec<f64> = g.grid.nodes.iter().map(|x| (2.0 * x).cos()).collect();
        let t = DiagonalTwoTensor {
            t_rr: f.clone(),
            t_sph: f.clone(),
        };
        let dl = lichnerowicz_diagonal(&g, &t, 3);
        let lap = scalar_laplacian(&g, 3, &f);
        for i in 0..g.grid.len() {
            assert_eq!(dl.t_rr[i], lap[i]);
            assert_eq!(dl.t_sph[i], lap[i]);
        }
    }

    #[test]
    fn lichnerowicz_round_sphere_ricci_is_harmonic() {
        let grid = make_grid(0.4, std::f64::consts::PI - 0.4, 300, 1.0).unwrap();
        let g = WarpedMetric {
            q: vec![1.0; grid.len()],
            phi: grid.nodes.iter().map(|x| x.sin()).collect(),
            grid,
        };
        let ric = curvature(&g, 3).unwrap().ric;
        let dl = lichnerowicz_diagonal(&g, &ric, 3);
        for i in 3..g.grid.len() - 3 {
            assert!(dl.t_rr[i].abs() < 2e-2, "node {i}: {}", dl.t_rr[i]);
            assert!(dl.t_sph[i].abs() < 2e-2, "node {i}: {}", dl.t_sph[i]);
        }
    }

    #[test]
    fn contracted_lichnerowicz_identity_discrete() {
        // frame trace of Δ_L T equals the scalar Laplacian of the frame
        // trace, exactly, by linearity of the stencils
        let grid = make_grid(0.2, 1.2, 150, 1.0).unwrap();
        let g = WarpedMetric {
            q: grid.nodes.iter().map(|x| 1.1 + 0.2 * (x * 2.2).sin()).collect(),
            phi: grid.nodes.iter().map(|x| x * (1.0 + 0.1 * (x * 1.7).cos())).collect(),
            grid,
        };
        let t = DiagonalTwoTensor {
            t_rr: g.grid.nodes.iter().map(|x| (3.0 * x).sin()).collect(),
            t_sph: g.grid.nodes.iter().map(|x| (2.0 * x).cos()).collect(),
        };
        let dl = lichnerowicz_diagonal(&g, &t, 3);
        let trace: Vec<f64> = t
            .t_rr
            .iter()
            .zip(&t.t_sph)
            .map(|(a, b)| a + 3.0 * b)
            .collect();
        let lap_trace = scalar_laplacian(&g, 3, &trace);
        for i in 0..g.grid.len() {
            let got = dl.t_rr[i] + 3.0 * dl.t_sph[i];
            assert!((got - lap_trace[i]).abs() < 1e-9 * (1.0 + lap_trace[i].abs()));
        }
    }

    #[test]
    fn decay_estimate_synthetic_injections() {
        let grid = make_grid(0.01, 1.01, 400, 1.0).unwrap();
        let gbar = WarpedMetric::exact_cone(&grid);
        // frame-norm exactly x^1.5 in the sphere component
        let g = WarpedMetric {
            grid: grid.clone(),
            q: vec![1.0; grid.len()],
            phi: grid
                .nodes
                .iter()
                .map(|x| x * (1.0 + x.powf(1.5)).sqrt())
                .collect(),
        };
        match perturbation_decay(&g, &gbar, 3, DecayComponent::Full).unwrap() {
            DecayEstimate::Fit { gamma_hat, .. } => {
                assert!((gamma_hat - 1.5).abs() < 0.05, "gamma_hat = {gamma_hat}")
            }
            DecayEstimate::Exact => panic!("expected a fit"),
        }
        // oscillatory modulation on x^0.5
        let g2 = WarpedMetric {
            grid: grid.clone(),
            q: vec![1.0; grid.len()],
            phi: grid
                .nodes
                .iter()
                .map(|x| {
                    let h = x.powf(0.5) * (1.0 + 0.01 * (x.ln()).sin());
                    x * (1.0 + h).sqrt()
                })
                .collect(),
        };
        match perturbation_decay(&g2, &gbar, 3, DecayComponent::Full).unwrap() {
            DecayEstimate::Fit { gamma_hat, .. } => {
                assert!((gamma_hat - 0.5).abs() < 0.05, "gamma_hat = {gamma_hat}")
            }
            DecayEstimate::Exact => panic!("expected a fit"),
        }
        // identical metrics: exact flag
        match perturbation_decay(&gbar, &gbar, 3, DecayComponent::Full).unwrap() {
            DecayEstimate::Exact => {}
            DecayEstimate::Fit { .. } => panic!("expected exact flag"),
        }
    }
}
