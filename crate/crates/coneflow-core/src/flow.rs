//! Time integration of the Ricci de Turck flow on the symmetric-diagonal
//! class.
//!
//! The evolved variables are `(q, phi^2)`; the right side at each node is
//! `∂_t q = -2 q t_rr + (L_W g)_xx` and `∂_t phi^2 = -2 phi^2 t_sph +
//! wx (phi^2)'`, with `W` the de Turck field of the current metric
//! against the configured background. Stepping is classical explicit RK4
//! with the parabolic step bound `dt = cfl * min(Δx^2 q) / 2`.
//!
//! Boundary conditions act by overriding the right side at the two end
//! nodes (not by re-pinning after the step), which keeps the full RK4
//! order; pinned data is therefore constant (or, for the closed-form
//! shrinking-sphere reference, follows its exact linear-in-time law).

use crate::cross_section::CrossSection;
use crate::geometry::{curvature, de_turck_field, DiagonalTwoTensor, WarpedMetric};
use crate::grid::{d1, make_grid, RadialGrid};
use crate::{Error, Result};

/// Initial metric profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile {
    ExactCone,
    /// `q = 1, phi = sin x`; the domain must sit inside `(0, pi)`.
    ShrinkingSphere,
    /// Trace-free diagonal perturbation of the cone with
    /// `s = amplitude * x^exponent`: `q = 1 - n s`, `phi^2 = x^2 (1 + s)`.
    PerturbedCone { amplitude: f64, exponent: f64 },
    /// `q = 1, phi = x (1 - amplitude x^2)`, which has strictly positive
    /// scalar curvature for small amplitude.
    PositiveScalar { amplitude: f64 },
    /// Explicit profile data on the configured grid.
    FromData { q: Vec<f64>, phi: Vec<f64> },
}

/// Background metric choice for the de Turck field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackgroundSpec {
    #[default]
    InitialMetric,
    ExactCone,
}

/// Boundary treatment at one end of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// Evolve the end node with its one-sided right side.
    Free,
    /// Hold the initial values (right side zeroed).
    PinInitial,
    /// Snap the end node to the exact cone at start, then hold it.
    PinExactCone,
    /// Follow the closed-form solution of the configured profile; only
    /// the shrinking sphere (and trivially the cone) has one.
    PinExactSolution,
}

/// Full flow configuration.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub cross_section: CrossSection,
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub grading_p: f64,
    pub profile: InitialProfile,
    pub background: BackgroundSpec,
    pub bc_inner: BoundaryCondition,
    pub bc_outer: BoundaryCondition,
    pub t_end: f64,
    pub cfl: f64,
    /// Checkpoint cadence in steps; 0 disables mid-run checkpoints.
    pub checkpoint_every: usize,
    /// Target number of stored state levels (for diagnostics).
    pub store_levels: usize,
    /// Weight exponent for the Ricci monitor column of the series.
    pub gamma_prime: f64,
}

impl FlowConfig {
    pub fn new(cross_section: CrossSection) -> Self {
        FlowConfig {
            cross_section,
            x_min: 0.01,
            x_max: 1.01,
            n_cells: 200,
            grading_p: 1.0,
            profile: InitialProfile::ExactCone,
            background: BackgroundSpec::InitialMetric,
            bc_inner: BoundaryCondition::PinExactCone,
            bc_outer: BoundaryCondition::PinInitial,
            t_end: 0.01,
            cfl: 0.5,
            checkpoint_every: 0,
            store_levels: 32,
            gamma_prime: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min > 0.0) {
            return Err(Error::InvalidParameter("x_min must be > 0".into()));
        }
        if self.n_cells < 16 {
            return Err(Error::InvalidParameter("N must be >= 16".into()));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidParameter("cfl must lie in (0, 1]".into()));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidParameter("t_end must be > 0".into()));
        }
        if matches!(self.profile, InitialProfile::ShrinkingSphere)
            && !(self.x_max < std::f64::consts::PI)
        {
            return Err(Error::InvalidParameter(
                "shrinking-sphere profile needs x_max < pi".into(),
            ));
        }
        let exact_ok = matches!(
            self.profile,
            InitialProfile::ShrinkingSphere | InitialProfile::ExactCone
        );
        if (self.bc_inner == BoundaryCondition::PinExactSolution
            || self.bc_outer == BoundaryCondition::PinExactSolution)
            && !exact_ok
        {
            return Err(Error::InvalidParameter(
                "exact-solution boundary data exists only for the cone and shrinking-sphere profiles"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Time-stamped metric state.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub step_index: u64,
    pub metric: WarpedMetric,
}

/// Per-store-point diagnostics row, mirrored into the series CSV.
#[derive(Debug, Clone)]
pub struct SeriesRow {
    pub t: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub sup_w_ric: f64,
    pub gamma_hat: f64,
    pub wmax: f64,
    pub dt: f64,
}

/// Stored trajectory: state levels at a uniform step cadence plus the
/// diagnostics series.
#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub cs_n: u32,
    pub background: WarpedMetric,
    pub states: Vec<FlowState>,
    pub series: Vec<SeriesRow>,
    /// Step cadence between consecutive stored states.
    pub store_every: u64,
    pub completed: bool,
}

/// Builds the grid of a config.
pub fn config_grid(config: &FlowConfig) -> Result<RadialGrid> {
    make_grid(config.x_min, config.x_max, config.n_cells, config.grading_p)
}

/// Materializes the initial metric of a config.
pub fn initial_metric(config: &FlowConfig, grid: &RadialGrid) -> Result<WarpedMetric> {
    let n = config.cross_section.n as f64;
    let m = match &config.profile {
        InitialProfile::ExactCone => WarpedMetric::exact_cone(grid),
        InitialProfile::ShrinkingSphere => WarpedMetric {
            grid: grid.clone(),
            q: vec![1.0; grid.len()],
            phi: grid.nodes.iter().map(|x| x.sin()).collect(),
        },
        InitialProfile::PerturbedCone {
            amplitude,
            exponent,
        } => {
            let s: Vec<f64> = grid.nodes.iter().map(|x| amplitude * x.powf(*exponent)).collect();
            WarpedMetric {
                grid: grid.clone(),
                q: s.iter().map(|s| 1.0 - n * s).collect(),
                phi: grid
                    .nodes
                    .iter()
                    .zip(&s)
                    .map(|(x, s)| x * (1.0 + s).sqrt())
                    .collect(),
            }
        }
        InitialProfile::PositiveScalar { amplitude } => WarpedMetric {
            grid: grid.clone(),
            q: vec![1.0; grid.len()],
            phi: grid.nodes.iter().map(|x| x * (1.0 - amplitude * x * x)).collect(),
        },
        InitialProfile::FromData { q, phi } => {
            if q.len() != grid.len() || phi.len() != grid.len() {
                return Err(Error::InvalidParameter(
                    "profile data length does not match the grid".into(),
                ));
            }
            WarpedMetric {
                grid: grid.clone(),
                q: q.clone(),
                phi: phi.clone(),
            }
        }
    };
    let mut m = m;
    // pinned-to-cone ends take their cone values from the start
    if config.bc_inner == BoundaryCondition::PinExactCone {
        m.q[0] = 1.0;
        m.phi[0] = grid.nodes[0];
    }
    if config.bc_outer == BoundaryCondition::PinExactCone {
        let last = grid.len() - 1;
        m.q[last] = 1.0;
        m.phi[last] = grid.nodes[last];
    }
    m.check_positive()?;
    Ok(m)
}

/// Materializes the background metric of a config.
pub fn background_metric(config: &FlowConfig, initial: &WarpedMetric) -> WarpedMetric {
    match config.background {
        BackgroundSpec::InitialMetric => initial.clone(),
        BackgroundSpec::ExactCone => WarpedMetric::exact_cone(&initial.grid),
    }
}

/// Right side of the flow in the evolved variables `(q, phi^2)`, before
/// boundary overrides.
pub fn rtf_rhs(
    state: &WarpedMetric,
    background: &WarpedMetric,
    cs_n: u32,
) -> Result<(Vec<f64>, Vec<f64>, DiagonalTwoTensor, Vec<f64>)> {
    let curv = curvature(state, cs_n)?;
    let w = de_turck_field(state, background, cs_n)?;
    let qp = d1(&state.grid, &state.q);
    let u: Vec<f64> = state.phi.iter().map(|p| p * p).collect();
    let up = d1(&state.grid, &u);
    let wxp = d1(&state.grid, &w.wx);
    let len = state.grid.len();
    let mut dq = vec![0.0; len];
    let mut du = vec![0.0; len];
    for i in 0..len {
        dq[i] = -2.0 * state.q[i] * curv.ric.t_rr[i] + w.wx[i] * qp[i] + 2.0 * state.q[i] * wxp[i];
        du[i] = -2.0 * u[i] * curv.ric.t_sph[i] + w.wx[i] * up[i];
    }
    Ok((dq, du, curv.ric, w.wx))
}

/// Right-side overrides at the two end nodes: `None` evolves the node
/// freely, `Some((dq, du))` prescribes its time derivative.
pub struct BoundaryOverride {
    inner: Option<(f64, f64)>,
    outer: Option<(f64, f64)>,
}

/// Resolves the configured boundary conditions against the initial data.
pub fn boundary_override(config: &FlowConfig, initial: &WarpedMetric) -> BoundaryOverride {
    let n = config.cross_section.n as f64;
    let last = initial.grid.len() - 1;
    let one = |bc: BoundaryCondition, idx: usize| -> Option<(f64, f64)> {
        match bc {
            BoundaryCondition::Free => None,
            BoundaryCondition::PinInitial | BoundaryCondition::PinExactCone => Some((0.0, 0.0)),
            BoundaryCondition::PinExactSolution => match config.profile {
                InitialProfile::ExactCone => Some((0.0, 0.0)),
                // d/dt [(1 - 2nt) g0] = -2n g0 at the boundary node
                InitialProfile::ShrinkingSphere => {
                    let u0 = initial.phi[idx] * initial.phi[idx];
                    Some((-2.0 * n * initial.q[idx], -2.0 * n * u0))
                }
                _ => Some((0.0, 0.0)),
            },
        }
    };
    BoundaryOverride {
        inner: one(config.bc_inner, 0),
        outer: one(config.bc_outer, last),
    }
}

fn apply_override(dq: &mut [f64], du: &mut [f64], ovr: &BoundaryOverride) {
    if let Some((a, b)) = ovr.inner {
        dq[0] = a;
        du[0] = b;
    }
    if let Some((a, b)) = ovr.outer {
        let last = dq.len() - 1;
        dq[last] = a;
        du[last] = b;
    }
}

/// Parabolic step bound `cfl * min_i(Δx_i^2 q_i) / 2` (with the cell-wise
/// minimum of the adjacent `q` values).
pub fn choose_dt(state: &WarpedMetric, cfl: f64) -> f64 {
    let x = &state.grid.nodes;
    let mut m = f64::INFINITY;
    for i in 0..x.len() - 1 {
        let dx = x[i + 1] - x[i];
        let q = state.q[i].min(state.q[i + 1]);
        m = m.min(dx * dx * q);
    }
    cfl * m / 2.0
}

fn finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// One classical RK4 step in the `(q, phi^2)` variables with boundary
/// right-side overrides.
pub fn step_rk4(
    state: &FlowState,
    background: &WarpedMetric,
    config: &FlowConfig,
    ovr: &BoundaryOverride,
    dt: f64,
) -> Result<FlowState> {
    let cs_n = config.cross_section.n;
    let grid = &state.metric.grid;
    let len = grid.len();
    let q0 = &state.metric.q;
    let u0: Vec<f64> = state.metric.phi.iter().map(|p| p * p).collect();

    let eval = |q: &[f64], u: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        if !finite(q) || !finite(u) {
            return Err(Error::NumericalFailure {
                t: state.t,
                message: "non-finite stage state".into(),
            });
        }
        let m = WarpedMetric {
            grid: grid.clone(),
            q: q.to_vec(),
            phi: u.iter().map(|v| v.sqrt()).collect(),
        };
        m.check_positive().map_err(|e| Error::NumericalFailure {
            t: state.t,
            message: e.to_string(),
        })?;
        let (mut dq, mut du, _, _) = rtf_rhs(&m, background, cs_n)?;
        apply_override(&mut dq, &mut du, ovr);
        Ok((dq, du))
    };

    let advance = |q: &[f64], u: &[f64], dq: &[f64], du: &[f64], c: f64| {
        let qn: Vec<f64> = (0..len).map(|i| q[i] + c * dt * dq[i]).collect();
        let un: Vec<f64> = (0..len).map(|i| u[i] + c * dt * du[i]).collect();
        (qn, un)
    };

    let (k1q, k1u) = eval(q0, &u0)?;
    let (q1, u1) = advance(q0, &u0, &k1q, &k1u, 0.5);
    let (k2q, k2u) = eval(&q1, &u1)?;
    let (q2, u2) = advance(q0, &u0, &k2q, &k2u, 0.5);
    let (k3q, k3u) = eval(&q2, &u2)?;
    let (q3, u3) = advance(q0, &u0, &k3q, &k3u, 1.0);
    let (k4q, k4u) = eval(&q3, &u3)?;

    let mut q = vec![0.0; len];
    let mut phi = vec![0.0; len];
    for i in 0..len {
        q[i] = q0[i] + dt / 6.0 * (k1q[i] + 2.0 * k2q[i] + 2.0 * k3q[i] + k4q[i]);
        let u = u0[i] + dt / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
        phi[i] = u.sqrt();
    }
    let metric = WarpedMetric {
        grid: grid.clone(),
        q,
        phi,
    };
    metric.check_positive().map_err(|e| Error::NumericalFailure {
        t: state.t + dt,
        message: e.to_string(),
    })?;
    Ok(FlowState {
        t: state.t + dt,
        step_index: state.step_index + 1,
        metric,
    })
}

fn series_row(
    state: &WarpedMetric,
    background: &WarpedMetric,
    config: &FlowConfig,
    t: f64,
    dt: f64,
) -> Result<SeriesRow> {
    let n = config.cross_section.n;
    let curv = curvature(state, n)?;
    let w = de_turck_field(state, background, n)?;
    let len = state.grid.len();
    let inner = 2..len.saturating_sub(2).max(3);
    let mut r_min = f64::INFINITY;
    let mut r_max = f64::NEG_INFINITY;
    let mut sup_w = 0.0f64;
    let norm = curv.ric.frame_norm(n);
    for i in inner.clone() {
        r_min = r_min.min(curv.scal[i]);
        r_max = r_max.max(curv.scal[i]);
        let weight = state.grid.nodes[i].powf(2.0 - config.gamma_prime);
        sup_w = sup_w.max(weight * norm[i]);
    }
    let wmax = w.wx.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let gbar = WarpedMetric::exact_cone(&state.grid);
    let gamma_hat = match crate::geometry::perturbation_decay(
        state,
        &gbar,
        n,
        crate::geometry::DecayComponent::TraceFree,
    )? {
        crate::geometry::DecayEstimate::Exact => f64::NAN,
        crate::geometry::DecayEstimate::Fit { gamma_hat, .. } => gamma_hat,
    };
    Ok(SeriesRow {
        t,
        r_min,
        r_max,
        sup_w_ric: sup_w,
        gamma_hat,
        wmax,
        dt,
    })
}

/// Runs the flow to `t_end`, storing states on a uniform step cadence.
///
/// `on_checkpoint` fires every `checkpoint_every` steps (when nonzero)
/// and once at the end. Deterministic for a fixed config: the step-size
/// rule depends only on the current state.
pub fn run_flow(
    config: &FlowConfig,
    mut on_checkpoint: impl FnMut(&FlowState),
) -> Result<FlowTrajectory> {
    config.validate()?;
    let grid = config_grid(config)?;
    let initial = initial_metric(config, &grid)?;
    let state = FlowState {
        t: 0.0,
        step_index: 0,
        metric: initial,
    };
    resume_flow(config, state, &mut on_checkpoint)
}

/// Continues a flow from an arbitrary state (checkpoint restart).
pub fn resume_flow(
    config: &FlowConfig,
    start: FlowState,
    on_checkpoint: &mut impl FnMut(&FlowState),
) -> Result<FlowTrajectory> {
    config.validate()?;
    let grid = config_grid(config)?;
    if start.metric.grid.nodes != grid.nodes {
        return Err(Error::GridMismatch(
            "checkpoint grid does not match the config grid".into(),
        ));
    }
    let initial_for_bc = initial_metric(config, &grid)?;
    let background = background_metric(config, &initial_for_bc);
    let ovr = boundary_override(config, &initial_for_bc);
    let n = config.cross_section.n;

    // uniform store cadence from the config's own initial step-size
    // estimate, so a resumed run stores at the same global steps as the
    // uninterrupted one
    let dt0 = choose_dt(&initial_for_bc, config.cfl);
    let est_steps = (config.t_end / dt0).ceil().max(1.0) as u64;
    let store_every = (est_steps / config.store_levels.max(2) as u64).max(1);

    let mut states = Vec::new();
    let mut series = Vec::new();
    let mut state = start;
    if state.step_index % store_every == 0 {
        let dt = choose_dt(&state.metric, config.cfl);
        series.push(series_row(&state.metric, &background, config, state.t, dt)?);
        states.push(state.clone());
    }

    while state.t < config.t_end * (1.0 - 1e-14) {
        let dt_cfl = choose_dt(&state.metric, config.cfl);
        let dt = dt_cfl.min(config.t_end - state.t);
        if !(dt > 0.0) {
            return Err(Error::NumericalFailure {
                t: state.t,
                message: format!("step size collapsed to {dt}"),
            });
        }
        state = step_rk4(&state, &background, config, &ovr, dt)?;
        if state.step_index % store_every == 0 {
            // the dt column is the state's own stable-step estimate, so
            // that a resumed run reproduces the row bitwise
            let dt_now = choose_dt(&state.metric, config.cfl);
            series.push(series_row(&state.metric, &background, config, state.t, dt_now)?);
            states.push(state.clone());
        }
        if config.checkpoint_every > 0 && state.step_index % config.checkpoint_every as u64 == 0 {
            on_checkpoint(&state);
        }
    }
    if states.last().map(|s| s.step_index) != Some(state.step_index) {
        let dt = choose_dt(&state.metric, config.cfl);
        series.push(series_row(&state.metric, &background, config, state.t, dt)?);
        states.push(state.clone());
    }
    on_checkpoint(&state);
    Ok(FlowTrajectory {
        cs_n: n,
        background,
        states,
        series,
        store_every,
        completed: true,
    })
}

/// Serializes a metric snapshot as `x,q,phi` CSV with round-trip floats.
pub fn snapshot_to_csv(m: &WarpedMetric) -> String {
    let mut out = String::from("x,q,phi\n");
    for i in 0..m.grid.len() {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            m.grid.nodes[i], m.q[i], m.phi[i]
        ));
    }
    out
}

/// Serializes a diagonal 2-tensor as `x,t_rr,t_sph` CSV.
pub fn tensor_snapshot_to_csv(grid: &RadialGrid, t: &DiagonalTwoTensor) -> String {
    let mut out = String::from("x,t_rr,t_sph\n");
    for i in 0..grid.len() {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            grid.nodes[i], t.t_rr[i], t.t_sph[i]
        ));
    }
    out
}

/// Parses an `x,t_rr,t_sph` CSV tensor snapshot.
pub fn tensor_snapshot_from_csv(text: &str) -> Result<(Vec<f64>, DiagonalTwoTensor)> {
    let mut nodes = Vec::new();
    let mut t_rr = Vec::new();
    let mut t_sph = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line.trim() != "x,t_rr,t_sph" {
                return Err(Error::Parse(format!("bad tensor snapshot header `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut next = |what: &str| -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing {what}", i + 1)))?
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: bad float for {what}", i + 1)))
        };
        nodes.push(next("x")?);
        t_rr.push(next("t_rr")?);
        t_sph.push(next("t_sph")?);
    }
    Ok((nodes, DiagonalTwoTensor { t_rr, t_sph }))
}

/// Parses an `x,q,phi` CSV snapshot.
pub fn snapshot_from_csv(text: &str, grading_p: f64) -> Result<WarpedMetric> {
    let mut nodes = Vec::new();
    let mut q = Vec::new();
    let mut phi = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line.trim() != "x,q,phi" {
                return Err(Error::Parse(format!("bad snapshot header `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut next = |what: &str| -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing {what}", i + 1)))?
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: bad float for {what}", i + 1)))
        };
        nodes.push(next("x")?);
        q.push(next("q")?);
        phi.push(next("phi")?);
    }
    if nodes.len() < 3 {
        return Err(Error::Parse("snapshot too short".into()));
    }
    Ok(WarpedMetric {
        grid: RadialGrid { nodes, grading_p },
        q,
        phi,
    })
}
