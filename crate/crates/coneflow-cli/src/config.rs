//! Strict key–value config files for flow runs.
//!
//! Unknown keys are fatal with a line-anchored message: silent typos in
//! run configurations are how irreproducible results happen. Every
//! omitted key takes a documented default, and the effective config is
//! echoed back into the report together with its hash.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use coneflow_core::cross_section::CrossSection;
use coneflow_core::flow::{
    snapshot_from_csv, BackgroundSpec, BoundaryCondition, FlowConfig, InitialProfile,
};

/// Parsed run configuration: the core flow config plus CLI-level
/// settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub flow: FlowConfig,
    pub out_dir: String,
    /// Canonical echo of the effective configuration.
    pub echo: String,
    pub hash: String,
}

const KEYS: &[&str] = &[
    "cross_section",
    "n",
    "x_min",
    "x_max",
    "grid_n",
    "grading_p",
    "profile",
    "amplitude",
    "exponent",
    "profile_file",
    "background",
    "bc_inner",
    "bc_outer",
    "t_end",
    "cfl",
    "checkpoint_interval",
    "store_levels",
    "gamma_prime",
    "out_dir",
];

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    parse_config_str(&text, path.parent().unwrap_or(Path::new(".")))
}

pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let mut raw = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`", lineno + 1))?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            bail!("line {}: unknown key `{}`", lineno + 1, key);
        }
        if raw.insert(key.to_string(), value.to_string()).is_some() {
            bail!("line {}: duplicate key `{}`", lineno + 1, key);
        }
    }
    build(raw, base_dir)
}

fn get_f64(raw: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match raw.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<f64>()
            .map_err(|_| anyhow!("key `{key}`: bad number `{v}`")),
    }
}

fn get_usize(raw: &BTreeMap<String, String>, key: &str, default: usize) -> Result<usize> {
    match raw.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<usize>()
            .map_err(|_| anyhow!("key `{key}`: bad integer `{v}`")),
    }
}

fn bc_of(name: &str) -> Result<BoundaryCondition> {
    Ok(match name {
        "free" => BoundaryCondition::Free,
        "pin_initial" => BoundaryCondition::PinInitial,
        "pin_exact_cone" => BoundaryCondition::PinExactCone,
        "pin_exact_solution" => BoundaryCondition::PinExactSolution,
        other => bail!("unknown boundary condition `{other}`"),
    })
}

fn build(raw: BTreeMap<String, String>, base_dir: &Path) -> Result<RunConfig> {
    let cs_spec = raw
        .get("cross_section")
        .cloned()
        .unwrap_or_else(|| "sphere".to_string());
    let n = get_usize(&raw, "n", 3)? as u32;
    let cross_section = if cs_spec == "sphere" {
        CrossSection::round_sphere(n).map_err(|e| anyhow!("{e}"))?
    } else {
        let path = base_dir.join(&cs_spec);
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("cannot read cross-section file {}", path.display()))?;
        let cs = CrossSection::parse(&text).map_err(|e| anyhow!("{e}"))?;
        let report = cs.validate();
        if !report.is_ok() {
            bail!("cross-section file invalid: {}", report.errors.join("; "));
        }
        cs
    };

    let mut flow = FlowConfig::new(cross_section);
    flow.x_min = get_f64(&raw, "x_min", 0.01)?;
    flow.x_max = get_f64(&raw, "x_max", 1.01)?;
    flow.n_cells = get_usize(&raw, "grid_n", 200)?;
    flow.grading_p = get_f64(&raw, "grading_p", 1.0)?;
    flow.t_end = get_f64(&raw, "t_end", 0.01)?;
    flow.cfl = get_f64(&raw, "cfl", 0.5)?;
    flow.checkpoint_every = get_usize(&raw, "checkpoint_interval", 0)?;
    flow.store_levels = get_usize(&raw, "store_levels", 32)?;
    flow.gamma_prime = get_f64(&raw, "gamma_prime", 2.0)?;

    let profile_name = raw
        .get("profile")
        .cloned()
        .unwrap_or_else(|| "exact_cone".to_string());
    flow.profile = match profile_name.as_str() {
        "exact_cone" => InitialProfile::ExactCone,
        "shrinking_sphere" => InitialProfile::ShrinkingSphere,
        "perturbed_cone" => InitialProfile::PerturbedCone {
            amplitude: get_f64(&raw, "amplitude", 1e-3)?,
            exponent: get_f64(&raw, "exponent", 1.5)?,
        },
        "positive_scalar" => InitialProfile::PositiveScalar {
            amplitude: get_f64(&raw, "amplitude", 1e-2)?,
        },
        "from_file" => {
            let file = raw
                .get("profile_file")
                .ok_or_else(|| anyhow!("profile = from_file needs profile_file"))?;
            let path = base_dir.join(file);
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("cannot read profile {}", path.display()))?;
            let m = snapshot_from_csv(&text, flow.grading_p).map_err(|e| anyhow!("{e}"))?;
            // the snapshot carries its own grid
            flow.x_min = m.grid.x_min();
            flow.x_max = m.grid.x_max();
            flow.n_cells = m.grid.len() - 1;
            InitialProfile::FromData {
                q: m.q,
                phi: m.phi,
            }
        }
        other => bail!("unknown profile `{other}`"),
    };
    flow.background = match raw.get("background").map(|s| s.as_str()) {
        None | Some("initial_metric") => BackgroundSpec::InitialMetric,
        Some("exact_cone") => BackgroundSpec::ExactCone,
        Some(other) => bail!("unknown background `{other}`"),
    };
    if let Some(v) = raw.get("bc_inner") {
        flow.bc_inner = bc_of(v)?;
    }
    if let Some(v) = raw.get("bc_outer") {
        flow.bc_outer = bc_of(v)?;
    }
    let out_dir = raw
        .get("out_dir")
        .cloned()
        .unwrap_or_else(|| "coneflow-out".to_string());

    flow.validate().map_err(|e| anyhow!("{e}"))?;

    let echo = canonical_echo(&flow, &profile_name, &raw, &out_dir);
    let hash = fnv1a_hex(&echo);
    Ok(RunConfig {
        flow,
        out_dir,
        echo,
        hash,
    })
}

fn bc_name(bc: BoundaryCondition) -> &'static str {
    match bc {
        BoundaryCondition::Free => "free",
        BoundaryCondition::PinInitial => "pin_initial",
        BoundaryCondition::PinExactCone => "pin_exact_cone",
        BoundaryCondition::PinExactSolution => "pin_exact_solution",
    }
}

/// Effective configuration echo: every field, defaults resolved, in a
/// fixed key order. Byte-identical for identical effective configs.
pub fn canonical_echo(
    flow: &FlowConfig,
    profile_name: &str,
    raw: &BTreeMap<String, String>,
    out_dir: &str,
) -> String {
    let mut lines = Vec::new();
    let cs_spec = raw
        .get("cross_section")
        .cloned()
        .unwrap_or_else(|| "sphere".to_string());
    lines.push(format!("cross_section = {cs_spec}"));
    lines.push(format!("n = {}", flow.cross_section.n));
    lines.push(format!("x_min = {:.16e}", flow.x_min));
    lines.push(format!("x_max = {:.16e}", flow.x_max));
    lines.push(format!("grid_n = {}", flow.n_cells));
    lines.push(format!("grading_p = {:.16e}", flow.grading_p));
    lines.push(format!("profile = {profile_name}"));
    match &flow.profile {
        InitialProfile::PerturbedCone {
            amplitude,
            exponent,
        } => {
            lines.push(format!("amplitude = {amplitude:.16e}"));
            lines.push(format!("exponent = {exponent:.16e}"));
        }
        InitialProfile::PositiveScalar { amplitude } => {
            lines.push(format!("amplitude = {amplitude:.16e}"));
        }
        InitialProfile::FromData { .. } => {
            if let Some(f) = raw.get("profile_file") {
                lines.push(format!("profile_file = {f}"));
            }
        }
        _ => {}
    }
    lines.push(format!(
        "background = {}",
        match flow.background {
            BackgroundSpec::InitialMetric => "initial_metric",
            BackgroundSpec::ExactCone => "exact_cone",
        }
    ));
    lines.push(format!("bc_inner = {}", bc_name(flow.bc_inner)));
    lines.push(format!("bc_outer = {}", bc_name(flow.bc_outer)));
    lines.push(format!("t_end = {:.16e}", flow.t_end));
    lines.push(format!("cfl = {:.16e}", flow.cfl));
    lines.push(format!("checkpoint_interval = {}", flow.checkpoint_every));
    lines.push(format!("store_levels = {}", flow.store_levels));
    lines.push(format!("gamma_prime = {:.16e}", flow.gamma_prime));
    lines.push(format!("out_dir = {out_dir}"));
    lines.join("\n") + "\n"
}

/// FNV-1a 64-bit hash, hex-encoded; used as the config fingerprint.
pub fn fnv1a_hex(text: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}
