//! Run reports: human-readable text, machine-readable JSON, series CSV,
//! checkpoints, and the companion plot script.
//!
//! Structured output is deterministic byte-for-byte for a fixed input:
//! fixed field order, round-trip float formatting, no timestamps.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use coneflow_core::diagnostics::{
    r_min_tracker, ricci_evolution_residual, ricci_weight_monitor, scalar_evolution_residual,
};
use coneflow_core::flow::{snapshot_to_csv, FlowState, FlowTrajectory, SeriesRow};
use coneflow_core::stability::StabilityVerdict;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionJson {
    pub name: String,
    pub passed: bool,
    pub witness: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictJson {
    pub tangential: Option<bool>,
    pub strict: Option<bool>,
    pub strong: Option<bool>,
    pub conditions: Vec<ConditionJson>,
    pub notes: Vec<String>,
}

impl From<&StabilityVerdict> for VerdictJson {
    fn from(v: &StabilityVerdict) -> Self {
        VerdictJson {
            tangential: v.tangential,
            strict: v.strict,
            strong: v.strong,
            conditions: v
                .conditions
                .iter()
                .map(|c| ConditionJson {
                    name: c.name.clone(),
                    passed: c.passed,
                    witness: c.witness.clone(),
                })
                .collect(),
            notes: v.notes.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowOutcomeJson {
    pub completed: bool,
    pub t_final: String,
    pub steps: u64,
    pub stored_levels: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonitorJson {
    pub verdict: bool,
    pub first_value: String,
    pub last_value: String,
    pub extreme_value: String,
    pub note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightWindowJson {
    pub mu0: String,
    pub mu1: String,
    pub gamma: String,
    pub feasible: bool,
    pub sample: Option<(String, String, String)>,
    pub note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualSummaryJson {
    pub scalar_max: String,
    pub ricci_max: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub config_hash: String,
    pub config_echo: Vec<String>,
    pub stability: Option<VerdictJson>,
    pub weight_window: Option<WeightWindowJson>,
    pub flow: FlowOutcomeJson,
    pub r_min_preserved: MonitorJson,
    pub ricci_weight_bounded: MonitorJson,
    pub residuals: ResidualSummaryJson,
    pub gamma_hat_final: String,
    pub manifest: Vec<String>,
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Weight window from the cross-section's sector minima, when the
/// spectra carry them: `u0` converts from the minimal TT eigenvalue by
/// the `Δ_L = Δ_E + 2(n-1) id` shift, `u1` is the first nonzero
/// Laplace eigenvalue.
pub fn weight_window_from_spectra(
    cs: &coneflow_core::cross_section::CrossSection,
    gamma: f64,
) -> Option<WeightWindowJson> {
    use coneflow_core::stability::{admissible_weights, mu_exponents, MuVariant};
    let u0 = cs.tt_einstein_spectrum.first()?.clone()
        + num_rational::BigRational::from_integer((2 * (cs.n as i64 - 1)).into());
    use num_traits::Signed;
    let u1 = cs.scalar_spectrum.iter().find(|l| l.is_positive())?;
    let (mu0, mu1) = mu_exponents(cs.n, &u0, u1, MuVariant::Squared).ok()?;
    let w = admissible_weights(cs.n, mu0, mu1, gamma);
    Some(WeightWindowJson {
        mu0: f(mu0),
        mu1: f(mu1),
        gamma: f(gamma),
        feasible: w.feasible,
        sample: w.sample_point.map(|(a, b, c)| (f(a), f(b), f(c))),
        note: "squared variant; u0 from min TT eigenvalue + 2(n-1)".into(),
    })
}

/// Residual series CSV over the stored levels.
pub fn residuals_csv(traj: &FlowTrajectory) -> Result<(String, ResidualSummaryJson)> {
    let window = (f64::NEG_INFINITY, f64::INFINITY);
    let scal = scalar_evolution_residual(traj, 0.0, window).map_err(|e| anyhow::anyhow!("{e}"))?;
    let ric = ricci_evolution_residual(traj, 0.0, window).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut out = String::from("t,scalar_residual_max,ricci_residual_max\n");
    for i in 0..scal.times.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            f(scal.times[i]),
            f(scal.weighted_max[i]),
            f(ric.weighted_max[i])
        ));
    }
    let summary = ResidualSummaryJson {
        scalar_max: f(scal.weighted_max.iter().cloned().fold(0.0, f64::max)),
        ricci_max: f(ric.weighted_max.iter().cloned().fold(0.0, f64::max)),
    };
    Ok((out, summary))
}

/// Builds the report record from a finished trajectory.
pub fn build_report(
    traj: &FlowTrajectory,
    stability: Option<&StabilityVerdict>,
    weight_window: Option<WeightWindowJson>,
    residuals: ResidualSummaryJson,
    config_echo: &str,
    config_hash: &str,
    manifest: Vec<String>,
) -> Result<RunReport> {
    let rmin = r_min_tracker(traj).map_err(|e| anyhow::anyhow!("{e}"))?;
    let ric = ricci_weight_monitor(traj, 2.0).map_err(|e| anyhow::anyhow!("{e}"))?;
    let last = traj.states.last().expect("nonempty trajectory");
    let gamma_hat = traj.series.last().map(|r| r.gamma_hat).unwrap_or(f64::NAN);
    Ok(RunReport {
        config_hash: config_hash.to_string(),
        config_echo: config_echo.lines().map(|s| s.to_string()).collect(),
        stability: stability.map(VerdictJson::from),
        weight_window,
        residuals,
        flow: FlowOutcomeJson {
            completed: traj.completed,
            t_final: f(last.t),
            steps: last.step_index,
            stored_levels: traj.states.len(),
        },
        r_min_preserved: MonitorJson {
            verdict: rmin.verdict,
            first_value: f(rmin.values[0]),
            last_value: f(*rmin.values.last().unwrap()),
            extreme_value: f(rmin.values.iter().cloned().fold(f64::INFINITY, f64::min)),
            note: rmin.note,
        },
        ricci_weight_bounded: MonitorJson {
            verdict: ric.verdict,
            first_value: f(ric.values[0]),
            last_value: f(*ric.values.last().unwrap()),
            extreme_value: f(ric.values.iter().cloned().fold(0.0, f64::max)),
            note: ric.note,
        },
        gamma_hat_final: f(gamma_hat),
        manifest,
    })
}

/// Serializes the report as deterministic JSON.
pub fn report_json(report: &RunReport) -> String {
    serde_json::to_string_pretty(report).expect("report serialization") + "\n"
}

/// Human-readable report text.
pub fn report_text(report: &RunReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("config hash     : {}\n", report.config_hash));
    out.push_str(&format!(
        "flow            : {} at t = {} after {} steps\n",
        if report.flow.completed {
            "completed"
        } else {
            "stopped"
        },
        report.flow.t_final,
        report.flow.steps
    ));
    out.push_str(&format!(
        "R_min verdict   : positivity {} (min over run {})\n",
        if report.r_min_preserved.verdict {
            "preserved"
        } else {
            "violated"
        },
        report.r_min_preserved.extreme_value
    ));
    out.push_str(&format!(
        "|Ric| monitor   : {} (sup over run {})\n",
        if report.ricci_weight_bounded.verdict {
            "bounded"
        } else {
            "unbounded"
        },
        report.ricci_weight_bounded.extreme_value
    ));
    out.push_str(&format!("gamma_hat final : {}\n", report.gamma_hat_final));
    if let Some(st) = &report.stability {
        let word = |v: Option<bool>| match v {
            Some(true) => "yes",
            Some(false) => "no",
            None => "n/a",
        };
        out.push_str(&format!(
            "stability       : tangential={} strict={} strong={}\n",
            word(st.tangential),
            word(st.strict),
            word(st.strong)
        ));
        for c in &st.conditions {
            out.push_str(&format!(
                "  [{}] {}: {}\n",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.witness
            ));
        }
    }
    out.push_str("files:\n");
    for m in &report.manifest {
        out.push_str(&format!("  {m}\n"));
    }
    out
}

/// Series CSV with the documented columns.
pub fn series_csv(rows: &[SeriesRow]) -> String {
    let mut out = String::from("t,R_min,R_max,sup_w_ric,gamma_hat,wmax,dt\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            f(r.t),
            f(r.r_min),
            f(r.r_max),
            f(r.sup_w_ric),
            f(r.gamma_hat),
            f(r.wmax),
            f(r.dt)
        ));
    }
    out
}

/// Parses a series CSV back into rows (used when merging after resume).
pub fn series_from_csv(text: &str) -> Result<Vec<SeriesRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("series line {}", i + 1))?;
        if vals.len() != 7 {
            anyhow::bail!("series line {}: expected 7 columns", i + 1);
        }
        rows.push(SeriesRow {
            t: vals[0],
            r_min: vals[1],
            r_max: vals[2],
            sup_w_ric: vals[3],
            gamma_hat: vals[4],
            wmax: vals[5],
            dt: vals[6],
        });
    }
    Ok(rows)
}

/// Checkpoint sidecar: restart metadata plus the config echo.
pub fn sidecar_text(state: &FlowState, config_hash: &str, config_echo: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("t = {}\n", f(state.t)));
    out.push_str(&format!("step = {}\n", state.step_index));
    out.push_str(&format!("config_hash = {config_hash}\n"));
    out.push_str("-- config --\n");
    out.push_str(config_echo);
    out
}

/// Parses a sidecar back into `(t, step, config_hash, config_echo)`.
pub fn parse_sidecar(text: &str) -> Result<(f64, u64, String, String)> {
    let mut t = None;
    let mut step = None;
    let mut hash = None;
    let mut echo = String::new();
    let mut in_config = false;
    for line in text.lines() {
        if in_config {
            echo.push_str(line);
            echo.push('\n');
            continue;
        }
        if line.trim() == "-- config --" {
            in_config = true;
            continue;
        }
        if let Some((k, v)) = line.split_once('=') {
            match k.trim() {
                "t" => t = Some(v.trim().parse::<f64>().context("sidecar t")?),
                "step" => step = Some(v.trim().parse::<u64>().context("sidecar step")?),
                "config_hash" => hash = Some(v.trim().to_string()),
                _ => {}
            }
        }
    }
    Ok((
        t.context("sidecar missing t")?,
        step.context("sidecar missing step")?,
        hash.context("sidecar missing config_hash")?,
        echo,
    ))
}

/// Writes a checkpoint pair (snapshot CSV + sidecar) and returns the two
/// paths.
pub fn write_checkpoint(
    dir: &Path,
    state: &FlowState,
    config_hash: &str,
    config_echo: &str,
    label: &str,
) -> Result<(PathBuf, PathBuf)> {
    let snap = dir.join(format!("checkpoint_{label}.csv"));
    let meta = dir.join(format!("checkpoint_{label}.meta"));
    std::fs::write(&snap, snapshot_to_csv(&state.metric))?;
    std::fs::write(&meta, sidecar_text(state, config_hash, config_echo))?;
    Ok((snap, meta))
}

/// Gnuplot script drawing the three monitor series from the CSV.
pub fn plot_script(series_file: &str, columns: &[&str]) -> String {
    let mut out = String::new();
    out.push_str("# columns: ");
    out.push_str(&columns.join(","));
    out.push('\n');
    out.push_str("set datafile separator ','\n");
    out.push_str("set terminal pngcairo size 1100,900\n");
    out.push_str("set output 'flow_monitors.png'\n");
    out.push_str("set multiplot layout 3,1\n");
    out.push_str(&format!(
        "plot '{series_file}' using 1:2 with lines title 'R_min(t)'\n"
    ));
    out.push_str(&format!(
        "plot '{series_file}' using 1:5 with lines title 'gamma_hat(t)'\n"
    ));
    out.push_str(&format!(
        "plot '{series_file}' using 1:4 with lines title 'weighted |Ric| sup(t)'\n"
    ));
    out.push_str("unset multiplot\n");
    out
}
