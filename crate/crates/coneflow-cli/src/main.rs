//! `coneflow` — flow runs, exact stability verdicts, weight windows, and
//! the tensor oracle self-test.
//!
//! Exit codes: 0 success (regardless of verdict), 1 config or usage
//! error, 2 numerical failure, 3 insufficient spectral data.

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;

use coneflow_core::cross_section::{builtin_table, format_rational, table_to_csv, CrossSection};
use coneflow_core::flow::{resume_flow, run_flow, snapshot_from_csv, FlowState, FlowTrajectory};
use coneflow_core::par::map_slice;
use coneflow_core::stability::{
    admissible_weights, check_strong, classify_table_row, mu_exponents, strong_assumption_check,
    weights_above_one, weights_admissible, MuVariant,
};
use coneflow_core::Error as CoreError;

use config::{parse_config, RunConfig};
use report::{
    build_report, plot_script, report_json, report_text, series_csv, series_from_csv,
    write_checkpoint,
};

#[derive(Parser)]
#[command(name = "coneflow", version, about = "warped-cone Ricci de Turck flow laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Flow runs and restarts.
    Flow {
        #[command(subcommand)]
        cmd: FlowCmd,
    },
    /// Spectral stability classification.
    Stability {
        #[command(subcommand)]
        cmd: StabilityCmd,
    },
    /// Admissible weight windows from sector minima.
    Weights(WeightsArgs),
    /// Finite-difference tensor oracle.
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
}

#[derive(Subcommand)]
enum FlowCmd {
    /// Run a flow from a config file.
    Run { config: PathBuf },
    /// Resume a flow from a checkpoint sidecar (.meta).
    Resume { checkpoint: PathBuf },
}

#[derive(Subcommand)]
enum StabilityCmd {
    /// Classify a cross-section file.
    Check {
        file: PathBuf,
        #[arg(long, default_value = "squared")]
        variant: String,
    },
    /// Reproduce the built-in symmetric-space tables.
    Table {
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct WeightsArgs {
    #[arg(long)]
    n: u32,
    /// Minimal nonzero trace-free tangential eigenvalue, as `p/q`.
    #[arg(long)]
    u0: String,
    /// Minimal nonzero Laplace–Beltrami eigenvalue, as `p/q`.
    #[arg(long)]
    u1: String,
    /// Decay order of the initial data.
    #[arg(long)]
    gamma: f64,
    #[arg(long, default_value = "squared")]
    variant: String,
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Run the oracle self-test suite.
    Selftest,
}

fn main() -> ExitCode {
    // die quietly when the consumer of a pipe goes away (e.g. `| head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are success paths
            use clap::error::ErrorKind;
            let kind = e.kind();
            let _ = e.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    let result = match cli.command {
        Command::Flow { cmd } => match cmd {
            FlowCmd::Run { config } => cmd_flow_run(&config),
            FlowCmd::Resume { checkpoint } => cmd_flow_resume(&checkpoint),
        },
        Command::Stability { cmd } => match cmd {
            StabilityCmd::Check { file, variant } => cmd_stability_check(&file, &variant),
            StabilityCmd::Table { csv } => cmd_stability_table(csv.as_deref()),
        },
        Command::Weights(args) => cmd_weights(&args),
        Command::Oracle { cmd } => match cmd {
            OracleCmd::Selftest => cmd_oracle_selftest(),
        },
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    if let Some(core) = e.downcast_ref::<CoreError>() {
        match core {
            CoreError::NumericalFailure { .. } | CoreError::PositivityLoss(_) => 2,
            CoreError::InsufficientSpectralData(_) => 3,
            _ => 1,
        }
    } else {
        1
    }
}

fn variant_of(name: &str) -> anyhow::Result<MuVariant> {
    match name {
        "printed" => Ok(MuVariant::AsPrinted),
        "squared" => Ok(MuVariant::Squared),
        other => anyhow::bail!("unknown variant `{other}` (expected printed|squared)"),
    }
}

fn finish_run(rc: &RunConfig, traj: &FlowTrajectory, merged_series: String) -> anyhow::Result<()> {
    let out = Path::new(&rc.out_dir);
    std::fs::create_dir_all(out)?;
    let mut manifest = Vec::new();

    let series_path = out.join("series.csv");
    std::fs::write(&series_path, merged_series)?;
    manifest.push("series.csv".to_string());

    let final_state = traj.states.last().expect("nonempty trajectory");
    write_checkpoint(out, final_state, &rc.hash, &rc.echo, "final")?;
    manifest.push("checkpoint_final.csv".to_string());
    manifest.push("checkpoint_final.meta".to_string());

    let cols = ["t", "R_min", "R_max", "sup_w_ric", "gamma_hat", "wmax", "dt"];
    std::fs::write(out.join("plot.gnuplot"), plot_script("series.csv", &cols))?;
    manifest.push("plot.gnuplot".to_string());

    let (residual_csv, residual_summary) = report::residuals_csv(traj)?;
    std::fs::write(out.join("residuals.csv"), residual_csv)?;
    manifest.push("residuals.csv".to_string());

    let stability = match check_strong(&rc.flow.cross_section, MuVariant::Squared) {
        Ok(v) => Some(v),
        Err(CoreError::InsufficientSpectralData(_)) => None,
        Err(e) => return Err(e.into()),
    };
    // decay order of the initial data sets the window's gamma
    let gamma = match rc.flow.profile {
        coneflow_core::flow::InitialProfile::PerturbedCone { exponent, .. } => exponent,
        _ => 2.0,
    };
    let window = report::weight_window_from_spectra(&rc.flow.cross_section, gamma);
    manifest.push("report.json".to_string());
    manifest.push("report.txt".to_string());
    let rep = build_report(
        traj,
        stability.as_ref(),
        window,
        residual_summary,
        &rc.echo,
        &rc.hash,
        manifest,
    )?;
    std::fs::write(out.join("report.json"), report_json(&rep))?;
    let text = report_text(&rep);
    std::fs::write(out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn cmd_flow_run(config_path: &Path) -> anyhow::Result<ExitCode> {
    let rc = parse_config(config_path)?;
    let out = Path::new(&rc.out_dir);
    std::fs::create_dir_all(out)?;
    let (echo, hash) = (rc.echo.clone(), rc.hash.clone());
    let traj = run_flow(&rc.flow, |state| {
        let label = format!("{:08}", state.step_index);
        let _ = write_checkpoint(out, state, &hash, &echo, &label);
    })
    .map_err(anyhow::Error::from)?;
    finish_run(&rc, &traj, series_csv(&traj.series))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_flow_resume(meta_path: &Path) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(meta_path)?;
    let (t, step, hash, echo) = report::parse_sidecar(&text)?;
    let base = meta_path.parent().unwrap_or(Path::new("."));
    let rc = config::parse_config_str(&echo, base)?;
    if rc.hash != hash {
        anyhow::bail!(
            "checkpoint config hash {hash} does not match the re-parsed config ({})",
            rc.hash
        );
    }
    let snap_path = meta_path.with_extension("csv");
    let snap_text = std::fs::read_to_string(&snap_path)?;
    let metric = snapshot_from_csv(&snap_text, rc.flow.grading_p).map_err(anyhow::Error::from)?;
    let start = FlowState {
        t,
        step_index: step,
        metric,
    };
    let out = Path::new(&rc.out_dir);
    std::fs::create_dir_all(out)?;
    let (echo2, hash2) = (rc.echo.clone(), rc.hash.clone());
    let traj = resume_flow(&rc.flow, start, &mut |state: &FlowState| {
        let label = format!("{:08}", state.step_index);
        let _ = write_checkpoint(out, state, &hash2, &echo2, &label);
    })
    .map_err(anyhow::Error::from)?;

    // merge with any series already in the output directory
    let series_path = out.join("series.csv");
    let merged = if series_path.exists() {
        let old = series_from_csv(&std::fs::read_to_string(&series_path)?)?;
        let first_new = traj.series.first().map(|r| r.t).unwrap_or(f64::INFINITY);
        let mut rows: Vec<_> = old.into_iter().filter(|r| r.t < first_new).collect();
        rows.extend(traj.series.iter().cloned());
        series_csv(&rows)
    } else {
        series_csv(&traj.series)
    };
    finish_run(&rc, &traj, merged)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_stability_check(file: &Path, variant: &str) -> anyhow::Result<ExitCode> {
    let variant = variant_of(variant)?;
    let text = std::fs::read_to_string(file)?;
    let cs = CrossSection::parse(&text).map_err(anyhow::Error::from)?;
    let validation = cs.validate();
    for w in &validation.warnings {
        eprintln!("warning: {w}");
    }
    if !validation.is_ok() {
        anyhow::bail!("invalid cross-section: {}", validation.errors.join("; "));
    }
    let verdict = check_strong(&cs, variant).map_err(anyhow::Error::from)?;
    println!(
        "{}: tangential = {}, strict = {}, strong = {}",
        cs.name,
        flag(verdict.tangential),
        flag(verdict.strict),
        flag(verdict.strong)
    );
    for c in &verdict.conditions {
        println!(
            "  [{}] {}: {}",
            if c.passed { "ok" } else { "FAIL" },
            c.name,
            c.witness
        );
    }
    for n in &verdict.notes {
        println!("  note: {n}");
    }
    let json = report::VerdictJson::from(&verdict);
    println!("{}", serde_json::to_string_pretty(&json)?);
    Ok(ExitCode::SUCCESS)
}

fn flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "yes",
        Some(false) => "no",
        None => "n/a",
    }
}

fn cmd_stability_table(csv: Option<&Path>) -> anyhow::Result<ExitCode> {
    let table = builtin_table();
    let verdicts = map_slice(&table, classify_table_row);
    let mut mismatches = 0;
    println!("{:<8} {:<26} {:>5} {:>8} {:>8}  {:<9} {}", "family", "space", "dim", "Lambda", "Theta", "computed", "listed");
    for (row, v) in table.iter().zip(&verdicts) {
        let got = v.strong == Some(true);
        if got != row.sts_verdict {
            mismatches += 1;
        }
        println!(
            "{:<8} {:<26} {:>5} {:>8} {:>8}  {:<9} {}",
            row.family,
            row.space,
            row.dim_listed,
            format_rational(&row.lambda),
            format_rational(&row.theta),
            if got { "yes" } else { "no" },
            if row.sts_verdict { "yes" } else { "no" },
        );
    }
    println!(
        "{} rows, {} strongly stable, {} mismatches against the listed column",
        table.len(),
        verdicts.iter().filter(|v| v.strong == Some(true)).count(),
        mismatches
    );
    if let Some(path) = csv {
        std::fs::write(path, table_to_csv(&table))?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_rational_arg(s: &str) -> anyhow::Result<BigRational> {
    coneflow_core::cross_section::parse_rational_str(s)
        .map_err(|e| anyhow::anyhow!("bad rational `{s}`: {e}"))
}

fn cmd_weights(args: &WeightsArgs) -> anyhow::Result<ExitCode> {
    let variant = variant_of(&args.variant)?;
    let u0 = parse_rational_arg(&args.u0)?;
    let u1 = parse_rational_arg(&args.u1)?;
    let (mu0, mu1) = mu_exponents(args.n, &u0, &u1, variant).map_err(anyhow::Error::from)?;
    let other = match variant {
        MuVariant::Squared => MuVariant::AsPrinted,
        MuVariant::AsPrinted => MuVariant::Squared,
    };
    let (mu0_alt, mu1_alt) = mu_exponents(args.n, &u0, &u1, other).map_err(anyhow::Error::from)?;
    let window = admissible_weights(args.n, mu0, mu1, args.gamma);
    println!(
        "n = {}, u0 = {}, u1 = {} ({:?} variant)",
        args.n,
        format_rational(&u0),
        format_rational(&u1),
        variant
    );
    println!("mu0 = {mu0:.12}, mu1 = {mu1:.12}  ({other:?}: {mu0_alt:.12}, {mu1_alt:.12})");
    println!(
        "strong sector bound u > n: {}",
        if strong_assumption_check(&u0, &u1, args.n) {
            "satisfied"
        } else {
            "violated"
        }
    );
    if window.feasible {
        let (g0, g1, a) = window.sample_point.unwrap();
        println!("window   : gamma0 in (0, {:.12}), gamma1 in (0, {:.12})", window.gamma0_interval.1, window.gamma1_interval.1);
        println!("sample   : gamma0 = {g0:.12}, gamma1 = {g1:.12}, alpha = {a:.12}");
        println!(
            "verified : {}",
            weights_admissible(mu0, mu1, args.gamma, (g0, g1, a))
        );
        match weights_above_one(mu0, mu1, args.gamma) {
            Some((g0, g1, a)) => println!(
                "above-one: achievable, witness gamma0 = gamma1 = {g0:.12}, alpha = {a:.12} ({g1:.12})"
            ),
            None => println!("above-one: not achievable"),
        }
    } else {
        println!("window   : infeasible");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle_selftest() -> anyhow::Result<ExitCode> {
    let checks = coneflow_core::oracle::selftest();
    let mut all = true;
    for c in &checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        all &= c.passed;
    }
    if all {
        println!("oracle selftest: all {} checks passed", checks.len());
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("oracle selftest failed");
        Ok(ExitCode::from(2))
    }
}
