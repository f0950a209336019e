//! `dkepler` — simulation runs, identity verification, coordinate transforms
//! and residual scans for the deformed Kepler system.
//!
//! Exit codes: 0 success, 2 configuration error, 3 integration failure,
//! 4 verification failure (non-ledger check), 5 domain violation.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::Parser;
use serde_json::json;

use deformed_kepler::grid::GridSpec;
use deformed_kepler::integrate::{self, IntegratorConfig, Method, ReducedMode};
use deformed_kepler::report::{trajectory_csv, write_csv};
use deformed_kepler::transforms;
use deformed_kepler::verify::{self, ScanKind, Suite, VerifyOptions};
use deformed_kepler::{model, Chart, DiffEngine, Error, ModelParams, Point, TransformMode};

#[derive(Parser, Debug)]
#[command(name = "dkepler", version, about = "Deformed-Kepler dynamics toolbox")]
struct Args {
    /// One of: simulate, verify, transform, scan.
    #[arg(long)]
    command: String,

    /// Mass.
    #[arg(long, default_value_t = 1.0)]
    m: f64,

    /// Coupling (gravitational constant times masses).
    #[arg(long, default_value_t = 1.0)]
    k: f64,

    /// Deformation strength.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,

    /// Chart of the initial state / scan grid
    /// (cartesian, reduced, action, xi, pi).
    #[arg(long)]
    chart: Option<String>,

    /// Comma-separated state coordinates in the chart's order.
    #[arg(long)]
    state: Option<String>,

    #[arg(long, default_value_t = 10.0)]
    t_end: f64,

    /// rk45 (adaptive) or midpoint (fixed-step implicit).
    #[arg(long, default_value = "rk45")]
    integrator: String,

    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,

    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,

    /// Fixed step for the midpoint integrator.
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,

    #[arg(long, default_value_t = 1_000_000)]
    max_steps: usize,

    /// corrected (default) or literal; canonical/paper-literal are accepted
    /// aliases.  Selects the reading of relations that fail verbatim.
    #[arg(long, default_value = "corrected")]
    mode: String,

    /// Verification suite (brackets, torsion, chain, transforms, qbh,
    /// invariants, all) or scan kind (torsion, qbh, su2).
    #[arg(long, default_value = "all")]
    suite: String,

    /// Grid spec "name=min:max:count,..." for scans.
    #[arg(long)]
    grid: Option<String>,

    /// CSV output path (trajectory or scan rows).
    #[arg(long)]
    out: Option<PathBuf>,

    /// JSON report path.
    #[arg(long)]
    report: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Integration(String),
    Verification,
    Domain(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Integration(_) => 3,
            Failure::Verification => 4,
            Failure::Domain(_) => 5,
        }
    }

    fn report(&self) {
        match self {
            Failure::Config(msg) => eprintln!("configuration error: {msg}"),
            Failure::Integration(msg) => eprintln!("integration failure: {msg}"),
            Failure::Verification => eprintln!("verification failed (see report)"),
            Failure::Domain(msg) => eprintln!("domain violation: {msg}"),
        }
    }
}

fn config_err(e: Error) -> Failure {
    Failure::Config(e.to_string())
}

/// Runtime errors: step failures count as integration failures, everything
/// domain-shaped as a domain violation.
fn runtime_err(e: Error) -> Failure {
    match e {
        Error::StepFailure(_) => Failure::Integration(e.to_string()),
        Error::DomainViolation(_)
        | Error::UnboundState(_)
        | Error::DeformationRequired(_)
        | Error::ConstraintInfeasible(_)
        | Error::Degenerate(_)
        | Error::SingularStructure(_)
        | Error::NonFinite(_) => Failure::Domain(e.to_string()),
        other => Failure::Config(other.to_string()),
    }
}

fn parse_state(args: &Args, chart: Chart) -> Result<Point, Failure> {
    let raw = args
        .state
        .as_deref()
        .ok_or_else(|| Failure::Config("--state is required".into()))?;
    let coords: Result<Vec<f64>, _> = raw.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let coords = coords.map_err(|_| Failure::Config(format!("could not parse state '{raw}'")))?;
    Point::new(chart, coords).map_err(config_err)
}

fn parse_chart(args: &Args, default: Chart) -> Result<Chart, Failure> {
    match &args.chart {
        None => Ok(default),
        Some(s) => Chart::from_str(s).map_err(config_err),
    }
}

fn params_of(args: &Args) -> Result<ModelParams, Failure> {
    ModelParams::new(args.m, args.k, args.alpha).map_err(config_err)
}

fn integrator_config(args: &Args) -> Result<IntegratorConfig, Failure> {
    let method = Method::from_str(&args.integrator).map_err(config_err)?;
    let cfg = IntegratorConfig {
        method,
        rel_tol: args.rel_tol,
        abs_tol: args.abs_tol,
        dt: args.dt,
        t_end: args.t_end,
        max_steps: args.max_steps,
    };
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}

fn cmd_simulate(args: &Args) -> Result<(), Failure> {
    let params = params_of(args)?;
    let chart = parse_chart(args, Chart::Cartesian)?;
    let x0 = parse_state(args, chart)?;
    let cfg = integrator_config(args)?;
    let traj = match chart {
        Chart::Cartesian => integrate::integrate_cartesian(&x0, &params, &cfg),
        Chart::Reduced => {
            let mode = ReducedMode::from_str(&args.mode).map_err(config_err)?;
            integrate::integrate_reduced(&x0, &params, &cfg, mode)
        }
        other => {
            return Err(Failure::Config(format!(
                "simulation runs on the cartesian or reduced chart, not {other}"
            )))
        }
    }
    .map_err(runtime_err)?;

    let out = args.out.clone().unwrap_or_else(|| "trajectory.csv".into());
    write_file(&out, &trajectory_csv(&traj))?;

    let drift = traj.drift_report();
    let summary = json!({
        "command": "simulate",
        "chart": chart.to_string(),
        "params": params,
        "initial_state": x0.coords(),
        "integrator": args.integrator,
        "rel_tol": args.rel_tol,
        "abs_tol": args.abs_tol,
        "t_end": args.t_end,
        "samples": traj.len(),
        "final_time": traj.times.last().copied().unwrap_or(0.0),
        "drift": drift,
        "trajectory_csv": out.display().to_string(),
    });
    let report_path = args.report.clone().unwrap_or_else(|| "run.json".into());
    write_file(
        &report_path,
        &serde_json::to_string_pretty(&summary).expect("serializable"),
    )?;
    println!(
        "simulate: {} samples to t = {:.6}, drift(H) = {:.3e}",
        traj.len(),
        traj.times.last().copied().unwrap_or(0.0),
        drift["H"]
    );
    Ok(())
}

fn cmd_verify(args: &Args) -> Result<(), Failure> {
    let params = params_of(args)?;
    let suite = Suite::from_str(&args.suite).map_err(config_err)?;
    let mode = TransformMode::from_str(&args.mode).map_err(config_err)?;
    let opts = VerifyOptions {
        params,
        mode,
        engine: DiffEngine::default(),
    };
    let report = verify::run_suite(suite, &opts).map_err(config_err)?;
    for rec in &report.records {
        let status = if rec.ledger {
            "LEDGER"
        } else if rec.pass {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "{status:6} {:45} residual {:.3e}{}",
            rec.check_id,
            rec.residual,
            rec.expected_residual
                .map(|e| format!(" (expected {e:.5}, known discrepancy)"))
                .unwrap_or_default()
        );
    }
    println!(
        "suite {}: {} checks, {} passed, {} failed, {} ledger entries",
        report.suite,
        report.summary.total,
        report.summary.passed,
        report.summary.failed,
        report.summary.ledger
    );
    let path = args.report.clone().unwrap_or_else(|| "report.json".into());
    write_file(&path, &report.to_json())?;
    if report.all_non_ledger_pass() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn print_point(label: &str, x: &Point, h: f64) {
    let coords: Vec<String> = x
        .chart()
        .coordinate_names()
        .iter()
        .zip(x.coords())
        .map(|(n, v)| format!("{n} = {v:.12}"))
        .collect();
    println!("{label:8} {}   H = {h:.12}", coords.join(", "));
}

fn cmd_transform(args: &Args) -> Result<(), Failure> {
    let params = params_of(args)?;
    let chart = parse_chart(args, Chart::Reduced)?;
    let x = parse_state(args, chart)?;
    let mode = TransformMode::from_str(&args.mode).map_err(config_err)?;
    match chart {
        Chart::Reduced => {
            let h = model::hamiltonian_reduced(&params)
                .eval(&x)
                .map_err(runtime_err)?;
            print_point("reduced", &x, h);
            let act = transforms::reduced_to_action(&x, &params).map_err(runtime_err)?;
            let h_act = model::hamiltonian_action(&params)
                .eval(&act)
                .map_err(runtime_err)?;
            print_point("action", &act, h_act);
            let mut spread = (h_act - h).abs();
            if params.alpha > 0.0 {
                let xi =
                    transforms::action_to_xi(&act, &params, x.coord(0)).map_err(runtime_err)?;
                let h_xi = model::hamiltonian_xi(&params)
                    .map_err(runtime_err)?
                    .eval(&xi)
                    .map_err(runtime_err)?;
                print_point("xi", &xi, h_xi);
                spread = spread.max((h_xi - h).abs());
            }
            let pi_pt = transforms::action_to_pi(&act, &params).map_err(runtime_err)?;
            let h_pi = model::hamiltonian_pi(&params)
                .eval(&pi_pt)
                .map_err(runtime_err)?;
            print_point("pi", &pi_pt, h_pi);
            spread = spread.max((h_pi - h).abs());
            println!("energy cross-check: max |dH| = {spread:.3e}");
        }
        Chart::Action => {
            let h = model::hamiltonian_action(&params)
                .eval(&x)
                .map_err(runtime_err)?;
            print_point("action", &x, h);
            let pi_pt = transforms::action_to_pi(&x, &params).map_err(runtime_err)?;
            let h_pi = model::hamiltonian_pi(&params)
                .eval(&pi_pt)
                .map_err(runtime_err)?;
            print_point("pi", &pi_pt, h_pi);
            let back = transforms::pi_to_action(&pi_pt, &params, mode).map_err(runtime_err)?;
            let mut residual = 0.0_f64;
            for i in 0..4 {
                residual = residual.max((back.coord(i) - x.coord(i)).abs());
            }
            println!("round trip ({mode:?}): max residual = {residual:.6e}");
        }
        other => {
            return Err(Failure::Config(format!(
                "transform starts from the reduced or action chart, not {other}"
            )))
        }
    }
    Ok(())
}

fn cmd_scan(args: &Args) -> Result<(), Failure> {
    let params = params_of(args)?;
    let kind = ScanKind::from_str(&args.suite).map_err(config_err)?;
    let chart = parse_chart(args, verify::scan_default_chart(kind))?;
    let grid_raw = args
        .grid
        .as_deref()
        .ok_or_else(|| Failure::Config("--grid is required for scans".into()))?;
    let grid = GridSpec::parse(grid_raw).map_err(config_err)?;
    let opts = VerifyOptions {
        params,
        mode: TransformMode::Corrected,
        engine: DiffEngine::default(),
    };
    let res = verify::run_scan(kind, chart, &grid, &opts).map_err(config_err)?;
    let out = args.out.clone().unwrap_or_else(|| "scan.csv".into());
    write_file(&out, &write_csv(&res.header, &res.rows))?;
    println!(
        "scan: {} rows x {} columns to {}",
        res.rows.len(),
        res.header.len(),
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = match args.command.as_str() {
        "simulate" => cmd_simulate(&args),
        "verify" => cmd_verify(&args),
        "transform" => cmd_transform(&args),
        "scan" => cmd_scan(&args),
        other => Err(Failure::Config(format!(
            "unknown command '{other}' (simulate, verify, transform, scan)"
        ))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            f.report();
            ExitCode::from(f.code())
        }
    }
}
