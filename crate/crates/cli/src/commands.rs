//! Subcommand execution: option resolution, core calls, artifact writing.

use crate::config::{require, resolve_parsed, resolve_typed, ConfigFile};
use crate::{
    Cli, ClassifyArgs, Command, FigureArgs, MethodArg, PlaneArg, ProfileArgs, ScanArgs,
    SimulateArgs, VerifyArgs, WhichArg,
};
use clap::ValueEnum;
use ep4_core::fmt::g17;
use ep4_core::{
    classify, datum_at, fit_frontier, integrate_characteristic, oracle_classify, run_with_options,
    scan_plane, scan_radial, AxisSpec, InitialDatum, OracleOptions, PlaneKind, ProfileSpec,
    RadialGrid, ScanMethod, ScanRequest, ScanResult, SeriesOutcome, TabulatedProfile, Tolerances,
    VerifyOptions, DEFAULT_MARGIN,
};
use std::f64::consts::TAU;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

impl From<MethodArg> for ScanMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Closed => ScanMethod::Closed,
            MethodArg::Oracle => ScanMethod::Oracle,
            MethodArg::Both => ScanMethod::Both,
        }
    }
}

impl From<PlaneArg> for PlaneKind {
    fn from(p: PlaneArg) -> Self {
        match p {
            PlaneArg::ZeroVelocity => PlaneKind::ZeroVelocity,
            PlaneArg::ZeroField => PlaneKind::ZeroField,
        }
    }
}

fn plane_name(p: PlaneArg) -> &'static str {
    match p {
        PlaneArg::ZeroVelocity => "zero-velocity",
        PlaneArg::ZeroField => "zero-field",
    }
}

pub fn run(cli: Cli) -> Result<ExitCode, String> {
    let cfg = match &cli.config {
        Some(path) => Some(ConfigFile::load(path)?),
        None => None,
    };
    let cfg = cfg.as_ref();
    match cli.command {
        Command::Classify(args) => run_classify(args, cfg).map(|()| ExitCode::SUCCESS),
        Command::Simulate(args) => run_simulate(args, cfg).map(|()| ExitCode::SUCCESS),
        Command::Profile(args) => run_profile(args, cfg).map(|()| ExitCode::SUCCESS),
        Command::Scan(args) => run_scan(args, cfg).map(|()| ExitCode::SUCCESS),
        Command::Figure(args) => run_figure(args, cfg).map(|()| ExitCode::SUCCESS),
        Command::Verify(args) => run_verify(args, cfg),
    }
}

fn run_classify(args: ClassifyArgs, cfg: Option<&ConfigFile>) -> Result<(), String> {
    if let Some(c) = cfg {
        c.check_keys(&["datum", "method", "margin"])?;
    }
    let parsed = require(
        resolve_parsed(cfg, args.datum.as_deref(), "datum", parse_datum_list)?,
        "--datum (or config key 'datum')",
    )?;
    let method =
        resolve_typed(cfg, args.method, "method", parse_method)?.unwrap_or(MethodArg::Closed);
    let margin = resolve_typed(cfg, args.margin, "margin", parse_f64)?.unwrap_or(DEFAULT_MARGIN);
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(format!("margin {margin} must be positive and finite"));
    }
    let datum = build_datum(parsed, None)?;
    match method {
        MethodArg::Closed => {
            println!("{}", classify(&datum, margin).map_err(|e| e.to_string())?);
        }
        MethodArg::Oracle => {
            let opts = OracleOptions { margin, ..OracleOptions::default() };
            println!("{}", oracle_classify(&datum, &opts).map_err(|e| e.to_string())?);
        }
        MethodArg::Both => {
            let closed = classify(&datum, margin).map_err(|e| e.to_string())?;
            let opts = OracleOptions { margin, ..OracleOptions::default() };
            let oracle = oracle_classify(&datum, &opts).map_err(|e| e.to_string())?;
            let agreement = if closed.class == oracle.class { "agree" } else { "DISAGREE" };
            println!("{closed} | {oracle} | {agreement}");
        }
    }
    Ok(())
}

fn run_simulate(args: SimulateArgs, cfg: Option<&ConfigFile>) -> Result<(), String> {
    if let Some(c) = cfg {
        c.check_keys(&["datum", "r0", "horizon", "tol", "out"])?;
    }
    let parsed = require(
        resolve_parsed(cfg, args.datum.as_deref(), "datum", parse_datum_list)?,
        "--datum (or config key 'datum')",
    )?;
    let r0 = resolve_typed(cfg, args.r0, "r0", parse_f64)?;
    let horizon = resolve_typed(cfg, args.horizon, "horizon", parse_f64)?.unwrap_or(TAU);
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(format!("horizon {horizon} must be positive and finite"));
    }
    let tol = resolve_parsed(cfg, args.tol.as_deref(), "tol", parse_tol)?.unwrap_or_default();
    let out = require(
        resolve_typed(cfg, args.out, "out", parse_path)?,
        "--out (or config key 'out')",
    )?;
    let datum = build_datum(parsed, r0)?;
    let series = integrate_characteristic(&datum, horizon, &OracleOptions::with_tol(tol))
        .map_err(|e| e.to_string())?;

    let file = fs::File::create(&out).map_err(|e| format!("{}: {e}", out.display()))?;
    let mut w = BufWriter::new(file);
    series
        .write_csv(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| format!("{}: {e}", out.display()))?;

    let meta_path = out.with_extension("meta.json");
    let file = fs::File::create(&meta_path).map_err(|e| format!("{}: {e}", meta_path.display()))?;
    let mut w = BufWriter::new(file);
    series
        .write_meta_json(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| format!("{}: {e}", meta_path.display()))?;

    let outcome = match series.meta.outcome {
        SeriesOutcome::Completed => format!("completed to t = {horizon:.6}"),
        SeriesOutcome::GradientExplosion { t } => format!("gradients exploded at t = {t:.6}"),
    };
    let zeros = if series.meta.q_zeros.is_empty() {
        "none".to_string()
    } else {
        series.meta.q_zeros.iter().map(|t| format!("{t:.6}")).collect::<Vec<_>>().join(" ")
    };
    println!(
        "simulate: {outcome}; q zeros: {zeros}; {} samples; wrote {} and {}",
        series.samples.len(),
        out.display(),
        meta_path.display()
    );
    Ok(())
}

fn run_profile(args: ProfileArgs, cfg: Option<&ConfigFile>) -> Result<(), String> {
    if let Some(c) = cfg {
        c.check_keys(&["gaussian", "table", "r-max", "r-step", "out"])?;
    }
    let gaussian = resolve_typed(cfg, args.gaussian, "gaussian", parse_f64)?;
    let table = resolve_typed(cfg, args.table, "table", parse_path)?;
    let r_max = resolve_typed(cfg, args.r_max, "r-max", parse_f64)?;
    let r_step = resolve_typed(cfg, args.r_step, "r-step", parse_f64)?;
    let out = require(
        resolve_typed(cfg, args.out, "out", parse_path)?,
        "--out (or config key 'out')",
    )?;
    let (profile, grid, label) = match (gaussian, table) {
        (Some(a), None) => {
            let grid = RadialGrid::uniform(0.0, r_max.unwrap_or(6.0), r_step.unwrap_or(0.05))
                .map_err(|e| e.to_string())?;
            let profile = ProfileSpec::gaussian(a).map_err(|e| e.to_string())?;
            (profile, grid, format!("gaussian a = {a}"))
        }
        (None, Some(path)) => {
            if r_max.is_some() || r_step.is_some() {
                return Err("--r-max and --r-step apply to --gaussian only; \
                            a table profile is evaluated at its own sample radii"
                    .into());
            }
            let text =
                fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let tab = TabulatedProfile::parse_csv(&text)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            let grid = RadialGrid::new(tab.samples.iter().map(|s| s.0).collect())
                .map_err(|e| e.to_string())?;
            (ProfileSpec::Tabulated(tab), grid, format!("table {}", path.display()))
        }
        (Some(_), Some(_)) => return Err("choose exactly one of --gaussian and --table".into()),
        (None, None) => {
            return Err("missing profile source: --gaussian A or --table FILE \
                        (or config keys 'gaussian'/'table')"
                .into())
        }
    };
    let scan = scan_radial(&profile, &grid, ScanMethod::Closed).map_err(|e| e.to_string())?;
    let mut csv = String::from("r0,F0,G0,u0,v0,n0,q_star,verdict,t_star\n");
    for p in &scan.points {
        let d = datum_at(&profile, p.r0).map_err(|e| e.to_string())?;
        let t = p.t_star.map(g17).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{t}\n",
            g17(p.r0),
            g17(d.f0),
            g17(d.g0),
            g17(d.u0),
            g17(d.v0),
            g17(d.initial_density()),
            g17(p.q_star),
            p.class
        ));
    }
    fs::write(&out, csv).map_err(|e| format!("{}: {e}", out.display()))?;
    let worst = scan
        .points
        .iter()
        .min_by(|a, b| a.q_star.total_cmp(&b.q_star))
        .expect("profile grids are nonempty");
    println!(
        "profile: {label}: global {} over {} radii (worst q* = {:.6} at r0 = {}); wrote {}",
        scan.global,
        scan.points.len(),
        worst.q_star,
        worst.r0,
        out.display()
    );
    Ok(())
}

fn run_scan(args: ScanArgs, cfg: Option<&ConfigFile>) -> Result<(), String> {
    if let Some(c) = cfg {
        c.check_keys(&["plane", "x", "y", "method", "out"])?;
    }
    let plane = require(
        resolve_typed(cfg, args.plane, "plane", parse_plane)?,
        "--plane (or config key 'plane')",
    )?;
    let x = require(resolve_parsed(cfg, args.x.as_deref(), "x", parse_axis)?, "--x (or config key 'x')")?;
    let y = require(resolve_parsed(cfg, args.y.as_deref(), "y", parse_axis)?, "--y (or config key 'y')")?;
    let method =
        resolve_typed(cfg, args.method, "method", parse_method)?.unwrap_or(MethodArg::Closed);
    let out = require(
        resolve_typed(cfg, args.out, "out", parse_path)?,
        "--out (or config key 'out')",
    )?;
    let request = ScanRequest::new(plane.into(), x, y, method.into()).map_err(|e| e.to_string())?;
    let result = scan_plane(&request).map_err(|e| e.to_string())?;
    let summary_path = write_plane_artifacts(&result, &out)?;
    println!(
        "scan: {} {}; wrote {} and {}",
        plane_name(plane),
        scan_summary_line(&result),
        out.display(),
        summary_path.display()
    );
    Ok(())
}

fn run_figure(args: FigureArgs, cfg: Option<&ConfigFile>) -> Result<(), String> {
    if let Some(c) = cfg {
        c.check_keys(&["which", "out"])?;
    }
    let which = require(
        resolve_typed(cfg, args.which, "which", parse_which)?,
        "--which (or config key 'which')",
    )?;
    let out = require(
        resolve_typed(cfg, args.out, "out", parse_path)?,
        "--out (or config key 'out')",
    )?;
    let (name, request) = match which {
        WhichArg::Fig1Left => (
            "fig1-left",
            ScanRequest::square(
                PlaneKind::ZeroVelocity,
                (-1.0, 0.24),
                (-2.0, 2.0),
                200,
                ScanMethod::Oracle,
            ),
        ),
        WhichArg::Fig1Right => (
            "fig1-right",
            ScanRequest::square(
                PlaneKind::ZeroField,
                (-2.0, 2.0),
                (-2.0, 2.0),
                200,
                ScanMethod::Oracle,
            ),
        ),
    };
    let result = scan_plane(&request.map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let summary_path = write_plane_artifacts(&result, &out)?;
    println!(
        "figure {name}: {}; wrote {} and {}",
        scan_summary_line(&result),
        out.display(),
        summary_path.display()
    );
    Ok(())
}

fn run_verify(args: VerifyArgs, cfg: Option<&ConfigFile>) -> Result<ExitCode, String> {
    if let Some(c) = cfg {
        c.check_keys(&["seed", "cases", "out"])?;
    }
    let seed = resolve_typed(cfg, args.seed, "seed", parse_u64)?.unwrap_or(42);
    let cases = resolve_typed(cfg, args.cases, "cases", parse_usize)?.unwrap_or(1000);
    if cases == 0 {
        return Err("cases must be at least 1".into());
    }
    let out = resolve_typed(cfg, args.out, "out", parse_path)?;
    let options = VerifyOptions { seed, n_cases: cases, ..VerifyOptions::default() };
    let report = run_with_options(&options);
    print!("{}", report.render_text());
    if let Some(path) = out {
        let pretty = serde_json::to_string_pretty(&report.to_json())
            .expect("report serialization cannot fail");
        fs::write(&path, pretty + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

/// Writes the grid CSV to `out` and the summary JSON next to it, returning
/// the summary path.
fn write_plane_artifacts(result: &ScanResult, out: &Path) -> Result<PathBuf, String> {
    fs::write(out, result.to_csv()).map_err(|e| format!("{}: {e}", out.display()))?;
    let summary_path = out.with_extension("summary.json");
    let pretty = serde_json::to_string_pretty(&result.summary_json())
        .expect("summary serialization cannot fail");
    fs::write(&summary_path, pretty + "\n")
        .map_err(|e| format!("{}: {e}", summary_path.display()))?;
    Ok(summary_path)
}

fn scan_summary_line(result: &ScanResult) -> String {
    let mut line = format!(
        "{}x{} cells: smooth {} / blow-up {} / marginal {}",
        result.request.x.n,
        result.request.y.n,
        result.n_smooth,
        result.n_blow_up,
        result.n_marginal
    );
    if result.request.method == ScanMethod::Both {
        line.push_str(&format!(" / disagreements {}", result.disagreements));
    }
    if let Ok(fit) = fit_frontier(result) {
        line.push_str(&format!(
            "; frontier y = {:.4}*x + {:.4} (residual {:.2} cells)",
            fit.slope, fit.intercept, fit.max_residual_cells
        ));
    }
    line
}

/// `F0,G0,u0,v0` with an optional fifth component `r0`.
fn parse_datum_list(s: &str) -> Result<(f64, f64, f64, f64, Option<f64>), String> {
    let values = s.split(',').map(parse_f64).collect::<Result<Vec<_>, _>>()?;
    match values.as_slice() {
        [f0, g0, u0, v0] => Ok((*f0, *g0, *u0, *v0, None)),
        [f0, g0, u0, v0, r0] => Ok((*f0, *g0, *u0, *v0, Some(*r0))),
        other => Err(format!(
            "expected 4 or 5 comma-separated values (F0,G0,u0,v0[,r0]), got {}",
            other.len()
        )),
    }
}

fn build_datum(
    (f0, g0, u0, v0, r0_in_datum): (f64, f64, f64, f64, Option<f64>),
    r0_flag: Option<f64>,
) -> Result<InitialDatum, String> {
    let r0 = match (r0_in_datum, r0_flag) {
        (Some(_), Some(_)) => {
            return Err("r0 given both as the fifth datum component and via --r0".into())
        }
        (Some(r), None) | (None, Some(r)) => r,
        (None, None) => 1.0,
    };
    InitialDatum::with_r0(r0, f0, g0, u0, v0).map_err(|e| e.to_string())
}

fn parse_tol(s: &str) -> Result<Tolerances, String> {
    let values = s.split(',').map(parse_f64).collect::<Result<Vec<_>, _>>()?;
    let [abs, rel] = values.as_slice() else {
        return Err(format!("expected ABS,REL (two comma-separated values), got {}", values.len()));
    };
    let tol = Tolerances::new(*abs, *rel);
    if !tol.is_valid() {
        return Err(format!("tolerances {abs},{rel} must be positive and finite"));
    }
    Ok(tol)
}

fn parse_axis(s: &str) -> Result<AxisSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(format!("expected LO:HI:N, got '{s}'"));
    };
    let (lo, hi) = (parse_f64(lo)?, parse_f64(hi)?);
    let n = n
        .trim()
        .parse::<usize>()
        .map_err(|_| format!("'{}' is not a point count", n.trim()))?;
    AxisSpec::new(lo, hi, n).map_err(|e| e.to_string())
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("'{}' is not a number", s.trim()))
}

fn parse_u64(s: &str) -> Result<u64, String> {
    s.trim().parse::<u64>().map_err(|_| format!("'{}' is not a seed", s.trim()))
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim().parse::<usize>().map_err(|_| format!("'{}' is not a count", s.trim()))
}

fn parse_path(s: &str) -> Result<PathBuf, String> {
    Ok(PathBuf::from(s))
}

fn parse_method(s: &str) -> Result<MethodArg, String> {
    MethodArg::from_str(s, true)
}

fn parse_plane(s: &str) -> Result<PlaneArg, String> {
    PlaneArg::from_str(s, true)
}

fn parse_which(s: &str) -> Result<WhichArg, String> {
    WhichArg::from_str(s, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn datum_list_accepts_four_or_five_values() {
        assert_eq!(parse_datum_list("0,0,0,0.6").unwrap(), (0.0, 0.0, 0.0, 0.6, None));
        assert_eq!(
            parse_datum_list("0.1, -0.2, 0.3, -0.4, 2.5").unwrap(),
            (0.1, -0.2, 0.3, -0.4, Some(2.5))
        );
        assert!(parse_datum_list("1,2,3").unwrap_err().contains("got 3"));
        assert!(parse_datum_list("1,2,x,4").unwrap_err().contains("not a number"));
    }

    #[test]
    fn r0_conflict_is_rejected() {
        let err = build_datum((0.0, 0.0, 0.0, 0.0, Some(2.0)), Some(3.0)).unwrap_err();
        assert!(err.contains("both"), "{err}");
        let d = build_datum((0.0, 0.1, 0.0, 0.0, Some(2.0)), None).unwrap();
        assert_eq!(d.r0, 2.0);
        let d = build_datum((0.0, 0.1, 0.0, 0.0, None), None).unwrap();
        assert_eq!(d.r0, 1.0);
    }

    #[test]
    fn tol_needs_exactly_two_positive_values() {
        let t = parse_tol("1e-9,1e-8").unwrap();
        assert_eq!((t.abs, t.rel), (1e-9, 1e-8));
        assert!(parse_tol("1e-9").unwrap_err().contains("two"));
        assert!(parse_tol("0,1e-8").unwrap_err().contains("positive"));
    }

    #[test]
    fn axis_parses_ordered_ranges_only() {
        let a = parse_axis("-2:2:100").unwrap();
        assert_eq!((a.lo, a.hi, a.n), (-2.0, 2.0, 100));
        assert!(parse_axis("1:2").unwrap_err().contains("LO:HI:N"));
        assert!(parse_axis("2:1:50").unwrap_err().contains("ordered"));
        assert!(parse_axis("1:2:x").unwrap_err().contains("point count"));
    }

    #[test]
    fn enum_values_parse_case_insensitively() {
        assert_eq!(parse_method("ORACLE").unwrap(), MethodArg::Oracle);
        assert_eq!(parse_plane("zero-field").unwrap(), PlaneArg::ZeroField);
        assert_eq!(parse_which("fig1-left").unwrap(), WhichArg::Fig1Left);
        assert!(parse_method("fastest").is_err());
    }
}
