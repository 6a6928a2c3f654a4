//! Command-line front end for the verification engine: run residual checks
//! on catalog examples or user description files, sweep parametric families
//! for residual minima, and emit machine-readable reports.

use std::path::PathBuf;
use std::process::ExitCode;

use bitension_core::catalog::{self, ExampleSpec, ExpectedValue};
use bitension_core::immersion::Immersion;
use bitension_core::verify::{
    self, CheckId, CheckOptions, ResidualReport, ScanResidual, Verdict, VerifyError,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "bitension-lab",
    version,
    about = "Numerical verification of tension, bitension and stress-energy identities on surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run residual checks on a catalog example or description file
    Verify {
        /// Catalog example name (or a file path together with --spec)
        target: String,
        /// Treat TARGET as a surface description file
        #[arg(long)]
        spec: bool,
        /// Parameter override, repeatable: --param r=0.75
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// `all` or a comma list: tau2,hilbert,lemma,prop2,thm1,thm2,thm3,prop3,s2form
        #[arg(long, default_value = "all")]
        checks: String,
        /// Pointwise sampling grid
        #[arg(long, default_value = "24x24", value_name = "NXxNY")]
        grid: String,
        /// Quadrature grid for integral checks
        #[arg(long = "quad-grid", default_value = "64x64", value_name = "NXxNY")]
        quad_grid: String,
        /// Jet order override; must meet every selected check's minimum
        #[arg(long = "jet-order")]
        jet_order: Option<usize>,
        /// Multiplier applied to every check's default tolerance
        #[arg(long, default_value_t = 1.0)]
        tol: f64,
        /// Ambient curvature bound used by the shape-operator bound check
        #[arg(long, default_value_t = 1.0)]
        k0: f64,
        /// Write a machine report here (summary always goes to stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Format of the --out report
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Sweep a family parameter and locate residual minima
    Scan {
        /// Parametric catalog example, e.g. small-sphere-S3
        target: String,
        /// Family parameter to sweep
        #[arg(long, default_value = "r")]
        param: String,
        /// Sweep range as lo:hi
        #[arg(long, value_name = "LO:HI")]
        range: String,
        /// Number of equally spaced samples (endpoints included)
        #[arg(long, default_value_t = 33)]
        samples: usize,
        /// Residual to record: tau2 | prop2 | normal_eq
        #[arg(long, default_value = "tau2")]
        residual: String,
        /// Pointwise sampling grid per family member
        #[arg(long, default_value = "12x12", value_name = "NXxNY")]
        grid: String,
        /// Write the sweep here (summary always goes to stdout)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Format of the --out report
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// List catalog entries with their expected-property tables
    List,
    /// Explain what a check verifies
    Describe {
        /// Check name, e.g. tau2
        check: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// BITENSIONLAB_THREADS caps the rayon pool; 0 or unset means automatic.
fn configure_threads() {
    if let Ok(v) = std::env::var("BITENSIONLAB_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(0) => {}
            Ok(n) => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            Err(_) => eprintln!("warning: ignoring BITENSIONLAB_THREADS={v}: not an integer"),
        }
    }
}

/// Write to stdout, silently tolerating a closed pipe (e.g. `list | head`).
fn emit(s: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(s.as_bytes());
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Verify {
            target,
            spec,
            params,
            checks,
            grid,
            quad_grid,
            jet_order,
            tol,
            k0,
            out,
            format,
        } => {
            let selected = parse_checks(&checks)?;
            let grid = parse_grid(&grid)?;
            let quad_grid = parse_grid(&quad_grid)?;
            if let Some(n) = jet_order {
                for c in &selected {
                    if n < c.min_order() {
                        return Err(format!(
                            "jet order {n} is below the minimum {} required by `{}`",
                            c.min_order(),
                            c.name()
                        ));
                    }
                }
            }
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(format!("tolerance factor must be positive, got {tol}"));
            }
            let example = resolve_target(&target, spec, &params)?;
            let opts = CheckOptions {
                grid,
                quad_grid,
                jet_order,
                tol_factor: tol,
                k0,
                ..Default::default()
            };
            let im = example
                .immersion()
                .map_err(|e| format!("cannot build `{}`: {e}", example.name))?;
            let reports = verify::run_suite(&im, &example.name, &selected, &opts)
                .map_err(|e| format!("verification aborted: {e}"))?;
            print_verify_summary(&example, &reports);
            if let Some(path) = &out {
                write_report(path, format, &verify_json(&reports)?, &verify_csv(&reports), || {
                    verify_text(&example, &reports)
                })?;
            }
            let failed = reports.iter().any(|r| r.verdict.is_failure());
            Ok(ExitCode::from(if failed { 1 } else { 0 }))
        }
        Command::Scan {
            target,
            param,
            range,
            samples,
            residual,
            grid,
            out,
            format,
        } => {
            let residual = ScanResidual::from_name(&residual)
                .ok_or_else(|| format!("unknown scan residual `{residual}`"))?;
            let grid = parse_grid(&grid)?;
            let (lo, hi) = parse_range(&range)?;
            let opts = CheckOptions {
                grid,
                ..Default::default()
            };
            let family = |v: f64| -> Result<Immersion, VerifyError> {
                let spec = catalog::get_example_with(&target, &[(param.as_str(), v)])
                    .map_err(|e| VerifyError::BadParameter(e.to_string()))?;
                spec.immersion().map_err(VerifyError::from)
            };
            let report = verify::scan_family(family, (lo, hi), samples, residual, &opts)
                .map_err(|e| format!("scan aborted: {e}"))?;
            print_scan_summary(&target, &param, &report);
            if let Some(path) = &out {
                let json = serde_json::to_string_pretty(&report)
                    .map_err(|e| format!("cannot serialise report: {e}"))?
                    + "\n";
                write_report(path, format, &json, &scan_csv(&report), || {
                    scan_text(&target, &param, &report)
                })?;
            }
            Ok(ExitCode::from(0))
        }
        Command::List => {
            print_catalog();
            Ok(ExitCode::from(0))
        }
        Command::Describe { check } => {
            let id = CheckId::from_name(&check).ok_or_else(|| {
                format!(
                    "unknown check `{check}`; known checks: {}",
                    check_names().join(", ")
                )
            })?;
            emit(&format!(
                "{}: {}\nminimum jet order {}; default tolerance {:e}\n",
                id.name(),
                id.describe(),
                id.min_order(),
                id.default_tolerance()
            ));
            Ok(ExitCode::from(0))
        }
    }
}

// ---------------------------------------------------------------------------
// Argument parsing helpers
// ---------------------------------------------------------------------------

fn check_names() -> Vec<&'static str> {
    verify::ALL_CHECKS.iter().map(|c| c.name()).collect()
}

fn parse_checks(s: &str) -> Result<Vec<CheckId>, String> {
    if s.trim() == "all" {
        return Ok(verify::ALL_CHECKS.to_vec());
    }
    s.split(',')
        .map(|t| {
            let t = t.trim();
            CheckId::from_name(t).ok_or_else(|| {
                format!("unknown check `{t}`; known checks: {}", check_names().join(", "))
            })
        })
        .collect()
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid `{s}` is not of the form NXxNY"))?;
    let nx: usize = a.trim().parse().map_err(|_| format!("bad grid size `{a}`"))?;
    let ny: usize = b.trim().parse().map_err(|_| format!("bad grid size `{b}`"))?;
    if nx == 0 || ny == 0 {
        return Err(format!("grid `{s}` must be at least 1x1"));
    }
    Ok((nx, ny))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("range `{s}` is not of the form LO:HI"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad range bound `{lo}`"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad range bound `{hi}`"))?;
    Ok((lo, hi))
}

fn parse_params(params: &[String]) -> Result<Vec<(String, f64)>, String> {
    params
        .iter()
        .map(|p| {
            let (name, value) = p
                .split_once('=')
                .ok_or_else(|| format!("parameter `{p}` is not of the form NAME=VALUE"))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| format!("parameter value `{value}` is not a number"))?;
            Ok((name.trim().to_string(), v))
        })
        .collect()
}

fn resolve_target(target: &str, spec: bool, params: &[String]) -> Result<ExampleSpec, String> {
    if spec {
        if !params.is_empty() {
            return Err("description files take no --param overrides".into());
        }
        return catalog::load_spec_file(target).map_err(|e| e.to_string());
    }
    let owned = parse_params(params)?;
    let borrowed: Vec<(&str, f64)> = owned.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    catalog::get_example_with(target, &borrowed).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// Output assembly
// ---------------------------------------------------------------------------

fn verdict_label(r: &ResidualReport) -> String {
    match r.verdict {
        Verdict::Pass => "pass".into(),
        Verdict::Fail => "FAIL".into(),
        Verdict::Degenerate => "pass (degenerate)".into(),
        Verdict::Skipped => "skipped".into(),
    }
}

fn print_verify_summary(example: &ExampleSpec, reports: &[ResidualReport]) {
    let mut s = format!("example: {}", example.name);
    if !example.params.is_empty() {
        let ps: Vec<String> = example
            .params
            .iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect();
        s.push_str(&format!(" [{}]", ps.join(", ")));
    }
    s.push('\n');
    for r in reports {
        s.push_str(&format!(
            "  {:<8} {:<18} max {:.3e}  mean {:.3e}  tol {:.1e}",
            r.check,
            verdict_label(r),
            r.max_residual,
            r.mean_residual,
            r.tolerance
        ));
        if let Some(note) = &r.note {
            s.push_str(&format!("  ({note})"));
        }
        s.push('\n');
    }
    let failed = reports.iter().filter(|r| r.verdict.is_failure()).count();
    if failed == 0 {
        s.push_str(&format!("overall: pass ({} checks)\n", reports.len()));
    } else {
        s.push_str(&format!("overall: FAIL ({failed} of {} checks)\n", reports.len()));
    }
    emit(&s);
}

fn verify_text(example: &ExampleSpec, reports: &[ResidualReport]) -> String {
    let mut s = String::new();
    for r in reports {
        s.push_str(&format!(
            "{} {} {} max {} mean {} tol {}\n",
            example.name,
            r.check,
            verdict_label(r),
            r.max_residual,
            r.mean_residual,
            r.tolerance
        ));
    }
    s
}

fn verify_json(reports: &[ResidualReport]) -> Result<String, String> {
    serde_json::to_string_pretty(reports)
        .map(|s| s + "\n")
        .map_err(|e| format!("cannot serialise report: {e}"))
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn verify_csv(reports: &[ResidualReport]) -> String {
    let mut s = String::from("check,example,verdict,max_residual,mean_residual,tolerance,jet_order,note\n");
    for r in reports {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.check,
            csv_quote(&r.example),
            verdict_label(r).replace(' ', "_"),
            r.max_residual,
            r.mean_residual,
            r.tolerance,
            r.jet_order,
            csv_quote(r.note.as_deref().unwrap_or("")),
        ));
    }
    s
}

fn print_scan_summary(target: &str, param: &str, report: &verify::ScanReport) {
    let mut s = format!(
        "scan: {target} over {param}, residual {} at {} samples\n",
        report.residual,
        report.points.len()
    );
    if report.minima.is_empty() {
        s.push_str("no interior minima located\n");
    } else {
        for m in &report.minima {
            s.push_str(&format!(
                "  minimum near {param} = {:.9} with residual {:.3e}\n",
                m.param, m.residual
            ));
        }
    }
    emit(&s);
}

fn scan_text(target: &str, param: &str, report: &verify::ScanReport) -> String {
    let mut s = format!("scan {target} {param} residual {}\n", report.residual);
    for m in &report.minima {
        s.push_str(&format!("minimum {} {}\n", m.param, m.residual));
    }
    s
}

/// Sweep rows followed by the refined minima (also `param,residual` pairs).
fn scan_csv(report: &verify::ScanReport) -> String {
    let mut s = String::from("param,residual\n");
    for p in report.points.iter().chain(report.minima.iter()) {
        s.push_str(&format!("{},{}\n", p.param, p.residual));
    }
    s
}

fn write_report(
    path: &PathBuf,
    format: Format,
    json: &str,
    csv: &str,
    text: impl Fn() -> String,
) -> Result<(), String> {
    let content = match format {
        Format::Json => json.to_string(),
        Format::Csv => csv.to_string(),
        Format::Text => text(),
    };
    std::fs::write(path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn print_catalog() {
    let mut s = String::new();
    for (name, summary) in catalog::EXAMPLES {
        let spec = catalog::get_example(name).expect("catalog entries build");
        s.push_str(&format!("{name}\n  {summary}\n"));
        if !spec.params.is_empty() {
            let ps: Vec<String> = spec
                .params
                .iter()
                .map(|(k, v)| format!("{k} = {v} (default)"))
                .collect();
            s.push_str(&format!("  parameters: {}\n", ps.join(", ")));
        }
        for e in &spec.expected {
            let value = match e.value {
                ExpectedValue::Bool(b) => b.to_string(),
                ExpectedValue::Real(v) => format!("{v}"),
            };
            s.push_str(&format!(
                "    {:<18} {:<8} tol {:e}\n",
                e.property.name(),
                value,
                e.tolerance
            ));
        }
    }
    emit(&s);
}
