//! Command-line front end: reproduce the three reference tables, estimate
//! CVaR from loss data, and run contamination simulations.
//!
//! Exit codes: 0 success, 2 domain or input-data errors, 3 numeric
//! non-convergence, 64 usage errors.

use std::io::Write;

use crate::choquet::{choquet_expected_loss, cvar_quantile_integral, CvarDistortion};
use crate::distributions::{ChiSquareLaw, NormalLaw, UniformLaw};
use crate::empirical::{read_losses_csv, EmpiricalSample, EstimatorMode};
use crate::error::Error;
use crate::heavy_tail::{mixture_cvar_table, spliced_cvar_table};
use crate::measurement_error::worst_case_bound_table;
use crate::montecarlo::error_sensitivity_sweep;
use crate::quadrature::QuadratureConfig;
use crate::report::RiskReport;

const USAGE: &str = "\
shortfall <command> [flags]

Commands:
  table1     worst-case CVaR bounds under additive measurement error
  table2     Pareto-spliced CVaR for chi-square(1) losses
  table3     Huber-mixture CVaR for chi-square(1) losses at one level
  estimate   empirical CVaR from a single-column loss CSV
  choquet    distorted-loss and quantile-integral CVaR of an analytic law
  simulate   contamination sweep of the empirical estimator

Common flags:
  --alpha <p>        confidence level in [0, 1)          (default 0.96)
  --tail-mass <m>    tail mass, alpha = 1 - m; exclusive with --alpha
  --format <f>       csv | markdown | json (default csv; env SHORTFALL_FORMAT)
  --markdown         shorthand for --format markdown
  --seed <n>         master seed                          (default 1)
  --rel-tol <x>      quadrature relative tolerance override
  --abs-tol <x>      quadrature absolute tolerance override

estimate flags:
  --input <path>     loss CSV; single column, 'loss' header optional
  --literal          evaluate the literal printed estimator form
  --strict-header    require the 'loss' header

choquet flags:
  --law <name>       normal | chi2 | uniform              (default normal)

simulate flags:
  --x-law <name>     normal | chi2                        (default normal)
  --v-law <name>     gaussian | uniform | rademacher      (default gaussian)
  --delta-grid <ds>  comma-separated error scales         (default 0,0.05,0.1)
  --n <count>        sample size per replicate            (default 100000)
  --reps <count>     replicates per delta                 (default 1)
";

const USAGE_EXIT: i32 = 64;
const DOMAIN_EXIT: i32 = 2;
const NUMERIC_EXIT: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Csv,
    Markdown,
    Json,
}

#[derive(Debug, Clone)]
struct CliConfig {
    command: String,
    alpha: Option<f64>,
    tail_mass: Option<f64>,
    format: OutputFormat,
    seed: u64,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    input: Option<String>,
    literal: bool,
    strict_header: bool,
    law: String,
    x_law: String,
    v_law: String,
    delta_grid: Vec<f64>,
    n: usize,
    reps: usize,
}

#[derive(Debug)]
struct UsageError(String);

fn parse_args(args: &[String]) -> Result<CliConfig, UsageError> {
    let mut it = args.iter().peekable();
    let command = match it.next() {
        Some(c) if !c.starts_with('-') => c.clone(),
        Some(c) if c == "--help" || c == "-h" => return Err(UsageError(String::new())),
        _ => return Err(UsageError("missing command".to_string())),
    };
    if !matches!(
        command.as_str(),
        "table1" | "table2" | "table3" | "estimate" | "choquet" | "simulate"
    ) {
        return Err(UsageError(format!("unknown command '{command}'")));
    }

    let default_format = match std::env::var("SHORTFALL_FORMAT").ok().as_deref() {
        Some("markdown") => OutputFormat::Markdown,
        Some("json") => OutputFormat::Json,
        _ => OutputFormat::Csv,
    };

    let mut cfg = CliConfig {
        command,
        alpha: None,
        tail_mass: None,
        format: default_format,
        seed: 1,
        rel_tol: None,
        abs_tol: None,
        input: None,
        literal: false,
        strict_header: false,
        law: "normal".to_string(),
        x_law: "normal".to_string(),
        v_law: "gaussian".to_string(),
        delta_grid: vec![0.0, 0.05, 0.1],
        n: 100_000,
        reps: 1,
    };

    fn value<'a>(
        flag: &str,
        it: &mut std::iter::Peekable<std::slice::Iter<'a, String>>,
    ) -> Result<&'a str, UsageError> {
        it.next()
            .map(|s| s.as_str())
            .ok_or_else(|| UsageError(format!("flag {flag} needs a value")))
    }

    fn number(flag: &str, raw: &str) -> Result<f64, UsageError> {
        raw.parse()
            .map_err(|_| UsageError(format!("flag {flag}: '{raw}' is not a number")))
    }

    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--help" | "-h" => return Err(UsageError(String::new())),
            "--alpha" => cfg.alpha = Some(number("--alpha", value("--alpha", &mut it)?)?),
            "--tail-mass" => {
                cfg.tail_mass = Some(number("--tail-mass", value("--tail-mass", &mut it)?)?)
            }
            "--format" => {
                cfg.format = match value("--format", &mut it)? {
                    "csv" => OutputFormat::Csv,
                    "markdown" => OutputFormat::Markdown,
                    "json" => OutputFormat::Json,
                    other => return Err(UsageError(format!("unknown format '{other}'"))),
                }
            }
            "--markdown" => cfg.format = OutputFormat::Markdown,
            "--seed" => {
                cfg.seed = value("--seed", &mut it)?
                    .parse()
                    .map_err(|_| UsageError("--seed needs an unsigned integer".to_string()))?
            }
            "--rel-tol" => cfg.rel_tol = Some(number("--rel-tol", value("--rel-tol", &mut it)?)?),
            "--abs-tol" => cfg.abs_tol = Some(number("--abs-tol", value("--abs-tol", &mut it)?)?),
            "--input" => cfg.input = Some(value("--input", &mut it)?.to_string()),
            "--literal" => cfg.literal = true,
            "--strict-header" => cfg.strict_header = true,
            "--law" => cfg.law = value("--law", &mut it)?.to_string(),
            "--x-law" => cfg.x_law = value("--x-law", &mut it)?.to_string(),
            "--v-law" => cfg.v_law = value("--v-law", &mut it)?.to_string(),
            "--delta-grid" => {
                let raw = value("--delta-grid", &mut it)?;
                let mut grid = Vec::new();
                for part in raw.split(',') {
                    grid.push(number("--delta-grid", part.trim())?);
                }
                cfg.delta_grid = grid;
            }
            "--n" => {
                cfg.n = value("--n", &mut it)?
                    .parse()
                    .map_err(|_| UsageError("--n needs a positive integer".to_string()))?
            }
            "--reps" => {
                cfg.reps = value("--reps", &mut it)?
                    .parse()
                    .map_err(|_| UsageError("--reps needs a positive integer".to_string()))?
            }
            other => return Err(UsageError(format!("unknown flag '{other}'"))),
        }
    }

    if cfg.alpha.is_some() && cfg.tail_mass.is_some() {
        return Err(UsageError(
            "--alpha and --tail-mass are mutually exclusive".to_string(),
        ));
    }
    Ok(cfg)
}

impl CliConfig {
    fn alpha_or(&self, default: f64) -> f64 {
        match (self.alpha, self.tail_mass) {
            (Some(a), _) => a,
            (None, Some(m)) => 1.0 - m,
            (None, None) => default,
        }
    }

    fn quadrature(&self) -> QuadratureConfig<f64> {
        let mut q = QuadratureConfig::default();
        if let Some(r) = self.rel_tol {
            q.rel_tol = r;
        }
        if let Some(a) = self.abs_tol {
            q.abs_tol = a;
        }
        q
    }
}

/// Format with 4 significant digits (the default table precision).
pub fn format_significant(x: f64, sig: u32) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", sig.saturating_sub(1) as usize, 0.0);
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

fn sig4(x: f64) -> String {
    format_significant(x, 4)
}

fn gamma_label(g: f64) -> String {
    if g.is_infinite() {
        "inf".to_string()
    } else if g == g.trunc() {
        format!("{}", g as i64)
    } else {
        format!("{g}")
    }
}

/// A rendered table: column names plus rows of (already formatted or raw)
/// numeric cells.
struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn emit(&self, format: OutputFormat, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            OutputFormat::Csv => {
                writeln!(out, "{}", self.columns.join(","))?;
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|&v| sig4(v)).collect();
                    writeln!(out, "{}", cells.join(","))?;
                }
            }
            OutputFormat::Markdown => {
                writeln!(out, "| {} |", self.columns.join(" | "))?;
                let dashes: Vec<String> = self.columns.iter().map(|_| "---".to_string()).collect();
                writeln!(out, "| {} |", dashes.join(" | "))?;
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|&v| sig4(v)).collect();
                    writeln!(out, "| {} |", cells.join(" | "))?;
                }
            }
            OutputFormat::Json => {
                let objects: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut obj = serde_json::Map::new();
                        for (name, &v) in self.columns.iter().zip(row) {
                            obj.insert(name.clone(), serde_json::json!(v));
                        }
                        serde_json::Value::Object(obj)
                    })
                    .collect();
                writeln!(out, "{}", serde_json::to_string_pretty(&objects)?)?;
            }
        }
        Ok(())
    }
}

fn emit_reports(
    reports: &[RiskReport<f64>],
    format: OutputFormat,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    match format {
        OutputFormat::Csv => {
            writeln!(out, "{}", RiskReport::<f64>::csv_header())?;
            for r in reports {
                let mut pretty = r.clone();
                pretty.value = sig4(r.value).parse().unwrap_or(r.value);
                writeln!(out, "{}", pretty.csv_row())?;
            }
        }
        OutputFormat::Markdown => {
            writeln!(out, "| value | method | alpha | warning |")?;
            writeln!(out, "| --- | --- | --- | --- |")?;
            for r in reports {
                writeln!(
                    out,
                    "| {} | {} | {} | {} |",
                    sig4(r.value),
                    r.method,
                    sig4(r.alpha),
                    r.warning.as_deref().unwrap_or("")
                )?;
            }
        }
        OutputFormat::Json => {
            let objs: Vec<serde_json::Value> = reports.iter().map(|r| r.to_json()).collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&objs)?)?;
        }
    }
    Ok(())
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Domain(_) | Error::Input { .. } => DOMAIN_EXIT,
        Error::NoConvergence { .. }
        | Error::QuadratureNonConvergence { .. }
        | Error::NonIntegrable(_) => NUMERIC_EXIT,
    }
}

fn run_command(
    cfg: &CliConfig,
    out: &mut dyn Write,
) -> Result<(), Error> {
    let quad = cfg.quadrature();
    match cfg.command.as_str() {
        "table1" => {
            let alpha = cfg.alpha_or(0.96);
            let deltas = [0.0, 0.05, 0.10, 0.15, 0.20];
            let ks = [1.0, 1.1, 1.2];
            let cells = worst_case_bound_table(alpha, &deltas, &ks, &quad)?;
            let table = Table {
                columns: vec!["Delta".into(), "K".into(), "upper_bound".into()],
                rows: cells
                    .iter()
                    .map(|c| vec![c.delta_max, c.kurt_max, c.bound])
                    .collect(),
            };
            table.emit(cfg.format, out).map_err(io_error)?;
        }
        "table2" => {
            let alphas = [0.9, 0.95, 0.99];
            let gammas = [2.0, 3.0, 4.0, 5.0, f64::INFINITY];
            let rows = spliced_cvar_table(
                || ChiSquareLaw::<f64>::new(1).expect("1 dof is valid"),
                &alphas,
                &gammas,
                &quad,
            )?;
            let mut columns = vec!["alpha".into(), "quantile".into(), "cvar_base".into()];
            columns.extend(gammas.iter().map(|&g| format!("gamma_{}", gamma_label(g))));
            let table = Table {
                columns,
                rows: rows
                    .iter()
                    .map(|r| {
                        let mut row = vec![r.alpha, r.base_quantile, r.base_cvar];
                        row.extend(r.cells.iter().map(|&(_, v)| v));
                        row
                    })
                    .collect(),
            };
            table.emit(cfg.format, out).map_err(io_error)?;
        }
        "table3" => {
            let alpha = cfg.alpha_or(0.96);
            let epsilons = [0.0, 0.01, 0.1, 0.2, 0.3];
            let gammas = [1.5, 2.0, 3.0, 5.0, f64::INFINITY];
            let rows = mixture_cvar_table(
                || ChiSquareLaw::<f64>::new(1).expect("1 dof is valid"),
                alpha,
                &epsilons,
                &gammas,
                &quad,
            )?;
            let mut columns = vec!["epsilon".into()];
            columns.extend(gammas.iter().map(|&g| format!("gamma_{}", gamma_label(g))));
            let table = Table {
                columns,
                rows: rows
                    .iter()
                    .map(|r| {
                        let mut row = vec![r.epsilon];
                        row.extend(r.cells.iter().map(|&(_, v)| v));
                        row
                    })
                    .collect(),
            };
            table.emit(cfg.format, out).map_err(io_error)?;
        }
        "estimate" => {
            let alpha = cfg.alpha_or(0.96);
            let path = cfg.input.as_deref().ok_or_else(|| {
                Error::domain("estimate needs --input <path> with a loss column")
            })?;
            let losses = read_losses_csv(std::path::Path::new(path), cfg.strict_header)?;
            let sample = EmpiricalSample::new(losses)?;
            let mode = if cfg.literal {
                EstimatorMode::Literal
            } else {
                EstimatorMode::TopBlock
            };
            let report = sample.cvar(alpha, mode)?;
            emit_reports(&[report], cfg.format, out).map_err(io_error)?;
        }
        "choquet" => {
            let alpha = cfg.alpha_or(0.96);
            let phi = CvarDistortion::new(alpha)?;
            let reports = match cfg.law.as_str() {
                "normal" => {
                    let law = NormalLaw::<f64>::standard();
                    vec![
                        choquet_expected_loss(&law, &phi, &quad)?,
                        cvar_quantile_integral(&law, alpha, &quad)?,
                    ]
                }
                "chi2" => {
                    let law = ChiSquareLaw::<f64>::new(1)?;
                    vec![
                        choquet_expected_loss(&law, &phi, &quad)?,
                        cvar_quantile_integral(&law, alpha, &quad)?,
                    ]
                }
                "uniform" => {
                    let law = UniformLaw::new(0.0, 1.0)?;
                    vec![
                        choquet_expected_loss(&law, &phi, &quad)?,
                        cvar_quantile_integral(&law, alpha, &quad)?,
                    ]
                }
                other => {
                    return Err(Error::domain(format!(
                        "unknown law '{other}': expected normal, chi2 or uniform"
                    )))
                }
            };
            emit_reports(&reports, cfg.format, out).map_err(io_error)?;
        }
        "simulate" => {
            let alpha = cfg.alpha_or(0.96);
            if cfg.x_law != "normal" {
                return Err(Error::domain(format!(
                    "unknown x-law '{}': the expansion needs a smooth base (normal)",
                    cfg.x_law
                )));
            }
            let x_law = NormalLaw::<f64>::standard();
            let mut table = Table {
                columns: vec![
                    "delta".into(),
                    "replicate".into(),
                    "empirical_cvar".into(),
                    "expansion_cvar".into(),
                ],
                rows: Vec::new(),
            };
            // One sweep per replicate; replicate r shifts the master seed by r.
            let mut sweep = |v_law: &dyn Fn(u64) -> Result<Vec<crate::montecarlo::SensitivityRow<f64>>, Error>|
             -> Result<(), Error> {
                for rep in 0..cfg.reps {
                    for r in v_law(cfg.seed + rep as u64)? {
                        table.rows.push(vec![
                            r.delta,
                            rep as f64,
                            r.empirical_cvar,
                            r.expansion_cvar,
                        ]);
                    }
                }
                Ok(())
            };
            match cfg.v_law.as_str() {
                "gaussian" => {
                    let v = NormalLaw::<f64>::standard();
                    sweep(&|seed| {
                        error_sensitivity_sweep(&x_law, &v, &cfg.delta_grid, alpha, cfg.n, seed, &quad)
                    })?;
                }
                "uniform" => {
                    let s = 3.0f64.sqrt();
                    let v = UniformLaw::new(-s, s)?;
                    sweep(&|seed| {
                        error_sensitivity_sweep(&x_law, &v, &cfg.delta_grid, alpha, cfg.n, seed, &quad)
                    })?;
                }
                "rademacher" => {
                    return Err(Error::domain(
                        "the two-point error law has no density and cannot back a sampled \
                         scenario; it is available in the expansion accuracy table"
                            .to_string(),
                    ))
                }
                other => return Err(Error::domain(format!("unknown v-law '{other}'"))),
            }
            table.emit(cfg.format, out).map_err(io_error)?;
        }
        _ => unreachable!("command validated during parsing"),
    }
    Ok(())
}

fn io_error(e: std::io::Error) -> Error {
    Error::Input {
        line: 0,
        message: format!("write failed: {e}"),
    }
}

/// Parse and run; returns the process exit code.
pub fn run(args: &[String], out: &mut dyn Write, err_out: &mut dyn Write) -> i32 {
    let cfg = match parse_args(args) {
        Ok(cfg) => cfg,
        Err(UsageError(msg)) => {
            if msg.is_empty() {
                let _ = writeln!(out, "{USAGE}");
                return 0;
            }
            let _ = writeln!(err_out, "error: {msg}\n\n{USAGE}");
            return USAGE_EXIT;
        }
    };
    match run_command(&cfg, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err_out, "error: {e}");
            exit_code_for(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(2.154344350649533, 4), "2.154");
        assert_eq!(format_significant(12.653653, 4), "12.65");
        assert_eq!(format_significant(0.04, 4), "0.04000");
        assert_eq!(format_significant(-3.04009, 4), "-3.040");
        assert_eq!(format_significant(0.0, 4), "0.000");
        assert_eq!(format_significant(f64::INFINITY, 4), "inf");
    }

    #[test]
    fn parse_rejects_unknown_flags_and_commands() {
        assert!(parse_args(&args(&["table2", "--bogus"])).is_err());
        assert!(parse_args(&args(&["frobnicate"])).is_err());
        assert!(parse_args(&args(&[])).is_err());
    }

    #[test]
    fn parse_rejects_alpha_conflict() {
        let e = parse_args(&args(&["table3", "--alpha", "0.9", "--tail-mass", "0.1"]));
        assert!(e.is_err());
    }

    #[test]
    fn tail_mass_maps_to_alpha() {
        let cfg = parse_args(&args(&["table1", "--tail-mass", "0.04"])).unwrap();
        assert!((cfg.alpha_or(0.5) - 0.96).abs() < 1e-15);
    }

    #[test]
    fn estimate_without_input_is_domain_error() {
        let cfg = parse_args(&args(&["estimate", "--alpha", "0.8"])).unwrap();
        let mut out = Vec::new();
        let err = run_command(&cfg, &mut out).unwrap_err();
        assert_eq!(exit_code_for(&err), 2);
    }

    #[test]
    fn gamma_labels() {
        assert_eq!(gamma_label(2.0), "2");
        assert_eq!(gamma_label(1.5), "1.5");
        assert_eq!(gamma_label(f64::INFINITY), "inf");
    }
}
