// Copyright 2026 The zeno Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! ```text
//! zeno run <config.json> [--out FILE] [--format csv|json] [--jobs N]
//! zeno validate <config.json>
//! zeno kernel <config.json> --range a:b:n [--out FILE]
//! zeno trace <config.json> --quantity F|D --horizon T [--samples N] [--out FILE]
//! ```
//!
//! Exit codes: 0 success, 1 some rows (or the requested computation)
//! failed, 2 configuration, usage or I/O error.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::scenarios::{amplitude_trace, analytic_gamma, build_analytic, dissipation, dynamic_gamma};
use crate::spectral::DissipationKernel;
use config::{ConfigError, Format, Point, Routes, SweepConfig};
use report::{Row, STATUS_OK};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ROW_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "zeno", version, about = "Decay constants under dissipation of the final decay state")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Quantity {
    /// No-decay amplitude F(t)
    #[value(name = "F")]
    Amplitude,
    /// Dissipation function D(tau)
    #[value(name = "D")]
    Dissipation,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the sweep and write the report
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Rows evaluated in parallel (default: available cores)
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check a configuration without running it
    Validate { config: PathBuf },
    /// Sample the scenario's dissipation kernel
    Kernel {
        config: PathBuf,
        /// Grid as start:stop:count
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample F(t) or D(tau) of the scenario's finite model
    Trace {
        config: PathBuf,
        #[arg(long, value_enum)]
        quantity: Quantity,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Evaluates one sweep point on the configured routes.
pub fn evaluate(point: &Point, cfg: &SweepConfig) -> Row {
    let mut row = Row {
        sweep_param: cfg.sweep.as_ref().map(|s| s.parameter.clone()).unwrap_or_default(),
        sweep_value: point.value,
        gamma0: Some(point.scenario.gamma0()),
        status: STATUS_OK.into(),
        ..Row::default()
    };
    let mut notes: Vec<String> = Vec::new();
    let mut failure: Option<(&'static str, String)> = None;

    if cfg.routes.analytic() {
        match analytic_gamma(&point.scenario) {
            Ok((r, inputs)) => {
                row.gamma_analytic = Some(r.gamma);
                row.quadrature_error = r.quadrature_error;
                row.normalization_defect = Some(inputs.kernel.normalization_defect());
                notes.extend(r.warnings);
            }
            Err(e) => failure = Some((e.code(), e.to_string())),
        }
    }
    if cfg.routes.dynamic() {
        match dynamic_gamma(&point.scenario, &cfg.dynamic_controls(), row.gamma_analytic) {
            Ok(o) => {
                let d = &o.fit.diagnostics;
                row.gamma_dynamic = Some(o.result.gamma);
                row.im_gamma_dynamic = Some(d.rate.im);
                row.fit_t_start = Some(d.window.start);
                row.fit_t_end = Some(d.window.end);
                row.fit_residual = Some(d.residual_rms);
                row.norm_drift = Some(o.norm_drift);
                notes.extend(o.result.warnings);
            }
            Err(e) => {
                failure.get_or_insert((e.code(), e.to_string()));
            }
        }
    }

    let gamma0 = point.scenario.gamma0();
    row.ratio = row
        .gamma_analytic
        .or(row.gamma_dynamic)
        .filter(|_| gamma0 > 0.0)
        .map(|g| g / gamma0);
    if let (Some(a), Some(d)) = (row.gamma_analytic, row.gamma_dynamic) {
        if a > 0.0 {
            row.route_discrepancy = Some((d - a).abs() / a);
        }
    }

    let mut seen = Vec::new();
    for n in notes {
        if !seen.contains(&n) {
            seen.push(n);
        }
    }
    if let Some((code, message)) = failure {
        let value = row.sweep_value;
        row = Row {
            sweep_param: row.sweep_param,
            sweep_value: value,
            status: code.to_string(),
            ..Row::default()
        };
        seen.push(message);
    }
    row.diagnostics = seen.join(";");
    row
}

/// Evaluates every sweep point with at most `jobs` threads; rows come back
/// in sweep order.
pub fn run(cfg: &SweepConfig, jobs: usize) -> Vec<Row> {
    let points = cfg.points();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build();
    match pool {
        Ok(pool) => pool.install(|| points.par_iter().map(|p| evaluate(p, cfg)).collect()),
        Err(_) => points.iter().map(|p| evaluate(p, cfg)).collect(),
    }
}

pub fn write_report<W: Write>(out: W, rows: &[Row], routes: Routes, format: Format) -> io::Result<()> {
    match format {
        Format::Csv => report::write_csv(out, rows, routes),
        Format::Json => report::write_json(out, rows, routes),
    }
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(path: &Path) -> Result<SweepConfig, i32> {
    SweepConfig::from_path(path).map_err(|e| {
        eprintln!("config error: {e}");
        EXIT_CONFIG
    })
}

fn parse_range(text: &str) -> Result<(f64, f64, usize), ConfigError> {
    let bad = || ConfigError::Field {
        path: "--range".into(),
        message: format!("expected start:stop:count, got {text:?}"),
    };
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite() && b >= a && n >= 1) {
        return Err(bad());
    }
    Ok((a, b, n))
}

fn cmd_run(config: &Path, out: Option<PathBuf>, format: Option<Format>, jobs: Option<usize>) -> i32 {
    let cfg = match load(config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let rows = run(&cfg, jobs);
    let format = format.unwrap_or(cfg.output.format);
    let target = out.or_else(|| cfg.output.path.clone());
    let written = open_output(target.as_deref()).and_then(|mut w| {
        write_report(&mut w, &rows, cfg.routes, format)?;
        w.flush()
    });
    if let Err(e) = written {
        eprintln!("write error: {e}");
        return EXIT_CONFIG;
    }
    if rows.iter().all(Row::is_ok) {
        EXIT_OK
    } else {
        EXIT_ROW_FAILURE
    }
}

fn cmd_validate(config: &Path) -> i32 {
    match load(config) {
        Ok(cfg) => {
            println!("ok: {} {} row(s)", cfg.scenario.kind(), cfg.points().len());
            EXIT_OK
        }
        Err(code) => code,
    }
}

fn cmd_kernel(config: &Path, range: &str, out: Option<PathBuf>) -> i32 {
    let cfg = match load(config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let (a, b, n) = match parse_range(range) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("usage error: {e}");
            return EXIT_CONFIG;
        }
    };
    let inputs = match build_analytic(&cfg.scenario) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ROW_FAILURE;
        }
    };
    let result = open_output(out.as_deref()).and_then(|w| {
        let mut w = csv::Writer::from_writer(w);
        match &inputs.kernel {
            DissipationKernel::Dirac => {
                w.write_record(["atom_epsilon", "atom_weight"])?;
                w.write_record(["0", "1"])?;
            }
            DissipationKernel::DoubleDelta { rabi } => {
                w.write_record(["atom_epsilon", "atom_weight"])?;
                w.write_record([report::format_float(-0.5 * rabi), "0.5".into()])?;
                w.write_record([report::format_float(0.5 * rabi), "0.5".into()])?;
            }
            k => {
                w.write_record(["epsilon", "kernel"])?;
                for j in 0..n {
                    let eps = if n == 1 { a } else { a + (b - a) * j as f64 / (n - 1) as f64 };
                    let v = k.eval(eps).unwrap_or(f64::NAN);
                    w.write_record([report::format_float(eps), report::format_float(v)])?;
                }
            }
        }
        w.flush()
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("write error: {e}");
            EXIT_CONFIG
        }
    }
}

fn cmd_trace(config: &Path, quantity: Quantity, horizon: f64, samples: Option<usize>, out: Option<PathBuf>) -> i32 {
    let cfg = match load(config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if !(horizon > 0.0 && horizon.is_finite()) {
        eprintln!("usage error: --horizon must be > 0");
        return EXIT_CONFIG;
    }
    let mut controls = cfg.dynamic_controls();
    if let Some(s) = samples {
        controls.samples = s.max(2);
    }
    let (label, times, values) = match quantity {
        Quantity::Amplitude => match amplitude_trace(&cfg.scenario, &controls, horizon) {
            Ok((f, drift, _)) => {
                eprintln!("norm_drift={}", report::format_float(drift));
                ("F", f.times, f.values)
            }
            Err(e) => {
                eprintln!("error ({}): {e}", e.code());
                return EXIT_ROW_FAILURE;
            }
        },
        Quantity::Dissipation => match dissipation(&cfg.scenario, &controls, horizon) {
            Ok(d) => {
                if let Some(dev) = d.nonstationarity {
                    eprintln!("nonstationarity={}", report::format_float(dev));
                }
                ("D", d.trace.times().to_vec(), d.trace.values().to_vec())
            }
            Err(e) => {
                eprintln!("error ({}): {e}", e.code());
                return EXIT_ROW_FAILURE;
            }
        },
    };
    let result = open_output(out.as_deref()).and_then(|w| {
        let mut w = csv::Writer::from_writer(w);
        let t = if label == "F" { "t" } else { "tau" };
        w.write_record([t, "re", "im", "abs"])?;
        for (x, v) in times.iter().zip(&values) {
            w.write_record([
                report::format_float(*x),
                report::format_float(v.re),
                report::format_float(v.im),
                report::format_float(v.norm()),
            ])?;
        }
        w.flush()
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("write error: {e}");
            EXIT_CONFIG
        }
    }
}

/// Parses `args` (including the program name) and runs the command;
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Run {
            config,
            out,
            format,
            jobs,
        } => cmd_run(&config, out, format, jobs),
        Command::Validate { config } => cmd_validate(&config),
        Command::Kernel { config, range, out } => cmd_kernel(&config, &range, out),
        Command::Trace {
            config,
            quantity,
            horizon,
            samples,
            out,
        } => cmd_trace(&config, quantity, horizon, samples, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(routes: &str, values: &str) -> SweepConfig {
        SweepConfig::from_json(&format!(
            r#"{{"schema_version": 1,
                "scenario": {{"kind": "rabi_drive",
                    "m_y": {{"kind": "power_law", "amplitude": 1, "exponent": 3, "support": [0, 2]}},
                    "omega_f": 1, "omega": 0.2, "omega_21": 4}},
                "sweep": {{"parameter": "rabi.omega", "values": {values}}},
                "routes": "{routes}"}}"#
        ))
        .unwrap()
    }

    #[test]
    fn analytic_rabi_sweep_ratios() {
        let rows = run(&cfg("analytic", "[0.1, 0.2, 0.4]"), 2);
        let ratios: Vec<f64> = rows.iter().map(|r| r.ratio.unwrap()).collect();
        for (r, e) in ratios.iter().zip([1.0075, 1.03, 1.12]) {
            assert!((r - e).abs() < 1e-12, "{r} vs {e}");
        }
        assert!(rows.iter().all(|r| r.is_ok() && r.gamma_dynamic.is_none() && r.fit_t_start.is_none()));
        assert_eq!(rows[0].normalization_defect, Some(0.0));
    }

    #[test]
    fn failing_dynamic_route_is_recorded_in_row() {
        let mut c = cfg("both", "[0.2]");
        c.dynamic = Some(crate::scenarios::DynamicControls {
            n_y: 100,
            dimension_cap: 10,
            ..Default::default()
        });
        let rows = run(&c, 1);
        assert_eq!(rows[0].status, "dimension_over_budget");
        assert!(rows[0].gamma_analytic.is_none() && rows[0].gamma0.is_none());
        assert!(rows[0].diagnostics.contains("exceeds cap"));
    }

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("-1:1:5").unwrap(), (-1.0, 1.0, 5));
        assert!(parse_range("1:0:5").is_err());
        assert!(parse_range("1:2").is_err());
    }

    #[test]
    fn usage_errors_exit_with_config_code() {
        assert_eq!(main_with_args(["zeno", "frobnicate"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["zeno", "validate", "/nonexistent/config.json"]), EXIT_CONFIG);
    }
}
