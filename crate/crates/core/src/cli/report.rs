// Copyright 2026 The zeno Authors
// SPDX-License-Identifier: Apache-2.0

//! Report rows and their CSV / JSON serialization.
//!
//! Column order (route-specific groups appear only when that route ran):
//!
//! ```text
//! sweep_param, sweep_value,
//! [gamma_analytic], [gamma_dynamic], gamma0, ratio, status,
//! [route_discrepancy],                                   (both routes)
//! [quadrature_error, normalization_defect],              (analytic)
//! [im_gamma_dynamic, fit_t_start, fit_t_end, fit_residual, norm_drift], (dynamic)
//! diagnostics
//! ```
//!
//! Floats are written as shortest round-trip decimals; absent values are
//! empty in CSV and `null` in JSON.

use std::io::Write;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use super::config::Routes;

pub const STATUS_OK: &str = "ok";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row {
    pub sweep_param: String,
    pub sweep_value: Option<f64>,
    pub gamma_analytic: Option<f64>,
    pub gamma_dynamic: Option<f64>,
    pub gamma0: Option<f64>,
    pub ratio: Option<f64>,
    pub status: String,
    pub route_discrepancy: Option<f64>,
    pub quadrature_error: Option<f64>,
    pub normalization_defect: Option<f64>,
    pub im_gamma_dynamic: Option<f64>,
    pub fit_t_start: Option<f64>,
    pub fit_t_end: Option<f64>,
    pub fit_residual: Option<f64>,
    pub norm_drift: Option<f64>,
    /// Warnings and error messages, `;`-separated.
    pub diagnostics: String,
}

impl Row {
    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Cell<'a> {
    Text(&'a str),
    Number(Option<f64>),
}

/// Header names for the given routes, in output order.
pub fn columns(routes: Routes) -> Vec<&'static str> {
    let mut c = vec!["sweep_param", "sweep_value"];
    if routes.analytic() {
        c.push("gamma_analytic");
    }
    if routes.dynamic() {
        c.push("gamma_dynamic");
    }
    c.extend(["gamma0", "ratio", "status"]);
    if routes == Routes::Both {
        c.push("route_discrepancy");
    }
    if routes.analytic() {
        c.extend(["quadrature_error", "normalization_defect"]);
    }
    if routes.dynamic() {
        c.extend(["im_gamma_dynamic", "fit_t_start", "fit_t_end", "fit_residual", "norm_drift"]);
    }
    c.push("diagnostics");
    c
}

fn cell<'a>(row: &'a Row, column: &str) -> Cell<'a> {
    use Cell::{Number, Text};
    match column {
        "sweep_param" => Text(&row.sweep_param),
        "sweep_value" => Number(row.sweep_value),
        "gamma_analytic" => Number(row.gamma_analytic),
        "gamma_dynamic" => Number(row.gamma_dynamic),
        "gamma0" => Number(row.gamma0),
        "ratio" => Number(row.ratio),
        "status" => Text(&row.status),
        "route_discrepancy" => Number(row.route_discrepancy),
        "quadrature_error" => Number(row.quadrature_error),
        "normalization_defect" => Number(row.normalization_defect),
        "im_gamma_dynamic" => Number(row.im_gamma_dynamic),
        "fit_t_start" => Number(row.fit_t_start),
        "fit_t_end" => Number(row.fit_t_end),
        "fit_residual" => Number(row.fit_residual),
        "norm_drift" => Number(row.norm_drift),
        "diagnostics" => Text(&row.diagnostics),
        other => unreachable!("unknown column {other}"),
    }
}

/// Shortest decimal that parses back to `x`; exponent form for very small
/// or large magnitudes.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        String::new()
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[Row], routes: Routes) -> std::io::Result<()> {
    let cols = columns(routes);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&cols)?;
    for row in rows {
        let record: Vec<String> = cols
            .iter()
            .map(|c| match cell(row, c) {
                Cell::Text(s) => s.to_string(),
                Cell::Number(v) => v.map(format_float).unwrap_or_default(),
            })
            .collect();
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

struct RowView<'a> {
    row: &'a Row,
    cols: &'a [&'static str],
}

impl Serialize for RowView<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.cols.len()))?;
        for c in self.cols {
            match cell(self.row, c) {
                Cell::Text(t) => map.serialize_entry(c, t)?,
                Cell::Number(v) => map.serialize_entry(c, &v.filter(|x| x.is_finite()))?,
            }
        }
        map.end()
    }
}

struct Rows<'a> {
    rows: &'a [Row],
    cols: Vec<&'static str>,
}

impl Serialize for Rows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows.len()))?;
        for row in self.rows {
            seq.serialize_element(&RowView { row, cols: &self.cols })?;
        }
        seq.end()
    }
}

pub fn write_json<W: Write>(mut out: W, rows: &[Row], routes: Routes) -> std::io::Result<()> {
    let view = Rows {
        rows,
        cols: columns(routes),
    };
    serde_json::to_writer_pretty(&mut out, &view)?;
    out.write_all(b"\n")
}
