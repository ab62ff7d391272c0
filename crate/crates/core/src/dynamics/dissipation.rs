// Copyright 2026 The zeno Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use num_complex::Complex64;

use super::model::{DiscretizedModel, DEFAULT_DIMENSION_CAP};
use super::propagate::{evolve_sampled, Method, Probe, PropagateOptions, DEFAULT_DENSE_THRESHOLD};
use super::DynamicsError;
use crate::spectral::DissipationTrace;

/// Default bound on `sup_τ |D(τ; t₁) − D(τ; t₁')|` for driven models.
pub const DEFAULT_STATIONARITY_TOL: f64 = 1e-3;

/// Relative size below which the free overlap counts as zero.
const DENOMINATOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct DissipationOptions {
    pub horizon: f64,
    /// Spacing of the `τ` samples.
    pub step: f64,
    pub dt: Option<f64>,
    pub method: Method,
    pub dimension_cap: usize,
    pub dense_threshold: usize,
    pub stationarity_tolerance: f64,
    /// Second start time for the stationarity check of driven models;
    /// `None` uses a quarter of the drive period.
    pub alternate_start: Option<f64>,
}

impl DissipationOptions {
    pub fn new(horizon: f64, step: f64) -> Self {
        Self {
            horizon,
            step,
            dt: None,
            method: Method::Auto,
            dimension_cap: DEFAULT_DIMENSION_CAP,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            stationarity_tolerance: DEFAULT_STATIONARITY_TOL,
            alternate_start: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DissipationResult {
    pub trace: DissipationTrace,
    /// Measured dependence on the start time; `None` for static models.
    pub nonstationarity: Option<f64>,
}

/// `D(τ) = ⟨φ|U_f(τ)|φ⟩ / ⟨φ|e^{−iH₀τ}|φ⟩` with `φ = V|Ψ₀⟩`, where `U_f`
/// is generated by `H₀ + W(t)` with `V` switched off.
///
/// For driven models `D` is computed from start times `0` and
/// `alternate_start`; if the two differ by more than the stationarity
/// tolerance the trace is withheld.
pub fn dissipation_trace(model: &DiscretizedModel, opts: &DissipationOptions) -> Result<DissipationResult, DynamicsError> {
    let n = model.dim();
    let mut phi = vec![Complex64::new(0.0, 0.0); n];
    for &(k, c) in model.v() {
        phi[k] += c;
    }
    let norm = phi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(DynamicsError::NoCoupling);
    }
    for c in phi.iter_mut() {
        *c /= norm;
    }

    let popts = PropagateOptions {
        horizon: opts.horizon,
        dt: opts.dt,
        sample_interval: Some(opts.step),
        method: opts.method,
        probe: Probe::Overlap(phi.clone()),
        dimension_cap: opts.dimension_cap,
        dense_threshold: opts.dense_threshold,
    };

    let weights: Vec<(f64, f64)> = phi
        .iter()
        .zip(model.h0())
        .filter(|(c, _)| c.norm_sqr() > 0.0)
        .map(|(c, &e)| (c.norm_sqr(), e))
        .collect();
    let free = |t: f64| -> Complex64 { weights.iter().map(|&(w, e)| w * Complex64::from_polar(1.0, -e * t)).sum() };

    let ratio = |start: f64| -> Result<(Vec<f64>, Vec<Complex64>), DynamicsError> {
        let traj = evolve_sampled(model, phi.clone(), start, false, &popts)?;
        let mut values = Vec::with_capacity(traj.times.len());
        for (&t, s) in traj.times.iter().zip(&traj.samples) {
            let den = free(t);
            if den.norm() < DENOMINATOR_FLOOR {
                return Err(DynamicsError::VanishingDenominator { time: t });
            }
            values.push(s[0] / den);
        }
        values[0] = Complex64::new(1.0, 0.0);
        Ok((traj.times, values))
    };

    let (times, values) = ratio(0.0)?;
    let nonstationarity = match model.drive() {
        None => None,
        Some(d) => {
            let alt = opts
                .alternate_start
                .unwrap_or(if d.frequency > 0.0 { 0.5 * PI / d.frequency } else { 1.0 });
            let (_, other) = ratio(alt)?;
            let deviation = values
                .iter()
                .zip(&other)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if deviation > opts.stationarity_tolerance {
                return Err(DynamicsError::NonstationaryDissipation {
                    deviation,
                    tolerance: opts.stationarity_tolerance,
                });
            }
            Some(deviation)
        }
    };
    Ok(DissipationResult {
        trace: DissipationTrace::new(times, values, "dissipation")?,
        nonstationarity,
    })
}
