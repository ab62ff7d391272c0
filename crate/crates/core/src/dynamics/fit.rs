// Copyright 2026 The zeno Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::model::DiscretizedModel;
use super::propagate::Trajectory;
use super::DynamicsError;
use crate::rates::{DecayRateResult, Method};

/// Smallest `|F|` accepted inside a fit window.
pub const AMPLITUDE_FLOOR: f64 = 1e-6;

/// Largest accepted RMS residual of the line fit on `ln F`.
pub const MAX_FIT_RESIDUAL: f64 = 0.1;

/// `F(t) = ⟨Ψ₀|Ψ(t)⟩·e^{iE₀t}` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrace {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl AmplitudeTrace {
    pub fn from_fn(step: f64, samples: usize, f: impl Fn(f64) -> Complex64) -> Self {
        let times: Vec<f64> = (0..samples).map(|j| j as f64 * step).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        Self { times, values }
    }

    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// `arg F` made continuous along the trace.
    pub fn unwrapped_phase(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut offset = 0.0;
        let mut prev: Option<f64> = None;
        for v in &self.values {
            let raw = v.arg();
            if let Some(p) = prev {
                let mut d = raw + offset - p;
                while d > PI {
                    offset -= 2.0 * PI;
                    d -= 2.0 * PI;
                }
                while d < -PI {
                    offset += 2.0 * PI;
                    d += 2.0 * PI;
                }
            }
            let phase = raw + offset;
            out.push(phase);
            prev = Some(phase);
        }
        out
    }
}

/// Extracts `F` from a trajectory that recorded basis state 0.
pub fn no_decay_amplitude(trajectory: &Trajectory, e0: f64) -> Result<AmplitudeTrace, DynamicsError> {
    let comp = trajectory
        .component(0)
        .ok_or_else(|| DynamicsError::InvalidOptions("trajectory did not record component 0".into()))?;
    let mut values: Vec<Complex64> = trajectory
        .times
        .iter()
        .zip(comp)
        .map(|(&t, c)| c * Complex64::from_polar(1.0, e0 * t))
        .collect();
    if trajectory.times.first() == Some(&0.0) {
        values[0] = Complex64::new(1.0, 0.0);
    }
    Ok(AmplitudeTrace {
        times: trajectory.times.clone(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub start: f64,
    pub end: f64,
}

impl FitWindow {
    pub fn new(start: f64, end: f64) -> Result<Self, DynamicsError> {
        if !(start.is_finite() && end.is_finite() && start >= 0.0 && end > start) {
            return Err(DynamicsError::InvalidOptions(format!("bad fit window [{start}, {end}]")));
        }
        Ok(Self { start, end })
    }

    /// `[10/span, min(0.4·T_rec, 3/Γ_expected)]`, where `span` is the energy
    /// span of the ξ-sector. A non-positive `gamma_expected` drops the `3/Γ`
    /// bound.
    pub fn default_for(model: &DiscretizedModel, gamma_expected: f64) -> Result<Self, DynamicsError> {
        let span = model.xi_span();
        if !(span > 0.0) {
            return Err(DynamicsError::InvalidOptions("xi-sector has no energy span".into()));
        }
        let mut end = model.recurrence_time().map_or(f64::INFINITY, |t| 0.4 * t);
        if gamma_expected > 0.0 {
            end = end.min(3.0 / gamma_expected);
        }
        if !end.is_finite() {
            return Err(DynamicsError::InvalidOptions("no finite default fit window".into()));
        }
        Self::new(10.0 / span, end)
    }
}

/// Model-derived checks applied to a fit window.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FitLimits {
    pub recurrence_time: Option<f64>,
    pub xi_span: Option<f64>,
}

impl FitLimits {
    pub fn for_model(model: &DiscretizedModel) -> Self {
        let span = model.xi_span();
        Self {
            recurrence_time: model.recurrence_time(),
            xi_span: (span > 0.0).then_some(span),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Complex decay constant `γ`, with `F ≈ e^{−γt}`.
    pub rate: Complex64,
    pub window: FitWindow,
    pub residual_rms: f64,
    pub recurrence_time: Option<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub diagnostics: FitDiagnostics,
}

impl DecayFit {
    pub fn rate(&self) -> Complex64 {
        self.diagnostics.rate
    }

    /// `Γ = 2 Re γ`.
    pub fn gamma(&self) -> f64 {
        2.0 * self.diagnostics.rate.re
    }

    pub fn to_result(&self, gamma0: f64) -> DecayRateResult {
        DecayRateResult::new(self.gamma(), gamma0, Method::DynamicFit)
    }
}

/// Ordinary least-squares line `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub r_squared: f64,
}

pub fn line_fit(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len().min(y.len()) as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    LineFit {
        slope,
        intercept,
        residual_rms: (ss_res / n).sqrt(),
        r_squared: if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 },
    }
}

/// Fits `ln F` on `window` with a complex straight line; `γ` is minus the
/// slope.
pub fn fit_decay(trace: &AmplitudeTrace, window: FitWindow, limits: FitLimits) -> Result<DecayFit, DynamicsError> {
    let horizon = trace.horizon();
    let slack = 1e-9 * horizon.max(1.0);
    if window.start < -slack || window.end > horizon + slack || window.end <= window.start {
        return Err(DynamicsError::WindowOutsideTrace {
            start: window.start,
            end: window.end,
            horizon,
        });
    }
    if let Some(span) = limits.xi_span {
        let min = 5.0 / span;
        if window.start < min * (1.0 - 1e-12) {
            return Err(DynamicsError::WindowTooEarly { start: window.start, min });
        }
    }
    if let Some(rec) = limits.recurrence_time {
        if window.end >= 0.5 * rec {
            return Err(DynamicsError::WindowBeyondRecurrence {
                end: window.end,
                recurrence: rec,
            });
        }
    }
    let phase = trace.unwrapped_phase();
    let (mut t, mut re, mut im) = (Vec::new(), Vec::new(), Vec::new());
    for ((&tj, v), &p) in trace.times.iter().zip(&trace.values).zip(&phase) {
        if tj < window.start - slack || tj > window.end + slack {
            continue;
        }
        let mag = v.norm();
        if mag <= AMPLITUDE_FLOOR {
            return Err(DynamicsError::AmplitudeBelowFloor { time: tj, value: mag });
        }
        t.push(tj);
        re.push(mag.ln());
        im.push(p);
    }
    if t.len() < 3 {
        return Err(DynamicsError::InvalidOptions(format!(
            "fit window [{}, {}] holds {} samples, need at least 3",
            window.start,
            window.end,
            t.len()
        )));
    }
    let fr = line_fit(&t, &re);
    let fi = line_fit(&t, &im);
    let rms = fr.residual_rms.hypot(fi.residual_rms);
    if rms > MAX_FIT_RESIDUAL {
        return Err(DynamicsError::IllConditionedFit { rms });
    }
    Ok(DecayFit {
        diagnostics: FitDiagnostics {
            rate: -Complex64::new(fr.slope, fi.slope),
            window,
            residual_rms: rms,
            recurrence_time: limits.recurrence_time,
            samples: t.len(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_complex_exponential() {
        let f = AmplitudeTrace::from_fn(0.1, 2001, |t| (-Complex64::new(0.05, 0.3) * t).exp());
        let fit = fit_decay(&f, FitWindow::new(1.0, 150.0).unwrap(), FitLimits::default()).unwrap();
        assert!((fit.gamma() - 0.1).abs() < 1e-12);
        assert!((fit.rate().im - 0.3).abs() < 1e-12);
        assert!(fit.diagnostics.residual_rms < 1e-10);
        let r = fit.to_result(0.2);
        assert_eq!(r.method, Method::DynamicFit);
        assert!((r.ratio.unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn constant_amplitude_gives_zero_rate() {
        let f = AmplitudeTrace::from_fn(0.5, 100, |_| Complex64::new(1.0, 0.0));
        let fit = fit_decay(&f, FitWindow::new(2.0, 40.0).unwrap(), FitLimits::default()).unwrap();
        assert_eq!(fit.gamma(), 0.0);
    }

    #[test]
    fn window_checks() {
        let f = AmplitudeTrace::from_fn(0.1, 1001, |t| (-0.01 * t).exp().into());
        let w = FitWindow::new(1.0, 60.0).unwrap();
        let limits = FitLimits {
            recurrence_time: Some(100.0),
            xi_span: None,
        };
        assert!(matches!(
            fit_decay(&f, w, limits),
            Err(DynamicsError::WindowBeyondRecurrence { .. })
        ));
        let early = FitLimits {
            recurrence_time: None,
            xi_span: Some(1.0),
        };
        assert!(matches!(fit_decay(&f, w, early), Err(DynamicsError::WindowTooEarly { .. })));
        assert!(matches!(
            fit_decay(&f, FitWindow::new(1.0, 200.0).unwrap(), FitLimits::default()),
            Err(DynamicsError::WindowOutsideTrace { .. })
        ));
    }

    #[test]
    fn noise_floor_and_bad_fit_are_rejected() {
        let dead = AmplitudeTrace::from_fn(0.1, 1001, |t| (-t).exp().into());
        assert!(matches!(
            fit_decay(&dead, FitWindow::new(1.0, 90.0).unwrap(), FitLimits::default()),
            Err(DynamicsError::AmplitudeBelowFloor { .. })
        ));
        let wobbly = AmplitudeTrace::from_fn(0.1, 1001, |t| (1.0 + 0.9 * (t).cos()).into());
        assert!(matches!(
            fit_decay(&wobbly, FitWindow::new(1.0, 90.0).unwrap(), FitLimits::default()),
            Err(DynamicsError::IllConditionedFit { .. })
        ));
    }

    #[test]
    fn phase_unwrapping_follows_fast_rotation() {
        let f = AmplitudeTrace::from_fn(0.01, 1000, |t| Complex64::from_polar(1.0, -5.0 * t));
        let p = f.unwrapped_phase();
        assert!((p[999] + 5.0 * 9.99).abs() < 1e-9);
    }

    #[test]
    fn line_fit_r_squared() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let l = line_fit(&x, &y);
        assert!((l.slope + 0.5).abs() < 1e-14 && (l.intercept - 2.0).abs() < 1e-13);
        assert!((l.r_squared - 1.0).abs() < 1e-14);
    }
}
