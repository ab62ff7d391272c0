// Copyright 2026 The zeno Authors
// SPDX-License-Identifier: Apache-2.0

//! Time-domain route: finite Hamiltonians on discretized continua, their
//! propagation, and the extraction of `F(t)`, `D(τ)` and fitted decay
//! constants.

mod dissipation;
mod fit;
mod model;
mod propagate;

use thiserror::Error;

use crate::spectral::SpectralError;

pub use dissipation::{dissipation_trace, DissipationOptions, DissipationResult, DEFAULT_STATIONARITY_TOL};
pub use fit::{
    fit_decay, line_fit, no_decay_amplitude, AmplitudeTrace, DecayFit, FitDiagnostics, FitLimits, FitWindow,
    LineFit, AMPLITUDE_FLOOR, MAX_FIT_RESIDUAL,
};
pub use model::{discretize, Csr, DiscretizedModel, Drive, ModelBuilder, Sector, DEFAULT_DIMENSION_CAP, HERMITIAN_TOL};
pub use propagate::{
    energy_scale, evolve_sampled, evolve_state, propagate, Method, Probe, PropagateOptions, Trajectory,
    DEFAULT_DENSE_THRESHOLD, DEFAULT_STEP_FACTOR, MAX_NORM_DRIFT, MAX_STEP_FACTOR,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("Hamiltonian not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("step too large: {0}")]
    StepTooLarge(String),
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionOverBudget { dim: usize, cap: usize },
    #[error("fit window [{start}, {end}] not inside trace [0, {horizon}]")]
    WindowOutsideTrace { start: f64, end: f64, horizon: f64 },
    #[error("fit window starts at {start}, before the transient ends at {min}")]
    WindowTooEarly { start: f64, min: f64 },
    #[error("|F| = {value:e} at t = {time} is below the noise floor")]
    AmplitudeBelowFloor { time: f64, value: f64 },
    #[error("fit window ends at {end}, not before half the recurrence time {recurrence}/2")]
    WindowBeyondRecurrence { end: f64, recurrence: f64 },
    #[error("fit residual RMS {rms} too large")]
    IllConditionedFit { rms: f64 },
    #[error("dissipation function depends on the start time (deviation {deviation:e} > {tolerance:e})")]
    NonstationaryDissipation { deviation: f64, tolerance: f64 },
    #[error("free overlap vanishes at tau = {time}")]
    VanishingDenominator { time: f64 },
    #[error("model has no coupling to the initial state")]
    NoCoupling,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl DynamicsError {
    /// Short machine-readable name used in report status columns.
    pub fn code(&self) -> &'static str {
        match self {
            Self::InvalidModel(_) => "invalid_model",
            Self::NotHermitian(_) => "not_hermitian",
            Self::InvalidOptions(_) => "invalid_options",
            Self::StepTooLarge(_) => "step_too_large",
            Self::DimensionOverBudget { .. } => "dimension_over_budget",
            Self::WindowOutsideTrace { .. } => "window_outside_trace",
            Self::WindowTooEarly { .. } => "window_too_early",
            Self::AmplitudeBelowFloor { .. } => "amplitude_below_floor",
            Self::WindowBeyondRecurrence { .. } => "window_beyond_recurrence",
            Self::IllConditionedFit { .. } => "ill_conditioned_fit",
            Self::NonstationaryDissipation { .. } => "nonstationary_dissipation",
            Self::VanishingDenominator { .. } => "vanishing_denominator",
            Self::NoCoupling => "no_coupling",
            Self::Spectral(e) => e.code(),
        }
    }
}
