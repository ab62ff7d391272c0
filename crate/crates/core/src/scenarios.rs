// Copyright 2026 The zeno Authors
// SPDX-License-Identifier: Apache-2.0

//! The three physical setups, each buildable both as analytic-route inputs
//! and as a finite Hamiltonian for the time-domain route.
//!
//! Energies: the initial state `|x₀⟩` sits at `E₀` (default `ω_f`) and the
//! final level `|x₁⟩` at `E₀ − ω_f`, so a ξ-state `|x₁, ω⟩` is resonant with
//! `|Ψ₀⟩` exactly at `ω = ω_f`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    discretize, dissipation_trace, fit_decay, no_decay_amplitude, propagate, AmplitudeTrace, DecayFit,
    DiscretizedModel, DissipationOptions, DissipationResult, DynamicsError, FitLimits, FitWindow, Method,
    ModelBuilder, Probe, PropagateOptions, Sector, DEFAULT_DIMENSION_CAP, DEFAULT_STATIONARITY_TOL,
};
use crate::rates::{perturbed_gamma_with, DecayRateResult, RateError, RateOptions, TailCorrection};
use crate::spectral::{
    kernel_from_dissipation, DissipationKernel, DissipationTrace, FourierOptions, SpectralDensity, SpectralError,
    Support,
};

/// Warning for a resonance outside the support of `M_Y`.
pub const WARN_FROZEN: &str = "omega_f_outside_support";

/// Warning when an exponential detector kernel is too narrow for the FFT
/// route and the closed-form Lorentzian is used instead.
pub const WARN_CLOSED_FORM_KERNEL: &str = "exponential_kernel_closed_form";

/// Half-width of the synthetic flat Z band, in units of `λ_r`.
pub const SYNTHETIC_BAND: f64 = 20.0;

/// Largest trace length used for the FFT route of an exponential detector.
pub const MAX_KERNEL_SAMPLES: usize = 1 << 21;

/// Trace length in units of `1/R` for the exponential detector kernel.
const KERNEL_HORIZON: f64 = 200.0;

/// Minimal grid sizes for the time-domain route.
pub const MIN_N_Y: usize = 100;
pub const MIN_N_Z: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

impl ScenarioError {
    fn invalid(field: &str, message: impl Into<String>) -> Self {
        Self::Invalid {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Self::Invalid { .. } => "invalid_scenario",
            Self::Spectral(e) => e.code(),
            Self::Rate(e) => e.code(),
            Self::Dynamics(e) => e.code(),
        }
    }
}

/// Final level `|x₁⟩` resonantly driven to `|x₂⟩` by `Ω cos(ω₂₁ t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiDrive {
    pub m_y: SpectralDensity,
    pub omega_f: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
    pub omega: f64,
    pub omega_21: f64,
}

/// Final level `|x₁⟩` itself decays to `|x₂⟩` by emitting `Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnstableLevel {
    pub m_y: SpectralDensity,
    pub omega_f: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
    /// Emission spectrum of `Z`; without it a flat band reproducing
    /// `lambda_r` is synthesized for the time-domain route.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_z: Option<SpectralDensity>,
    pub omega_12: f64,
    /// Amplitude decay constant of `|x₁⟩`; defaults to `π·M_Z(ω₁₂)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_r: Option<f64>,
    #[serde(default)]
    pub lambda_i: f64,
    #[serde(default)]
    pub tail: TailCorrection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScatteringDissipation {
    /// `D_s(τ) = e^{−Rτ}`.
    Exponential { rate: f64 },
    /// Each `Y` mode couples to its own `Z` continuum with resonance at
    /// `omega_res`.
    Explicit { m_z: SpectralDensity, omega_res: f64 },
}

/// Emitted particle `Y` is scattered by a detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scattering {
    pub m_y: SpectralDensity,
    pub omega_f: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
    pub dissipation: ScatteringDissipation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioSpec {
    RabiDrive(RabiDrive),
    UnstableLevel(UnstableLevel),
    Scattering(Scattering),
}

/// Parameter paths accepted by [`ScenarioSpec::with_parameter`].
pub const PARAMETER_PATHS: [&str; 9] = [
    "omega_f",
    "e0",
    "m_y.scale",
    "rabi.omega",
    "rabi.omega_21",
    "unstable.lambda_r",
    "unstable.lambda_i",
    "unstable.omega_12",
    "scattering.rate",
];

fn finite(field: &str, x: f64) -> Result<(), ScenarioError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(ScenarioError::invalid(field, format!("must be finite, got {x}")))
    }
}

fn positive(field: &str, x: f64) -> Result<(), ScenarioError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(ScenarioError::invalid(field, format!("must be > 0, got {x}")))
    }
}

impl ScenarioSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::RabiDrive(_) => "rabi_drive",
            Self::UnstableLevel(_) => "unstable_level",
            Self::Scattering(_) => "scattering",
        }
    }

    pub fn m_y(&self) -> &SpectralDensity {
        match self {
            Self::RabiDrive(s) => &s.m_y,
            Self::UnstableLevel(s) => &s.m_y,
            Self::Scattering(s) => &s.m_y,
        }
    }

    pub fn omega_f(&self) -> f64 {
        match self {
            Self::RabiDrive(s) => s.omega_f,
            Self::UnstableLevel(s) => s.omega_f,
            Self::Scattering(s) => s.omega_f,
        }
    }

    /// Energy of the initial state; defaults to `ω_f`.
    pub fn e0(&self) -> f64 {
        let e0 = match self {
            Self::RabiDrive(s) => s.e0,
            Self::UnstableLevel(s) => s.e0,
            Self::Scattering(s) => s.e0,
        };
        e0.unwrap_or_else(|| self.omega_f())
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        finite("omega_f", self.omega_f())?;
        finite("e0", self.e0())?;
        match self {
            Self::RabiDrive(s) => {
                positive("omega_21", s.omega_21)?;
                positive("omega", s.omega)?;
                if s.omega >= s.omega_21 {
                    return Err(ScenarioError::invalid(
                        "omega",
                        format!("Rabi frequency {} must stay below omega_21 = {}", s.omega, s.omega_21),
                    ));
                }
            }
            Self::UnstableLevel(s) => {
                positive("omega_12", s.omega_12)?;
                finite("lambda_i", s.lambda_i)?;
                match (s.lambda_r, &s.m_z) {
                    (Some(l), _) => positive("lambda_r", l)?,
                    (None, Some(_)) => {}
                    (None, None) => return Err(ScenarioError::invalid("lambda_r", "needs lambda_r or m_z")),
                }
                if s.tail == TailCorrection::FlatContinuation && !matches!(s.m_y, SpectralDensity::Flat { .. }) {
                    return Err(ScenarioError::invalid("tail", "flat continuation needs a flat m_y"));
                }
            }
            Self::Scattering(s) => match &s.dissipation {
                ScatteringDissipation::Exponential { rate } => {
                    if !(*rate >= 0.0 && rate.is_finite()) {
                        return Err(ScenarioError::invalid("dissipation.rate", format!("must be >= 0, got {rate}")));
                    }
                }
                ScatteringDissipation::Explicit { m_z, omega_res } => {
                    positive("dissipation.omega_res", *omega_res)?;
                    if !(m_z.eval(*omega_res) > 0.0) {
                        return Err(ScenarioError::invalid("dissipation.m_z", "vanishes at omega_res"));
                    }
                }
            },
        }
        Ok(())
    }

    /// Non-fatal observations about the scenario.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !self.m_y().support().contains(self.omega_f()) {
            w.push(WARN_FROZEN.to_string());
        }
        w
    }

    /// Copy with one parameter replaced; see [`PARAMETER_PATHS`].
    pub fn with_parameter(&self, path: &str, value: f64) -> Result<Self, ScenarioError> {
        let mut s = self.clone();
        let mismatch = || ScenarioError::invalid(path, format!("not a parameter of a {} scenario", self.kind()));
        match (path, &mut s) {
            ("omega_f", Self::RabiDrive(x)) => x.omega_f = value,
            ("omega_f", Self::UnstableLevel(x)) => x.omega_f = value,
            ("omega_f", Self::Scattering(x)) => x.omega_f = value,
            ("e0", Self::RabiDrive(x)) => x.e0 = Some(value),
            ("e0", Self::UnstableLevel(x)) => x.e0 = Some(value),
            ("e0", Self::Scattering(x)) => x.e0 = Some(value),
            ("m_y.scale", Self::RabiDrive(x)) => x.m_y = x.m_y.scaled(value)?,
            ("m_y.scale", Self::UnstableLevel(x)) => x.m_y = x.m_y.scaled(value)?,
            ("m_y.scale", Self::Scattering(x)) => x.m_y = x.m_y.scaled(value)?,
            ("rabi.omega", Self::RabiDrive(x)) => x.omega = value,
            ("rabi.omega_21", Self::RabiDrive(x)) => x.omega_21 = value,
            ("unstable.lambda_r", Self::UnstableLevel(x)) => x.lambda_r = Some(value),
            ("unstable.lambda_i", Self::UnstableLevel(x)) => x.lambda_i = value,
            ("unstable.omega_12", Self::UnstableLevel(x)) => x.omega_12 = value,
            (
                "scattering.rate",
                Self::Scattering(Scattering {
                    dissipation: ScatteringDissipation::Exponential { rate },
                    ..
                }),
            ) => *rate = value,
            (p, _) if PARAMETER_PATHS.contains(&p) => return Err(mismatch()),
            (p, _) => {
                return Err(ScenarioError::invalid(
                    p,
                    format!("unknown parameter; expected one of {}", PARAMETER_PATHS.join(", ")),
                ))
            }
        }
        s.validate()?;
        Ok(s)
    }

    /// Golden-Rule reference `Γ₀ = 2π M_Y(ω_f)`.
    pub fn gamma0(&self) -> f64 {
        2.0 * PI * self.m_y().eval(self.omega_f())
    }
}

impl UnstableLevel {
    /// `(λ_r, λ_i)` of the intermediate level. Without an explicit value
    /// `λ_r` is half the Golden-Rule rate `2π M_Z(ω₁₂)` of `|x₁⟩`, since the
    /// kernel needs the amplitude constant.
    pub fn lambda(&self) -> (f64, f64) {
        let lr = self
            .lambda_r
            .unwrap_or_else(|| PI * self.m_z.as_ref().map_or(0.0, |m| m.eval(self.omega_12)));
        (lr, self.lambda_i)
    }
}

/// Everything the analytic route needs.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticInputs {
    pub density: SpectralDensity,
    pub kernel: DissipationKernel,
    /// Evaluation point of the convolution, `ω_f` in `Y` energies.
    pub e0: f64,
    pub tail: TailCorrection,
    pub warnings: Vec<String>,
}

pub fn build_analytic(spec: &ScenarioSpec) -> Result<AnalyticInputs, ScenarioError> {
    spec.validate()?;
    let mut warnings = spec.warnings();
    let mut tail = TailCorrection::None;
    let kernel = match spec {
        ScenarioSpec::RabiDrive(s) => DissipationKernel::double_delta(s.omega)?,
        ScenarioSpec::UnstableLevel(s) => {
            tail = s.tail;
            match s.lambda() {
                // a level that does not decay leaves the Golden Rule intact
                (0.0, _) => DissipationKernel::Dirac,
                (lr, li) => DissipationKernel::lorentzian(lr, li)?,
            }
        }
        ScenarioSpec::Scattering(s) => match &s.dissipation {
            ScatteringDissipation::Exponential { rate } if *rate == 0.0 => DissipationKernel::Dirac,
            ScatteringDissipation::Exponential { rate } => {
                match exponential_kernel(*rate, s.m_y.support(), s.omega_f)? {
                    Some(k) => k,
                    None => {
                        warnings.push(WARN_CLOSED_FORM_KERNEL.to_string());
                        DissipationKernel::lorentzian(*rate, 0.0)?
                    }
                }
            }
            ScatteringDissipation::Explicit { m_z, omega_res } => {
                DissipationKernel::lorentzian(PI * m_z.eval(*omega_res), 0.0)?
            }
        },
    };
    Ok(AnalyticInputs {
        density: spec.m_y().clone(),
        kernel,
        e0: spec.omega_f(),
        tail,
        warnings,
    })
}

/// Numeric kernel of `e^{−Rτ}` via the Fourier route, with a band wide
/// enough to cover `M`'s support seen from `ω_f`. `None` when the trace would
/// be longer than [`MAX_KERNEL_SAMPLES`].
fn exponential_kernel(rate: f64, support: Support, omega_f: f64) -> Result<Option<DissipationKernel>, ScenarioError> {
    let reach = (support.max() - omega_f).abs().max((support.min() - omega_f).abs());
    let eps_max = (1000.0 * rate).max(2.0 * reach);
    let step = PI / eps_max;
    let horizon = KERNEL_HORIZON / rate;
    let samples = (horizon / step).ceil() as usize + 1;
    if samples > MAX_KERNEL_SAMPLES {
        return Ok(None);
    }
    let step = horizon / (samples - 1) as f64;
    let trace = DissipationTrace::from_fn(step, samples, "exponential", |t| Complex64::new((-rate * t).exp(), 0.0))?;
    Ok(Some(kernel_from_dissipation(&trace, FourierOptions::default())?))
}

/// Analytic-route decay constant with scenario warnings attached.
pub fn analytic_gamma(spec: &ScenarioSpec) -> Result<(DecayRateResult, AnalyticInputs), ScenarioError> {
    let inputs = build_analytic(spec)?;
    let opts = RateOptions {
        tail: inputs.tail,
        ..RateOptions::default()
    };
    let mut r = perturbed_gamma_with(&inputs.density, &inputs.kernel, inputs.e0, &opts)?;
    r.warnings.extend(inputs.warnings.iter().cloned());
    Ok((r, inputs))
}

/// Finite Hamiltonian for the time-domain route.
///
/// Rabi drive: `1 + 2N_Y` states, each `Y` mode paired with a `|x₂⟩` partner
/// `ω₂₁` lower and driven by `Ω cos(ω₂₁ t)`. Unstable level and scattering:
/// `1 + N_Y + N_Y·N_Z` states, each `Y` mode carrying its own copy of the `Z`
/// continuum (`N_Z` is ignored for an undamped detector).
pub fn build_dynamic(
    spec: &ScenarioSpec,
    n_y: usize,
    n_z: usize,
    dimension_cap: usize,
) -> Result<DiscretizedModel, ScenarioError> {
    spec.validate()?;
    if n_y < MIN_N_Y {
        return Err(ScenarioError::invalid("n_y", format!("must be >= {MIN_N_Y}, got {n_y}")));
    }
    let x1 = spec.e0() - spec.omega_f();
    let (y_levels, _) = discretize(spec.m_y(), n_y);
    let mut b = ModelBuilder::new(spec.e0());

    // (Z density, resonance, extra diagonal on ξ)
    let z_copy: Option<(SpectralDensity, f64, f64)> = match spec {
        ScenarioSpec::RabiDrive(s) => {
            check_dimension(1 + 2 * n_y, dimension_cap)?;
            for &(w, v) in &y_levels {
                let xi = b.add_state(Sector::Xi, x1 + w);
                b.couple_initial(xi, Complex64::new(v, 0.0));
                let eta = b.add_state(Sector::Eta, x1 + w - s.omega_21);
                b.drive(xi, eta, Complex64::new(s.omega, 0.0), s.omega_21);
            }
            None
        }
        ScenarioSpec::UnstableLevel(s) => match &s.m_z {
            Some(mz) => Some((mz.clone(), s.omega_12, 0.0)),
            None => {
                let (lr, li) = s.lambda();
                // flat band of level λ_r/π gives amplitude decay λ_r; the
                // level shift moves |x₁⟩ and its band together so the band
                // stays centred and adds no shift of its own
                Some((synthetic_band(lr, s.omega_12)?, s.omega_12, -li))
            }
        },
        ScenarioSpec::Scattering(s) => match &s.dissipation {
            ScatteringDissipation::Exponential { rate } if *rate == 0.0 => None,
            ScatteringDissipation::Exponential { rate } => Some((synthetic_band(*rate, 1.0)?, 1.0, 0.0)),
            ScatteringDissipation::Explicit { m_z, omega_res } => Some((m_z.clone(), *omega_res, 0.0)),
        },
    };

    match z_copy {
        None if !matches!(spec, ScenarioSpec::RabiDrive(_)) => {
            check_dimension(1 + n_y, dimension_cap)?;
            for &(w, v) in &y_levels {
                let xi = b.add_state(Sector::Xi, x1 + w);
                b.couple_initial(xi, Complex64::new(v, 0.0));
            }
        }
        None => {}
        Some((mz, res, offset)) => {
            if n_z < MIN_N_Z {
                return Err(ScenarioError::invalid("n_z", format!("must be >= {MIN_N_Z}, got {n_z}")));
            }
            let dim = n_y
                .checked_mul(n_z)
                .and_then(|p| p.checked_add(1 + n_y))
                .unwrap_or(usize::MAX);
            check_dimension(dim, dimension_cap)?;
            let (z_levels, _) = discretize(&mz, n_z);
            for &(w, v) in &y_levels {
                let xi = b.add_state(Sector::Xi, x1 + w);
                b.couple_initial(xi, Complex64::new(v, 0.0));
                if offset != 0.0 {
                    b.couple(xi, xi, Complex64::new(offset, 0.0));
                }
                for &(wz, u) in &z_levels {
                    let eta = b.add_state(Sector::Eta, x1 + w - res + wz + offset);
                    b.couple(xi, eta, Complex64::new(u, 0.0));
                }
            }
        }
    }
    Ok(b.build()?)
}

fn check_dimension(dim: usize, cap: usize) -> Result<(), ScenarioError> {
    if dim > cap {
        Err(DynamicsError::DimensionOverBudget { dim, cap }.into())
    } else {
        Ok(())
    }
}

/// Flat `M_Z = λ/π` on `center ± SYNTHETIC_BAND·λ`.
fn synthetic_band(lambda: f64, center: f64) -> Result<SpectralDensity, ScenarioError> {
    let half = SYNTHETIC_BAND * lambda;
    Ok(SpectralDensity::flat(lambda / PI, Support::new(center - half, center + half)?)?)
}

/// Controls of the time-domain route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicControls {
    pub n_y: usize,
    pub n_z: usize,
    /// Propagation horizon; defaults to the end of the fit window.
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    pub fit_window: Option<FitWindow>,
    /// Number of output samples over the horizon.
    pub samples: usize,
    pub dimension_cap: usize,
    pub stationarity_tolerance: f64,
}

impl Default for DynamicControls {
    fn default() -> Self {
        Self {
            n_y: 500,
            n_z: MIN_N_Z,
            horizon: None,
            dt: None,
            fit_window: None,
            samples: 2000,
            dimension_cap: DEFAULT_DIMENSION_CAP,
            stationarity_tolerance: DEFAULT_STATIONARITY_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicOutcome {
    pub result: DecayRateResult,
    pub fit: DecayFit,
    pub norm_drift: f64,
    pub dimension: usize,
    pub method: Method,
}

/// Propagates `|Ψ₀⟩` and returns `F(t)` on `[0, horizon]`.
pub fn amplitude_trace(
    spec: &ScenarioSpec,
    controls: &DynamicControls,
    horizon: f64,
) -> Result<(AmplitudeTrace, f64, Method), ScenarioError> {
    let model = build_dynamic(spec, controls.n_y, controls.n_z, controls.dimension_cap)?;
    amplitude_of(&model, controls, horizon)
}

fn amplitude_of(
    model: &DiscretizedModel,
    controls: &DynamicControls,
    horizon: f64,
) -> Result<(AmplitudeTrace, f64, Method), ScenarioError> {
    if controls.samples < 2 {
        return Err(ScenarioError::invalid("samples", "need at least 2"));
    }
    let mut opts = PropagateOptions::new(horizon);
    opts.dt = controls.dt;
    opts.sample_interval = Some(horizon / controls.samples as f64);
    opts.probe = Probe::Components(vec![0]);
    opts.dimension_cap = controls.dimension_cap;
    let traj = propagate(model, &opts)?;
    Ok((no_decay_amplitude(&traj, model.e0())?, traj.norm_drift, traj.method))
}

/// Time-domain decay constant. `gamma_expected` sets the default window end
/// `3/Γ`; without it the Golden-Rule value is used.
pub fn dynamic_gamma(
    spec: &ScenarioSpec,
    controls: &DynamicControls,
    gamma_expected: Option<f64>,
) -> Result<DynamicOutcome, ScenarioError> {
    let model = build_dynamic(spec, controls.n_y, controls.n_z, controls.dimension_cap)?;
    let expected = gamma_expected.unwrap_or_else(|| spec.gamma0());
    let window = match controls.fit_window {
        Some(w) => w,
        None => FitWindow::default_for(&model, expected)?,
    };
    let horizon = controls.horizon.unwrap_or(window.end);
    let (trace, norm_drift, method) = amplitude_of(&model, controls, horizon)?;
    let fit = fit_decay(&trace, window, FitLimits::for_model(&model))?;
    let mut result = fit.to_result(spec.gamma0());
    result.warnings.extend(spec.warnings());
    Ok(DynamicOutcome {
        result,
        fit,
        norm_drift,
        dimension: model.dim(),
        method,
    })
}

/// `D(τ)` of the scenario's finite model on `[0, horizon]`.
pub fn dissipation(
    spec: &ScenarioSpec,
    controls: &DynamicControls,
    horizon: f64,
) -> Result<DissipationResult, ScenarioError> {
    let model = build_dynamic(spec, controls.n_y, controls.n_z, controls.dimension_cap)?;
    let mut opts = DissipationOptions::new(horizon, horizon / controls.samples.max(2) as f64);
    opts.dt = controls.dt;
    opts.dimension_cap = controls.dimension_cap;
    opts.stationarity_tolerance = controls.stationarity_tolerance;
    Ok(dissipation_trace(&model, &opts)?)
}
