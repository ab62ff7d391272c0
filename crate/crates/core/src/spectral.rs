// Copyright 2026 The zeno Authors
// SPDX-License-Identifier: Apache-2.0

//! Spectral densities `M(ω)` and dissipation kernels `Δ(ε)`.
//!
//! A spectral density is the summed squared coupling of the initial state to
//! the final continuum at energy `ω`. A dissipation kernel is the real
//! broadening function that replaces the Dirac delta of the ordinary Golden
//! Rule once the final state is itself destroyed by some further interaction.
//! Kernels come either in closed form (Dirac, Lorentzian, Rabi double delta)
//! or numerically, from a sampled dissipation function `D(τ)` through the
//! half-line Fourier transform `Δ(ε) = (1/π) Re ∫₀^T D(τ) e^{-iετ} dτ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fraction of the trace, at its end, covered by the half-cosine taper.
pub const TAPER_FRACTION: f64 = 0.1;

/// Minimum number of samples accepted by [`kernel_from_dissipation`].
pub const MIN_TRACE_SAMPLES: usize = 64;

/// Minimum number of oscillations of `e^{-iε_max τ}` that must fit in the
/// trace window.
pub const MIN_OSCILLATIONS: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid support [{min}, {max}]: need finite min < max")]
    InvalidSupport { min: f64, max: f64 },
    #[error("invalid spectral density: {0}")]
    InvalidDensity(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("{0} kernel is distributional and has no pointwise value")]
    DistributionalKernel(&'static str),
    #[error("dissipation trace is not on a uniform time grid (sample {index})")]
    NonUniformGrid { index: usize },
    #[error("degenerate dissipation trace: {0}")]
    DegenerateTrace(String),
    #[error("invalid dissipation trace: {0}")]
    InvalidTrace(String),
}

impl SpectralError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::InvalidSupport { .. } => "invalid_support",
            Self::InvalidDensity(_) => "invalid_density",
            Self::InvalidKernel(_) => "invalid_kernel",
            Self::DistributionalKernel(_) => "distributional_kernel",
            Self::NonUniformGrid { .. } => "non_uniform_grid",
            Self::DegenerateTrace(_) => "degenerate_trace",
            Self::InvalidTrace(_) => "invalid_trace",
        }
    }
}

/// Closed energy interval on which a spectral density may be nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Support {
    min: f64,
    max: f64,
}

impl Support {
    pub fn new(min: f64, max: f64) -> Result<Self, SpectralError> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(SpectralError::InvalidSupport { min, max });
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega >= self.min && omega <= self.max
    }
}

impl TryFrom<[f64; 2]> for Support {
    type Error = SpectralError;

    fn try_from(v: [f64; 2]) -> Result<Self, Self::Error> {
        Support::new(v[0], v[1])
    }
}

impl From<Support> for [f64; 2] {
    fn from(s: Support) -> Self {
        [s.min, s.max]
    }
}

/// Coupling-strength function `M(ω) = Σ_α |v(ω, α)|²`.
///
/// Always nonnegative and exactly zero outside its support. Construct through
/// [`SpectralDensity::flat`], [`SpectralDensity::power_law`] or
/// [`SpectralDensity::tabulated`]; deserialization runs the same checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectralDensity", into = "RawSpectralDensity")]
pub enum SpectralDensity {
    Flat {
        level: f64,
        support: Support,
    },
    /// `a·ω^p` on a support with `ω_min ≥ 0`; `p = 3` is dipole emission.
    PowerLaw {
        amplitude: f64,
        exponent: f64,
        support: Support,
    },
    /// Linear interpolation between strictly increasing nodes.
    Tabulated { points: Vec<(f64, f64)> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawSpectralDensity {
    Flat {
        level: f64,
        support: [f64; 2],
    },
    PowerLaw {
        amplitude: f64,
        exponent: f64,
        support: [f64; 2],
    },
    Tabulated {
        points: Vec<(f64, f64)>,
    },
}

impl TryFrom<RawSpectralDensity> for SpectralDensity {
    type Error = SpectralError;

    fn try_from(raw: RawSpectralDensity) -> Result<Self, Self::Error> {
        match raw {
            RawSpectralDensity::Flat { level, support } => {
                SpectralDensity::flat(level, Support::try_from(support)?)
            }
            RawSpectralDensity::PowerLaw {
                amplitude,
                exponent,
                support,
            } => SpectralDensity::power_law(amplitude, exponent, Support::try_from(support)?),
            RawSpectralDensity::Tabulated { points } => SpectralDensity::tabulated(points),
        }
    }
}

impl From<SpectralDensity> for RawSpectralDensity {
    fn from(m: SpectralDensity) -> Self {
        match m {
            SpectralDensity::Flat { level, support } => RawSpectralDensity::Flat {
                level,
                support: support.into(),
            },
            SpectralDensity::PowerLaw {
                amplitude,
                exponent,
                support,
            } => RawSpectralDensity::PowerLaw {
                amplitude,
                exponent,
                support: support.into(),
            },
            SpectralDensity::Tabulated { points } => RawSpectralDensity::Tabulated { points },
        }
    }
}

impl SpectralDensity {
    pub fn flat(level: f64, support: Support) -> Result<Self, SpectralError> {
        if !(level.is_finite() && level >= 0.0) {
            return Err(SpectralError::InvalidDensity(format!(
                "flat level must be finite and >= 0, got {level}"
            )));
        }
        Ok(SpectralDensity::Flat { level, support })
    }

    pub fn power_law(amplitude: f64, exponent: f64, support: Support) -> Result<Self, SpectralError> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(SpectralError::InvalidDensity(format!(
                "power-law amplitude must be finite and >= 0, got {amplitude}"
            )));
        }
        if !exponent.is_finite() {
            return Err(SpectralError::InvalidDensity("power-law exponent must be finite".into()));
        }
        if support.min() < 0.0 {
            return Err(SpectralError::InvalidDensity(format!(
                "power-law support must start at omega >= 0, got {}",
                support.min()
            )));
        }
        if exponent < 0.0 && support.min() == 0.0 {
            return Err(SpectralError::InvalidDensity(
                "negative exponent is singular at omega = 0".into(),
            ));
        }
        Ok(SpectralDensity::PowerLaw {
            amplitude,
            exponent,
            support,
        })
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self, SpectralError> {
        if points.len() < 2 {
            return Err(SpectralError::InvalidDensity(
                "tabulated density needs at least two nodes".into(),
            ));
        }
        for (i, &(w, m)) in points.iter().enumerate() {
            if !w.is_finite() || !m.is_finite() || m < 0.0 {
                return Err(SpectralError::InvalidDensity(format!(
                    "node {i} = ({w}, {m}) must be finite with M >= 0"
                )));
            }
            if i > 0 && w <= points[i - 1].0 {
                return Err(SpectralError::InvalidDensity(format!(
                    "tabulated grid not strictly increasing at node {i}"
                )));
            }
        }
        Ok(SpectralDensity::Tabulated { points })
    }

    pub fn support(&self) -> Support {
        match self {
            SpectralDensity::Flat { support, .. } | SpectralDensity::PowerLaw { support, .. } => {
                *support
            }
            SpectralDensity::Tabulated { points } => Support {
                min: points[0].0,
                max: points[points.len() - 1].0,
            },
        }
    }

    /// `M(ω)`; exactly zero outside the support.
    pub fn eval(&self, omega: f64) -> f64 {
        if !self.support().contains(omega) {
            return 0.0;
        }
        match self {
            SpectralDensity::Flat { level, .. } => *level,
            SpectralDensity::PowerLaw {
                amplitude, exponent, ..
            } => {
                // integer exponents stay exact (1.1³ = 1.331)
                if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
                    amplitude * omega.powi(*exponent as i32)
                } else {
                    amplitude * omega.powf(*exponent)
                }
            }
            SpectralDensity::Tabulated { points } => interpolate(points, omega),
        }
    }

    /// Least upper bound of `M` over its support.
    pub fn sup(&self) -> f64 {
        match self {
            SpectralDensity::Flat { level, .. } => *level,
            SpectralDensity::PowerLaw { support, .. } => {
                self.eval(support.min()).max(self.eval(support.max()))
            }
            SpectralDensity::Tabulated { points } => {
                points.iter().map(|p| p.1).fold(0.0, f64::max)
            }
        }
    }

    /// Interior points where `M` is not smooth (tabulated nodes).
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            SpectralDensity::Tabulated { points } => {
                points[1..points.len() - 1].iter().map(|p| p.0).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Same density multiplied by a nonnegative factor.
    pub fn scaled(&self, factor: f64) -> Result<Self, SpectralError> {
        match self {
            SpectralDensity::Flat { level, support } => SpectralDensity::flat(level * factor, *support),
            SpectralDensity::PowerLaw {
                amplitude,
                exponent,
                support,
            } => SpectralDensity::power_law(amplitude * factor, *exponent, *support),
            SpectralDensity::Tabulated { points } => SpectralDensity::tabulated(
                points.iter().map(|&(w, m)| (w, m * factor)).collect(),
            ),
        }
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let k = points.partition_point(|p| p.0 <= x);
    if k == 0 {
        return points[0].1;
    }
    if k == points.len() {
        return points[k - 1].1;
    }
    let (x0, y0) = points[k - 1];
    let (x1, y1) = points[k];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Kernel sampled on a uniform `ε` grid, produced by
/// [`kernel_from_dissipation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericKernel {
    eps_min: f64,
    eps_step: f64,
    values: Vec<f64>,
    window: f64,
    defect: f64,
}

impl NumericKernel {
    /// Wraps samples `values[j] = Δ(eps_min + j·eps_step)`. `window` is the
    /// length `T` of the dissipation trace the samples came from.
    pub fn new(eps_min: f64, eps_step: f64, values: Vec<f64>, window: f64) -> Result<Self, SpectralError> {
        if values.len() < 2 {
            return Err(SpectralError::InvalidKernel("numeric kernel needs two samples".into()));
        }
        if !(eps_min.is_finite() && eps_step.is_finite() && eps_step > 0.0) {
            return Err(SpectralError::InvalidKernel("numeric kernel grid must be finite and increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SpectralError::InvalidKernel("numeric kernel values must be finite".into()));
        }
        let mut kernel = Self {
            eps_min,
            eps_step,
            values,
            window,
            defect: 0.0,
        };
        kernel.defect = (kernel.trapezoid_mass() - 1.0).abs();
        Ok(kernel)
    }

    pub fn eps_min(&self) -> f64 {
        self.eps_min
    }

    pub fn eps_max(&self) -> f64 {
        self.eps_min + self.eps_step * (self.values.len() - 1) as f64
    }

    pub fn eps_step(&self) -> f64 {
        self.eps_step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    /// `|∫Δ dε − 1|` by the trapezoid rule on the stored grid.
    pub fn normalization_defect(&self) -> f64 {
        self.defect
    }

    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |j| self.eps_min + self.eps_step * j as f64)
    }

    pub fn trapezoid_mass(&self) -> f64 {
        let v = &self.values;
        let inner: f64 = v[1..v.len() - 1].iter().sum();
        self.eps_step * (inner + 0.5 * (v[0] + v[v.len() - 1]))
    }

    /// Linear interpolation, zero outside the grid.
    pub fn eval(&self, eps: f64) -> f64 {
        let x = (eps - self.eps_min) / self.eps_step;
        let last = (self.values.len() - 1) as f64;
        if !(0.0..=last).contains(&x) {
            return 0.0;
        }
        let j = (x.floor() as usize).min(self.values.len() - 2);
        let frac = x - j as f64;
        self.values[j] * (1.0 - frac) + self.values[j + 1] * frac
    }
}

/// Broadening function `Δ(ε)`; integrates to one for every variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DissipationKernel {
    /// `δ(ε)`: no dissipation of the final state.
    Dirac,
    /// `(1/π) λ_r / (λ_r² + (ε − λ_i)²)`, from `D(τ) = e^{-(λ_r − iλ_i)τ}`.
    Lorentzian { width: f64, shift: f64 },
    /// `½[δ(ε − Ω/2) + δ(ε + Ω/2)]`, from `D(τ) = cos(Ωτ/2)`.
    DoubleDelta { rabi: f64 },
    Numeric(NumericKernel),
}

impl DissipationKernel {
    /// Lorentzian with strictly positive width; a zero width must be
    /// expressed as [`DissipationKernel::Dirac`].
    pub fn lorentzian(width: f64, shift: f64) -> Result<Self, SpectralError> {
        if !(width.is_finite() && width > 0.0) {
            return Err(SpectralError::InvalidKernel(format!(
                "Lorentzian width must be finite and > 0, got {width}"
            )));
        }
        if !shift.is_finite() {
            return Err(SpectralError::InvalidKernel("Lorentzian shift must be finite".into()));
        }
        Ok(DissipationKernel::Lorentzian { width, shift })
    }

    pub fn double_delta(rabi: f64) -> Result<Self, SpectralError> {
        if !(rabi.is_finite() && rabi > 0.0) {
            return Err(SpectralError::InvalidKernel(format!(
                "Rabi frequency must be finite and > 0, got {rabi}"
            )));
        }
        Ok(DissipationKernel::DoubleDelta { rabi })
    }

    pub fn name(&self) -> &'static str {
        match self {
            DissipationKernel::Dirac => "dirac",
            DissipationKernel::Lorentzian { .. } => "lorentzian",
            DissipationKernel::DoubleDelta { .. } => "double_delta",
            DissipationKernel::Numeric(_) => "numeric",
        }
    }

    /// Pointwise value. Dirac and double-delta kernels are distributions and
    /// return [`SpectralError::DistributionalKernel`].
    pub fn eval(&self, eps: f64) -> Result<f64, SpectralError> {
        match self {
            DissipationKernel::Dirac => Err(SpectralError::DistributionalKernel("Dirac")),
            DissipationKernel::DoubleDelta { .. } => {
                Err(SpectralError::DistributionalKernel("double-delta"))
            }
            DissipationKernel::Lorentzian { width, shift } => Ok(lorentzian(eps, *width, *shift)),
            DissipationKernel::Numeric(k) => Ok(k.eval(eps)),
        }
    }

    /// `|∫Δ(ε)dε − 1|`. Exactly zero for the analytic variants.
    pub fn normalization_defect(&self) -> f64 {
        match self {
            DissipationKernel::Numeric(k) => k.normalization_defect(),
            // the arctan CDF of a Lorentzian runs from 0 to 1 over the line
            _ => 0.0,
        }
    }
}

/// `(1/π) λ_r / (λ_r² + (ε − λ_i)²)`.
pub fn lorentzian(eps: f64, width: f64, shift: f64) -> f64 {
    let x = eps - shift;
    width / (PI * (width * width + x * x))
}

/// Sampled dissipation function `D(τ)` on `τ ∈ [0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipationTrace {
    times: Vec<f64>,
    values: Vec<Complex64>,
    label: String,
}

impl DissipationTrace {
    /// Checks that the grid starts at zero, increases strictly, and that
    /// `D(0) = 1` within `1e-10`.
    pub fn new(times: Vec<f64>, values: Vec<Complex64>, label: impl Into<String>) -> Result<Self, SpectralError> {
        if times.len() != values.len() {
            return Err(SpectralError::InvalidTrace(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(SpectralError::InvalidTrace("trace needs at least two samples".into()));
        }
        if times[0] != 0.0 {
            return Err(SpectralError::InvalidTrace("trace must start at tau = 0".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(SpectralError::InvalidTrace("trace times must increase strictly".into()));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(SpectralError::InvalidTrace("trace values must be finite".into()));
        }
        if (values[0] - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(SpectralError::InvalidTrace(format!("D(0) = {} != 1", values[0])));
        }
        Ok(Self {
            times,
            values,
            label: label.into(),
        })
    }

    /// Samples `f` at `τ_j = j·step`, `j = 0..samples`.
    pub fn from_fn(
        step: f64,
        samples: usize,
        label: impl Into<String>,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self, SpectralError> {
        let times: Vec<f64> = (0..samples).map(|j| j as f64 * step).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        Self::new(times, values, label)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Uniform step, or the index of the first sample that breaks uniformity.
    pub fn uniform_step(&self) -> Result<f64, SpectralError> {
        let n = self.times.len();
        let step = self.horizon() / (n - 1) as f64;
        for (j, &t) in self.times.iter().enumerate() {
            if (t - j as f64 * step).abs() > 1e-9 * self.horizon().max(1.0) {
                return Err(SpectralError::NonUniformGrid { index: j });
            }
        }
        Ok(step)
    }
}

/// Options for [`kernel_from_dissipation`].
#[derive(Debug, Clone, Copy, Default)]
pub struct FourierOptions {
    /// Crop the kernel to `|ε| ≤ eps_max`. `None` keeps the full Nyquist band
    /// `π/δτ`, on which the trapezoid mass is one up to rounding.
    pub eps_max: Option<f64>,
}

/// Half-cosine taper weight on the last [`TAPER_FRACTION`] of `[0, horizon]`.
fn taper(t: f64, horizon: f64) -> f64 {
    let start = (1.0 - TAPER_FRACTION) * horizon;
    if t <= start {
        1.0
    } else {
        0.5 * (1.0 + (PI * (t - start) / (TAPER_FRACTION * horizon)).cos())
    }
}

/// Numeric kernel `Δ(ε) = (1/π) Re ∫₀^T w(τ) D(τ) e^{-iετ} dτ`.
///
/// The integral is a trapezoid sum evaluated for all `ε_m = m·π/T` at once by
/// a zero-padded FFT of length `2(n − 1)`. `w` is a half-cosine taper over the
/// last tenth of the window.
pub fn kernel_from_dissipation(
    trace: &DissipationTrace,
    opts: FourierOptions,
) -> Result<DissipationKernel, SpectralError> {
    let n = trace.len();
    if n < MIN_TRACE_SAMPLES {
        return Err(SpectralError::DegenerateTrace(format!(
            "{n} samples, need at least {MIN_TRACE_SAMPLES}"
        )));
    }
    let step = trace.uniform_step()?;
    let horizon = trace.horizon();
    let nyquist = PI / step;
    let eps_max = opts.eps_max.unwrap_or(nyquist).min(nyquist);
    if !(eps_max > 0.0) || eps_max * horizon / (2.0 * PI) < MIN_OSCILLATIONS {
        return Err(SpectralError::DegenerateTrace(format!(
            "window T = {horizon} resolves fewer than {MIN_OSCILLATIONS} oscillations at eps_max = {eps_max}"
        )));
    }

    let len = 2 * (n - 1);
    let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); len];
    for (j, (&t, &d)) in trace.times().iter().zip(trace.values()).enumerate() {
        let weight = if j == 0 || j == n - 1 { 0.5 * step } else { step };
        buf[j] = d * (weight * taper(t, horizon));
    }
    let fft = FftPlanner::new().plan_fft_forward(len);
    fft.process(&mut buf);

    // bin m ↔ ε = m·π/T; negative frequencies wrap to the top half
    let half = (len / 2) as isize;
    let eps_step = PI / horizon;
    let keep = ((eps_max / eps_step + 1e-9).floor() as isize).min(half);
    let values: Vec<f64> = (-keep..=keep)
        .map(|m| buf[m.rem_euclid(len as isize) as usize].re / PI)
        .collect();
    let kernel = NumericKernel::new(-(keep as f64) * eps_step, eps_step, values, horizon)?;
    Ok(DissipationKernel::Numeric(kernel))
}

/// `|∫Δ(ε)dε − 1|` for any kernel.
pub fn kernel_normalization_defect(kernel: &DissipationKernel) -> f64 {
    kernel.normalization_defect()
}
