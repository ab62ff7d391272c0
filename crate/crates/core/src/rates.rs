// Copyright 2026 The zeno Authors
// SPDX-License-Identifier: Apache-2.0

//! Analytic route to decay constants.
//!
//! `Γ = 2π ∫ dω M(ω) Δ(ω − E₀)`, which collapses to the ordinary Golden Rule
//! `Γ₀ = 2π M(E₀)` for `Δ = δ` and to `π[M(ω_f − Ω/2) + M(ω_f + Ω/2)]` for the
//! Rabi double delta. Lorentzian and numeric kernels go through adaptive
//! Gauss–Kronrod quadrature.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{self, Estimate, Tolerance};
use crate::spectral::{DissipationKernel, NumericKernel, SpectralDensity, SpectralError};

/// Below this width (relative to the support width of `M`) the Lorentzian
/// convolution is done in the variable `u = atan((ω − center)/λ_r)`.
pub const NARROW_LORENTZIAN: f64 = 1e-3;

/// Warning attached when quadrature noise produced a negative rate.
pub const WARN_CLAMPED: &str = "clamped_negative_gamma";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("quadrature did not converge: last estimate {estimate} +/- {error}")]
    QuadratureNonConvergence { estimate: f64, error: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl RateError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::QuadratureNonConvergence { .. } => "quadrature_nonconvergence",
            Self::Domain(_) => "domain_error",
            Self::Spectral(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    DynamicFit,
}

/// A decay constant with its unperturbed Golden-Rule reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRateResult {
    pub gamma: f64,
    pub gamma0: f64,
    pub ratio: Option<f64>,
    pub method: Method,
    pub quadrature_error: Option<f64>,
    pub warnings: Vec<String>,
}

impl DecayRateResult {
    pub fn new(gamma: f64, gamma0: f64, method: Method) -> Self {
        let mut warnings = Vec::new();
        let gamma = if gamma < 0.0 {
            warnings.push(WARN_CLAMPED.to_string());
            0.0
        } else {
            gamma
        };
        Self {
            gamma,
            gamma0,
            ratio: (gamma0 > 0.0).then(|| gamma / gamma0),
            method,
            quadrature_error: None,
            warnings,
        }
    }

    fn with_error(mut self, error: f64) -> Self {
        self.quadrature_error = Some(error);
        self
    }
}

/// How to treat `M` beyond the top of its support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailCorrection {
    #[default]
    None,
    /// A flat `M` is taken to continue at its level up to `+∞`; the kernel
    /// mass above the support is added analytically.
    FlatContinuation,
}

#[derive(Debug, Clone, Copy)]
pub struct RateOptions {
    pub tolerance: Tolerance,
    pub tail: TailCorrection,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self {
            tolerance: Tolerance::default(),
            tail: TailCorrection::None,
        }
    }
}

/// Fermi's Golden Rule, `Γ₀ = 2π M(E₀)`.
pub fn golden_rule_gamma(m: &SpectralDensity, e0: f64) -> DecayRateResult {
    let g0 = 2.0 * PI * m.eval(e0);
    DecayRateResult::new(g0, g0, Method::ClosedForm)
}

/// Generalized Golden Rule `Γ = 2π ∫ M(ω) Δ(ω − E₀) dω` with default options.
pub fn perturbed_gamma(
    m: &SpectralDensity,
    kernel: &DissipationKernel,
    e0: f64,
) -> Result<DecayRateResult, RateError> {
    perturbed_gamma_with(m, kernel, e0, &RateOptions::default())
}

pub fn perturbed_gamma_with(
    m: &SpectralDensity,
    kernel: &DissipationKernel,
    e0: f64,
    opts: &RateOptions,
) -> Result<DecayRateResult, RateError> {
    if !e0.is_finite() {
        return Err(RateError::Domain(format!("E0 must be finite, got {e0}")));
    }
    let gamma0 = 2.0 * PI * m.eval(e0);
    let tail = match (opts.tail, m) {
        (TailCorrection::FlatContinuation, SpectralDensity::Flat { level, support }) => {
            2.0 * PI * level * kernel_mass_above(kernel, support.max() - e0)
        }
        (TailCorrection::FlatContinuation, _) => {
            return Err(RateError::Domain(
                "flat-continuation tail correction needs a flat spectral density".into(),
            ))
        }
        (TailCorrection::None, _) => 0.0,
    };
    match kernel {
        DissipationKernel::Dirac => {
            Ok(DecayRateResult::new(gamma0 + tail, gamma0, Method::ClosedForm))
        }
        DissipationKernel::DoubleDelta { rabi } => {
            let mut r = rabi_gamma(m, *rabi, e0)?;
            r.gamma += tail;
            r.ratio = (gamma0 > 0.0).then(|| r.gamma / gamma0);
            Ok(r)
        }
        DissipationKernel::Lorentzian { width, shift } => {
            let est = lorentzian_convolution(m, *width, e0 + shift, opts.tolerance)?;
            Ok(DecayRateResult::new(2.0 * PI * est.value + tail, gamma0, Method::Quadrature)
                .with_error(2.0 * PI * est.error))
        }
        DissipationKernel::Numeric(k) => {
            let est = numeric_convolution(m, k, e0, opts.tolerance)?;
            Ok(DecayRateResult::new(2.0 * PI * est.value + tail, gamma0, Method::Quadrature)
                .with_error(2.0 * PI * est.error))
        }
    }
}

/// Decay onto a level that itself decays with complex constant
/// `λ = λ_r − iλ_i`: a Lorentzian of width `λ_r` centered at `ω_f + λ_i`.
pub fn unstable_gamma(
    m: &SpectralDensity,
    lambda_r: f64,
    lambda_i: f64,
    omega_f: f64,
) -> Result<DecayRateResult, RateError> {
    unstable_gamma_with(m, lambda_r, lambda_i, omega_f, &RateOptions::default())
}

pub fn unstable_gamma_with(
    m: &SpectralDensity,
    lambda_r: f64,
    lambda_i: f64,
    omega_f: f64,
    opts: &RateOptions,
) -> Result<DecayRateResult, RateError> {
    if !(lambda_r > 0.0) {
        return Err(RateError::Domain(format!("lambda_r must be > 0, got {lambda_r}")));
    }
    let kernel = DissipationKernel::lorentzian(lambda_r, lambda_i)?;
    perturbed_gamma_with(m, &kernel, omega_f, opts)
}

/// Resonant Rabi drive of the final state:
/// `Γ = π[M(ω_f − Ω/2) + M(ω_f + Ω/2)]`.
///
/// The drive is semiclassical; a quantized drive field with coupling `B`
/// gives the same result with `B = Ω/2`.
pub fn rabi_gamma(m: &SpectralDensity, rabi: f64, omega_f: f64) -> Result<DecayRateResult, RateError> {
    if !(rabi > 0.0 && rabi.is_finite()) {
        return Err(RateError::Domain(format!("Rabi frequency must be > 0, got {rabi}")));
    }
    let gamma = PI * (m.eval(omega_f - 0.5 * rabi) + m.eval(omega_f + 0.5 * rabi));
    Ok(DecayRateResult::new(gamma, 2.0 * PI * m.eval(omega_f), Method::ClosedForm))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnhancementRatio {
    pub value: f64,
    /// Set when `Ω > ω₀₁/2`, where the small-`Ω` expansion is no longer
    /// reliable for general `M`.
    pub beyond_small_drive: bool,
}

/// `Γ/Γ₀ = 1 + (3/4)(Ω/ω₀₁)²` for `M ∝ ω³`.
///
/// For a cubic `M` with both sidebands inside its support this equals
/// `rabi_gamma / golden_rule_gamma` exactly, since
/// `((1 − x)³ + (1 + x)³)/2 = 1 + 3x²` with `x = Ω/(2ω₀₁)`.
pub fn rabi_enhancement_ratio(rabi: f64, omega_01: f64) -> Result<EnhancementRatio, RateError> {
    if !(omega_01 > 0.0) || !(rabi >= 0.0) || rabi >= omega_01 {
        return Err(RateError::Domain(format!(
            "need 0 <= Omega < omega_01, got Omega = {rabi}, omega_01 = {omega_01}"
        )));
    }
    let x = rabi / omega_01;
    Ok(EnhancementRatio {
        value: 1.0 + 0.75 * x * x,
        beyond_small_drive: rabi > 0.5 * omega_01,
    })
}

/// Mass of `Δ` on `(x, ∞)`.
fn kernel_mass_above(kernel: &DissipationKernel, x: f64) -> f64 {
    match kernel {
        DissipationKernel::Dirac => f64::from(u8::from(x < 0.0)),
        DissipationKernel::DoubleDelta { rabi } => {
            0.5 * (f64::from(u8::from(x < -0.5 * rabi)) + f64::from(u8::from(x < 0.5 * rabi)))
        }
        DissipationKernel::Lorentzian { width, shift } => {
            0.5 - ((x - shift) / width).atan() / PI
        }
        DissipationKernel::Numeric(k) => numeric_mass_above(k, x),
    }
}

fn numeric_mass_above(k: &NumericKernel, x: f64) -> f64 {
    let (lo, hi) = (k.eps_min(), k.eps_max());
    if x >= hi {
        return 0.0;
    }
    let start = x.max(lo);
    // exact integral of the linear interpolant from `start` to the top
    let mut nodes: Vec<f64> = vec![start];
    nodes.extend(k.grid().filter(|&e| e > start));
    nodes
        .windows(2)
        .map(|w| 0.5 * (k.eval(w[0]) + k.eval(w[1])) * (w[1] - w[0]))
        .sum()
}

fn quad<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: Tolerance) -> Result<Estimate, RateError> {
    quadrature::integrate(f, points, tol).map_err(|e| RateError::QuadratureNonConvergence {
        estimate: 2.0 * PI * e.last.value,
        error: 2.0 * PI * e.last.error,
    })
}

fn sorted_breakpoints(lo: f64, hi: f64, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    pts.extend(extra.into_iter().filter(|&x| x > lo && x < hi));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `∫ M(ω) L(ω; width, center) dω` over the support of `M`.
fn lorentzian_convolution(
    m: &SpectralDensity,
    width: f64,
    center: f64,
    tol: Tolerance,
) -> Result<Estimate, RateError> {
    let support = m.support();
    if width < NARROW_LORENTZIAN * support.width() {
        // ω = center + width·tan(u) turns L(ω)dω into du/π
        let to_u = |w: f64| ((w - center) / width).atan();
        let pts = sorted_breakpoints(
            to_u(support.min()),
            to_u(support.max()),
            m.kinks().into_iter().map(to_u).chain([0.0]),
        );
        let f = |u: f64| m.eval(center + width * u.tan()) / PI;
        quad(f, &pts, tol)
    } else {
        let pts = sorted_breakpoints(support.min(), support.max(), m.kinks().into_iter().chain([center]));
        let f = |w: f64| m.eval(w) * crate::spectral::lorentzian(w - center, width, 0.0);
        quad(f, &pts, tol)
    }
}

fn numeric_convolution(
    m: &SpectralDensity,
    k: &NumericKernel,
    e0: f64,
    tol: Tolerance,
) -> Result<Estimate, RateError> {
    let support = m.support();
    let lo = support.min().max(e0 + k.eps_min());
    let hi = support.max().min(e0 + k.eps_max());
    if lo >= hi {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let pts = sorted_breakpoints(lo, hi, m.kinks().into_iter().chain(k.grid().map(|e| e + e0)));
    let tol = Tolerance {
        max_subdivisions: tol.max_subdivisions + pts.len(),
        ..tol
    };
    quad(|w| m.eval(w) * k.eval(w - e0), &pts, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Support;
    use approx::assert_relative_eq;

    fn flat(level: f64, a: f64, b: f64) -> SpectralDensity {
        SpectralDensity::flat(level, Support::new(a, b).unwrap()).unwrap()
    }

    fn cubic() -> SpectralDensity {
        SpectralDensity::power_law(1.0, 3.0, Support::new(0.0, 2.0).unwrap()).unwrap()
    }

    const C: f64 = 1.0 / (2.0 * PI);

    /// Closed-form `2π ∫_a^b c·L(ω; λ, x0) dω` from the arctan antiderivative.
    fn arctan_oracle(c: f64, a: f64, b: f64, width: f64, center: f64) -> f64 {
        2.0 * c * (((b - center) / width).atan() - ((a - center) / width).atan())
    }

    #[test]
    fn golden_rule_examples() {
        assert_relative_eq!(golden_rule_gamma(&flat(C, 0.0, 10.0), 5.0).gamma, 1.0, epsilon = 1e-15);
        assert_eq!(golden_rule_gamma(&flat(C, 0.0, 10.0), 12.0).gamma, 0.0);
        let r = golden_rule_gamma(&cubic(), 1.0);
        assert_relative_eq!(r.gamma, 2.0 * PI, epsilon = 1e-15);
        assert_eq!(r.method, Method::ClosedForm);
        assert_eq!(r.ratio, Some(1.0));
    }

    #[test]
    fn dirac_kernel_reduces_to_golden_rule() {
        let m = cubic();
        let r = perturbed_gamma(&m, &DissipationKernel::Dirac, 1.3).unwrap();
        assert_eq!(r.gamma, golden_rule_gamma(&m, 1.3).gamma);
        assert_eq!(r.gamma, r.gamma0);
    }

    #[test]
    fn lorentzian_on_flat_matches_arctan() {
        let m = flat(C, 0.0, 20.0);
        let k = DissipationKernel::lorentzian(1.0, 0.0).unwrap();
        let r = perturbed_gamma(&m, &k, 10.0).unwrap();
        let expected = 2.0 * 10f64.atan() / PI;
        assert_relative_eq!(expected, 0.936_549, epsilon = 1e-6);
        assert_relative_eq!(r.gamma, expected, max_relative = 1e-8);
        assert_eq!(r.method, Method::Quadrature);
        assert!(r.quadrature_error.unwrap() <= 1e-8 * r.gamma);
    }

    #[test]
    fn double_delta_is_closed_form_rabi() {
        let k = DissipationKernel::double_delta(0.4).unwrap();
        let r = perturbed_gamma(&cubic(), &k, 1.0).unwrap();
        assert_relative_eq!(r.gamma, 2.24 * PI, max_relative = 1e-14);
        assert_relative_eq!(r.gamma, 7.0372, epsilon = 1e-4);
        assert_eq!(r.method, Method::ClosedForm);
    }

    #[test]
    fn unstable_level_examples() {
        let m = flat(C, 0.0, 1e4);
        let expected = (10f64.atan() + PI / 2.0) / PI;
        assert_relative_eq!(expected, 0.968_274, epsilon = 1e-6);
        let r = unstable_gamma(&m, 1.0, 0.0, 10.0).unwrap();
        assert!((r.gamma - expected).abs() < 1e-4);
        let shifted = unstable_gamma(&m, 1.0, 3.0, 7.0).unwrap();
        assert!((shifted.gamma - expected).abs() < 1e-4);
        assert_relative_eq!(shifted.gamma, r.gamma, max_relative = 1e-9);

        let narrow = unstable_gamma(&flat(C, 0.0, 20.0), 1e-6, 0.0, 10.0).unwrap();
        assert!((narrow.gamma - 1.0).abs() < 1e-5);
        assert!(unstable_gamma(&m, 0.0, 0.0, 10.0).is_err());
    }

    #[test]
    fn flat_tail_correction_recovers_semi_infinite_support() {
        let m = flat(C, 0.0, 30.0);
        let opts = RateOptions {
            tail: TailCorrection::FlatContinuation,
            ..Default::default()
        };
        let r = unstable_gamma_with(&m, 1.0, 0.0, 10.0, &opts).unwrap();
        assert_relative_eq!(r.gamma, (10f64.atan() + PI / 2.0) / PI, max_relative = 1e-8);
        assert!(unstable_gamma_with(&cubic(), 1.0, 0.0, 1.0, &opts).is_err());
    }

    #[test]
    fn rabi_examples() {
        let r = rabi_gamma(&cubic(), 0.4, 1.0).unwrap();
        assert_relative_eq!(r.gamma, PI * (0.512 + 1.728), max_relative = 1e-14);
        let m = flat(0.3, -5.0, 5.0);
        for omega in [0.1, 1.0, 3.0] {
            assert_relative_eq!(rabi_gamma(&m, omega, 0.5).unwrap().gamma, 2.0 * PI * 0.3, max_relative = 1e-15);
        }
        // both sidebands (-0.5 and 2.5) fall outside [0, 2]
        assert_eq!(rabi_gamma(&cubic(), 3.0, 1.0).unwrap().gamma, 0.0);
        assert!(rabi_gamma(&cubic(), 0.0, 1.0).is_err());
    }

    #[test]
    fn enhancement_ratio_examples() {
        assert_relative_eq!(rabi_enhancement_ratio(0.2, 1.0).unwrap().value, 1.03, max_relative = 1e-15);
        assert_eq!(rabi_enhancement_ratio(0.0, 1.0).unwrap().value, 1.0);
        let direct = rabi_gamma(&cubic(), 0.4, 1.0).unwrap();
        assert_relative_eq!(direct.ratio.unwrap(), 1.12, max_relative = 1e-12);
        assert_relative_eq!(rabi_enhancement_ratio(0.4, 1.0).unwrap().value, 1.12, max_relative = 1e-12);
        assert!(!rabi_enhancement_ratio(0.4, 1.0).unwrap().beyond_small_drive);
        assert!(rabi_enhancement_ratio(0.6, 1.0).unwrap().beyond_small_drive);
        assert!(rabi_enhancement_ratio(1.0, 1.0).is_err());
        assert!(rabi_enhancement_ratio(1.5, 1.0).is_err());
    }

    #[test]
    fn oracle_equivalence_grid() {
        let (a, b) = (-3.0, 5.0);
        let m = flat(0.2, a, b);
        for width in [0.1, 1.0, 10.0] {
            for shift in [-2.0, 0.0, 2.0] {
                let e0 = 0.7;
                let k = DissipationKernel::lorentzian(width, shift).unwrap();
                let r = perturbed_gamma(&m, &k, e0).unwrap();
                let oracle = arctan_oracle(0.2, a, b, width, e0 + shift);
                assert_relative_eq!(r.gamma, oracle, max_relative = 1e-8);
                assert!(r.gamma <= 2.0 * PI * m.sup());
            }
        }
    }

    #[test]
    fn narrow_lorentzian_uses_substitution_and_stays_accurate() {
        let m = flat(C, 0.0, 20.0);
        for width in [1e-4, 1e-6, 1e-9] {
            let r = unstable_gamma(&m, width, 0.0, 10.0).unwrap();
            assert_relative_eq!(r.gamma, arctan_oracle(C, 0.0, 20.0, width, 10.0), max_relative = 1e-8);
        }
        // substitution path on a non-flat M against the wide path just above the threshold
        let m = cubic();
        let w = NARROW_LORENTZIAN * 2.0;
        let below = unstable_gamma(&m, w * 0.999_999, 0.0, 1.0).unwrap().gamma;
        let above = unstable_gamma(&m, w * 1.000_001, 0.0, 1.0).unwrap().gamma;
        assert_relative_eq!(below, above, max_relative = 1e-6);
    }

    #[test]
    fn tabulated_density_convolution() {
        // triangle M with peak 1 at 0 on [-1, 1]; Lorentzian of width 0.3
        let m = SpectralDensity::tabulated(vec![(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)]).unwrap();
        let r = unstable_gamma(&m, 0.3, 0.0, 0.0).unwrap();
        // oracle: ∫ (1-|x|) L(x) dx = 2∫_0^1 (1-x) L dx, with
        // ∫ L = atan(x/λ)/π and ∫ x L = λ ln(λ²+x²)/(2π)
        let l: f64 = 0.3;
        let half = (1.0 / l).atan() / PI - l * ((l * l + 1.0) / (l * l)).ln() / (2.0 * PI);
        assert_relative_eq!(r.gamma, 2.0 * PI * 2.0 * half, max_relative = 1e-8);
    }

    #[test]
    fn negative_rates_are_clamped() {
        let r = DecayRateResult::new(-1e-17, 1.0, Method::Quadrature);
        assert_eq!(r.gamma, 0.0);
        assert_eq!(r.warnings, vec![WARN_CLAMPED.to_string()]);
        let r = DecayRateResult::new(0.5, 0.0, Method::DynamicFit);
        assert_eq!(r.ratio, None);
    }
}
