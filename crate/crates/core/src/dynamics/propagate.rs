// Copyright 2026 The zeno Authors
// SPDX-License-Identifier: Apache-2.0

//! Time evolution `i d|Ψ⟩/dt = H(t)|Ψ⟩` (ħ = 1).
//!
//! Time-independent models up to [`DEFAULT_DENSE_THRESHOLD`] states are
//! diagonalized once; everything else is stepped with classical fourth-order
//! Runge–Kutta on the sparse matrix, evaluating the drive at the substage
//! times. The energy of the initial state is subtracted from the diagonal
//! before stepping and restored as a global phase afterwards.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::model::{Csr, DiscretizedModel, DEFAULT_DIMENSION_CAP};
use super::DynamicsError;

/// Largest dimension diagonalized densely by [`Method::Auto`].
pub const DEFAULT_DENSE_THRESHOLD: usize = 2000;

/// Default step as a fraction of the inverse largest energy scale.
pub const DEFAULT_STEP_FACTOR: f64 = 0.02;

/// Largest accepted step as a fraction of the inverse largest energy scale.
pub const MAX_STEP_FACTOR: f64 = 0.05;

/// Norm drift above which a run is rejected.
pub const MAX_NORM_DRIFT: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Auto,
    Eigen,
    RungeKutta4,
}

/// What to keep from the state at each sample time.
#[derive(Debug, Clone, PartialEq)]
pub enum Probe {
    Full,
    Components(Vec<usize>),
    /// `⟨φ|Ψ(t)⟩` for the given `φ`.
    Overlap(Vec<Complex64>),
}

#[derive(Debug, Clone)]
pub struct PropagateOptions {
    pub horizon: f64,
    /// `None` picks `0.02/ω_max`.
    pub dt: Option<f64>,
    /// Spacing of the output samples; `None` gives 1000 intervals.
    pub sample_interval: Option<f64>,
    pub method: Method,
    pub probe: Probe,
    pub dimension_cap: usize,
    pub dense_threshold: usize,
}

impl PropagateOptions {
    pub fn new(horizon: f64) -> Self {
        Self {
            horizon,
            dt: None,
            sample_interval: None,
            method: Method::Auto,
            probe: Probe::Full,
            dimension_cap: DEFAULT_DIMENSION_CAP,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
        }
    }
}

/// Sampled output of a propagation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub probe: Probe,
    /// One vector per sample time, laid out as requested by `probe`.
    pub samples: Vec<Vec<Complex64>>,
    /// Largest `|‖Ψ‖² − 1|` seen at the sample times.
    pub norm_drift: f64,
    pub method: Method,
    pub dt: f64,
}

impl Trajectory {
    /// Amplitude of basis state `index` at every sample, if recorded.
    pub fn component(&self, index: usize) -> Option<Vec<Complex64>> {
        let pos = match &self.probe {
            Probe::Full => index,
            Probe::Components(c) => c.iter().position(|&i| i == index)?,
            Probe::Overlap(_) => return None,
        };
        self.samples.iter().map(|s| s.get(pos).copied()).collect()
    }
}

/// Largest energy scale of `H − shift`: the largest of `max|E_k − shift|`,
/// `‖V‖`, the row-sum norm of `W`, the drive frequency and the row-sum norm
/// of the drive amplitude.
pub fn energy_scale(model: &DiscretizedModel, shift: f64, with_v: bool) -> f64 {
    let mut scale = model.h0().iter().map(|e| (e - shift).abs()).fold(0.0, f64::max);
    if with_v {
        scale = scale.max(model.v().iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt());
    }
    scale = scale.max(model.w().row_sum_norm());
    if let Some(d) = model.drive() {
        scale = scale.max(d.frequency).max(d.amplitude.row_sum_norm());
    }
    scale
}

/// Evolves `|Ψ₀⟩` (basis state 0) under the full Hamiltonian.
pub fn propagate(model: &DiscretizedModel, opts: &PropagateOptions) -> Result<Trajectory, DynamicsError> {
    let mut psi0 = vec![ZERO; model.dim()];
    psi0[0] = Complex64::new(1.0, 0.0);
    evolve_sampled(model, psi0, 0.0, true, opts)
}

/// Evolves an arbitrary normalized state from `t_start`, sampling as in
/// [`propagate`]. `with_v = false` switches the coupling `V` off.
pub fn evolve_sampled(
    model: &DiscretizedModel,
    psi0: Vec<Complex64>,
    t_start: f64,
    with_v: bool,
    opts: &PropagateOptions,
) -> Result<Trajectory, DynamicsError> {
    let n = model.dim();
    if n > opts.dimension_cap {
        return Err(DynamicsError::DimensionOverBudget {
            dim: n,
            cap: opts.dimension_cap,
        });
    }
    if psi0.len() != n {
        return Err(DynamicsError::InvalidModel(format!("state of length {} for dimension {n}", psi0.len())));
    }
    if !(opts.horizon > 0.0 && opts.horizon.is_finite()) {
        return Err(DynamicsError::InvalidOptions(format!("horizon must be > 0, got {}", opts.horizon)));
    }
    let shift = model.e0();
    let scale = energy_scale(model, shift, with_v);
    let dt_max = MAX_STEP_FACTOR / scale;
    let dt_req = opts.dt.unwrap_or(DEFAULT_STEP_FACTOR / scale);
    if !(dt_req > 0.0) {
        return Err(DynamicsError::InvalidOptions(format!("dt must be > 0, got {dt_req}")));
    }
    let interval = opts.sample_interval.unwrap_or(opts.horizon / 1000.0).min(opts.horizon);
    if !(interval > 0.0) {
        return Err(DynamicsError::InvalidOptions("sample interval must be > 0".into()));
    }
    let samples = (opts.horizon / interval - 1e-9).ceil().max(1.0) as usize;
    let sample_dt = opts.horizon / samples as f64;
    let stride = (sample_dt / dt_req - 1e-9).ceil().max(1.0) as usize;
    let dt = sample_dt / stride as f64;

    let static_part = model.static_matrix(shift, with_v);
    let diagonal = !model.is_time_dependent()
        && static_part
            .entries()
            .all(|(i, j, v)| i == j || v == Complex64::new(0.0, 0.0));
    let method = match opts.method {
        Method::Auto if diagonal => Method::Eigen,
        Method::Auto if !model.is_time_dependent() && n <= opts.dense_threshold => Method::Eigen,
        Method::Auto => Method::RungeKutta4,
        Method::Eigen if model.is_time_dependent() => {
            return Err(DynamicsError::InvalidOptions(
                "eigendecomposition needs a time-independent model".into(),
            ))
        }
        m => m,
    };
    if method == Method::RungeKutta4 && dt > dt_max * (1.0 + 1e-12) {
        return Err(DynamicsError::StepTooLarge(format!(
            "dt = {dt} exceeds {MAX_STEP_FACTOR}/omega_max = {dt_max}"
        )));
    }

    let times: Vec<f64> = (0..=samples).map(|j| j as f64 * sample_dt).collect();
    let probe = opts.probe.clone();
    let mut out = Vec::with_capacity(times.len());
    let mut norm_drift: f64 = 0.0;
    match method {
        Method::Eigen if diagonal => {
            // already diagonal: exact phases without a dense factorization
            let energies: Vec<f64> = (0..n).map(|i| static_part.get(i, i).re).collect();
            for &t in &times {
                let phased: Vec<Complex64> = psi0
                    .iter()
                    .zip(&energies)
                    .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t))
                    .collect();
                norm_drift = norm_drift.max((phased.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs());
                out.push(apply_probe(&probe, &phased, Complex64::from_polar(1.0, -shift * t)));
            }
        }
        Method::Eigen => {
            let eig = Eigen::new(&static_part);
            let coeffs = eig.coefficients(&psi0);
            let rows = eig.probe_rows(&probe);
            for &t in &times {
                let phased: Vec<Complex64> = coeffs
                    .iter()
                    .zip(eig.energies.iter())
                    .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t))
                    .collect();
                norm_drift = norm_drift.max((phased.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs());
                let global = Complex64::from_polar(1.0, -shift * t);
                out.push(rows.iter().map(|r| global * dot(r, &phased)).collect());
            }
        }
        _ => {
            let stepper = Rk4::new(model, shift, with_v);
            let mut psi = psi0;
            let mut t = t_start;
            for (j, &ts) in times.iter().enumerate() {
                if j > 0 {
                    for _ in 0..stride {
                        stepper.step(&mut psi, t, dt);
                        t += dt;
                    }
                    t = t_start + ts;
                }
                let drift = (psi.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs();
                if drift > MAX_NORM_DRIFT {
                    return Err(DynamicsError::StepTooLarge(format!(
                        "norm drift {drift:.3e} at t = {ts} with dt = {dt}"
                    )));
                }
                norm_drift = norm_drift.max(drift);
                let global = Complex64::from_polar(1.0, -shift * ts);
                out.push(apply_probe(&probe, &psi, global));
            }
        }
    }
    Ok(Trajectory {
        times,
        probe,
        samples: out,
        norm_drift,
        method,
        dt,
    })
}

/// Final state after `duration` (which may be negative) with step size
/// `|dt|`, by fourth-order Runge–Kutta. No phase is removed.
pub fn evolve_state(
    model: &DiscretizedModel,
    psi0: &[Complex64],
    t_start: f64,
    duration: f64,
    dt: f64,
) -> Result<Vec<Complex64>, DynamicsError> {
    let steps = (duration.abs() / dt.abs()).ceil().max(1.0) as usize;
    let h = duration / steps as f64;
    let stepper = Rk4::new(model, 0.0, true);
    let mut psi = psi0.to_vec();
    for s in 0..steps {
        stepper.step(&mut psi, t_start + s as f64 * h, h);
    }
    Ok(psi)
}

fn apply_probe(probe: &Probe, psi: &[Complex64], global: Complex64) -> Vec<Complex64> {
    match probe {
        Probe::Full => psi.iter().map(|c| c * global).collect(),
        Probe::Components(idx) => idx.iter().map(|&i| psi[i] * global).collect(),
        Probe::Overlap(phi) => vec![global * phi.iter().zip(psi).map(|(a, b)| a.conj() * b).sum::<Complex64>()],
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Eigen {
    energies: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl Eigen {
    fn new(h: &Csr) -> Self {
        let n = h.dim();
        if h.is_real() {
            let mut dense = DMatrix::<f64>::zeros(n, n);
            for (i, j, v) in h.entries() {
                dense[(i, j)] = v.re;
            }
            let eig = dense.symmetric_eigen();
            return Self {
                energies: eig.eigenvalues.iter().copied().collect(),
                vectors: eig.eigenvectors.map(|x| Complex64::new(x, 0.0)),
            };
        }
        let mut dense = DMatrix::<Complex64>::zeros(n, n);
        for (i, j, v) in h.entries() {
            dense[(i, j)] = v;
        }
        let eig = dense.symmetric_eigen();
        Self {
            energies: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    /// `U† ψ`.
    fn coefficients(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let v = DVector::from_column_slice(psi);
        self.vectors.ad_mul(&v).iter().copied().collect()
    }

    /// Row vectors `r` with `probe output = r · (e^{-iEt} c)`.
    fn probe_rows(&self, probe: &Probe) -> Vec<Vec<Complex64>> {
        let n = self.vectors.nrows();
        let row = |i: usize| self.vectors.row(i).iter().copied().collect::<Vec<_>>();
        match probe {
            Probe::Full => (0..n).map(row).collect(),
            Probe::Components(idx) => idx.iter().map(|&i| row(i)).collect(),
            Probe::Overlap(phi) => {
                let p = DVector::from_column_slice(phi);
                vec![self.vectors.ad_mul(&p).iter().map(|c| c.conj()).collect()]
            }
        }
    }
}

/// Classical RK4 for `dψ/dt = −i(S + cos(ωt)·A)ψ`.
struct Rk4 {
    s: Csr,
    drive: Option<(Csr, f64)>,
    scratch: std::cell::RefCell<[Vec<Complex64>; 3]>,
}

/// `out = −i·factor·M·ψ`, or `out += …` when `accumulate`.
fn apply(m: &Csr, factor: f64, psi: &[Complex64], out: &mut [Complex64], accumulate: bool) {
    let (ptr, cols, vals) = m.parts();
    for (i, o) in out.iter_mut().enumerate() {
        let mut re = 0.0;
        let mut im = 0.0;
        for k in ptr[i]..ptr[i + 1] {
            let (a, b) = (vals[k], psi[cols[k]]);
            re += a.re * b.re - a.im * b.im;
            im += a.re * b.im + a.im * b.re;
        }
        // −i(re + i·im) = im − i·re
        let v = Complex64::new(im * factor, -re * factor);
        if accumulate {
            *o += v;
        } else {
            *o = v;
        }
    }
}

impl Rk4 {
    fn new(model: &DiscretizedModel, shift: f64, with_v: bool) -> Self {
        let n = model.dim();
        let zeros = vec![ZERO; n];
        Self {
            s: model.static_matrix(shift, with_v),
            drive: model.drive().map(|d| (d.amplitude.clone(), d.frequency)),
            scratch: std::cell::RefCell::new([zeros.clone(), zeros.clone(), zeros]),
        }
    }

    fn deriv(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        apply(&self.s, 1.0, psi, out, false);
        if let Some((a, freq)) = &self.drive {
            apply(a, (freq * t).cos(), psi, out, true);
        }
    }

    fn step(&self, psi: &mut [Complex64], t: f64, dt: f64) {
        let mut guard = self.scratch.borrow_mut();
        let [k, tmp, acc] = &mut *guard;
        let n = psi.len();
        let half = 0.5 * dt;

        self.deriv(t, psi, k);
        for i in 0..n {
            acc[i] = k[i];
            tmp[i] = psi[i] + k[i] * half;
        }
        self.deriv(t + half, tmp, k);
        for i in 0..n {
            acc[i] += k[i] * 2.0;
            tmp[i] = psi[i] + k[i] * half;
        }
        self.deriv(t + half, tmp, k);
        for i in 0..n {
            acc[i] += k[i] * 2.0;
            tmp[i] = psi[i] + k[i] * dt;
        }
        self.deriv(t + dt, tmp, k);
        let sixth = dt / 6.0;
        for i in 0..n {
            psi[i] += (acc[i] + k[i]) * sixth;
        }
    }
}
