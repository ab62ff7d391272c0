// Copyright 2026 The zeno Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::spectral::SpectralDensity;

/// Hermiticity tolerance, entrywise.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default cap on the model dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    /// `|Ψ₀⟩`, always index 0.
    Initial,
    /// Direct decay products `{|ξ⟩}`, reached from `|Ψ₀⟩` by `V`.
    Xi,
    /// States `{|η⟩}` reached from the ξ-sector by `W`.
    Eta,
}

/// Compressed sparse row matrix with complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl Csr {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, entries: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut map: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        for (i, j, v) in entries {
            *map.entry((i, j)).or_default() += v;
        }
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(map.len());
        let mut vals = Vec::with_capacity(map.len());
        for (&(i, j), &v) in &map {
            row_ptr[i + 1] += 1;
            cols.push(j);
            vals.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Raw `(row_ptr, cols, vals)` arrays.
    pub fn parts(&self) -> (&[usize], &[usize], &[Complex64]) {
        (&self.row_ptr, &self.cols, &self.vals)
    }

    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let row = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.vals[self.row_ptr[i] + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Row `i` as `(column, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    /// Largest absolute row sum; bounds the spectral radius.
    pub fn row_sum_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise `|A_ij − conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.entries()
            .map(|(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// Time-dependent part `A·cos(ω t)` of the Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct Drive {
    pub amplitude: Csr,
    pub frequency: f64,
}

/// Finite Hamiltonian `H(t) = H₀ + V + W + A·cos(ω t)` on a basis split into
/// the initial state (index 0), the ξ-sector and the η-sector.
///
/// Construction enforces: `H` Hermitian; `W` and the drive have an empty row
/// and column 0, so they leave `|Ψ₀⟩` alone; `V` only connects index 0 to
/// ξ-states.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedModel {
    sectors: Vec<Sector>,
    h0: Vec<f64>,
    v: Vec<(usize, Complex64)>,
    w: Csr,
    drive: Option<Drive>,
}

impl DiscretizedModel {
    /// Validating constructor. `v` lists `(ξ index, ⟨ξ|V|Ψ₀⟩)`; `w` and the
    /// drive amplitude are given as full triplet lists (both triangles).
    pub fn from_parts(
        sectors: Vec<Sector>,
        h0: Vec<f64>,
        v: Vec<(usize, Complex64)>,
        w: Vec<(usize, usize, Complex64)>,
        drive: Option<(Vec<(usize, usize, Complex64)>, f64)>,
    ) -> Result<Self, DynamicsError> {
        let n = sectors.len();
        let invalid = |msg: String| Err(DynamicsError::InvalidModel(msg));
        if n == 0 || sectors[0] != Sector::Initial {
            return invalid("index 0 must be the initial state".into());
        }
        if sectors[1..].contains(&Sector::Initial) {
            return invalid("only index 0 may belong to the initial sector".into());
        }
        if h0.len() != n {
            return invalid(format!("{} energies for {n} states", h0.len()));
        }
        if h0.iter().any(|e| !e.is_finite()) {
            return invalid("H0 energies must be finite".into());
        }
        for &(k, c) in &v {
            if k >= n || sectors[k] != Sector::Xi {
                return invalid(format!("V couples index 0 to {k}, which is not a xi-state"));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return invalid("V couplings must be finite".into());
            }
        }
        let w = Self::check_block(n, "W", w)?;
        let drive = match drive {
            None => None,
            Some((entries, frequency)) => {
                if !(frequency.is_finite() && frequency >= 0.0) {
                    return invalid(format!("drive frequency must be finite and >= 0, got {frequency}"));
                }
                Some(Drive {
                    amplitude: Self::check_block(n, "drive", entries)?,
                    frequency,
                })
            }
        };
        Ok(Self {
            sectors,
            h0,
            v,
            w,
            drive,
        })
    }

    fn check_block(n: usize, name: &str, entries: Vec<(usize, usize, Complex64)>) -> Result<Csr, DynamicsError> {
        for &(i, j, c) in &entries {
            if i >= n || j >= n {
                return Err(DynamicsError::InvalidModel(format!("{name} entry ({i}, {j}) out of range")));
            }
            if (i == 0 || j == 0) && c != Complex64::new(0.0, 0.0) {
                return Err(DynamicsError::InvalidModel(format!(
                    "{name} must not act on the initial state, found entry ({i}, {j})"
                )));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(DynamicsError::InvalidModel(format!("{name} entries must be finite")));
            }
        }
        let m = Csr::from_triplets(n, entries);
        let defect = m.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(DynamicsError::NotHermitian(defect));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.sectors.len()
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn h0(&self) -> &[f64] {
        &self.h0
    }

    /// `E₀`, the energy of the initial state.
    pub fn e0(&self) -> f64 {
        self.h0[0]
    }

    pub fn v(&self) -> &[(usize, Complex64)] {
        &self.v
    }

    pub fn w(&self) -> &Csr {
        &self.w
    }

    pub fn drive(&self) -> Option<&Drive> {
        self.drive.as_ref()
    }

    pub fn is_time_dependent(&self) -> bool {
        self.drive.is_some()
    }

    pub fn indices(&self, sector: Sector) -> impl Iterator<Item = usize> + '_ {
        self.sectors
            .iter()
            .enumerate()
            .filter(move |(_, s)| **s == sector)
            .map(|(i, _)| i)
    }

    fn xi_energies(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.indices(Sector::Xi).map(|i| self.h0[i]).collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// Energy span of the ξ-sector.
    pub fn xi_span(&self) -> f64 {
        let e = self.xi_energies();
        match (e.first(), e.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// `2π/δω` for the smallest nonzero ξ level spacing; `None` with fewer
    /// than two distinct ξ levels.
    pub fn recurrence_time(&self) -> Option<f64> {
        let e = self.xi_energies();
        let spacing = e
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&d| d > 1e-12 * (1.0 + w_abs_max(&e)))
            .fold(f64::INFINITY, f64::min);
        spacing.is_finite().then(|| 2.0 * PI / spacing)
    }

    /// Static part `H₀ + V + W − shift·I` as one sparse matrix. `with_v`
    /// drops the `V` coupling when false.
    pub fn static_matrix(&self, shift: f64, with_v: bool) -> Csr {
        let n = self.dim();
        let diag = (0..n).map(|i| (i, i, Complex64::new(self.h0[i] - shift, 0.0)));
        let v = self
            .v
            .iter()
            .filter(|_| with_v)
            .flat_map(|&(k, c)| [(k, 0, c), (0, k, c.conj())]);
        Csr::from_triplets(n, diag.chain(v).chain(self.w.entries()))
    }
}

fn w_abs_max(e: &[f64]) -> f64 {
    e.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Incremental construction of a [`DiscretizedModel`].
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    sectors: Vec<Sector>,
    h0: Vec<f64>,
    v: Vec<(usize, Complex64)>,
    w: Vec<(usize, usize, Complex64)>,
    drive: Vec<(usize, usize, Complex64)>,
    drive_frequency: Option<f64>,
}

impl ModelBuilder {
    /// Starts with the initial state at energy `e0`.
    pub fn new(e0: f64) -> Self {
        Self {
            sectors: vec![Sector::Initial],
            h0: vec![e0],
            v: Vec::new(),
            w: Vec::new(),
            drive: Vec::new(),
            drive_frequency: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.sectors.len()
    }

    pub fn add_state(&mut self, sector: Sector, energy: f64) -> usize {
        self.sectors.push(sector);
        self.h0.push(energy);
        self.sectors.len() - 1
    }

    /// `⟨ξ|V|Ψ₀⟩ = coupling`.
    pub fn couple_initial(&mut self, xi: usize, coupling: Complex64) -> &mut Self {
        self.v.push((xi, coupling));
        self
    }

    /// `⟨i|W|j⟩ = w` and its Hermitian partner.
    pub fn couple(&mut self, i: usize, j: usize, w: Complex64) -> &mut Self {
        push_hermitian(&mut self.w, i, j, w);
        self
    }

    /// Adds `amplitude·cos(frequency·t)` between `i` and `j`.
    pub fn drive(&mut self, i: usize, j: usize, amplitude: Complex64, frequency: f64) -> &mut Self {
        push_hermitian(&mut self.drive, i, j, amplitude);
        self.drive_frequency = Some(frequency);
        self
    }

    pub fn build(self) -> Result<DiscretizedModel, DynamicsError> {
        let drive = self.drive_frequency.map(|f| (self.drive, f));
        DiscretizedModel::from_parts(self.sectors, self.h0, self.v, self.w, drive)
    }
}

fn push_hermitian(list: &mut Vec<(usize, usize, Complex64)>, i: usize, j: usize, value: Complex64) {
    if i == j {
        list.push((i, i, Complex64::new(value.re, 0.0)));
    } else {
        list.push((i, j, value));
        list.push((j, i, value.conj()));
    }
}

/// Uniform discretization of a continuum: `n` midpoint levels `ω_k` on the
/// support of `M`, each with real coupling `sqrt(M(ω_k)·δω)`.
///
/// Returns `(levels, δω)`.
pub fn discretize(m: &SpectralDensity, n: usize) -> (Vec<(f64, f64)>, f64) {
    let support = m.support();
    let step = support.width() / n as f64;
    let levels = (0..n)
        .map(|k| {
            let omega = support.min() + (k as f64 + 0.5) * step;
            (omega, (m.eval(omega) * step).sqrt())
        })
        .collect();
    (levels, step)
}
