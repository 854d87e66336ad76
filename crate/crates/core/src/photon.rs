//! Thermal photon statistics and the radiative coupling between two matter
//! configurations.
//!
//! Atomic units throughout (`hbar = e = 1`), so a mode of wave vector `k`
//! has `omega = c |k|`. Grid sums run over modes in index order and carry the
//! quadrature weight of each mode.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::PhysicalConstants;
use crate::C64;

/// Default truncation of the number-state series.
pub const DEFAULT_N_MAX: usize = 64;

/// Tolerance of the transversality and unit-norm checks on a mode.
pub const MODE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhotonError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Vec3 = [f64; 3];
pub type CVec3 = [C64; 3];

fn norm3(k: &Vec3) -> f64 {
    (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
}

/// Unconjugated dot product `a . b`.
pub fn dot(a: &CVec3, b: &CVec3) -> C64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn conj3(a: &CVec3) -> CVec3 {
    [a[0].conj(), a[1].conj(), a[2].conj()]
}

fn real3(v: Vec3) -> CVec3 {
    v.map(|x| C64::new(x, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonMode {
    /// Wave vector in inverse bohr.
    pub k: Vec3,
    pub polarization: CVec3,
    pub weight: f64,
}

impl PhotonMode {
    pub fn new(k: Vec3, polarization: CVec3, weight: f64) -> Result<Self, PhotonError> {
        let kn = norm3(&k);
        if !(kn > 0.0 && kn.is_finite()) {
            return Err(PhotonError::Argument(format!(
                "wave vector norm {kn} must be positive"
            )));
        }
        let pn = polarization
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if (pn - 1.0).abs() > MODE_TOLERANCE {
            return Err(PhotonError::Argument(format!(
                "polarization norm {pn} is not 1"
            )));
        }
        let kl = dot(&real3(k), &polarization).norm() / kn;
        if kl > MODE_TOLERANCE {
            return Err(PhotonError::Argument(format!(
                "polarization not transverse (k.lambda/|k| = {kl:e})"
            )));
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(PhotonError::Argument(format!(
                "weight {weight} must be finite and non-negative"
            )));
        }
        Ok(Self {
            k,
            polarization,
            weight,
        })
    }

    pub fn k_norm(&self) -> f64 {
        norm3(&self.k)
    }

    pub fn omega(&self, constants: &PhysicalConstants) -> f64 {
        constants.c * self.k_norm()
    }

    /// Same mode with the polarization negated.
    pub fn inverted(&self) -> Self {
        Self {
            polarization: self.polarization.map(|z| -z),
            ..*self
        }
    }

    /// Field amplitude `(2 pi c / |k|)^(1/2)`.
    fn amplitude(&self, constants: &PhysicalConstants) -> f64 {
        (2.0 * std::f64::consts::PI * constants.c / self.k_norm()).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalState {
    /// Temperature in hartree.
    pub tau: f64,
    pub modes: Vec<PhotonMode>,
    /// Normalization volume in bohr^3.
    pub volume: f64,
    pub constants: PhysicalConstants,
    pub n_max: usize,
}

impl ThermalState {
    pub fn new(tau: f64, modes: Vec<PhotonMode>, volume: f64) -> Result<Self, PhotonError> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(PhotonError::Argument(format!(
                "temperature {tau} must be positive"
            )));
        }
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(PhotonError::Argument(format!(
                "volume {volume} must be positive"
            )));
        }
        Ok(Self {
            tau,
            modes,
            volume,
            constants: PhysicalConstants::default(),
            n_max: DEFAULT_N_MAX,
        })
    }

    pub fn with_constants(mut self, constants: PhysicalConstants) -> Self {
        self.constants = constants;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    /// `hbar omega / tau` of a mode.
    pub fn reduced_energy(&self, mode: &PhotonMode) -> f64 {
        mode.omega(&self.constants) / self.tau
    }

    /// Upper bound on the part of the ladder sum `S` beyond `n_max`.
    pub fn tail_bound(&self, mode: &PhotonMode) -> f64 {
        ladder_tail_bound(self.reduced_energy(mode), self.n_max)
    }
}

/// Number-state amplitude `g_n` at reduced energy `x = hbar omega / tau`.
pub fn planck_amplitude(n: usize, x: f64) -> f64 {
    (-(-x).exp_m1()).sqrt() * (-(n as f64) * x / 2.0).exp()
}

/// Bose occupation `1 / (e^x - 1)`.
pub fn bose_occupation(x: f64) -> f64 {
    1.0 / x.exp_m1()
}

pub fn planck_g(n: usize, mode: &PhotonMode, state: &ThermalState) -> f64 {
    planck_amplitude(n, state.reduced_energy(mode))
}

pub fn mean_occupation(mode: &PhotonMode, state: &ThermalState) -> f64 {
    bose_occupation(state.reduced_energy(mode))
}

/// `sum_n n g_n^2` truncated at `n_max`.
pub fn mean_occupation_series(x: f64, n_max: usize) -> f64 {
    (1..=n_max)
        .map(|n| n as f64 * planck_amplitude(n, x).powi(2))
        .sum()
}

/// Ladder sum `S = sum_n sqrt(n+1) g_n g_(n+1)`, equal to
/// `sum_n sqrt(n) g_n g_(n-1)` by a shift of index.
pub fn ladder_sum(x: f64, n_max: usize) -> f64 {
    (0..n_max)
        .map(|n| ((n + 1) as f64).sqrt() * planck_amplitude(n, x) * planck_amplitude(n + 1, x))
        .sum()
}

/// Bound on `sum_(n >= n_max) sqrt(n+1) g_n g_(n+1)`, using `sqrt(n+1) <= n+1`
/// and the closed form of the arithmetic-geometric series.
pub fn ladder_tail_bound(x: f64, n_max: usize) -> f64 {
    let q = (-x).exp();
    let one_minus_q = -(-x).exp_m1();
    let n = n_max as f64;
    // sum_(m >= n_max) (m+1) q^m
    let tail = q.powf(n) * ((n + 1.0) / one_minus_q + q / (one_minus_q * one_minus_q));
    one_minus_q * (-x / 2.0).exp() * tail
}

/// `Omega^-1 sum weight * Nbar * hbar omega`, in hartree per bohr^3.
pub fn radiation_energy_density(state: &ThermalState) -> f64 {
    let sum: f64 = state
        .modes
        .iter()
        .map(|m| m.weight * mean_occupation(m, state) * m.omega(&state.constants))
        .sum();
    sum / state.volume
}

/// Thermal average of the vector potential at `position` and `time`.
pub fn vector_potential_average(state: &ThermalState, position: Vec3, time: f64) -> CVec3 {
    let mut out = [C64::new(0.0, 0.0); 3];
    for mode in &state.modes {
        let s = ladder_sum(state.reduced_energy(mode), state.n_max);
        let phase = mode.k[0] * position[0] + mode.k[1] * position[1] + mode.k[2] * position[2]
            - mode.omega(&state.constants) * time;
        let e = C64::from_polar(1.0, phase);
        let pre = mode.weight * mode.amplitude(&state.constants) * s;
        for (o, l) in out.iter_mut().zip(&mode.polarization) {
            *o += pre * (l * e + l.conj() * e.conj());
        }
    }
    let scale = state.volume.sqrt().recip();
    out.map(|z| z * scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiativeCoupling {
    pub value: C64,
    pub magnitude: f64,
    /// `alpha Z`, the order the coupling is expected to scale with.
    pub order_estimate: f64,
    /// Largest truncation bound over the modes, times the prefactors.
    pub tail_bound: f64,
}

/// Matrix element of the thermally averaged interaction between two matter
/// configurations. `currents[m]` is the transition current of mode `m` with
/// the spatial phase already folded in.
pub fn radiative_coupling(
    currents: &[CVec3],
    state: &ThermalState,
) -> Result<RadiativeCoupling, PhotonError> {
    if currents.len() != state.modes.len() {
        return Err(PhotonError::Argument(format!(
            "{} current elements for {} modes",
            currents.len(),
            state.modes.len()
        )));
    }
    let mut sum = C64::new(0.0, 0.0);
    let mut tail = 0.0;
    for (mode, j) in state.modes.iter().zip(currents) {
        let x = state.reduced_energy(mode);
        let pre = mode.weight * mode.amplitude(&state.constants);
        let s = ladder_sum(x, state.n_max);
        let jl = dot(j, &mode.polarization) + dot(j, &conj3(&mode.polarization));
        sum += pre * s * jl;
        tail += pre * ladder_tail_bound(x, state.n_max) * jl.norm();
    }
    let scale = -state.volume.sqrt().recip();
    let value = sum * scale;
    Ok(RadiativeCoupling {
        value,
        magnitude: value.norm(),
        order_estimate: state.constants.alpha_z(),
        tail_bound: tail * scale.abs(),
    })
}

/// Two transverse unit vectors orthogonal to the direction `(theta, phi)`.
fn transverse_basis(theta: f64, phi: f64) -> (Vec3, Vec3) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    ([ct * cp, ct * sp, -st], [-sp, cp, 0.0])
}

/// Midpoint grid over the sphere at fixed `|k|`: every direction carries two
/// transverse polarizations, each also present with inverted sign (the
/// random phase of unpolarized isotropic radiation). Weights are solid-angle
/// fractions, summing to one per polarization channel.
pub fn isotropic_grid(
    k_norm: f64,
    n_theta: usize,
    n_phi: usize,
) -> Result<Vec<PhotonMode>, PhotonError> {
    if n_theta == 0 || n_phi == 0 {
        return Err(PhotonError::Argument(
            "isotropic grid needs at least one direction".into(),
        ));
    }
    let pi = std::f64::consts::PI;
    let (dt, dp) = (pi / n_theta as f64, 2.0 * pi / n_phi as f64);
    let mut modes = Vec::with_capacity(4 * n_theta * n_phi);
    for it in 0..n_theta {
        let theta = (it as f64 + 0.5) * dt;
        for ip in 0..n_phi {
            let phi = (ip as f64 + 0.5) * dp;
            let (st, ct) = theta.sin_cos();
            let (sp, cp) = phi.sin_cos();
            let k = [k_norm * st * cp, k_norm * st * sp, k_norm * ct];
            let w = st * dt * dp / (4.0 * pi);
            let (e1, e2) = transverse_basis(theta, phi);
            for e in [e1, e2] {
                let mode = PhotonMode::new(k, real3(e), w)?;
                modes.push(mode);
                modes.push(mode.inverted());
            }
        }
    }
    Ok(modes)
}

/// One linearly polarized beam along `direction`.
pub fn single_beam(
    direction: Vec3,
    k_norm: f64,
    polarization: CVec3,
    weight: f64,
) -> Result<Vec<PhotonMode>, PhotonError> {
    let n = norm3(&direction);
    if n == 0.0 {
        return Err(PhotonError::Argument("beam direction is zero".into()));
    }
    let k = direction.map(|d| d * k_norm / n);
    Ok(vec![PhotonMode::new(k, polarization, weight)?])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeRecord {
    pub k: Vec3,
    pub polarization: [[f64; 2]; 3],
    pub weight: f64,
}

impl From<&PhotonMode> for ModeRecord {
    fn from(m: &PhotonMode) -> Self {
        Self {
            k: m.k,
            polarization: m.polarization.map(|z| [z.re, z.im]),
            weight: m.weight,
        }
    }
}

impl TryFrom<&ModeRecord> for PhotonMode {
    type Error = PhotonError;

    fn try_from(r: &ModeRecord) -> Result<Self, PhotonError> {
        PhotonMode::new(
            r.k,
            r.polarization.map(|[re, im]| C64::new(re, im)),
            r.weight,
        )
    }
}

pub fn modes_from_json(text: &str) -> Result<Vec<PhotonMode>, PhotonError> {
    let records: Vec<ModeRecord> =
        serde_json::from_str(text).map_err(|e| PhotonError::Parse(e.to_string()))?;
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            PhotonMode::try_from(r).map_err(|e| PhotonError::Argument(format!("mode {i}: {e}")))
        })
        .collect()
}

/// A thermal radiation problem as read from disk: temperature, volume, modes
/// and optionally one current element per mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalFile {
    pub tau: f64,
    pub volume: f64,
    pub modes: Vec<ModeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub currents: Option<Vec<[[f64; 2]; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<PhysicalConstants>,
}

impl ThermalFile {
    pub fn from_json_str(text: &str) -> Result<Self, PhotonError> {
        serde_json::from_str(text).map_err(|e| PhotonError::Parse(e.to_string()))
    }

    pub fn state(&self) -> Result<ThermalState, PhotonError> {
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(i, r)| {
                PhotonMode::try_from(r).map_err(|e| PhotonError::Argument(format!("mode {i}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut state = ThermalState::new(self.tau, modes, self.volume)?;
        if let Some(n) = self.n_max {
            state = state.with_n_max(n);
        }
        if let Some(c) = self.constants {
            state = state.with_constants(c);
        }
        Ok(state)
    }

    pub fn currents(&self) -> Option<Vec<CVec3>> {
        self.currents.as_ref().map(|cs| {
            cs.iter()
                .map(|c| c.map(|[re, im]| C64::new(re, im)))
                .collect()
        })
    }
}
