//! State-specific multireference coupled cluster on tiny Fock spaces, the
//! effective Hamiltonian over a model space, and the two-configuration
//! static-correlation shift driven by anisotropic radiation.
//!
//! Everything here is exact in the Fock space: cluster operators act through
//! [`crate::fock`] and the exponentials terminate.

use std::collections::BTreeMap;

use nalgebra::Schur;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{self, CiSpace, ClusterOperator, Determinant, FockError, GenerationRule};
use crate::photon::{self, CVec3, PhotonError, RadiativeCoupling, ThermalState};
use crate::qed::Hamiltonian;
use crate::{CMatrix, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Tolerance of the intermediate-normalization contract.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MrccError {
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("normalization contract violated: <{mu}|exp(T)|{nu}> = {value}")]
    Normalization { mu: usize, nu: usize, value: C64 },
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("no convergence after {iterations} iterations (last residual {last:e})")]
    Divergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },
    #[error("degenerate configurations with nonzero coupling")]
    Degenerate,
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Photon(#[from] PhotonError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpace {
    pub references: Vec<Determinant>,
}

impl ModelSpace {
    pub fn new(references: Vec<Determinant>) -> Result<Self, MrccError> {
        let first = references
            .first()
            .ok_or_else(|| MrccError::Configuration("model space is empty".into()))?;
        let ne = first.n_electrons();
        if let Some(d) = references.iter().find(|d| d.n_electrons() != ne) {
            return Err(MrccError::Configuration(format!(
                "reference {d} has {} electrons, expected {ne}",
                d.n_electrons()
            )));
        }
        for (k, d) in references.iter().enumerate() {
            if references[..k].contains(d) {
                return Err(MrccError::Configuration(format!(
                    "reference {d} appears twice"
                )));
            }
        }
        Ok(Self { references })
    }

    pub fn dimension(&self) -> usize {
        self.references.len()
    }

    pub fn n_electrons(&self) -> usize {
        self.references[0].n_electrons()
    }
}

/// Model space as stored on disk: occupation bitstrings, level 0 first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpaceFile {
    pub references: Vec<String>,
    #[serde(default)]
    pub target_root: usize,
}

impl ModelSpaceFile {
    pub fn from_json_str(text: &str) -> Result<Self, MrccError> {
        serde_json::from_str(text)
            .map_err(|e| MrccError::Configuration(format!("model space: {e}")))
    }

    pub fn space(&self) -> Result<ModelSpace, MrccError> {
        let refs = self
            .references
            .iter()
            .map(|s| Determinant::parse_bitstring(s))
            .collect::<Result<Vec<_>, _>>()?;
        ModelSpace::new(refs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    /// `H_eff[(mu, nu)] = <mu| H exp(T_nu) |nu>`, Lamb scalar included on the diagonal.
    pub matrix: CMatrix,
    pub amplitudes: Vec<ClusterOperator>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub energy: C64,
    /// Right eigenvector over the references, `sum |c|^2 = 1`.
    pub coefficients: Vec<C64>,
}

/// Singles and doubles out of `reference` into empty positive-sector
/// levels, skipping those that land inside the model space.
pub fn external_excitations(
    h: &Hamiltonian,
    space: &ModelSpace,
    reference: Determinant,
) -> Vec<(Vec<usize>, Vec<usize>)> {
    let occ = reference.occupied();
    let vir: Vec<usize> = h
        .levels
        .iter()
        .filter(|l| !l.is_negative() && !reference.is_occupied(l.index))
        .map(|l| l.index)
        .collect();
    let inside = |holes: &[usize], parts: &[usize]| {
        reference
            .excite(holes, parts)
            .is_some_and(|(d, _)| space.references.contains(&d))
    };
    let mut out = Vec::new();
    for &i in &occ {
        for &a in &vir {
            if !inside(&[i], &[a]) {
                out.push((vec![i], vec![a]));
            }
        }
    }
    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            for (y, &a) in vir.iter().enumerate() {
                for &b in &vir[y + 1..] {
                    if !inside(&[i, j], &[a, b]) {
                        out.push((vec![i, j], vec![a, b]));
                    }
                }
            }
        }
    }
    out
}

/// `H_eff` by exact action of `H exp(T_nu)` on each reference.
pub fn build_heff(
    space: &ModelSpace,
    h: &Hamiltonian,
    amplitudes: &[ClusterOperator],
) -> Result<EffectiveHamiltonian, MrccError> {
    let m = space.dimension();
    if amplitudes.len() != m {
        return Err(MrccError::Configuration(format!(
            "{} amplitude sets for {m} references",
            amplitudes.len()
        )));
    }
    let ne = space.n_electrons().max(1);
    let mut matrix = CMatrix::zeros(m, m);
    for (nu, (&phi, t)) in space.references.iter().zip(amplitudes).enumerate() {
        let psi = fock::apply_cluster(t, phi, ne)?;
        for (mu, d) in space.references.iter().enumerate() {
            let overlap = psi.get(d).copied().unwrap_or(ZERO);
            let expected = if mu == nu { 1.0 } else { 0.0 };
            if (overlap - expected).norm() > NORMALIZATION_TOLERANCE {
                return Err(MrccError::Normalization {
                    mu,
                    nu,
                    value: overlap,
                });
            }
        }
        let mut hpsi: BTreeMap<Determinant, C64> = BTreeMap::new();
        for (&d, &c) in &psi {
            for (&e, &v) in &fock::apply_hamiltonian(h, d) {
                *hpsi.entry(e).or_insert(ZERO) += v * c;
            }
        }
        for (mu, d) in space.references.iter().enumerate() {
            matrix[(mu, nu)] = hpsi.get(d).copied().unwrap_or(ZERO);
        }
        matrix[(nu, nu)] += h.lamb_scalar;
    }
    Ok(EffectiveHamiltonian {
        matrix,
        amplitudes: amplitudes.to_vec(),
    })
}

/// Right eigenpairs of a general complex matrix, ascending by real part.
pub fn diagonalize_matrix(m: &CMatrix) -> Result<Vec<Eigenpair>, MrccError> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(MrccError::Configuration(
            "effective Hamiltonian must be square and nonempty".into(),
        ));
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let (q, t) = Schur::new(m.clone()).unpack();
    let mut pairs = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        // Back substitution for (T - lambda) y = 0 with y_k = 1.
        let mut y = vec![ZERO; n];
        y[k] = C64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = ZERO;
            for l in j + 1..=k {
                s += t[(j, l)] * y[l];
            }
            let mut d = t[(j, j)] - lambda;
            if d.norm() < f64::EPSILON * scale {
                d = C64::new(f64::EPSILON * scale, 0.0);
            }
            y[j] = -s / d;
        }
        let v: Vec<C64> = (0..n)
            .map(|r| (0..n).map(|c| q[(r, c)] * y[c]).sum())
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > 1e8 {
            return Err(MrccError::Numerical(format!(
                "defective effective Hamiltonian near eigenvalue {lambda}"
            )));
        }
        pairs.push(Eigenpair {
            energy: lambda,
            coefficients: v.iter().map(|z| z / norm).collect(),
        });
    }
    pairs.sort_by(|a, b| a.energy.re.total_cmp(&b.energy.re));
    Ok(pairs)
}

pub fn diagonalize_heff(h: &EffectiveHamiltonian) -> Result<Vec<Eigenpair>, MrccError> {
    diagonalize_matrix(&h.matrix)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrccOptions {
    /// Root tracked at the first macro-iteration; later iterations follow the
    /// eigenvector of largest overlap.
    pub target_root: usize,
    pub max_iterations: usize,
    pub damping: f64,
    pub residual_tol: f64,
    pub energy_tol: f64,
    /// Gap between model-space and complement diagonals that triggers a warning.
    pub intruder_threshold: f64,
}

impl Default for MrccOptions {
    fn default() -> Self {
        Self {
            target_root: 0,
            max_iterations: 500,
            damping: 0.5,
            residual_tol: 1e-9,
            energy_tol: 1e-11,
            intruder_threshold: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MrccSolution {
    pub heff: EffectiveHamiltonian,
    pub eigenpairs: Vec<Eigenpair>,
    /// Index into `eigenpairs` of the converged target root.
    pub target: usize,
    pub iterations: usize,
    pub residual_norm: f64,
    pub warnings: Vec<String>,
}

impl MrccSolution {
    pub fn target_energy(&self) -> C64 {
        self.eigenpairs[self.target].energy
    }
}

fn column(m: &CMatrix, col: usize) -> Vec<C64> {
    m.column(col).iter().copied().collect()
}

/// Solves the state-specific residual equations: for every reference `mu`
/// and external excitation `chi` of it,
///
/// `<chi| Hbar_mu |mu> c_mu + sum_(nu != mu) <chi| exp(-T_mu) exp(T_nu) |mu> <mu| Hbar_nu |nu> c_nu = 0`
///
/// with `Hbar = exp(-T) H exp(T)`, refreshing the eigenproblem of `H_eff`
/// every macro-iteration.
pub fn mrcc_residual_solve(
    space: &ModelSpace,
    h: &Hamiltonian,
    options: &MrccOptions,
) -> Result<MrccSolution, MrccError> {
    if !(0.0..1.0).contains(&options.damping) {
        return Err(MrccError::Configuration(format!(
            "damping {} outside [0, 1)",
            options.damping
        )));
    }
    if options.target_root >= space.dimension() {
        return Err(MrccError::Configuration(format!(
            "target root {} outside a {}-dimensional model space",
            options.target_root,
            space.dimension()
        )));
    }
    if space.n_electrons() != h.n_electrons {
        return Err(MrccError::Configuration(format!(
            "references carry {} electrons, the system {}",
            space.n_electrons(),
            h.n_electrons
        )));
    }
    if let Some(d) = space
        .references
        .iter()
        .find(|d| d.bits() >> h.n_levels() != 0)
    {
        return Err(MrccError::Configuration(format!(
            "reference {d} addresses levels beyond {}",
            h.n_levels()
        )));
    }
    let fs = fock::enumerate(&h.levels, GenerationRule::Full)?;
    let hm = fock::hamiltonian_matrix(&fs, h);
    let pos = |d: Determinant| fs.index_of(d).expect("full space holds every determinant");
    let ref_idx: Vec<usize> = space.references.iter().map(|&d| pos(d)).collect();

    let mut warnings = Vec::new();
    let ref_max = ref_idx
        .iter()
        .map(|&k| hm[(k, k)].re)
        .fold(f64::NEG_INFINITY, f64::max);
    // Negative-sector configurations sit ~2mc^2 lower by construction; only
    // positive-sector ones can intrude.
    let negative_mask = h
        .levels
        .iter()
        .filter(|l| l.is_negative())
        .fold(0u128, |m, l| m | 1 << l.index);
    let outside_min = (0..fs.len())
        .filter(|k| !ref_idx.contains(k) && fs.dets()[*k].bits() & negative_mask == 0)
        .map(|k| hm[(k, k)].re)
        .fold(f64::INFINITY, f64::min);
    if outside_min - ref_max < options.intruder_threshold {
        warnings.push(format!(
            "possible intruder state: complement diagonal {outside_min:.6} within {:.3e} of the model space",
            options.intruder_threshold
        ));
    }

    // Per reference: excitation list, target positions, signs and diagonal gaps.
    struct Channel {
        exc: Vec<(Vec<usize>, Vec<usize>)>,
        target: Vec<usize>,
        sign: Vec<f64>,
        /// Diagonal `<chi|H|chi>` of each target.
        diag: Vec<f64>,
        amp: Vec<C64>,
    }
    let mut channels = Vec::with_capacity(space.dimension());
    for &phi in &space.references {
        let exc = external_excitations(h, space, phi);
        let mut target = Vec::with_capacity(exc.len());
        let mut sign = Vec::with_capacity(exc.len());
        let mut diag = Vec::with_capacity(exc.len());
        for (holes, parts) in &exc {
            let (d, s) = phi
                .excite(holes, parts)
                .expect("external excitation is valid");
            let k = pos(d);
            target.push(k);
            sign.push(s);
            diag.push(hm[(k, k)].re);
        }
        let amp = vec![ZERO; exc.len()];
        channels.push(Channel {
            exc,
            target,
            sign,
            diag,
            amp,
        });
    }

    let operator = |c: &Channel| {
        let mut op = ClusterOperator::default();
        for ((holes, parts), &t) in c.exc.iter().zip(&c.amp) {
            if t != ZERO {
                op.push(holes, parts, t);
            }
        }
        op
    };

    let step = 1.0 - options.damping;
    let mut history = Vec::new();
    let mut previous: Option<Eigenpair> = None;
    let mut iterations = 0;
    loop {
        let ops: Vec<ClusterOperator> = channels.iter().map(operator).collect();
        let heff = build_heff(space, h, &ops)?;
        let pairs = diagonalize_heff(&heff)?;
        let target = match &previous {
            None => options.target_root,
            Some(p) => pairs
                .iter()
                .enumerate()
                .map(|(k, q)| {
                    let s: C64 = q
                        .coefficients
                        .iter()
                        .zip(&p.coefficients)
                        .map(|(a, b)| a.conj() * b)
                        .sum();
                    (k, s.norm())
                })
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(k, _)| k)
                .unwrap_or(options.target_root),
        };
        let root = pairs[target].clone();
        let de = match &previous {
            Some(p) => (p.energy - root.energy).norm(),
            None if channels.iter().all(|c| c.exc.is_empty()) => 0.0,
            None => f64::INFINITY,
        };

        // Exact exponentials in the full space.
        let mut up = Vec::with_capacity(ops.len());
        let mut down = Vec::with_capacity(ops.len());
        for op in &ops {
            let t = fock::cluster_matrix(op, &fs)?;
            up.push(fock::nilpotent_exp(&t)?);
            down.push(fock::nilpotent_exp(&(-t))?);
        }
        let hbar_col: Vec<Vec<C64>> = (0..ops.len())
            .map(|nu| column(&(&down[nu] * &hm * &up[nu]), ref_idx[nu]))
            .collect();

        let mut norm: f64 = 0.0;
        let mut updates = Vec::with_capacity(channels.len());
        for (mu, ch) in channels.iter().enumerate() {
            let c_mu = root.coefficients[mu];
            let mut r: Vec<C64> = ch.target.iter().map(|&k| hbar_col[mu][k] * c_mu).collect();
            for nu in 0..ops.len() {
                if nu == mu {
                    continue;
                }
                let c_nu = root.coefficients[nu];
                let coupling = hbar_col[nu][ref_idx[mu]] * c_nu;
                if coupling == ZERO {
                    continue;
                }
                let overlap = column(&(&down[mu] * &up[nu]), ref_idx[mu]);
                for (x, &k) in ch.target.iter().enumerate() {
                    r[x] += overlap[k] * coupling;
                }
            }
            for (x, rx) in r.iter_mut().enumerate() {
                *rx *= ch.sign[x];
                norm = if rx.norm().is_nan() {
                    f64::NAN
                } else {
                    norm.max(rx.norm())
                };
            }
            updates.push((c_mu, r));
        }
        history.push(norm);
        if !norm.is_finite() {
            return Err(MrccError::Divergence {
                iterations,
                last: norm,
                history,
            });
        }
        if norm <= options.residual_tol && de <= options.energy_tol {
            return Ok(MrccSolution {
                heff,
                eigenpairs: pairs,
                target,
                iterations,
                residual_norm: norm,
                warnings,
            });
        }
        if iterations == options.max_iterations {
            return Err(MrccError::Divergence {
                iterations,
                last: norm,
                history,
            });
        }
        iterations += 1;
        // The residual is linear in t_chi with slope about (<chi|H|chi> - E) c_mu.
        let e = root.energy.re - h.lamb_scalar;
        for (ch, (c_mu, r)) in channels.iter_mut().zip(updates) {
            // A reference absent from the target root leaves its amplitudes undetermined.
            if c_mu.norm() < 1e-12 {
                continue;
            }
            for (x, rx) in r.into_iter().enumerate() {
                let mut d = e - ch.diag[x];
                if d.abs() < crate::cc::DENOMINATOR_FLOOR {
                    d = crate::cc::DENOMINATOR_FLOOR.copysign(d);
                }
                ch.amp[x] += rx / (c_mu * d) * step;
            }
        }
        previous = Some(root);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaticShift {
    pub perturbative: f64,
    pub exact: f64,
    /// Moduli of the lower root's weights on the two configurations.
    pub c1: f64,
    pub c2: f64,
}

/// Energy change of configuration 1 coupled to configuration 2 by `v`.
pub fn static_correlation_shift(e1: f64, e2: f64, v: C64) -> Result<StaticShift, MrccError> {
    let vv = v.norm();
    if vv == 0.0 {
        return Ok(StaticShift {
            perturbative: 0.0,
            exact: 0.0,
            c1: 1.0,
            c2: 0.0,
        });
    }
    let gap = e2 - e1;
    if gap == 0.0 {
        return Err(MrccError::Degenerate);
    }
    if gap < 0.0 {
        return Err(MrccError::Configuration(format!(
            "e2 = {e2} lies below e1 = {e1}"
        )));
    }
    let half = gap / 2.0;
    let exact = -vv * vv / (half + half.hypot(vv));
    let r = exact.abs() / vv;
    let norm = r.hypot(1.0);
    Ok(StaticShift {
        perturbative: -vv * vv / gap,
        exact,
        c1: 1.0 / norm,
        c2: r / norm,
    })
}

/// Radiative coupling of two open-shell configurations from their per-mode
/// transition currents.
pub fn diradical_coupling(
    currents: &[CVec3],
    thermal: &ThermalState,
) -> Result<RadiativeCoupling, MrccError> {
    Ok(photon::radiative_coupling(currents, thermal)?)
}

/// Full CI space of the system, for comparisons.
pub fn full_space(h: &Hamiltonian) -> Result<CiSpace, MrccError> {
    Ok(fock::enumerate(&h.levels, GenerationRule::Full)?)
}
