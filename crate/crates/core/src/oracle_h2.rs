//! Closed forms for non-interacting minimal-basis H2 units, and the builder
//! that turns the nine unit parameters into a [`ModelSystem`].
//!
//! Each unit has two Kramers-paired spinor levels per spatial orbital. The
//! reference fills level 1; exactly one spin-allowed double (1 1bar -> 2 2bar)
//! couples to it, so the problem per unit is the 2x2 matrix
//! `[[0, K], [K, 2 delta]]`.
//!
//! Integral table (chemist notation `(pq|rs)` over spatial orbitals, with the
//! usual eightfold permutational symmetry; spinor integrals are
//! `<pq|rs> = d(sp, sr) d(sq, ss) (pr|qs)`, then antisymmetrized):
//!
//! | integral        | value |
//! |-----------------|-------|
//! | (11\|11)        | J11   |
//! | (22\|22)        | J22   |
//! | (11\|22)        | J12   |
//! | (12\|12)        | K12   |
//! | (21\|1'1), (21\|2'1) | eta |
//! | (1'1\|1'1), (1'1\|2'1), (2'1\|2'1) | eta |
//! | (11\|11)_B, (22\|22)_B, (12\|12)_B | JB11, JB22, KB12 |
//!
//! The external one-body matrix is `diag(e) - G`, with `G` the Coulomb mean
//! field of the reference, so the Fock matrix is exactly `diag(e)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{IntegralSet, Kramers, ModelSystem, PhysicalConstants, SpinorLevel, Tensor4};
use crate::{CMatrix, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("domain error: {0}")]
    Domain(String),
}

/// The nine scalars of one unit, in hartree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct H2UnitParams {
    pub eps1: f64,
    pub eps2: f64,
    pub j11: f64,
    pub j22: f64,
    pub j12: f64,
    pub k12: f64,
    #[serde(default)]
    pub jb11: f64,
    #[serde(default)]
    pub jb22: f64,
    #[serde(default)]
    pub kb12: f64,
}

/// Lowest root of `[[0, K], [K, 2 delta]]` and the double's coefficient in
/// intermediate normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoLevelRoot {
    pub energy: f64,
    pub coefficient: f64,
}

fn two_level(delta: f64, k: f64) -> TwoLevelRoot {
    // Stable form of delta - sqrt(delta^2 + k^2) for delta > 0.
    let root = (delta * delta + k * k).sqrt();
    let energy = if delta > 0.0 {
        -k * k / (delta + root)
    } else {
        delta - root
    };
    let coefficient = if k == 0.0 { 0.0 } else { energy / k };
    TwoLevelRoot {
        energy,
        coefficient,
    }
}

/// Half the excitation energy of the double with Coulomb interactions.
pub fn delta_dc(p: &H2UnitParams) -> f64 {
    (p.eps2 - p.eps1) + (p.j11 + p.j22) / 2.0 - 2.0 * p.j12 + p.k12
}

/// `delta_dc` plus the Breit diagonal shift `(JB22 - JB11) / 2`.
pub fn delta_dcb(p: &H2UnitParams) -> f64 {
    delta_dc(p) + (p.jb22 - p.jb11) / 2.0
}

/// Per-unit correlation energy with Coulomb interactions.
pub fn correl_dc(p: &H2UnitParams) -> TwoLevelRoot {
    two_level(delta_dc(p), p.k12)
}

/// Per-unit correlation energy with Coulomb plus Breit interactions.
pub fn correl_dcb(p: &H2UnitParams) -> TwoLevelRoot {
    two_level(delta_dcb(p), p.k12 + p.kb12)
}

/// Leading small-Breit expansion of `correl_dcb - correl_dc`.
pub fn breit_correction_leading(p: &H2UnitParams) -> Result<f64, OracleError> {
    let d = delta_dc(p);
    if !(d > 0.0) {
        return Err(OracleError::Domain(format!(
            "delta_dc = {d} is not positive"
        )));
    }
    let (k, kb) = (p.k12, p.kb12);
    let r = (p.jb22 - p.jb11) / (2.0 * d);
    Ok(-(kb * (2.0 * k + kb) - k * k * r) * (1.0 - r) / (2.0 * d))
}

/// Per-unit doubles-CI energy of `n_units` replicas; not size-extensive.
pub fn dci_per_unit(p: &H2UnitParams, n_units: usize) -> f64 {
    let d = delta_dc(p);
    let n = n_units as f64;
    let nk2 = n * p.k12 * p.k12;
    let root = (d * d + nk2).sqrt();
    let e = if d > 0.0 { -nk2 / (d + root) } else { d - root };
    e / n
}

/// Per-unit MP2 energy `-K^2 / (2 (e2 - e1))`.
pub fn mp2_per_unit(p: &H2UnitParams) -> Result<f64, OracleError> {
    let gap = p.eps2 - p.eps1;
    if !(gap > 0.0) {
        return Err(OracleError::Domain(format!(
            "eps2 - eps1 = {gap} is not positive"
        )));
    }
    Ok(-p.k12 * p.k12 / (2.0 * gap))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitOptions {
    pub include_negative_sector: bool,
    /// Scale of the pair integrals.
    pub eta: f64,
    /// Hyperfine splitting `a`: `+a/2` on unbarred, `-a/2` on barred positive levels.
    pub hyperfine: f64,
}

impl Default for UnitOptions {
    fn default() -> Self {
        Self {
            include_negative_sector: false,
            eta: 1e-3,
            hyperfine: 0.0,
        }
    }
}

pub fn build_unit(
    p: &H2UnitParams,
    include_negative_sector: bool,
    constants: PhysicalConstants,
) -> ModelSystem {
    build_unit_with(
        p,
        &UnitOptions {
            include_negative_sector,
            ..UnitOptions::default()
        },
        constants,
    )
}

/// Spatial orbital and Kramers label of each level.
const SPATIAL: [(usize, Kramers); 8] = [
    (0, Kramers::Unbarred),
    (0, Kramers::Barred),
    (1, Kramers::Unbarred),
    (1, Kramers::Barred),
    (2, Kramers::Unbarred),
    (2, Kramers::Barred),
    (3, Kramers::Unbarred),
    (3, Kramers::Barred),
];

/// Fills a spatial chemist tensor from its unique entries using eightfold symmetry.
fn chemist(entries: &[([usize; 4], f64)]) -> [[[[f64; 4]; 4]; 4]; 4] {
    let mut t = [[[[0.0; 4]; 4]; 4]; 4];
    for &([p, q, r, s], v) in entries {
        for [a, b, c, d] in [
            [p, q, r, s],
            [q, p, r, s],
            [p, q, s, r],
            [q, p, s, r],
            [r, s, p, q],
            [s, r, p, q],
            [r, s, q, p],
            [s, r, q, p],
        ] {
            t[a][b][c][d] = v;
        }
    }
    t
}

/// Antisymmetrized spinor tensor over the first `n` levels.
fn spinor_tensor(n: usize, spatial: &[[[[f64; 4]; 4]; 4]; 4]) -> Tensor4 {
    let direct = |p: usize, q: usize, r: usize, s: usize| {
        let (sp, kp) = SPATIAL[p];
        let (sq, kq) = SPATIAL[q];
        let (sr, kr) = SPATIAL[r];
        let (ss, ks) = SPATIAL[s];
        if kp == kr && kq == ks {
            spatial[sp][sr][sq][ss]
        } else {
            0.0
        }
    };
    let mut t = Tensor4::zeros(n);
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = direct(p, q, r, s) - direct(p, q, s, r);
                    if v != 0.0 {
                        t.set(p, q, r, s, C64::new(v, 0.0));
                    }
                }
            }
        }
    }
    t
}

pub fn build_unit_with(
    p: &H2UnitParams,
    options: &UnitOptions,
    constants: PhysicalConstants,
) -> ModelSystem {
    let n = if options.include_negative_sector {
        8
    } else {
        4
    };
    let neg_energy = -2.0 * constants.rest_energy() - 0.5 * (p.eps1 + p.eps2);

    let levels: Vec<SpinorLevel> = (0..n)
        .map(|k| {
            let (orbital, kramers) = SPATIAL[k];
            let level = match orbital {
                0 => SpinorLevel::positive(k, p.eps1, true),
                1 => SpinorLevel::positive(k, p.eps2, false),
                _ => SpinorLevel::negative(k, neg_energy),
            };
            level.with_kramers(kramers)
        })
        .collect();

    let eta = options.eta;
    let mut coulomb = vec![
        ([0, 0, 0, 0], p.j11),
        ([1, 1, 1, 1], p.j22),
        ([0, 0, 1, 1], p.j12),
        ([0, 1, 0, 1], p.k12),
    ];
    if options.include_negative_sector {
        coulomb.extend([
            ([1, 0, 2, 0], eta),
            ([1, 0, 3, 0], eta),
            ([2, 0, 2, 0], eta),
            ([2, 0, 3, 0], eta),
            ([3, 0, 3, 0], eta),
        ]);
    }
    let v_coulomb = spinor_tensor(n, &chemist(&coulomb));
    let v_breit = spinor_tensor(
        n,
        &chemist(&[
            ([0, 0, 0, 0], p.jb11),
            ([1, 1, 1, 1], p.jb22),
            ([0, 1, 0, 1], p.kb12),
        ]),
    );

    let occupied: Vec<usize> = levels
        .iter()
        .filter(|l| l.occupied_in_reference)
        .map(|l| l.index)
        .collect();
    let h_ext = CMatrix::from_fn(n, n, |r, c| {
        let mean_field: C64 = occupied.iter().map(|&i| v_coulomb.get(r, i, c, i)).sum();
        let diag = if r == c { levels[r].energy } else { 0.0 };
        C64::new(diag, 0.0) - mean_field
    });
    let h_hf = CMatrix::from_fn(n, n, |r, c| {
        if r != c || levels[r].is_negative() {
            return C64::new(0.0, 0.0);
        }
        let sign = match SPATIAL[r].1 {
            Kramers::Unbarred => 0.5,
            Kramers::Barred => -0.5,
        };
        C64::new(sign * options.hyperfine, 0.0)
    });

    let integrals = IntegralSet {
        h_ext,
        h_hf: Some(h_hf),
        v_coulomb,
        v_breit: Some(v_breit),
        lamb_terms: Some(Vec::new()),
    };
    ModelSystem::new(constants, levels, integrals, 2).expect("unit dimensions are consistent")
}

/// Documented nitrogen term energies (cm^-1) and fine-structure splittings,
/// usable as demonstration input. They are not reproduced by any solver here.
pub mod nitrogen {
    pub const TERM_2D_CM: f64 = 19224.5;
    pub const TERM_2P_CM: f64 = 28838.9;
    pub const SPLITTING_2D_CM: f64 = 8.7;
    pub const SPLITTING_2P_CM: f64 = 0.4;
}
