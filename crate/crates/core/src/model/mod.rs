//! Model systems: spinor levels, channel-separated integrals and the
//! reference occupation every solver starts from.
//!
//! Energy convention: level energies exclude the rest energy `mc^2`, so
//! negative-sector (spurious) levels sit near `-2mc^2` and the pair
//! denominators `e_i + e_j - e_a - e_p'` come out close to `2mc^2`.

mod io;
mod tensor;
mod validate;

pub use io::{IntegralRecord, LevelRecord, ModelFile, SCHEMA_VERSION};
pub use tensor::Tensor4;
pub use validate::{ValidationOptions, ValidationReport, Violation, ViolationKind};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{CMatrix, C64};

/// Largest basis the bitstring determinants can address.
pub const MAX_LEVELS: usize = 128;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("channel `{0}` is not present in the integral set")]
    MissingChannel(&'static str),
    #[error("model file: {0}")]
    Parse(String),
}

/// Fundamental constants in atomic units (`hbar = e = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants {
    pub alpha: f64,
    pub c: f64,
    pub m: f64,
    /// Nuclear charge used only for order-of-magnitude reporting.
    pub z_scale: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 fine-structure constant.
    pub const ALPHA_CODATA: f64 = 7.297_352_569_3e-3;

    /// Constants with a chosen speed of light; `alpha` follows as `1/c`.
    pub fn with_speed_of_light(c: f64) -> Self {
        Self {
            alpha: 1.0 / c,
            c,
            m: 1.0,
            z_scale: 1.0,
        }
    }

    pub fn rest_energy(&self) -> f64 {
        self.m * self.c * self.c
    }

    /// `alpha * Z`, the expansion parameter of the radiative corrections.
    pub fn alpha_z(&self) -> f64 {
        self.alpha * self.z_scale
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            alpha: Self::ALPHA_CODATA,
            c: 1.0 / Self::ALPHA_CODATA,
            m: 1.0,
            z_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Positive,
    Negative,
}

/// Member of a time-reversal (Kramers) pair; plays the role of spin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kramers {
    Unbarred,
    Barred,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorLevel {
    pub index: usize,
    /// Hartree, rest energy excluded.
    pub energy: f64,
    pub sector: Sector,
    pub occupied_in_reference: bool,
    /// Fractional occupancy `f`, 1 for closed shells.
    pub occupancy: f64,
    pub kramers: Option<Kramers>,
    /// Optional per-level Lamb shift folded into the one-body diagonal.
    pub lamb_shift: Option<f64>,
}

impl SpinorLevel {
    pub fn positive(index: usize, energy: f64, occupied: bool) -> Self {
        Self {
            index,
            energy,
            sector: Sector::Positive,
            occupied_in_reference: occupied,
            occupancy: if occupied { 1.0 } else { 0.0 },
            kramers: None,
            lamb_shift: None,
        }
    }

    pub fn negative(index: usize, energy: f64) -> Self {
        Self {
            index,
            energy,
            sector: Sector::Negative,
            occupied_in_reference: false,
            occupancy: 0.0,
            kramers: None,
            lamb_shift: None,
        }
    }

    pub fn with_kramers(mut self, k: Kramers) -> Self {
        self.kramers = Some(k);
        self
    }

    pub fn is_negative(&self) -> bool {
        self.sector == Sector::Negative
    }
}

/// One `(|J|^2, E' - E)` term of the Lamb sum over intermediate states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambTerm {
    pub weight: f64,
    pub delta_e: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet {
    pub h_ext: CMatrix,
    pub h_hf: Option<CMatrix>,
    pub v_coulomb: Tensor4,
    pub v_breit: Option<Tensor4>,
    pub lamb_terms: Option<Vec<LambTerm>>,
}

impl IntegralSet {
    /// Coulomb-only integral set with every channel tensor zero.
    pub fn zeros(n: usize) -> Self {
        Self {
            h_ext: DMatrix::zeros(n, n),
            h_hf: None,
            v_coulomb: Tensor4::zeros(n),
            v_breit: None,
            lamb_terms: None,
        }
    }
}

/// Two-body or one-body channel that carries its own reference energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceChannel {
    Breit,
    Hyperfine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSystem {
    pub constants: PhysicalConstants,
    pub levels: Vec<SpinorLevel>,
    pub integrals: IntegralSet,
    pub n_electrons: usize,
}

impl ModelSystem {
    /// Assembles a system after checking every dimension against the level count.
    pub fn new(
        constants: PhysicalConstants,
        levels: Vec<SpinorLevel>,
        integrals: IntegralSet,
        n_electrons: usize,
    ) -> Result<Self, ModelError> {
        let n = levels.len();
        if n > MAX_LEVELS {
            return Err(ModelError::Structural(format!(
                "{n} levels exceed the {MAX_LEVELS}-level bitstring limit"
            )));
        }
        for (pos, level) in levels.iter().enumerate() {
            if level.index != pos {
                return Err(ModelError::Structural(format!(
                    "level at position {pos} carries index {}",
                    level.index
                )));
            }
        }
        let square = |name: &str, m: &CMatrix| {
            if m.nrows() != n || m.ncols() != n {
                Err(ModelError::Structural(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )))
            } else {
                Ok(())
            }
        };
        square("h_ext", &integrals.h_ext)?;
        if let Some(h) = &integrals.h_hf {
            square("h_hf", h)?;
        }
        let rank4 = |name: &str, t: &Tensor4| {
            if t.dim() != n {
                Err(ModelError::Structural(format!(
                    "{name} has dimension {}, expected {n}",
                    t.dim()
                )))
            } else {
                Ok(())
            }
        };
        rank4("v_coulomb", &integrals.v_coulomb)?;
        if let Some(t) = &integrals.v_breit {
            rank4("v_breit", t)?;
        }
        if n_electrons > n {
            return Err(ModelError::Structural(format!(
                "{n_electrons} electrons do not fit in {n} levels"
            )));
        }
        Ok(Self {
            constants,
            levels,
            integrals,
            n_electrons,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn occupied(&self) -> impl Iterator<Item = &SpinorLevel> {
        self.levels.iter().filter(|l| l.occupied_in_reference)
    }

    pub fn occupied_indices(&self) -> Vec<usize> {
        self.occupied().map(|l| l.index).collect()
    }

    pub fn has_negative_sector(&self) -> bool {
        self.levels.iter().any(SpinorLevel::is_negative)
    }

    pub fn is_closed_shell(&self) -> bool {
        self.occupied().all(|l| l.occupancy == 1.0)
    }

    /// Negative-sector energy ceiling slack; 0.1 mc^2.
    pub fn default_gap_tolerance(&self) -> f64 {
        0.1 * self.constants.rest_energy()
    }

    pub fn validate(&self) -> ValidationReport {
        validate::validate(self, &ValidationOptions::default())
    }

    pub fn validate_with(&self, options: &ValidationOptions) -> ValidationReport {
        validate::validate(self, options)
    }
}

/// Mean-field reference energy `sum_i f_i h_ii + 1/2 sum_ij f_i f_j <ij||ij>`
/// over the external one-body and Coulomb channels.
pub fn reference_energy(system: &ModelSystem) -> f64 {
    one_body_expectation(system, &system.integrals.h_ext)
        + two_body_expectation(system, &system.integrals.v_coulomb)
}

/// Reference expectation value of a single extra channel.
pub fn channel_reference_energy(
    system: &ModelSystem,
    channel: ReferenceChannel,
) -> Result<f64, ModelError> {
    match channel {
        ReferenceChannel::Breit => {
            let v = system
                .integrals
                .v_breit
                .as_ref()
                .ok_or(ModelError::MissingChannel("breit"))?;
            Ok(two_body_expectation(system, v))
        }
        ReferenceChannel::Hyperfine => {
            let h = system
                .integrals
                .h_hf
                .as_ref()
                .ok_or(ModelError::MissingChannel("hyperfine"))?;
            Ok(one_body_expectation(system, h))
        }
    }
}

fn one_body_expectation(system: &ModelSystem, h: &CMatrix) -> f64 {
    system
        .occupied()
        .map(|l| l.occupancy * h[(l.index, l.index)].re)
        .sum()
}

fn two_body_expectation(system: &ModelSystem, v: &Tensor4) -> f64 {
    let occ: Vec<&SpinorLevel> = system.occupied().collect();
    let mut sum = 0.0;
    for a in &occ {
        for b in &occ {
            sum += a.occupancy * b.occupancy * v.get(a.index, b.index, a.index, b.index).re;
        }
    }
    0.5 * sum
}

/// Direct sum of `n_units` non-interacting copies of `unit`.
///
/// Copy `u` occupies level indices `u * n .. (u + 1) * n`; every integral that
/// couples two different copies is exactly zero.
pub fn replicate(unit: &ModelSystem, n_units: usize) -> Result<ModelSystem, ModelError> {
    if n_units == 0 {
        return Err(ModelError::Structural("n_units must be at least 1".into()));
    }
    let n = unit.n_levels();
    let total = n
        .checked_mul(n_units)
        .filter(|&t| t <= MAX_LEVELS)
        .ok_or_else(|| {
            ModelError::Structural(format!(
                "{n_units} copies of {n} levels exceed the {MAX_LEVELS}-level limit"
            ))
        })?;

    let levels = (0..n_units)
        .flat_map(|u| {
            unit.levels.iter().map(move |l| SpinorLevel {
                index: u * n + l.index,
                ..l.clone()
            })
        })
        .collect();

    let block_matrix = |m: &CMatrix| {
        let mut out = CMatrix::zeros(total, total);
        for u in 0..n_units {
            out.view_mut((u * n, u * n), (n, n)).copy_from(m);
        }
        out
    };
    let block_tensor = |t: &Tensor4| {
        let mut out = Tensor4::zeros(total);
        for (p, q, r, s, v) in t.nonzero() {
            for u in 0..n_units {
                let o = u * n;
                out.set(o + p, o + q, o + r, o + s, v);
            }
        }
        out
    };

    let ints = &unit.integrals;
    let integrals = IntegralSet {
        h_ext: block_matrix(&ints.h_ext),
        h_hf: ints.h_hf.as_ref().map(block_matrix),
        v_coulomb: block_tensor(&ints.v_coulomb),
        v_breit: ints.v_breit.as_ref().map(block_tensor),
        lamb_terms: ints.lamb_terms.as_ref().map(|terms| {
            terms
                .iter()
                .copied()
                .cycle()
                .take(terms.len() * n_units)
                .collect()
        }),
    };

    ModelSystem::new(
        unit.constants,
        levels,
        integrals,
        unit.n_electrons * n_units,
    )
}

/// Real symmetric matrix lifted to the complex one-body storage.
pub fn real_matrix(n: usize, f: impl Fn(usize, usize) -> f64) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| C64::new(f(i, j), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// One occupied and one virtual level with a single Coulomb entry.
    fn two_level() -> ModelSystem {
        let levels = vec![
            SpinorLevel::positive(0, -1.0, true),
            SpinorLevel::positive(1, 0.5, false),
        ];
        let mut ints = IntegralSet::zeros(2);
        ints.h_ext[(0, 0)] = C64::new(-1.25, 0.0);
        ints.h_ext[(1, 1)] = C64::new(0.5, 0.0);
        ints.v_coulomb
            .set_antisymmetrized(0, 1, 0, 1, C64::new(0.4, 0.0));
        ModelSystem::new(PhysicalConstants::default(), levels, ints, 1).unwrap()
    }

    #[test]
    fn default_constants_are_consistent() {
        let c = PhysicalConstants::default();
        assert!((c.c * c.alpha - 1.0).abs() < 1e-12);
        assert_eq!(c.rest_energy(), c.c * c.c);
    }

    #[test]
    fn empty_occupation_has_zero_reference_energy() {
        let mut s = two_level();
        s.levels[0].occupied_in_reference = false;
        s.levels[0].occupancy = 0.0;
        s.n_electrons = 0;
        assert_eq!(reference_energy(&s), 0.0);
    }

    #[test]
    fn single_occupied_level_gives_diagonal() {
        let s = two_level();
        assert_eq!(reference_energy(&s), -1.25);
    }

    #[test]
    fn missing_channel_is_reported() {
        let s = two_level();
        assert_eq!(
            channel_reference_energy(&s, ReferenceChannel::Breit),
            Err(ModelError::MissingChannel("breit"))
        );
    }

    #[test]
    fn zero_breit_channel_gives_zero() {
        let mut s = two_level();
        s.integrals.v_breit = Some(Tensor4::zeros(2));
        assert_eq!(
            channel_reference_energy(&s, ReferenceChannel::Breit).unwrap(),
            0.0
        );
    }

    #[test]
    fn replicate_one_is_identity() {
        let s = two_level();
        assert_eq!(replicate(&s, 1).unwrap(), s);
    }

    #[test]
    fn replicate_three_has_no_cross_terms() {
        let s = two_level();
        let r = replicate(&s, 3).unwrap();
        assert_eq!(r.n_levels(), 6);
        assert_eq!(r.n_electrons, 3);
        assert_eq!(r.integrals.v_coulomb.get(0, 3, 0, 3), C64::new(0.0, 0.0));
        assert_eq!(r.integrals.v_coulomb.get(2, 3, 2, 3), C64::new(0.4, 0.0));
        assert_eq!(r.integrals.h_ext[(0, 2)], C64::new(0.0, 0.0));
        assert_eq!(reference_energy(&r), 3.0 * reference_energy(&s));
    }

    #[test]
    fn replicate_rejects_zero_and_overflow() {
        let s = two_level();
        assert!(replicate(&s, 0).is_err());
        assert!(replicate(&s, MAX_LEVELS).is_err());
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let levels = vec![SpinorLevel::positive(0, -1.0, true)];
        let ints = IntegralSet::zeros(2);
        assert!(matches!(
            ModelSystem::new(PhysicalConstants::default(), levels, ints, 1),
            Err(ModelError::Structural(_))
        ));
    }
}
