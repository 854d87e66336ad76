//! QED channel working formulas: the Lamb sum over states, second-order
//! electron-positron pair energies, and assembly of the channel-summed
//! Hamiltonian that the Fock-space engine and the CC solvers run on.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::model::{
    channel_reference_energy, reference_energy, LambTerm, ModelSystem, PhysicalConstants,
    ReferenceChannel, SpinorLevel, Tensor4,
};
use crate::{CMatrix, C64};

/// Below this `|E' - E|` a Lamb term contributes nothing (`x ln x -> 0`).
pub const LAMB_DEGENERACY_FLOOR: f64 = 1e-10;

/// Smallest exact-mode pair denominator accepted.
pub const PAIR_DENOMINATOR_FLOOR: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QedError {
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("lamb term {index}: |dE| = {delta_e:e} is not small against mc^2 = {rest_energy:e}")]
    LambDomain {
        index: usize,
        delta_e: f64,
        rest_energy: f64,
    },
    #[error("lamb term {index} has negative weight {weight:e}")]
    NegativeWeight { index: usize, weight: f64 },
    #[error("degenerate pair denominator {denominator:e} at (i, j, a, b) = {quadruple:?}")]
    DegenerateDenominator {
        quadruple: [usize; 4],
        denominator: f64,
    },
}

/// Optional channels layered over the always-present external + Coulomb Hamiltonian.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub struct ChannelSet {
    pub breit: bool,
    pub hyperfine: bool,
    pub lamb: bool,
}

impl ChannelSet {
    pub const COULOMB: ChannelSet = ChannelSet {
        breit: false,
        hyperfine: false,
        lamb: false,
    };

    pub const ALL: ChannelSet = ChannelSet {
        breit: true,
        hyperfine: true,
        lamb: true,
    };

    pub fn with_breit() -> Self {
        Self {
            breit: true,
            ..Self::COULOMB
        }
    }
}

impl fmt::Display for ChannelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("coulomb")?;
        for (on, name) in [
            (self.breit, "breit"),
            (self.hyperfine, "hyperfine"),
            (self.lamb, "lamb"),
        ] {
            if on {
                write!(f, ",{name}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for ChannelSet {
    type Err = QedError;

    /// Comma-separated list drawn from `coulomb`, `breit`, `hyperfine`, `lamb`, `all`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut set = ChannelSet::COULOMB;
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match item {
                "coulomb" | "external" => {}
                "breit" => set.breit = true,
                "hyperfine" => set.hyperfine = true,
                "lamb" => set.lamb = true,
                "all" => set = ChannelSet::ALL,
                other => {
                    return Err(QedError::Configuration(format!(
                        "unknown channel `{other}`"
                    )))
                }
            }
        }
        Ok(set)
    }
}

/// Reference (mean-field) energy split by channel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ReferenceParts {
    /// External one-body plus Coulomb.
    pub coulomb: f64,
    pub breit: f64,
    pub hyperfine: f64,
    /// Scalar Lamb shift plus occupied per-level shifts.
    pub lamb: f64,
}

impl ReferenceParts {
    pub fn total(&self) -> f64 {
        self.coulomb + self.breit + self.hyperfine + self.lamb
    }
}

/// Channel-summed working Hamiltonian.
///
/// `one_body` holds the external channel plus hyperfine and per-level Lamb
/// shifts when enabled; `two_body` holds Coulomb plus the sector-projected
/// Breit tensor. The Lamb sum over states stays a scalar in `lamb_scalar`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub constants: PhysicalConstants,
    pub levels: Vec<SpinorLevel>,
    pub one_body: CMatrix,
    pub two_body: Tensor4,
    pub lamb_scalar: f64,
    pub n_electrons: usize,
    pub channels: ChannelSet,
    pub reference: ReferenceParts,
}

impl Hamiltonian {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn occupied_indices(&self) -> Vec<usize> {
        self.levels
            .iter()
            .filter(|l| l.occupied_in_reference)
            .map(|l| l.index)
            .collect()
    }

    /// `f_pq = h_pq + sum_i <pi||qi>` over the reference occupation.
    pub fn fock_matrix(&self) -> CMatrix {
        let occ = self.occupied_indices();
        let n = self.n_levels();
        CMatrix::from_fn(n, n, |p, q| {
            occ.iter().fold(self.one_body[(p, q)], |acc, &i| {
                acc + self.two_body.get(p, i, q, i)
            })
        })
    }

    /// `<ref|H|ref>` of the working Hamiltonian, without the Lamb scalar.
    pub fn reference_expectation(&self) -> f64 {
        let occ = self.occupied_indices();
        let mut e = 0.0;
        for &i in &occ {
            e += self.one_body[(i, i)].re;
            for &j in &occ {
                e += 0.5 * self.two_body.get(i, j, i, j).re;
            }
        }
        e
    }

    /// True when no stored integral has an imaginary part.
    pub fn is_real(&self) -> bool {
        self.one_body.iter().all(|z| z.im == 0.0) && self.two_body.is_real()
    }
}

/// Sums the enabled channels into one working Hamiltonian.
///
/// Breit entries touching any negative-sector level are dropped (the
/// positive-projected operator). Enabling a channel the integral set does not
/// carry is a configuration error.
pub fn assemble_channels(
    system: &ModelSystem,
    enabled: ChannelSet,
) -> Result<Hamiltonian, QedError> {
    let ints = &system.integrals;
    let missing =
        |name: &str| QedError::Configuration(format!("channel `{name}` enabled but absent"));

    let mut one_body = ints.h_ext.clone();
    let mut two_body = ints.v_coulomb.clone();
    let mut reference = ReferenceParts {
        coulomb: reference_energy(system),
        ..ReferenceParts::default()
    };
    let mut lamb_scalar = 0.0;

    if enabled.breit {
        let breit = ints.v_breit.as_ref().ok_or_else(|| missing("breit"))?;
        let negative: Vec<bool> = system.levels.iter().map(SpinorLevel::is_negative).collect();
        let projected = breit.map_indexed(|p, q, r, s, v| {
            if negative[p] || negative[q] || negative[r] || negative[s] {
                C64::new(0.0, 0.0)
            } else {
                v
            }
        });
        two_body = two_body.add(&projected);
        reference.breit = channel_reference_energy(system, ReferenceChannel::Breit)
            .map_err(|e| QedError::Configuration(e.to_string()))?;
    }
    if enabled.hyperfine {
        let hf = ints.h_hf.as_ref().ok_or_else(|| missing("hyperfine"))?;
        one_body += hf;
        reference.hyperfine = channel_reference_energy(system, ReferenceChannel::Hyperfine)
            .map_err(|e| QedError::Configuration(e.to_string()))?;
    }
    if enabled.lamb {
        let per_level = system.levels.iter().any(|l| l.lamb_shift.is_some());
        if ints.lamb_terms.is_none() && !per_level {
            return Err(missing("lamb"));
        }
        if let Some(terms) = &ints.lamb_terms {
            lamb_scalar = lamb_shift(terms, &system.constants)?;
        }
        let mut occupied_shift = 0.0;
        for l in &system.levels {
            if let Some(d) = l.lamb_shift {
                one_body[(l.index, l.index)] += C64::new(d, 0.0);
                if l.occupied_in_reference {
                    occupied_shift += l.occupancy * d;
                }
            }
        }
        reference.lamb = lamb_scalar + occupied_shift;
    }

    Ok(Hamiltonian {
        constants: system.constants,
        levels: system.levels.clone(),
        one_body,
        two_body,
        lamb_scalar,
        n_electrons: system.n_electrons,
        channels: enabled,
        reference,
    })
}

/// Nonrelativistic-limit Lamb sum `(2 alpha / 3 pi c^2) sum w dE ln(mc^2 / |dE|)`.
pub fn lamb_shift(terms: &[LambTerm], constants: &PhysicalConstants) -> Result<f64, QedError> {
    let mc2 = constants.rest_energy();
    let prefactor =
        2.0 * constants.alpha / (3.0 * std::f64::consts::PI * constants.c * constants.c);
    let mut sum = 0.0;
    for (index, t) in terms.iter().enumerate() {
        if !(t.weight >= 0.0) {
            return Err(QedError::NegativeWeight {
                index,
                weight: t.weight,
            });
        }
        let de = t.delta_e.abs();
        if de >= mc2 {
            return Err(QedError::LambDomain {
                index,
                delta_e: t.delta_e,
                rest_energy: mc2,
            });
        }
        if de < LAMB_DEGENERACY_FLOOR {
            continue;
        }
        sum += t.weight * t.delta_e * (mc2 / de).ln();
    }
    Ok(prefactor * sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairDenominator {
    /// `e_i + e_j - e_a - e_p'` from the level energies.
    #[default]
    Exact,
    /// `2mc^2` for one-pair and `4mc^2` for two-pair terms.
    AlphaZLimit,
}

impl FromStr for PairDenominator {
    type Err = QedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "limit" | "alpha-z-limit" => Ok(Self::AlphaZLimit),
            other => Err(QedError::Configuration(format!(
                "unknown pair denominator `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    OnePair,
    TwoPair,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTerm {
    pub kind: PairKind,
    /// `(i, j, a, p')` for one-pair, `(i, j, p', q')` for two-pair terms.
    pub indices: [usize; 4],
    pub contribution: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PairEnergyReport {
    pub one_pair: f64,
    pub two_pair: f64,
    pub terms: Vec<PairTerm>,
}

/// Second-order pair energies from the Coulomb channel:
/// `sum f_i f_j |<x y||i j>|^2 / D` with `x y` one positive virtual and one
/// negative level (one-pair) or two negative levels (two-pair).
pub fn pair_energy_mbpt2(
    system: &ModelSystem,
    mode: PairDenominator,
) -> Result<PairEnergyReport, QedError> {
    let v = &system.integrals.v_coulomb;
    let mc2 = system.constants.rest_energy();
    let occ: Vec<&SpinorLevel> = system.occupied().collect();
    let virt: Vec<&SpinorLevel> = system
        .levels
        .iter()
        .filter(|l| !l.occupied_in_reference && !l.is_negative())
        .collect();
    let neg: Vec<&SpinorLevel> = system.levels.iter().filter(|l| l.is_negative()).collect();

    let mut report = PairEnergyReport::default();
    let denominator =
        |i: &SpinorLevel, j: &SpinorLevel, x: &SpinorLevel, y: &SpinorLevel, limit: f64| {
            let d = match mode {
                PairDenominator::Exact => i.energy + j.energy - x.energy - y.energy,
                PairDenominator::AlphaZLimit => limit,
            };
            if d.abs() < PAIR_DENOMINATOR_FLOOR {
                Err(QedError::DegenerateDenominator {
                    quadruple: [i.index, j.index, x.index, y.index],
                    denominator: d,
                })
            } else {
                Ok(d)
            }
        };

    for (n, i) in occ.iter().enumerate() {
        for j in &occ[n + 1..] {
            let weight = i.occupancy * j.occupancy;
            for a in &virt {
                for p in &neg {
                    let x = v.get(a.index, p.index, i.index, j.index).norm_sqr();
                    if x == 0.0 {
                        continue;
                    }
                    let d = denominator(i, j, a, p, 2.0 * mc2)?;
                    let e = weight * x / d;
                    report.one_pair += e;
                    report.terms.push(PairTerm {
                        kind: PairKind::OnePair,
                        indices: [i.index, j.index, a.index, p.index],
                        contribution: e,
                    });
                }
            }
            for (m, p) in neg.iter().enumerate() {
                for q in &neg[m + 1..] {
                    let x = v.get(p.index, q.index, i.index, j.index).norm_sqr();
                    if x == 0.0 {
                        continue;
                    }
                    let d = denominator(i, j, p, q, 4.0 * mc2)?;
                    let e = weight * x / d;
                    report.two_pair += e;
                    report.terms.push(PairTerm {
                        kind: PairKind::TwoPair,
                        indices: [i.index, j.index, p.index, q.index],
                        contribution: e,
                    });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{IntegralSet, Kramers};

    fn with_pairs(c: f64) -> ModelSystem {
        let k = PhysicalConstants::with_speed_of_light(c);
        let mc2 = k.rest_energy();
        let levels = vec![
            SpinorLevel::positive(0, -1.0, true).with_kramers(Kramers::Unbarred),
            SpinorLevel::positive(1, -1.0, true).with_kramers(Kramers::Barred),
            SpinorLevel::positive(2, 0.5, false),
            SpinorLevel::negative(3, -2.0 * mc2 - 0.2),
            SpinorLevel::negative(4, -2.0 * mc2 - 0.3),
        ];
        let mut ints = IntegralSet::zeros(5);
        ints.v_coulomb
            .set_antisymmetrized(2, 3, 0, 1, C64::new(0.02, 0.01));
        ints.v_coulomb
            .set_antisymmetrized(3, 4, 0, 1, C64::new(-0.03, 0.0));
        ModelSystem::new(k, levels, ints, 2).unwrap()
    }

    #[test]
    fn empty_lamb_list_is_zero() {
        assert_eq!(lamb_shift(&[], &PhysicalConstants::default()).unwrap(), 0.0);
    }

    #[test]
    fn single_lamb_term_substitutes_directly() {
        let k = PhysicalConstants::default();
        let t = LambTerm {
            weight: 0.7,
            delta_e: 0.25,
        };
        let expected = 2.0 * k.alpha / (3.0 * std::f64::consts::PI * k.c * k.c)
            * 0.7
            * 0.25
            * (k.c * k.c / 0.25).ln();
        assert_eq!(lamb_shift(&[t], &k).unwrap(), expected);
    }

    #[test]
    fn opposite_lamb_terms_cancel() {
        let k = PhysicalConstants::default();
        let terms = [
            LambTerm {
                weight: 0.3,
                delta_e: 0.4,
            },
            LambTerm {
                weight: 0.3,
                delta_e: -0.4,
            },
        ];
        assert_eq!(lamb_shift(&terms, &k).unwrap(), 0.0);
    }

    #[test]
    fn lamb_domain_and_floor() {
        let k = PhysicalConstants::with_speed_of_light(2.0);
        let err = lamb_shift(
            &[LambTerm {
                weight: 1.0,
                delta_e: -4.0,
            }],
            &k,
        )
        .unwrap_err();
        assert!(matches!(err, QedError::LambDomain { index: 0, .. }));
        let floor = lamb_shift(
            &[LambTerm {
                weight: 1.0,
                delta_e: 1e-12,
            }],
            &k,
        )
        .unwrap();
        assert_eq!(floor, 0.0);
    }

    #[test]
    fn no_negative_levels_gives_no_pair_energy() {
        let mut s = with_pairs(137.0);
        s.levels.truncate(3);
        let mut ints = IntegralSet::zeros(3);
        ints.v_coulomb
            .set_antisymmetrized(2, 0, 0, 1, C64::new(0.1, 0.0));
        let s = ModelSystem::new(s.constants, s.levels, ints, 2).unwrap();
        let r = pair_energy_mbpt2(&s, PairDenominator::Exact).unwrap();
        assert_eq!((r.one_pair, r.two_pair), (0.0, 0.0));
    }

    #[test]
    fn limit_mode_substitutes_rest_energy() {
        let s = with_pairs(10.0);
        let r = pair_energy_mbpt2(&s, PairDenominator::AlphaZLimit).unwrap();
        let one = C64::new(0.02, 0.01).norm_sqr() / 200.0;
        let two = 0.03f64.powi(2) / 400.0;
        assert!((r.one_pair - one).abs() < 1e-18);
        assert!((r.two_pair - two).abs() < 1e-18);
        assert_eq!(r.terms.len(), 2);
    }

    #[test]
    fn limit_mode_scales_with_inverse_c_squared() {
        let a = pair_energy_mbpt2(&with_pairs(50.0), PairDenominator::AlphaZLimit).unwrap();
        let b = pair_energy_mbpt2(&with_pairs(100.0), PairDenominator::AlphaZLimit).unwrap();
        assert_eq!(a.one_pair, 4.0 * b.one_pair);
        assert_eq!(a.two_pair, 4.0 * b.two_pair);
    }

    #[test]
    fn exact_mode_denominator_is_positive() {
        let r = pair_energy_mbpt2(&with_pairs(137.0), PairDenominator::Exact).unwrap();
        assert!(r.one_pair > 0.0 && r.two_pair > 0.0);
    }

    #[test]
    fn degenerate_exact_denominator_names_quadruple() {
        let mut s = with_pairs(137.0);
        s.levels[3].energy = -2.0 - 0.5;
        let err = pair_energy_mbpt2(&s, PairDenominator::Exact).unwrap_err();
        assert_eq!(
            err,
            QedError::DegenerateDenominator {
                quadruple: [0, 1, 2, 3],
                denominator: 0.0
            }
        );
    }

    #[test]
    fn absent_channel_is_configuration_error() {
        let s = with_pairs(137.0);
        assert!(matches!(
            assemble_channels(&s, ChannelSet::with_breit()),
            Err(QedError::Configuration(_))
        ));
        assert!(assemble_channels(
            &s,
            ChannelSet {
                lamb: true,
                ..ChannelSet::COULOMB
            }
        )
        .is_err());
    }

    #[test]
    fn zero_channels_match_coulomb_bit_for_bit() {
        let mut s = with_pairs(137.0);
        s.integrals.v_breit = Some(Tensor4::zeros(5));
        s.integrals.h_hf = Some(CMatrix::zeros(5, 5));
        s.integrals.lamb_terms = Some(vec![]);
        let all = assemble_channels(&s, ChannelSet::ALL).unwrap();
        let plain = assemble_channels(&s, ChannelSet::COULOMB).unwrap();
        assert_eq!(all.one_body, plain.one_body);
        assert_eq!(all.two_body, plain.two_body);
        assert_eq!(all.reference.total(), plain.reference.total());
    }

    #[test]
    fn breit_is_projected_to_positive_levels() {
        let mut s = with_pairs(137.0);
        let mut b = Tensor4::zeros(5);
        b.set_antisymmetrized(2, 3, 0, 1, C64::new(0.5, 0.0));
        b.set_antisymmetrized(0, 2, 0, 1, C64::new(0.25, 0.0));
        s.integrals.v_breit = Some(b);
        let h = assemble_channels(&s, ChannelSet::with_breit()).unwrap();
        assert_eq!(h.two_body.get(2, 3, 0, 1), C64::new(0.02, 0.01));
        assert_eq!(h.two_body.get(0, 2, 0, 1), C64::new(0.25, 0.0));
    }

    #[test]
    fn channel_set_parses_and_prints() {
        let set: ChannelSet = "coulomb, breit,lamb".parse().unwrap();
        assert_eq!(
            set,
            ChannelSet {
                breit: true,
                lamb: true,
                hyperfine: false
            }
        );
        assert_eq!(set.to_string(), "coulomb,breit,lamb");
        assert_eq!("all".parse::<ChannelSet>().unwrap(), ChannelSet::ALL);
        assert!("magnetic".parse::<ChannelSet>().is_err());
    }
}
