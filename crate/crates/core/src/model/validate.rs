//! Invariant checks for model systems. Report-only: nothing here fails.

use std::fmt;

use serde::Serialize;

use super::{ModelSystem, Sector, Tensor4};
use crate::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Absolute tolerance for Hermiticity and antisymmetry.
    pub tolerance: f64,
    /// Slack above `-2mc^2` allowed for negative-sector energies; `None` means 0.1 mc^2.
    pub gap_tolerance: Option<f64>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            gap_tolerance: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Constants,
    OneBodyHermiticity,
    Antisymmetry,
    TwoBodyHermiticity,
    LambWeight,
    SectorEnergy,
    NegativeSectorOccupied,
    Occupancy,
    ElectronCount,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Channel or level the violation belongs to.
    pub location: String,
    /// Worst deviation found, in the natural unit of the check.
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} at {}: {:.3e}",
            self.kind, self.location, self.magnitude
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, location: impl Into<String>, magnitude: f64) {
        self.violations.push(Violation {
            kind,
            location: location.into(),
            magnitude,
        });
    }
}

/// Largest `|h_pq - conj(h_qp)|`, with its indices.
fn hermiticity_defect(h: &CMatrix) -> (f64, usize, usize) {
    let n = h.nrows();
    let mut worst = (0.0, 0, 0);
    for p in 0..n {
        for q in p..n {
            let d = (h[(p, q)] - h[(q, p)].conj()).norm();
            if d > worst.0 || d.is_nan() {
                worst = (d, p, q);
            }
        }
    }
    worst
}

struct TensorDefects {
    antisymmetry: (f64, [usize; 4]),
    hermiticity: (f64, [usize; 4]),
}

fn tensor_defects(t: &Tensor4) -> TensorDefects {
    let n = t.dim();
    let mut out = TensorDefects {
        antisymmetry: (0.0, [0; 4]),
        hermiticity: (0.0, [0; 4]),
    };
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = t.get(p, q, r, s);
                    let a = (v + t.get(q, p, r, s))
                        .norm()
                        .max((v + t.get(p, q, s, r)).norm());
                    if a > out.antisymmetry.0 || a.is_nan() {
                        out.antisymmetry = (a, [p, q, r, s]);
                    }
                    let h = (v - t.get(r, s, p, q).conj()).norm();
                    if h > out.hermiticity.0 || h.is_nan() {
                        out.hermiticity = (h, [p, q, r, s]);
                    }
                }
            }
        }
    }
    out
}

pub(super) fn validate(system: &ModelSystem, options: &ValidationOptions) -> ValidationReport {
    let tol = options.tolerance;
    let mut report = ValidationReport::default();

    let k = &system.constants;
    let consistency = (k.c * k.alpha - 1.0).abs();
    if consistency > 1e-12 {
        report.push(ViolationKind::Constants, "c*alpha", consistency);
    }
    for (name, value) in [
        ("alpha", k.alpha),
        ("c", k.c),
        ("m", k.m),
        ("z_scale", k.z_scale),
    ] {
        if !(value > 0.0) {
            report.push(ViolationKind::Constants, name, value.abs());
        }
    }

    let ints = &system.integrals;
    let one_body = [("h_ext", Some(&ints.h_ext)), ("h_hf", ints.h_hf.as_ref())];
    for (name, h) in one_body {
        if let Some(h) = h {
            let (d, p, q) = hermiticity_defect(h);
            if !(d <= tol) {
                report.push(
                    ViolationKind::OneBodyHermiticity,
                    format!("{name}[{p}][{q}]"),
                    d,
                );
            }
        }
    }
    let two_body = [
        ("v_coulomb", Some(&ints.v_coulomb)),
        ("v_breit", ints.v_breit.as_ref()),
    ];
    for (name, t) in two_body {
        if let Some(t) = t {
            let d = tensor_defects(t);
            if !(d.antisymmetry.0 <= tol) {
                report.push(
                    ViolationKind::Antisymmetry,
                    format!("{name}{:?}", d.antisymmetry.1),
                    d.antisymmetry.0,
                );
            }
            if !(d.hermiticity.0 <= tol) {
                report.push(
                    ViolationKind::TwoBodyHermiticity,
                    format!("{name}{:?}", d.hermiticity.1),
                    d.hermiticity.0,
                );
            }
        }
    }
    if let Some(terms) = &ints.lamb_terms {
        for (i, t) in terms.iter().enumerate() {
            if !(t.weight >= 0.0) {
                report.push(
                    ViolationKind::LambWeight,
                    format!("lamb_terms[{i}]"),
                    t.weight.abs(),
                );
            }
        }
    }

    let gap = options
        .gap_tolerance
        .unwrap_or_else(|| system.default_gap_tolerance());
    let ceiling = -2.0 * k.rest_energy() + gap;
    for l in &system.levels {
        if l.sector == Sector::Negative {
            if !(l.energy <= ceiling) {
                report.push(
                    ViolationKind::SectorEnergy,
                    format!("level {}", l.index),
                    l.energy - ceiling,
                );
            }
            if l.occupied_in_reference {
                report.push(
                    ViolationKind::NegativeSectorOccupied,
                    format!("level {}", l.index),
                    l.occupancy,
                );
            }
        }
        let bad_occupancy = if l.occupied_in_reference {
            !(l.occupancy > 0.0 && l.occupancy <= 1.0)
        } else {
            l.occupancy != 0.0
        };
        if bad_occupancy {
            report.push(
                ViolationKind::Occupancy,
                format!("level {}", l.index),
                l.occupancy,
            );
        }
    }

    let occupied = system.occupied().count();
    if occupied != system.n_electrons {
        report.push(
            ViolationKind::ElectronCount,
            format!(
                "{} electrons, {occupied} occupied levels",
                system.n_electrons
            ),
            (occupied as f64 - system.n_electrons as f64).abs(),
        );
    }
    report
}
