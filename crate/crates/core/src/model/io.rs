//! JSON model files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "constants": { "alpha": 0.0072973525693, "c": 137.035999084, "m": 1.0, "z_scale": 1.0 },
//!   "levels": [
//!     { "index": 0, "energy": -0.6, "sector": "positive", "occupied": true,
//!       "occupancy": 1.0, "kramers": "unbarred", "lamb_shift": 0.0 }
//!   ],
//!   "integrals": {
//!     "h_ext": [[[re, im], ...], ...],
//!     "h_hf": ...,
//!     "v_coulomb": [[[[[re, im], ...]]]],
//!     "v_breit": ...,
//!     "lamb_terms": [{ "weight": 0.1, "delta_e": 0.375 }]
//!   },
//!   "n_electrons": 2
//! }
//! ```
//!
//! `occupancy` defaults to 1 for occupied levels and 0 otherwise; `h_hf`,
//! `v_breit`, `lamb_terms`, `kramers` and `lamb_shift` may be omitted.
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use super::{
    IntegralSet, Kramers, LambTerm, ModelError, ModelSystem, PhysicalConstants, Sector,
    SpinorLevel, Tensor4,
};
use crate::{CMatrix, C64};

pub const SCHEMA_VERSION: u32 = 1;

type Pair = [f64; 2];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub constants: PhysicalConstants,
    pub levels: Vec<LevelRecord>,
    pub integrals: IntegralRecord,
    pub n_electrons: usize,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelRecord {
    pub index: usize,
    pub energy: f64,
    pub sector: Sector,
    pub occupied: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupancy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kramers: Option<Kramers>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lamb_shift: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegralRecord {
    pub h_ext: Vec<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_hf: Option<Vec<Vec<Pair>>>,
    pub v_coulomb: Vec<Vec<Vec<Vec<Pair>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_breit: Option<Vec<Vec<Vec<Vec<Pair>>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lamb_terms: Option<Vec<LambTerm>>,
}

fn c(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

fn matrix_from(name: &str, rows: &[Vec<Pair>]) -> Result<CMatrix, ModelError> {
    let n = rows.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(ModelError::Parse(format!(
            "{name} row {i} has {} entries, expected {n}",
            r.len()
        )));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| c(rows[i][j])))
}

fn matrix_to(m: &CMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect())
        .collect()
}

fn tensor_from(name: &str, t: &[Vec<Vec<Vec<Pair>>>]) -> Result<Tensor4, ModelError> {
    let n = t.len();
    let mut data = Vec::with_capacity(n.pow(4));
    for (p, a) in t.iter().enumerate() {
        for (q, b) in a.iter().enumerate() {
            for (r, row) in b.iter().enumerate() {
                if a.len() != n || b.len() != n || row.len() != n {
                    return Err(ModelError::Parse(format!(
                        "{name} is ragged near [{p}][{q}][{r}], expected dimension {n}"
                    )));
                }
                data.extend(row.iter().copied().map(c));
            }
        }
    }
    Tensor4::from_vec(n, data)
        .ok_or_else(|| ModelError::Parse(format!("{name} is ragged, expected dimension {n}")))
}

fn tensor_to(t: &Tensor4) -> Vec<Vec<Vec<Vec<Pair>>>> {
    let n = t.dim();
    (0..n)
        .map(|p| {
            (0..n)
                .map(|q| {
                    (0..n)
                        .map(|r| (0..n).map(|s| pair(t.get(p, q, r, s))).collect())
                        .collect()
                })
                .collect()
        })
        .collect()
}

impl ModelFile {
    pub fn from_system(system: &ModelSystem) -> Self {
        let ints = &system.integrals;
        Self {
            schema_version: SCHEMA_VERSION,
            constants: system.constants,
            levels: system
                .levels
                .iter()
                .map(|l| LevelRecord {
                    index: l.index,
                    energy: l.energy,
                    sector: l.sector,
                    occupied: l.occupied_in_reference,
                    occupancy: Some(l.occupancy),
                    kramers: l.kramers,
                    lamb_shift: l.lamb_shift,
                })
                .collect(),
            integrals: IntegralRecord {
                h_ext: matrix_to(&ints.h_ext),
                h_hf: ints.h_hf.as_ref().map(matrix_to),
                v_coulomb: tensor_to(&ints.v_coulomb),
                v_breit: ints.v_breit.as_ref().map(tensor_to),
                lamb_terms: ints.lamb_terms.clone(),
            },
            n_electrons: system.n_electrons,
        }
    }

    pub fn into_system(self) -> Result<ModelSystem, ModelError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ModelError::Parse(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        let levels = self
            .levels
            .into_iter()
            .map(|r| SpinorLevel {
                index: r.index,
                energy: r.energy,
                sector: r.sector,
                occupied_in_reference: r.occupied,
                occupancy: r.occupancy.unwrap_or(if r.occupied { 1.0 } else { 0.0 }),
                kramers: r.kramers,
                lamb_shift: r.lamb_shift,
            })
            .collect();
        let ints = self.integrals;
        let integrals = IntegralSet {
            h_ext: matrix_from("h_ext", &ints.h_ext)?,
            h_hf: ints
                .h_hf
                .as_deref()
                .map(|m| matrix_from("h_hf", m))
                .transpose()?,
            v_coulomb: tensor_from("v_coulomb", &ints.v_coulomb)?,
            v_breit: ints
                .v_breit
                .as_deref()
                .map(|t| tensor_from("v_breit", t))
                .transpose()?,
            lamb_terms: ints.lamb_terms,
        };
        ModelSystem::new(self.constants, levels, integrals, self.n_electrons)
    }
}

impl ModelSystem {
    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        file.into_system()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&ModelFile::from_system(self))
            .expect("model records always serialize")
    }
}
