//! CCD and CCSD solvers with optional electron-positron pair doubles, plus the
//! MP2 and doubles-CI reference points.

mod blocks;
mod equations;

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use blocks::{Block2, Block4, Blocks, ZERO};

use crate::fock::{self, ClusterOperator, FockError, GenerationRule};
use crate::model::ModelSystem;
use crate::qed::{
    assemble_channels, ChannelSet, Hamiltonian, PairDenominator, QedError, PAIR_DENOMINATOR_FLOOR,
};
use crate::C64;

/// Denominators smaller than this need a level shift.
pub const DENOMINATOR_FLOOR: f64 = 1e-8;

/// Largest imaginary energy tolerated for a real Hamiltonian.
pub const IMAGINARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CcError {
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("no convergence after {iterations} iterations (last residual {last:e})")]
    Divergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error(transparent)]
    Qed(#[from] QedError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ccd,
    #[default]
    Ccsd,
}

impl FromStr for Method {
    type Err = CcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ccd" => Ok(Self::Ccd),
            "ccsd" => Ok(Self::Ccsd),
            other => Err(CcError::Configuration(format!("unknown method `{other}`"))),
        }
    }
}

/// How negative-sector doubles enter the solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    /// Positive-sector CC; pair doubles as first-order estimates afterwards.
    #[default]
    Decoupled,
    /// Negative levels join the virtual space of the doubles equations.
    Coupled,
}

impl FromStr for PairMode {
    type Err = CcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "decoupled" => Ok(Self::Decoupled),
            "coupled" => Ok(Self::Coupled),
            other => Err(CcError::Configuration(format!(
                "unknown pair mode `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcOptions {
    pub max_iterations: usize,
    /// Fraction of the previous amplitudes kept at each update.
    pub damping: f64,
    pub residual_tol: f64,
    pub energy_tol: f64,
    /// Added to `|D|` of every denominator; zero disables shifting.
    pub level_shift: f64,
    pub pair_mode: PairMode,
    /// Denominators of the decoupled pair estimates.
    pub pair_denominator: PairDenominator,
}

impl Default for CcOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            damping: 0.5,
            residual_tol: 1e-10,
            energy_tol: 1e-12,
            level_shift: 0.0,
            pair_mode: PairMode::Decoupled,
            pair_denominator: PairDenominator::Exact,
        }
    }
}

/// Cluster amplitudes keyed by level indices.
///
/// `t2` holds `(i, j, a, b)` with `i < j`, `a < b`; `t2_1pair` holds
/// `(i, j, a, p')` with `a` positive and `p'` negative; `t2_2pair` holds
/// `(i, j, p', q')` with `p' < q'`. Exact zeros are not stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Amplitudes {
    pub t1: BTreeMap<(usize, usize), C64>,
    pub t2: BTreeMap<[usize; 4], C64>,
    pub t2_1pair: BTreeMap<[usize; 4], C64>,
    pub t2_2pair: BTreeMap<[usize; 4], C64>,
    pub iterations: usize,
    pub residual_norm: f64,
}

impl Amplitudes {
    /// The operator `T1 + T2 (+ pair doubles)` for the Fock-space engine.
    pub fn to_cluster_operator(&self) -> ClusterOperator {
        let mut op = ClusterOperator::default();
        for (&(i, a), &t) in &self.t1 {
            op.push(&[i], &[a], t);
        }
        for map in [&self.t2, &self.t2_1pair, &self.t2_2pair] {
            for (&[i, j, a, b], &t) in map {
                op.push(&[i, j], &[a, b], t);
            }
        }
        op
    }

    pub fn max_abs(&self) -> f64 {
        self.t1
            .values()
            .chain(self.t2.values())
            .chain(self.t2_1pair.values())
            .chain(self.t2_2pair.values())
            .map(|z| z.norm())
            .fold(0.0, |m: f64, x| {
                if x.is_nan() || m.is_nan() {
                    f64::NAN
                } else {
                    m.max(x)
                }
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub e_reference: f64,
    pub e_breit0: f64,
    pub e_lamb0: f64,
    pub e_hf0: f64,
    pub e_correl: f64,
    pub e_1pair: f64,
    pub e_2pair: f64,
    pub e_total: f64,
    pub converged: bool,
}

impl CorrelationReport {
    fn new(h: &Hamiltonian, e_correl: f64, e_1pair: f64, e_2pair: f64) -> Self {
        let r = h.reference;
        Self {
            e_reference: r.coulomb,
            e_breit0: r.breit,
            e_lamb0: r.lamb,
            e_hf0: r.hyperfine,
            e_correl,
            e_1pair,
            e_2pair,
            e_total: r.coulomb + r.breit + r.lamb + r.hyperfine + e_correl + e_1pair + e_2pair,
            converged: true,
        }
    }
}

/// Index bookkeeping for one solve.
struct Workspace {
    blocks: Blocks,
    negative: Vec<bool>,
}

impl Workspace {
    fn new(h: &Hamiltonian, mode: PairMode) -> Result<Self, CcError> {
        if let Some(l) = h
            .levels
            .iter()
            .find(|l| l.occupied_in_reference && l.occupancy != 1.0)
        {
            return Err(CcError::Configuration(format!(
                "level {} has occupancy {}; the CC solvers need a closed-shell reference",
                l.index, l.occupancy
            )));
        }
        if let Some(l) = h
            .levels
            .iter()
            .find(|l| l.occupied_in_reference && l.is_negative())
        {
            return Err(CcError::Configuration(format!(
                "negative-sector level {} is occupied",
                l.index
            )));
        }
        let occ = h.occupied_indices();
        let vir: Vec<usize> = h
            .levels
            .iter()
            .filter(|l| !l.occupied_in_reference)
            .filter(|l| mode == PairMode::Coupled || !l.is_negative())
            .map(|l| l.index)
            .collect();
        let negative = vir.iter().map(|&a| h.levels[a].is_negative()).collect();
        Ok(Self {
            blocks: Blocks::new(h, occ, vir),
            negative,
        })
    }

    fn dense(&self, amps: &Amplitudes) -> (Block2, Block4) {
        let b = &self.blocks;
        let (o, v) = (b.no(), b.nv());
        let lo: BTreeMap<usize, usize> = b.occ.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        let lv: BTreeMap<usize, usize> = b.vir.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        let mut t1 = Block2::zeros([o, v]);
        for (&(i, a), &t) in &amps.t1 {
            if let (Some(&i), Some(&a)) = (lo.get(&i), lv.get(&a)) {
                t1.add(i, a, t);
            }
        }
        let mut t2 = Block4::zeros([o, o, v, v]);
        for map in [&amps.t2, &amps.t2_1pair, &amps.t2_2pair] {
            for (&[i, j, a, c], &t) in map {
                if let (Some(&i), Some(&j), Some(&a), Some(&c)) =
                    (lo.get(&i), lo.get(&j), lv.get(&a), lv.get(&c))
                {
                    t2.add(i, j, a, c, t);
                    t2.add(j, i, a, c, -t);
                    t2.add(i, j, c, a, -t);
                    t2.add(j, i, c, a, t);
                }
            }
        }
        (t1, t2)
    }

    fn sparse(&self, t1: &Block2, t2: &Block4) -> Amplitudes {
        let b = &self.blocks;
        let (o, v) = (b.no(), b.nv());
        let mut amps = Amplitudes::default();
        for i in 0..o {
            for a in 0..v {
                let t = t1.get(i, a);
                if t != ZERO {
                    amps.t1.insert((b.occ[i], b.vir[a]), t);
                }
            }
        }
        for i in 0..o {
            for j in i + 1..o {
                for a in 0..v {
                    for c in a + 1..v {
                        let t = t2.get(i, j, a, c);
                        if t == ZERO {
                            continue;
                        }
                        let (gi, gj, ga, gc) = (b.occ[i], b.occ[j], b.vir[a], b.vir[c]);
                        match (self.negative[a], self.negative[c]) {
                            (false, false) => {
                                amps.t2.insert([gi, gj, ga, gc], t);
                            }
                            (false, true) => {
                                amps.t2_1pair.insert([gi, gj, ga, gc], t);
                            }
                            (true, false) => {
                                amps.t2_1pair.insert([gi, gj, gc, ga], -t);
                            }
                            (true, true) => {
                                amps.t2_2pair.insert([gi, gj, ga, gc], t);
                            }
                        }
                    }
                }
            }
        }
        amps
    }
}

/// Shifted Jacobi denominator, or an error when it is too small to divide by.
fn denominator(d: f64, shift: f64, what: impl FnOnce() -> String) -> Result<f64, CcError> {
    if shift > 0.0 {
        Ok(if d < 0.0 { d - shift } else { d + shift })
    } else if d.abs() < DENOMINATOR_FLOOR {
        Err(CcError::Configuration(format!(
            "degenerate denominator {d:e} at {} without level shift",
            what()
        )))
    } else {
        Ok(d)
    }
}

pub fn ccd_solve(
    system: &ModelSystem,
    channels: ChannelSet,
    options: &CcOptions,
) -> Result<(Amplitudes, CorrelationReport), CcError> {
    let h = assemble_channels(system, channels)?;
    solve(&h, Method::Ccd, options)
}

pub fn ccsd_solve(
    system: &ModelSystem,
    channels: ChannelSet,
    options: &CcOptions,
) -> Result<(Amplitudes, CorrelationReport), CcError> {
    let h = assemble_channels(system, channels)?;
    solve(&h, Method::Ccsd, options)
}

/// Damped Jacobi iteration on the amplitude equations of an assembled Hamiltonian.
pub fn solve(
    h: &Hamiltonian,
    method: Method,
    options: &CcOptions,
) -> Result<(Amplitudes, CorrelationReport), CcError> {
    if !(0.0..1.0).contains(&options.damping) {
        return Err(CcError::Configuration(format!(
            "damping {} outside [0, 1)",
            options.damping
        )));
    }
    let ws = Workspace::new(h, options.pair_mode)?;
    let b = &ws.blocks;
    let (o, v) = (b.no(), b.nv());
    let singles = method == Method::Ccsd;
    let shift = options.level_shift;

    let d1 = {
        let mut d = vec![f64::INFINITY; o * v];
        if singles {
            for i in 0..o {
                for a in 0..v {
                    if ws.negative[a] {
                        continue;
                    }
                    let raw = (b.f_oo.get(i, i) - b.f_vv.get(a, a)).re;
                    d[i * v + a] = denominator(raw, shift, || {
                        format!("single ({}, {})", b.occ[i], b.vir[a])
                    })?;
                }
            }
        }
        d
    };
    let mut d2 = vec![f64::INFINITY; o * o * v * v];
    for i in 0..o {
        for j in 0..o {
            if i == j {
                continue;
            }
            for a in 0..v {
                for c in 0..v {
                    if a == c {
                        continue;
                    }
                    let raw =
                        (b.f_oo.get(i, i) + b.f_oo.get(j, j) - b.f_vv.get(a, a) - b.f_vv.get(c, c))
                            .re;
                    d2[((i * o + j) * v + a) * v + c] = denominator(raw, shift, || {
                        format!(
                            "double ({}, {} -> {}, {})",
                            b.occ[i], b.occ[j], b.vir[a], b.vir[c]
                        )
                    })?;
                }
            }
        }
    }

    let mut t1 = Block2::zeros([o, v]);
    let mut t2 = Block4::zeros([o, o, v, v]);
    let step = 1.0 - options.damping;
    let mut e_prev = [ZERO; 3];
    let mut history = Vec::new();
    let mut iterations = 0;
    let (residual_norm, e) = loop {
        let res = equations::residuals(b, &t1, &t2, singles);
        let mut r1 = res.r1;
        for i in 0..o {
            for a in 0..v {
                if !singles || ws.negative[a] {
                    r1.data[i * v + a] = ZERO;
                }
            }
        }
        let (n1, n2) = (r1.max_abs(), res.r2.max_abs());
        let norm = if n1.is_nan() || n2.is_nan() {
            f64::NAN
        } else {
            n1.max(n2)
        };
        history.push(norm);
        if !norm.is_finite() {
            return Err(CcError::Divergence {
                iterations,
                last: norm,
                history,
            });
        }
        let e = equations::energy(b, &ws.negative, &t1, &t2);
        let de = e
            .iter()
            .zip(&e_prev)
            .map(|(x, y)| (x - y).norm())
            .fold(
                0.0,
                |m: f64, x| if x.is_nan() { f64::NAN } else { m.max(x) },
            );
        if norm <= options.residual_tol && de <= options.energy_tol {
            break (norm, e);
        }
        if iterations == options.max_iterations {
            return Err(CcError::Divergence {
                iterations,
                last: norm,
                history,
            });
        }
        e_prev = e;
        iterations += 1;
        for (k, r) in r1.data.iter().enumerate() {
            if *r != ZERO {
                t1.data[k] += r * (step / d1[k]);
            }
        }
        for (k, r) in res.r2.data.iter().enumerate() {
            if *r != ZERO {
                t2.data[k] += r * (step / d2[k]);
            }
        }
    };

    if h.is_real() {
        if let Some(z) = e.iter().find(|z| z.im.abs() > IMAGINARY_TOLERANCE) {
            return Err(CcError::Numerical(format!(
                "real Hamiltonian produced imaginary energy {:e}",
                z.im
            )));
        }
    }

    let mut amps = ws.sparse(&t1, &t2);
    amps.iterations = iterations;
    amps.residual_norm = residual_norm;

    let (e_1pair, e_2pair) = match options.pair_mode {
        PairMode::Coupled => (e[1].re, e[2].re),
        PairMode::Decoupled => decoupled_pairs(h, options.pair_denominator, &mut amps)?,
    };
    Ok((amps, CorrelationReport::new(h, e[0].re, e_1pair, e_2pair)))
}

/// First-order pair amplitudes `<x y||i j> / D` and their energies
/// `sum f_i f_j <ij||xy> C`, written into `amps`.
fn decoupled_pairs(
    h: &Hamiltonian,
    mode: PairDenominator,
    amps: &mut Amplitudes,
) -> Result<(f64, f64), CcError> {
    let mc2 = h.constants.rest_energy();
    let g = &h.two_body;
    let occ: Vec<_> = h
        .levels
        .iter()
        .filter(|l| l.occupied_in_reference)
        .collect();
    let pos: Vec<_> = h
        .levels
        .iter()
        .filter(|l| !l.occupied_in_reference && !l.is_negative())
        .collect();
    let neg: Vec<_> = h.levels.iter().filter(|l| l.is_negative()).collect();
    let mut energies = (ZERO, ZERO);
    for (n, i) in occ.iter().enumerate() {
        for j in &occ[n + 1..] {
            let w = i.occupancy * j.occupancy;
            let pairs = pos
                .iter()
                .flat_map(|a| neg.iter().map(move |p| (*a, *p, 2.0)))
                .chain(
                    neg.iter()
                        .enumerate()
                        .flat_map(|(m, p)| neg[m + 1..].iter().map(move |q| (*p, *q, 4.0))),
                );
            for (x, y, limit) in pairs {
                let vint = g.get(x.index, y.index, i.index, j.index);
                if vint == ZERO {
                    continue;
                }
                let d = match mode {
                    PairDenominator::Exact => i.energy + j.energy - x.energy - y.energy,
                    PairDenominator::AlphaZLimit => limit * mc2,
                };
                if d.abs() < PAIR_DENOMINATOR_FLOOR {
                    return Err(QedError::DegenerateDenominator {
                        quadruple: [i.index, j.index, x.index, y.index],
                        denominator: d,
                    }
                    .into());
                }
                let c = vint / d;
                let e = g.get(i.index, j.index, x.index, y.index) * c * w;
                let key = [i.index, j.index, x.index, y.index];
                if x.is_negative() {
                    energies.1 += e;
                    amps.t2_2pair.insert(key, c);
                } else {
                    energies.0 += e;
                    amps.t2_1pair.insert(key, c);
                }
            }
        }
    }
    Ok((energies.0.re, energies.1.re))
}

/// Full projected residuals `<mu| e^-T H e^T |0>` at arbitrary amplitudes,
/// keyed like [`Amplitudes`] (singles by `(i, a)`, doubles by `[i, j, a, b]`
/// with `i < j`, `a < b` in level order).
/// Singles and doubles residuals keyed like [`Amplitudes::t1`] and [`Amplitudes::t2`].
pub type Residuals = (BTreeMap<(usize, usize), C64>, BTreeMap<[usize; 4], C64>);

pub fn projected_residuals(
    h: &Hamiltonian,
    amps: &Amplitudes,
    method: Method,
    pair_mode: PairMode,
) -> Result<Residuals, CcError> {
    let ws = Workspace::new(h, pair_mode)?;
    let b = &ws.blocks;
    let (t1, t2) = ws.dense(amps);
    let res = equations::residuals(b, &t1, &t2, method == Method::Ccsd);
    let (o, v) = (b.no(), b.nv());
    let mut r1 = BTreeMap::new();
    if method == Method::Ccsd {
        for i in 0..o {
            for a in 0..v {
                r1.insert((b.occ[i], b.vir[a]), res.r1.get(i, a));
            }
        }
    }
    let mut r2 = BTreeMap::new();
    for i in 0..o {
        for j in i + 1..o {
            for a in 0..v {
                for c in a + 1..v {
                    r2.insert(
                        [b.occ[i], b.occ[j], b.vir[a], b.vir[c]],
                        res.r2.get(i, j, a, c),
                    );
                }
            }
        }
    }
    Ok((r1, r2))
}

/// CC correlation energy of arbitrary amplitudes (no pair split).
pub fn correlation_energy(
    h: &Hamiltonian,
    amps: &Amplitudes,
    pair_mode: PairMode,
) -> Result<C64, CcError> {
    let ws = Workspace::new(h, pair_mode)?;
    let (t1, t2) = ws.dense(amps);
    let e = equations::energy(&ws.blocks, &ws.negative, &t1, &t2);
    Ok(e[0] + e[1] + e[2])
}

/// Second-order energy over positive-sector virtuals,
/// `sum_{i<j, a<b} |<ab||ij>|^2 / (e_i + e_j - e_a - e_b)` with level energies.
pub fn mp2_energy(system: &ModelSystem, channels: ChannelSet) -> Result<f64, CcError> {
    let h = assemble_channels(system, channels)?;
    let g = &h.two_body;
    let occ: Vec<_> = h
        .levels
        .iter()
        .filter(|l| l.occupied_in_reference)
        .collect();
    let vir: Vec<_> = h
        .levels
        .iter()
        .filter(|l| !l.occupied_in_reference && !l.is_negative())
        .collect();
    let mut e = 0.0;
    for (n, i) in occ.iter().enumerate() {
        for j in &occ[n + 1..] {
            for (m, a) in vir.iter().enumerate() {
                for c in &vir[m + 1..] {
                    let x = g.get(a.index, c.index, i.index, j.index).norm_sqr();
                    if x == 0.0 {
                        continue;
                    }
                    let d = i.energy + j.energy - a.energy - c.energy;
                    if d.abs() < DENOMINATOR_FLOOR {
                        return Err(QedError::DegenerateDenominator {
                            quadruple: [i.index, j.index, a.index, c.index],
                            denominator: d,
                        }
                        .into());
                    }
                    e += x / d;
                }
            }
        }
    }
    Ok(e)
}

/// Lowest reference-plus-doubles CI eigenvalue minus the reference energy.
pub fn dci_energy(system: &ModelSystem, channels: ChannelSet) -> Result<f64, CcError> {
    let h = assemble_channels(system, channels)?;
    let space = fock::enumerate(&h.levels, GenerationRule::DoublesOnly)?;
    let spectrum = fock::diagonalize(&space, &h)?;
    Ok(spectrum.values[0] - h.reference_expectation())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{IntegralSet, PhysicalConstants, SpinorLevel};

    fn two_electron(k: f64) -> ModelSystem {
        let levels = vec![
            SpinorLevel::positive(0, -0.6, true),
            SpinorLevel::positive(1, -0.6, true),
            SpinorLevel::positive(2, 0.4, false),
            SpinorLevel::positive(3, 0.4, false),
        ];
        let mut ints = IntegralSet::zeros(4);
        for (i, e) in [-0.6, -0.6, 0.4, 0.4].into_iter().enumerate() {
            ints.h_ext[(i, i)] = C64::new(e, 0.0);
        }
        ints.v_coulomb
            .set_antisymmetrized(2, 3, 0, 1, C64::new(k, 0.0));
        ModelSystem::new(PhysicalConstants::default(), levels, ints, 2).unwrap()
    }

    #[test]
    fn zero_coupling_gives_zero_amplitudes() {
        let (amps, report) = ccsd_solve(
            &two_electron(0.0),
            ChannelSet::COULOMB,
            &CcOptions::default(),
        )
        .unwrap();
        assert_eq!(amps.max_abs(), 0.0);
        assert_eq!(report.e_correl, 0.0);
        assert_eq!(amps.iterations, 0);
    }

    #[test]
    fn two_level_double_matches_closed_form() {
        // Bare 2x2 [[0, K], [K, 2 delta]] with delta = 1.
        let k = 0.2;
        let (_, report) =
            ccd_solve(&two_electron(k), ChannelSet::COULOMB, &CcOptions::default()).unwrap();
        let exact = 1.0 - (1.0 + k * k).sqrt();
        assert!((report.e_correl - exact).abs() < 1e-11);
    }

    #[test]
    fn report_total_is_sum_of_parts() {
        let (_, r) = ccsd_solve(
            &two_electron(0.1),
            ChannelSet::COULOMB,
            &CcOptions::default(),
        )
        .unwrap();
        let sum =
            r.e_reference + r.e_breit0 + r.e_lamb0 + r.e_hf0 + r.e_correl + r.e_1pair + r.e_2pair;
        assert!((r.e_total - sum).abs() < 1e-12);
    }

    #[test]
    fn degenerate_denominator_needs_shift() {
        let mut s = two_electron(0.1);
        for i in 0..4 {
            s.integrals.h_ext[(i, i)] = C64::new(0.0, 0.0);
        }
        let err = ccd_solve(&s, ChannelSet::COULOMB, &CcOptions::default()).unwrap_err();
        assert!(matches!(err, CcError::Configuration(_)));
    }

    #[test]
    fn iteration_cap_reports_history() {
        let options = CcOptions {
            max_iterations: 3,
            ..CcOptions::default()
        };
        match ccd_solve(&two_electron(0.3), ChannelSet::COULOMB, &options) {
            Err(CcError::Divergence {
                iterations,
                history,
                ..
            }) => {
                assert_eq!(iterations, 3);
                assert_eq!(history.len(), 4);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn mp2_of_single_double() {
        let e = mp2_energy(&two_electron(0.2), ChannelSet::COULOMB).unwrap();
        assert!((e - (-0.04 / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn bad_damping_is_rejected() {
        let options = CcOptions {
            damping: 1.0,
            ..CcOptions::default()
        };
        assert!(ccd_solve(&two_electron(0.2), ChannelSet::COULOMB, &options).is_err());
    }
}
