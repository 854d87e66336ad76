//! Exact Fock-space engine: occupation-bitstring determinants, Slater-Condon
//! matrix elements, dense diagonalization and exact cluster exponentials.
//!
//! Phase convention: levels fill in ascending index order, so creating or
//! annihilating level `p` picks up `(-1)^(occupied levels below p)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use nalgebra::SymmetricEigen;
use thiserror::Error;

use crate::model::{Kramers, SpinorLevel, MAX_LEVELS};
use crate::qed::Hamiltonian;
use crate::{CMatrix, C64};

/// Largest CI space the dense engine will build.
pub const DEFAULT_CAPACITY: usize = 200_000;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("space of {requested} determinants exceeds the capacity of {cap}")]
    Capacity { requested: u128, cap: usize },
    #[error("matrix is not Hermitian: |H[{row}][{col}] - conj(H[{col}][{row}])| = {deviation:e}")]
    NonHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },
    #[error("{0}")]
    Argument(String),
}

/// Occupation bitstring; bit `p` set means level `p` is occupied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Determinant(pub u128);

impl Determinant {
    pub fn from_occupied(levels: &[usize]) -> Self {
        Self(levels.iter().fold(0u128, |acc, &p| acc | (1u128 << p)))
    }

    #[inline]
    pub fn bits(self) -> u128 {
        self.0
    }

    #[inline]
    pub fn is_occupied(self, p: usize) -> bool {
        self.0 >> p & 1 == 1
    }

    pub fn n_electrons(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn occupied(self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_electrons());
        let mut b = self.0;
        while b != 0 {
            out.push(b.trailing_zeros() as usize);
            b &= b - 1;
        }
        out
    }

    #[inline]
    fn phase(self, p: usize) -> f64 {
        let below = self.0 & ((1u128 << p) - 1);
        if below.count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `a_p |self>` as `(determinant, sign)`, or `None` if `p` is empty.
    pub fn annihilate(self, p: usize) -> Option<(Self, f64)> {
        self.is_occupied(p)
            .then(|| (Self(self.0 & !(1u128 << p)), self.phase(p)))
    }

    /// `a+_p |self>` as `(determinant, sign)`, or `None` if `p` is filled.
    pub fn create(self, p: usize) -> Option<(Self, f64)> {
        (!self.is_occupied(p)).then(|| (Self(self.0 | (1u128 << p)), self.phase(p)))
    }

    /// Applies `a+_{p1} .. a+_{pk} a_{hk} .. a_{h1}`, rightmost operator first.
    pub fn excite(self, holes: &[usize], particles: &[usize]) -> Option<(Self, f64)> {
        let mut det = self;
        let mut sign = 1.0;
        for &h in holes {
            let (d, s) = det.annihilate(h)?;
            det = d;
            sign *= s;
        }
        for &p in particles.iter().rev() {
            let (d, s) = det.create(p)?;
            det = d;
            sign *= s;
        }
        Some((det, sign))
    }

    /// `'1'`/`'0'` per level, level 0 first.
    pub fn to_bitstring(self, n_levels: usize) -> String {
        (0..n_levels)
            .map(|p| if self.is_occupied(p) { '1' } else { '0' })
            .collect()
    }

    pub fn parse_bitstring(s: &str) -> Result<Self, FockError> {
        if s.len() > MAX_LEVELS {
            return Err(FockError::Argument(format!(
                "bitstring longer than {MAX_LEVELS} levels"
            )));
        }
        let mut bits = 0u128;
        for (p, ch) in s.chars().enumerate() {
            match ch {
                '1' => bits |= 1u128 << p,
                '0' => {}
                other => {
                    return Err(FockError::Argument(format!(
                        "bitstring `{s}` contains `{other}`"
                    )))
                }
            }
        }
        Ok(Self(bits))
    }
}

impl fmt::Display for Determinant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.occupied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GenerationRule {
    /// Every placement of the reference electron count.
    Full,
    /// Reference plus positive-sector doubles.
    DoublesOnly,
    /// Doubles plus one-pair and two-pair doubles into the negative sector.
    DoublesPlusPair,
    Custom(Vec<Determinant>),
}

#[derive(Debug, Clone)]
pub struct CiSpace {
    dets: Vec<Determinant>,
    lookup: HashMap<Determinant, usize>,
    pub rule: GenerationRule,
}

impl CiSpace {
    fn from_sorted(mut dets: Vec<Determinant>, rule: GenerationRule) -> Self {
        dets.sort_unstable();
        dets.dedup();
        let lookup = dets.iter().enumerate().map(|(k, &d)| (d, k)).collect();
        Self { dets, lookup, rule }
    }

    pub fn dets(&self) -> &[Determinant] {
        &self.dets
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    pub fn index_of(&self, d: Determinant) -> Option<usize> {
        self.lookup.get(&d).copied()
    }
}

pub fn reference_determinant(levels: &[SpinorLevel]) -> Determinant {
    Determinant::from_occupied(
        &levels
            .iter()
            .filter(|l| l.occupied_in_reference)
            .map(|l| l.index)
            .collect::<Vec<_>>(),
    )
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// A double is spin-allowed when it conserves the number of unbarred
/// Kramers partners; unlabeled bases allow everything.
fn spin_allowed(levels: &[SpinorLevel], holes: &[usize], particles: &[usize]) -> bool {
    let unbarred = |idx: &[usize]| -> Option<usize> {
        idx.iter()
            .map(|&p| {
                levels[p]
                    .kramers
                    .map(|k| usize::from(k == Kramers::Unbarred))
            })
            .sum()
    };
    match (unbarred(holes), unbarred(particles)) {
        (Some(a), Some(b)) => a == b,
        _ => true,
    }
}

pub fn enumerate(levels: &[SpinorLevel], rule: GenerationRule) -> Result<CiSpace, FockError> {
    enumerate_capped(levels, rule, DEFAULT_CAPACITY)
}

pub fn enumerate_capped(
    levels: &[SpinorLevel],
    rule: GenerationRule,
    cap: usize,
) -> Result<CiSpace, FockError> {
    let n = levels.len();
    let reference = reference_determinant(levels);
    let ne = reference.n_electrons();
    let occ = reference.occupied();
    let pos_virt: Vec<usize> = levels
        .iter()
        .filter(|l| !l.occupied_in_reference && !l.is_negative())
        .map(|l| l.index)
        .collect();
    let neg: Vec<usize> = levels
        .iter()
        .filter(|l| l.is_negative())
        .map(|l| l.index)
        .collect();

    let check = |count: u128| {
        if count > cap as u128 {
            Err(FockError::Capacity {
                requested: count,
                cap,
            })
        } else {
            Ok(())
        }
    };

    let dets = match &rule {
        GenerationRule::Full => {
            check(binomial(n, ne))?;
            let mut out = Vec::new();
            combinations(n, ne, &mut |c| out.push(Determinant::from_occupied(c)));
            out
        }
        GenerationRule::DoublesOnly | GenerationRule::DoublesPlusPair => {
            let pairs = binomial(occ.len(), 2);
            let with_pairs = rule == GenerationRule::DoublesPlusPair;
            let targets = if with_pairs {
                binomial(pos_virt.len(), 2)
                    + (pos_virt.len() * neg.len()) as u128
                    + binomial(neg.len(), 2)
            } else {
                binomial(pos_virt.len(), 2)
            };
            check(1 + pairs.saturating_mul(targets))?;

            let mut particle_pairs: Vec<[usize; 2]> = Vec::new();
            for (x, &a) in pos_virt.iter().enumerate() {
                for &b in &pos_virt[x + 1..] {
                    particle_pairs.push([a, b]);
                }
            }
            if with_pairs {
                for &a in &pos_virt {
                    for &p in &neg {
                        particle_pairs.push([a.min(p), a.max(p)]);
                    }
                }
                for (x, &p) in neg.iter().enumerate() {
                    for &q in &neg[x + 1..] {
                        particle_pairs.push([p, q]);
                    }
                }
            }
            let mut out = vec![reference];
            for (x, &i) in occ.iter().enumerate() {
                for &j in &occ[x + 1..] {
                    for pp in &particle_pairs {
                        if spin_allowed(levels, &[i, j], pp) {
                            if let Some((d, _)) = reference.excite(&[i, j], pp) {
                                out.push(d);
                            }
                        }
                    }
                }
            }
            out
        }
        GenerationRule::Custom(list) => {
            check(list.len() as u128)?;
            if let Some(d) = list.iter().find(|d| d.n_electrons() != ne) {
                return Err(FockError::Argument(format!(
                    "determinant {d} has {} electrons, expected {ne}",
                    d.n_electrons()
                )));
            }
            if let Some(d) = list.iter().find(|d| d.0 >> n != 0) {
                return Err(FockError::Argument(format!(
                    "determinant {d} addresses levels beyond {n}"
                )));
            }
            list.clone()
        }
    };
    Ok(CiSpace::from_sorted(dets, rule))
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if buf.len() == k {
            f(buf);
            return;
        }
        for p in start..=(n - (k - buf.len())) {
            buf.push(p);
            rec(p + 1, n, k, buf, f);
            buf.pop();
        }
    }
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), f);
    }
}

/// `<d1|H|d2>` by the Slater-Condon rules.
pub fn matrix_element(d1: Determinant, d2: Determinant, h: &Hamiltonian) -> C64 {
    let only1 = d1.0 & !d2.0;
    let only2 = d2.0 & !d1.0;
    let rank = only1.count_ones();
    if rank != only2.count_ones() || rank > 2 {
        return ZERO;
    }
    let g = &h.two_body;
    match rank {
        0 => {
            let occ = d1.occupied();
            let mut e = ZERO;
            for (x, &i) in occ.iter().enumerate() {
                e += h.one_body[(i, i)];
                for &j in &occ[x + 1..] {
                    e += g.get(i, j, i, j);
                }
            }
            e
        }
        1 => {
            let p = only1.trailing_zeros() as usize;
            let r = only2.trailing_zeros() as usize;
            let (_, sign) = d2.excite(&[r], &[p]).expect("single excitation is valid");
            let common = Determinant(d1.0 & d2.0);
            let mut e = h.one_body[(p, r)];
            for k in common.occupied() {
                e += g.get(p, k, r, k);
            }
            e * sign
        }
        _ => {
            let p = only1.trailing_zeros() as usize;
            let q = (only1 & (only1 - 1)).trailing_zeros() as usize;
            let r = only2.trailing_zeros() as usize;
            let s = (only2 & (only2 - 1)).trailing_zeros() as usize;
            let (_, sign) = d2
                .excite(&[r, s], &[p, q])
                .expect("double excitation is valid");
            g.get(p, q, r, s) * sign
        }
    }
}

/// `H|det>` by literal operator application of every one- and two-body
/// term. Slow; kept as an independent cross-check of [`matrix_element`].
pub fn apply_hamiltonian(h: &Hamiltonian, det: Determinant) -> BTreeMap<Determinant, C64> {
    let n = h.n_levels();
    let mut out: BTreeMap<Determinant, C64> = BTreeMap::new();
    for p in 0..n {
        for q in 0..n {
            let v = h.one_body[(p, q)];
            if v == ZERO {
                continue;
            }
            if let Some((d, s)) = det.excite(&[q], &[p]) {
                *out.entry(d).or_insert(ZERO) += v * s;
            }
        }
    }
    for (p, q, r, s, v) in h.two_body.nonzero() {
        // 1/4 <pq||rs> a+_p a+_q a_s a_r
        if let Some((d, sign)) = det.excite(&[r, s], &[p, q]) {
            *out.entry(d).or_insert(ZERO) += v * (0.25 * sign);
        }
    }
    out.retain(|_, v| *v != ZERO);
    out
}

/// Dense Hamiltonian matrix over a CI space.
pub fn hamiltonian_matrix(space: &CiSpace, h: &Hamiltonian) -> CMatrix {
    let dets = space.dets();
    let m = dets.len();
    let mut out = CMatrix::zeros(m, m);
    for (k, &dk) in dets.iter().enumerate() {
        for (l, &dl) in dets.iter().enumerate().skip(k) {
            let v = matrix_element(dk, dl, h);
            out[(k, l)] = v;
            if k != l {
                out[(l, k)] = matrix_element(dl, dk, h);
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` belongs to `values[k]`.
    pub vectors: CMatrix,
}

/// Hermitian eigendecomposition of `H` over `space`.
pub fn diagonalize(space: &CiSpace, h: &Hamiltonian) -> Result<Spectrum, FockError> {
    if space.is_empty() {
        return Err(FockError::Argument("empty CI space".into()));
    }
    diagonalize_matrix(hamiltonian_matrix(space, h))
}

/// Hermiticity is checked to `1e-10` relative to the largest entry (absolute below 1).
pub fn diagonalize_matrix(m: CMatrix) -> Result<Spectrum, FockError> {
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut worst = (0.0, 0, 0);
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            let d = (m[(r, c)] - m[(c, r)].conj()).norm();
            if d > worst.0 {
                worst = (d, r, c);
            }
        }
    }
    if worst.0 > 1e-10 * scale {
        return Err(FockError::NonHermitian {
            row: worst.1,
            col: worst.2,
            deviation: worst.0,
        });
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok(Spectrum { values, vectors })
}

/// One cluster term `amplitude * a+_{p1} .. a+_{pk} a_{hk} .. a_{h1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Excitation {
    pub holes: Vec<usize>,
    pub particles: Vec<usize>,
    pub amplitude: C64,
}

/// A cluster operator `T` as a plain list of excitation terms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClusterOperator {
    pub terms: Vec<Excitation>,
}

impl ClusterOperator {
    pub fn push(&mut self, holes: &[usize], particles: &[usize], amplitude: C64) {
        self.terms.push(Excitation {
            holes: holes.to_vec(),
            particles: particles.to_vec(),
            amplitude,
        });
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Excitation {
                    amplitude: t.amplitude * factor,
                    ..t.clone()
                })
                .collect(),
        }
    }

    /// `T |v>` for a sparse vector.
    pub fn apply(&self, v: &BTreeMap<Determinant, C64>) -> BTreeMap<Determinant, C64> {
        let mut out: BTreeMap<Determinant, C64> = BTreeMap::new();
        for (&d, &c) in v {
            for t in &self.terms {
                if let Some((e, s)) = d.excite(&t.holes, &t.particles) {
                    *out.entry(e).or_insert(ZERO) += t.amplitude * c * s;
                }
            }
        }
        out
    }
}

/// `(1 + T + T^2/2! + ... + T^k/k!) |reference>` with `k = order_cap`.
pub fn apply_cluster(
    op: &ClusterOperator,
    reference: Determinant,
    order_cap: usize,
) -> Result<BTreeMap<Determinant, C64>, FockError> {
    if order_cap < 1 {
        return Err(FockError::Argument("order_cap must be at least 1".into()));
    }
    let mut total = BTreeMap::from([(reference, C64::new(1.0, 0.0))]);
    let mut term = total.clone();
    for k in 1..=order_cap {
        term = op.apply(&term);
        for c in term.values_mut() {
            *c /= k as f64;
        }
        if term.is_empty() {
            break;
        }
        for (&d, &c) in &term {
            *total.entry(d).or_insert(ZERO) += c;
        }
    }
    Ok(total)
}

/// Matrix of `T` over a space that must be closed under `T`.
pub fn cluster_matrix(op: &ClusterOperator, space: &CiSpace) -> Result<CMatrix, FockError> {
    let m = space.len();
    let mut out = CMatrix::zeros(m, m);
    for (col, &d) in space.dets().iter().enumerate() {
        for t in &op.terms {
            if let Some((e, s)) = d.excite(&t.holes, &t.particles) {
                let row = space.index_of(e).ok_or_else(|| {
                    FockError::Argument(format!("space is not closed under T: {d} -> {e}"))
                })?;
                out[(row, col)] += t.amplitude * s;
            }
        }
    }
    Ok(out)
}

/// `exp(X)` for nilpotent `X` by the terminating power series.
pub fn nilpotent_exp(x: &CMatrix) -> Result<CMatrix, FockError> {
    let m = x.nrows();
    let mut total = CMatrix::identity(m, m);
    let mut term = CMatrix::identity(m, m);
    for k in 1..=m + 1 {
        term = &term * x / C64::new(k as f64, 0.0);
        if term.iter().all(|z| *z == ZERO) {
            return Ok(total);
        }
        total += &term;
    }
    Err(FockError::Argument(
        "cluster matrix is not nilpotent".into(),
    ))
}

/// `exp(-T) H exp(T)` over `space`.
pub fn similarity_transform(
    op: &ClusterOperator,
    space: &CiSpace,
    h: &Hamiltonian,
) -> Result<CMatrix, FockError> {
    let t = cluster_matrix(op, space)?;
    let up = nilpotent_exp(&t)?;
    let down = nilpotent_exp(&(-t))?;
    Ok(down * hamiltonian_matrix(space, h) * up)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{IntegralSet, ModelSystem, PhysicalConstants};
    use crate::qed::{assemble_channels, ChannelSet};

    fn toy() -> Hamiltonian {
        let levels = vec![
            SpinorLevel::positive(0, -1.0, true),
            SpinorLevel::positive(1, -0.8, true),
            SpinorLevel::positive(2, 0.3, false),
            SpinorLevel::positive(3, 0.5, false),
        ];
        let mut ints = IntegralSet::zeros(4);
        for (i, e) in [-1.3, -1.1, 0.3, 0.5].into_iter().enumerate() {
            ints.h_ext[(i, i)] = C64::new(e, 0.0);
        }
        ints.h_ext[(0, 2)] = C64::new(0.05, 0.02);
        ints.h_ext[(2, 0)] = C64::new(0.05, -0.02);
        ints.v_coulomb
            .set_antisymmetrized(0, 1, 0, 1, C64::new(0.6, 0.0));
        ints.v_coulomb
            .set_antisymmetrized(0, 2, 0, 2, C64::new(0.3, 0.0));
        ints.v_coulomb
            .set_antisymmetrized(2, 3, 0, 1, C64::new(0.1, -0.04));
        ints.v_coulomb
            .set_antisymmetrized(1, 2, 1, 3, C64::new(0.02, 0.01));
        let s = ModelSystem::new(PhysicalConstants::default(), levels, ints, 2).unwrap();
        assemble_channels(&s, ChannelSet::COULOMB).unwrap()
    }

    #[test]
    fn creation_operators_anticommute() {
        let d = Determinant::from_occupied(&[1, 4]);
        let (a, sa) = d
            .create(2)
            .and_then(|(x, s)| x.create(5).map(|(y, t)| (y, s * t)))
            .unwrap();
        let (b, sb) = d
            .create(5)
            .and_then(|(x, s)| x.create(2).map(|(y, t)| (y, s * t)))
            .unwrap();
        assert_eq!(a, b);
        assert_eq!(sa, -sb);
    }

    #[test]
    fn zero_electrons_give_single_empty_determinant() {
        let levels = vec![
            SpinorLevel::positive(0, 0.0, false),
            SpinorLevel::positive(1, 1.0, false),
        ];
        let space = enumerate(&levels, GenerationRule::Full).unwrap();
        assert_eq!(space.dets(), &[Determinant(0)]);
    }

    #[test]
    fn capacity_is_checked_before_generation() {
        let levels: Vec<_> = (0..40)
            .map(|i| SpinorLevel::positive(i, 0.0, i < 20))
            .collect();
        let err = enumerate(&levels, GenerationRule::Full).unwrap_err();
        assert!(matches!(err, FockError::Capacity { .. }));
    }

    #[test]
    fn slater_condon_matches_operator_application() {
        let h = toy();
        let space = enumerate(&h.levels, GenerationRule::Full).unwrap();
        for &d2 in space.dets() {
            let col = apply_hamiltonian(&h, d2);
            for &d1 in space.dets() {
                let want = col.get(&d1).copied().unwrap_or(ZERO);
                assert!(
                    (matrix_element(d1, d2, &h) - want).norm() < 1e-14,
                    "{d1} {d2}"
                );
            }
        }
    }

    #[test]
    fn diagonal_element_is_reference_expectation() {
        let h = toy();
        let r = reference_determinant(&h.levels);
        assert!((matrix_element(r, r, &h).re - h.reference_expectation()).abs() < 1e-15);
    }

    #[test]
    fn triple_difference_is_zero() {
        let h = toy();
        let a = Determinant::from_occupied(&[0, 1, 2]);
        let b = Determinant::from_occupied(&[3, 4, 5]);
        assert_eq!(matrix_element(a, b, &h), ZERO);
    }

    #[test]
    fn one_by_one_space_is_its_diagonal() {
        let h = toy();
        let r = reference_determinant(&h.levels);
        let space = enumerate(&h.levels, GenerationRule::Custom(vec![r])).unwrap();
        let spec = diagonalize(&space, &h).unwrap();
        assert_eq!(spec.values, vec![matrix_element(r, r, &h).re]);
    }

    #[test]
    fn non_hermitian_matrix_names_entry() {
        let mut m = CMatrix::identity(3, 3);
        m[(0, 2)] = C64::new(1e-3, 0.0);
        assert_eq!(
            diagonalize_matrix(m).unwrap_err(),
            FockError::NonHermitian {
                row: 0,
                col: 2,
                deviation: 1e-3
            }
        );
    }

    #[test]
    fn zero_cluster_leaves_reference() {
        let r = Determinant::from_occupied(&[0, 1]);
        let v = apply_cluster(&ClusterOperator::default(), r, 4).unwrap();
        assert_eq!(v, BTreeMap::from([(r, C64::new(1.0, 0.0))]));
        assert!(apply_cluster(&ClusterOperator::default(), r, 0).is_err());
    }

    #[test]
    fn disjoint_doubles_multiply() {
        let r = Determinant::from_occupied(&[0, 1, 4, 5]);
        let (ca, cb) = (C64::new(0.2, 0.1), C64::new(-0.3, 0.05));
        let mut t = ClusterOperator::default();
        t.push(&[0, 1], &[2, 3], ca);
        t.push(&[4, 5], &[6, 7], cb);
        let v = apply_cluster(&t, r, 2).unwrap();
        let quad = Determinant::from_occupied(&[2, 3, 6, 7]);
        let (_, s1) = r.excite(&[0, 1], &[2, 3]).unwrap();
        let (_, s2) = r
            .excite(&[0, 1], &[2, 3])
            .unwrap()
            .0
            .excite(&[4, 5], &[6, 7])
            .unwrap();
        assert!((v[&quad] - ca * cb * s1 * s2).norm() < 1e-15);
    }

    #[test]
    fn zero_cluster_similarity_is_identity() {
        let h = toy();
        let space = enumerate(&h.levels, GenerationRule::Full).unwrap();
        let hbar = similarity_transform(&ClusterOperator::default(), &space, &h).unwrap();
        assert_eq!(hbar, hamiltonian_matrix(&space, &h));
    }

    #[test]
    fn bitstrings_round_trip() {
        let d = Determinant::parse_bitstring("110010").unwrap();
        assert_eq!(d.occupied(), vec![0, 1, 4]);
        assert_eq!(d.to_bitstring(6), "110010");
        assert!(Determinant::parse_bitstring("11x").is_err());
    }
}
