//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use std::time::Instant;

use qedcc_core::cc::{self, CcOptions, Method};
use qedcc_core::fock::{self, Determinant, GenerationRule};
use qedcc_core::model::{replicate, IntegralSet, ModelSystem, PhysicalConstants, SpinorLevel};
use qedcc_core::mrcc::{self, ModelSpace, MrccOptions};
use qedcc_core::oracle_h2::{self, H2UnitParams, UnitOptions};
use qedcc_core::photon::{self, ThermalState};
use qedcc_core::qed::{self, assemble_channels, ChannelSet, PairDenominator};
use qedcc_core::C64;

type Outcome = Result<String, String>;

fn tight() -> CcOptions {
    CcOptions {
        residual_tol: 1e-13,
        energy_tol: 1e-14,
        max_iterations: 2000,
        ..CcOptions::default()
    }
}

fn unit(k12: f64) -> H2UnitParams {
    H2UnitParams {
        eps1: -0.58,
        eps2: 0.67,
        j11: 0.67,
        j22: 0.70,
        j12: 0.66,
        k12,
        jb11: 2e-5,
        jb22: 3e-5,
        kb12: 1e-5,
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn size_extensivity() -> Outcome {
    let start = Instant::now();
    let u = oracle_h2::build_unit(&unit(0.18), false, PhysicalConstants::default());
    let mut worst: f64 = 0.0;
    for channels in [ChannelSet::COULOMB, ChannelSet::with_breit()] {
        let (_, one) = cc::ccd_solve(&u, channels, &tight()).map_err(err)?;
        for n in [1, 2, 4, 8] {
            let big = replicate(&u, n).map_err(err)?;
            let (_, r) = cc::ccd_solve(&big, channels, &tight()).map_err(err)?;
            worst = worst.max((r.e_correl / n as f64 - one.e_correl).abs() / one.e_correl.abs());
        }
    }
    let t = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-11 && t < 1.0,
        format!(
            "max per-unit relative spread {worst:.2e} over N' = 1, 2, 4, 8 (DC and DCB), {t:.3} s"
        ),
    )
}

fn analytic_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ratios = Vec::new();
    for k in [7e-4, 7e-3, 0.07, 0.25, 0.6] {
        let p = unit(k);
        ratios.push(k / oracle_h2::delta_dc(&p));
        let s = oracle_h2::build_unit(&p, false, PhysicalConstants::default());
        let (_, dc) = cc::ccd_solve(&s, ChannelSet::COULOMB, &tight()).map_err(err)?;
        let (_, dcb) = cc::ccd_solve(&s, ChannelSet::with_breit(), &tight()).map_err(err)?;
        worst = worst
            .max((dc.e_correl - oracle_h2::correl_dc(&p).energy).abs())
            .max((dcb.e_correl - oracle_h2::correl_dcb(&p).energy).abs());
    }
    let (lo, hi) = (ratios[0], ratios[ratios.len() - 1]);
    check(
        worst <= 1e-10 && lo <= 1e-3 * 1.5 && hi >= 0.45,
        format!("max |CCD - closed form| {worst:.2e} Eh over 5 fixtures, K/delta in [{lo:.1e}, {hi:.2}]"),
    )
}

fn dci_non_extensivity() -> Outcome {
    let p = unit(0.18);
    let u = oracle_h2::build_unit(&p, false, PhysicalConstants::default());
    let two = replicate(&u, 2).map_err(err)?;
    let dci = cc::dci_energy(&two, ChannelSet::COULOMB).map_err(err)? / 2.0;
    let formula = oracle_h2::dci_per_unit(&p, 2);
    let (_, ccd) = cc::ccd_solve(&two, ChannelSet::COULOMB, &tight()).map_err(err)?;
    let ccd = ccd.e_correl / 2.0;
    let dev = (dci - formula).abs();
    check(
        dev <= 1e-10 && dci > ccd,
        format!("DCI per unit {dci:.12} vs formula (dev {dev:.1e}), above CCD {ccd:.12}"),
    )
}

fn mp2_formula() -> Outcome {
    let p = unit(0.18);
    let u = oracle_h2::build_unit(&p, false, PhysicalConstants::default());
    let got = cc::mp2_energy(&u, ChannelSet::COULOMB).map_err(err)?;
    let want = oracle_h2::mp2_per_unit(&p).map_err(err)?;
    let dev = (got - want).abs();
    check(
        dev <= 1e-12,
        format!("MP2 {got:.14} vs -K^2/(2 gap) {want:.14}, dev {dev:.1e}"),
    )
}

fn two_electron_exactness() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for draw in 0..20u64 {
        let n = 6 + (draw % 5) as usize;
        let system = common::random_system(100 + draw, n, 2, draw % 2 == 0);
        let h = assemble_channels(&system, ChannelSet::COULOMB).map_err(err)?;
        let (_, r) = cc::solve(&h, Method::Ccsd, &tight()).map_err(err)?;
        let space = fock::enumerate(&h.levels, GenerationRule::Full).map_err(err)?;
        let fci = fock::diagonalize(&space, &h).map_err(err)?.values[0] - h.reference_expectation();
        worst = worst.max((r.e_correl - fci).abs());
    }
    let t = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-9 && t < 10.0,
        format!("max |CCSD - FCI| {worst:.2e} Eh over 20 systems of 6-10 levels, {t:.3} s"),
    )
}

fn pair_system(c: f64) -> ModelSystem {
    let options = UnitOptions {
        include_negative_sector: true,
        ..UnitOptions::default()
    };
    oracle_h2::build_unit_with(
        &unit(0.18),
        &options,
        PhysicalConstants::with_speed_of_light(c),
    )
}

fn pair_energies() -> Outcome {
    let c0 = PhysicalConstants::default().c;
    let total = |r: &qed::PairEnergyReport| r.one_pair + r.two_pair;
    let a = qed::pair_energy_mbpt2(&pair_system(c0), PairDenominator::AlphaZLimit).map_err(err)?;
    let b = qed::pair_energy_mbpt2(&pair_system(2.0 * c0), PairDenominator::AlphaZLimit)
        .map_err(err)?;
    let scaling = (total(&a) / (4.0 * total(&b)) - 1.0).abs();
    let mut errors = Vec::new();
    for f in [1.0, 2.0, 4.0] {
        let s = pair_system(f * c0);
        let exact = total(&qed::pair_energy_mbpt2(&s, PairDenominator::Exact).map_err(err)?);
        let limit = total(&qed::pair_energy_mbpt2(&s, PairDenominator::AlphaZLimit).map_err(err)?);
        errors.push((exact - limit).abs() / limit.abs());
    }
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    check(
        scaling < 1e-12 && monotone,
        format!(
            "limit-mode c^-2 deviation {scaling:.1e}; exact-vs-limit relative gaps {:.2e} > {:.2e} > {:.2e}",
            errors[0], errors[1], errors[2]
        ),
    )
}

fn planck_suite() -> Outcome {
    let norm: f64 = (0..=200)
        .map(|n| photon::planck_amplitude(n, 1.0).powi(2))
        .sum();
    let nbar = photon::bose_occupation(std::f64::consts::LN_2);
    let mut series: f64 = 0.0;
    for x in [0.3, 1.0, 3.0] {
        series =
            series.max((photon::mean_occupation_series(x, 400) - photon::bose_occupation(x)).abs());
    }
    check(
        (norm - 1.0).abs() <= 1e-12 && nbar == 1.0 && series <= 1e-10,
        format!(
            "sum g^2 - 1 = {:.1e}; Nbar(ln 2) = {nbar}; series vs Bose max dev {series:.1e} at x = 0.3, 1, 3",
            norm - 1.0
        ),
    )
}

fn isotropy_null() -> Outcome {
    let modes = photon::isotropic_grid(0.05, 8, 12).map_err(err)?;
    let state = ThermalState::new(0.5, modes, 10.0).map_err(err)?;
    let j = [
        C64::new(0.3, 0.1),
        C64::new(-0.2, 0.0),
        C64::new(0.05, -0.4),
    ];
    let currents = vec![j; state.modes.len()];
    let v = mrcc::diradical_coupling(&currents, &state).map_err(err)?;
    let shift = mrcc::static_correlation_shift(-0.1, 0.0, v.value).map_err(err)?;
    check(
        v.magnitude <= 1e-14 && shift.exact.abs() <= 1e-14 && shift.perturbative.abs() <= 1e-14,
        format!(
            "|coupling| {:.1e} over {} modes; chained shift {:.1e}",
            v.magnitude,
            state.modes.len(),
            shift.exact
        ),
    )
}

fn static_correlation() -> Outcome {
    let (e1, e2) = (-0.4, 0.1);
    let v = C64::from_polar(1e-3 * (e2 - e1), 0.7);
    let s = mrcc::static_correlation_shift(e1, e2, v).map_err(err)?;
    let rel = (s.exact - s.perturbative).abs() / s.perturbative.abs();
    let closed = mrcc::static_correlation_shift(0.0, 1.0, C64::new(0.5, 0.0)).map_err(err)?;
    let dev = (closed.exact - (1.0 - 2f64.sqrt()) / 2.0).abs();
    check(
        rel <= 1e-6 && dev <= 1e-14,
        format!(
            "perturbative vs exact relative {rel:.3e} at |v|/gap = 1e-3; closed form dev {dev:.1e}"
        ),
    )
}

/// Two electrons in six levels with a quasi-degenerate pair of frontier levels.
fn diradical_toy() -> ModelSystem {
    let mut rng = common::rng(77);
    let v = common::random_tensor(&mut rng, 6, 0.04, true);
    let bare = [-1.2, -0.40, -0.33, 0.45, 0.7, 1.0];
    let mut ints = IntegralSet::zeros(6);
    for (p, e) in bare.iter().enumerate() {
        ints.h_ext[(p, p)] = C64::new(*e, 0.0);
    }
    ints.h_ext[(1, 2)] = C64::new(0.02, 0.01);
    ints.h_ext[(2, 1)] = C64::new(0.02, -0.01);
    ints.v_coulomb = v;
    let levels = bare
        .iter()
        .enumerate()
        .map(|(p, &e)| SpinorLevel::positive(p, e, p < 2))
        .collect();
    ModelSystem::new(PhysicalConstants::default(), levels, ints, 2).expect("valid toy")
}

fn mrcc_consistency() -> Outcome {
    let start = Instant::now();
    let options = MrccOptions {
        residual_tol: 1e-11,
        energy_tol: 1e-13,
        ..MrccOptions::default()
    };

    let system = common::random_system(5, 8, 4, true);
    let h = assemble_channels(&system, ChannelSet::COULOMB).map_err(err)?;
    let (_, report) = cc::solve(&h, Method::Ccsd, &tight()).map_err(err)?;
    let single = ModelSpace::new(vec![fock::reference_determinant(&h.levels)]).map_err(err)?;
    let sol = mrcc::mrcc_residual_solve(&single, &h, &options).map_err(err)?;
    let d_single = (sol.target_energy().re - report.e_total).abs();

    let small = assemble_channels(&common::random_system(9, 4, 2, true), ChannelSet::COULOMB)
        .map_err(err)?;
    let fs = mrcc::full_space(&small).map_err(err)?;
    let complete = ModelSpace::new(fs.dets().to_vec()).map_err(err)?;
    let sol = mrcc::mrcc_residual_solve(&complete, &small, &options).map_err(err)?;
    let fci = fock::diagonalize(&fs, &small).map_err(err)?.values;
    let d_complete = sol
        .eigenpairs
        .iter()
        .zip(&fci)
        .map(|(p, e)| (p.energy - e).norm())
        .fold(0.0, f64::max);

    let toy = assemble_channels(&diradical_toy(), ChannelSet::COULOMB).map_err(err)?;
    let refs = vec![
        Determinant::from_occupied(&[0, 1]),
        Determinant::from_occupied(&[0, 2]),
    ];
    let space = ModelSpace::new(refs).map_err(err)?;
    let sol = mrcc::mrcc_residual_solve(&space, &toy, &options).map_err(err)?;
    let fci = fock::diagonalize(&mrcc::full_space(&toy).map_err(err)?, &toy)
        .map_err(err)?
        .values[0];
    let d_toy = (sol.target_energy().re - fci).abs();

    let t = start.elapsed().as_secs_f64();
    check(
        d_single <= 1e-9 && d_complete <= 1e-10 && d_toy <= 1e-8 && t < 30.0,
        format!(
            "single-ref vs CCSD {d_single:.1e}; complete space vs FCI {d_complete:.1e}; 2-ref toy vs FCI {d_toy:.1e}; {t:.3} s"
        ),
    )
}

fn fock_invariants() -> Outcome {
    let mut sign_failures = 0;
    for bits in 0u128..(1 << 10) {
        let d = Determinant(bits);
        for p in 0..10 {
            for q in 0..10 {
                if p == q {
                    continue;
                }
                let pq = d
                    .create(q)
                    .and_then(|(x, s)| x.create(p).map(|(y, t)| (y, s * t)));
                let qp = d
                    .create(p)
                    .and_then(|(x, s)| x.create(q).map(|(y, t)| (y, s * t)));
                let ok = match (pq, qp) {
                    (Some((a, s)), Some((b, t))) => a == b && s == -t,
                    (None, None) => true,
                    _ => false,
                };
                sign_failures += usize::from(!ok);
            }
        }
    }
    let mut residual: f64 = 0.0;
    let mut spectrum: f64 = 0.0;
    for seed in 0..5u64 {
        let system = common::random_system(200 + seed, 7, 3, true);
        let h = assemble_channels(&system, ChannelSet::COULOMB).map_err(err)?;
        let space = fock::enumerate(&h.levels, GenerationRule::Full).map_err(err)?;
        let m = fock::hamiltonian_matrix(&space, &h);
        let spec = fock::diagonalize_matrix(m.clone()).map_err(err)?;
        for (k, &e) in spec.values.iter().enumerate() {
            let v = spec.vectors.column(k);
            residual = residual.max((&m * v - v * C64::new(e, 0.0)).norm() / m.norm());
        }
        let op = common::random_amplitudes(seed, 7, 3, 0.3, true).to_cluster_operator();
        let hbar = fock::similarity_transform(&op, &space, &h).map_err(err)?;
        let mut moved: Vec<f64> = mrcc::diagonalize_matrix(&hbar)
            .map_err(err)?
            .iter()
            .map(|p| p.energy.re)
            .collect();
        moved.sort_by(f64::total_cmp);
        for (a, b) in spec.values.iter().zip(&moved) {
            spectrum = spectrum.max((a - b).abs());
        }
    }
    check(
        sign_failures == 0 && residual <= 1e-9 && spectrum <= 1e-9,
        format!(
            "{sign_failures} anticommutation failures over 2^10 determinants; max eigen residual {residual:.1e}; spectrum shift {spectrum:.1e}"
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("size-extensivity", size_extensivity),
        ("analytic oracle", analytic_oracle),
        ("DCI non-extensivity", dci_non_extensivity),
        ("MP2 formula", mp2_formula),
        ("two-electron exactness", two_electron_exactness),
        ("pair energies", pair_energies),
        ("Planck suite", planck_suite),
        ("isotropy null", isotropy_null),
        ("static correlation", static_correlation),
        ("MRCC consistency", mrcc_consistency),
        ("Fock-engine invariants", fock_invariants),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2}. {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2}. {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
