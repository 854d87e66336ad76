//! Random Hamiltonians that satisfy every model invariant.

#![allow(dead_code)]

use qedcc_core::cc::Amplitudes;
use qedcc_core::model::{IntegralSet, ModelSystem, PhysicalConstants, SpinorLevel, Tensor4};
use qedcc_core::{CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn cnum(rng: &mut impl Rng, scale: f64, complex: bool) -> C64 {
    let re = rng.gen_range(-1.0..1.0) * scale;
    let im = if complex {
        rng.gen_range(-1.0..1.0) * scale
    } else {
        0.0
    };
    C64::new(re, im)
}

/// Antisymmetric, two-body Hermitian tensor with entries of order `scale`.
pub fn random_tensor(rng: &mut impl Rng, n: usize, scale: f64, complex: bool) -> Tensor4 {
    let mut y = Tensor4::zeros(n);
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    y.set(p, q, r, s, cnum(rng, scale, complex));
                }
            }
        }
    }
    let w = y.map_indexed(|p, q, r, s, v| v + y.get(r, s, p, q).conj());
    w.map_indexed(|p, q, r, s, _| {
        w.get(p, q, r, s) - w.get(q, p, r, s) - w.get(p, q, s, r) + w.get(q, p, s, r)
    })
}

/// `n` positive-sector levels, the lowest `ne` occupied, with a gap between
/// occupied and virtual one-body energies. Level energies are set to the
/// Fock diagonal.
pub fn random_system(seed: u64, n: usize, ne: usize, complex: bool) -> ModelSystem {
    let mut rng = rng(seed);
    let v = random_tensor(&mut rng, n, 0.04, complex);
    let mut h = CMatrix::zeros(n, n);
    for p in 0..n {
        let e = if p < ne {
            rng.gen_range(-1.6..-0.6)
        } else {
            rng.gen_range(0.2..1.4)
        };
        h[(p, p)] = C64::new(e, 0.0);
        for q in p + 1..n {
            let z = cnum(&mut rng, 0.03, complex);
            h[(p, q)] = z;
            h[(q, p)] = z.conj();
        }
    }
    let mut fock_diag = vec![0.0; n];
    for (p, f) in fock_diag.iter_mut().enumerate() {
        *f = h[(p, p)].re + (0..ne).map(|i| v.get(p, i, p, i).re).sum::<f64>();
    }
    let levels = (0..n)
        .map(|p| SpinorLevel::positive(p, fock_diag[p], p < ne))
        .collect();
    let mut ints = IntegralSet::zeros(n);
    ints.h_ext = h;
    ints.v_coulomb = v;
    ModelSystem::new(PhysicalConstants::default(), levels, ints, ne).unwrap()
}

/// Random antisymmetric-consistent amplitudes over occupied `0..ne` and
/// virtual `ne..n`.
pub fn random_amplitudes(seed: u64, n: usize, ne: usize, scale: f64, singles: bool) -> Amplitudes {
    let mut rng = rng(seed ^ 0x5eed);
    let mut amps = Amplitudes::default();
    for i in 0..ne {
        for a in ne..n {
            if singles {
                amps.t1.insert((i, a), cnum(&mut rng, scale, true));
            }
        }
    }
    for i in 0..ne {
        for j in i + 1..ne {
            for a in ne..n {
                for b in a + 1..n {
                    amps.t2.insert([i, j, a, b], cnum(&mut rng, scale, true));
                }
            }
        }
    }
    amps
}
