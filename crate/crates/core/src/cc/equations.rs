//! Spin-orbital CCSD residuals in the Stanton-Gauss intermediate form, for a
//! general (not necessarily diagonal) Fock matrix.
//!
//! Integrals enter as operator coefficients: `<pq||rs>` multiplies
//! `a+_p a+_q a_s a_r`, so nothing is conjugated and complex Hamiltonians
//! need no special casing. Every contraction loops over the nonzero entries
//! of one factor first, which keeps block-diagonal (replicated) systems cheap.
//!
//! The returned residuals are the full projections `<mu| e^-T H e^T |0>`.

use std::borrow::Cow;

use super::blocks::{Block2, Block4, Blocks, ZERO};
use crate::C64;

pub(crate) struct Residuals {
    pub r1: Block2,
    pub r2: Block4,
}

fn half(z: C64) -> C64 {
    z * 0.5
}

pub(crate) fn residuals(b: &Blocks, t1: &Block2, t2: &Block4, singles: bool) -> Residuals {
    let (o, v) = (b.no(), b.nv());

    // Without singles both tau variants are t2 itself.
    let (tau_t, tau) = if singles {
        let mut tau_t = t2.clone();
        let mut tau = t2.clone();
        for i in 0..o {
            for j in 0..o {
                for a in 0..v {
                    for c in 0..v {
                        let s = t1.get(i, a) * t1.get(j, c) - t1.get(i, c) * t1.get(j, a);
                        if s != ZERO {
                            tau_t.add(i, j, a, c, half(s));
                            tau.add(i, j, a, c, s);
                        }
                    }
                }
            }
        }
        (Cow::Owned(tau_t), Cow::Owned(tau))
    } else {
        (Cow::Borrowed(t2), Cow::Borrowed(t2))
    };
    let t2_nz = t2.nz();
    let tau_nz = tau.nz();
    let oovv_nz = &b.nz.oovv;
    let ooov_nz = &b.nz.ooov;
    let ovvv_nz = &b.nz.ovvv;

    // One-body intermediates.
    let mut fae = Block2::zeros([v, v]);
    let mut fmi = Block2::zeros([o, o]);
    let mut fme = b.f_ov.clone();
    for a in 0..v {
        for e in 0..v {
            if a != e {
                fae.add(a, e, b.f_vv.get(a, e));
            }
        }
    }
    for m in 0..o {
        for i in 0..o {
            if m != i {
                fmi.add(m, i, b.f_oo.get(m, i));
            }
        }
    }
    if singles {
        for m in 0..o {
            for e in 0..v {
                let f = b.f_ov.get(m, e);
                if f == ZERO {
                    continue;
                }
                for a in 0..v {
                    fae.add(a, e, -half(f * t1.get(m, a)));
                }
                for i in 0..o {
                    fmi.add(m, i, half(f * t1.get(i, e)));
                }
            }
        }
        for &([m, a, f, e], val) in ovvv_nz {
            fae.add(a, e, t1.get(m, f) * val);
        }
        for &([m, n, i, e], val) in ooov_nz {
            fmi.add(m, i, t1.get(n, e) * val);
        }
        for &([m, n, e, f], val) in oovv_nz {
            fme.add(m, e, t1.get(n, f) * val);
        }
    }
    for &([m, n, e, f], val) in oovv_nz {
        for a in 0..v {
            let t = tau_t.get(m, n, a, f);
            if t != ZERO {
                fae.add(a, e, -half(t * val));
            }
        }
        for i in 0..o {
            let t = tau_t.get(i, n, e, f);
            if t != ZERO {
                fmi.add(m, i, half(t * val));
            }
        }
    }

    // Two-body intermediates. The tau-tau piece of the particle ladder is
    // folded into W_mnij, which therefore carries 1/2 instead of 1/4.
    let mut wmnij = b.oooo.clone();
    if singles {
        for &([m, n, i, e], val) in ooov_nz {
            for j in 0..o {
                let x = t1.get(j, e) * val;
                wmnij.add(m, n, i, j, x);
                wmnij.add(m, n, j, i, -x);
            }
        }
    }
    for &([m, n, e, f], val) in oovv_nz {
        for i in 0..o {
            for j in 0..o {
                let t = tau.get(i, j, e, f);
                if t != ZERO {
                    wmnij.add(m, n, i, j, half(t * val));
                }
            }
        }
    }

    let mut wmbej = b.ovvo.clone();
    if singles {
        for &([m, c, e, f], val) in ovvv_nz {
            for j in 0..o {
                wmbej.add(m, c, e, j, t1.get(j, f) * val);
            }
        }
        for &([m, n, j, e], val) in ooov_nz {
            for c in 0..v {
                wmbej.add(m, c, e, j, t1.get(n, c) * val);
            }
        }
    }
    for &([m, n, e, f], val) in oovv_nz {
        for j in 0..o {
            for c in 0..v {
                let mut k = half(t2.get(j, n, f, c));
                if singles {
                    k += t1.get(j, f) * t1.get(n, c);
                }
                if k != ZERO {
                    wmbej.add(m, c, e, j, -k * val);
                }
            }
        }
    }

    // Doubles residual.
    let mut r2 = Block4::zeros([o, o, v, v]);
    for &([a, c, i, j], val) in &b.nz.vvoo {
        r2.add(i, j, a, c, val);
    }

    let mut x_be = fae.clone();
    let mut y_mj = fmi.clone();
    if singles {
        for m in 0..o {
            for e in 0..v {
                let f = fme.get(m, e);
                if f == ZERO {
                    continue;
                }
                for c in 0..v {
                    x_be.add(c, e, -half(t1.get(m, c) * f));
                }
                for j in 0..o {
                    y_mj.add(m, j, half(t1.get(j, e) * f));
                }
            }
        }
    }
    for &([i, j, a, e], val) in &t2_nz {
        for c in 0..v {
            let x = val * x_be.get(c, e);
            r2.add(i, j, a, c, x);
            r2.add(i, j, c, a, -x);
        }
    }
    for &([i, m, a, c], val) in &t2_nz {
        for j in 0..o {
            let x = val * y_mj.get(m, j);
            r2.add(i, j, a, c, -x);
            r2.add(j, i, a, c, x);
        }
    }
    for &([m, n, a, c], val) in &tau_nz {
        for i in 0..o {
            for j in 0..o {
                let w = wmnij.get(m, n, i, j);
                if w != ZERO {
                    r2.add(i, j, a, c, half(val * w));
                }
            }
        }
    }
    for &([a, c, e, f], val) in &b.nz.vvvv {
        for i in 0..o {
            for j in 0..o {
                let t = tau.get(i, j, e, f);
                if t != ZERO {
                    r2.add(i, j, a, c, half(t * val));
                }
            }
        }
    }
    if singles {
        for &([m, a, e, f], val) in ovvv_nz {
            for c in 0..v {
                let k = half(t1.get(m, c) * val);
                if k == ZERO {
                    continue;
                }
                for i in 0..o {
                    for j in 0..o {
                        let x = k * tau.get(i, j, e, f);
                        r2.add(i, j, a, c, x);
                        r2.add(i, j, c, a, -x);
                    }
                }
            }
        }
    }
    let add_pp = |r2: &mut Block4, i: usize, j: usize, a: usize, c: usize, x: C64| {
        r2.add(i, j, a, c, x);
        r2.add(j, i, a, c, -x);
        r2.add(i, j, c, a, -x);
        r2.add(j, i, c, a, x);
    };
    for &([i, m, a, e], val) in &t2_nz {
        for c in 0..v {
            for j in 0..o {
                let w = wmbej.get(m, c, e, j);
                if w != ZERO {
                    add_pp(&mut r2, i, j, a, c, val * w);
                }
            }
        }
    }
    if singles {
        for &([m, c, e, j], val) in &b.nz.ovvo {
            for i in 0..o {
                let te = t1.get(i, e);
                if te == ZERO {
                    continue;
                }
                for a in 0..v {
                    let x = -(te * t1.get(m, a) * val);
                    if x != ZERO {
                        add_pp(&mut r2, i, j, a, c, x);
                    }
                }
            }
        }
        for &([a, c, e, j], val) in &b.nz.vvvo {
            for i in 0..o {
                let x = t1.get(i, e) * val;
                r2.add(i, j, a, c, x);
                r2.add(j, i, a, c, -x);
            }
        }
        for &([m, c, i, j], val) in &b.nz.ovoo {
            for a in 0..v {
                let x = t1.get(m, a) * val;
                r2.add(i, j, a, c, -x);
                r2.add(i, j, c, a, x);
            }
        }
    }
    for i in 0..o {
        for j in 0..o {
            for a in 0..v {
                for c in 0..v {
                    let t = t2.get(i, j, a, c);
                    if t != ZERO {
                        let d = b.f_oo.get(i, i) + b.f_oo.get(j, j)
                            - b.f_vv.get(a, a)
                            - b.f_vv.get(c, c);
                        r2.add(i, j, a, c, -d * t);
                    }
                }
            }
        }
    }

    // Singles residual.
    let mut r1 = Block2::zeros([o, v]);
    if singles {
        for i in 0..o {
            for a in 0..v {
                let mut r = b.f_vo.get(a, i);
                for e in 0..v {
                    r += t1.get(i, e) * fae.get(a, e);
                }
                for m in 0..o {
                    r -= t1.get(m, a) * fmi.get(m, i);
                }
                r -= (b.f_oo.get(i, i) - b.f_vv.get(a, a)) * t1.get(i, a);
                r1.add(i, a, r);
            }
        }
        for &([i, m, a, e], val) in &t2_nz {
            r1.add(i, a, val * fme.get(m, e));
        }
        for &([n, a, f, i], val) in &b.nz.ovvo {
            r1.add(i, a, t1.get(n, f) * val);
        }
        for &([m, a, e, f], val) in ovvv_nz {
            for i in 0..o {
                let t = t2.get(i, m, e, f);
                if t != ZERO {
                    r1.add(i, a, -half(t * val));
                }
            }
        }
        for &([n, m, i, e], val) in ooov_nz {
            for a in 0..v {
                let t = t2.get(m, n, a, e);
                if t != ZERO {
                    r1.add(i, a, half(t * val));
                }
            }
        }
    }

    Residuals { r1, r2 }
}

/// Correlation energy split by the number of negative-sector virtual
/// indices in the doubles term: `(correlation, one-pair, two-pair)`.
pub(crate) fn energy(b: &Blocks, negative: &[bool], t1: &Block2, t2: &Block4) -> [C64; 3] {
    let (o, v) = (b.no(), b.nv());
    let mut out = [ZERO; 3];
    for i in 0..o {
        for a in 0..v {
            out[0] += b.f_ov.get(i, a) * t1.get(i, a);
        }
    }
    for &([i, j, a, c], val) in &b.nz.oovv {
        let k = usize::from(negative[a]) + usize::from(negative[c]);
        out[k] += val * (t2.get(i, j, a, c) * 0.25 + t1.get(i, a) * t1.get(j, c) * 0.5);
    }
    out
}
