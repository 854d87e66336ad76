//! Dense occupied/virtual blocks of the working Hamiltonian.

use crate::qed::Hamiltonian;
use crate::C64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);

fn max_norm(data: &[C64]) -> f64 {
    data.iter()
        .map(|z| z.norm_sqr())
        .fold(0.0, |m: f64, x| {
            if x.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(x)
            }
        })
        .sqrt()
}

/// Dense rank-4 block with its own extents.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Block4 {
    pub d: [usize; 4],
    pub data: Vec<C64>,
}

impl Block4 {
    pub fn zeros(d: [usize; 4]) -> Self {
        Self {
            d,
            data: vec![ZERO; d.iter().product()],
        }
    }

    #[inline]
    pub fn at(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.d[1] + q) * self.d[2] + r) * self.d[3] + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> C64 {
        self.data[self.at(p, q, r, s)]
    }

    #[inline]
    pub fn add(&mut self, p: usize, q: usize, r: usize, s: usize, v: C64) {
        let k = self.at(p, q, r, s);
        self.data[k] += v;
    }

    /// Entries that are not exactly zero, with their indices.
    pub fn nz(&self) -> Vec<([usize; 4], C64)> {
        let [_, b, c, d] = self.d;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != ZERO)
            .map(|(k, &v)| ([k / (b * c * d), (k / (c * d)) % b, (k / d) % c, k % d], v))
            .collect()
    }

    /// NaN if any entry is NaN.
    pub fn max_abs(&self) -> f64 {
        max_norm(&self.data)
    }
}

/// Dense rank-2 block.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Block2 {
    pub d: [usize; 2],
    pub data: Vec<C64>,
}

impl Block2 {
    pub fn zeros(d: [usize; 2]) -> Self {
        Self {
            d,
            data: vec![ZERO; d[0] * d[1]],
        }
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize) -> C64 {
        self.data[p * self.d[1] + q]
    }

    #[inline]
    pub fn add(&mut self, p: usize, q: usize, v: C64) {
        self.data[p * self.d[1] + q] += v;
    }

    /// NaN if any entry is NaN.
    pub fn max_abs(&self) -> f64 {
        max_norm(&self.data)
    }
}

/// Integral blocks named by the sector of each slot, `o` occupied and `v`
/// virtual, in `<pq||rs>` order.
pub(crate) struct Blocks {
    pub occ: Vec<usize>,
    pub vir: Vec<usize>,
    pub f_oo: Block2,
    pub f_ov: Block2,
    pub f_vo: Block2,
    pub f_vv: Block2,
    pub oooo: Block4,
    pub ovvo: Block4,
    /// Nonzero entries of the constant blocks, gathered once.
    pub nz: NonzeroBlocks,
}

pub(crate) type Entries = Vec<([usize; 4], C64)>;

pub(crate) struct NonzeroBlocks {
    pub oovv: Entries,
    pub vvoo: Entries,
    pub ooov: Entries,
    pub ovvv: Entries,
    pub vvvv: Entries,
    pub ovvo: Entries,
    pub vvvo: Entries,
    pub ovoo: Entries,
}

impl Blocks {
    pub fn new(h: &Hamiltonian, occ: Vec<usize>, vir: Vec<usize>) -> Self {
        let fock = h.fock_matrix();
        let g = &h.two_body;
        let block2 = |rows: &[usize], cols: &[usize]| {
            let mut b = Block2::zeros([rows.len(), cols.len()]);
            for (x, &p) in rows.iter().enumerate() {
                for (y, &q) in cols.iter().enumerate() {
                    b.data[x * cols.len() + y] = fock[(p, q)];
                }
            }
            b
        };
        let block4 = |s: [&[usize]; 4]| {
            let mut b = Block4::zeros([s[0].len(), s[1].len(), s[2].len(), s[3].len()]);
            let mut k = 0;
            for &p in s[0] {
                for &q in s[1] {
                    for &r in s[2] {
                        for &t in s[3] {
                            b.data[k] = g.get(p, q, r, t);
                            k += 1;
                        }
                    }
                }
            }
            b
        };
        let (o, v) = (occ.as_slice(), vir.as_slice());
        let ovvo = block4([o, v, v, o]);
        let nz = NonzeroBlocks {
            oovv: block4([o, o, v, v]).nz(),
            vvoo: block4([v, v, o, o]).nz(),
            ooov: block4([o, o, o, v]).nz(),
            ovvv: block4([o, v, v, v]).nz(),
            vvvv: block4([v, v, v, v]).nz(),
            ovvo: ovvo.nz(),
            vvvo: block4([v, v, v, o]).nz(),
            ovoo: block4([o, v, o, o]).nz(),
        };
        Self {
            f_oo: block2(o, o),
            f_ov: block2(o, v),
            f_vo: block2(v, o),
            f_vv: block2(v, v),
            oooo: block4([o, o, o, o]),
            ovvo,
            nz,
            occ,
            vir,
        }
    }

    pub fn no(&self) -> usize {
        self.occ.len()
    }

    pub fn nv(&self) -> usize {
        self.vir.len()
    }
}
