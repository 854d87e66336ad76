//! Dense rank-4 storage for antisymmetrized two-body integrals `<pq||rs>`.

use std::ops::Index;

use crate::C64;

/// Dense `n x n x n x n` complex tensor, row-major in `(p, q, r, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    dim: usize,
    data: Vec<C64>,
}

impl Tensor4 {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim.pow(4)],
        }
    }

    /// Builds a tensor from row-major data; `None` if the length is not `dim^4`.
    pub fn from_vec(dim: usize, data: Vec<C64>) -> Option<Self> {
        (data.len() == dim.pow(4)).then_some(Self { dim, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn offset(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.dim + q) * self.dim + r) * self.dim + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> C64 {
        self.data[self.offset(p, q, r, s)]
    }

    #[inline]
    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, value: C64) {
        let k = self.offset(p, q, r, s);
        self.data[k] = value;
    }

    /// Writes `<pq||rs> = value` together with every element fixed by
    /// antisymmetry and two-body Hermiticity.
    pub fn set_antisymmetrized(&mut self, p: usize, q: usize, r: usize, s: usize, value: C64) {
        for (a, b, c, d, v) in [
            (p, q, r, s, value),
            (q, p, r, s, -value),
            (p, q, s, r, -value),
            (q, p, s, r, value),
        ] {
            self.set(a, b, c, d, v);
            self.set(c, d, a, b, v.conj());
        }
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// Iterates `(p, q, r, s, value)` over entries that are not exactly zero.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, usize, usize, C64)> + '_ {
        let n = self.dim;
        self.data.iter().enumerate().filter_map(move |(k, &v)| {
            if v.re == 0.0 && v.im == 0.0 {
                return None;
            }
            let s = k % n;
            let r = (k / n) % n;
            let q = (k / (n * n)) % n;
            let p = k / (n * n * n);
            Some((p, q, r, s, v))
        })
    }

    /// Elementwise sum; dimensions must agree.
    pub fn add(&self, other: &Tensor4) -> Tensor4 {
        assert_eq!(self.dim, other.dim, "tensor dimension mismatch");
        Tensor4 {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Returns a copy of the tensor with every element mapped through `f(p, q, r, s, value)`.
    pub fn map_indexed(
        &self,
        mut f: impl FnMut(usize, usize, usize, usize, C64) -> C64,
    ) -> Tensor4 {
        let n = self.dim;
        let mut out = self.clone();
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let k = self.offset(p, q, r, s);
                        out.data[k] = f(p, q, r, s, self.data[k]);
                    }
                }
            }
        }
        out
    }
}

impl Index<(usize, usize, usize, usize)> for Tensor4 {
    type Output = C64;

    fn index(&self, (p, q, r, s): (usize, usize, usize, usize)) -> &C64 {
        &self.data[self.offset(p, q, r, s)]
    }
}
