//! Packed upper-triangular storage for symmetric `p x p` quantities.

use nalgebra::DMatrix;

/// Number of entries `(i, j)` with `0 <= i <= j < p`.
#[inline]
pub fn tri_len(p: usize) -> usize {
    p * (p + 1) / 2
}

/// Position of `(i, j)` (requires `i <= j`) in row-major packed order.
#[inline]
pub fn tri_index(p: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < p);
    i * (2 * p - i + 1) / 2 + (j - i)
}

/// Iterate `(i, j)` pairs in packed order.
pub fn tri_pairs(p: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..p).flat_map(move |i| (i..p).map(move |j| (i, j)))
}

/// Symmetric matrix holding only its upper triangle (diagonal included).
#[derive(Debug, Clone, PartialEq)]
pub struct PackedSym {
    p: usize,
    data: Vec<f64>,
}

impl PackedSym {
    pub fn zeros(p: usize) -> Self {
        Self {
            p,
            data: vec![0.0; tri_len(p)],
        }
    }

    pub(crate) fn from_packed(p: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), tri_len(p));
        Self { p, data }
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.data[tri_index(self.p, a, b)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.data[tri_index(self.p, a, b)] = v;
    }

    pub fn packed(&self) -> &[f64] {
        &self.data
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.p, self.p, |i, j| self.get(i, j))
    }
}
