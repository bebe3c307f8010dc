//! Observation matrices for one sample.

use crate::error::{Error, Result};

/// An `n x p` observation matrix (rows are observations, columns are
/// variables), stored column-major so that per-variable scans are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    n: usize,
    p: usize,
    cols: Vec<f64>,
}

impl SampleMatrix {
    /// Build from column-major storage: `cols[j * n + k]` is observation `k`
    /// of variable `j`.
    pub fn from_col_major(n: usize, p: usize, cols: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::Input(format!("empty sample ({n} x {p})")));
        }
        if cols.len() != n * p {
            return Err(Error::Input(format!(
                "expected {} values for a {n} x {p} sample, got {}",
                n * p,
                cols.len()
            )));
        }
        if let Some(pos) = cols.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite value at row {}, column {}",
                pos % n,
                pos / n
            )));
        }
        Ok(Self { n, p, cols })
    }

    pub fn from_row_major(n: usize, p: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::Input(format!(
                "expected {} values for a {n} x {p} sample, got {}",
                n * p,
                data.len()
            )));
        }
        let mut cols = vec![0.0; n * p];
        for k in 0..n {
            for j in 0..p {
                cols[j * n + k] = data[k * p + j];
            }
        }
        Self::from_col_major(n, p, cols)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(n * p);
        for (k, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != p {
                return Err(Error::Input(format!(
                    "row {k} has {} columns, expected {p}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(n, p, &data)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    #[inline]
    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.cols[j * self.n + k]
    }

    pub fn row(&self, k: usize) -> Vec<f64> {
        (0..self.p).map(|j| self.get(k, j)).collect()
    }

    pub fn as_col_major(&self) -> &[f64] {
        &self.cols
    }

    /// Reorder variables: column `j` of the result is column `perm[j]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.p {
            return Err(Error::Input("permutation length differs from p".into()));
        }
        let mut seen = vec![false; self.p];
        let mut cols = Vec::with_capacity(self.cols.len());
        for &src in perm {
            if src >= self.p || std::mem::replace(&mut seen[src], true) {
                return Err(Error::Input("not a permutation of the columns".into()));
            }
            cols.extend_from_slice(self.column(src));
        }
        Ok(Self {
            n: self.n,
            p: self.p,
            cols,
        })
    }

    /// Multiply column `j` by `scale[j]`.
    pub fn scale_columns(&self, scale: &[f64]) -> Result<Self> {
        if scale.len() != self.p {
            return Err(Error::Input("scale vector length differs from p".into()));
        }
        let mut cols = self.cols.clone();
        for (j, &c) in scale.iter().enumerate() {
            for v in &mut cols[j * self.n..(j + 1) * self.n] {
                *v *= c;
            }
        }
        Self::from_col_major(self.n, self.p, cols)
    }

    /// Check the size requirements of the two-sample statistics.
    pub(crate) fn require_testable(&self, label: &str) -> Result<()> {
        if self.n < 4 {
            return Err(Error::Input(format!(
                "{label}: need at least 4 observations, got {}",
                self.n
            )));
        }
        if self.p < 2 {
            return Err(Error::Input(format!(
                "{label}: need at least 2 variables, got {}",
                self.p
            )));
        }
        Ok(())
    }
}
