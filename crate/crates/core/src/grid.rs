//! Standardized entry-wise differences between two sample covariance (or
//! correlation) matrices.

use crate::error::{Error, Result};
use crate::moments::{centered_columns, compute_moments};
use crate::packed::{tri_index, tri_len, tri_pairs, PackedSym};
use crate::sample::SampleMatrix;
use crate::sum::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Covariance,
    /// Diagonal entries are identically zero and take no part in scans.
    Correlation,
}

/// Packed upper-triangular grid of `F_ij`, `M_ij = F_ij^2` and the variance
/// denominators, for `0 <= i <= j < p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffGrid {
    p: usize,
    n1: usize,
    n2: usize,
    kind: GridKind,
    f: Vec<f64>,
    m: Vec<f64>,
    var_den: Vec<f64>,
}

impl DiffGrid {
    /// Build a grid directly from `M` values (test corpora and synthetic
    /// grids). `F` is set to `+sqrt(M)` and the denominators to 1.
    pub fn from_m_values(p: usize, m: Vec<f64>, n1: usize, n2: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::Input(format!("need p >= 2, got {p}")));
        }
        if m.len() != tri_len(p) {
            return Err(Error::Input(format!(
                "expected {} packed entries for p = {p}, got {}",
                tri_len(p),
                m.len()
            )));
        }
        if m.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Input(
                "M values must be finite and nonnegative".into(),
            ));
        }
        let f = m.iter().map(|v| v.sqrt()).collect();
        let var_den = vec![1.0; m.len()];
        Ok(Self {
            p,
            n1,
            n2,
            kind: GridKind::Covariance,
            f,
            m,
            var_den,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// `p (p + 1) / 2`
    pub fn q(&self) -> usize {
        tri_len(self.p)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Effective sample size `n1 n2 / (n1 + n2)`.
    pub fn n_eff(&self) -> f64 {
        let (a, b) = (self.n1 as f64, self.n2 as f64);
        a * b / (a + b)
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Number of entries that take part in the thresholding sums.
    pub fn active_count(&self) -> usize {
        match self.kind {
            GridKind::Covariance => self.q(),
            GridKind::Correlation => self.q() - self.p,
        }
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    pub fn var_den(&self) -> &[f64] {
        &self.var_den
    }

    pub fn f_at(&self, i: usize, j: usize) -> f64 {
        self.f[self.index(i, j)]
    }

    pub fn m_at(&self, i: usize, j: usize) -> f64 {
        self.m[self.index(i, j)]
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        tri_index(self.p, a, b)
    }

    /// `M` values of the active entries, in packed order.
    pub fn active_m(&self) -> impl Iterator<Item = f64> + '_ {
        let p = self.p;
        let kind = self.kind;
        tri_pairs(p)
            .zip(self.m.iter())
            .filter(move |((i, j), _)| kind == GridKind::Covariance || i != j)
            .map(|(_, &v)| v)
    }
}

fn check_pair(x: &SampleMatrix, y: &SampleMatrix) -> Result<()> {
    x.require_testable("x")?;
    y.require_testable("y")?;
    if x.p() != y.p() {
        return Err(Error::Dimension { x: x.p(), y: y.p() });
    }
    Ok(())
}

/// `F_ij = (sigma_ij1 - sigma_ij2) / sqrt(theta_ij1/n1 + theta_ij2/n2)`.
pub fn diff_grid(x: &SampleMatrix, y: &SampleMatrix) -> Result<DiffGrid> {
    check_pair(x, y)?;
    let (n1, n2) = (x.n() as f64, y.n() as f64);
    let mx = compute_moments(x)?;
    let my = compute_moments(y)?;
    let p = x.p();
    let q = tri_len(p);
    let mut f = Vec::with_capacity(q);
    let mut m = Vec::with_capacity(q);
    let mut var_den = Vec::with_capacity(q);
    for (idx, (i, j)) in tri_pairs(p).enumerate() {
        let den = mx.theta_hat.packed()[idx] / n1 + my.theta_hat.packed()[idx] / n2;
        if !(den > 0.0 && den.is_finite()) {
            return Err(Error::DegenerateVariance { i, j });
        }
        let fij = (mx.sigma_hat.packed()[idx] - my.sigma_hat.packed()[idx]) / den.sqrt();
        f.push(fij);
        m.push(fij * fij);
        var_den.push(den);
    }
    Ok(DiffGrid {
        p,
        n1: x.n(),
        n2: y.n(),
        kind: GridKind::Covariance,
        f,
        m,
        var_den,
    })
}

/// Sample correlations and delta-method variance estimates of one sample.
///
/// With standardized centered columns `a = u / sqrt(s_ii)`, `b = v / sqrt(s_jj)`
/// the influence function of `rho_ij` is `a b - (rho/2)(a^2 + b^2)`; its
/// empirical second moment estimates the variance of `sqrt(n)(rho_hat - rho)`.
pub fn correlation_moments(x: &SampleMatrix) -> Result<(PackedSym, PackedSym)> {
    let (n, p) = (x.n(), x.p());
    let nf = n as f64;
    let (_, c) = centered_columns(x);
    let mut z = vec![0.0; n * p];
    for j in 0..p {
        let col = &c[j * n..(j + 1) * n];
        let sq: Vec<f64> = col.iter().map(|v| v * v).collect();
        let var = pairwise_sum(&sq) / nf;
        if !(var > 0.0) {
            return Err(Error::DegenerateVariance { i: j, j });
        }
        let sd = var.sqrt();
        for (dst, v) in z[j * n..(j + 1) * n].iter_mut().zip(col) {
            *dst = v / sd;
        }
    }
    let mut rho = PackedSym::zeros(p);
    let mut var = PackedSym::zeros(p);
    let mut buf = vec![0.0; n];
    for i in 0..p {
        rho.set(i, i, 1.0);
        let zi = &z[i * n..(i + 1) * n];
        for j in (i + 1)..p {
            let zj = &z[j * n..(j + 1) * n];
            for ((b, a), d) in buf.iter_mut().zip(zi).zip(zj) {
                *b = a * d;
            }
            let r = pairwise_sum(&buf) / nf;
            for ((b, a), d) in buf.iter_mut().zip(zi).zip(zj) {
                let psi = a * d - 0.5 * r * (a * a + d * d);
                *b = psi * psi;
            }
            rho.set(i, j, r);
            var.set(i, j, pairwise_sum(&buf) / nf);
        }
    }
    Ok((rho, var))
}

/// Correlation analogue of [`diff_grid`]; diagonal entries are exactly zero
/// (with a zero denominator) and are excluded from scans.
pub fn correlation_diff_grid(x: &SampleMatrix, y: &SampleMatrix) -> Result<DiffGrid> {
    check_pair(x, y)?;
    let (n1, n2) = (x.n() as f64, y.n() as f64);
    let (r1, v1) = correlation_moments(x)?;
    let (r2, v2) = correlation_moments(y)?;
    let p = x.p();
    let q = tri_len(p);
    let mut f = Vec::with_capacity(q);
    let mut m = Vec::with_capacity(q);
    let mut var_den = Vec::with_capacity(q);
    for (i, j) in tri_pairs(p) {
        if i == j {
            f.push(0.0);
            m.push(0.0);
            var_den.push(0.0);
            continue;
        }
        let den = v1.get(i, j) / n1 + v2.get(i, j) / n2;
        if !(den > 0.0 && den.is_finite()) {
            return Err(Error::DegenerateVariance { i, j });
        }
        let fij = (r1.get(i, j) - r2.get(i, j)) / den.sqrt();
        f.push(fij);
        m.push(fij * fij);
        var_den.push(den);
    }
    Ok(DiffGrid {
        p,
        n1: x.n(),
        n2: y.n(),
        kind: GridKind::Correlation,
        f,
        m,
        var_den,
    })
}
