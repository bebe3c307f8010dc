//! Per-sample moment estimators: means, covariances and the fourth-moment
//! variance estimates of the centered cross products.
//!
//! All divisors are `n` (not `n - 1`).

use crate::error::{Error, Result};
use crate::packed::{tri_len, PackedSym};
use crate::sample::SampleMatrix;
use crate::sum::pairwise_sum;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub mean: Vec<f64>,
    /// `(1/n) sum_k (x_ki - mean_i)(x_kj - mean_j)`
    pub sigma_hat: PackedSym,
    /// `(1/n) sum_k {(x_ki - mean_i)(x_kj - mean_j) - sigma_hat_ij}^2`
    pub theta_hat: PackedSym,
}

/// Columns of `x` minus their means, column-major.
pub(crate) fn centered_columns(x: &SampleMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = x.n();
    let mut mean = Vec::with_capacity(x.p());
    let mut centered = Vec::with_capacity(n * x.p());
    for j in 0..x.p() {
        let col = x.column(j);
        let m = pairwise_sum(col) / n as f64;
        mean.push(m);
        centered.extend(col.iter().map(|v| v - m));
    }
    (mean, centered)
}

pub fn compute_moments(x: &SampleMatrix) -> Result<MomentSet> {
    let (n, p) = (x.n(), x.p());
    if x.as_col_major().iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite value in sample".into()));
    }
    let (mean, c) = centered_columns(x);
    let nf = n as f64;
    let mut sigma = Vec::with_capacity(tri_len(p));
    let mut theta = Vec::with_capacity(tri_len(p));
    let mut buf = vec![0.0; n];
    for i in 0..p {
        let ci = &c[i * n..(i + 1) * n];
        for j in i..p {
            let cj = &c[j * n..(j + 1) * n];
            for ((b, a), d) in buf.iter_mut().zip(ci).zip(cj) {
                *b = a * d;
            }
            let s = pairwise_sum(&buf) / nf;
            for b in buf.iter_mut() {
                let d = *b - s;
                *b = d * d;
            }
            sigma.push(s);
            theta.push(pairwise_sum(&buf) / nf);
        }
    }
    Ok(MomentSet {
        mean,
        sigma_hat: PackedSym::from_packed(p, sigma),
        theta_hat: PackedSym::from_packed(p, theta),
    })
}
