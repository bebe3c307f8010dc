//! Small dense linear-algebra helpers over `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::sample::SampleMatrix;

pub fn symmetric_eigen(a: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    if a.nrows() != a.ncols() || a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(
            "eigendecomposition needs a finite square matrix".into(),
        ));
    }
    SymmetricEigen::try_new(a.clone(), 1e-14, 10_000)
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))
}

pub fn min_eigenvalue(a: &DMatrix<f64>) -> Result<f64> {
    Ok(symmetric_eigen(a)?.eigenvalues.min())
}

/// `V diag(max(lambda, 0)^{1/2}) V^T`.
pub fn sym_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = symmetric_eigen(a)?;
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&roots) * v.transpose())
}

/// Innovation law of the simulated observations (mean 0, variance 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Innovation {
    Gaussian,
    /// `G - 2` with `G ~ Gamma(shape 4, rate 2)`.
    Gamma,
}

impl Innovation {
    pub fn as_str(self) -> &'static str {
        match self {
            Innovation::Gaussian => "gaussian",
            Innovation::Gamma => "gamma",
        }
    }
}

/// `n x p` matrix of i.i.d. innovations, drawn observation by observation.
pub fn draw_innovations<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    p: usize,
    law: Innovation,
) -> DMatrix<f64> {
    let mut rows = Vec::with_capacity(n * p);
    match law {
        Innovation::Gaussian => {
            rows.extend((0..n * p).map(|_| -> f64 { StandardNormal.sample(rng) }));
        }
        Innovation::Gamma => {
            let g = Gamma::new(4.0, 0.5).expect("valid gamma parameters");
            rows.extend((0..n * p).map(|_| g.sample(rng) - 2.0));
        }
    }
    DMatrix::from_row_slice(n, p, &rows)
}

/// Observations `x_k = root * z_k` for innovations `z_k`, i.e. `Z root^T`.
pub fn draw_sample<R: Rng + ?Sized>(
    rng: &mut R,
    root: &DMatrix<f64>,
    n: usize,
    law: Innovation,
) -> Result<SampleMatrix> {
    let z = draw_innovations(rng, n, root.ncols(), law);
    let x = z * root.transpose();
    SampleMatrix::from_col_major(n, root.nrows(), x.as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::{domain, stream_rng, Namespace};

    #[test]
    fn sqrt_squares_back() {
        let a = DMatrix::from_fn(6, 6, |i, j| 0.4f64.powi((i as i32 - j as i32).abs()));
        let r = sym_sqrt(&a).unwrap();
        let back = &r * &r;
        assert!((back - &a).amax() <= 1e-8 * a.amax());
    }

    #[test]
    fn gamma_innovation_moments() {
        let mut rng = stream_rng(11, domain(Namespace::Single, 0), 0);
        let z = draw_innovations(&mut rng, 1_000_000, 1, Innovation::Gamma);
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }
}
