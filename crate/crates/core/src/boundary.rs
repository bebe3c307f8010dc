//! Detection boundaries and signal strengths of the sparse alternative.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Optimal detection boundary for sparse normal means, `beta in (0, 1)`.
pub fn rho_mean(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!(
            "rho needs beta in (0, 1), got {beta}"
        )));
    }
    Ok(if beta <= 0.75 {
        (beta - 0.5).max(0.0)
    } else {
        (1.0 - (1.0 - beta).sqrt()).powi(2)
    })
}

/// A point of the sparse phase diagram, `beta in (1/2, 1)` and `xi in [0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryQuery {
    beta: f64,
    xi: f64,
}

impl BoundaryQuery {
    pub fn new(beta: f64, xi: f64) -> Result<Self> {
        if !(beta > 0.5 && beta < 1.0) {
            return Err(Error::Domain(format!(
                "beta must lie in (1/2, 1), got {beta}"
            )));
        }
        if !(0.0..=2.0).contains(&xi) {
            return Err(Error::Domain(format!("xi must lie in [0, 2], got {xi}")));
        }
        Ok(Self { beta, xi })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }
}

/// Breakpoint between the first two pieces of `rho_star`.
pub fn first_breakpoint(xi: f64) -> f64 {
    0.625 - xi / 16.0
}

/// Detection boundary of the multi-level thresholding test when `n ~ p^xi`.
pub fn rho_star(q: BoundaryQuery) -> f64 {
    let (beta, xi) = (q.beta, q.xi);
    if beta <= first_breakpoint(xi) {
        ((4.0 - 2.0 * xi).sqrt() - (6.0 - 8.0 * beta - xi).sqrt()).powi(2) / 8.0
    } else if beta <= 0.75 {
        beta - 0.5
    } else {
        (1.0 - (1.0 - beta).sqrt()).powi(2)
    }
}

/// `r = r0 / {(1 - kappa) theta1 + kappa theta2}`.
pub fn standardized_signal(r0: f64, kappa: f64, theta1: f64, theta2: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Domain(format!(
            "kappa must lie in (0, 1), got {kappa}"
        )));
    }
    if !(theta1 > 0.0 && theta2 > 0.0) {
        return Err(Error::Domain("theta values must be positive".into()));
    }
    Ok(r0 / ((1.0 - kappa) * theta1 + kappa * theta2))
}

/// Range `(min, max)` of the standardized signal over entries where the two
/// covariance matrices differ, using Gaussian fourth moments
/// `theta_ij = sigma_ii sigma_jj + sigma_ij^2` and
/// `r0_ij = n delta_ij^2 / (2 log q)`. `None` when the matrices agree.
pub fn signal_strength_range(
    sigma1: &DMatrix<f64>,
    sigma2: &DMatrix<f64>,
    n: f64,
    kappa: f64,
) -> Result<Option<(f64, f64)>> {
    let p = sigma1.nrows();
    if sigma1.shape() != (p, p) || sigma2.shape() != (p, p) || p < 2 {
        return Err(Error::Dimension {
            x: sigma1.nrows(),
            y: sigma2.nrows(),
        });
    }
    let log_q = ((p * (p + 1) / 2) as f64).ln();
    let mut range: Option<(f64, f64)> = None;
    for i in 0..p {
        for j in i..p {
            let delta = sigma1[(i, j)] - sigma2[(i, j)];
            if delta == 0.0 {
                continue;
            }
            let r0 = n * delta * delta / (2.0 * log_q);
            let t1 = sigma1[(i, i)] * sigma1[(j, j)] + sigma1[(i, j)].powi(2);
            let t2 = sigma2[(i, i)] * sigma2[(j, j)] + sigma2[(i, j)].powi(2);
            let r = standardized_signal(r0, kappa, t1, t2)?;
            range = Some(match range {
                None => (r, r),
                Some((lo, hi)) => (lo.min(r), hi.max(r)),
            });
        }
    }
    Ok(range)
}

/// `points` equally spaced values from `min` to `max` inclusive.
pub fn beta_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let step = (max - min) / (points - 1) as f64;
            (0..points)
                .map(|k| {
                    if k + 1 == points {
                        max
                    } else {
                        min + step * k as f64
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRow {
    pub xi: f64,
    pub beta: f64,
    pub rho_star: f64,
    pub rho_mean: f64,
}

pub const PHASE_HEADER: [&str; 4] = ["xi", "beta", "rho_star", "rho_mean"];

/// Long-form table of `rho_star(beta, xi)` and `rho(beta)`, ordered by `xi`
/// then `beta`.
pub fn phase_table(xis: &[f64], betas: &[f64]) -> Result<Vec<PhaseRow>> {
    let mut rows = Vec::with_capacity(xis.len() * betas.len());
    for &xi in xis {
        for &beta in betas {
            let q = BoundaryQuery::new(beta, xi)?;
            rows.push(PhaseRow {
                xi,
                beta,
                rho_star: rho_star(q),
                rho_mean: rho_mean(beta)?,
            });
        }
    }
    Ok(rows)
}

/// Verify a phase table: values recompute within `tol`, `rho_star >= rho_mean`
/// and `rho_star` is nonincreasing in `xi` at each `beta`. Returns the list of
/// violations.
pub fn check_phase_rows(rows: &[PhaseRow], tol: f64) -> Vec<String> {
    let mut problems = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        match BoundaryQuery::new(row.beta, row.xi) {
            Err(e) => problems.push(format!("row {k}: {e}")),
            Ok(q) => {
                let expect = rho_star(q);
                if (expect - row.rho_star).abs() > tol {
                    problems.push(format!("row {k}: rho_star {} != {expect}", row.rho_star));
                }
                let mean = rho_mean(row.beta).unwrap_or(f64::NAN);
                if (mean - row.rho_mean).abs() > tol {
                    problems.push(format!("row {k}: rho_mean {} != {mean}", row.rho_mean));
                }
            }
        }
        if row.rho_star < row.rho_mean - tol {
            problems.push(format!("row {k}: rho_star below rho_mean"));
        }
    }
    for (k, a) in rows.iter().enumerate() {
        for b in &rows[k + 1..] {
            if a.beta == b.beta && a.xi < b.xi && a.rho_star < b.rho_star - tol {
                problems.push(format!(
                    "beta {}: rho_star increases from xi {} to xi {}",
                    a.beta, a.xi, b.xi
                ));
            }
        }
    }
    problems
}
