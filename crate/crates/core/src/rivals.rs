//! Comparison tests: the maximum statistic (CLX) and the unbiased
//! Frobenius-norm U-statistic (LC).

use nalgebra::DMatrix;

use crate::bootstrap::{
    bootstrap_p_value, bootstrap_statistics, pd_pooled_covariance, BootstrapConfig,
};
use crate::error::{Error, Result};
use crate::grid::{diff_grid, DiffGrid};
use crate::moments::centered_columns;
use crate::outcome::{Calibration, Method, Provenance, TestOutcome};
use crate::sample::SampleMatrix;

/// `max_{i <= j} M_ij`.
pub fn clx_statistic(grid: &DiffGrid) -> f64 {
    grid.active_m().fold(0.0, f64::max)
}

fn gram(c: &DMatrix<f64>) -> DMatrix<f64> {
    c * c.transpose()
}

/// Unbiased estimate of `tr(S^2)` from the Gram matrix `K_ab = x_a' x_b`,
/// using sums over distinct indices only.
fn trace_sq_estimate(k: &DMatrix<f64>) -> f64 {
    let n = k.nrows();
    let nf = n as f64;
    let mut s1 = 0.0; // sum_{a != b} K_ab^2
    let mut total = 0.0; // sum_{a != b} K_ab
    let mut row_sq = 0.0; // sum_b (sum_{a != b} K_ab)^2
    for b in 0..n {
        let mut row = 0.0;
        for a in 0..n {
            if a != b {
                let v = k[(a, b)];
                s1 += v * v;
                row += v;
            }
        }
        total += row;
        row_sq += row * row;
    }
    let s2 = row_sq - s1; // distinct (a, b, c): K_ab K_bc
    let s3 = total * total - 4.0 * s2 - 2.0 * s1; // distinct (a, b, c, d): K_ab K_cd
    s1 / (nf * (nf - 1.0)) - 2.0 * s2 / (nf * (nf - 1.0) * (nf - 2.0))
        + s3 / (nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0))
}

/// Unbiased estimate of `tr(S1 S2)` from the cross Gram matrix `H_ab = x_a' y_b`.
fn cross_trace_estimate(h: &DMatrix<f64>) -> f64 {
    let (n1, n2) = (h.nrows() as f64, h.ncols() as f64);
    let c1: f64 = h.iter().map(|v| v * v).sum();
    let row_sq: f64 = h.row_iter().map(|r| r.sum().powi(2)).sum();
    let col_sq: f64 = h.column_iter().map(|c| c.sum().powi(2)).sum();
    let total = h.sum();
    let c2 = col_sq - c1; // a != a', shared b
    let c3 = row_sq - c1; // shared a, b != b'
    let c4 = total * total - row_sq - col_sq + c1; // a != a', b != b'
    c1 / (n1 * n2) - c2 / (n1 * (n1 - 1.0) * n2) - c3 / (n1 * n2 * (n2 - 1.0))
        + c4 / (n1 * (n1 - 1.0) * n2 * (n2 - 1.0))
}

/// Unbiased estimator of `||Sigma1 - Sigma2||_F^2`:
/// `A1 + A2 - 2 C` with U-statistics over distinct observation indices.
///
/// The estimator is location invariant; samples are centered before the Gram
/// matrices are formed.
pub fn lc_statistic(x: &SampleMatrix, y: &SampleMatrix) -> Result<f64> {
    if x.p() != y.p() {
        return Err(Error::Dimension { x: x.p(), y: y.p() });
    }
    if x.n() < 4 || y.n() < 4 {
        return Err(Error::Input(format!(
            "the U-statistic needs at least 4 observations per sample, got {} and {}",
            x.n(),
            y.n()
        )));
    }
    let p = x.p();
    let (_, cx) = centered_columns(x);
    let (_, cy) = centered_columns(y);
    let cx = DMatrix::from_column_slice(x.n(), p, &cx);
    let cy = DMatrix::from_column_slice(y.n(), p, &cy);
    let a1 = trace_sq_estimate(&gram(&cx));
    let a2 = trace_sq_estimate(&gram(&cy));
    let c = cross_trace_estimate(&(&cx * cy.transpose()));
    Ok(a1 + a2 - 2.0 * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RivalMethod {
    Clx,
    Lc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RivalConfig {
    pub method: RivalMethod,
    pub calibration: Calibration,
    pub bootstrap: BootstrapConfig,
}

impl RivalConfig {
    pub fn bootstrap(method: RivalMethod, bootstrap: BootstrapConfig) -> Self {
        Self {
            method,
            calibration: Calibration::Bootstrap,
            bootstrap,
        }
    }
}

/// Evaluate a rival statistic on a pair of samples.
pub fn rival_statistic(method: RivalMethod, x: &SampleMatrix, y: &SampleMatrix) -> Result<f64> {
    match method {
        RivalMethod::Clx => Ok(clx_statistic(&diff_grid(x, y)?)),
        RivalMethod::Lc => lc_statistic(x, y),
    }
}

/// Extreme-value limit of the maximum statistic:
/// `P(M_n - 4 log p + log log p <= t) -> exp(-(8 pi)^{-1/2} exp(-t/2))`.
pub fn clx_asymptotic(m_n: f64, p: usize, alpha: f64) -> Result<(f64, f64)> {
    let lp = (p as f64).ln();
    if !(lp.ln() > 0.0) {
        return Err(Error::Domain(format!(
            "extreme-value calibration needs p > e, got {p}"
        )));
    }
    let eight_pi = 8.0 * std::f64::consts::PI;
    let q_alpha = -eight_pi.ln() - 2.0 * (-(-alpha).ln_1p()).ln();
    let critical = 4.0 * lp - lp.ln() + q_alpha;
    let t = m_n - 4.0 * lp + lp.ln();
    let p_value = -(-(-t / 2.0).exp() / eight_pi.sqrt()).exp_m1();
    Ok((critical, p_value))
}

pub fn rival_test(
    x: &SampleMatrix,
    y: &SampleMatrix,
    cfg: &RivalConfig,
    alpha: f64,
) -> Result<TestOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let method = match cfg.method {
        RivalMethod::Clx => Method::Clx,
        RivalMethod::Lc => Method::Lc,
    };
    let mut params = Provenance {
        alpha,
        p: x.p(),
        n1: x.n(),
        n2: y.n(),
        ..Provenance::default()
    };
    match (cfg.method, cfg.calibration) {
        (RivalMethod::Lc, Calibration::Asymptotic) => Err(Error::Unsupported(
            "the LC statistic is only available with bootstrap calibration".into(),
        )),
        (RivalMethod::Clx, Calibration::Asymptotic) => {
            let stat = clx_statistic(&diff_grid(x, y)?);
            let (critical, p_value) = clx_asymptotic(stat, x.p(), alpha)?;
            Ok(TestOutcome {
                method,
                calibration: Calibration::Asymptotic,
                statistic: stat,
                p_value: Some(p_value),
                critical_value: Some(critical),
                reject: stat > critical,
                params,
                warnings: Vec::new(),
            })
        }
        (rival, Calibration::Bootstrap) => {
            let b = &cfg.bootstrap;
            if b.replicates == 0 {
                return Err(Error::Parameter(
                    "bootstrap needs at least one replicate".into(),
                ));
            }
            let stat = rival_statistic(rival, x, y)?;
            let est = pd_pooled_covariance(x, y, b.threshold_mult, b.eig_floor)?;
            let null = bootstrap_statistics(&est, x.n(), y.n(), b.replicates, b.seed, |xs, ys| {
                rival_statistic(rival, xs, ys)
            })?;
            let p_value = bootstrap_p_value(&null, stat, b.smoothed_p_value);
            params.bootstrap_reps = Some(b.replicates);
            params.seed = Some(b.seed);
            Ok(TestOutcome {
                method,
                calibration: Calibration::Bootstrap,
                statistic: stat,
                p_value: Some(p_value),
                critical_value: None,
                reject: p_value < alpha,
                params,
                warnings: Vec::new(),
            })
        }
    }
}
