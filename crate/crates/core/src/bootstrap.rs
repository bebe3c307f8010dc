//! Parametric bootstrap calibration from a positive-definite pooled
//! covariance estimate.

use nalgebra::{Cholesky, DMatrix};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::diff_grid;
use crate::linalg::{draw_sample, symmetric_eigen, Innovation};
use crate::moments::centered_columns;
use crate::outcome::{Calibration, Method, Provenance, TestOutcome};
use crate::sample::SampleMatrix;
use crate::streams::{domain, stream_rng, Namespace};
use crate::threshold::{mtt_scan, ThresholdParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    /// Number of bootstrap replicates `B`.
    pub replicates: usize,
    pub seed: u64,
    /// Soft-threshold multiplier on `sqrt(log p / (n1 + n2))`.
    pub threshold_mult: f64,
    /// Eigenvalue floor of the correlation-scale estimate.
    pub eig_floor: f64,
    /// Report `(1 + #exceed) / (B + 1)` instead of `#exceed / B`.
    pub smoothed_p_value: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 250,
            seed: 0,
            threshold_mult: 1.0,
            eig_floor: 0.05,
            smoothed_p_value: false,
        }
    }
}

impl BootstrapConfig {
    pub fn with_replicates(mut self, b: usize) -> Self {
        self.replicates = b;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Parameter(
                "bootstrap needs at least one replicate".into(),
            ));
        }
        if !(self.threshold_mult >= 0.0) || !(self.eig_floor > 0.0) {
            return Err(Error::Parameter(
                "need threshold_mult >= 0 and eig_floor > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Pooled covariance estimate that is positive definite by construction.
#[derive(Debug, Clone)]
pub struct PdCovEstimate {
    pub matrix: DMatrix<f64>,
    /// The correlation-scale matrix after thresholding and flooring; its
    /// smallest eigenvalue is at least `eig_floor`.
    pub correlation: DMatrix<f64>,
    /// Soft-threshold applied to off-diagonal correlations.
    pub threshold_level: f64,
    pub eig_floor: f64,
    /// Lower Cholesky factor of `matrix`.
    pub chol: DMatrix<f64>,
}

fn soft_threshold(v: f64, level: f64) -> f64 {
    v.signum() * (v.abs() - level).max(0.0)
}

/// Pool the group-centered samples (divisor `n1 + n2`), soft-threshold the
/// off-diagonal correlations at `threshold_mult * sqrt(log p / (n1 + n2))`,
/// floor the correlation eigenvalues at `eig_floor`, and map back to the
/// covariance scale.
pub fn pd_pooled_covariance(
    x: &SampleMatrix,
    y: &SampleMatrix,
    threshold_mult: f64,
    eig_floor: f64,
) -> Result<PdCovEstimate> {
    if x.p() != y.p() {
        return Err(Error::Dimension { x: x.p(), y: y.p() });
    }
    if !(eig_floor > 0.0) || !(threshold_mult >= 0.0) {
        return Err(Error::Parameter(
            "need threshold_mult >= 0 and eig_floor > 0".into(),
        ));
    }
    let p = x.p();
    let total = (x.n() + y.n()) as f64;
    let (_, cx) = centered_columns(x);
    let (_, cy) = centered_columns(y);
    let cx = DMatrix::from_column_slice(x.n(), p, &cx);
    let cy = DMatrix::from_column_slice(y.n(), p, &cy);
    let pooled = (cx.tr_mul(&cx) + cy.tr_mul(&cy)) / total;

    let sd: Vec<f64> = (0..p).map(|i| pooled[(i, i)].sqrt()).collect();
    if let Some(i) = sd.iter().position(|s| !(*s > 0.0)) {
        return Err(Error::DegenerateVariance { i, j: i });
    }
    let level = threshold_mult * ((p as f64).ln() / total).sqrt();
    let mut corr = DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else {
            soft_threshold(pooled[(i, j)] / (sd[i] * sd[j]), level)
        }
    });

    let eig = symmetric_eigen(&corr)?;
    if eig.eigenvalues.min() < eig_floor {
        let floored = eig.eigenvalues.map(|l| l.max(eig_floor));
        let v = &eig.eigenvectors;
        corr = v * DMatrix::from_diagonal(&floored) * v.transpose();
        corr = (&corr + corr.transpose()) * 0.5;
    }
    let matrix = DMatrix::from_fn(p, p, |i, j| sd[i] * corr[(i, j)] * sd[j]);
    let chol = Cholesky::new(matrix.clone())
        .ok_or_else(|| {
            Error::Numeric("Cholesky factorization of the pooled estimate failed".into())
        })?
        .l();
    Ok(PdCovEstimate {
        matrix,
        correlation: corr,
        threshold_level: level,
        eig_floor,
        chol,
    })
}

/// Evaluate `stat` on `replicates` pairs `X* (n1 x p)`, `Y* (n2 x p)` drawn
/// independently from `N(0, est.matrix)`. Replicate `b` draws from stream
/// `(seed, b)` only, so results do not depend on scheduling.
pub fn bootstrap_statistics<T, F>(
    est: &PdCovEstimate,
    n1: usize,
    n2: usize,
    replicates: usize,
    seed: u64,
    stat: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&SampleMatrix, &SampleMatrix) -> Result<T> + Sync,
{
    let dom = domain(Namespace::Bootstrap, 0);
    (0..replicates as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, dom, b);
            let xs = draw_sample(&mut rng, &est.chol, n1, Innovation::Gaussian)?;
            let ys = draw_sample(&mut rng, &est.chol, n2, Innovation::Gaussian)?;
            stat(&xs, &ys)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapNull {
    pub values: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub params: ThresholdParams,
}

/// Bootstrap sample of `V*(s0)`.
pub fn bootstrap_null(
    est: &PdCovEstimate,
    n1: usize,
    n2: usize,
    params: &ThresholdParams,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapNull> {
    if replicates == 0 {
        return Err(Error::Parameter(
            "bootstrap needs at least one replicate".into(),
        ));
    }
    let values = bootstrap_statistics(est, n1, n2, replicates, seed, |x, y| {
        Ok(mtt_scan(&diff_grid(x, y)?, params).v_n)
    })?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite bootstrap statistic".into()));
    }
    Ok(BootstrapNull {
        values,
        replicates,
        seed,
        params: *params,
    })
}

/// `1 - F0(observed)` with `F0` the empirical CDF (`<=`), i.e. the fraction of
/// replicates strictly above `observed`.
pub fn bootstrap_p_value(values: &[f64], observed: f64, smoothed: bool) -> f64 {
    let exceed = values.iter().filter(|&&v| v > observed).count();
    if smoothed {
        (exceed + 1) as f64 / (values.len() + 1) as f64
    } else {
        exceed as f64 / values.len() as f64
    }
}

/// Bootstrap-calibrated multi-level test: reject when the bootstrap p-value is
/// below `alpha`.
pub fn mtt_test_bootstrap(
    x: &SampleMatrix,
    y: &SampleMatrix,
    params: &ThresholdParams,
    cfg: &BootstrapConfig,
) -> Result<TestOutcome> {
    params.validate()?;
    cfg.validate()?;
    let grid = diff_grid(x, y)?;
    let observed = mtt_scan(&grid, params).v_n;
    let est = pd_pooled_covariance(x, y, cfg.threshold_mult, cfg.eig_floor)?;
    let null = bootstrap_null(&est, x.n(), y.n(), params, cfg.replicates, cfg.seed)?;
    let p_value = bootstrap_p_value(&null.values, observed, cfg.smoothed_p_value);
    Ok(TestOutcome {
        method: Method::MttBootstrap,
        calibration: Calibration::Bootstrap,
        statistic: observed,
        p_value: Some(p_value),
        critical_value: None,
        reject: p_value < params.alpha,
        params: Provenance {
            s0: Some(params.s0),
            eta: Some(params.eta),
            alpha: params.alpha,
            bootstrap_reps: Some(cfg.replicates),
            seed: Some(cfg.seed),
            p: x.p(),
            n1: x.n(),
            n2: y.n(),
            ..Provenance::default()
        },
        warnings: Vec::new(),
    })
}
