//! Two-sample tests for equality of high-dimensional covariance matrices
//! based on multi-level thresholding of standardized entrywise differences.
//!
//! The main entry points are [`diff_grid`], [`mtt_test_asymptotic`] and
//! [`mtt_test_bootstrap`]. The [`experiments`] module reproduces size and
//! power studies and [`boundary`] evaluates the detection boundaries.

pub mod bootstrap;
pub mod boundary;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod linalg;
pub mod moments;
pub mod normal;
pub mod outcome;
pub mod packed;
pub mod rivals;
pub mod sample;
pub mod simgen;
pub mod streams;
pub mod sum;
pub mod threshold;

pub use bootstrap::{
    bootstrap_null, bootstrap_p_value, mtt_test_bootstrap, pd_pooled_covariance, BootstrapConfig,
    BootstrapNull, PdCovEstimate,
};
pub use error::{Error, Result};
pub use grid::{correlation_diff_grid, diff_grid, DiffGrid, GridKind};
pub use moments::{compute_moments, MomentSet};
pub use outcome::{Calibration, Method, Provenance, TestOutcome};
pub use packed::PackedSym;
pub use rivals::{clx_statistic, lc_statistic, rival_test, RivalConfig, RivalMethod};
pub use sample::SampleMatrix;
pub use threshold::{
    lambda_p, mtt_scan, mtt_test_asymptotic, single_level_test, t_stat, t_stat_at_level, S0Rule,
    ThresholdParams, ThresholdScan,
};
