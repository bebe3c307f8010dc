//! Uniform result record shared by every test in the crate.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    MttAsymptotic,
    MttBootstrap,
    SingleLevel,
    Clx,
    Lc,
    MttCorrelation,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::MttAsymptotic => "mtt_asymptotic",
            Method::MttBootstrap => "mtt_bootstrap",
            Method::SingleLevel => "single_level",
            Method::Clx => "clx",
            Method::Lc => "lc",
            Method::MttCorrelation => "mtt_correlation",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Calibration {
    Asymptotic,
    Bootstrap,
}

impl Calibration {
    pub fn as_str(self) -> &'static str {
        match self {
            Calibration::Asymptotic => "asymptotic",
            Calibration::Bootstrap => "bootstrap",
        }
    }
}

/// Parameters that produced an outcome. Fields that do not apply to a
/// method are `None`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub s0: Option<f64>,
    pub eta: Option<f64>,
    /// Threshold level of a single-level test.
    pub s: Option<f64>,
    pub alpha: f64,
    pub bootstrap_reps: Option<usize>,
    pub seed: Option<u64>,
    pub p: usize,
    pub n1: usize,
    pub n2: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub method: Method,
    pub calibration: Calibration,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub critical_value: Option<f64>,
    pub reject: bool,
    pub params: Provenance,
    pub warnings: Vec<String>,
}
