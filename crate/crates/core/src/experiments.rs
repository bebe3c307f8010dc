//! Monte Carlo size and power studies.
//!
//! Replicate `b` of a study draws its data from stream `(master_seed, ns, b)`,
//! where the namespace separates size data, power data and null-calibration
//! data. Every grid point of a power study reuses the same replicate streams,
//! so power curves are computed with common random numbers.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::RngCore;
use rayon::prelude::*;

use crate::bootstrap::{bootstrap_statistics, pd_pooled_covariance};
use crate::error::{Error, Result};
use crate::grid::diff_grid;
use crate::linalg::Innovation;
use crate::outcome::Calibration;
use crate::rivals::{clx_asymptotic, clx_statistic, lc_statistic};
use crate::sample::SampleMatrix;
use crate::simgen::{Design, DesignSpec, PairGenerator, SignalSpec};
use crate::streams::{domain, stream_rng, Namespace};
use crate::threshold::{
    gumbel_a, gumbel_b, gumbel_upper_quantile, mtt_scan, S0Rule, ThresholdParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimMethod {
    /// Multi-level test, Gumbel calibration.
    Mtt,
    /// Multi-level test, bootstrap calibration.
    MttBt,
    Clx,
    Lc,
}

impl SimMethod {
    pub const ALL: [SimMethod; 4] = [
        SimMethod::Mtt,
        SimMethod::MttBt,
        SimMethod::Clx,
        SimMethod::Lc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SimMethod::Mtt => "mtt",
            SimMethod::MttBt => "mtt_bt",
            SimMethod::Clx => "clx",
            SimMethod::Lc => "lc",
        }
    }
}

impl fmt::Display for SimMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mtt" => Ok(SimMethod::Mtt),
            "mtt_bt" | "mtt-bt" => Ok(SimMethod::MttBt),
            "clx" => Ok(SimMethod::Clx),
            "lc" => Ok(SimMethod::Lc),
            other => Err(Error::Parameter(format!("unknown method '{other}'"))),
        }
    }
}

/// `floor(coef * n1^exponent)`, e.g. `floor(0.25 n1^1.6)`.
pub fn dimension_rule(coef: f64, exponent: f64, n1: usize) -> usize {
    (coef * (n1 as f64).powf(exponent)).floor() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub design: Design,
    pub dist: Innovation,
    pub n1: usize,
    pub n2: usize,
    pub p: usize,
    pub beta: f64,
    pub r: f64,
    pub reps: usize,
    /// Bootstrap replicates per test.
    pub bootstrap: usize,
    /// Nominal level; `0` is accepted as a never-reject sentinel.
    pub alpha: f64,
    pub methods: Vec<SimMethod>,
    pub master_seed: u64,
    pub size_adjust: bool,
    pub s0: f64,
    pub eta: f64,
    /// Seeds of the fixed `D0` and permutation; default to `master_seed`.
    pub d0_seed: Option<u64>,
    pub perm_seed: Option<u64>,
    /// Experiment id mixed into every stream domain.
    pub experiment: u32,
    pub rival_calibration: Calibration,
    pub threshold_mult: f64,
    pub eig_floor: f64,
}

impl SimConfig {
    pub fn new(design: Design, dist: Innovation, n1: usize, n2: usize, p: usize) -> Self {
        Self {
            design,
            dist,
            n1,
            n2,
            p,
            beta: 0.6,
            r: 0.5,
            reps: 500,
            bootstrap: 250,
            alpha: 0.05,
            methods: SimMethod::ALL.to_vec(),
            master_seed: 0,
            size_adjust: false,
            s0: 0.5,
            eta: 0.05,
            d0_seed: None,
            perm_seed: None,
            experiment: 0,
            rival_calibration: Calibration::Bootstrap,
            threshold_mult: 1.0,
            eig_floor: 0.05,
        }
    }

    pub fn design_spec(&self) -> DesignSpec {
        DesignSpec::new(
            self.design,
            self.p,
            self.d0_seed.unwrap_or(self.master_seed),
            self.perm_seed.unwrap_or(self.master_seed),
        )
    }

    pub fn signal(&self) -> SignalSpec {
        SignalSpec::new(self.beta, self.r, self.n1, self.n2)
    }

    fn threshold_params(&self) -> Result<ThresholdParams> {
        // The sentinel alpha = 0 never reaches a decision rule.
        let alpha = if self.alpha == 0.0 { 0.05 } else { self.alpha };
        ThresholdParams::new(S0Rule::Explicit(self.s0), self.eta, alpha)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Parameter("reps must be at least 1".into()));
        }
        if !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return Err(Error::Parameter(format!(
                "alpha must lie in [0, 1), got {}",
                self.alpha
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::Parameter("no methods selected".into()));
        }
        if self.n1 < 4 || self.n2 < 4 || self.p < 4 {
            return Err(Error::Parameter("need n1, n2 >= 4 and p >= 4".into()));
        }
        if self.needs_bootstrap() && self.bootstrap == 0 {
            return Err(Error::Parameter("bootstrap methods need B >= 1".into()));
        }
        if self.methods.contains(&SimMethod::Lc)
            && self.rival_calibration == Calibration::Asymptotic
        {
            return Err(Error::Unsupported(
                "the LC statistic is only available with bootstrap calibration".into(),
            ));
        }
        self.threshold_params().map(|_| ())
    }

    fn needs_bootstrap(&self) -> bool {
        self.methods.iter().any(|m| match m {
            SimMethod::MttBt => true,
            SimMethod::Clx | SimMethod::Lc => self.rival_calibration == Calibration::Bootstrap,
            SimMethod::Mtt => false,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodRate {
    pub method: SimMethod,
    pub rejections: usize,
    pub reps: usize,
    pub rate: f64,
    /// `sqrt(rate (1 - rate) / reps)`
    pub se: f64,
    /// Size-adjusted critical value, when size adjustment was applied.
    pub critical: Option<f64>,
    /// Rejection rate of the adjusted rule on its own null calibration sample.
    pub null_rate: Option<f64>,
}

impl MethodRate {
    fn from_count(method: SimMethod, rejections: usize, reps: usize) -> Self {
        let rate = rejections as f64 / reps as f64;
        Self {
            method,
            rejections,
            reps,
            rate,
            se: (rate * (1.0 - rate) / reps as f64).sqrt(),
            critical: None,
            null_rate: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub config: SimConfig,
    pub rows: Vec<MethodRate>,
    pub runtime: Duration,
}

impl SimResult {
    pub fn rate(&self, method: SimMethod) -> Option<&MethodRate> {
        self.rows.iter().find(|r| r.method == method)
    }
}

/// Which statistics a replicate has to produce.
#[derive(Debug, Clone, Copy, Default)]
struct Needs {
    v: bool,
    clx: bool,
    lc: bool,
}

impl Needs {
    fn of(methods: &[SimMethod]) -> Self {
        let mut n = Needs::default();
        for m in methods {
            match m {
                SimMethod::Mtt | SimMethod::MttBt => n.v = true,
                SimMethod::Clx => n.clx = true,
                SimMethod::Lc => n.lc = true,
            }
        }
        n
    }
}

/// `[V_n, max M, LC]`, with `NaN` for statistics that were not requested.
fn statistics(
    needs: Needs,
    x: &SampleMatrix,
    y: &SampleMatrix,
    params: &ThresholdParams,
) -> Result<[f64; 3]> {
    let mut out = [f64::NAN; 3];
    if needs.v || needs.clx {
        let grid = diff_grid(x, y)?;
        if needs.v {
            out[0] = mtt_scan(&grid, params).v_n;
        }
        if needs.clx {
            out[1] = clx_statistic(&grid);
        }
    }
    if needs.lc {
        out[2] = lc_statistic(x, y)?;
    }
    Ok(out)
}

fn stat_slot(method: SimMethod) -> usize {
    match method {
        SimMethod::Mtt | SimMethod::MttBt => 0,
        SimMethod::Clx => 1,
        SimMethod::Lc => 2,
    }
}

/// Per-method decisions for one data set at the configured level.
fn replicate_decisions(
    cfg: &SimConfig,
    params: &ThresholdParams,
    x: &SampleMatrix,
    y: &SampleMatrix,
    boot_seed: u64,
) -> Result<Vec<bool>> {
    let needs = Needs::of(&cfg.methods);
    let observed = statistics(needs, x, y, params)?;
    let boot_needs = Needs {
        v: cfg.methods.contains(&SimMethod::MttBt),
        clx: cfg.methods.contains(&SimMethod::Clx)
            && cfg.rival_calibration == Calibration::Bootstrap,
        lc: cfg.methods.contains(&SimMethod::Lc),
    };
    let boot = if boot_needs.v || boot_needs.clx || boot_needs.lc {
        let est = pd_pooled_covariance(x, y, cfg.threshold_mult, cfg.eig_floor)?;
        bootstrap_statistics(&est, x.n(), y.n(), cfg.bootstrap, boot_seed, |xs, ys| {
            statistics(boot_needs, xs, ys, params)
        })?
    } else {
        Vec::new()
    };
    let boot_reject = |slot: usize| {
        let exceed = boot.iter().filter(|s| s[slot] > observed[slot]).count();
        (exceed as f64 / boot.len() as f64) < cfg.alpha
    };
    cfg.methods
        .iter()
        .map(|&m| -> Result<bool> {
            Ok(match m {
                SimMethod::Mtt => {
                    let y_log = (cfg.p as f64).ln();
                    let a = gumbel_a(y_log)?;
                    let b = gumbel_b(y_log, params.s0, params.eta)?;
                    observed[0] > (gumbel_upper_quantile(cfg.alpha) + b) / a
                }
                SimMethod::MttBt => boot_reject(0),
                SimMethod::Clx => match cfg.rival_calibration {
                    Calibration::Bootstrap => boot_reject(1),
                    Calibration::Asymptotic => {
                        observed[1] > clx_asymptotic(observed[1], cfg.p, cfg.alpha)?.0
                    }
                },
                SimMethod::Lc => boot_reject(2),
            })
        })
        .collect()
}

fn count_rejections(cfg: &SimConfig, decisions: &[Vec<bool>]) -> Vec<MethodRate> {
    cfg.methods
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let count = decisions.iter().filter(|d| d[k]).count();
            MethodRate::from_count(m, count, cfg.reps)
        })
        .collect()
}

fn run_decisions(
    cfg: &SimConfig,
    generator: &PairGenerator,
    ns: Namespace,
) -> Result<Vec<MethodRate>> {
    let params = cfg.threshold_params()?;
    if cfg.alpha == 0.0 {
        return Ok(cfg
            .methods
            .iter()
            .map(|&m| MethodRate::from_count(m, 0, cfg.reps))
            .collect());
    }
    let dom = domain(ns, cfg.experiment);
    let decisions = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(cfg.master_seed, dom, b);
            let (x, y) = generator.draw(&mut rng)?;
            let boot_seed = rng.next_u64();
            replicate_decisions(cfg, &params, &x, &y, boot_seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(count_rejections(cfg, &decisions))
}

/// Empirical size: rejection rates over `reps` null data sets.
pub fn run_size(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let start = Instant::now();
    let generator = PairGenerator::new(&cfg.design_spec(), None, cfg.dist, cfg.n1, cfg.n2)?;
    let rows = run_decisions(cfg, &generator, Namespace::SizeData)?;
    Ok(SimResult {
        config: cfg.clone(),
        rows,
        runtime: start.elapsed(),
    })
}

/// Upper-`alpha` empirical quantile (linear interpolation between order
/// statistics at level `1 - alpha`).
pub fn upper_empirical_quantile(values: &[f64], alpha: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * (1.0 - alpha);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Statistics of every configured method over `reps` replicates drawn from
/// `generator` in namespace `ns`.
fn replicate_statistics(
    cfg: &SimConfig,
    generator: &PairGenerator,
    ns: Namespace,
) -> Result<Vec<[f64; 3]>> {
    let params = cfg.threshold_params()?;
    let needs = Needs::of(&cfg.methods);
    let dom = domain(ns, cfg.experiment);
    (0..cfg.reps as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(cfg.master_seed, dom, b);
            let (x, y) = generator.draw(&mut rng)?;
            statistics(needs, &x, &y, &params)
        })
        .collect()
}

fn check_calibration_reps(cfg: &SimConfig) -> Result<()> {
    if cfg.reps < 100 {
        return Err(Error::Parameter(format!(
            "size adjustment needs at least 100 null replicates, got {}",
            cfg.reps
        )));
    }
    Ok(())
}

/// Null design matched to the alternative at the configured `(beta, r)`:
/// both samples use `Sigma1^(0) + eps_c I`, so the calibration differs from
/// the power run only by the signal `U`.
fn matched_null(cfg: &SimConfig) -> Result<PairGenerator> {
    let signal = cfg.signal();
    Ok(
        PairGenerator::new(&cfg.design_spec(), Some(&signal), cfg.dist, cfg.n1, cfg.n2)?
            .null_counterpart(),
    )
}

/// Empirical upper-`alpha` quantile of `method`'s statistic over `reps`
/// replicates of the null design matched to the configured alternative.
pub fn size_adjusted_critical(method: SimMethod, cfg: &SimConfig) -> Result<f64> {
    check_calibration_reps(cfg)?;
    let single = SimConfig {
        methods: vec![method],
        ..cfg.clone()
    };
    single.validate()?;
    let stats = replicate_statistics(&single, &matched_null(&single)?, Namespace::NullCalibration)?;
    let slot = stat_slot(method);
    let values: Vec<f64> = stats.iter().map(|s| s[slot]).collect();
    Ok(upper_empirical_quantile(&values, cfg.alpha))
}

/// Power at a single `(beta, r)`; see [`run_power_grid`].
pub fn run_power(cfg: &SimConfig) -> Result<SimResult> {
    let mut out = run_power_grid(cfg, &[(cfg.beta, cfg.r)])?;
    Ok(out.remove(0))
}

/// Power over a list of `(beta, r)` points.
///
/// With `size_adjust`, every method's statistic is compared against its
/// empirical null quantile, computed per point from the matched null design
/// in a separate stream namespace. The two multi-level variants then share
/// one statistic and one power.
pub fn run_power_grid(cfg: &SimConfig, points: &[(f64, f64)]) -> Result<Vec<SimResult>> {
    cfg.validate()?;
    if cfg.size_adjust && cfg.alpha > 0.0 {
        check_calibration_reps(cfg)?;
    }
    let spec = cfg.design_spec();
    let mut results = Vec::with_capacity(points.len());
    for &(beta, r) in points {
        let start = Instant::now();
        let point_cfg = SimConfig {
            beta,
            r,
            ..cfg.clone()
        };
        let signal = point_cfg.signal();
        let generator = PairGenerator::new(&spec, Some(&signal), cfg.dist, cfg.n1, cfg.n2)?;
        let rows = if cfg.size_adjust && cfg.alpha > 0.0 {
            let null = replicate_statistics(
                &point_cfg,
                &generator.null_counterpart(),
                Namespace::NullCalibration,
            )?;
            let alt = replicate_statistics(&point_cfg, &generator, Namespace::PowerData)?;
            cfg.methods
                .iter()
                .map(|&m| {
                    let slot = stat_slot(m);
                    let values: Vec<f64> = null.iter().map(|s| s[slot]).collect();
                    let crit = upper_empirical_quantile(&values, cfg.alpha);
                    let null_rate =
                        values.iter().filter(|&&v| v > crit).count() as f64 / values.len() as f64;
                    let count = alt.iter().filter(|s| s[slot] > crit).count();
                    MethodRate {
                        critical: Some(crit),
                        null_rate: Some(null_rate),
                        ..MethodRate::from_count(m, count, cfg.reps)
                    }
                })
                .collect()
        } else {
            run_decisions(&point_cfg, &generator, Namespace::PowerData)?
        };
        results.push(SimResult {
            config: point_cfg,
            rows,
            runtime: start.elapsed(),
        });
    }
    Ok(results)
}
