use clap::{Args, ValueEnum};
use covthresh::experiments::{
    dimension_rule, run_power_grid, run_size, SimConfig, SimMethod, SimResult,
};
use covthresh::linalg::Innovation;
use covthresh::simgen::Design;
use covthresh::Calibration;

use crate::failure::Failure;
use crate::test_cmd::{parse_s0, RivalCalibration};
use crate::Dist;

pub const HEADER: [&str; 13] = [
    "method", "design", "dist", "n1", "n2", "p", "beta", "r", "reps", "B", "rate", "se", "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StudyKind {
    Size,
    Power,
}

#[derive(Debug, Args)]
pub struct SimulateOpts {
    /// Covariance design: 1 (AR(1)-type, 0.4^|i-j|) or 2 (blocks of four).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    design: u8,
    #[arg(long, value_enum, default_value_t = Dist::Gaussian)]
    dist: Dist,
    #[arg(long)]
    n1: usize,
    /// Defaults to `--n1`.
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long, conflicts_with = "p_rule", required_unless_present = "p_rule")]
    p: Option<usize>,
    /// Dimension as a function of n1, e.g. `0.25n^1.6`.
    #[arg(long)]
    p_rule: Option<String>,
    /// Sparsity of the power alternative.
    #[arg(long, default_value_t = 0.6, conflicts_with = "beta_grid")]
    beta: f64,
    /// Comma-separated sparsity values.
    #[arg(long, value_delimiter = ',')]
    beta_grid: Option<Vec<f64>>,
    /// Signal strength of the power alternative.
    #[arg(long, default_value_t = 0.5, conflicts_with = "r_grid")]
    r: f64,
    /// Comma-separated signal strengths.
    #[arg(long, value_delimiter = ',')]
    r_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 500)]
    reps: usize,
    /// Bootstrap replicates per test.
    #[arg(long, default_value_t = 250)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Compare power against empirical null quantiles.
    #[arg(long)]
    size_adjust: bool,
    /// Comma-separated subset of mtt, mtt_bt, clx, lc.
    #[arg(long, value_delimiter = ',', default_value = "mtt,mtt_bt,clx,lc")]
    methods: Vec<String>,
    #[arg(long, default_value = "0.5")]
    s0: String,
    #[arg(long, default_value_t = 0.05)]
    eta: f64,
    /// Calibration of the CLX test.
    #[arg(long, value_enum, default_value_t = RivalCalibration::Bootstrap)]
    calibration: RivalCalibration,
    /// Experiment id mixed into the random streams.
    #[arg(long, default_value_t = 0)]
    experiment: u32,
}

/// Parse `<coef>n^<exponent>` (an optional `*` after the coefficient).
pub fn parse_p_rule(text: &str) -> Result<(f64, f64), Failure> {
    let bad = || Failure::Input(format!("--p-rule must look like 0.25n^1.6, got '{text}'"));
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let (coef, exponent) = compact.split_once("n^").ok_or_else(bad)?;
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let coef: f64 = if coef.is_empty() {
        Ok(1.0)
    } else {
        coef.parse()
    }
    .map_err(|_| bad())?;
    let exponent: f64 = exponent.parse().map_err(|_| bad())?;
    if !(coef > 0.0 && exponent.is_finite()) {
        return Err(bad());
    }
    Ok((coef, exponent))
}

fn config(opts: &SimulateOpts, seed: u64) -> Result<SimConfig, Failure> {
    let n1 = opts.n1;
    let n2 = opts.n2.unwrap_or(n1);
    let p = match (&opts.p, &opts.p_rule) {
        (Some(p), _) => *p,
        (None, Some(rule)) => {
            let (coef, exponent) = parse_p_rule(rule)?;
            dimension_rule(coef, exponent, n1)
        }
        (None, None) => return Err(Failure::Input("one of --p or --p-rule is required".into())),
    };
    let design = Design::from_number(opts.design)
        .ok_or_else(|| Failure::Input(format!("unknown design {}", opts.design)))?;
    let dist = match opts.dist {
        Dist::Gaussian => Innovation::Gaussian,
        Dist::Gamma => Innovation::Gamma,
    };
    let mut methods = Vec::new();
    for m in &opts.methods {
        let m: SimMethod = m.parse()?;
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    let s0 = parse_s0(&opts.s0)?.s0();
    let mut cfg = SimConfig::new(design, dist, n1, n2, p);
    cfg.beta = opts.beta;
    cfg.r = opts.r;
    cfg.reps = opts.reps;
    cfg.bootstrap = opts.bootstrap;
    cfg.alpha = opts.alpha;
    cfg.methods = methods;
    cfg.master_seed = seed;
    cfg.size_adjust = opts.size_adjust;
    cfg.s0 = s0;
    cfg.eta = opts.eta;
    cfg.experiment = opts.experiment;
    cfg.rival_calibration = match opts.calibration {
        RivalCalibration::Bootstrap => Calibration::Bootstrap,
        RivalCalibration::Asymptotic => Calibration::Asymptotic,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn grid_points(opts: &SimulateOpts) -> Result<Vec<(f64, f64)>, Failure> {
    let betas = opts.beta_grid.clone().unwrap_or_else(|| vec![opts.beta]);
    let rs = opts.r_grid.clone().unwrap_or_else(|| vec![opts.r]);
    if betas.is_empty() || rs.is_empty() {
        return Err(Failure::Input("empty beta or r grid".into()));
    }
    let mut points = Vec::with_capacity(betas.len() * rs.len());
    for &beta in &betas {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Failure::Input(format!(
                "beta must lie in (0, 1], got {beta}"
            )));
        }
        for &r in &rs {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Failure::Input(format!(
                    "r must be finite and >= 0, got {r}"
                )));
            }
            points.push((beta, r));
        }
    }
    Ok(points)
}

fn write_rows(
    w: &mut csv::Writer<Vec<u8>>,
    res: &SimResult,
    beta: Option<f64>,
    r: f64,
) -> csv::Result<()> {
    let c = &res.config;
    for row in &res.rows {
        w.write_record([
            row.method.as_str().to_string(),
            c.design.number().to_string(),
            c.dist.as_str().to_string(),
            c.n1.to_string(),
            c.n2.to_string(),
            c.p.to_string(),
            beta.map_or(String::new(), |b| b.to_string()),
            r.to_string(),
            row.reps.to_string(),
            c.bootstrap.to_string(),
            row.rate.to_string(),
            row.se.to_string(),
            c.master_seed.to_string(),
        ])?;
    }
    Ok(())
}

/// Size rows leave `beta` empty and report `r = 0`.
pub fn run(kind: StudyKind, opts: &SimulateOpts, seed: u64) -> Result<String, Failure> {
    let cfg = config(opts, seed)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Input(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    match kind {
        StudyKind::Size => {
            let res = run_size(&cfg)?;
            write_rows(&mut w, &res, None, 0.0).map_err(io)?;
        }
        StudyKind::Power => {
            let points = grid_points(opts)?;
            for res in run_power_grid(&cfg, &points)? {
                let (beta, r) = (res.config.beta, res.config.r);
                write_rows(&mut w, &res, Some(beta), r).map_err(io)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Input(e.to_string()))
}
