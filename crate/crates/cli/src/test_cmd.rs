use std::path::PathBuf;

use clap::{Args, ValueEnum};
use covthresh::{
    correlation_diff_grid, diff_grid, mtt_test_asymptotic, mtt_test_bootstrap, rival_test,
    single_level_test, BootstrapConfig, Calibration, RivalConfig, RivalMethod, S0Rule, TestOutcome,
    ThresholdParams,
};
use serde_json::{json, Map, Value};

use crate::failure::Failure;
use crate::input::read_matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestMethod {
    /// Multi-level test, bootstrap calibration.
    MttBt,
    /// Multi-level test, Gumbel calibration.
    Mtt,
    /// Single threshold level `--s`.
    Single,
    Clx,
    Lc,
    /// Multi-level test on correlation differences, Gumbel calibration.
    MttCor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RivalCalibration {
    Bootstrap,
    Asymptotic,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// First sample (CSV, rows are observations).
    #[arg(long)]
    x: PathBuf,
    /// Second sample, same columns as `--x`.
    #[arg(long)]
    y: PathBuf,
    /// Both files start with a header row.
    #[arg(long)]
    header: bool,
    #[arg(long, value_enum, default_value_t = TestMethod::MttBt)]
    method: TestMethod,
    /// Lower threshold bound: a number, `auto-exp`, or `auto-poly:<xi>`.
    #[arg(long, default_value = "0.5")]
    s0: String,
    #[arg(long, default_value_t = 0.05)]
    eta: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 250)]
    bootstrap: usize,
    /// Threshold level of the single-level test.
    #[arg(long, default_value_t = 0.6)]
    s: f64,
    /// Calibration of the CLX test.
    #[arg(long, value_enum, default_value_t = RivalCalibration::Bootstrap)]
    calibration: RivalCalibration,
    /// Report the bootstrap p-value as `(1 + #exceed) / (B + 1)`.
    #[arg(long)]
    smoothed_p: bool,
}

pub fn parse_s0(text: &str) -> Result<S0Rule, Failure> {
    let text = text.trim();
    if text == "auto-exp" {
        return Ok(S0Rule::AutoExponential);
    }
    if let Some(xi) = text.strip_prefix("auto-poly:") {
        let xi = xi
            .parse()
            .map_err(|_| Failure::Input(format!("bad xi in --s0 '{text}'")))?;
        return Ok(S0Rule::AutoPolynomial { xi });
    }
    text.parse().map(S0Rule::Explicit).map_err(|_| {
        Failure::Input(format!(
            "--s0 must be a number, auto-exp or auto-poly:<xi>, got '{text}'"
        ))
    })
}

fn s0_rule_name(rule: S0Rule) -> String {
    match rule {
        S0Rule::Explicit(_) => "explicit".into(),
        S0Rule::AutoExponential => "auto-exp".into(),
        S0Rule::AutoPolynomial { xi } => format!("auto-poly:{xi}"),
    }
}

fn float(v: f64) -> Value {
    // serde_json maps non-finite values to null.
    json!(v)
}

fn document(
    outcome: &TestOutcome,
    params: &ThresholdParams,
    x_sha: &str,
    y_sha: &str,
) -> Map<String, Value> {
    let p = &outcome.params;
    let mut doc = Map::new();
    doc.insert("method".into(), json!(outcome.method.as_str()));
    doc.insert("calibration".into(), json!(outcome.calibration.as_str()));
    doc.insert("statistic".into(), float(outcome.statistic));
    doc.insert("p_value".into(), outcome.p_value.map_or(Value::Null, float));
    doc.insert(
        "critical_value".into(),
        outcome.critical_value.map_or(Value::Null, float),
    );
    doc.insert("reject".into(), json!(outcome.reject));
    doc.insert("alpha".into(), float(p.alpha));
    doc.insert("s0".into(), p.s0.map_or(Value::Null, float));
    doc.insert(
        "s0_rule".into(),
        p.s0.map_or(Value::Null, |_| json!(s0_rule_name(params.s0_rule))),
    );
    doc.insert("eta".into(), p.eta.map_or(Value::Null, float));
    doc.insert("s".into(), p.s.map_or(Value::Null, float));
    doc.insert("bootstrap".into(), json!(p.bootstrap_reps));
    doc.insert("seed".into(), json!(p.seed));
    doc.insert("p".into(), json!(p.p));
    doc.insert("n1".into(), json!(p.n1));
    doc.insert("n2".into(), json!(p.n2));
    doc.insert("x_sha256".into(), json!(x_sha));
    doc.insert("y_sha256".into(), json!(y_sha));
    doc.insert("warnings".into(), json!(outcome.warnings));
    doc
}

pub fn run(args: &TestArgs, seed: u64) -> Result<String, Failure> {
    let rule = parse_s0(&args.s0)?;
    let params = ThresholdParams::new(rule, args.eta, args.alpha)?;
    let boot = BootstrapConfig {
        smoothed_p_value: args.smoothed_p,
        ..BootstrapConfig::default()
            .with_replicates(args.bootstrap)
            .with_seed(seed)
    };
    let x = read_matrix(&args.x, args.header)?;
    let y = read_matrix(&args.y, args.header)?;
    let (xm, ym) = (&x.matrix, &y.matrix);
    if xm.p() != ym.p() {
        return Err(Failure::Input(format!(
            "column mismatch: {} has {} columns, {} has {}",
            args.x.display(),
            xm.p(),
            args.y.display(),
            ym.p()
        )));
    }
    if xm.p() < 2 {
        return Err(Failure::Input("need at least two variables".into()));
    }
    let outcome = match args.method {
        TestMethod::MttBt => mtt_test_bootstrap(xm, ym, &params, &boot)?,
        TestMethod::Mtt => mtt_test_asymptotic(&diff_grid(xm, ym)?, &params)?,
        TestMethod::MttCor => mtt_test_asymptotic(&correlation_diff_grid(xm, ym)?, &params)?,
        TestMethod::Single => single_level_test(&diff_grid(xm, ym)?, args.s, args.alpha)?,
        TestMethod::Clx => {
            let calibration = match args.calibration {
                RivalCalibration::Bootstrap => Calibration::Bootstrap,
                RivalCalibration::Asymptotic => Calibration::Asymptotic,
            };
            let cfg = RivalConfig {
                calibration,
                ..RivalConfig::bootstrap(RivalMethod::Clx, boot)
            };
            rival_test(xm, ym, &cfg, args.alpha)?
        }
        TestMethod::Lc => {
            if args.calibration == RivalCalibration::Asymptotic {
                return Err(Failure::Input(
                    "lc supports bootstrap calibration only".into(),
                ));
            }
            rival_test(
                xm,
                ym,
                &RivalConfig::bootstrap(RivalMethod::Lc, boot),
                args.alpha,
            )?
        }
    };
    let doc = document(&outcome, &params, &x.sha256, &y.sha256);
    let mut text = serde_json::to_string_pretty(&Value::Object(doc))
        .map_err(|e| Failure::Input(e.to_string()))?;
    text.push('\n');
    Ok(text)
}
