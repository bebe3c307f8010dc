//! Single- and multi-level thresholding statistics on a [`DiffGrid`] and the
//! extreme-value (Gumbel) calibration of the multi-level statistic.

use crate::error::{Error, Result};
use crate::grid::{DiffGrid, GridKind};
use crate::normal;
use crate::outcome::{Calibration, Method, Provenance, TestOutcome};
use crate::packed::tri_len;
use crate::sum::{exact_sum, ExactSum};

/// How the lower threshold bound `s0` was chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum S0Rule {
    Explicit(f64),
    /// Exponential growth of `p` in `n`: `s0 = 1/2`.
    AutoExponential,
    /// Polynomial growth `n ~ p^xi`: `s0 = 1/2 - xi/4`.
    AutoPolynomial {
        xi: f64,
    },
}

impl S0Rule {
    pub fn s0(self) -> f64 {
        match self {
            S0Rule::Explicit(s0) => s0,
            S0Rule::AutoExponential => 0.5,
            S0Rule::AutoPolynomial { xi } => 0.5 - xi / 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdParams {
    pub s0: f64,
    pub eta: f64,
    pub alpha: f64,
    pub s0_rule: S0Rule,
}

impl Default for ThresholdParams {
    /// `s0 = 0.5`, `eta = 0.05`, `alpha = 0.05`.
    fn default() -> Self {
        Self {
            s0: 0.5,
            eta: 0.05,
            alpha: 0.05,
            s0_rule: S0Rule::Explicit(0.5),
        }
    }
}

impl ThresholdParams {
    pub fn new(rule: S0Rule, eta: f64, alpha: f64) -> Result<Self> {
        if let S0Rule::AutoPolynomial { xi } = rule {
            if !(0.0..=2.0).contains(&xi) {
                return Err(Error::Parameter(format!("xi must lie in [0, 2], got {xi}")));
            }
        }
        let params = Self {
            s0: rule.s0(),
            eta,
            alpha,
            s0_rule: rule,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { s0, eta, alpha, .. } = *self;
        if !(eta > 0.0) || !(s0 >= 0.0) || !(s0 < 1.0 - eta) {
            return Err(Error::Parameter(format!(
                "need 0 <= s0 < 1 - eta < 1, got s0 = {s0}, eta = {eta}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Parameter(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(())
    }

    /// Upper end `1 - eta` of the threshold range.
    pub fn upper(&self) -> f64 {
        1.0 - self.eta
    }
}

/// `lambda_p(s) = 4 s log p`.
#[inline]
pub fn lambda_p(s: f64, p: usize) -> f64 {
    4.0 * s * (p as f64).ln()
}

/// `T_n(s) = sum M_ij 1{M_ij > lambda_p(s)}` over the active entries,
/// correctly rounded.
pub fn t_stat(grid: &DiffGrid, s: f64) -> f64 {
    t_stat_at_level(grid, lambda_p(s, grid.p()))
}

/// `sum M_ij 1{M_ij > lam}` for an explicit level `lam`.
pub fn t_stat_at_level(grid: &DiffGrid, lam: f64) -> f64 {
    exact_sum(grid.active_m().filter(|&m| m > lam))
}

fn null_moments_for(s: f64, p: usize, count: usize) -> (f64, f64) {
    null_moments_at_level(lambda_p(s, p), count)
}

fn null_moments_at_level(lam: f64, count: usize) -> (f64, f64) {
    let root = lam.sqrt();
    let (dens, tail) = (normal::pdf(root), normal::sf(root));
    let q = count as f64;
    let mean = q * (2.0 * root * dens + 2.0 * tail);
    let var = q * (2.0 * (lam * root + 3.0 * root) * dens + 6.0 * tail);
    (mean, var)
}

/// Main-order null mean `q {2 lambda^{1/2} phi(lambda^{1/2}) + 2 Phibar(lambda^{1/2})}`.
pub fn null_mean_tilde(s: f64, p: usize) -> f64 {
    null_moments_for(s, p, tri_len(p)).0
}

/// Main-order null variance
/// `q [2 {lambda^{3/2} + 3 lambda^{1/2}} phi(lambda^{1/2}) + 6 Phibar(lambda^{1/2})]`.
pub fn null_var_tilde(s: f64, p: usize) -> f64 {
    null_moments_for(s, p, tri_len(p)).1
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

/// Reject when `T_n(s) > mu(s) + z_alpha sigma(s)`.
pub fn single_level_test(grid: &DiffGrid, s: f64, alpha: f64) -> Result<TestOutcome> {
    check_alpha(alpha)?;
    if !(s >= 0.0) {
        return Err(Error::Parameter(format!(
            "threshold level must be >= 0, got {s}"
        )));
    }
    let mut warnings = Vec::new();
    if s <= 0.5 {
        warnings.push(format!(
            "s = {s} is at or below 1/2; the normal limit needs s > 1/2 \
             (or s > 1/2 - xi/4 when n ~ p^xi)"
        ));
    }
    let t = t_stat(grid, s);
    let (mu, var) = null_moments_for(s, grid.p(), grid.active_count());
    let sd = var.sqrt();
    let critical = mu + normal::upper_quantile(alpha) * sd;
    Ok(TestOutcome {
        method: Method::SingleLevel,
        calibration: Calibration::Asymptotic,
        statistic: t,
        p_value: Some(normal::sf((t - mu) / sd)),
        critical_value: Some(critical),
        reject: t > critical,
        params: Provenance {
            s: Some(s),
            alpha,
            p: grid.p(),
            n1: grid.n1(),
            n2: grid.n2(),
            ..Provenance::default()
        },
        warnings,
    })
}

/// Candidate levels `lambda_p(s)` in ascending order: every distinct
/// `M_ij` with `lambda_p(s0) < M_ij <= lambda_p(1 - eta)`, then the endpoint
/// level `lambda_p(1 - eta)`. A data-driven level is the grid value itself,
/// so whether an entry exceeds a candidate never depends on rounding in
/// `M_ij / (4 log p)`.
pub fn threshold_levels(grid: &DiffGrid, params: &ThresholdParams) -> Vec<f64> {
    let p = grid.p();
    let (low, top) = (lambda_p(params.s0, p), lambda_p(params.upper(), p));
    let mut out: Vec<f64> = grid.active_m().filter(|&m| m > low && m < top).collect();
    out.push(top);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Data-driven thresholds `s_ij = M_ij / (4 log p)` with `s0 < s_ij <= 1 - eta`,
/// plus the endpoint `1 - eta`; ascending, without duplicates.
pub fn threshold_candidates(grid: &DiffGrid, params: &ThresholdParams) -> Vec<f64> {
    let scale = 4.0 * (grid.p() as f64).ln();
    let levels = threshold_levels(grid, params);
    let last = levels.len() - 1;
    levels
        .iter()
        .enumerate()
        .map(|(k, lam)| {
            if k == last {
                params.upper()
            } else {
                lam / scale
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdScan {
    pub candidates: Vec<f64>,
    /// `lambda_p` at each candidate.
    pub levels: Vec<f64>,
    pub t_of_s: Vec<f64>,
    pub mu0_of_s: Vec<f64>,
    pub sigma0_of_s: Vec<f64>,
    pub standardized: Vec<f64>,
    pub v_n: f64,
    pub argmax_s: f64,
}

/// Multi-level statistic `V_n(s0) = max_s {T_n(s) - mu(s)} / sigma(s)` over the
/// candidate thresholds.
///
/// Exceedances above `lambda_p(s0)` are sorted once; candidates are then
/// visited from the largest threshold down while an exact accumulator absorbs
/// the newly exceeding entries, so each `T_n` equals [`t_stat_at_level`] at
/// its level bit for bit.
pub fn mtt_scan(grid: &DiffGrid, params: &ThresholdParams) -> ThresholdScan {
    let p = grid.p();
    let candidates = threshold_candidates(grid, params);
    let levels = threshold_levels(grid, params);
    let floor = lambda_p(params.s0, p);
    let mut large: Vec<f64> = grid.active_m().filter(|&m| m > floor).collect();
    large.sort_by(|a, b| b.total_cmp(a));

    let mut t_of_s = vec![0.0; candidates.len()];
    let mut acc = ExactSum::new();
    let mut next = 0;
    for (slot, &lam) in t_of_s.iter_mut().zip(&levels).rev() {
        while next < large.len() && large[next] > lam {
            acc.add(large[next]);
            next += 1;
        }
        *slot = acc.value();
    }

    let mut mu0_of_s = Vec::with_capacity(candidates.len());
    let mut sigma0_of_s = Vec::with_capacity(candidates.len());
    let mut standardized = Vec::with_capacity(candidates.len());
    let mut v_n = f64::NEG_INFINITY;
    let mut argmax_s = f64::NAN;
    for ((&s, &lam), &t) in candidates.iter().zip(&levels).zip(&t_of_s) {
        let (mu, var) = null_moments_at_level(lam, grid.active_count());
        let sd = var.sqrt();
        let z = (t - mu) / sd;
        if z > v_n {
            v_n = z;
            argmax_s = s;
        }
        mu0_of_s.push(mu);
        sigma0_of_s.push(sd);
        standardized.push(z);
    }
    ThresholdScan {
        candidates,
        levels,
        t_of_s,
        mu0_of_s,
        sigma0_of_s,
        standardized,
        v_n,
        argmax_s,
    }
}

/// `a(y) = (2 log y)^{1/2}`.
pub fn gumbel_a(y: f64) -> Result<f64> {
    if !(y > 1.0) {
        return Err(Error::Domain(format!("gumbel_a needs y > 1, got {y}")));
    }
    Ok((2.0 * y.ln()).sqrt())
}

/// `b(y, s0, eta) = 2 log y + (1/2) log log y - (1/2) log pi + log(1 - s0 - eta)`.
pub fn gumbel_b(y: f64, s0: f64, eta: f64) -> Result<f64> {
    if !(y > 1.0) {
        return Err(Error::Domain(format!("gumbel_b needs y > 1, got {y}")));
    }
    if !(s0 + eta < 1.0) {
        return Err(Error::Domain(format!(
            "gumbel_b needs s0 + eta < 1, got {}",
            s0 + eta
        )));
    }
    let ly = y.ln();
    Ok(2.0 * ly + 0.5 * ly.ln() - 0.5 * std::f64::consts::PI.ln() + (1.0 - s0 - eta).ln())
}

/// Upper-`alpha` quantile of the standard Gumbel law, `-log(-log(1 - alpha))`.
pub fn gumbel_upper_quantile(alpha: f64) -> f64 {
    -(-(-alpha).ln_1p()).ln()
}

/// Gumbel-calibrated multi-level test: reject when
/// `V_n(s0) > {q_alpha + b(log p, s0, eta)} / a(log p)`.
pub fn mtt_test_asymptotic(grid: &DiffGrid, params: &ThresholdParams) -> Result<TestOutcome> {
    params.validate()?;
    let p = grid.p();
    if p <= 3 {
        return Err(Error::Domain(format!(
            "the Gumbel calibration needs p > 3 (got p = {p}); use bootstrap calibration"
        )));
    }
    let y = (p as f64).ln();
    let a = gumbel_a(y)?;
    let b = gumbel_b(y, params.s0, params.eta)?;
    let scan = mtt_scan(grid, params);
    let critical = (gumbel_upper_quantile(params.alpha) + b) / a;
    let x = a * scan.v_n - b;
    let p_value = -(-(-x).exp()).exp_m1();
    let method = match grid.kind() {
        GridKind::Covariance => Method::MttAsymptotic,
        GridKind::Correlation => Method::MttCorrelation,
    };
    Ok(TestOutcome {
        method,
        calibration: Calibration::Asymptotic,
        statistic: scan.v_n,
        p_value: Some(p_value),
        critical_value: Some(critical),
        reject: scan.v_n > critical,
        params: Provenance {
            s0: Some(params.s0),
            eta: Some(params.eta),
            alpha: params.alpha,
            p,
            n1: grid.n1(),
            n2: grid.n2(),
            ..Provenance::default()
        },
        warnings: Vec::new(),
    })
}
