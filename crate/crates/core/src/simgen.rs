//! Data-generating processes for the size and power studies: the two
//! covariance designs, the banded sparse signal, and paired sample draws.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{draw_sample, min_eigenvalue, sym_sqrt, Innovation};
use crate::packed::tri_len;
use crate::sample::SampleMatrix;
use crate::streams::{domain, stream_rng, Namespace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Design {
    /// `sigma*_ij = 0.4^{|i - j|}`
    Ar,
    /// Blocks of four with within-block correlation 0.5.
    Block4,
}

impl Design {
    pub fn number(self) -> u8 {
        match self {
            Design::Ar => 1,
            Design::Block4 => 2,
        }
    }

    pub fn from_number(k: u8) -> Option<Self> {
        match k {
            1 => Some(Design::Ar),
            2 => Some(Design::Block4),
            _ => None,
        }
    }
}

/// A covariance design with its fixed diagonal scaling `D0` and fixed column
/// permutation, both functions of their seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    pub design: Design,
    pub p: usize,
    pub d0_seed: u64,
    pub perm_seed: u64,
    /// Test hook: use `D0 = I`.
    pub identity_scaling: bool,
    /// Test hook: `false` keeps the natural column order.
    pub permute: bool,
}

impl DesignSpec {
    pub fn new(design: Design, p: usize, d0_seed: u64, perm_seed: u64) -> Self {
        Self {
            design,
            p,
            d0_seed,
            perm_seed,
            identity_scaling: false,
            permute: true,
        }
    }

    pub fn with_identity_scaling(mut self) -> Self {
        self.identity_scaling = true;
        self
    }

    pub fn without_permutation(mut self) -> Self {
        self.permute = false;
        self
    }

    /// Diagonal of `D0`, i.i.d. uniform on `(0.1, 1)`.
    pub fn d0(&self) -> Vec<f64> {
        if self.identity_scaling {
            return vec![1.0; self.p];
        }
        let mut rng = stream_rng(self.d0_seed, domain(Namespace::DesignScaling, 0), 0);
        (0..self.p)
            .map(|_| loop {
                let d: f64 = rng.random_range(0.1..1.0);
                if d > 0.1 {
                    break d;
                }
            })
            .collect()
    }

    /// Column order of the generated data: output column `j` is design
    /// variable `perm[j]`.
    pub fn permutation(&self) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..self.p).collect();
        if self.permute {
            let mut rng = stream_rng(self.perm_seed, domain(Namespace::DesignPermutation, 0), 0);
            perm.shuffle(&mut rng);
        }
        perm
    }

    /// The correlation matrix `Sigma*` of the design.
    pub fn correlation(&self) -> DMatrix<f64> {
        match self.design {
            Design::Ar => {
                DMatrix::from_fn(self.p, self.p, |i, j| 0.4f64.powi(i.abs_diff(j) as i32))
            }
            // A trailing partial block (p not divisible by 4) is treated as
            // a smaller block so the diagonal stays 1.
            Design::Block4 => DMatrix::from_fn(self.p, self.p, |i, j| {
                0.5 * f64::from(u8::from(i == j)) + 0.5 * f64::from(u8::from(i / 4 == j / 4))
            }),
        }
    }
}

/// `Sigma1^(0) = D0^{1/2} Sigma* D0^{1/2}`.
pub fn build_sigma_base(spec: &DesignSpec) -> Result<DMatrix<f64>> {
    if spec.p < 4 {
        return Err(Error::Parameter(format!(
            "design needs p >= 4, got {}",
            spec.p
        )));
    }
    let root_d: Vec<f64> = spec.d0().iter().map(|d| d.sqrt()).collect();
    let base = spec.correlation();
    Ok(DMatrix::from_fn(spec.p, spec.p, |i, j| {
        root_d[i] * base[(i, j)] * root_d[j]
    }))
}

/// Sparsity `beta`, strength `r`, and the sample size in `sqrt(4 r log p / n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpec {
    pub beta: f64,
    pub r: f64,
    pub n_eff: f64,
}

impl SignalSpec {
    /// Uses the effective sample size `n1 n2 / (n1 + n2)`.
    pub fn new(beta: f64, r: f64, n1: usize, n2: usize) -> Self {
        let (a, b) = (n1 as f64, n2 as f64);
        Self {
            beta,
            r,
            n_eff: a * b / (a + b),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Parameter(format!(
                "beta must lie in (0, 1], got {}",
                self.beta
            )));
        }
        if !(self.r >= 0.0) || !(self.n_eff > 0.0) {
            return Err(Error::Parameter("signal needs r >= 0 and n > 0".into()));
        }
        Ok(())
    }

    /// Common magnitude `sqrt(4 r log p / n)` of every nonzero entry.
    pub fn magnitude(&self, p: usize) -> f64 {
        (4.0 * self.r * (p as f64).ln() / self.n_eff).sqrt()
    }

    /// `m_p = floor(q^{1 - beta} / 2)` distinct nonzero pairs.
    pub fn pair_count(&self, p: usize) -> usize {
        ((tri_len(p) as f64).powf(1.0 - self.beta) / 2.0).floor() as usize
    }

    /// `(k0, k1)`: full bands `1..=k0` plus `k1` leading entries of band `k0 + 1`.
    pub fn band_layout(&self, p: usize) -> (usize, usize) {
        let m = self.pair_count(p);
        let k0 = m / p;
        (k0, m - p * k0 + k0 * (k0 + 1) / 2)
    }
}

/// The symmetric banded signal matrix `U`.
pub fn build_signal_u(p: usize, sig: &SignalSpec) -> Result<DMatrix<f64>> {
    if p < 4 {
        return Err(Error::Parameter(format!("signal needs p >= 4, got {p}")));
    }
    sig.validate()?;
    let (k0, k1) = sig.band_layout(p);
    if k0 + 1 + k1 > p {
        return Err(Error::Parameter(format!(
            "signal too dense for p = {p}: {} pairs requested",
            sig.pair_count(p)
        )));
    }
    let u = sig.magnitude(p);
    let mut out = DMatrix::zeros(p, p);
    for l in 0..k1 {
        out[(l + k0 + 1, l)] = u;
        out[(l, l + k0 + 1)] = u;
    }
    for k in 0..p {
        for l in 0..p {
            if k != l && k.abs_diff(l) <= k0 {
                out[(k, l)] = u;
            }
        }
    }
    Ok(out)
}

/// `|min(lambda_min(A), 0)| + 0.05`.
pub fn epsilon_c(a: &DMatrix<f64>) -> Result<f64> {
    Ok(min_eigenvalue(a)?.min(0.0).abs() + 0.05)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    Null,
    Alternative,
}

/// One simulated two-sample data set. `sigma1`/`sigma2` are expressed in the
/// (permuted) column order of `x` and `y`.
#[derive(Debug, Clone)]
pub struct GeneratedPair {
    pub x: SampleMatrix,
    pub y: SampleMatrix,
    pub truth: Truth,
    pub sigma1: DMatrix<f64>,
    pub sigma2: DMatrix<f64>,
}

/// Precomputed covariances and square roots for repeated draws.
#[derive(Debug, Clone)]
pub struct PairGenerator {
    pub n1: usize,
    pub n2: usize,
    pub law: Innovation,
    pub truth: Truth,
    /// Population covariances in design (unpermuted) order.
    pub sigma1: DMatrix<f64>,
    pub sigma2: DMatrix<f64>,
    perm: Vec<usize>,
    root1: DMatrix<f64>,
    root2: DMatrix<f64>,
}

fn permute_rows(a: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(perm[i], j)])
}

fn permute_sym(a: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(perm[i], perm[j])])
}

impl PairGenerator {
    /// Under the null `Sigma1 = Sigma2 = Sigma1^(0)`; with a signal,
    /// `Sigma1 = Sigma1^(0) + eps_c I` and `Sigma2 = Sigma1^(0) + U + eps_c I`.
    pub fn new(
        spec: &DesignSpec,
        signal: Option<&SignalSpec>,
        law: Innovation,
        n1: usize,
        n2: usize,
    ) -> Result<Self> {
        if n1 < 1 || n2 < 1 {
            return Err(Error::Parameter("sample sizes must be positive".into()));
        }
        let base = build_sigma_base(spec)?;
        let (truth, sigma1, sigma2) = match signal {
            None => (Truth::Null, base.clone(), base),
            Some(sig) => {
                let u = build_signal_u(spec.p, sig)?;
                let shifted = &base + &u;
                let eps = epsilon_c(&shifted)?;
                let jitter = DMatrix::<f64>::identity(spec.p, spec.p) * eps;
                (Truth::Alternative, &base + &jitter, shifted + jitter)
            }
        };
        let perm = spec.permutation();
        let root1 = permute_rows(&sym_sqrt(&sigma1)?, &perm);
        let root2 = if truth == Truth::Null {
            root1.clone()
        } else {
            permute_rows(&sym_sqrt(&sigma2)?, &perm)
        };
        Ok(Self {
            n1,
            n2,
            law,
            truth,
            sigma1,
            sigma2,
            perm,
            root1,
            root2,
        })
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// The null design matched to this generator: both samples drawn with
    /// the first sample's covariance (for an alternative, `Sigma1^(0) + eps_c I`).
    pub fn null_counterpart(&self) -> PairGenerator {
        PairGenerator {
            truth: Truth::Null,
            sigma2: self.sigma1.clone(),
            root2: self.root1.clone(),
            ..self.clone()
        }
    }

    /// Draw `x` then `y` from `rng`, columns already permuted.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(SampleMatrix, SampleMatrix)> {
        let x = draw_sample(rng, &self.root1, self.n1, self.law)?;
        let y = draw_sample(rng, &self.root2, self.n2, self.law)?;
        Ok((x, y))
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GeneratedPair> {
        let (x, y) = self.draw(rng)?;
        Ok(GeneratedPair {
            x,
            y,
            truth: self.truth,
            sigma1: permute_sym(&self.sigma1, &self.perm),
            sigma2: permute_sym(&self.sigma2, &self.perm),
        })
    }
}

pub fn generate_pair(
    spec: &DesignSpec,
    signal: Option<&SignalSpec>,
    law: Innovation,
    n1: usize,
    n2: usize,
    seed: u64,
) -> Result<GeneratedPair> {
    let generator = PairGenerator::new(spec, signal, law, n1, n2)?;
    let mut rng = stream_rng(seed, domain(Namespace::Single, 0), 0);
    generator.generate(&mut rng)
}
