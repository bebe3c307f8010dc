//! Test-only reference implementations. They follow the textbook definitions
//! directly (dense loops, exact rational arithmetic, quadrature) and share no
//! code with the library beyond its data types.
#![allow(dead_code)]

use covthresh::linalg::Innovation;
use covthresh::simgen::{generate_pair, Design, DesignSpec, SignalSpec};
use covthresh::SampleMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense moments: `sigma[i][j]` and `theta[i][j]` with divisor `n`.
pub struct Moments {
    pub sigma: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
}

pub fn naive_moments(x: &SampleMatrix) -> Moments {
    let (n, p) = (x.n(), x.p());
    let nf = n as f64;
    let mean: Vec<f64> = (0..p)
        .map(|j| (0..n).map(|k| x.get(k, j)).sum::<f64>() / nf)
        .collect();
    let mut sigma = vec![vec![0.0; p]; p];
    let mut theta = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..p {
            let prods: Vec<f64> = (0..n)
                .map(|k| (x.get(k, i) - mean[i]) * (x.get(k, j) - mean[j]))
                .collect();
            let s = prods.iter().sum::<f64>() / nf;
            sigma[i][j] = s;
            theta[i][j] = prods.iter().map(|v| (v - s) * (v - s)).sum::<f64>() / nf;
        }
    }
    Moments { sigma, theta }
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Exact moments of integer data, rounded once to `f64`.
pub fn exact_integer_moments(rows: &[Vec<i64>]) -> Moments {
    let n = rows.len();
    let p = rows[0].len();
    let nr = rat(n as i64);
    let mean: Vec<BigRational> = (0..p)
        .map(|j| rows.iter().fold(BigRational::zero(), |a, r| a + rat(r[j])) / &nr)
        .collect();
    let mut sigma = vec![vec![0.0; p]; p];
    let mut theta = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..p {
            let prods: Vec<BigRational> = rows
                .iter()
                .map(|r| (rat(r[i]) - &mean[i]) * (rat(r[j]) - &mean[j]))
                .collect();
            let s = prods.iter().fold(BigRational::zero(), |a, v| a + v) / &nr;
            let t = prods.iter().fold(BigRational::zero(), |a, v| {
                let d = v - &s;
                a + &d * &d
            }) / &nr;
            sigma[i][j] = s.to_f64().unwrap();
            theta[i][j] = t.to_f64().unwrap();
        }
    }
    Moments { sigma, theta }
}

/// `F_ij` on the upper triangle in row-major `(i <= j)` order.
pub fn naive_f(x: &SampleMatrix, y: &SampleMatrix) -> Vec<f64> {
    let (mx, my) = (naive_moments(x), naive_moments(y));
    let (n1, n2) = (x.n() as f64, y.n() as f64);
    let p = x.p();
    let mut out = Vec::new();
    for i in 0..p {
        for j in i..p {
            let den = (mx.theta[i][j] / n1 + my.theta[i][j] / n2).sqrt();
            out.push((mx.sigma[i][j] - my.sigma[i][j]) / den);
        }
    }
    out
}

/// Sample correlations and delta-method variances of `sqrt(n)(rho_hat - rho)`.
pub fn naive_correlation(x: &SampleMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let m = naive_moments(x);
    let (n, p) = (x.n(), x.p());
    let mean: Vec<f64> = (0..p)
        .map(|j| (0..n).map(|k| x.get(k, j)).sum::<f64>() / n as f64)
        .collect();
    let mut rho = vec![vec![0.0; p]; p];
    let mut var = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..p {
            let (si, sj) = (m.sigma[i][i].sqrt(), m.sigma[j][j].sqrt());
            let r = m.sigma[i][j] / (si * sj);
            rho[i][j] = r;
            var[i][j] = (0..n)
                .map(|k| {
                    let a = (x.get(k, i) - mean[i]) / si;
                    let b = (x.get(k, j) - mean[j]) / sj;
                    let psi = a * b - 0.5 * r * (a * a + b * b);
                    psi * psi
                })
                .sum::<f64>()
                / n as f64;
        }
    }
    (rho, var)
}

/// Correctly rounded sum through exact rational arithmetic.
pub fn exact_rational_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(BigRational::zero(), |acc, v| {
            acc + BigRational::from_float(v).unwrap()
        })
        .to_f64()
        .unwrap()
}

/// `sum M 1{M > lam}` by filtering.
pub fn filter_sum_at(m: &[f64], lam: f64) -> f64 {
    exact_rational_sum(m.iter().copied().filter(|&v| v > lam))
}

/// `sum M 1{M > 4 s log p}` by filtering.
pub fn filter_sum(m: &[f64], s: f64, p: usize) -> f64 {
    filter_sum_at(m, 4.0 * s * (p as f64).ln())
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `2 int_a^inf z^k phi(z) dz` by composite Simpson quadrature.
fn two_sided_tail_moment(a: f64, k: i32) -> f64 {
    let b = a + 16.0;
    let steps = 20_000;
    let h = (b - a) / steps as f64;
    let f = |z: f64| z.powi(k) * std_normal_pdf(z);
    let mut acc = f(a) + f(b);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    2.0 * acc * h / 3.0
}

/// `count E[Z^2 1{Z^2 > lam}]` and `count E[Z^4 1{Z^2 > lam}]`.
pub fn quadrature_moments_at(lam: f64, count: usize) -> (f64, f64) {
    let root = lam.sqrt();
    let c = count as f64;
    (
        c * two_sided_tail_moment(root, 2),
        c * two_sided_tail_moment(root, 4),
    )
}

pub fn quadrature_null_moments(s: f64, p: usize, count: usize) -> (f64, f64) {
    quadrature_moments_at(4.0 * s * (p as f64).ln(), count)
}

pub struct BruteScan {
    pub candidates: Vec<f64>,
    pub levels: Vec<f64>,
    pub standardized: Vec<f64>,
    pub v_n: f64,
    pub argmax_s: f64,
}

/// Evaluate every candidate threshold independently. A data-driven
/// candidate `s = M / (4 log p)` is evaluated at level `M` itself.
pub fn brute_scan(m: &[f64], p: usize, count: usize, s0: f64, eta: f64) -> BruteScan {
    let lp4 = 4.0 * (p as f64).ln();
    let upper = 1.0 - eta;
    let (low, top) = (4.0 * s0 * (p as f64).ln(), 4.0 * upper * (p as f64).ln());
    let mut levels: Vec<f64> = m.iter().copied().filter(|&v| v > low && v < top).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut candidates: Vec<f64> = levels.iter().map(|v| v / lp4).collect();
    levels.push(top);
    candidates.push(upper);
    let mut standardized = Vec::new();
    let (mut v_n, mut argmax_s) = (f64::NEG_INFINITY, f64::NAN);
    for (&s, &lam) in candidates.iter().zip(&levels) {
        let (mu, var) = quadrature_moments_at(lam, count);
        let z = (filter_sum_at(m, lam) - mu) / var.sqrt();
        standardized.push(z);
        if z > v_n {
            v_n = z;
            argmax_s = s;
        }
    }
    BruteScan {
        candidates,
        levels,
        standardized,
        v_n,
        argmax_s,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn gram(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter()
        .map(|u| b.iter().map(|v| dot(u, v)).collect())
        .collect()
}

/// Four-fold sums over distinct indices of the raw (uncentered) observations.
pub fn brute_lc(x: &SampleMatrix, y: &SampleMatrix) -> f64 {
    let xs: Vec<Vec<f64>> = (0..x.n()).map(|k| x.row(k)).collect();
    let ys: Vec<Vec<f64>> = (0..y.n()).map(|k| y.row(k)).collect();
    brute_trace_sq(&gram(&xs, &xs)) + brute_trace_sq(&gram(&ys, &ys))
        - 2.0 * brute_cross(&gram(&xs, &ys))
}

fn brute_trace_sq(g: &[Vec<f64>]) -> f64 {
    let n = g.len();
    let nf = n as f64;
    let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let ij = g[i][j];
            s1 += ij * ij;
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                s2 += ij * g[j][k];
                for l in 0..n {
                    if l == i || l == j || l == k {
                        continue;
                    }
                    s3 += ij * g[k][l];
                }
            }
        }
    }
    s1 / (nf * (nf - 1.0)) - 2.0 * s2 / (nf * (nf - 1.0) * (nf - 2.0))
        + s3 / (nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0))
}

/// `h[i][j] = x_i' y_j`.
fn brute_cross(h: &[Vec<f64>]) -> f64 {
    let (n1, n2) = (h.len(), h[0].len());
    let (a, b) = (n1 as f64, n2 as f64);
    let (mut c1, mut c2, mut c3, mut c4) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n1 {
        for j in 0..n2 {
            let ij = h[i][j];
            c1 += ij * ij;
            for k in 0..n1 {
                if k != i {
                    c2 += ij * h[k][j];
                }
            }
            for l in 0..n2 {
                if l != j {
                    c3 += ij * h[i][l];
                }
            }
            for k in 0..n1 {
                for l in 0..n2 {
                    if k != i && l != j {
                        c4 += ij * h[k][l];
                    }
                }
            }
        }
    }
    c1 / (a * b) - c2 / (a * (a - 1.0) * b) - c3 / (a * b * (b - 1.0))
        + c4 / (a * (a - 1.0) * b * (b - 1.0))
}

/// A random test corpus: a pair of samples with dimensions drawn from `seed`.
pub struct Corpus {
    pub x: SampleMatrix,
    pub y: SampleMatrix,
}

pub fn random_corpus(seed: u64, max_p: usize, max_n: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = rng.random_range(4..=max_p);
    let n1 = rng.random_range(8..=max_n);
    let n2 = rng.random_range(8..=max_n);
    let design = if rng.random_bool(0.5) {
        Design::Ar
    } else {
        Design::Block4
    };
    let law = if rng.random_bool(0.5) {
        Innovation::Gaussian
    } else {
        Innovation::Gamma
    };
    let spec = DesignSpec::new(design, p, seed, seed + 1);
    let signal = SignalSpec::new(0.6, rng.random_range(0.0..3.0), n1, n2);
    let with_signal = rng.random_bool(0.5);
    let g = generate_pair(&spec, with_signal.then_some(&signal), law, n1, n2, seed).unwrap();
    Corpus { x: g.x, y: g.y }
}

pub fn integer_sample(rows: &[Vec<i64>]) -> SampleMatrix {
    let rows: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| v as f64).collect())
        .collect();
    SampleMatrix::from_rows(&rows).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
