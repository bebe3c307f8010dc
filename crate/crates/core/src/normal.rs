//! Standard normal helpers.

use libm::erfc;
use statrs::function::erf::erfc_inv;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Density `phi(x)`.
pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Survival function `1 - Phi(x)`, accurate in the upper tail.
pub fn sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Upper-`alpha` quantile `z` with `sf(z) = alpha`.
pub fn upper_quantile(alpha: f64) -> f64 {
    let z = std::f64::consts::SQRT_2 * erfc_inv(2.0 * alpha);
    // One Newton step against the accurate survival function.
    let d = pdf(z);
    if d > 0.0 {
        z + (sf(z) - alpha) / d
    } else {
        z
    }
}
