//! Standard normal distribution helpers.

use statrs::function::erf::erfc;
use std::f64::consts::{PI, SQRT_2};

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal upper tail `Q(x) = P[Z > x]`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Standard normal CDF `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// `P[lo < Z ≤ hi]`, evaluated on whichever tail keeps the subtraction small.
pub fn normal_interval(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo > 0.0 {
        (normal_sf(lo) - normal_sf(hi)).max(0.0)
    } else {
        (normal_cdf(hi) - normal_cdf(lo)).max(0.0)
    }
}
