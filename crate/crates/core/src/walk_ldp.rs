//! Sharp large-deviation approximations for the multiplicative walk
//! `Π_n = A₁⋯A_n`, with exact and simulated references.
//!
//! The evaluators return the leading term only: the `(1 + O(|γ|))` factor
//! inside the exponent and the trailing `(1 + o(1))` are dropped, so
//! comparisons against exact values are ratio-based with an `n`-dependent
//! tolerance. `σ(α)` is `√Λ''(α)`.

use crate::cgf::{solve_alpha, ROOT_TOL};
use crate::error::{Error, Result};
use crate::estimate::{Accumulator, EstimateRecord};
use crate::laws::InnovationLaw;
use crate::rng::map_batches;
use crate::special::normal_sf;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One evaluation point of the uniform approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PetrovQuery {
    pub n: u64,
    pub c: f64,
    pub gamma_n: f64,
    /// Solves `Λ'(α) = c`.
    pub alpha: f64,
}

impl PetrovQuery {
    pub fn new(law: &InnovationLaw, n: u64, c: f64, gamma_n: f64) -> Result<Self> {
        Ok(PetrovQuery { n, c, gamma_n, alpha: solve_alpha(law, c)? })
    }
}

fn check_nonlattice(law: &InnovationLaw) -> Result<()> {
    if law.a.is_lattice() {
        Err(Error::Lattice(format!("{:?} has a lattice log-law", law.a)))
    } else {
        Ok(())
    }
}

fn prefactor(alpha: f64, sigma: f64, n: u64) -> f64 {
    1.0 / (alpha * sigma * (2.0 * PI * n as f64).sqrt())
}

/// True when `c` sits in the top 5% of the attainable slope range, where the
/// uniformity of the approximation is not guaranteed.
pub fn near_upper_edge(law: &InnovationLaw, c: f64) -> bool {
    let lo = law.a.cumulants_unchecked(0.0).first;
    let hi = law.a.sup_slope();
    hi.is_finite() && c > hi - 0.05 * (hi - lo)
}

/// Leading-order approximation of `P[Π_n > e^{n(c+γ)}]`.
pub fn petrov_prob(law: &InnovationLaw, q: &PetrovQuery) -> Result<f64> {
    check_nonlattice(law)?;
    let e_log_a = law.a.cumulants_unchecked(0.0).first;
    if q.c <= e_log_a {
        return Err(Error::Range(format!("c = {} must exceed E log A = {e_log_a}", q.c)));
    }
    let cu = law.a.cumulants(q.alpha)?;
    if (cu.first - q.c).abs() > 100.0 * ROOT_TOL * q.c.abs().max(1.0) {
        return Err(Error::Domain(format!("Λ'({}) = {} does not match c = {}", q.alpha, cu.first, q.c)));
    }
    if !(cu.second > 0.0) {
        return Err(Error::Domain("Λ''(α) must be positive".into()));
    }
    let g = q.gamma_n;
    let exponent = -(q.n as f64) * (q.alpha * (q.c + g) - cu.value + g * g / (2.0 * cu.second));
    Ok(prefactor(q.alpha, cu.second.sqrt(), q.n) * exponent.exp())
}

/// Leading-order approximation of `P[Π_{n−j} ≥ t e^{nδ}]` with `t = e^{nΛ'(α)}`:
/// `t^{−ᾱ} e^{−αnδ} e^{−jΛ(α)} / (ασ(α)√(2πn))`.
///
/// `log t^{−ᾱ}` is evaluated as `−n(αΛ'(α) − Λ(α))`.
pub fn petrov_shifted(law: &InnovationLaw, n: u64, j_n: u64, delta_n: f64, alpha: f64) -> Result<f64> {
    check_nonlattice(law)?;
    let cu = law.a.cumulants(alpha)?;
    if cu.first <= law.a.cumulants_unchecked(0.0).first {
        return Err(Error::Range("Λ'(α) must exceed E log A".into()));
    }
    if !(cu.second > 0.0) {
        return Err(Error::Domain("Λ''(α) must be positive".into()));
    }
    let nf = n as f64;
    let exponent = -nf * (alpha * (cu.first + 0.0) - cu.value + 0.0)
        - alpha * nf * delta_n
        - j_n as f64 * cu.value;
    Ok(prefactor(alpha, cu.second.sqrt(), n) * exponent.exp())
}

/// Envelope condition `max{√n|δ_n|, j_n/√n} ≤ δ(n)`.
pub fn shifted_envelope_ok(n: u64, j_n: u64, delta_n: f64, envelope: f64) -> bool {
    let rn = (n as f64).sqrt();
    (rn * delta_n.abs()).max(j_n as f64 / rn) <= envelope
}

/// `P[Π_n > threshold]` for `log A ~ N(mu, sigma²)`.
pub fn exact_gaussian_walk_tail(mu: f64, sigma: f64, n: u64, threshold: f64) -> f64 {
    let nf = n as f64;
    normal_sf((threshold.ln() - nf * mu) / (sigma * nf.sqrt()))
}

/// Importance-sampling estimate of `P[Π_n > t]` drawing every step from the
/// `tilt_alpha`-tilted law, with weight `exp(nΛ(α) − α log Π_n)`.
pub fn mc_walk_tail(
    law: &InnovationLaw,
    n: u64,
    t: f64,
    samples: usize,
    tilt_alpha: f64,
    seed: u64,
) -> Result<EstimateRecord> {
    if samples < 1000 {
        return Err(Error::Domain(format!("need at least 1000 samples, got {samples}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("threshold must be nonnegative, got {t}")));
    }
    let tilted = law.a.tilt(tilt_alpha)?;
    let log_t = t.ln();
    let base_lw = n as f64 * tilted.log_normalizer;
    let parts = map_batches(samples, seed, |rng, len| {
        let mut acc = Accumulator::default();
        for _ in 0..len {
            let mut log_pi = 0.0;
            for _ in 0..n {
                log_pi += tilted.sample_log(rng);
            }
            let w = if log_pi > log_t {
                if tilt_alpha == 0.0 {
                    1.0
                } else {
                    (base_lw - tilt_alpha * log_pi).exp()
                }
            } else {
                0.0
            };
            acc.push(w);
        }
        acc
    });
    Ok(Accumulator::fold(&parts).into_record(format!("walk_tail(n={n},t={t},tilt={tilt_alpha})")))
}
