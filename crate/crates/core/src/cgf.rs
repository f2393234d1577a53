//! Cumulant machinery on `Λ(s) = log E[A^s]`.
//!
//! All solvers exploit strict convexity of `Λ`: `Λ'` is strictly increasing,
//! so each root is unique and a Newton step can be safeguarded by a
//! bisection bracket.

use crate::error::{Error, Result};
use crate::laws::{ALawSpec, InnovationLaw};
use serde::{Deserialize, Serialize};

/// Absolute/relative tolerance of every root solve.
pub const ROOT_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 200;
/// Slack `ε` in the moment hypothesis `E A^{α+ε}, E|B|^{α+ε} < ∞`.
pub const MOMENT_EPSILON: f64 = 0.5;

/// Constants of `Λ` for one law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantProfile {
    /// Minimiser of `Λ` on `[0, ∞)`; absent when `Λ` decreases forever.
    pub alpha_min: Option<f64>,
    /// `Λ'(0) = E log A`.
    pub e_log_a: f64,
    /// Cramér root `Λ(α₀) = 0`, `α₀ > 0`.
    pub alpha0: Option<f64>,
    /// `Λ'(α₀) = E[A^{α₀} log A]`.
    pub rho0: Option<f64>,
    /// `λ''(α₀) = E[A^{α₀} (log A)²]`.
    pub sigma0: Option<f64>,
    pub tolerance: f64,
}

/// Machine-checkable hypotheses of the two pointwise theorems at one `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub h_contractive: bool,
    pub h_moments: bool,
    pub moments_epsilon: f64,
    pub h_index: bool,
    pub h_support: bool,
    pub h_density: bool,
    pub thm2_regime: bool,
    pub alpha_used: f64,
}

/// Root of the increasing function `f` on `[lo, hi]`; `f` returns
/// `(value, derivative)`. Newton steps that leave the bracket are replaced
/// by bisection.
fn increasing_root<F: Fn(f64) -> (f64, f64)>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_NEWTON {
        let (v, d) = f(x);
        if v.abs() <= tol {
            return x;
        }
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - v / d;
        x = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            return x;
        }
    }
    x
}

/// Smallest `hi = start·2^j ≤ cap` with `pred(hi)`.
fn expand_bracket<P: Fn(f64) -> bool>(start: f64, cap: f64, pred: P) -> Option<f64> {
    let mut hi = start;
    while hi <= cap {
        if pred(hi) {
            return Some(hi);
        }
        hi *= 2.0;
    }
    None
}

/// Unique `α ≥ 0` with `Λ'(α) = rho`.
pub fn solve_alpha(law: &InnovationLaw, rho: f64) -> Result<f64> {
    solve_alpha_a(&law.a, rho)
}

pub(crate) fn solve_alpha_a(a: &ALawSpec, rho: f64) -> Result<f64> {
    let slope0 = a.cumulants_unchecked(0.0).first;
    let sup = a.sup_slope();
    if !rho.is_finite() || rho < slope0 || rho >= sup {
        return Err(Error::Range(format!(
            "rho = {rho} outside the attainable range [{slope0}, {sup}) of Λ'"
        )));
    }
    if rho == slope0 {
        return Ok(0.0);
    }
    let hi = expand_bracket(1.0, 2f64.powi(60), |s| a.cumulants_unchecked(s).first > rho)
        .ok_or_else(|| Error::Range(format!("rho = {rho} too close to sup Λ' = {sup}")))?;
    let tol = ROOT_TOL * rho.abs().max(1.0);
    Ok(increasing_root(
        |s| {
            let c = a.cumulants_unchecked(s);
            (c.first - rho, c.second)
        },
        0.0,
        hi,
        tol,
    ))
}

/// `σ(α) = √Λ''(α)`.
pub fn sigma_at(law: &InnovationLaw, alpha: f64) -> Result<f64> {
    Ok(law.a.cumulants(alpha)?.second.sqrt())
}

/// Tangent-line index `ᾱ = α − Λ(α)/Λ'(α)`.
pub fn alpha_bar(law: &InnovationLaw, alpha: f64) -> Result<f64> {
    let c = law.a.cumulants(alpha)?;
    if c.first <= 1e-12 {
        return Err(Error::Domain(format!("Λ'({alpha}) = {} is not positive", c.first)));
    }
    Ok(alpha - c.value / c.first)
}

/// Convex conjugate `Λ*(x) = sup_{s ≥ 0} {sx − Λ(s)}`.
pub fn legendre(law: &InnovationLaw, x: f64) -> Result<f64> {
    let slope0 = law.a.cumulants_unchecked(0.0).first;
    if x <= slope0 {
        return Ok(0.0);
    }
    let s = solve_alpha(law, x)?;
    Ok(s * x - law.a.log_mgf(s))
}

/// Rate `I(ρ) = Λ*(ρ)/ρ`, computed as `ᾱ` at the solved `α`.
pub fn rate_i(law: &InnovationLaw, rho: f64) -> Result<f64> {
    alpha_bar(law, solve_alpha(law, rho)?)
}

/// Profile of `Λ`; the Cramér fields are `None` when `Λ < 0` on `(0, 2¹⁰]`.
pub fn cumulant_profile(law: &InnovationLaw) -> CumulantProfile {
    let a = &law.a;
    let e_log_a = a.cumulants_unchecked(0.0).first;
    let alpha_min = if e_log_a >= 0.0 {
        Some(0.0)
    } else if a.sup_slope() <= 0.0 {
        None
    } else {
        solve_alpha_a(a, 0.0).ok()
    };
    let mut profile =
        CumulantProfile { alpha_min, e_log_a, alpha0: None, rho0: None, sigma0: None, tolerance: ROOT_TOL };
    let Some(amin) = alpha_min else { return profile };
    if e_log_a >= 0.0 {
        return profile;
    }
    let cap = 2f64.powi(10);
    let Some(hi) = expand_bracket(1.0_f64.max(2.0 * amin), cap, |s| a.log_mgf(s) > 0.0) else {
        return profile;
    };
    let alpha0 = increasing_root(
        |s| {
            let c = a.cumulants_unchecked(s);
            (c.value, c.first)
        },
        amin,
        hi,
        ROOT_TOL,
    );
    let c = a.cumulants_unchecked(alpha0);
    profile.alpha0 = Some(alpha0);
    profile.rho0 = Some(c.first);
    profile.sigma0 = Some((c.second + c.first * c.first) * c.value.exp());
    profile
}

/// Profile with a Cramér root, or `NoRoot`.
pub fn cramer_root(law: &InnovationLaw) -> Result<CumulantProfile> {
    let p = cumulant_profile(law);
    if p.alpha0.is_some() {
        Ok(p)
    } else {
        Err(Error::NoRoot(format!("Λ stays negative on (0, 1024] for {:?}", law.a)))
    }
}

/// Whether some `(a₁,b₁), (a₂,b₂)` in the support have `a₁ < 1 < a₂` and
/// `b₂/(1−a₂) < b₁/(1−a₁)`.
///
/// With independent marginals the support is a product, so the condition is
/// `inf` over the `a > 1` half `<` `sup` over the `a < 1` half, and both
/// extrema depend only on `sup supp B` and the support points of `A`
/// nearest to and farthest from 1.
fn support_condition(law: &InnovationLaw) -> bool {
    let (a_lo, a_hi) = law.a.support();
    let (below, above) = law.a.support_near_one();
    let (Some(a1_max), Some(a2_min)) = (below, above) else { return false };
    let b = law.b.support().1;
    let ratio = |b: f64, a: f64| b / (1.0 - a);
    // a > 1: b/(1-a) is increasing in a for b > 0, decreasing for b < 0
    let inf_above = if b > 0.0 {
        if a2_min == 1.0 { f64::NEG_INFINITY } else { ratio(b, a2_min) }
    } else if b < 0.0 {
        if a_hi.is_infinite() { 0.0 } else { ratio(b, a_hi) }
    } else {
        0.0
    };
    // a < 1: b/(1-a) is increasing in a for b > 0, and for b < 0 largest at a_lo
    let sup_below = if b > 0.0 {
        if a1_max == 1.0 { f64::INFINITY } else { ratio(b, a1_max) }
    } else if b < 0.0 {
        ratio(b, a_lo)
    } else {
        0.0
    };
    inf_above < sup_below
}

/// Evaluate the pointwise-theorem hypotheses at `alpha`.
pub fn hypothesis_report(law: &InnovationLaw, alpha: f64) -> Result<HypothesisReport> {
    let a = &law.a;
    let profile = cumulant_profile(law);
    let lam_alpha = a.cumulants(alpha)?.value;
    let lam_one = a.log_mgf(1.0);
    let alpha_min_le_1 = profile.alpha_min.is_some_and(|m| m <= 1.0);
    let h_index = alpha_min_le_1 || lam_one < lam_alpha;
    let h_density = a.has_density();
    // density floor: a continuous positive density on some interval above 1
    let density_floor = h_density && a.support().1 > 1.0;
    let thm2_regime = !alpha_min_le_1 && lam_alpha < lam_one && law.b.is_positive() && density_floor;
    Ok(HypothesisReport {
        h_contractive: profile.e_log_a < 0.0,
        h_moments: alpha.is_finite() && law.b.all_moments_finite(),
        moments_epsilon: MOMENT_EPSILON,
        h_index,
        h_support: support_condition(law),
        h_density,
        thm2_regime,
        alpha_used: alpha,
    })
}
