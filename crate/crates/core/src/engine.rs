//! Path simulation of the perpetuity and weighted rare-event estimators.
//!
//! A path advances as `Y_n = Y_{n−1} + Π_{n−1} B_n` and stops at the first
//! `Y_n > u`. The multiplier `A_n` is drawn only when the path continues, so
//! a path stopped at `τ` carries the likelihood ratio of `A_1, …, A_{τ−1}`,
//! the only multipliers its event depends on.

use std::fmt;

use crate::cgf::{alpha_bar, cramer_root, hypothesis_report, solve_alpha};
use crate::error::{Error, Result};
use crate::estimate::{Accumulator, EstimateRecord};
use crate::laws::{InnovationLaw, TiltedALaw};
use crate::rng::{map_batches, substream_seed, Stream};
use crate::special::normal_cdf;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Largest step horizon accepted by the estimators.
pub const MAX_STEPS: u64 = 1_000_000;

/// Per-step tilt of the `A` draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum TiltSchedule {
    Untilted,
    /// Steps `1..=horizon` at tilt `s`.
    ConstantTilt { s: f64, horizon: u64 },
    /// Steps `1..=n1` at `s1`, then `n1+1..=n1+n2` at `s2`.
    TwoPhase { s1: f64, n1: u64, s2: f64, n2: u64 },
}

impl TiltSchedule {
    /// Tilt applied to `A_step`.
    pub fn tilt_at(&self, step: u64) -> f64 {
        match *self {
            TiltSchedule::Untilted => 0.0,
            TiltSchedule::ConstantTilt { s, horizon } => {
                if step <= horizon {
                    s
                } else {
                    0.0
                }
            }
            TiltSchedule::TwoPhase { s1, n1, s2, n2 } => {
                if step <= n1 {
                    s1
                } else if step <= n1 + n2 {
                    s2
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for TiltSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TiltSchedule::Untilted => write!(f, "untilted"),
            TiltSchedule::ConstantTilt { s, horizon } => write!(f, "tilt({s};{horizon})"),
            TiltSchedule::TwoPhase { s1, n1, s2, n2 } => write!(f, "twophase({s1};{n1};{s2};{n2})"),
        }
    }
}

/// Stopping index of a simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Passage {
    Hit(u64),
    Censored(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub tau: Passage,
    /// `log Π_{τ−1}`, the log-product that multiplied the final `B`.
    pub log_pi_at_stop: f64,
    pub y_at_stop: f64,
    /// `M_{τ−1}`; on censored paths `M_{n_max}`.
    pub m_prev: f64,
    pub log_weight: f64,
    /// `Y` left the floating range; counted as an exceedance.
    pub overflow: bool,
}

impl PathRecord {
    pub fn hit_at(&self) -> Option<u64> {
        match self.tau {
            Passage::Hit(k) => Some(k),
            Passage::Censored(_) => None,
        }
    }
}

/// Tilted samplers for the three schedule phases.
#[derive(Debug, Clone)]
pub struct PathSampler {
    pub law: InnovationLaw,
    pub schedule: TiltSchedule,
    phases: [TiltedALaw; 3],
    ends: [u64; 2],
}

impl PathSampler {
    pub fn new(law: &InnovationLaw, schedule: TiltSchedule) -> Result<Self> {
        law.validate()?;
        let (s1, e1, s2, e2) = match schedule {
            TiltSchedule::Untilted => (0.0, 0, 0.0, 0),
            TiltSchedule::ConstantTilt { s, horizon } => (s, horizon, 0.0, horizon),
            TiltSchedule::TwoPhase { s1, n1, s2, n2 } => (s1, n1, s2, n1.saturating_add(n2)),
        };
        Ok(PathSampler {
            law: *law,
            schedule,
            phases: [law.a.tilt(s1)?, law.a.tilt(s2)?, law.a.tilt(0.0)?],
            ends: [e1, e2],
        })
    }

    #[inline]
    fn step_law(&self, step: u64) -> &TiltedALaw {
        if step <= self.ends[0] {
            &self.phases[0]
        } else if step <= self.ends[1] {
            &self.phases[1]
        } else {
            &self.phases[2]
        }
    }

    /// Draws `log A_step` and its log-likelihood ratio.
    #[inline]
    pub fn draw_log_a<R: Rng + ?Sized>(&self, step: u64, rng: &mut R) -> (f64, f64) {
        let t = self.step_law(step);
        let la = t.sample_log(rng);
        (la, t.log_weight(la))
    }

    /// Simulates one path up to passage over `u` or `n_max` steps.
    pub fn run<R: Rng + ?Sized>(&self, u: f64, n_max: u64, rng: &mut R) -> PathRecord {
        let (mut y, mut m, mut log_pi, mut lw) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for n in 1..=n_max {
            let b = self.law.b.sample(rng);
            let y_next = y + log_pi.exp() * b;
            let overflow = !y_next.is_finite();
            if overflow || y_next > u {
                return PathRecord {
                    tau: Passage::Hit(n),
                    log_pi_at_stop: log_pi,
                    y_at_stop: if overflow { f64::INFINITY } else { y_next },
                    m_prev: m,
                    log_weight: lw,
                    overflow,
                };
            }
            y = y_next;
            m = m.max(y);
            if n < n_max {
                let (la, w) = self.draw_log_a(n, rng);
                log_pi += la;
                lw += w;
            }
        }
        PathRecord { tau: Passage::Censored(n_max), log_pi_at_stop: log_pi, y_at_stop: y, m_prev: m, log_weight: lw, overflow: false }
    }
}

fn check_level(u: f64, n_max: u64) -> Result<()> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::Domain(format!("passage level must be positive and finite, got {u}")));
    }
    if n_max == 0 || n_max > MAX_STEPS {
        return Err(Error::Domain(format!("step horizon must be in 1..={MAX_STEPS}, got {n_max}")));
    }
    Ok(())
}

/// One path of the perpetuity under `schedule`.
pub fn run_path<R: Rng + ?Sized>(
    law: &InnovationLaw,
    schedule: &TiltSchedule,
    u: f64,
    n_max: u64,
    rng: &mut R,
) -> Result<PathRecord> {
    check_level(u, n_max)?;
    Ok(PathSampler::new(law, *schedule)?.run(u, n_max, rng))
}

fn accumulate<F>(samples: usize, seed: u64, target: String, per_path: F) -> Result<EstimateRecord>
where
    F: Fn(&mut Stream, &mut Accumulator) + Sync,
{
    if samples < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {samples}")));
    }
    let parts = map_batches(samples, seed, |rng, len| {
        let mut acc = Accumulator::default();
        for _ in 0..len {
            per_path(rng, &mut acc);
        }
        acc
    });
    Ok(Accumulator::fold(&parts).into_record(target))
}

/// Which step of the passage is targeted, given `k_u = ⌊log u/ρ⌋`.
///
/// Both targets have the same `u^{−ᾱ} λ(α)^{−Θ(u)}/√log u` shape, with
/// constants differing by the factor `λ(α)`. `Shifted` puts the crossing
/// at the mean of the tilted walk and converges much faster in `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PassageIndex {
    /// `τ_u = k_u`.
    Floor,
    /// `τ_u = k_u + 1`, i.e. `{M_{k_u} ≤ u < Y_{k_u+1}}`.
    #[default]
    Shifted,
}

impl PassageIndex {
    pub fn step(&self, k_u: u64) -> u64 {
        match self {
            PassageIndex::Floor => k_u,
            PassageIndex::Shifted => k_u + 1,
        }
    }
}

/// Step index, tilt and schedule of a pointwise estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwisePlan {
    /// `⌊log u/ρ⌋`.
    pub k_u: u64,
    /// Targeted value of `τ_u`.
    pub step: u64,
    pub index: PassageIndex,
    pub alpha: f64,
    pub schedule: TiltSchedule,
    pub warnings: Vec<String>,
}

/// `⌊log u / rho⌋`, required to lie in `0..=MAX_STEPS`.
pub fn step_index(u: f64, rho: f64) -> Result<u64> {
    let k = (u.ln() / rho).floor();
    if !(k >= 0.0 && k <= MAX_STEPS as f64) {
        return Err(Error::Domain(format!("⌊log u/ρ⌋ = {k} for u = {u}, ρ = {rho} is outside 0..={MAX_STEPS}")));
    }
    Ok(k as u64)
}

/// Solves `α` for `rho` and checks the pointwise hypotheses. The schedule
/// tilts every multiplier the event depends on, `A_1, …, A_{step−1}`.
pub fn pointwise_plan(law: &InnovationLaw, rho: f64, u: f64, index: PassageIndex) -> Result<PointwisePlan> {
    law.validate()?;
    check_level(u, 1)?;
    let alpha = solve_alpha(law, rho)?;
    let report = hypothesis_report(law, alpha)?;
    if !report.h_contractive {
        return Err(Error::Domain("E log A must be negative".into()));
    }
    let k_u = step_index(u, rho)?;
    let step = index.step(k_u);
    if step == 0 {
        return Err(Error::Domain(format!("targeted step is 0 for u = {u}, ρ = {rho}")));
    }
    let mut warnings = Vec::new();
    if !report.h_index {
        warnings.push(format!("index condition fails at alpha = {alpha}: Λ(1) ≥ Λ(α) with α_min > 1"));
    }
    let schedule = TiltSchedule::ConstantTilt { s: alpha, horizon: step - 1 };
    Ok(PointwisePlan { k_u, step, index, alpha, schedule, warnings })
}

/// Weighted-indicator estimate of `P[M_{k−1} ≤ u < Y_k]` under `schedule`.
pub fn estimate_event(
    law: &InnovationLaw,
    schedule: TiltSchedule,
    u: f64,
    k: u64,
    samples: usize,
    seed: u64,
) -> Result<EstimateRecord> {
    check_level(u, k)?;
    let sampler = PathSampler::new(law, schedule)?;
    accumulate(samples, seed, format!("event(u={u},k={k},{schedule})"), |rng, acc| {
        let p = sampler.run(u, k, rng);
        if p.hit_at() == Some(k) {
            acc.push(p.log_weight.exp());
            acc.overflows += p.overflow as u64;
        } else {
            acc.push(0.0);
        }
    })
}

/// Tilted estimate of `P[τ_u = k_u + 1]` drawing `A` at `α(ρ)`.
pub fn estimate_pointwise(law: &InnovationLaw, rho: f64, u: f64, samples: usize, seed: u64) -> Result<EstimateRecord> {
    estimate_pointwise_with(law, rho, u, PassageIndex::default(), samples, seed)
}

pub fn estimate_pointwise_with(
    law: &InnovationLaw,
    rho: f64,
    u: f64,
    index: PassageIndex,
    samples: usize,
    seed: u64,
) -> Result<EstimateRecord> {
    let plan = pointwise_plan(law, rho, u, index)?;
    estimate_event(law, plan.schedule, u, plan.step, samples, seed)
}

/// Untilted estimate of `P[τ_u = k]`.
pub fn estimate_pointwise_naive(law: &InnovationLaw, u: f64, k: u64, samples: usize, seed: u64) -> Result<EstimateRecord> {
    estimate_event(law, TiltSchedule::Untilted, u, k, samples, seed)
}

/// Untilted histogram estimates of `P[τ_u = k]`, `k = 1..=n_max`, from one
/// set of paths.
pub fn tau_histogram(law: &InnovationLaw, u: f64, n_max: u64, samples: usize, seed: u64) -> Result<Vec<EstimateRecord>> {
    check_level(u, n_max)?;
    if samples < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {samples}")));
    }
    let sampler = PathSampler::new(law, TiltSchedule::Untilted)?;
    let bins = n_max as usize;
    let parts = map_batches(samples, seed, |rng, len| {
        let mut counts = vec![0u64; bins];
        let mut censored = 0u64;
        for _ in 0..len {
            match sampler.run(u, n_max, rng).tau {
                Passage::Hit(k) => counts[k as usize - 1] += 1,
                Passage::Censored(_) => censored += 1,
            }
        }
        (len as u64, counts, censored)
    });
    let mut n = 0u64;
    let mut counts = vec![0u64; bins];
    let mut censored = 0u64;
    for (len, c, z) in &parts {
        n += len;
        censored += z;
        for (t, x) in counts.iter_mut().zip(c) {
            *t += x;
        }
    }
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let acc = Accumulator { n, sum_w: c as f64, sum_w2: c as f64, sum_censored: censored as f64, overflows: 0 };
            acc.into_record(format!("tau_pmf(u={u},k={})", i + 1))
        })
        .collect())
}

/// Two-phase plan over the `step − 1` multipliers of the event:
/// `n1 = min(step − 1, ⌊log u/Λ'(β)⌋)` at `β`, the rest at tilt 1.
pub fn twophase_plan(law: &InnovationLaw, rho: f64, beta: f64, u: f64, index: PassageIndex) -> Result<PointwisePlan> {
    let base = pointwise_plan(law, rho, u, index)?;
    let slope = law.a.cumulants(beta)?.first;
    let tol = 1e-9 * rho.abs().max(1.0);
    if slope < rho - tol {
        return Err(Error::Domain(format!("Λ'(β) = {slope} is below ρ = {rho}; phase one would outlast k_u")));
    }
    let m = base.step - 1;
    let n1 = if slope <= rho + tol { m } else { ((u.ln() / slope).floor().max(0.0) as u64).min(m) };
    let mut warnings = base.warnings;
    let report = hypothesis_report(law, base.alpha)?;
    if !report.thm2_regime {
        warnings.push("law is outside the regime with polynomial excess; two-phase tilt is only a variance device here".into());
    }
    Ok(PointwisePlan {
        schedule: TiltSchedule::TwoPhase { s1: beta, n1, s2: 1.0, n2: m - n1 },
        warnings,
        ..base
    })
}

/// Conditional estimate of `P[M_{k−1} ≤ u < Y_k]`: all multipliers except
/// `A_j` follow `schedule`, and `A_j` is integrated out exactly under the
/// base law.
///
/// With `c = u − Y_j`, `P = Π_{j−1}` and `Z_i = Σ_{l=j+1}^{i} B_l A_{j+1}⋯A_{l−1}`,
/// the event given everything but `A_j` is
/// `c/(P Z_k) < A_j ≤ min_{j<i<k, Z_i>0} c/(P Z_i)` together with `Y_i ≤ u`
/// for `i ≤ j`.
pub fn estimate_event_pivot(
    law: &InnovationLaw,
    schedule: TiltSchedule,
    u: f64,
    k: u64,
    pivot: u64,
    samples: usize,
    seed: u64,
) -> Result<EstimateRecord> {
    check_level(u, k)?;
    if pivot == 0 || pivot >= k {
        return Err(Error::Domain(format!("pivot step must lie in 1..{k}, got {pivot}")));
    }
    let sampler = PathSampler::new(law, schedule)?;
    let a = law.a;
    let b = law.b;
    accumulate(samples, seed, format!("event(u={u},k={k},{schedule},pivot={pivot})"), |rng, acc| {
        let (mut y, mut log_pi, mut lw) = (0.0f64, 0.0f64, 0.0f64);
        for n in 1..=pivot {
            y += log_pi.exp() * b.sample(rng);
            if !(y <= u) {
                acc.push(0.0);
                return;
            }
            if n < pivot {
                let (la, w) = sampler.draw_log_a(n, rng);
                log_pi += la;
                lw += w;
            }
        }
        let log_c = (u - y).ln() - log_pi;
        let (mut z, mut log_q) = (0.0f64, 0.0f64);
        let mut hi = f64::INFINITY;
        for i in pivot + 1..=k {
            z += log_q.exp() * b.sample(rng);
            if i < k {
                if z > 0.0 {
                    hi = hi.min((log_c - z.ln()).exp());
                }
                let (la, w) = sampler.draw_log_a(i, rng);
                log_q += la;
                lw += w;
            }
        }
        if z > 0.0 {
            let lo = (log_c - z.ln()).exp();
            acc.push(lw.exp() * a.interval_prob(lo, hi));
        } else {
            acc.push(0.0);
        }
    })
}

/// Two-phase estimate of `P[τ_u = k_u + 1]`, conditioning on the last
/// phase-one multiplier.
pub fn estimate_pointwise_twophase(
    law: &InnovationLaw,
    rho: f64,
    beta: f64,
    u: f64,
    samples: usize,
    seed: u64,
) -> Result<EstimateRecord> {
    estimate_pointwise_twophase_with(law, rho, beta, u, PassageIndex::default(), samples, seed)
}

pub fn estimate_pointwise_twophase_with(
    law: &InnovationLaw,
    rho: f64,
    beta: f64,
    u: f64,
    index: PassageIndex,
    samples: usize,
    seed: u64,
) -> Result<EstimateRecord> {
    let plan = twophase_plan(law, rho, beta, u, index)?;
    let TiltSchedule::TwoPhase { n1, .. } = plan.schedule else { unreachable!() };
    if plan.step == 1 {
        return estimate_event(law, plan.schedule, u, 1, samples, seed);
    }
    let pivot = n1.clamp(1, plan.step - 1);
    estimate_event_pivot(law, plan.schedule, u, plan.step, pivot, samples, seed)
}

/// `P[τ_u ≤ n_max]` with every step tilted at the Cramér root,
/// `n_max = horizon_factor·⌈log u/ρ₀⌉`.
pub fn estimate_ruin(law: &InnovationLaw, u: f64, samples: usize, horizon_factor: u64, seed: u64) -> Result<EstimateRecord> {
    law.validate()?;
    check_level(u, 1)?;
    if horizon_factor < 2 {
        return Err(Error::Domain(format!("horizon factor must be at least 2, got {horizon_factor}")));
    }
    let profile = cramer_root(law)?;
    let (alpha0, rho0) = (profile.alpha0.unwrap(), profile.rho0.unwrap());
    let n_max = ruin_horizon(u, rho0, horizon_factor)?;
    let sampler = PathSampler::new(law, TiltSchedule::ConstantTilt { s: alpha0, horizon: n_max })?;
    accumulate(samples, seed, format!("ruin(u={u},n_max={n_max},alpha0={alpha0})"), |rng, acc| {
        let p = sampler.run(u, n_max, rng);
        let w = p.log_weight.exp();
        match p.tau {
            Passage::Hit(_) => {
                acc.push(w);
                acc.overflows += p.overflow as u64;
            }
            Passage::Censored(_) => {
                acc.push(0.0);
                acc.sum_censored += w;
            }
        }
    })
}

/// `factor·max(1, ⌈log u/ρ₀⌉)`.
pub fn ruin_horizon(u: f64, rho0: f64, factor: u64) -> Result<u64> {
    let base = (u.ln() / rho0).ceil().max(1.0);
    let n = base * factor as f64;
    if !(n <= MAX_STEPS as f64) {
        return Err(Error::Domain(format!("ruin horizon {n} exceeds {MAX_STEPS}")));
    }
    Ok(n as u64)
}

/// Law of large numbers and CLT checks for `τ_u` given passage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltDiagnostics {
    /// Weighted mean of `τ_u ρ₀ / log u`.
    pub mean_ratio: f64,
    /// KS distance to `N(0,1)` under the scale `σ₀ ρ₀^{−3/2} √log u`.
    pub ks_sigma0: f64,
    /// KS distance under the scale `√(σ₀ − ρ₀²) ρ₀^{−3/2} √log u`.
    pub ks_var0: f64,
    pub hits: u64,
    pub ess: f64,
    pub n_max: u64,
    /// Weighted empirical standard deviation of `τ_u`.
    pub tau_sd: f64,
}

/// Weighted Kolmogorov–Smirnov distance between the atoms `(x, w)` and the
/// standard normal. Tied atoms are merged.
pub fn weighted_ks(points: &mut [(f64, f64)]) -> f64 {
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = points.iter().map(|p| p.1).sum();
    let mut cum = 0.0;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < points.len() {
        let x = points[i].0;
        let phi = normal_cdf(x);
        d = d.max((cum / total - phi).abs());
        while i < points.len() && points[i].0 == x {
            cum += points[i].1;
            i += 1;
        }
        d = d.max((cum / total - phi).abs());
    }
    d
}

/// Passage times under the `α₀` tilt, which is the conditional law of the
/// path given `τ_u < ∞` up to the weights `exp(−α₀ log Π)`.
pub fn clt_diagnostics(law: &InnovationLaw, u: f64, hits: usize, seed: u64) -> Result<CltDiagnostics> {
    law.validate()?;
    if !(u > 1.0 && u.is_finite()) {
        return Err(Error::Domain(format!("CLT diagnostics need u > 1, got {u}")));
    }
    if hits < 2 {
        return Err(Error::Domain(format!("need at least 2 hits, got {hits}")));
    }
    let profile = cramer_root(law)?;
    let (alpha0, rho0, sigma0) = (profile.alpha0.unwrap(), profile.rho0.unwrap(), profile.sigma0.unwrap());
    let n_max = ruin_horizon(u, rho0, 4)?;
    let sampler = PathSampler::new(law, TiltSchedule::ConstantTilt { s: alpha0, horizon: n_max })?;
    let mut taus: Vec<(f64, f64)> = Vec::with_capacity(hits);
    let mut round = 0u64;
    while taus.len() < hits {
        let need = hits - taus.len();
        let parts = map_batches(need, substream_seed(seed, round), |rng, len| {
            (0..len)
                .filter_map(|_| {
                    let p = sampler.run(u, n_max, rng);
                    p.hit_at().map(|k| (k as f64, p.log_weight))
                })
                .collect::<Vec<_>>()
        });
        taus.extend(parts.into_iter().flatten());
        round += 1;
        if round > 64 {
            return Err(Error::Domain("passage under the Cramér tilt is too rare to collect hits".into()));
        }
    }
    taus.truncate(hits);
    let max_lw = taus.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let weighted: Vec<(f64, f64)> = taus.iter().map(|&(k, lw)| (k, (lw - max_lw).exp())).collect();
    let sw: f64 = weighted.iter().map(|p| p.1).sum();
    let sw2: f64 = weighted.iter().map(|p| p.1 * p.1).sum();
    let mean = weighted.iter().map(|p| p.0 * p.1).sum::<f64>() / sw;
    let var = weighted.iter().map(|p| (p.0 - mean).powi(2) * p.1).sum::<f64>() / sw;
    let log_u = u.ln();
    let centre = log_u / rho0;
    let ks_at = |scale: f64| {
        let denom = scale * rho0.powf(-1.5) * log_u.sqrt();
        let mut pts: Vec<(f64, f64)> = weighted.iter().map(|&(k, w)| ((k - centre) / denom, w)).collect();
        weighted_ks(&mut pts)
    };
    Ok(CltDiagnostics {
        mean_ratio: mean * rho0 / log_u,
        ks_sigma0: ks_at(sigma0),
        ks_var0: ks_at((sigma0 - rho0 * rho0).sqrt()),
        hits: hits as u64,
        ess: sw * sw / sw2,
        n_max,
        tau_sd: var.sqrt(),
    })
}

/// Normalisation `√ρ / (α σ(α) √(2π))` of the constant series.
pub fn series_prefactor(law: &InnovationLaw, alpha: f64) -> Result<f64> {
    let c = law.a.cumulants(alpha)?;
    if !(c.first > 0.0) {
        return Err(Error::Domain(format!("Λ'({alpha}) = {} must be positive", c.first)));
    }
    Ok(c.first.sqrt() / (alpha * c.second.sqrt() * (2.0 * std::f64::consts::PI).sqrt()))
}

/// `c_L = pref · λ(α)^{−L} · E[((Y_{L+1})_+^α − M_L^α)_+]`, the constant
/// for the default [`PassageIndex::Shifted`] convention. Under
/// [`PassageIndex::Floor`] the constant is smaller by a factor `λ(α)`.
///
/// The expectation is homogeneous of degree `α` in `Π_L`, so tilting
/// `A_1, …, A_L` at `α` turns it into `λ(α)^L E_α[((Y_{L+1}/Π_L)_+^α − (M_L/Π_L)^α)_+]`,
/// which is what is sampled. The ratios follow
/// `W_{n+1} = W_n/A_n + B_{n+1}` with `W_n = Y_n/Π_{n−1}`.
pub fn estimate_constant_series(law: &InnovationLaw, alpha: f64, l: u64, samples: usize, seed: u64) -> Result<EstimateRecord> {
    law.validate()?;
    if l > MAX_STEPS {
        return Err(Error::Domain(format!("series depth {l} exceeds {MAX_STEPS}")));
    }
    let pref = series_prefactor(law, alpha)?;
    let tilted = law.a.tilt(alpha)?;
    let b = law.b;
    let rec = accumulate(samples, seed, format!("constant_series(alpha={alpha},L={l})"), |rng, acc| {
        let mut w = b.sample(rng);
        let mut m = w.max(0.0);
        let mut inv_a = 1.0;
        for n in 1..=l {
            inv_a = (-tilted.sample_log(rng)).exp();
            w = w * inv_a + b.sample(rng);
            if n < l {
                m = (m * inv_a).max(w);
            }
        }
        let top = w.max(0.0).powf(alpha);
        let f = if l == 0 { top } else { (top - (m * inv_a).powf(alpha)).max(0.0) };
        acc.push(f);
    })?;
    Ok(rec.scaled(pref))
}

/// `ᾱ` together with the pointwise plan, for reporting.
pub fn pointwise_index(law: &InnovationLaw, rho: f64) -> Result<(f64, f64)> {
    let alpha = solve_alpha(law, rho)?;
    Ok((alpha, alpha_bar(law, alpha)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{ALawSpec, BLawSpec};
    use crate::oracle::{exact_tau_pmf, DiscreteInstance};
    use crate::rng::substream;
    use std::f64::consts::SQRT_2;

    fn ln_law() -> InnovationLaw {
        InnovationLaw { a: ALawSpec::LogNormal { mu: -1.0, sigma: SQRT_2 }, b: BLawSpec::Const { value: 1.0 } }
    }

    fn tp_law() -> InnovationLaw {
        InnovationLaw { a: ALawSpec::TwoPoint { a1: 0.5, p1: 0.75, a2: 2.0 }, b: BLawSpec::Const { value: 1.0 } }
    }

    fn within(est: &EstimateRecord, exact: f64, z: f64) -> bool {
        (est.value - exact).abs() <= z * est.stderr + 1e-15
    }

    #[test]
    fn first_step_passage() {
        let mut rng = substream(1, 0);
        for _ in 0..100 {
            let p = run_path(&ln_law(), &TiltSchedule::Untilted, 0.5, 10, &mut rng).unwrap();
            assert_eq!(p.tau, Passage::Hit(1));
            assert_eq!(p.y_at_stop, 1.0);
            assert_eq!(p.log_weight, 0.0);
        }
    }

    #[test]
    fn events_and_weights_on_paths() {
        let law = ln_law();
        let sched = TiltSchedule::ConstantTilt { s: 1.5, horizon: 40 };
        let lam = law.a.log_mgf(1.5);
        let mut rng = substream(2, 0);
        let sampler = PathSampler::new(&law, sched).unwrap();
        for _ in 0..2000 {
            let p = sampler.run(1e5, 40, &mut rng);
            if let Passage::Hit(k) = p.tau {
                assert!(p.y_at_stop > 1e5 && p.m_prev <= 1e5);
                let expect = (k - 1) as f64 * lam - 1.5 * p.log_pi_at_stop;
                assert!((p.log_weight - expect).abs() < 1e-9 * expect.abs().max(1.0));
            }
        }
    }

    #[test]
    fn schedule_lookup() {
        let s = TiltSchedule::TwoPhase { s1: 3.0, n1: 2, s2: 1.0, n2: 3 };
        let got: Vec<f64> = (1..=7).map(|n| s.tilt_at(n)).collect();
        assert_eq!(got, vec![3.0, 3.0, 1.0, 1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn pointwise_matches_oracle() {
        let law = tp_law();
        let exact = exact_tau_pmf(&DiscreteInstance::from_law(&law, 6, 2.0).unwrap()).unwrap();
        // k_u = ⌊2.5⌋ = 2 for the floor target, 1 for the shifted one
        let rho = 2f64.ln() / 2.5;
        let est = estimate_pointwise_with(&law, rho, 2.0, PassageIndex::Floor, 20_000, 11).unwrap();
        assert!(within(&est, exact.pmf[2], 4.0), "{est:?}");
        let rho = 2f64.ln() / 1.5;
        let est = estimate_pointwise(&law, rho, 2.0, 20_000, 12).unwrap();
        assert!(within(&est, exact.pmf[2], 4.0), "{est:?}");
        let hist = tau_histogram(&law, 2.0, 6, 20_000, 12).unwrap();
        for k in 1..=6 {
            assert!(within(&hist[k - 1], exact.pmf[k], 4.0) || exact.pmf[k] == 0.0 && hist[k - 1].value == 0.0);
        }
    }

    #[test]
    fn one_step_below_b() {
        let law = InnovationLaw { a: ALawSpec::LogNormal { mu: -1.0, sigma: 1.0 }, b: BLawSpec::Exponential { rate: 1.0 } };
        // k_u = ⌊ln 0.5 / ρ⌋ = 1 for ρ = −0.5
        let est = estimate_pointwise_with(&law, -0.5, 0.5, PassageIndex::Floor, 50_000, 3).unwrap();
        assert!(within(&est, (-0.5f64).exp(), 4.0), "{est:?}");
        // k_u = 0 and the shifted target is the first step
        let est = estimate_pointwise(&law, 1.0, 1.5, 50_000, 4).unwrap();
        assert!(within(&est, (-1.5f64).exp(), 4.0), "{est:?}");
    }

    #[test]
    fn pivot_is_unbiased_on_discrete_law() {
        let law = InnovationLaw { a: ALawSpec::TwoPoint { a1: 0.5, p1: 0.75, a2: 2.0 }, b: BLawSpec::TwoPoint { b1: 1.0, p1: 0.5, b2: 1.3 } };
        let inst = DiscreteInstance::from_law(&law, 8, 4.17).unwrap();
        let exact = exact_tau_pmf(&inst).unwrap();
        for (k, pivot) in [(3, 1), (4, 2), (5, 3), (6, 2)] {
            let sched = TiltSchedule::TwoPhase { s1: 1.2, n1: pivot, s2: 0.6, n2: k - pivot };
            let est = estimate_event_pivot(&law, sched, 4.17, k, pivot, 40_000, 7 + k).unwrap();
            assert!(within(&est, exact.pmf[k as usize], 4.0), "k={k} {est:?} vs {}", exact.pmf[k as usize]);
        }
    }

    #[test]
    fn ruin_at_tiny_level() {
        let est = estimate_ruin(&ln_law(), 0.5, 1000, 4, 1).unwrap();
        assert_eq!(est.value, 1.0);
        assert!(matches!(estimate_ruin(&ln_law(), 10.0, 1000, 1, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn ruin_matches_oracle_mass() {
        let law = InnovationLaw { a: ALawSpec::TwoPoint { a1: 0.5, p1: 0.75, a2: 2.0 }, b: BLawSpec::Const { value: 1.0 } };
        let rho0 = cramer_root(&law).unwrap().rho0.unwrap();
        let n_max = ruin_horizon(2.9, rho0, 4).unwrap();
        let exact = exact_tau_pmf(&DiscreteInstance::from_law(&law, n_max as usize, 2.9).unwrap()).unwrap();
        let est = estimate_ruin(&law, 2.9, 40_000, 4, 5).unwrap();
        assert!(within(&est, 1.0 - exact.censored_mass, 4.0), "{est:?} vs {}", 1.0 - exact.censored_mass);
    }

    #[test]
    fn constant_series_degenerate_cases() {
        let zero = InnovationLaw { a: ALawSpec::LogNormal { mu: -1.0, sigma: SQRT_2 }, b: BLawSpec::Const { value: 0.0 } };
        assert_eq!(estimate_constant_series(&zero, 1.5, 5, 1000, 1).unwrap().value, 0.0);
        let law = ln_law();
        let pref = series_prefactor(&law, 1.5).unwrap();
        let c0 = estimate_constant_series(&law, 1.5, 0, 1000, 1).unwrap();
        assert!((c0.value - pref).abs() < 1e-12);
    }

    #[test]
    fn constant_series_matches_plain_monte_carlo() {
        let law = ln_law();
        let (alpha, l) = (1.5, 2u64);
        let tilted = estimate_constant_series(&law, alpha, l, 200_000, 9).unwrap();
        let mut rng = substream(10, 0);
        let n = 400_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let (mut y, mut m, mut pi) = (0.0f64, 0.0f64, 1.0f64);
            for step in 1..=l + 1 {
                y += pi * law.b.sample(&mut rng);
                if step <= l {
                    m = m.max(y);
                    pi *= law.a.sample(&mut rng);
                }
            }
            let f = (y.max(0.0).powf(alpha) - m.powf(alpha)).max(0.0);
            s += f;
            s2 += f * f;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        let scale = series_prefactor(&law, alpha).unwrap() * (-(l as f64) * 0.75).exp();
        let diff = (tilted.value - scale * mean).abs();
        assert!(diff <= 4.0 * (tilted.stderr.powi(2) + (scale * se).powi(2)).sqrt(), "{} vs {}", tilted.value, scale * mean);
    }

    #[test]
    fn weighted_ks_handles_ties() {
        let mut pts = vec![(0.0, 1.0), (0.0, 1.0)];
        assert!((weighted_ks(&mut pts) - 0.5).abs() < 1e-15);
    }
}
