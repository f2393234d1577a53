//! Grid experiments: normalised constants over a range of levels `u` and a
//! weighted log-log regression on them.

use crate::cgf::{alpha_bar, cramer_root, solve_alpha};
use crate::engine::{
    estimate_event, estimate_pointwise_twophase_with, estimate_pointwise_with, estimate_ruin, pointwise_plan, PassageIndex,
    TiltSchedule,
};
use crate::error::{Error, Result};
use crate::estimate::EstimateRecord;
use crate::laws::InnovationLaw;
use crate::rng::substream_seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Rows with fewer effective samples are left out of the fit.
pub const MIN_ESS: f64 = 100.0;
pub const MIN_GRID_POINTS: usize = 6;
pub const CSV_HEADER: &str = "u,k_u,theta,p_hat,stderr,ess,c_hat";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeTag {
    Thm1,
    Thm2,
    Kg,
}

/// Estimator used at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    Tilted,
    Twophase { beta: f64 },
    Naive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub u: f64,
    pub k_u: u64,
    pub theta: f64,
    pub p_hat: f64,
    pub stderr: f64,
    pub ess: f64,
    pub c_hat: f64,
    /// Left out of the fit for low effective sample size.
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub rows: Vec<GridRow>,
    pub slope: f64,
    pub slope_ci: (f64, f64),
    pub c_mean: f64,
    pub c_rel_spread: f64,
    pub regime_tag: RegimeTag,
}

/// Summary written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub slope: f64,
    pub slope_ci_lo: f64,
    pub slope_ci_hi: f64,
    pub c_mean: f64,
    pub c_rel_spread: f64,
    pub regime_tag: RegimeTag,
}

impl GridReport {
    pub fn summary(&self) -> GridSummary {
        GridSummary {
            slope: self.slope,
            slope_ci_lo: self.slope_ci.0,
            slope_ci_hi: self.slope_ci.1,
            c_mean: self.c_mean,
            c_rel_spread: self.c_rel_spread,
            regime_tag: self.regime_tag,
        }
    }

    pub fn excluded_count(&self) -> usize {
        self.rows.iter().filter(|r| r.excluded).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{},{},{}\n", r.u, r.k_u, r.theta, r.p_hat, r.stderr, r.ess, r.c_hat));
        }
        out
    }
}

/// `points` levels equally spaced in `log u` from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Config(format!("grid needs 0 < lo < hi < ∞ (lo={lo}, hi={hi})")));
    }
    if points < 2 {
        return Err(Error::Config(format!("grid needs at least 2 points, got {points}")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect())
}

/// `ĉ = p̂ · √log u · u^ᾱ · λ(α)^Θ`, `Θ = log u/ρ − ⌊log u/ρ⌋`.
pub fn normalize_pointwise(p_hat: f64, u: f64, law: &InnovationLaw, alpha: f64, rho: f64) -> Result<f64> {
    let abar = alpha_bar(law, alpha)?;
    let lam = law.a.cumulants(alpha)?.value;
    let log_u = u.ln();
    let theta = fractional(log_u / rho);
    Ok((p_hat.ln() + 0.5 * log_u.ln() + abar * log_u + theta * lam).exp())
}

fn fractional(x: f64) -> f64 {
    x - x.floor()
}

fn row_from(u: f64, k_u: u64, theta: f64, est: &EstimateRecord, c_hat: f64) -> GridRow {
    GridRow {
        u,
        k_u,
        theta,
        p_hat: est.value,
        stderr: est.stderr,
        ess: est.ess,
        c_hat,
        excluded: !(est.ess >= MIN_ESS),
    }
}

/// Weighted least squares of `log ĉ` on `log u` over the included rows.
///
/// Weights are inverse squared relative standard errors (equal weights when
/// any is zero); the slope interval uses the residual variance and a
/// Student-t quantile on `n − 2` degrees of freedom.
pub fn fit_rows(rows: Vec<GridRow>, regime_tag: RegimeTag) -> GridReport {
    let used: Vec<&GridRow> = rows.iter().filter(|r| !r.excluded && r.c_hat > 0.0 && r.c_hat.is_finite()).collect();
    let nan = GridReport {
        rows: rows.clone(),
        slope: f64::NAN,
        slope_ci: (f64::NAN, f64::NAN),
        c_mean: f64::NAN,
        c_rel_spread: f64::NAN,
        regime_tag,
    };
    if used.is_empty() {
        return nan;
    }
    let c_mean = used.iter().map(|r| r.c_hat).sum::<f64>() / used.len() as f64;
    let c_max = used.iter().map(|r| r.c_hat).fold(f64::NEG_INFINITY, f64::max);
    let c_min = used.iter().map(|r| r.c_hat).fold(f64::INFINITY, f64::min);
    let c_rel_spread = (c_max - c_min) / c_mean;
    if used.len() < 3 {
        return GridReport { c_mean, c_rel_spread, ..nan };
    }
    let xs: Vec<f64> = used.iter().map(|r| r.u.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|r| r.c_hat.ln()).collect();
    let rel: Vec<f64> = used.iter().map(|r| r.stderr / r.p_hat).collect();
    let ws: Vec<f64> = if rel.iter().all(|&e| e > 0.0 && e.is_finite()) {
        rel.iter().map(|e| 1.0 / (e * e)).collect()
    } else {
        vec![1.0; used.len()]
    };
    let sw: f64 = ws.iter().sum();
    let xbar = ws.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ybar = ws.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = ws.iter().zip(&xs).map(|(w, x)| w * (x - xbar).powi(2)).sum();
    let sxy: f64 = ws.iter().zip(xs.iter().zip(&ys)).map(|(w, (x, y))| w * (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let df = (used.len() - 2) as f64;
    let rss: f64 = ws.iter().zip(xs.iter().zip(&ys)).map(|(w, (x, y))| w * (y - intercept - slope * x).powi(2)).sum();
    let se = (rss / df / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, df).map(|d| d.inverse_cdf(0.975)).unwrap_or(f64::NAN);
    GridReport { rows, slope, slope_ci: (slope - t * se, slope + t * se), c_mean, c_rel_spread, regime_tag }
}

/// Pointwise grid: one estimator call per level, each with its own derived seed.
pub fn run_grid(
    law: &InnovationLaw,
    rho: f64,
    u_grid: &[f64],
    samples_per_point: usize,
    method: Method,
    seed: u64,
) -> Result<GridReport> {
    run_grid_with(law, rho, u_grid, samples_per_point, method, PassageIndex::default(), seed)
}

pub fn run_grid_with(
    law: &InnovationLaw,
    rho: f64,
    u_grid: &[f64],
    samples_per_point: usize,
    method: Method,
    index: PassageIndex,
    seed: u64,
) -> Result<GridReport> {
    check_grid(u_grid)?;
    let alpha = solve_alpha(law, rho)?;
    let rows = u_grid
        .par_iter()
        .enumerate()
        .map(|(i, &u)| {
            let s = substream_seed(seed, i as u64);
            let plan = pointwise_plan(law, rho, u, index)?;
            let est = match method {
                Method::Tilted => estimate_pointwise_with(law, rho, u, index, samples_per_point, s)?,
                Method::Twophase { beta } => estimate_pointwise_twophase_with(law, rho, beta, u, index, samples_per_point, s)?,
                Method::Naive => estimate_event(law, TiltSchedule::Untilted, u, plan.step, samples_per_point, s)?,
            };
            let k_u = plan.k_u;
            let theta = fractional(u.ln() / rho);
            let c_hat = normalize_pointwise(est.value, u, law, alpha, rho)?;
            Ok(row_from(u, k_u, theta, &est, c_hat))
        })
        .collect::<Result<Vec<_>>>()?;
    let tag = match method {
        Method::Twophase { .. } => RegimeTag::Thm2,
        _ => RegimeTag::Thm1,
    };
    Ok(fit_rows(rows, tag))
}

/// Ruin grid with `ĉ₀ = P̂[τ_u < ∞] u^{α₀}`; `k_u` and `Θ` use `ρ₀`.
pub fn kesten_goldie_grid(law: &InnovationLaw, u_grid: &[f64], samples: usize, seed: u64) -> Result<GridReport> {
    check_grid(u_grid)?;
    let profile = cramer_root(law)?;
    let (alpha0, rho0) = (profile.alpha0.unwrap(), profile.rho0.unwrap());
    let rows = u_grid
        .par_iter()
        .enumerate()
        .map(|(i, &u)| {
            let est = estimate_ruin(law, u, samples, 4, substream_seed(seed, i as u64))?;
            let x = u.ln() / rho0;
            let k_u = x.floor().max(0.0) as u64;
            let c_hat = (est.value.ln() + alpha0 * u.ln()).exp();
            Ok(row_from(u, k_u, fractional(x), &est, c_hat))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fit_rows(rows, RegimeTag::Kg))
}

fn check_grid(u_grid: &[f64]) -> Result<()> {
    if u_grid.len() < MIN_GRID_POINTS {
        return Err(Error::Config(format!("grid needs at least {MIN_GRID_POINTS} points, got {}", u_grid.len())));
    }
    if u_grid.iter().any(|&u| !(u > 0.0 && u.is_finite())) || u_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("grid levels must be positive, finite and increasing".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{ALawSpec, BLawSpec};
    use std::f64::consts::SQRT_2;

    fn ln_law() -> InnovationLaw {
        InnovationLaw { a: ALawSpec::LogNormal { mu: -1.0, sigma: SQRT_2 }, b: BLawSpec::Const { value: 1.0 } }
    }

    fn synthetic(c: f64, delta: f64) -> Vec<GridRow> {
        let law = ln_law();
        let (alpha, rho, abar, lam) = (1.5, 2.0, 1.125, 0.75);
        geometric_grid(8f64.exp(), 20f64.exp(), 10)
            .unwrap()
            .into_iter()
            .map(|u| {
                let lu: f64 = u.ln();
                let theta = fractional(lu / rho);
                let p = c * (-theta * lam).exp() * u.powf(-abar + delta) / lu.sqrt();
                let c_hat = normalize_pointwise(p, u, &law, alpha, rho).unwrap();
                GridRow { u, k_u: (lu / rho) as u64, theta, p_hat: p, stderr: 0.01 * p, ess: 1e4, c_hat, excluded: false }
            })
            .collect()
    }

    #[test]
    fn normalisation_inverts() {
        let law = ln_law();
        let u = (10.6f64).exp();
        let c = 0.37;
        let p = c * (-0.3 * 0.75f64).exp() * u.powf(-1.125) / u.ln().sqrt();
        let back = normalize_pointwise(p, u, &law, 1.5, 2.0).unwrap();
        assert!((back / c - 1.0).abs() < 1e-12);
        let (theta, factor) = (fractional(10.6 / 2.0), (0.3f64 * 0.75).exp());
        assert!((theta - 0.3).abs() < 1e-12 && (factor - 0.225f64.exp()).abs() < 1e-15);
        let v = (12.0f64).exp();
        let q = c * v.powf(-1.125) / v.ln().sqrt();
        assert!((normalize_pointwise(q, v, &law, 1.5, 2.0).unwrap() / c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn synthetic_constant_fit() {
        let rep = fit_rows(synthetic(0.42, 0.0), RegimeTag::Thm1);
        assert!(rep.slope.abs() < 1e-12, "{}", rep.slope);
        assert!((rep.c_mean / 0.42 - 1.0).abs() < 1e-12);
        assert!(rep.c_rel_spread < 1e-12);
    }

    #[test]
    fn synthetic_growth_fit() {
        let rep = fit_rows(synthetic(0.42, 0.2), RegimeTag::Thm2);
        assert!((rep.slope - 0.2).abs() < 1e-12, "{}", rep.slope);
    }

    #[test]
    fn refit_is_reproducible() {
        let rows = synthetic(1.0, 0.05);
        let a = fit_rows(rows.clone(), RegimeTag::Thm1);
        let b = fit_rows(a.rows.clone(), RegimeTag::Thm1);
        assert_eq!(a.slope.to_bits(), b.slope.to_bits());
        assert_eq!(a.c_rel_spread.to_bits(), b.c_rel_spread.to_bits());
    }

    #[test]
    fn excluded_rows_are_skipped() {
        let mut rows = synthetic(1.0, 0.0);
        rows[3].c_hat *= 10.0;
        rows[3].excluded = true;
        let rep = fit_rows(rows, RegimeTag::Thm1);
        assert!(rep.slope.abs() < 1e-12);
        assert_eq!(rep.excluded_count(), 1);
    }

    #[test]
    fn csv_header_and_rows() {
        let rep = fit_rows(synthetic(1.0, 0.0), RegimeTag::Thm1);
        let csv = rep.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.count(), 10);
        let js = serde_json::to_value(rep.summary()).unwrap();
        assert_eq!(js["regime_tag"], "thm1");
    }

    #[test]
    fn grid_preconditions() {
        let law = ln_law();
        let short = geometric_grid(10.0, 100.0, 4).unwrap();
        assert!(matches!(run_grid(&law, 2.0, &short, 100, Method::Tilted, 1), Err(Error::Config(_))));
        let g = geometric_grid(1.0, 8.0, 4).unwrap();
        assert!((g[1] - 2.0).abs() < 1e-12 && (g[3] - 8.0).abs() < 1e-12);
    }
}
