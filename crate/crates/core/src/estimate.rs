//! Weighted-mean estimates built from pooled sufficient statistics.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Running sums of per-path contributions `w` (weighted indicators).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    pub n: u64,
    pub sum_w: f64,
    pub sum_w2: f64,
    pub sum_censored: f64,
    pub overflows: u64,
}

impl Accumulator {
    #[inline]
    pub fn push(&mut self, w: f64) {
        self.n += 1;
        self.sum_w += w;
        self.sum_w2 += w * w;
    }

    pub fn absorb(&mut self, other: &Accumulator) {
        self.n += other.n;
        self.sum_w += other.sum_w;
        self.sum_w2 += other.sum_w2;
        self.sum_censored += other.sum_censored;
        self.overflows += other.overflows;
    }

    /// Folds batch accumulators in order.
    pub fn fold(parts: &[Accumulator]) -> Accumulator {
        let mut acc = Accumulator::default();
        for p in parts {
            acc.absorb(p);
        }
        acc
    }

    pub fn into_record(self, target: impl Into<String>) -> EstimateRecord {
        let n = self.n as f64;
        let value = if self.n > 0 { self.sum_w / n } else { 0.0 };
        let stderr = if self.n > 1 {
            ((self.sum_w2 - self.sum_w * self.sum_w / n).max(0.0) / (n * (n - 1.0))).sqrt()
        } else {
            f64::NAN
        };
        let ess = if self.sum_w2 > 0.0 { (self.sum_w * self.sum_w / self.sum_w2).min(n) } else { 0.0 };
        EstimateRecord {
            value,
            stderr,
            n_samples: self.n,
            ess,
            censored_weight: if self.n > 0 { self.sum_censored / n } else { 0.0 },
            sum_w: self.sum_w,
            sum_w2: self.sum_w2,
            sum_censored: self.sum_censored,
            overflows: self.overflows,
            target: target.into(),
        }
    }
}

/// Importance-sampling estimate of one probability or expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: u64,
    /// `(Σw)² / Σw²`.
    pub ess: f64,
    /// Weighted mass of paths that hit the step cap unresolved.
    pub censored_weight: f64,
    pub sum_w: f64,
    pub sum_w2: f64,
    pub sum_censored: f64,
    /// Paths whose `Y` left the floating range (counted as exceedances).
    pub overflows: u64,
    /// Identifies estimand and schedule; merging requires equality.
    pub target: String,
}

impl EstimateRecord {
    fn accumulator(&self) -> Accumulator {
        Accumulator {
            n: self.n_samples,
            sum_w: self.sum_w,
            sum_w2: self.sum_w2,
            sum_censored: self.sum_censored,
            overflows: self.overflows,
        }
    }

    /// Rescales every contribution by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> EstimateRecord {
        let mut acc = self.accumulator();
        acc.sum_w *= factor;
        acc.sum_w2 *= factor * factor;
        acc.sum_censored *= factor;
        acc.into_record(self.target.clone())
    }
}

/// Pools records of the same target drawn from disjoint streams.
pub fn merge(records: &[EstimateRecord]) -> Result<EstimateRecord> {
    let first = records.first().ok_or_else(|| Error::MixedTarget("nothing to merge".into()))?;
    let mut acc = Accumulator::default();
    for r in records {
        if r.target != first.target {
            return Err(Error::MixedTarget(format!("'{}' vs '{}'", first.target, r.target)));
        }
        acc.absorb(&r.accumulator());
    }
    Ok(acc.into_record(first.target.clone()))
}
