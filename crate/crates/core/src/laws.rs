//! Parametric innovation laws for the pair `(A, B)`.
//!
//! `A` and `B` are independent by construction, so the joint law factors as
//! `f_A(a) da · ν(db)` and any exponential tilt of `A` leaves `B` untouched.
//! Every admitted `A` law has a closed-form moment function `λ(s) = E[A^s]`,
//! closed-form derivatives of `Λ = log λ`, and a closed-form sampler for the
//! tilted law `a^s f_A(a) / λ(s)`.

use crate::error::{Error, Result};
use crate::special::normal_interval;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

/// Law of the multiplier `A > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum ALawSpec {
    /// `log A ~ Normal(mu, sigma²)`.
    #[serde(rename = "lognormal")]
    LogNormal { mu: f64, sigma: f64 },
    /// `A` uniform on `[lo, hi]`, `0 < lo < hi`.
    #[serde(rename = "uniform")]
    UniformInterval { lo: f64, hi: f64 },
    /// `A = a1` with probability `p1`, else `a2`. Lattice: oracle and simulation only.
    #[serde(rename = "twopoint")]
    TwoPoint { a1: f64, p1: f64, a2: f64 },
}

/// Law of the additive term `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum BLawSpec {
    #[serde(rename = "const")]
    Const { value: f64 },
    #[serde(rename = "uniform")]
    UniformInterval { lo: f64, hi: f64 },
    #[serde(rename = "exponential")]
    Exponential { rate: f64 },
    #[serde(rename = "twopoint")]
    TwoPoint { b1: f64, p1: f64, b2: f64 },
}

/// Joint law of `(A, B)` with `A ⊥ B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnovationLaw {
    #[serde(rename = "A")]
    pub a: ALawSpec,
    #[serde(rename = "B")]
    pub b: BLawSpec,
}

/// `(Λ(s), Λ'(s), Λ''(s))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cumulants {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

/// Essential support bounds of both marginals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportExtremes {
    pub a_lo: f64,
    pub a_hi: f64,
    pub b_lo: f64,
    pub b_hi: f64,
    pub has_a_below_1: bool,
    pub has_a_above_1: bool,
}

fn check_tilt(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("moment order must be finite and >= 0, got {s}")))
    }
}

fn check_prob(p: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Config(format!("{what}: probability {p} outside [0, 1]")))
    }
}

/// `x / (e^x - 1)` without cancellation near 0.
fn x_over_expm1(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        x / x.exp_m1()
    }
}

/// `1 - (x/2)² / sinh²(x/2)`, i.e. `x²` times the variance of a unit-free
/// truncated exponential; series near 0.
fn sinh_defect(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x2 / 12.0 - x2 * x2 / 240.0
    } else {
        let h = 0.5 * x;
        let r = h / h.sinh();
        1.0 - r * r
    }
}

impl ALawSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ALawSpec::LogNormal { mu, sigma } => {
                if !mu.is_finite() || !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::Config(format!("lognormal needs finite mu and sigma > 0 (mu={mu}, sigma={sigma})")));
                }
            }
            ALawSpec::UniformInterval { lo, hi } => {
                if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                    return Err(Error::Config(format!("uniform A needs 0 < lo < hi (lo={lo}, hi={hi})")));
                }
            }
            ALawSpec::TwoPoint { a1, p1, a2 } => {
                check_prob(p1, "twopoint A")?;
                if !(a1 > 0.0 && a1 < a2 && a2.is_finite()) {
                    return Err(Error::Config(format!("twopoint A needs 0 < a1 < a2 (a1={a1}, a2={a2})")));
                }
            }
        }
        Ok(())
    }

    /// Lattice laws of `log A` are refused by the sharp large-deviation evaluators.
    pub fn is_lattice(&self) -> bool {
        matches!(self, ALawSpec::TwoPoint { .. })
    }

    /// True when `A` has a Lebesgue density.
    pub fn has_density(&self) -> bool {
        !self.is_lattice()
    }

    /// `λ(s) = E[A^s]`.
    pub fn mgf(&self, s: f64) -> Result<f64> {
        check_tilt(s)?;
        Ok(match *self {
            ALawSpec::LogNormal { mu, sigma } => (mu * s + 0.5 * sigma * sigma * s * s).exp(),
            ALawSpec::UniformInterval { lo, hi } => {
                (hi.powf(s + 1.0) - lo.powf(s + 1.0)) / ((s + 1.0) * (hi - lo))
            }
            ALawSpec::TwoPoint { a1, p1, a2 } => p1 * a1.powf(s) + (1.0 - p1) * a2.powf(s),
        })
    }

    /// `Λ(s)`, `Λ'(s)` and `Λ''(s)` in closed form.
    pub fn cumulants(&self, s: f64) -> Result<Cumulants> {
        check_tilt(s)?;
        Ok(self.cumulants_unchecked(s))
    }

    pub(crate) fn cumulants_unchecked(&self, s: f64) -> Cumulants {
        let mut c = match *self {
            ALawSpec::LogNormal { mu, sigma } => {
                let v = sigma * sigma;
                Cumulants { value: mu * s + 0.5 * v * s * s, first: mu + v * s, second: v }
            }
            ALawSpec::UniformInterval { lo, hi } => {
                let lh = hi.ln();
                let d = lh - lo.ln();
                let m = s + 1.0;
                let x = m * d;
                // log N(s) with N(s) = hi^m - lo^m = hi^m (1 - e^{-x})
                let log_n = m * lh + (-(-x).exp_m1()).ln();
                Cumulants {
                    value: log_n - m.ln() - (hi - lo).ln(),
                    first: lh + (x_over_expm1(x) - 1.0) / m,
                    second: sinh_defect(x) / (m * m),
                }
            }
            ALawSpec::TwoPoint { a1, p1, a2 } => {
                let (l1, l2) = (a1.ln(), a2.ln());
                let w1 = p1.ln() + s * l1;
                let w2 = (1.0 - p1).ln() + s * l2;
                let top = w1.max(w2);
                let value = top + ((w1 - top).exp() + (w2 - top).exp()).ln();
                let q1 = (w1 - value).exp();
                let q2 = (w2 - value).exp();
                let first = q1 * l1 + q2 * l2;
                let second = q1 * (l1 - first).powi(2) + q2 * (l2 - first).powi(2);
                Cumulants { value, first, second }
            }
        };
        if s == 0.0 {
            c.value = 0.0;
        }
        c
    }

    pub(crate) fn log_mgf(&self, s: f64) -> f64 {
        self.cumulants_unchecked(s).value
    }

    /// Supremum of `Λ'` over `s ≥ 0`: `log a_hi` for bounded support, `+∞` otherwise.
    pub fn sup_slope(&self) -> f64 {
        match *self {
            ALawSpec::LogNormal { .. } => f64::INFINITY,
            ALawSpec::UniformInterval { hi, .. } => hi.ln(),
            ALawSpec::TwoPoint { a1, p1, a2 } => {
                if p1 < 1.0 {
                    a2.ln()
                } else {
                    a1.ln()
                }
            }
        }
    }

    /// The law tilted by `a^s / λ(s)`.
    pub fn tilt(&self, s: f64) -> Result<TiltedALaw> {
        check_tilt(s)?;
        let log_normalizer = self.log_mgf(s);
        let param = match *self {
            ALawSpec::LogNormal { mu, sigma } => mu + s * sigma * sigma,
            ALawSpec::UniformInterval { lo, hi } => (s + 1.0) * (lo.ln() - hi.ln()),
            ALawSpec::TwoPoint { a1, p1, .. } => {
                if p1 == 0.0 {
                    0.0
                } else {
                    (p1.ln() + s * a1.ln() - log_normalizer).exp()
                }
            }
        };
        Ok(TiltedALaw { base: *self, s, log_normalizer, param })
    }

    /// Draw `log A`.
    pub fn sample_log<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ALawSpec::LogNormal { mu, sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                mu + sigma * z
            }
            ALawSpec::UniformInterval { lo, hi } => (lo + rng.random::<f64>() * (hi - lo)).ln(),
            ALawSpec::TwoPoint { a1, p1, a2 } => {
                if rng.random::<f64>() < p1 {
                    a1.ln()
                } else {
                    a2.ln()
                }
            }
        }
    }

    /// Draw `A`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ALawSpec::UniformInterval { lo, hi } => lo + rng.random::<f64>() * (hi - lo),
            ALawSpec::TwoPoint { a1, p1, a2 } => {
                if rng.random::<f64>() < p1 {
                    a1
                } else {
                    a2
                }
            }
            ALawSpec::LogNormal { .. } => self.sample_log(rng).exp(),
        }
    }

    /// `P[lo < A ≤ hi]`.
    pub fn interval_prob(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        match *self {
            ALawSpec::LogNormal { mu, sigma } => {
                let z = |a: f64| {
                    if a <= 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        (a.ln() - mu) / sigma
                    }
                };
                normal_interval(z(lo), z(hi))
            }
            ALawSpec::UniformInterval { lo: a, hi: b } => {
                let l = lo.clamp(a, b);
                let h = hi.clamp(a, b);
                (h - l) / (b - a)
            }
            ALawSpec::TwoPoint { a1, p1, a2 } => {
                let mut p = 0.0;
                if lo < a1 && a1 <= hi {
                    p += p1;
                }
                if lo < a2 && a2 <= hi {
                    p += 1.0 - p1;
                }
                p
            }
        }
    }

    /// `(inf supp A, sup supp A)`.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            ALawSpec::LogNormal { .. } => (0.0, f64::INFINITY),
            ALawSpec::UniformInterval { lo, hi } => (lo, hi),
            ALawSpec::TwoPoint { a1, p1, a2 } => {
                if p1 == 1.0 {
                    (a1, a1)
                } else if p1 == 0.0 {
                    (a2, a2)
                } else {
                    (a1, a2)
                }
            }
        }
    }

    /// Sup of `supp A ∩ (0,1)` and inf of `supp A ∩ (1,∞)`, when nonempty.
    pub(crate) fn support_near_one(&self) -> (Option<f64>, Option<f64>) {
        match *self {
            ALawSpec::LogNormal { .. } => (Some(1.0), Some(1.0)),
            ALawSpec::UniformInterval { lo, hi } => {
                (if lo < 1.0 { Some(hi.min(1.0)) } else { None }, if hi > 1.0 { Some(lo.max(1.0)) } else { None })
            }
            ALawSpec::TwoPoint { a1, p1, a2 } => {
                let atoms = [(a1, p1), (a2, 1.0 - p1)];
                let below = atoms.iter().filter(|(a, p)| *p > 0.0 && *a < 1.0).map(|x| x.0).fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))));
                let above = atoms.iter().filter(|(a, p)| *p > 0.0 && *a > 1.0).map(|x| x.0).fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.min(a))));
                (below, above)
            }
        }
    }
}

/// An `A` law reweighted by `a^s / λ(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedALaw {
    pub base: ALawSpec,
    pub s: f64,
    /// `Λ(s)`.
    pub log_normalizer: f64,
    // lognormal: tilted mean; uniform: log of (lo/hi)^{s+1}; twopoint: tilted p1
    param: f64,
}

impl TiltedALaw {
    /// The tilted law when it stays inside the parametric family.
    pub fn in_family(&self) -> Option<ALawSpec> {
        match self.base {
            ALawSpec::LogNormal { sigma, .. } => Some(ALawSpec::LogNormal { mu: self.param, sigma }),
            ALawSpec::TwoPoint { a1, a2, .. } => Some(ALawSpec::TwoPoint { a1, p1: self.param, a2 }),
            ALawSpec::UniformInterval { .. } if self.s == 0.0 => Some(self.base),
            ALawSpec::UniformInterval { .. } => None,
        }
    }

    /// Draw `log A` under the tilted law.
    pub fn sample_log<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.base {
            ALawSpec::LogNormal { sigma, .. } => {
                let z: f64 = StandardNormal.sample(rng);
                self.param + sigma * z
            }
            ALawSpec::UniformInterval { hi, .. } => {
                // inverse of F(a) = (a^{s+1} - lo^{s+1}) / (hi^{s+1} - lo^{s+1})
                let r = self.param.exp();
                let v = rng.random::<f64>();
                hi.ln() + (r + v * (1.0 - r)).ln() / (self.s + 1.0)
            }
            ALawSpec::TwoPoint { a1, a2, .. } => {
                if rng.random::<f64>() < self.param {
                    a1.ln()
                } else {
                    a2.ln()
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_log(rng).exp()
    }

    /// Log of the likelihood ratio `dP/dP_s` at `log a`: `Λ(s) - s·log a`.
    pub fn log_weight(&self, log_a: f64) -> f64 {
        if self.s == 0.0 {
            0.0
        } else {
            self.log_normalizer - self.s * log_a
        }
    }
}

impl BLawSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BLawSpec::Const { value } if !value.is_finite() => Err(Error::Config("const B must be finite".into())),
            BLawSpec::UniformInterval { lo, hi } if !(lo < hi && lo.is_finite() && hi.is_finite()) => {
                Err(Error::Config(format!("uniform B needs lo < hi (lo={lo}, hi={hi})")))
            }
            BLawSpec::Exponential { rate } if !(rate > 0.0 && rate.is_finite()) => {
                Err(Error::Config(format!("exponential B needs rate > 0, got {rate}")))
            }
            BLawSpec::TwoPoint { b1, p1, b2 } => {
                check_prob(p1, "twopoint B")?;
                if b1.is_finite() && b2.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config("twopoint B atoms must be finite".into()))
                }
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            BLawSpec::Const { value } => value,
            BLawSpec::UniformInterval { lo, hi } => lo + rng.random::<f64>() * (hi - lo),
            BLawSpec::Exponential { rate } => {
                let e: f64 = Exp1.sample(rng);
                e / rate
            }
            BLawSpec::TwoPoint { b1, p1, b2 } => {
                if rng.random::<f64>() < p1 {
                    b1
                } else {
                    b2
                }
            }
        }
    }

    /// `(inf supp B, sup supp B)`.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            BLawSpec::Const { value } => (value, value),
            BLawSpec::UniformInterval { lo, hi } => (lo, hi),
            BLawSpec::Exponential { .. } => (0.0, f64::INFINITY),
            BLawSpec::TwoPoint { b1, p1, b2 } => {
                if p1 == 1.0 {
                    (b1, b1)
                } else if p1 == 0.0 {
                    (b2, b2)
                } else {
                    (b1.min(b2), b1.max(b2))
                }
            }
        }
    }

    /// `B > 0` almost surely.
    pub fn is_positive(&self) -> bool {
        match *self {
            BLawSpec::Exponential { .. } => true,
            BLawSpec::UniformInterval { lo, .. } => lo >= 0.0,
            _ => self.support().0 > 0.0,
        }
    }

    /// `E|B|^s < ∞` for every finite `s`: all variants are bounded or exponentially tailed.
    pub fn all_moments_finite(&self) -> bool {
        true
    }
}

impl InnovationLaw {
    pub fn new(a: ALawSpec, b: BLawSpec) -> Result<Self> {
        let law = InnovationLaw { a, b };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        self.a.validate()?;
        self.b.validate()
    }

    pub fn support_extremes(&self) -> SupportExtremes {
        let (a_lo, a_hi) = self.a.support();
        let (b_lo, b_hi) = self.b.support();
        let (below, above) = self.a.support_near_one();
        SupportExtremes { a_lo, a_hi, b_lo, b_hi, has_a_below_1: below.is_some(), has_a_above_1: above.is_some() }
    }
}
