//! Exact brute-force enumeration for small discrete instances.
//!
//! Ties `Y_k = u` count as non-exceedance, matching the strict inequality
//! in `τ_u = inf{n : Y_n > u}`. `Π` is carried in log space.

use crate::error::{Error, Result};
use crate::laws::{ALawSpec, BLawSpec, InnovationLaw};
use serde::{Deserialize, Serialize};

/// Maximum number of enumerated paths.
pub const PATH_CAP: f64 = 1e8;
pub const MAX_DEPTH: usize = 22;

/// Finite-atom `(A, B)` instance with passage level `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteInstance {
    pub a_atoms: Vec<(f64, f64)>,
    pub b_atoms: Vec<(f64, f64)>,
    pub n_max: usize,
    pub u: f64,
}

/// Exact law of `τ_u` truncated at `n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauPmf {
    /// `pmf[k] = P[τ_u = k]`; index 0 is always 0.
    pub pmf: Vec<f64>,
    /// `P[τ_u > n_max]`.
    pub censored_mass: f64,
}

impl TauPmf {
    /// `k,prob` rows for `k = 1..=n_max`, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,prob\n");
        for (k, p) in self.pmf.iter().enumerate().skip(1) {
            out.push_str(&format!("{k},{p}\n"));
        }
        out
    }
}

fn check_atoms(atoms: &[(f64, f64)], what: &str, positive: bool) -> Result<()> {
    if atoms.is_empty() {
        return Err(Error::Config(format!("{what}: no atoms")));
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > 1e-12 || atoms.iter().any(|a| !(a.1 >= 0.0)) {
        return Err(Error::Config(format!("{what}: probabilities must be nonnegative and sum to 1 (sum = {total})")));
    }
    if atoms.iter().any(|a| !a.0.is_finite() || (positive && a.0 <= 0.0)) {
        return Err(Error::Config(format!("{what}: atom values must be finite{}", if positive { " and positive" } else { "" })));
    }
    Ok(())
}

fn guard(branching: usize, depth: usize) -> Result<()> {
    let paths = (branching as f64).powi(depth as i32);
    if paths > PATH_CAP {
        return Err(Error::Guard(format!("{branching}^{depth} = {paths:.3e} paths exceeds {PATH_CAP:.0e}")));
    }
    Ok(())
}

impl DiscreteInstance {
    pub fn validate(&self) -> Result<()> {
        check_atoms(&self.a_atoms, "a_atoms", true)?;
        check_atoms(&self.b_atoms, "b_atoms", false)?;
        if self.n_max == 0 || self.n_max > MAX_DEPTH {
            return Err(Error::Config(format!("n_max must be in 1..={MAX_DEPTH}, got {}", self.n_max)));
        }
        if !(self.u > 0.0) {
            return Err(Error::Config(format!("u must be positive, got {}", self.u)));
        }
        guard(self.a_atoms.len() * self.b_atoms.len(), self.n_max)
    }

    /// Discrete instance matching a law built from two-point or constant marginals.
    pub fn from_law(law: &InnovationLaw, n_max: usize, u: f64) -> Result<Self> {
        let a_atoms = match law.a {
            ALawSpec::TwoPoint { a1, p1, a2 } => vec![(a1, p1), (a2, 1.0 - p1)],
            _ => return Err(Error::Domain("only two-point A laws are enumerable".into())),
        };
        let b_atoms = match law.b {
            BLawSpec::Const { value } => vec![(value, 1.0)],
            BLawSpec::TwoPoint { b1, p1, b2 } => vec![(b1, p1), (b2, 1.0 - p1)],
            _ => return Err(Error::Domain("only constant or two-point B laws are enumerable".into())),
        };
        let inst = DiscreteInstance { a_atoms, b_atoms, n_max, u };
        inst.validate()?;
        Ok(inst)
    }
}

struct TauWalker<'a> {
    inst: &'a DiscreteInstance,
    log_a: Vec<(f64, f64)>,
    pmf: Vec<f64>,
    censored: f64,
}

impl TauWalker<'_> {
    fn descend(&mut self, depth: usize, log_pi: f64, y: f64, prob: f64) {
        let scale = log_pi.exp();
        for bi in 0..self.inst.b_atoms.len() {
            let (b, pb) = self.inst.b_atoms[bi];
            let p = prob * pb;
            if p == 0.0 {
                continue;
            }
            let y_next = y + scale * b;
            if y_next > self.inst.u {
                self.pmf[depth] += p;
            } else if depth == self.inst.n_max {
                self.censored += p;
            } else {
                for ai in 0..self.log_a.len() {
                    let (la, pa) = self.log_a[ai];
                    self.descend(depth + 1, log_pi + la, y_next, p * pa);
                }
            }
        }
    }
}

/// Exact `P[τ_u = k]` for `k ≤ n_max` by depth-first enumeration with
/// first-exceedance pruning.
pub fn exact_tau_pmf(inst: &DiscreteInstance) -> Result<TauPmf> {
    inst.validate()?;
    let mut w = TauWalker {
        inst,
        log_a: inst.a_atoms.iter().map(|&(a, p)| (a.ln(), p)).collect(),
        pmf: vec![0.0; inst.n_max + 1],
        censored: 0.0,
    };
    w.descend(1, 0.0, 0.0, 1.0);
    Ok(TauPmf { pmf: w.pmf, censored_mass: w.censored })
}

/// Exact `P[Π_n > t]` summed over multinomial type classes.
pub fn exact_walk_tail(a_atoms: &[(f64, f64)], n: usize, t: f64) -> Result<f64> {
    check_atoms(a_atoms, "a_atoms", true)?;
    guard(a_atoms.len(), n)?;
    let log_t = t.ln();
    let tie = 1e-12 * log_t.abs().max(1.0);
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    let logs: Vec<(f64, f64)> = a_atoms.iter().map(|&(a, p)| (a.ln(), p.ln())).collect();
    let mut counts = vec![0usize; logs.len()];
    let mut total = 0.0;
    fn visit(
        i: usize,
        left: usize,
        counts: &mut [usize],
        logs: &[(f64, f64)],
        ln_fact: &[f64],
        n: usize,
        log_t: f64,
        tie: f64,
        total: &mut f64,
    ) {
        if i + 1 == logs.len() {
            counts[i] = left;
            let mut log_pi = 0.0;
            let mut log_p = ln_fact[n];
            for (c, &(la, lp)) in counts.iter().zip(logs) {
                if *c > 0 {
                    log_pi += *c as f64 * la;
                    log_p += *c as f64 * lp - ln_fact[*c];
                }
            }
            if log_pi > log_t + tie {
                *total += log_p.exp();
            }
            return;
        }
        for c in 0..=left {
            counts[i] = c;
            visit(i + 1, left - c, counts, logs, ln_fact, n, log_t, tie, total);
        }
    }
    visit(0, n, &mut counts, &logs, &ln_fact, n, log_t, tie, &mut total);
    Ok(total.min(1.0))
}

/// Exact `P[M_{k−1} ≤ u < Y_k]` with `M_n = max{0, Y_1, …, Y_n}`, by full
/// enumeration of length-`k` paths (no pruning).
pub fn exact_event_prob(inst: &DiscreteInstance, k: usize) -> Result<f64> {
    check_atoms(&inst.a_atoms, "a_atoms", true)?;
    check_atoms(&inst.b_atoms, "b_atoms", false)?;
    if k == 0 {
        return Ok(0.0);
    }
    guard(inst.a_atoms.len() * inst.b_atoms.len(), k)?;
    fn step(inst: &DiscreteInstance, k: usize, depth: usize, pi: f64, y: f64, m: f64, prob: f64) -> f64 {
        let mut acc = 0.0;
        for &(b, pb) in &inst.b_atoms {
            let y_next = y + pi * b;
            if depth == k {
                if m <= inst.u && y_next > inst.u {
                    acc += prob * pb;
                }
            } else {
                for &(a, pa) in &inst.a_atoms {
                    acc += step(inst, k, depth + 1, pi * a, y_next, m.max(y_next), prob * pb * pa);
                }
            }
        }
        acc
    }
    Ok(step(inst, k, 1, 1.0, 0.0, 0.0, 1.0))
}
