//! Large-deviation analytics and rare-event Monte Carlo for the first
//! passage times of perpetuity sequences
//! `Y_n = B₁ + A₁B₂ + ⋯ + (A₁⋯A_{n−1})B_n`.
//!
//! The pointwise probability `P[τ_u = k_u + 1]`, `k_u = ⌊log u/ρ⌋`, of the
//! passage time `τ_u = inf{n : Y_n > u}` decays like `u^{−ᾱ}/√log u` up to a bounded
//! oscillating factor, where `ᾱ` is read off the cumulant function
//! `Λ(s) = log E[A^s]`. This crate computes those indices, approximates
//! the multiplicative walk tails behind them, and estimates the
//! probabilities themselves by exponentially tilted simulation checked
//! against exact enumeration.
//!
//! ```
//! use perpetuity::{laws::*, cgf};
//!
//! let law = InnovationLaw::new(
//!     ALawSpec::LogNormal { mu: -1.0, sigma: std::f64::consts::SQRT_2 },
//!     BLawSpec::Const { value: 1.0 },
//! ).unwrap();
//! let alpha = cgf::solve_alpha(&law, 2.0).unwrap();
//! assert!((alpha - 1.5).abs() < 1e-9);
//! assert!((cgf::alpha_bar(&law, alpha).unwrap() - 1.125).abs() < 1e-9);
//! ```

pub mod asymptotics;
pub mod cgf;
pub mod cli;
pub mod engine;
pub mod error;
pub mod estimate;
pub mod laws;
pub mod oracle;
pub mod rng;
pub mod special;
pub mod walk_ldp;

pub use error::{Error, Result};
pub use estimate::{merge, EstimateRecord};
pub use laws::{ALawSpec, BLawSpec, InnovationLaw};
