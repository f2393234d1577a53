//! Exact law of the passage time for a two-point multiplier, checked against
//! naive and tilted simulation.
//!
//! ```bash
//! cargo run --release --example oracle_enumeration
//! ```

use perpetuity::engine::{estimate_pointwise_with, tau_histogram, PassageIndex};
use perpetuity::oracle::{exact_tau_pmf, DiscreteInstance};
use perpetuity::{ALawSpec, BLawSpec, InnovationLaw};

fn main() -> perpetuity::Result<()> {
    let law = InnovationLaw::new(ALawSpec::TwoPoint { a1: 0.5, p1: 0.75, a2: 2.0 }, BLawSpec::Const { value: 1.0 })?;
    let (u, n_max) = (2.9, 12);
    let exact = exact_tau_pmf(&DiscreteInstance::from_law(&law, n_max, u)?)?;
    let naive = tau_histogram(&law, u, n_max as u64, 1_000_000, 3)?;

    println!("u = {u}, censored mass beyond {n_max}: {:.4e}", exact.censored_mass);
    println!("{:>3} {:>12} {:>12} {:>12}", "k", "exact", "naive", "tilted");
    for k in 1..=n_max {
        let rho = u.ln() / (k as f64 - 0.5);
        let tilted = estimate_pointwise_with(&law, rho, u, PassageIndex::Shifted, 100_000, 4)
            .map(|r| format!("{:.4e}", r.value))
            .unwrap_or_else(|_| "-".into());
        println!("{k:>3} {:>12.4e} {:>12.4e} {tilted:>12}", exact.pmf[k], naive[k - 1].value);
    }
    Ok(())
}
