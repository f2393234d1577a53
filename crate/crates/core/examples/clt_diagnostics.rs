//! Conditional law of `τ_u` given ruin: mean ratio and Kolmogorov–Smirnov
//! distances for two candidate normal scales.
//!
//! ```bash
//! cargo run --release --example clt_diagnostics
//! ```

use perpetuity::engine::clt_diagnostics;
use perpetuity::{ALawSpec, BLawSpec, InnovationLaw};

fn main() -> perpetuity::Result<()> {
    let law = InnovationLaw::new(
        ALawSpec::LogNormal { mu: -1.0, sigma: std::f64::consts::SQRT_2 },
        BLawSpec::Const { value: 1.0 },
    )?;
    for log_u in [10.0f64, 20.0, 30.0] {
        let d = clt_diagnostics(&law, log_u.exp(), 10_000, 8)?;
        println!(
            "log u {log_u:>4}: mean ratio {:.4}, ks(sqrt sigma0) {:.4}, ks(sqrt(sigma0 - rho0^2)) {:.4}, ess {:.0}",
            d.mean_ratio, d.ks_sigma0, d.ks_var0, d.ess
        );
    }
    Ok(())
}
