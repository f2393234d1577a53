//! One tilted estimate of `P[τ_u = k]` with its plan and diagnostics.
//!
//! ```bash
//! cargo run --release --example pointwise_estimate
//! ```

use perpetuity::asymptotics::normalize_pointwise;
use perpetuity::engine::{estimate_event, pointwise_plan, PassageIndex};
use perpetuity::{ALawSpec, BLawSpec, InnovationLaw};

fn main() -> perpetuity::Result<()> {
    let law = InnovationLaw::new(
        ALawSpec::LogNormal { mu: -1.0, sigma: std::f64::consts::SQRT_2 },
        BLawSpec::Const { value: 1.0 },
    )?;
    let (rho, u) = (2.0, 15f64.exp());
    for index in [PassageIndex::Shifted, PassageIndex::Floor] {
        let plan = pointwise_plan(&law, rho, u, index)?;
        let est = estimate_event(&law, plan.schedule, u, plan.step, 200_000, 42)?;
        println!("{index:?}: k_u = {}, target tau = {}, schedule {}", plan.k_u, plan.step, plan.schedule);
        println!(
            "  p = {:.4e} ± {:.1e}, ess {:.0}, c_hat = {:.4}",
            est.value,
            est.stderr,
            est.ess,
            normalize_pointwise(est.value, u, &law, plan.alpha, rho)?
        );
        for w in &plan.warnings {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
