//! Cumulant constants and theorem hypotheses for a log-normal multiplier.
//!
//! ```bash
//! cargo run --example cumulant_profile
//! ```

use perpetuity::cgf::{alpha_bar, cramer_root, hypothesis_report, rate_i, solve_alpha};
use perpetuity::{ALawSpec, BLawSpec, InnovationLaw};

fn main() -> perpetuity::Result<()> {
    let law = InnovationLaw::new(
        ALawSpec::LogNormal { mu: -1.0, sigma: std::f64::consts::SQRT_2 },
        BLawSpec::Const { value: 1.0 },
    )?;
    let profile = cramer_root(&law)?;
    println!("E log A = {:.4}", profile.e_log_a);
    println!("alpha_min = {:?}", profile.alpha_min);
    println!("alpha0 = {:?}, rho0 = {:?}, sigma0 = {:?}", profile.alpha0, profile.rho0, profile.sigma0);

    println!("\n{:>5} {:>8} {:>8} {:>8}", "rho", "alpha", "abar", "I(rho)");
    for rho in [0.5, 1.0, 2.0, 4.0] {
        let alpha = solve_alpha(&law, rho)?;
        println!("{rho:>5} {alpha:>8.4} {:>8.4} {:>8.4}", alpha_bar(&law, alpha)?, rate_i(&law, rho)?);
    }

    let report = hypothesis_report(&law, 1.5)?;
    println!("\n{}", serde_json::to_string_pretty(&report).expect("report serialises"));
    Ok(())
}
