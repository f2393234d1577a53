//! Ruin probability `P[τ_u < ∞]` and the Kesten–Goldie constant.
//!
//! ```bash
//! cargo run --release --example kesten_goldie
//! ```

use perpetuity::asymptotics::{geometric_grid, kesten_goldie_grid};
use perpetuity::{ALawSpec, BLawSpec, InnovationLaw};

fn main() -> perpetuity::Result<()> {
    let law = InnovationLaw::new(
        ALawSpec::LogNormal { mu: -1.0, sigma: std::f64::consts::SQRT_2 },
        BLawSpec::Const { value: 1.0 },
    )?;
    let report = kesten_goldie_grid(&law, &geometric_grid(6f64.exp(), 16f64.exp(), 8)?, 100_000, 9)?;
    for row in &report.rows {
        println!("log u {:>6.2}  P = {:.4e} ± {:.1e}  c0 = {:.4}", row.u.ln(), row.p_hat, row.stderr, row.c_hat);
    }
    println!("c0 mean {:.4}, spread {:.3}, slope {:.5}", report.c_mean, report.c_rel_spread, report.slope);
    Ok(())
}
