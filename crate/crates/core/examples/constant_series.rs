//! The limiting constant of the pointwise asymptotics as a truncated series,
//! compared with the regression estimate.
//!
//! ```bash
//! cargo run --release --example constant_series
//! ```

use perpetuity::asymptotics::{geometric_grid, run_grid, Method};
use perpetuity::engine::estimate_constant_series;
use perpetuity::{ALawSpec, BLawSpec, InnovationLaw};

fn main() -> perpetuity::Result<()> {
    let law = InnovationLaw::new(
        ALawSpec::LogNormal { mu: -1.0, sigma: std::f64::consts::SQRT_2 },
        BLawSpec::Const { value: 1.0 },
    )?;
    for l in [0u64, 1, 2, 5, 10, 30] {
        let c = estimate_constant_series(&law, 1.5, l, 1_000_000, 3)?;
        println!("L = {l:>2}: c = {:.4} ± {:.4}", c.value, c.stderr);
    }
    let grid = geometric_grid(40f64.exp(), 52f64.exp(), 10)?;
    let report = run_grid(&law, 2.0, &grid, 200_000, Method::Tilted, 3)?;
    println!("regression c_mean on [e^40, e^52]: {:.4}", report.c_mean);
    Ok(())
}
