//! Normalised pointwise probabilities on a grid of levels, with the
//! regression of `log ĉ` on `log u`. The flat slope is the polynomial rate;
//! the oscillation with `Θ` fades as `u` grows.
//!
//! ```bash
//! cargo run --release --example pointwise_grid
//! ```

use perpetuity::asymptotics::{geometric_grid, run_grid, Method};
use perpetuity::{ALawSpec, BLawSpec, InnovationLaw};

fn main() -> perpetuity::Result<()> {
    let law = InnovationLaw::new(
        ALawSpec::LogNormal { mu: -1.0, sigma: std::f64::consts::SQRT_2 },
        BLawSpec::Const { value: 1.0 },
    )?;
    for (lo, hi) in [(8.0f64, 20.0f64), (40.0, 52.0)] {
        let grid = geometric_grid(lo.exp(), hi.exp(), 10)?;
        let report = run_grid(&law, 2.0, &grid, 200_000, Method::Tilted, 7)?;
        println!("log u in [{lo}, {hi}]");
        print!("{}", report.to_csv());
        println!(
            "slope {:.4} CI [{:.4}, {:.4}], c_mean {:.4}, spread {:.3}\n",
            report.slope, report.slope_ci.0, report.slope_ci.1, report.c_mean, report.c_rel_spread
        );
    }
    Ok(())
}
