//! Sharp large-deviation approximation of `P[Π_n > e^{nc}]` against the
//! Gaussian closed form, plus a tilted Monte Carlo check deep in the tail.
//!
//! ```bash
//! cargo run --release --example petrov_vs_exact
//! ```

use perpetuity::cgf::solve_alpha;
use perpetuity::walk_ldp::{exact_gaussian_walk_tail, mc_walk_tail, petrov_prob, PetrovQuery};
use perpetuity::{ALawSpec, BLawSpec, InnovationLaw};
use std::f64::consts::SQRT_2;

fn main() -> perpetuity::Result<()> {
    let law = InnovationLaw::new(ALawSpec::LogNormal { mu: -1.0, sigma: SQRT_2 }, BLawSpec::Const { value: 1.0 })?;

    println!("{:>5} {:>5} {:>12} {:>12} {:>8}", "n", "c", "petrov", "exact", "ratio");
    for n in [25u64, 100, 400] {
        for c in [0.1, 0.2, 0.5] {
            let q = PetrovQuery::new(&law, n, c, 0.0)?;
            let approx = petrov_prob(&law, &q)?;
            let exact = exact_gaussian_walk_tail(-1.0, SQRT_2, n, (n as f64 * c).exp());
            println!("{n:>5} {c:>5} {approx:>12.4e} {exact:>12.4e} {:>8.4}", approx / exact);
        }
    }

    let (n, c) = (50, 0.35);
    let t = (n as f64 * c).exp();
    let est = mc_walk_tail(&law, n, t, 100_000, solve_alpha(&law, c)?, 1)?;
    println!(
        "\ntilted MC n={n} c={c}: {:.4e} ± {:.1e} (exact {:.4e}, ess {:.0})",
        est.value,
        est.stderr,
        exact_gaussian_walk_tail(-1.0, SQRT_2, n, t),
        est.ess
    );
    Ok(())
}
