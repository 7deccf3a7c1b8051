//! The killed backward system: expected catastrophe counts from each starting
//! size, approached from below as the truncation level grows.
//!
//! Run with `cargo run --example kolmogorov_oracle`.

use catastro::{oracle, SurvivalLaw};

fn main() -> catastro::Result<()> {
    let law = SurvivalLaw::beta(2.0, 3.0)?;
    let lambda = 1.5;
    let report = oracle::truncated_kolmogorov_tau(lambda, &law, 1, 1e-12)?;
    for (n, v) in &report.history {
        println!("level {n:>6}: tau_1 >= {v:.14}");
    }
    println!("converged={} delta={:.2e}", report.converged, report.delta);
    let tau = oracle::truncated_solution(lambda, &law, 400)?;
    println!("tau_1..5 = {:?}", &tau[..5]);
    println!("residual at level 400 = {:.2e}", oracle::residual(lambda, &law, &tau)?);
    Ok(())
}
