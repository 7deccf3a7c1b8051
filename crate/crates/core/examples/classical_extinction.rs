//! Expected number of catastrophes before extinction when every individual
//! survives a catastrophe with the same probability `p`.
//!
//! Run with `cargo run --example classical_extinction`.

use catastro::{exact, oracle, SurvivalLaw};

fn main() -> catastro::Result<()> {
    println!("{:>6} {:>6} {:>16} {:>12} {:>16}", "lambda", "p", "E[M]", "abs_error", "killed system");
    for lambda in [0.5, 1.0, 2.0] {
        for p in [0.25, 0.5, 0.75] {
            let e = exact::classical_extinction_time(lambda, p)?;
            let killed = oracle::truncated_kolmogorov_tau(lambda, &SurvivalLaw::degenerate(p)?, 1, 1e-10)?;
            println!(
                "{lambda:>6} {p:>6} {:>16.10} {:>12.2e} {:>16.10}",
                e.to_f64(),
                e.error_bound().unwrap_or(f64::NAN),
                killed.value
            );
        }
    }
    Ok(())
}
