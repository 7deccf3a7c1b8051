//! Survival verdicts from the behaviour of the law near 1, with the route
//! that decided each one.
//!
//! Run with `cargo run --example survival_criteria`.

use catastro::{exact, SurvivalLaw};

fn main() -> catastro::Result<()> {
    let laws = [
        SurvivalLaw::truncated_exponential(1.0)?,
        SurvivalLaw::Uniform,
        SurvivalLaw::beta(2.0, 3.0)?,
        SurvivalLaw::beta(0.5, 0.5)?,
        SurvivalLaw::power(0.5)?,
    ];
    for law in &laws {
        let sum = exact::moment_sum_diverges(law);
        println!("{law}: sum of moments {:?}", sum.verdict);
        for lambda in [0.5, 1.5, 2.0, 4.0] {
            let v = exact::survival_criterion(lambda, law)?;
            let rate = v.critical_rate.map(|r| format!(" critical rate {r:.12}")).unwrap_or_default();
            println!("  lambda={lambda:<4} {:?} by {:?}{rate}", v.verdict, v.route);
        }
    }
    Ok(())
}
