//! Each individual keeps its own survival probability for life. Survival of
//! the colony then switches on at a critical immigration rate.
//!
//! Run with `cargo run --example individual_random_phase_transition`.

use catastro::{exact, SurvivalLaw};

fn main() -> catastro::Result<()> {
    let laws = [SurvivalLaw::Uniform, SurvivalLaw::beta(2.0, 1.0)?, SurvivalLaw::beta(2.0, 2.0)?];
    print!("{:>7}", "lambda");
    for law in &laws {
        print!(" {:>18}", law.to_string());
    }
    println!();
    for k in 1..=12 {
        let lambda = 0.25 * f64::from(k);
        print!("{lambda:>7}");
        for law in &laws {
            print!(" {:>18.12}", exact::ind_random_survival(lambda, law)?.to_f64());
        }
        println!();
    }
    let e = exact::ind_random_expected(0.5, &SurvivalLaw::degenerate(0.5)?)?;
    println!("\nfixed p=0.5 at lambda=0.5: E[M] = {}", e.value);
    println!("uniform at lambda=0.5:     E[M] = {}", exact::ind_random_expected(0.5, &SurvivalLaw::Uniform)?.value);
    Ok(())
}
