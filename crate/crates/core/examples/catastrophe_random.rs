//! Survival probability redrawn at every catastrophe. The expected count
//! grows like `((1+lambda)^(a+1) - 1)/lambda` for power laws and is otherwise
//! found from the alternating series or the killed Kolmogorov system.
//!
//! Run with `cargo run --example catastrophe_random`.

use catastro::{exact, oracle, SurvivalLaw};

fn main() -> catastro::Result<()> {
    let laws = [
        SurvivalLaw::Uniform,
        SurvivalLaw::power(2.0)?,
        SurvivalLaw::beta(2.0, 3.0)?,
        SurvivalLaw::truncated_exponential(1.0)?,
    ];
    for law in &laws {
        println!("{law}");
        for lambda in [0.5, 1.0, 3.0] {
            let e = exact::cat_random_expected(lambda, law)?;
            let s = exact::s_nu(lambda, law)?;
            println!("  lambda={lambda:<4} E[M]={:<14.10} via {:<12} S={}", e.to_f64(), e.method.to_string(), s.value);
        }
        // higher moments of the count, recovered from the series for lambda < 1
        let tau: Vec<String> = (1..=4)
            .map(|i| exact::cat_random_tau_recovery(0.5, law, i).map(|r| format!("{:.6}", r.to_f64())))
            .collect::<catastro::Result<_>>()?;
        let killed = oracle::truncated_kolmogorov_tau(0.5, law, 4, 1e-10)?.value;
        println!("  lambda=0.5 tau_1..4 = [{}], killed tau_4 = {killed:.6}", tau.join(", "));
    }
    Ok(())
}
