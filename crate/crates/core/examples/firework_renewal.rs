//! The Firework rumour on the half-line: its range tail is a renewal
//! sequence, checked here against exhaustive enumeration.
//!
//! Run with `cargo run --example firework_renewal`.

use catastro::firework::{self, RadiusLaw};
use catastro::oracle;

fn main() -> catastro::Result<()> {
    let probs = vec![0.5, 0.25, 0.25];
    let law = RadiusLaw::finite_support(probs.clone())?;
    let data = firework::renewal_sequence(&law, 8)?;
    println!("radius law {law}");
    println!("{:>3} {:>12} {:>12} {:>20}", "n", "f_n", "u_n", "P(M >= n+1) exact");
    for n in 0..=8usize {
        let brute = oracle::brute_force_firework_tail(&probs, n as u32 + 1)?;
        let f = if n == 0 { String::from("-") } else { format!("{:.10}", data.f[n]) };
        println!("{n:>3} {f:>12} {:>12.10} {:>20}", data.u[n], brute);
    }
    println!("defect f_inf = {}", data.f_infinity);
    println!("E[M_F] = {}", firework::firework_expected_range(&law)?.value);

    let relay = RadiusLaw::geometric_lifetime(0.5)?;
    println!("\n{relay}: survival {}", firework::firework_survival(&relay)?.value);
    Ok(())
}
