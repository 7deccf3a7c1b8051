//! Populations with random lifetimes reduce to a Firework process with the
//! effective radius law. Geometric lifetimes give back the classical model.
//!
//! Run with `cargo run --example bridge_identity`.

use catastro::firework::{self, RadiusLaw};
use catastro::{exact, SurvivalLaw};

fn main() -> catastro::Result<()> {
    for (lambda, p) in [(0.5, 0.4), (1.0, 0.5), (3.0, 0.8)] {
        let alpha = RadiusLaw::geometric_lifetime(p)?.effective(lambda)?;
        let bridged = firework::bridge_expected(lambda, firework::firework_expected_range(&alpha)?.value)?;
        let direct = exact::classical_extinction_time(lambda, p)?;
        println!("lambda={lambda} p={p}: bridge {} direct {}", bridged, direct.value);
    }
    let lambda = 2.0;
    let alpha = RadiusLaw::FromSurvivalLaw(SurvivalLaw::Uniform).effective(lambda)?;
    let pf = firework::firework_survival(&alpha)?.to_f64();
    println!("\nuniform at lambda={lambda}: Firework survival {pf:.12}");
    println!("population survival through the bridge {:.12}", firework::bridge_survival(lambda, pf)?);
    let u = firework::renewal_sequence(&alpha, 200)?.u;
    for h in [10, 50, 200] {
        println!("P(alive after {h:>3} catastrophes) = {:.10}", (1.0 + lambda) / lambda * u[h]);
    }
    Ok(())
}
