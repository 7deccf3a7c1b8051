//! Seeded parallel simulation of every model. Results do not depend on the
//! number of worker threads.
//!
//! Run with `cargo run --release --example monte_carlo`.

use catastro::firework::RadiusLaw;
use catastro::montecarlo::{self, Mechanism, ModelSpec, SimConfig, SimModel, Statistic};
use catastro::{exact, SurvivalLaw};

fn main() -> catastro::Result<()> {
    let lambda = 1.0;
    let models = [
        ("classical p=0.5", Mechanism::Classical { p: 0.5 }, exact::classical_extinction_time(lambda, 0.5)?.to_f64()),
        ("cat uniform", Mechanism::CatastropheRandom(SurvivalLaw::Uniform), exact::cat_random_expected(lambda, &SurvivalLaw::Uniform)?.to_f64()),
        (
            "gipc geomlife:p=0.5",
            Mechanism::GeneralLifetime(RadiusLaw::geometric_lifetime(0.5)?),
            exact::classical_extinction_time(lambda, 0.5)?.to_f64(),
        ),
    ];
    for (name, mechanism, exact) in models {
        let config = SimConfig::new(SimModel::Population(ModelSpec { lambda, mechanism }), 100_000, 7);
        let serial = montecarlo::run(&config, Some(1))?;
        let parallel = montecarlo::run(&config, Some(8))?;
        assert_eq!(serial, parallel);
        let m = montecarlo::summarize(Statistic::MeanCatastrophes, &parallel)?;
        let t = montecarlo::summarize(Statistic::MeanTime, &parallel)?;
        println!(
            "{name:<22} E[M]={m_p:.4} [{:.4}, {:.4}]  E[T]={:.4}  exact {exact:.4}",
            m.ci_low,
            m.ci_high,
            t.point,
            m_p = m.point
        );
    }
    let ind = SimConfig::new(
        SimModel::Population(ModelSpec { lambda: 2.0, mechanism: Mechanism::IndividualRandom(SurvivalLaw::Uniform) }),
        100_000,
        7,
    )
    .with_horizon(50);
    let alive = montecarlo::estimate(Statistic::TailProbability(51), &ind, None)?;
    println!("ind uniform lambda=2: P(alive after 50) = {:.4} +- {:.4}", alive.point, alive.std_error);
    Ok(())
}
