//! Seeded, parallel simulation of the four population models and of the
//! Firework frontier.
//!
//! Populations are simulated on the embedded jump chain: between two
//! catastrophes the number of immigrants is geometric with success
//! probability `1/(1+lambda)`, and the extinction time is the sum of the
//! unit-exponential gaps between catastrophes. Replica `r` of a run with seed
//! `s` draws from its own ChaCha stream `(s, r)`, and outcomes are reduced in
//! replica order, so results do not depend on the number of workers.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp1, Geometric};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::firework::{geometric_lifetime, RadiusLaw};
use crate::laws::SurvivalLaw;

pub const DEFAULT_MAX_CATASTROPHES: u64 = 1_000_000;
pub const DEFAULT_MAX_POPULATION: u64 = 100_000_000;
/// Documented default seed.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Normal quantile for 95% intervals.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone)]
pub enum Mechanism {
    Classical { p: f64 },
    CatastropheRandom(SurvivalLaw),
    IndividualRandom(SurvivalLaw),
    GeneralLifetime(RadiusLaw),
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub lambda: f64,
    pub mechanism: Mechanism,
}

#[derive(Debug, Clone)]
pub enum SimModel {
    Population(ModelSpec),
    /// The Firework frontier. With `inversion` the radius of every site is
    /// drawn from the CDF directly; otherwise laws built as maxima are
    /// sampled as such.
    Firework { alpha: RadiusLaw, inversion: bool },
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub model: SimModel,
    pub replicas: u64,
    pub seed: u64,
    pub max_catastrophes: u64,
    /// Cap on the total number of immigrants over a replica.
    pub max_population: u64,
    /// Stop a replica after this many catastrophes (or sites).
    pub horizon: Option<u64>,
}

impl SimConfig {
    pub fn new(model: SimModel, replicas: u64, seed: u64) -> Self {
        SimConfig {
            model,
            replicas,
            seed,
            max_catastrophes: DEFAULT_MAX_CATASTROPHES,
            max_population: DEFAULT_MAX_POPULATION,
            horizon: None,
        }
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = Some(horizon);
        self
    }

    fn caps(&self) -> Caps {
        Caps { max_catastrophes: self.max_catastrophes, max_population: self.max_population, horizon: self.horizon }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_catastrophes: u64,
    pub max_population: u64,
    pub horizon: Option<u64>,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_catastrophes: DEFAULT_MAX_CATASTROPHES, max_population: DEFAULT_MAX_POPULATION, horizon: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CensorReason {
    CatastropheCap,
    PopulationCap,
    Horizon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ReplicaOutcome {
    /// Extinct at catastrophe `m` (for the Firework: final range `m`), after
    /// time `t` where a clock is simulated.
    Extinct { m: u64, t: Option<f64> },
    /// Still alive after `m` catastrophes (for the Firework: more than `m`
    /// informed sites).
    Censored { reason: CensorReason, m: u64 },
}

impl ReplicaOutcome {
    pub fn count(&self) -> u64 {
        match *self {
            ReplicaOutcome::Extinct { m, .. } | ReplicaOutcome::Censored { m, .. } => m,
        }
    }

    /// Whether `M >= n`, or `None` when censoring hides the answer.
    pub fn at_least(&self, n: u64) -> Option<bool> {
        match *self {
            ReplicaOutcome::Extinct { m, .. } => Some(m >= n),
            ReplicaOutcome::Censored { m, .. } if m + 1 >= n => Some(true),
            ReplicaOutcome::Censored { .. } => None,
        }
    }
}

/// The RNG stream of one replica.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

fn geometric_births<R: Rng + ?Sized>(births: &Geometric, rng: &mut R) -> u64 {
    births.sample(rng)
}

fn birth_law(lambda: f64) -> Geometric {
    Geometric::new(1.0 / (1.0 + lambda)).expect("lambda is finite and positive")
}

fn thin<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        Binomial::new(n, p).expect("p in (0, 1)").sample(rng)
    }
}

/// Population models where survivors of a catastrophe are binomially thinned
/// with parameter `draw(rng)`.
fn simulate_thinning<R: Rng + ?Sized>(
    lambda: f64,
    mut draw: impl FnMut(&mut R) -> f64,
    rng: &mut R,
    caps: Caps,
) -> ReplicaOutcome {
    let births = birth_law(lambda);
    let mut alive = 1u64;
    let mut born = 0u64;
    let mut t = 0.0;
    let mut m = 0u64;
    loop {
        if caps.horizon.is_some_and(|h| m >= h) {
            return ReplicaOutcome::Censored { reason: CensorReason::Horizon, m };
        }
        if m >= caps.max_catastrophes {
            return ReplicaOutcome::Censored { reason: CensorReason::CatastropheCap, m };
        }
        let b = geometric_births(&births, rng);
        born = born.saturating_add(b);
        if born > caps.max_population {
            return ReplicaOutcome::Censored { reason: CensorReason::PopulationCap, m };
        }
        alive += b;
        let gap: f64 = Exp1.sample(rng);
        t += gap;
        m += 1;
        let p = draw(rng);
        alive = thin(alive, p, rng);
        if alive == 0 {
            return ReplicaOutcome::Extinct { m, t: Some(t) };
        }
    }
}

/// The classical process started from one individual.
pub fn simulate_ipbc<R: Rng + ?Sized>(lambda: f64, p: f64, rng: &mut R, caps: Caps) -> ReplicaOutcome {
    simulate_thinning(lambda, |_| p, rng, caps)
}

/// Survival parameter redrawn from `law` at every catastrophe.
pub fn simulate_cat_random<R: Rng + ?Sized>(lambda: f64, law: &SurvivalLaw, rng: &mut R, caps: Caps) -> ReplicaOutcome {
    simulate_thinning(lambda, |r: &mut R| law.sample(r), rng, caps)
}

/// Every individual survives a number of catastrophes drawn at birth by
/// `lifetime`; the population is a map from death epoch to head count.
fn simulate_lifetimes<R: Rng + ?Sized>(
    lambda: f64,
    mut lifetime: impl FnMut(&mut R) -> u64,
    rng: &mut R,
    caps: Caps,
) -> ReplicaOutcome {
    let births = birth_law(lambda);
    let mut deaths: BTreeMap<u64, u64> = BTreeMap::new();
    let mut alive = 0u64;
    let mut born = 0u64;
    let mut t = 0.0;
    let mut m = 0u64;
    // the founder joins the immigrants of the first interval
    let mut newcomers = 1u64;
    loop {
        if caps.horizon.is_some_and(|h| m >= h) {
            return ReplicaOutcome::Censored { reason: CensorReason::Horizon, m };
        }
        if m >= caps.max_catastrophes {
            return ReplicaOutcome::Censored { reason: CensorReason::CatastropheCap, m };
        }
        let b = geometric_births(&births, rng);
        born = born.saturating_add(b);
        if born > caps.max_population {
            return ReplicaOutcome::Censored { reason: CensorReason::PopulationCap, m };
        }
        newcomers += b;
        for _ in 0..newcomers {
            // born before catastrophe m+1, survives L of them, dies at m+1+L
            let l = lifetime(rng);
            let epoch = (m + 1).saturating_add(l);
            *deaths.entry(epoch).or_insert(0) += 1;
        }
        alive += newcomers;
        newcomers = 0;
        let gap: f64 = Exp1.sample(rng);
        t += gap;
        m += 1;
        if let Some(d) = deaths.remove(&m) {
            alive -= d;
        }
        if alive == 0 {
            return ReplicaOutcome::Extinct { m, t: Some(t) };
        }
    }
}

/// Each newborn draws `x ~ law` and survives `L` catastrophes with
/// `P(L >= k) = x^k`.
pub fn simulate_ind_random<R: Rng + ?Sized>(lambda: f64, law: &SurvivalLaw, rng: &mut R, caps: Caps) -> ReplicaOutcome {
    simulate_lifetimes(
        lambda,
        |r: &mut R| {
            let x = law.sample(r);
            geometric_lifetime(x, r)
        },
        rng,
        caps,
    )
}

/// Each newborn draws its number of survived catastrophes from `lifetime`.
pub fn simulate_gipc<R: Rng + ?Sized>(lambda: f64, lifetime: &RadiusLaw, rng: &mut R, caps: Caps) -> ReplicaOutcome {
    simulate_lifetimes(lambda, |r: &mut R| lifetime.sample(r), rng, caps)
}

/// `min(M_F, horizon)`: site `s` is informed while `s <= max_{i<s} (i + R_i)`.
pub fn simulate_firework<R: Rng + ?Sized>(alpha: &RadiusLaw, horizon: u64, inversion: bool, rng: &mut R) -> u64 {
    let draw = |r: &mut R| if inversion { alpha.sample_by_inversion(r) } else { alpha.sample(r) };
    let mut frontier = draw(rng);
    let mut site = 1u64;
    while site < horizon && site <= frontier {
        frontier = frontier.max(site.saturating_add(draw(rng)));
        site += 1;
    }
    site.min(horizon)
}

/// One replica of `config`.
pub fn run_replica(config: &SimConfig, replica: u64) -> ReplicaOutcome {
    let mut rng = replica_rng(config.seed, replica);
    let caps = config.caps();
    match &config.model {
        SimModel::Population(pop) => match &pop.mechanism {
            Mechanism::Classical { p } => simulate_ipbc(pop.lambda, *p, &mut rng, caps),
            Mechanism::CatastropheRandom(law) => simulate_cat_random(pop.lambda, law, &mut rng, caps),
            Mechanism::IndividualRandom(law) => simulate_ind_random(pop.lambda, law, &mut rng, caps),
            Mechanism::GeneralLifetime(l) => simulate_gipc(pop.lambda, l, &mut rng, caps),
        },
        SimModel::Firework { alpha, inversion } => {
            // resolve M_F exactly up to the horizon; beyond it only M_F > h is known
            let h = config.horizon.unwrap_or(caps.max_catastrophes);
            let m = simulate_firework(alpha, h.saturating_add(1), *inversion, &mut rng);
            if m > h {
                ReplicaOutcome::Censored { reason: CensorReason::Horizon, m: h }
            } else {
                ReplicaOutcome::Extinct { m, t: None }
            }
        }
    }
}

fn validate(config: &SimConfig) -> Result<()> {
    if config.replicas == 0 || config.max_catastrophes == 0 || config.max_population == 0 {
        return Err(Error::Inconsistency("replicas and caps must be at least 1".into()));
    }
    if config.horizon == Some(0) {
        return Err(Error::Inconsistency("the horizon must be at least 1".into()));
    }
    match &config.model {
        SimModel::Population(pop) => {
            if !(pop.lambda.is_finite() && pop.lambda > 0.0) {
                return Err(Error::InvalidLaw(format!("lambda must be finite and positive, got {}", pop.lambda)));
            }
            match &pop.mechanism {
                Mechanism::Classical { p } if !(0.0..=1.0).contains(p) => {
                    Err(Error::InvalidLaw(format!("p must lie in [0, 1], got {p}")))
                }
                Mechanism::Classical { .. } => Ok(()),
                Mechanism::CatastropheRandom(l) | Mechanism::IndividualRandom(l) => l.validate(),
                Mechanism::GeneralLifetime(l) => l.validate(),
            }
        }
        SimModel::Firework { alpha, .. } => alpha.validate(),
    }
}

/// All replica outcomes in replica order, computed on `workers` threads
/// (the global pool when `None`).
pub fn run(config: &SimConfig, workers: Option<usize>) -> Result<Vec<ReplicaOutcome>> {
    validate(config)?;
    let work = || (0..config.replicas).into_par_iter().map(|r| run_replica(config, r)).collect();
    match workers {
        None => Ok(work()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Inconsistency(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Statistic {
    /// Mean of `M` over extinct replicas.
    MeanCatastrophes,
    /// Mean extinction time over extinct replicas.
    MeanTime,
    /// `P(M >= n)`.
    TailProbability(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub point: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicas_used: u64,
    pub censored: u64,
}

impl Estimate {
    /// Whether `target` lies within `k` standard errors of the point.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        (self.point - target).abs() <= k * self.std_error
    }
}

/// Mean with a normal 95% interval.
pub fn mean_estimate(values: &[f64], censored: u64) -> Result<Estimate> {
    let n = values.len();
    if n == 0 {
        return Err(Error::NoEstimate(censored as usize));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = if n > 1 { values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0) } else { 0.0 };
    let se = (var / nf).sqrt();
    Ok(Estimate {
        point: mean,
        std_error: se,
        ci_low: mean - Z95 * se,
        ci_high: mean + Z95 * se,
        replicas_used: n as u64,
        censored,
    })
}

/// Proportion with a Wilson 95% interval.
pub fn proportion_estimate(successes: u64, trials: u64, censored: u64) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::NoEstimate(censored as usize));
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(Estimate {
        point: p,
        std_error: (p * (1.0 - p) / n).sqrt(),
        ci_low: (centre - half).min(p),
        ci_high: (centre + half).max(p),
        replicas_used: trials,
        censored,
    })
}

/// Reduces outcomes (in order) to an estimate of `statistic`.
pub fn summarize(statistic: Statistic, outcomes: &[ReplicaOutcome]) -> Result<Estimate> {
    match statistic {
        Statistic::MeanCatastrophes | Statistic::MeanTime => {
            let mut values = Vec::with_capacity(outcomes.len());
            let mut censored = 0u64;
            for o in outcomes {
                match (statistic, *o) {
                    (Statistic::MeanCatastrophes, ReplicaOutcome::Extinct { m, .. }) => values.push(m as f64),
                    (Statistic::MeanTime, ReplicaOutcome::Extinct { t: Some(t), .. }) => values.push(t),
                    (Statistic::MeanTime, ReplicaOutcome::Extinct { t: None, .. }) => {
                        return Err(Error::Inconsistency("the Firework frontier carries no clock".into()));
                    }
                    _ => censored += 1,
                }
            }
            mean_estimate(&values, censored)
        }
        Statistic::TailProbability(n) => {
            let (mut yes, mut known, mut censored) = (0u64, 0u64, 0u64);
            for o in outcomes {
                match o.at_least(n) {
                    Some(b) => {
                        known += 1;
                        yes += u64::from(b);
                    }
                    None => censored += 1,
                }
            }
            proportion_estimate(yes, known, censored)
        }
    }
}

/// Simulates `config` and estimates `statistic`.
pub fn estimate(statistic: Statistic, config: &SimConfig, workers: Option<usize>) -> Result<Estimate> {
    summarize(statistic, &run(config, workers)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn trivial_replicas() {
        let mut rng = replica_rng(1, 0);
        assert!(matches!(simulate_ipbc(1.0, 0.0, &mut rng, caps()), ReplicaOutcome::Extinct { m: 1, .. }));
        let zero = SurvivalLaw::degenerate(0.0).unwrap();
        assert!(matches!(simulate_cat_random(1.0, &zero, &mut rng, caps()), ReplicaOutcome::Extinct { m: 1, .. }));
        let immortal = SurvivalLaw::degenerate(1.0).unwrap();
        let small = Caps { max_catastrophes: 2_000, ..caps() };
        assert!(matches!(
            simulate_ind_random(1.0, &immortal, &mut rng, small),
            ReplicaOutcome::Censored { reason: CensorReason::CatastropheCap, m: 2_000 }
        ));
        let dead = RadiusLaw::finite_support(vec![1.0]).unwrap();
        assert!(matches!(simulate_gipc(2.0, &dead, &mut rng, caps()), ReplicaOutcome::Extinct { m: 1, .. }));
        assert_eq!(simulate_firework(&dead, 50, false, &mut rng), 1);
        let relay = RadiusLaw::finite_support(vec![0.0, 1.0]).unwrap();
        assert_eq!(simulate_firework(&relay, 100, false, &mut rng), 100);
    }

    #[test]
    fn deterministic_mean_has_zero_variance() {
        let pop = ModelSpec { lambda: 1.0, mechanism: Mechanism::Classical { p: 0.0 } };
        let config = SimConfig::new(SimModel::Population(pop), 1_000, 3);
        let e = estimate(Statistic::MeanCatastrophes, &config, Some(2)).unwrap();
        assert_eq!((e.point, e.std_error), (1.0, 0.0));
    }

    #[test]
    fn results_do_not_depend_on_workers() {
        let pop = ModelSpec { lambda: 2.0, mechanism: Mechanism::IndividualRandom(SurvivalLaw::Uniform) };
        let config = SimConfig::new(SimModel::Population(pop), 2_000, 9).with_horizon(50);
        let a = run(&config, Some(1)).unwrap();
        let b = run(&config, Some(8)).unwrap();
        assert_eq!(a, b);
        let ea = estimate(Statistic::TailProbability(51), &config, Some(1)).unwrap();
        let eb = estimate(Statistic::TailProbability(51), &config, Some(8)).unwrap();
        assert_eq!(ea, eb);
    }

    #[test]
    fn all_censored_is_an_error() {
        let pop = ModelSpec { lambda: 1.0, mechanism: Mechanism::IndividualRandom(SurvivalLaw::degenerate(1.0).unwrap()) };
        let config = SimConfig::new(SimModel::Population(pop), 10, 1).with_horizon(5);
        assert!(matches!(estimate(Statistic::MeanCatastrophes, &config, None), Err(Error::NoEstimate(10))));
    }

    #[test]
    fn wilson_interval_contains_point() {
        for (s, n) in [(0u64, 100u64), (100, 100), (37, 100)] {
            let e = proportion_estimate(s, n, 0).unwrap();
            assert!(e.ci_low <= e.point && e.point <= e.ci_high);
        }
    }
}
