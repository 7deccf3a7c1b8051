//! Executable cross-checks between the exact formulas, the oracles and the
//! simulators, grouped into suites.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, Extended, Verdict};
use crate::firework::{self, RadiusLaw};
use crate::laws::SurvivalLaw;
use crate::montecarlo::{self, Estimate, Mechanism, ModelSpec, SimConfig, SimModel, Statistic};
use crate::oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Classical,
    Cat,
    Euler,
    Ind,
    Renewal,
    Bridge,
    Criteria,
    Monotone,
    All,
}

impl Suite {
    pub const EACH: [Suite; 8] =
        [Suite::Classical, Suite::Cat, Suite::Euler, Suite::Ind, Suite::Renewal, Suite::Bridge, Suite::Criteria, Suite::Monotone];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "classical" => Suite::Classical,
            "cat" => Suite::Cat,
            "euler" => Suite::Euler,
            "ind" => Suite::Ind,
            "renewal" => Suite::Renewal,
            "bridge" => Suite::Bridge,
            "criteria" => Suite::Criteria,
            "monotone" => Suite::Monotone,
            "all" => Suite::All,
            _ => return Err(Error::Parse(format!("unknown suite '{s}'"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Classical => "classical",
            Suite::Cat => "cat",
            Suite::Euler => "euler",
            Suite::Ind => "ind",
            Suite::Renewal => "renewal",
            Suite::Bridge => "bridge",
            Suite::Criteria => "criteria",
            Suite::Monotone => "monotone",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Params {
    pub lambda: Option<f64>,
    pub law: Option<SurvivalLaw>,
    pub replicas: u64,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for Params {
    fn default() -> Self {
        Params { lambda: None, law: None, replicas: 100_000, seed: montecarlo::DEFAULT_SEED, workers: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub target: f64,
    /// Allowed deviation (absolute, or standard errors times the multiplier).
    pub allowed: f64,
    pub passed: bool,
    pub replicas: Option<u64>,
    pub stderr: Option<f64>,
}

impl Check {
    pub fn absolute(name: impl Into<String>, observed: f64, target: f64, tol: f64) -> Check {
        let passed = (observed - target).abs() <= tol || (observed.is_infinite() && observed == target);
        Check { name: name.into(), observed, target, allowed: tol, passed, replicas: None, stderr: None }
    }

    /// `|point - target| <= k * se` for a sample mean.
    pub fn mean(name: impl Into<String>, est: &Estimate, target: f64, k: f64) -> Check {
        let allowed = k * est.std_error;
        Check {
            name: name.into(),
            observed: est.point,
            target,
            allowed,
            passed: (est.point - target).abs() <= allowed,
            replicas: Some(est.replicas_used),
            stderr: Some(est.std_error),
        }
    }

    /// Like [`Check::mean`] for a proportion; the standard error is the
    /// larger of the empirical one and the one implied by `target`, so
    /// degenerate samples are judged fairly.
    pub fn proportion(name: impl Into<String>, est: &Estimate, target: f64, k: f64) -> Check {
        let n = est.replicas_used as f64;
        let se = est.std_error.max((target * (1.0 - target) / n).max(0.0).sqrt());
        let allowed = k * se;
        Check {
            name: name.into(),
            observed: est.point,
            target,
            allowed,
            passed: (est.point - target).abs() <= allowed,
            replicas: Some(est.replicas_used),
            stderr: Some(se),
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Check {
        let v = if ok { 1.0 } else { 0.0 };
        Check { name: name.into(), observed: v, target: 1.0, allowed: 0.0, passed: ok, replicas: None, stderr: None }
    }
}

/// Replaces the allowed deviation of every exact numeric check by `tol`.
/// Simulation checks and yes/no checks keep their own criteria.
pub fn override_tolerance(checks: &mut [Check], tol: f64) {
    for c in checks.iter_mut().filter(|c| c.replicas.is_none() && c.allowed > 0.0) {
        *c = Check::absolute(std::mem::take(&mut c.name), c.observed, c.target, tol);
    }
}

fn population(lambda: f64, mechanism: Mechanism, params: &Params) -> SimConfig {
    SimConfig::new(SimModel::Population(ModelSpec { lambda, mechanism }), params.replicas, params.seed)
}

/// Runs one suite (or all of them).
pub fn run_suite(suite: Suite, params: &Params) -> Result<Vec<Check>> {
    match suite {
        Suite::Classical => classical(params),
        Suite::Cat => cat(params),
        Suite::Euler => euler(),
        Suite::Ind => ind(params),
        Suite::Renewal => renewal(params),
        Suite::Bridge => bridge(params),
        Suite::Criteria => criteria(),
        Suite::Monotone => monotone(),
        Suite::All => {
            let mut all = Vec::new();
            for s in Suite::EACH {
                all.extend(run_suite(s, params)?);
            }
            Ok(all)
        }
    }
}

fn classical(params: &Params) -> Result<Vec<Check>> {
    let lambda = params.lambda.unwrap_or(1.0);
    let p = match params.law {
        Some(SurvivalLaw::Degenerate { p }) => p,
        Some(ref other) => return Err(Error::UnsupportedRegime(format!("the classical suite needs a degenerate law, got {other}"))),
        None => 0.5,
    };
    let exact = exact::classical_extinction_time(lambda, p)?.to_f64();
    let law = SurvivalLaw::degenerate(p)?;
    let oracle = oracle::truncated_kolmogorov_tau(lambda, &law, 1, 1e-10)?.value;
    let outcomes = montecarlo::run(&population(lambda, Mechanism::Classical { p }, params), params.workers)?;
    let m = montecarlo::summarize(Statistic::MeanCatastrophes, &outcomes)?;
    let t = montecarlo::summarize(Statistic::MeanTime, &outcomes)?;
    let wald = 4.0 * (m.std_error + t.std_error);
    Ok(vec![
        Check::absolute("classical.product_vs_oracle", exact, oracle, 1e-6),
        Check::mean("classical.mc_mean_catastrophes", &m, exact, 4.0),
        Check { allowed: wald, passed: (t.point - m.point).abs() <= wald, ..Check::mean("classical.wald_time_vs_count", &t, m.point, 4.0) },
    ])
}

fn cat(params: &Params) -> Result<Vec<Check>> {
    let cases: Vec<(String, f64, SurvivalLaw, Option<f64>)> = match (&params.law, params.lambda) {
        (Some(law), Some(lambda)) => vec![(law.to_string(), lambda, law.clone(), None)],
        (None, None) => vec![
            ("uniform".into(), 3.0, SurvivalLaw::Uniform, Some(5.0)),
            ("power:a=2".into(), 1.0, SurvivalLaw::power(2.0)?, Some(7.0)),
        ],
        _ => return Err(Error::UnsupportedRegime("the cat suite needs both --dist and --lambda, or neither".into())),
    };
    let mut checks = Vec::new();
    for (name, lambda, law, target) in cases {
        let exact = exact::cat_random_expected(lambda, &law)?.to_f64();
        match target {
            Some(t) => checks.push(Check::absolute(format!("cat.{name}.closed_form"), exact, t, 1e-9)),
            None => {
                let oracle = oracle::truncated_kolmogorov_tau(lambda, &law, 1, 1e-10)?.value;
                checks.push(Check::absolute(format!("cat.{name}.exact_vs_oracle"), exact, oracle, 1e-6));
            }
        }
        let est = montecarlo::estimate(
            Statistic::MeanCatastrophes,
            &population(lambda, Mechanism::CatastropheRandom(law.clone()), params),
            params.workers,
        )?;
        checks.push(Check::mean(format!("cat.{name}.mc_mean_catastrophes"), &est, target.unwrap_or(exact), 4.0));
    }
    Ok(checks)
}

fn euler() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for p in [0.2, 0.5, 0.8] {
        let law = SurvivalLaw::degenerate(p)?;
        for lambda in [0.3, 0.5, 0.9] {
            let classical = exact::classical_extinction_time(lambda, p)?.to_f64();
            let s = exact::s_nu_series(lambda, &law)?
                .ok_or_else(|| Error::UnsupportedRegime("series did not settle".into()))?
                .value
                .to_f64();
            let series = -s / (1.0 + s) / lambda;
            checks.push(Check::absolute(format!("euler.series.p={p}.lambda={lambda}"), series, classical, 1e-9));
        }
        for lambda in [1.5, 3.0] {
            let classical = exact::classical_extinction_time(lambda, p)?.to_f64();
            let oracle = oracle::truncated_kolmogorov_tau(lambda, &law, 1, 1e-10)?.value;
            checks.push(Check::absolute(format!("euler.oracle.p={p}.lambda={lambda}"), oracle, classical, 1e-5));
        }
    }
    Ok(checks)
}

fn ind(params: &Params) -> Result<Vec<Check>> {
    let mut checks = vec![Check::absolute(
        "ind.uniform.lambda=2.survival",
        exact::ind_random_survival(2.0, &SurvivalLaw::Uniform)?.to_f64(),
        0.5,
        1e-8,
    )];
    let b21 = SurvivalLaw::beta(2.0, 1.0)?;
    let series = exact::ind_random_survival_series(1.0, &b21)?.to_f64();
    let closed = exact::ind_random_survival(1.0, &b21)?.to_f64();
    checks.push(Check::absolute("ind.beta(2,1).lambda=1.series_vs_closed_form", series, closed, 1e-8));
    checks.push(Check::absolute("ind.beta(2,1).lambda=1.closed_form", closed, 0.5, 1e-8));
    if let (Some(law), Some(lambda)) = (&params.law, params.lambda) {
        let v = exact::ind_random_survival(lambda, law)?.to_f64();
        let verdict = exact::survival_criterion(lambda, law)?.verdict;
        let consistent = match verdict {
            Verdict::Survives => v > 1e-6,
            Verdict::Extinct => v < 1e-6,
            Verdict::Inconclusive => true,
        };
        checks.push(Check::holds(format!("ind.{law}.lambda={lambda}.criterion_matches_formula"), consistent));
    }
    Ok(checks)
}

fn renewal(params: &Params) -> Result<Vec<Check>> {
    let probs = vec![0.5, 0.25, 0.25];
    let law = RadiusLaw::finite_support(probs.clone())?;
    let data = firework::renewal_sequence(&law, 200)?;
    let mut checks = Vec::new();
    for n in 0..=6usize {
        let brute = oracle::rational_to_f64(&oracle::brute_force_firework_tail(&probs, n as u32 + 1)?);
        checks.push(Check::absolute(format!("renewal.u_{n}_vs_enumeration"), data.u[n], brute, 1e-12));
    }
    let product = firework::firework_expected_range(&law)?.to_f64();
    checks.push(Check::absolute("renewal.expected_range_product", product, 8.0 / 3.0, 1e-12));
    let partial: f64 = data.u.iter().sum();
    checks.push(Check::absolute("renewal.expected_range_partial_sums", partial, 8.0 / 3.0, 1e-6));
    let config = SimConfig::new(SimModel::Firework { alpha: law, inversion: false }, params.replicas, params.seed).with_horizon(10_000);
    let est = montecarlo::estimate(Statistic::MeanCatastrophes, &config, params.workers)?;
    checks.push(Check::mean("renewal.mc_expected_range", &est, 8.0 / 3.0, 4.0));
    Ok(checks)
}

fn bridge(params: &Params) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for lambda in [0.5, 1.0, 2.0, 3.0] {
        for p in [0.2, 0.4, 0.6, 0.8] {
            let alpha = RadiusLaw::geometric_lifetime(p)?.effective(lambda)?;
            let e = firework::bridge_expected(lambda, firework::firework_expected_range(&alpha)?.value)?.to_f64();
            let c = exact::classical_extinction_time(lambda, p)?.to_f64();
            checks.push(Check::absolute(format!("bridge.geometric.lambda={lambda}.p={p}"), e, c, 1e-8));
        }
    }
    let lambda = params.lambda.unwrap_or(2.0);
    let law = params.law.clone().unwrap_or(SurvivalLaw::Uniform);
    let alpha = RadiusLaw::FromSurvivalLaw(law.clone()).effective(lambda)?;
    let pf = firework::firework_survival(&alpha)?.to_f64();
    let survival = firework::bridge_survival(lambda, pf)?;
    let direct = exact::ind_random_survival(lambda, &law)?.to_f64();
    checks.push(Check::absolute(format!("bridge.{law}.lambda={lambda}.survival"), survival, direct, 1e-8));
    if params.law.is_none() && params.lambda.is_none() {
        checks.push(Check::absolute("bridge.uniform.lambda=2.survival_value", survival, 0.5, 1e-8));
    }
    let ef = firework::firework_expected_range(&alpha)?.value;
    let e_bridge = firework::bridge_expected(lambda, ef)?;
    let e_direct = exact::ind_random_expected(lambda, &law)?.value;
    let agree = match (e_bridge, e_direct) {
        (Extended::Finite(a), Extended::Finite(b)) => (a - b).abs() <= 1e-8 * b.max(1.0),
        (a, b) => a == b,
    };
    checks.push(Check::holds(format!("bridge.{law}.lambda={lambda}.expected"), agree));
    if let SurvivalLaw::Degenerate { p } = law {
        if p < 1.0 {
            let geo = RadiusLaw::geometric_lifetime(p)?.effective(lambda)?;
            let e = firework::bridge_expected(lambda, firework::firework_expected_range(&geo)?.value)?.to_f64();
            let c = exact::classical_extinction_time(lambda, p)?.to_f64();
            checks.push(Check::absolute(format!("bridge.geometric.lambda={lambda}.p={p}.requested"), e, c, 1e-8));
        }
    }
    let horizon = 50u64;
    let u = firework::renewal_sequence(&alpha, horizon as usize)?.u;
    let target = ((1.0 + lambda) / lambda * u[horizon as usize]).min(1.0);
    let config = population(lambda, Mechanism::IndividualRandom(law.clone()), params).with_horizon(horizon);
    let est = montecarlo::estimate(Statistic::TailProbability(horizon + 1), &config, params.workers)?;
    checks.push(Check::proportion(format!("bridge.{law}.lambda={lambda}.mc_alive_after_{horizon}"), &est, target, 4.0));
    Ok(checks)
}

fn criteria() -> Result<Vec<Check>> {
    let te = SurvivalLaw::truncated_exponential(1.0)?;
    let e1 = std::f64::consts::E - 1.0;
    let at = |lambda: f64| exact::survival_criterion(lambda, &te);
    let mut checks = vec![
        Check::absolute("criteria.truncexp.critical_rate", at(2.0)?.critical_rate.unwrap_or(f64::NAN), e1, 1e-12),
        Check::holds("criteria.truncexp.lambda=1.5.extinct", at(1.5)?.verdict == Verdict::Extinct),
        Check::holds("criteria.truncexp.lambda=2.survives", at(2.0)?.verdict == Verdict::Survives),
        Check::holds("criteria.truncexp.critical.extinct", at(e1)?.verdict == Verdict::Extinct),
        Check::holds(
            "criteria.truncexp.lambda=1.5.infinite_expectation",
            exact::ind_random_expected(1.5, &te)?.value == Extended::Infinite,
        ),
    ];
    let b23 = SurvivalLaw::beta(2.0, 3.0)?;
    let b55 = SurvivalLaw::beta(0.5, 0.5)?;
    for lambda in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0] {
        checks.push(Check::holds(
            format!("criteria.beta(2,3).lambda={lambda}.extinct"),
            exact::survival_criterion(lambda, &b23)?.verdict == Verdict::Extinct,
        ));
        checks.push(Check::holds(
            format!("criteria.beta(0.5,0.5).lambda={lambda}.survives"),
            exact::survival_criterion(lambda, &b55)?.verdict == Verdict::Survives,
        ));
    }
    checks.push(Check::holds(
        "criteria.uniform.infinite_expectation",
        exact::ind_random_expected(2.0, &SurvivalLaw::Uniform)?.value == Extended::Infinite,
    ));
    checks.push(Check::holds(
        "criteria.uniform.lambda=2.survives",
        exact::survival_criterion(2.0, &SurvivalLaw::Uniform)?.verdict == Verdict::Survives,
    ));
    Ok(checks)
}

fn monotone() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for law in [SurvivalLaw::Uniform, SurvivalLaw::beta(2.0, 1.0)?] {
        let mut prev = f64::NEG_INFINITY;
        let mut ok = true;
        for k in 1..=100 {
            let v = exact::ind_random_survival(0.05 * k as f64, &law)?.to_f64();
            ok &= v >= prev - 1e-9;
            prev = v;
        }
        checks.push(Check::holds(format!("monotone.{law}"), ok));
    }
    Ok(checks)
}
