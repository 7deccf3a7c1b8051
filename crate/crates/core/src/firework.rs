//! The Firework process on the half-line and its link with the
//! individual-random and general-lifetime models.
//!
//! A radius law is described by its CDF `alpha_k = P(R <= k)`. The same type
//! carries lifetime laws: an individual survives `L` catastrophes with
//! `P(L <= k) = alpha_k`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{ErrorBound, EvalResult, Extended, Method};
use crate::laws::{parse_params, SurvivalLaw};
use crate::numeric::series::{log_product, raabe_series, ProductSum, RatioSequence, SeriesSum};

const TOL: f64 = 1e-12;
const MAX_SERIES_TERMS: u64 = 1 << 22;
const MAX_PRODUCT_TERMS: u64 = 1_000_000;
/// Inversion sampling gives up and reports an infinite radius past this.
const INVERSION_LIMIT: u64 = 1 << 32;

pub type CdfFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct CdfLaw {
    pub name: String,
    pub cdf: CdfFn,
}

impl fmt::Debug for CdfLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CdfLaw").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone)]
pub enum RadiusLaw {
    /// `P(R = k)` for `k = 0..K`.
    FiniteSupport(Vec<f64>),
    /// `P(R > k) = p^{k+1}`.
    GeometricLifetime { p: f64 },
    /// `P(R > k) = E[X^{k+1}]`: a geometric lifetime with random parameter.
    FromSurvivalLaw(SurvivalLaw),
    /// Maximum of a geometric number (success `1/(1+lambda)`, possibly
    /// zero) of independent draws from `base`.
    Effective { base: Box<RadiusLaw>, lambda: f64 },
    Cdf(CdfLaw),
}

impl RadiusLaw {
    pub fn finite_support(probs: Vec<f64>) -> Result<Self> {
        let law = RadiusLaw::FiniteSupport(probs);
        law.validate()?;
        Ok(law)
    }

    pub fn geometric_lifetime(p: f64) -> Result<Self> {
        let law = RadiusLaw::GeometricLifetime { p };
        law.validate()?;
        Ok(law)
    }

    pub fn effective(self, lambda: f64) -> Result<Self> {
        let law = RadiusLaw::Effective { base: Box::new(self), lambda };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RadiusLaw::FiniteSupport(p) => {
                if p.is_empty() || p.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(Error::InvalidLaw("support probabilities must be finite and non-negative".into()));
                }
                let total: f64 = p.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidLaw(format!("support probabilities sum to {total}, not 1")));
                }
                Ok(())
            }
            RadiusLaw::GeometricLifetime { p } => {
                if p.is_finite() && (0.0..=1.0).contains(p) {
                    Ok(())
                } else {
                    Err(Error::InvalidLaw(format!("p must lie in [0, 1], got {p}")))
                }
            }
            RadiusLaw::FromSurvivalLaw(law) => law.validate(),
            RadiusLaw::Effective { base, lambda } => {
                if !(lambda.is_finite() && *lambda > 0.0) {
                    return Err(Error::InvalidLaw(format!("lambda must be finite and positive, got {lambda}")));
                }
                base.validate()
            }
            RadiusLaw::Cdf(_) => Ok(()),
        }
    }

    /// `P(R > k)`, computed without forming `1 - alpha_k` where possible.
    pub fn tail(&self, k: u64) -> f64 {
        match self {
            RadiusLaw::FiniteSupport(p) => p.iter().skip(k as usize + 1).sum(),
            RadiusLaw::GeometricLifetime { p } => pow_u64(*p, k + 1),
            RadiusLaw::FromSurvivalLaw(law) => law.moment(k + 1).unwrap_or(f64::NAN),
            RadiusLaw::Effective { base, lambda } => {
                let s = lambda * base.tail(k);
                s / (1.0 + s)
            }
            RadiusLaw::Cdf(c) => 1.0 - (c.cdf)(k),
        }
    }

    /// `alpha_k = P(R <= k)`.
    pub fn cdf(&self, k: u64) -> f64 {
        match self {
            RadiusLaw::Effective { base, lambda } => effective_cdf(base, *lambda, k),
            RadiusLaw::Cdf(c) => (c.cdf)(k),
            _ => 1.0 - self.tail(k),
        }
    }

    /// `1/alpha_k - 1`, the ratio driving the series and products.
    fn ratio(&self, k: u64) -> f64 {
        match self {
            RadiusLaw::Effective { base, lambda } => lambda * base.tail(k),
            _ => {
                let t = self.tail(k);
                t / (1.0 - t)
            }
        }
    }

    /// Whether `E[R] = sum_k P(R > k)` is finite, when known.
    fn mean_finite(&self) -> Option<bool> {
        match self {
            RadiusLaw::FiniteSupport(_) => Some(true),
            RadiusLaw::GeometricLifetime { p } => Some(*p < 1.0),
            RadiusLaw::FromSurvivalLaw(law) => law.moments_summable(),
            RadiusLaw::Effective { base, .. } => base.mean_finite(),
            RadiusLaw::Cdf(_) => None,
        }
    }

    /// Whether the ratios are summable, when known. A vanishing `alpha_k`
    /// makes the ratio infinite and is left to the evaluators.
    fn summable(&self) -> Option<bool> {
        match self {
            RadiusLaw::Effective { base, .. } => base.mean_finite(),
            _ if self.cdf(0) == 0.0 => None,
            _ => self.mean_finite(),
        }
    }

    /// `sum_{i >= k} P(R > i)`, when known in closed form.
    fn tail_sum(&self, k: u64) -> Option<f64> {
        match self {
            RadiusLaw::FiniteSupport(p) => Some((k..p.len() as u64).map(|i| self.tail(i)).sum()),
            RadiusLaw::GeometricLifetime { p } if *p < 1.0 => Some(pow_u64(*p, k + 1) / (1.0 - p)),
            RadiusLaw::FromSurvivalLaw(law) => law.moment_tail(k + 1),
            _ => None,
        }
    }

    /// Bounds on `sum_{i >= k} ratio(i)`.
    fn ratio_tail(&self, k: u64) -> Option<(f64, f64)> {
        match self {
            RadiusLaw::FiniteSupport(p) => {
                Some(if k as usize + 1 >= p.len() { (0.0, 0.0) } else { (0.0, f64::INFINITY) })
            }
            RadiusLaw::GeometricLifetime { p } => {
                let t = pow_u64(*p, k + 1) / (1.0 - p);
                Some((t, t / (1.0 - pow_u64(*p, k + 1))))
            }
            RadiusLaw::FromSurvivalLaw(law) => {
                let t = law.moment_tail(k + 1)?;
                Some((t, t / (1.0 - law.moment(k + 1).ok()?)))
            }
            RadiusLaw::Effective { base, lambda } => {
                let t = base.tail_sum(k)?;
                Some((lambda * t, lambda * t))
            }
            RadiusLaw::Cdf(_) => None,
        }
    }

    /// Lower bound on `inf_{i >= j} i * ratio(i)`.
    fn raabe_floor(&self, j: u64) -> Option<f64> {
        match self {
            RadiusLaw::FromSurvivalLaw(law) => law.raabe_floor(j),
            RadiusLaw::Effective { base, lambda } => match base.as_ref() {
                RadiusLaw::FromSurvivalLaw(law) => law.raabe_floor(j).map(|f| lambda * f),
                _ => None,
            },
            _ => None,
        }
    }

    fn ratios(&self) -> RatioSequence<'_> {
        let mut k = 0u64;
        RatioSequence {
            next: Box::new(move || {
                let r = self.ratio(k);
                k += 1;
                r
            }),
            raabe_floor: self.raabe_floor(1).map(|_| {
                Box::new(move |j: u64| self.raabe_floor(j).unwrap_or(0.0)) as Box<dyn Fn(u64) -> f64 + '_>
            }),
            tail: self
                .ratio_tail(1)
                .map(|_| Box::new(move |k: u64, _r: f64| self.ratio_tail(k).unwrap_or((0.0, f64::INFINITY))) as Box<dyn Fn(u64, f64) -> (f64, f64) + '_>),
            summable: self.summable(),
        }
    }

    /// A draw of `R`; `u64::MAX` stands for an infinite radius.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            RadiusLaw::FiniteSupport(p) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (k, pk) in p.iter().enumerate() {
                    acc += pk;
                    if u < acc {
                        return k as u64;
                    }
                }
                // rounding in the cumulative sum: last atom with positive mass
                p.iter().rposition(|x| *x > 0.0).unwrap_or(0) as u64
            }
            RadiusLaw::GeometricLifetime { p } => geometric_lifetime(*p, rng),
            RadiusLaw::FromSurvivalLaw(law) => {
                let x = law.sample(rng);
                geometric_lifetime(x, rng)
            }
            RadiusLaw::Effective { base, lambda } => {
                let count = Geometric::new(1.0 / (1.0 + lambda)).expect("valid lambda").sample(rng);
                (0..count).map(|_| base.sample(rng)).max().unwrap_or(0)
            }
            RadiusLaw::Cdf(_) => self.sample_by_inversion(rng),
        }
    }

    /// A draw of `R` by inverting the CDF sequence directly.
    pub fn sample_by_inversion<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        (0..INVERSION_LIMIT).find(|&k| u < self.cdf(k)).unwrap_or(u64::MAX)
    }
}

fn pow_u64(x: f64, n: u64) -> f64 {
    if n <= i32::MAX as u64 {
        x.powi(n as i32)
    } else {
        x.powf(n as f64)
    }
}

/// `L` with `P(L >= k) = x^k`; `u64::MAX` when `x = 1`.
pub fn geometric_lifetime<R: Rng + ?Sized>(x: f64, rng: &mut R) -> u64 {
    if x <= 0.0 {
        return 0;
    }
    if x >= 1.0 {
        return u64::MAX;
    }
    let u: f64 = 1.0 - rng.random::<f64>();
    let l = (u.ln() / x.ln()).floor();
    if l >= u64::MAX as f64 {
        u64::MAX
    } else {
        l as u64
    }
}

/// CDF of the per-site maximum radius when each site holds a geometric
/// number of individuals: `1 / (1 + lambda (1 - alpha_k))`.
pub fn effective_cdf(base: &RadiusLaw, lambda: f64, k: u64) -> f64 {
    1.0 / (1.0 + lambda * base.tail(k))
}

/// `P(A_F) = (1 + sum_{j>=1} prod_{k<j} alpha_k)^{-1}`.
pub fn firework_survival(alpha: &RadiusLaw) -> Result<EvalResult> {
    alpha.validate()?;
    match raabe_series(alpha.ratios(), TOL, MAX_SERIES_TERMS) {
        SeriesSum::Divergent => Ok(EvalResult { method: Method::Series, ..EvalResult::closed(0.0) }),
        SeriesSum::Finite { value, bound, terms } => {
            let v = 1.0 / (1.0 + value);
            let abs_error = match bound {
                Some(b) => ErrorBound::Certified(b * v * v + 4.0 * f64::EPSILON * v * (terms as f64).sqrt()),
                None => ErrorBound::Heuristic,
            };
            Ok(EvalResult { value: Extended::Finite(v), abs_error, terms, method: Method::Series })
        }
    }
}

/// `E(M_F) = 1 / prod_{k>=0} alpha_k`, infinite when the product vanishes.
pub fn firework_expected_range(alpha: &RadiusLaw) -> Result<EvalResult> {
    alpha.validate()?;
    match log_product(alpha.ratios(), 1e-15, MAX_PRODUCT_TERMS) {
        ProductSum::Infinite => Ok(EvalResult::infinite(Method::Product)),
        ProductSum::Finite { log_value, .. } if log_value.is_infinite() => Ok(EvalResult::infinite(Method::Product)),
        ProductSum::Finite { log_value, log_half_width, terms } => {
            let v = log_value.exp();
            let abs_error = match log_half_width {
                Some(hw) => ErrorBound::Certified(v * hw.exp_m1() + 4.0 * f64::EPSILON * v * (terms as f64 + 1.0)),
                None => ErrorBound::Heuristic,
            };
            Ok(EvalResult { value: Extended::Finite(v), abs_error, terms, method: Method::Product })
        }
    }
}

/// `f_k = (1 - alpha_{k-1}) prod_{i<=k-2} alpha_i` for `k >= 1`.
pub fn interarrival(alpha: &RadiusLaw, k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Inconsistency("inter-arrival times start at 1".into()));
    }
    let prefix: f64 = (0..k - 1).map(|i| alpha.cdf(i)).product();
    Ok((1.0 - alpha.cdf(k - 1)) * prefix)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenewalData {
    /// `f[k]` for `k = 0..=n_max`; `f[0] = 0`.
    pub f: Vec<f64>,
    /// `u[n]` for `n = 0..=n_max`.
    pub u: Vec<f64>,
    /// `prod_{k>=0} alpha_k`, the probability of no further renewal.
    pub f_infinity: f64,
}

/// Renewal sequence `u_0 = 1`, `u_n = sum_{k=1}^n f_k u_{n-k}`.
///
/// `P(M_F >= n + 1) = u_n`.
pub fn renewal_sequence(alpha: &RadiusLaw, n_max: usize) -> Result<RenewalData> {
    alpha.validate()?;
    let mut f = vec![0.0; n_max + 1];
    let mut prefix = 1.0;
    for (k, fk) in f.iter_mut().enumerate().skip(1) {
        let a = alpha.cdf(k as u64 - 1);
        *fk = (1.0 - a) * prefix;
        prefix *= a;
    }
    let mut u = vec![0.0; n_max + 1];
    u[0] = 1.0;
    for n in 1..=n_max {
        u[n] = (1..=n).map(|k| f[k] * u[n - k]).sum();
    }
    let f_infinity = match firework_expected_range(alpha)?.value {
        Extended::Finite(e) => 1.0 / e,
        _ => 0.0,
    };
    Ok(RenewalData { f, u, f_infinity })
}

/// `P(M_F >= n) = u_{n-1}`.
pub fn tail_probability(alpha: &RadiusLaw, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Inconsistency("tail probabilities start at n = 1".into()));
    }
    Ok(renewal_sequence(alpha, n - 1)?.u[n - 1])
}

/// Survival probability of the individual-random or general-lifetime model
/// from that of the matching effective Firework: `(1 + lambda) P(A_F) / lambda`.
pub fn bridge_survival(lambda: f64, p_firework: f64) -> Result<f64> {
    let v = (1.0 + lambda) * p_firework / lambda;
    if !(0.0..=1.0 + 1e-9).contains(&v) {
        return Err(Error::Inconsistency(format!(
            "survival {v} outside [0, 1]: the Firework probability does not come from the effective law at lambda = {lambda}"
        )));
    }
    Ok(v.min(1.0))
}

/// Expected catastrophe count from the expected Firework range:
/// `((1 + lambda) E(M_F) - 1) / lambda`.
pub fn bridge_expected(lambda: f64, e_firework: Extended) -> Result<Extended> {
    match e_firework {
        Extended::Infinite => Ok(Extended::Infinite),
        Extended::Undefined => Ok(Extended::Undefined),
        Extended::Finite(e) if e >= 1.0 - 1e-12 => Ok(Extended::Finite(((1.0 + lambda) * e - 1.0) / lambda)),
        Extended::Finite(e) => Err(Error::Inconsistency(format!("expected range {e} is below 1"))),
    }
}

impl fmt::Display for RadiusLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadiusLaw::FiniteSupport(p) => {
                f.write_str("support:")?;
                for (k, pk) in p.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{k}={pk}")?;
                }
                Ok(())
            }
            RadiusLaw::GeometricLifetime { p } => write!(f, "geomlife:p={p}"),
            RadiusLaw::FromSurvivalLaw(law) => write!(f, "fromdist:{law}"),
            RadiusLaw::Effective { base, lambda } => write!(f, "effective({base},lambda={lambda})"),
            RadiusLaw::Cdf(c) => write!(f, "cdf:{}", c.name),
        }
    }
}

impl FromStr for RadiusLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, body) = s.split_once(':').ok_or_else(|| Error::Parse(format!("unknown radius law '{s}'")))?;
        let law = match name {
            "support" => {
                let mut probs: Vec<f64> = Vec::new();
                let mut seen = Vec::new();
                for part in body.split(',') {
                    let (k, v) = part
                        .split_once('=')
                        .ok_or_else(|| Error::Parse(format!("expected k=prob, got '{part}'")))?;
                    let k: usize = k.parse().map_err(|_| Error::Parse(format!("'{k}' is not a radius")))?;
                    let v: f64 = v.parse().map_err(|_| Error::Parse(format!("'{v}' is not a number")))?;
                    if seen.contains(&k) {
                        return Err(Error::Parse(format!("radius {k} given twice")));
                    }
                    seen.push(k);
                    if probs.len() <= k {
                        probs.resize(k + 1, 0.0);
                    }
                    probs[k] = v;
                }
                RadiusLaw::FiniteSupport(probs)
            }
            "geomlife" => RadiusLaw::GeometricLifetime { p: parse_params(body, &["p"])?[0] },
            "fromdist" => RadiusLaw::FromSurvivalLaw(body.parse()?),
            _ => return Err(Error::Parse(format!("unknown radius law '{s}'"))),
        };
        law.validate().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(law)
    }
}
