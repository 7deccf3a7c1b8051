//! Closed forms, certified series and products for the three non-spatial
//! models, together with the survival criteria of the individual-random
//! model.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::laws::{LeftLimit, SurvivalLaw};
use crate::numeric::dd::Dd;
use crate::numeric::series::{log_product, raabe_series, ProductSum, RatioSequence, SeriesSum};
use crate::oracle;

/// Target absolute error of certified series and products.
pub const TOL: f64 = 1e-10;
/// Width of the band mapped onto the critical branch of a criterion.
pub const CRITICAL_BAND: f64 = 1e-9;
/// Largest immigration rate for which the alternating series defining
/// `S_nu` is summed directly.
pub const SERIES_LAMBDA_MAX: f64 = 0.9;

const MAX_SERIES_TERMS: u64 = 1 << 22;
const MAX_PRODUCT_TERMS: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Extended {
    Finite(f64),
    Infinite,
    /// Divergent or outside the formula's domain.
    Undefined,
}

impl Extended {
    pub fn to_f64(self) -> f64 {
        match self {
            Extended::Finite(v) => v,
            Extended::Infinite => f64::INFINITY,
            Extended::Undefined => f64::NAN,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => write!(f, "inf"),
            Extended::Undefined => write!(f, "undefined"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ErrorBound {
    Certified(f64),
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    ClosedForm,
    Series,
    Product,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::ClosedForm => "closed_form",
            Method::Series => "series",
            Method::Product => "product",
            Method::Oracle => "oracle",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalResult {
    pub value: Extended,
    pub abs_error: ErrorBound,
    pub terms: u64,
    pub method: Method,
}

impl EvalResult {
    pub fn closed(value: f64) -> Self {
        EvalResult { value: Extended::Finite(value), abs_error: ErrorBound::Certified(0.0), terms: 0, method: Method::ClosedForm }
    }

    pub fn infinite(method: Method) -> Self {
        EvalResult { value: Extended::Infinite, abs_error: ErrorBound::Certified(0.0), terms: 0, method }
    }

    pub fn undefined(method: Method) -> Self {
        EvalResult { value: Extended::Undefined, abs_error: ErrorBound::Heuristic, terms: 0, method }
    }

    pub fn finite(&self) -> Option<f64> {
        match self.value {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// The value as an `f64`: `inf` for infinite, `NaN` for undefined.
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn error_bound(&self) -> Option<f64> {
        match self.abs_error {
            ErrorBound::Certified(e) => Some(e),
            ErrorBound::Heuristic => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Survives,
    Extinct,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CriterionRoute {
    MomentAsymptotics,
    DensityLimit,
    CriticalDifferentiable,
    ClosedFormFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriterionVerdict {
    pub verdict: Verdict,
    pub route: CriterionRoute,
    pub critical_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SumVerdict {
    Diverges,
    Converges,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MomentSumVerdict {
    pub verdict: SumVerdict,
    pub route: CriterionRoute,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidLaw(format!("lambda must be finite and positive, got {lambda}")))
    }
}

fn reject_point_mass_at_one(law: &SurvivalLaw) -> Result<()> {
    if law.is_point_mass_at_one() {
        Err(Error::InvalidLaw("the catastrophe-random model excludes the point mass at 1".into()))
    } else {
        Ok(())
    }
}

/// `ln prod_{k >= start} (1 + lambda p^k)` with a certified half-width.
fn geometric_log_product(lambda: f64, p: f64, start: i32) -> (f64, f64, u64) {
    let mut pk = p.powi(start);
    let seq = RatioSequence {
        next: Box::new(move || {
            let r = lambda * pk;
            pk *= p;
            r
        }),
        raabe_floor: None,
        tail: Some(Box::new(move |_, r| (r / (1.0 - p), r / (1.0 - p)))),
        summable: Some(true),
    };
    match log_product(seq, 1e-17, MAX_PRODUCT_TERMS) {
        ProductSum::Finite { log_value, log_half_width, terms } => {
            (log_value, log_half_width.unwrap_or(f64::INFINITY), terms)
        }
        ProductSum::Infinite => unreachable!("geometric ratios are summable"),
    }
}

/// Turns `L = ln P` with half-width `hw` into `(P - 1)/lambda` and its error.
fn affine_from_log(lambda: f64, prefactor: f64, log: f64, hw: f64, terms: u64) -> (f64, f64) {
    let prod = prefactor * log.exp();
    let value = (prod - 1.0) / lambda;
    let rounding = 4.0 * f64::EPSILON * (terms as f64 + 2.0) * prod;
    (value, (prod * hw.exp_m1() + rounding) / lambda)
}

/// Expected extinction time of the classical process,
/// `(1/lambda) (prod_{k>=0} (1 + lambda p^k) - 1)`.
pub fn classical_extinction_time(lambda: f64, p: f64) -> Result<EvalResult> {
    check_lambda(lambda)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidLaw(format!("p must lie in [0, 1], got {p}")));
    }
    if p == 1.0 {
        return Ok(EvalResult::undefined(Method::Product));
    }
    if p == 0.0 {
        return Ok(EvalResult::closed(1.0));
    }
    let (log, hw, terms) = geometric_log_product(lambda, p, 0);
    let (value, err) = affine_from_log(lambda, 1.0, log, hw, terms);
    Ok(EvalResult { value: Extended::Finite(value), abs_error: ErrorBound::Certified(err), terms, method: Method::Product })
}

/// `S_nu(lambda) = sum_{n>=1} (-lambda)^n / prod_{j<=n} (1 - E[X^j])`, or its
/// analytic continuation where a closed form exists.
///
/// Without a closed form and for `lambda > 0.9` the result is `Undefined`;
/// callers then fall back to the truncated Kolmogorov oracle.
pub fn s_nu(lambda: f64, law: &SurvivalLaw) -> Result<EvalResult> {
    check_lambda(lambda)?;
    law.validate()?;
    reject_point_mass_at_one(law)?;
    if let Some((a, 1.0)) = law.beta_params() {
        return Ok(EvalResult::closed((-(a + 1.0) * lambda.ln_1p()).exp() - 1.0));
    }
    if let SurvivalLaw::Degenerate { p } = *law {
        // -S/(1+S) = prod (1 + lambda p^k) - 1
        if p == 0.0 {
            return Ok(EvalResult::closed(1.0 / (1.0 + lambda) - 1.0));
        }
        let (log, hw, terms) = geometric_log_product(lambda, p, 0);
        let value = (-log).exp_m1();
        let err = (-log).exp() * hw.exp_m1() + 4.0 * f64::EPSILON * terms as f64;
        return Ok(EvalResult { value: Extended::Finite(value), abs_error: ErrorBound::Certified(err), terms, method: Method::Product });
    }
    if lambda > SERIES_LAMBDA_MAX {
        return Ok(EvalResult::undefined(Method::Series));
    }
    Ok(s_nu_series(lambda, law)?.map_or(EvalResult::undefined(Method::Series), |s| s.result()))
}

/// Partial sums of the alternating series, accumulated in double-double.
#[derive(Debug, Clone, Copy)]
pub struct SeriesValue {
    pub value: Dd,
    pub bound: f64,
    pub terms: u64,
}

impl SeriesValue {
    fn result(&self) -> EvalResult {
        EvalResult {
            value: Extended::Finite(self.value.to_f64()),
            abs_error: ErrorBound::Certified(self.bound + f64::EPSILON * self.value.hi.abs()),
            terms: self.terms,
            method: Method::Series,
        }
    }
}

/// Direct summation of `S_nu(lambda)` for `lambda < 1`, regardless of closed
/// forms. Returns `None` when the terms do not settle into a decreasing
/// regime within the term budget or the cancellation is too severe.
pub fn s_nu_series(lambda: f64, law: &SurvivalLaw) -> Result<Option<SeriesValue>> {
    check_lambda(lambda)?;
    law.validate()?;
    reject_point_mass_at_one(law)?;
    if lambda >= 1.0 {
        return Err(Error::UnsupportedRegime(format!("the series for S diverges at lambda = {lambda}")));
    }
    let mut term = Dd::ONE;
    let mut sum = Dd::ZERO;
    let mut largest = 1.0f64;
    let mut moments = law.moments_dd();
    for n in 1..=MAX_SERIES_TERMS {
        let m = moments.next().expect("infinite stream");
        let ratio = Dd::new(lambda) / (Dd::ONE - m);
        term = -(term * ratio);
        sum = sum + term;
        largest = largest.max(term.hi.abs());
        if largest > 1e16 {
            return Ok(None);
        }
        // once lambda/(1 - m_{n+1}) < 1 the terms decrease in modulus and
        // the alternating-series bound applies
        if ratio.hi < 1.0 && term.hi.abs() < 1e-31 * sum.hi.abs().max(1e-300) {
            let bound = term.hi.abs() + largest * 1e-30;
            return Ok(Some(SeriesValue { value: sum, bound, terms: n }));
        }
    }
    Ok(None)
}

/// Expected number of catastrophes until extinction in the
/// catastrophe-random model, `-(1/lambda) S/(1+S)`.
pub fn cat_random_expected(lambda: f64, law: &SurvivalLaw) -> Result<EvalResult> {
    check_lambda(lambda)?;
    law.validate()?;
    reject_point_mass_at_one(law)?;
    if let SurvivalLaw::Degenerate { p } = *law {
        return classical_extinction_time(lambda, p);
    }
    if let Some((a, 1.0)) = law.beta_params() {
        // ((1+lambda)^{a+1} - 1)/lambda
        return Ok(EvalResult::closed(((a + 1.0) * lambda.ln_1p()).exp_m1() / lambda));
    }
    let s = s_nu(lambda, law)?;
    match s.value {
        Extended::Finite(sv) => {
            let one_plus = 1.0 + sv;
            let value = -sv / one_plus / lambda;
            let err = s.error_bound().map_or(ErrorBound::Heuristic, |e| {
                ErrorBound::Certified(e / (one_plus * one_plus - e * one_plus).max(f64::MIN_POSITIVE) / lambda)
            });
            Ok(EvalResult { value: Extended::Finite(value), abs_error: err, terms: s.terms, method: s.method })
        }
        _ => cat_random_expected_oracle(lambda, law),
    }
}

/// The oracle route for [`cat_random_expected`], exposed for cross-checks.
pub fn cat_random_expected_oracle(lambda: f64, law: &SurvivalLaw) -> Result<EvalResult> {
    let report = oracle::truncated_kolmogorov_tau(lambda, law, 1, 1e-11)?;
    Ok(EvalResult {
        value: Extended::Finite(report.value),
        abs_error: ErrorBound::Heuristic,
        terms: report.n as u64,
        method: Method::Oracle,
    })
}

/// `tau_1` in double-double, used to seed the recovery recurrence.
fn tau_one_dd(lambda: f64, law: &SurvivalLaw) -> Result<Dd> {
    if let SurvivalLaw::Degenerate { p } = *law {
        // (prod_{k>=0} (1 + lambda p^k) - 1)/lambda
        let mut prod = Dd::ONE;
        let mut pk = Dd::ONE;
        loop {
            let r = pk * lambda;
            prod = prod * (Dd::ONE + r);
            if r.hi < 1e-34 {
                break;
            }
            pk = pk * p;
        }
        return Ok((prod - 1.0) / lambda);
    }
    let s = s_nu_series(lambda, law)?
        .ok_or_else(|| Error::UnsupportedRegime("the series for S does not settle; use the oracle".into()))?;
    Ok(-(s.value / (Dd::ONE + s.value)) / lambda)
}

/// `tau_i`, the expected number of catastrophes from `i` individuals, through
/// the recurrence `v_{k+1} = (1 + lambda tau_1 - (1 - m_k) v_k) / lambda`,
/// `v_1 = tau_1`, and `tau_i = sum_k C(i,k) (-1)^{k-1} v_k`.
pub fn cat_random_tau_recovery(lambda: f64, law: &SurvivalLaw, i: u32) -> Result<EvalResult> {
    check_lambda(lambda)?;
    law.validate()?;
    reject_point_mass_at_one(law)?;
    if lambda >= 1.0 {
        return Err(Error::UnsupportedRegime(format!("recovery needs lambda < 1, got {lambda}; use the oracle")));
    }
    if !(1..=20).contains(&i) {
        return Err(Error::UnsupportedRegime(format!("recovery supports 1 <= i <= 20, got {i}")));
    }
    let tau1 = tau_one_dd(lambda, law)?;
    let c = (Dd::ONE + tau1 * lambda) / lambda;
    let mut v = Vec::with_capacity(i as usize);
    v.push(tau1);
    let mut moments = law.moments_dd();
    for _ in 1..i {
        let m = moments.next().expect("infinite stream");
        let last = *v.last().unwrap();
        v.push(c - (Dd::ONE - m) * last / lambda);
    }
    let mut tau = Dd::ZERO;
    let mut binom = Dd::ONE;
    for k in 1..=i {
        binom = binom * f64::from(i - k + 1) / f64::from(k);
        let t = binom * v[k as usize - 1];
        tau = if k % 2 == 1 { tau + t } else { tau - t };
    }
    Ok(EvalResult {
        value: Extended::Finite(tau.to_f64()),
        abs_error: ErrorBound::Heuristic,
        terms: u64::from(i),
        method: Method::Series,
    })
}

fn ratio_sequence<'a>(lambda: f64, law: &'a SurvivalLaw) -> RatioSequence<'a> {
    let mut moments = law.moments();
    RatioSequence {
        next: Box::new(move || lambda * moments.next().expect("infinite stream")),
        raabe_floor: law.raabe_floor(1).map(|_| {
            Box::new(move |j: u64| lambda * law.raabe_floor(j).unwrap_or(0.0)) as Box<dyn Fn(u64) -> f64 + 'a>
        }),
        tail: law
            .moment_tail(1)
            .map(|_| Box::new(move |k: u64, _r: f64| {
                let t = lambda * law.moment_tail(k + 1).unwrap_or(f64::INFINITY);
                (t, t)
            }) as Box<dyn Fn(u64, f64) -> (f64, f64) + 'a>),
        summable: law.moments_summable(),
    }
}

/// Survival probability of the individual-random model,
/// `(1 + lambda) / (lambda (1 + sum_j prod_{k<j} 1/(1 + lambda E[X^{k+1}])))`.
pub fn ind_random_survival(lambda: f64, law: &SurvivalLaw) -> Result<EvalResult> {
    check_lambda(lambda)?;
    law.validate()?;
    if law.is_point_mass_at_one() {
        return Ok(EvalResult::closed(1.0));
    }
    if let Some((a, 1.0)) = law.beta_params() {
        let v = if a.mul_add(lambda, -1.0) > 0.0 { 1.0 - 1.0 / (a * lambda) } else { 0.0 };
        return Ok(EvalResult::closed(v));
    }
    if law.moments_summable() == Some(true) {
        return Ok(EvalResult::closed(0.0));
    }
    if survival_criterion(lambda, law)?.verdict == Verdict::Extinct {
        return Ok(EvalResult::closed(0.0));
    }
    ind_random_survival_series(lambda, law)
}

/// The generic series route of [`ind_random_survival`], without closed-form
/// shortcuts.
pub fn ind_random_survival_series(lambda: f64, law: &SurvivalLaw) -> Result<EvalResult> {
    check_lambda(lambda)?;
    law.validate()?;
    match raabe_series(ratio_sequence(lambda, law), TOL * 1e-2, MAX_SERIES_TERMS) {
        SeriesSum::Divergent => Ok(EvalResult { value: Extended::Finite(0.0), method: Method::Series, ..EvalResult::closed(0.0) }),
        SeriesSum::Finite { value, bound, terms } => {
            let scale = (1.0 + lambda) / lambda;
            let denom = 1.0 + value;
            let v = scale / denom;
            let abs_error = match bound {
                Some(b) => ErrorBound::Certified(scale * b / (denom * denom) + 8.0 * f64::EPSILON * v * (terms as f64).sqrt()),
                None => ErrorBound::Heuristic,
            };
            Ok(EvalResult { value: Extended::Finite(v), abs_error, terms, method: Method::Series })
        }
    }
}

/// Expected number of catastrophes until extinction in the
/// individual-random model, `(1/lambda)((1+lambda) prod_k (1 + lambda E[X^{k+1}]) - 1)`.
pub fn ind_random_expected(lambda: f64, law: &SurvivalLaw) -> Result<EvalResult> {
    check_lambda(lambda)?;
    law.validate()?;
    match moment_sum_diverges(law).verdict {
        SumVerdict::Diverges => return Ok(EvalResult::infinite(Method::Product)),
        SumVerdict::Converges | SumVerdict::Inconclusive => {}
    }
    if let SurvivalLaw::Degenerate { p } = *law {
        if p == 0.0 {
            return Ok(EvalResult::closed(1.0));
        }
        let (log, hw, terms) = geometric_log_product(lambda, p, 1);
        let (value, err) = affine_from_log(lambda, 1.0 + lambda, log, hw, terms);
        return Ok(EvalResult { value: Extended::Finite(value), abs_error: ErrorBound::Certified(err), terms, method: Method::Product });
    }
    match log_product(ratio_sequence(lambda, law), 1e-16, MAX_PRODUCT_TERMS) {
        ProductSum::Infinite => Ok(EvalResult::infinite(Method::Product)),
        ProductSum::Finite { log_value, log_half_width, terms } => {
            let (value, err) = affine_from_log(lambda, 1.0 + lambda, log_value, log_half_width.unwrap_or(0.0), terms);
            let abs_error = if log_half_width.is_some() { ErrorBound::Certified(err) } else { ErrorBound::Heuristic };
            Ok(EvalResult { value: Extended::Finite(value), abs_error, terms, method: Method::Product })
        }
    }
}

/// Whether `sum_n E[X^n]` diverges.
pub fn moment_sum_diverges(law: &SurvivalLaw) -> MomentSumVerdict {
    match law.moments_summable() {
        Some(true) => MomentSumVerdict { verdict: SumVerdict::Converges, route: CriterionRoute::ClosedFormFamily },
        Some(false) => MomentSumVerdict { verdict: SumVerdict::Diverges, route: CriterionRoute::ClosedFormFamily },
        None => {
            // local decay exponent of the moments between n and 2n
            let n = 1u64 << 16;
            let verdict = match (law.moment(n), law.moment(2 * n)) {
                (Ok(a), Ok(b)) if a > 0.0 && b > 0.0 => {
                    let slope = (a / b).ln() / std::f64::consts::LN_2;
                    if slope < 0.9 {
                        SumVerdict::Diverges
                    } else if slope > 1.1 {
                        SumVerdict::Converges
                    } else {
                        SumVerdict::Inconclusive
                    }
                }
                (Ok(0.0), Ok(_)) => SumVerdict::Converges,
                _ => SumVerdict::Inconclusive,
            };
            MomentSumVerdict { verdict, route: CriterionRoute::MomentAsymptotics }
        }
    }
}

/// Phase-transition verdict for the individual-random model.
pub fn survival_criterion(lambda: f64, law: &SurvivalLaw) -> Result<CriterionVerdict> {
    check_lambda(lambda)?;
    law.validate()?;
    let closed = |verdict, critical_rate| CriterionVerdict { verdict, route: CriterionRoute::ClosedFormFamily, critical_rate };
    if let SurvivalLaw::Degenerate { p } = *law {
        return Ok(closed(if p == 1.0 { Verdict::Survives } else { Verdict::Extinct }, None));
    }
    if let Some((a, b)) = law.beta_params() {
        return Ok(if b < 1.0 {
            closed(Verdict::Survives, None)
        } else if b > 1.0 {
            closed(Verdict::Extinct, None)
        } else {
            // exact sign of a*lambda - 1; the critical point itself is extinct
            let v = if a.mul_add(lambda, -1.0) > 0.0 { Verdict::Survives } else { Verdict::Extinct };
            closed(v, Some(1.0 / a))
        });
    }
    let boundary = law.density_left_limit();
    match boundary.limit {
        LeftLimit::Finite(f1) if boundary.bounded && f1 > 0.0 => {
            let critical_rate = match *law {
                SurvivalLaw::TruncatedExponential { gamma } => gamma.exp_m1() / gamma,
                _ => 1.0 / f1,
            };
            let gap = lambda * f1 - 1.0;
            let verdict = if gap.abs() <= CRITICAL_BAND {
                if boundary.left_differentiable {
                    return Ok(CriterionVerdict {
                        verdict: Verdict::Extinct,
                        route: CriterionRoute::CriticalDifferentiable,
                        critical_rate: Some(critical_rate),
                    });
                }
                Verdict::Inconclusive
            } else if gap > 0.0 {
                Verdict::Survives
            } else {
                Verdict::Extinct
            };
            Ok(CriterionVerdict { verdict, route: CriterionRoute::DensityLimit, critical_rate: Some(critical_rate) })
        }
        LeftLimit::Finite(_) if boundary.bounded => {
            // f(1-) = 0 with a bounded density: n E[X^{n+1}] -> 0
            Ok(CriterionVerdict { verdict: Verdict::Extinct, route: CriterionRoute::DensityLimit, critical_rate: None })
        }
        _ => Ok(CriterionVerdict { verdict: Verdict::Inconclusive, route: CriterionRoute::MomentAsymptotics, critical_rate: None }),
    }
}

/// Foster drift `(lambda + i (E[X] - 1)) / (lambda + 1)` of the embedded
/// catastrophe-random chain at state `i`.
pub fn foster_drift(lambda: f64, law: &SurvivalLaw, i: u64) -> Result<f64> {
    check_lambda(lambda)?;
    let mu = law.moment(1)?;
    Ok((lambda + i as f64 * (mu - 1.0)) / (lambda + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn val(r: Result<EvalResult>) -> f64 {
        r.unwrap().to_f64()
    }

    #[test]
    fn classical_examples() {
        assert!((val(classical_extinction_time(1.0, 0.5)) - 3.768_462).abs() < 1e-6);
        assert_eq!(val(classical_extinction_time(1.0, 0.0)), 1.0);
        assert!((val(classical_extinction_time(2.0, 0.5)) - 6.652_693).abs() < 1e-6);
        assert_eq!(classical_extinction_time(1.0, 1.0).unwrap().value, Extended::Undefined);
        let r = classical_extinction_time(1.0, 0.5).unwrap();
        assert!(r.error_bound().unwrap() < 1e-12);
    }

    #[test]
    fn classical_product_matches_independent_evaluation() {
        // 3 * 2 * prod_{m>=1}(1 + 2^-m) at lambda = 2, p = 1/2
        let mut prod = 6.0;
        for m in 1..200 {
            prod *= 1.0 + 0.5f64.powi(m);
        }
        assert!((val(classical_extinction_time(2.0, 0.5)) - (prod - 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn s_nu_examples() {
        let power = SurvivalLaw::power(1.0).unwrap();
        assert!((val(s_nu(0.5, &power)) + 5.0 / 9.0).abs() < 1e-15);
        let zero = SurvivalLaw::degenerate(0.0).unwrap();
        assert!((val(s_nu(0.5, &zero)) + 1.0 / 3.0).abs() < 1e-15);
        let series = s_nu_series(0.5, &SurvivalLaw::Uniform).unwrap().unwrap();
        assert!((series.value.to_f64() + 5.0 / 9.0).abs() < 1e-10);
        assert!(s_nu(1.0, &SurvivalLaw::degenerate(1.0).unwrap()).is_err());
        let te = SurvivalLaw::truncated_exponential(1.0).unwrap();
        assert_eq!(s_nu(1.5, &te).unwrap().value, Extended::Undefined);
    }

    #[test]
    fn cat_random_examples() {
        assert!((val(cat_random_expected(3.0, &SurvivalLaw::power(1.0).unwrap())) - 5.0).abs() < 1e-12);
        assert_eq!(val(cat_random_expected(0.7, &SurvivalLaw::degenerate(0.0).unwrap())), 1.0);
        assert!((val(cat_random_expected(1.0, &SurvivalLaw::power(2.0).unwrap())) - 7.0).abs() < 1e-12);
        let half = SurvivalLaw::degenerate(0.5).unwrap();
        let e = val(cat_random_expected(0.5, &half));
        assert!((e - 2.768_462).abs() < 1e-6);
        assert!((e - val(classical_extinction_time(0.5, 0.5))).abs() < 1e-9);
    }

    #[test]
    fn euler_identity_through_the_generic_series() {
        for p in [0.2, 0.5, 0.8] {
            for lambda in [0.3, 0.5, 0.9] {
                let law = SurvivalLaw::degenerate(p).unwrap();
                let s = s_nu_series(lambda, &law).unwrap().unwrap().value.to_f64();
                let e = -s / (1.0 + s) / lambda;
                let c = val(classical_extinction_time(lambda, p));
                assert!((e - c).abs() < 1e-9, "p={p} lambda={lambda}: {e} vs {c}");
            }
        }
    }

    #[test]
    fn recovery_examples() {
        let zero = SurvivalLaw::degenerate(0.0).unwrap();
        assert!((val(cat_random_tau_recovery(0.5, &zero, 7)) - 1.0).abs() < 1e-12);
        let half = SurvivalLaw::degenerate(0.5).unwrap();
        assert!((val(cat_random_tau_recovery(0.5, &half, 1)) - 2.768_462).abs() < 1e-6);
        let t1 = val(cat_random_tau_recovery(0.5, &SurvivalLaw::Uniform, 1));
        let t2 = val(cat_random_tau_recovery(0.5, &SurvivalLaw::Uniform, 2));
        assert!(t2 > t1);
        assert!(matches!(cat_random_tau_recovery(1.5, &half, 1), Err(Error::UnsupportedRegime(_))));
    }

    #[test]
    fn ind_random_survival_examples() {
        assert!((val(ind_random_survival(2.0, &SurvivalLaw::Uniform)) - 0.5).abs() < 1e-15);
        assert_eq!(val(ind_random_survival(1.0, &SurvivalLaw::degenerate(1.0).unwrap())), 1.0);
        assert_eq!(val(ind_random_survival(5.0, &SurvivalLaw::degenerate(0.0).unwrap())), 0.0);
        assert_eq!(val(ind_random_survival(10.0, &SurvivalLaw::degenerate(0.9).unwrap())), 0.0);
        // generic route at lambda = 2 for the uniform law: inner sum 2
        let r = ind_random_survival_series(2.0, &SurvivalLaw::Uniform).unwrap();
        assert!((r.to_f64() - 0.5).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn ind_random_generic_route_matches_hypergeometric_closed_form() {
        let law = SurvivalLaw::beta(2.0, 1.0).unwrap();
        let r = ind_random_survival_series(1.0, &law).unwrap();
        assert!((r.to_f64() - 0.5).abs() < 1e-8, "{r:?}");
        // the certified tail bound is loose when terms decay like k^-2
        assert!(r.error_bound().unwrap() < 1e-6, "{r:?}");
    }

    #[test]
    fn ind_random_expected_examples() {
        let half = SurvivalLaw::degenerate(0.5).unwrap();
        let e = val(ind_random_expected(1.0, &half));
        assert!((e - val(classical_extinction_time(1.0, 0.5))).abs() < 1e-9);
        assert_eq!(ind_random_expected(2.0, &SurvivalLaw::Uniform).unwrap().value, Extended::Infinite);
        assert_eq!(val(ind_random_expected(3.0, &SurvivalLaw::degenerate(0.0).unwrap())), 1.0);
        let beta = SurvivalLaw::beta(2.0, 3.0).unwrap();
        let r = ind_random_expected(1.0, &beta).unwrap();
        // independent product with an explicit telescoped tail
        let mut log = 0.0;
        for n in 1..200_000u64 {
            let nf = n as f64;
            log += (24.0 / ((nf + 2.0) * (nf + 3.0) * (nf + 4.0))).ln_1p();
        }
        let direct = (2.0 * log.exp() - 1.0) / 1.0;
        assert!((r.to_f64() - direct).abs() < 1e-8, "{} vs {direct}", r.to_f64());
        assert!(r.error_bound().unwrap() < 1e-9);
    }

    #[test]
    fn moment_sum_examples() {
        assert_eq!(moment_sum_diverges(&SurvivalLaw::Uniform).verdict, SumVerdict::Diverges);
        assert_eq!(moment_sum_diverges(&SurvivalLaw::degenerate(0.5).unwrap()).verdict, SumVerdict::Converges);
        let b12 = SurvivalLaw::beta(1.0, 2.0).unwrap();
        assert_eq!(moment_sum_diverges(&b12).verdict, SumVerdict::Converges);
        // moments 2/((n+1)(n+2)) sum to 1
        let partial: f64 = b12.moments().take(100_000).sum();
        assert!((partial - 1.0).abs() < 1e-4);
    }

    #[test]
    fn criterion_examples() {
        let te = SurvivalLaw::truncated_exponential(1.0).unwrap();
        let e1 = std::f64::consts::E - 1.0;
        let v = survival_criterion(2.0, &te).unwrap();
        assert_eq!(v.verdict, Verdict::Survives);
        assert!((v.critical_rate.unwrap() - e1).abs() < 1e-12);
        let c = survival_criterion(e1, &te).unwrap();
        assert_eq!((c.verdict, c.route), (Verdict::Extinct, CriterionRoute::CriticalDifferentiable));
        assert_eq!(survival_criterion(1.5, &te).unwrap().verdict, Verdict::Extinct);
        assert_eq!(survival_criterion(100.0, &SurvivalLaw::beta(2.0, 3.0).unwrap()).unwrap().verdict, Verdict::Extinct);
        assert_eq!(survival_criterion(0.1, &SurvivalLaw::beta(0.5, 0.5).unwrap()).unwrap().verdict, Verdict::Survives);
        // a < 1, b = 1 at the critical rate resolves to extinction
        assert_eq!(survival_criterion(2.0, &SurvivalLaw::power(0.5).unwrap()).unwrap().verdict, Verdict::Extinct);
    }

    #[test]
    fn foster_drift_examples() {
        let half = SurvivalLaw::degenerate(0.5).unwrap();
        assert_eq!(foster_drift(1.0, &half, 10).unwrap(), -2.0);
        assert_eq!(foster_drift(1.0, &half, 0).unwrap(), 0.5);
        assert_eq!(foster_drift(2.0, &SurvivalLaw::degenerate(0.75).unwrap(), 8).unwrap(), 0.0);
    }
}
