//! Independent ground truth: exhaustive enumeration of the Firework process
//! over finitely supported radius laws, and the killed-truncation solver for
//! the backward Kolmogorov system of the catastrophe-random model.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laws::SurvivalLaw;

/// Largest number of radius assignments [`brute_force_firework_tail`] will visit.
pub const ENUMERATION_BUDGET: f64 = 1e7;

pub const START_LEVEL: usize = 64;
pub const MAX_LEVEL: usize = 1 << 14;

/// `P(M_F >= n)` for a radius law on `{0, .., K}`, by enumerating every
/// assignment of radii to sites `0..n-2` in exact rational arithmetic.
///
/// The probabilities are converted exactly from their binary values.
pub fn brute_force_firework_tail(support: &[f64], n: u32) -> Result<BigRational> {
    let atoms: Vec<(u64, BigRational)> = support
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > 0.0)
        .map(|(r, &p)| {
            BigRational::from_float(p)
                .map(|q| (r as u64, q))
                .ok_or_else(|| Error::InvalidLaw(format!("probability {p} is not finite")))
        })
        .collect::<Result<_>>()?;
    if n <= 1 {
        return Ok(BigRational::one());
    }
    let needed = (atoms.len() as f64).powi(n as i32 - 1);
    if needed > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded { needed, budget: ENUMERATION_BUDGET });
    }
    let target = u64::from(n) - 1;
    let mut total = BigRational::zero();
    enumerate(&atoms, 0, 0, target, BigRational::one(), &mut total);
    Ok(total)
}

// Site `site` is informed (site <= frontier); assign its radius and recurse.
fn enumerate(atoms: &[(u64, BigRational)], site: u64, frontier: u64, target: u64, weight: BigRational, total: &mut BigRational) {
    for (r, p) in atoms {
        let reach = frontier.max(site + r);
        let w = &weight * p;
        if reach >= target {
            // sites beyond the last informed one do not matter; their
            // probabilities sum to one
            *total += w;
        } else if site < reach {
            enumerate(atoms, site + 1, reach, target, w, total);
        }
    }
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn rational_from_ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationReport {
    /// Lower bound on `tau_i` at the final level.
    pub value: f64,
    /// Final truncation level.
    pub n: usize,
    pub converged: bool,
    /// Difference between the last two levels.
    pub delta: f64,
    /// `(level, value)` for every level visited.
    pub history: Vec<(usize, f64)>,
}

fn check(lambda: f64, law: &SurvivalLaw) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidLaw(format!("lambda must be finite and positive, got {lambda}")));
    }
    law.validate()?;
    if law.is_point_mass_at_one() {
        return Err(Error::InvalidLaw("the catastrophe-random model excludes the point mass at 1".into()));
    }
    Ok(())
}

/// Expected catastrophe counts `tau_1..tau_keep` of the chain killed on
/// leaving `{1..n}`.
///
/// Row `i` of the system reads
/// `(lambda+1) tau_i - lambda tau_{i+1} - sum_{j<=i} w_ij tau_j = 1`
/// with `tau_{n+1} = 0` and `w_ij` the thinning probabilities. The matrix is
/// lower Hessenberg; eliminating the super-diagonal from the bottom row up
/// leaves a lower-triangular system whose first `keep` rows are solved
/// forwards. Every step combines rows with non-negative multipliers, so no
/// cancellation occurs.
pub fn truncated_tau(lambda: f64, law: &SurvivalLaw, n: usize, keep: usize) -> Result<Vec<f64>> {
    check(lambda, law)?;
    if n == 0 || keep == 0 || keep > n {
        return Err(Error::Inconsistency(format!("need 1 <= keep <= n, got keep={keep}, n={n}")));
    }
    let mut kept: Vec<Vec<f64>> = vec![Vec::new(); keep];
    let mut kept_rhs = vec![0.0; keep];
    // reduced row i+1 (coefficients of tau_1..tau_{i+1}) and its rhs
    let mut below: Vec<f64> = Vec::new();
    let mut below_rhs = 0.0;
    for i in (1..=n).rev() {
        let w = law.thinning_row(i as u64)?;
        let mut row: Vec<f64> = w[1..].iter().map(|x| -x).collect();
        row[i - 1] += lambda + 1.0;
        let mut rhs = 1.0;
        if i < n {
            let mult = lambda / below[i];
            for (r, b) in row.iter_mut().zip(&below) {
                *r += mult * b;
            }
            rhs += mult * below_rhs;
        }
        if i <= keep {
            kept[i - 1] = row.clone();
            kept_rhs[i - 1] = rhs;
        }
        below = row;
        below_rhs = rhs;
    }
    let mut tau = vec![0.0; keep];
    for k in 0..keep {
        let acc: f64 = kept[k][..k].iter().zip(&tau).map(|(a, t)| a * t).sum();
        tau[k] = (kept_rhs[k] - acc) / kept[k][k];
    }
    Ok(tau)
}

/// The full solution vector of the level-`n` killed system.
pub fn truncated_solution(lambda: f64, law: &SurvivalLaw, n: usize) -> Result<Vec<f64>> {
    truncated_tau(lambda, law, n, n)
}

/// Max-norm residual of `tau` (length `n`, `tau_{n+1} = 0`) in the level-`n`
/// killed system.
pub fn residual(lambda: f64, law: &SurvivalLaw, tau: &[f64]) -> Result<f64> {
    let n = tau.len();
    let mut worst = 0.0f64;
    for i in 1..=n {
        let w = law.thinning_row(i as u64)?;
        let next = if i < n { tau[i] } else { 0.0 };
        let thinned: f64 = (1..=i).map(|j| w[j] * tau[j - 1]).sum();
        let r = (lambda + 1.0) * tau[i - 1] - lambda * next - thinned - 1.0;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// `tau_i` by doubling the truncation level from 64 until successive levels
/// agree within `tol` or the level cap is reached.
pub fn truncated_kolmogorov_tau(lambda: f64, law: &SurvivalLaw, i: usize, tol: f64) -> Result<TruncationReport> {
    check(lambda, law)?;
    if i == 0 {
        return Err(Error::Inconsistency("tau_i needs i >= 1".into()));
    }
    let mut n = START_LEVEL.max((2 * i).next_power_of_two());
    let mut history = Vec::new();
    let mut prev: Option<f64> = None;
    loop {
        let v = truncated_tau(lambda, law, n, i)?[i - 1];
        history.push((n, v));
        if let Some(p) = prev {
            let delta = (v - p).abs();
            if delta < tol || n >= MAX_LEVEL {
                return Ok(TruncationReport { value: v, n, converged: delta < tol, delta, history });
            }
        }
        prev = Some(v);
        n *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_examples() {
        let law = [0.5, 0.25, 0.25];
        assert_eq!(brute_force_firework_tail(&law, 3).unwrap(), rational_from_ratio(3, 8));
        assert_eq!(brute_force_firework_tail(&law, 1).unwrap(), BigRational::one());
        assert_eq!(brute_force_firework_tail(&[0.5, 0.5], 4).unwrap(), rational_from_ratio(1, 8));
    }

    #[test]
    fn enumeration_refuses_over_budget() {
        let law = [0.25; 4];
        assert!(matches!(brute_force_firework_tail(&law, 14), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn kolmogorov_examples() {
        let half = SurvivalLaw::degenerate(0.5).unwrap();
        let r = truncated_kolmogorov_tau(1.0, &half, 1, 1e-8).unwrap();
        assert!(r.converged);
        assert!((r.value - 3.768_462).abs() < 1e-6);
        let zero = SurvivalLaw::degenerate(0.0).unwrap();
        assert_eq!(truncated_kolmogorov_tau(0.5, &zero, 1, 1e-12).unwrap().value, 1.0);
        let power = SurvivalLaw::power(1.0).unwrap();
        let r = truncated_kolmogorov_tau(3.0, &power, 1, 1e-6).unwrap();
        assert!((r.value - 5.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn killed_levels_are_monotone() {
        let law = SurvivalLaw::Uniform;
        let mut last = 0.0;
        for n in [4usize, 8, 16, 32, 64, 128] {
            let v = truncated_tau(2.0, &law, n, 1).unwrap()[0];
            assert!(v >= last - 1e-12);
            last = v;
        }
    }

    #[test]
    fn full_solution_has_small_residual() {
        for law in [SurvivalLaw::Uniform, SurvivalLaw::beta(2.0, 3.0).unwrap(), SurvivalLaw::truncated_exponential(1.0).unwrap()] {
            let tau = truncated_solution(1.5, &law, 200).unwrap();
            assert!(residual(1.5, &law, &tau).unwrap() < 1e-9);
        }
    }
}
