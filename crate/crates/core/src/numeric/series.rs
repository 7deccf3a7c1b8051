//! Certified evaluation of the two infinite expressions that recur throughout
//! the crate, both driven by a non-increasing sequence of ratios `r_k >= 0`:
//!
//! * the series `sum_{j>=1} a_j` with `a_j = prod_{k<j} 1 / (1 + r_k)`;
//! * the product `prod_{k>=0} (1 + r_k)`.
//!
//! Survival probabilities are reciprocals of `1 + sum a_j`, expected ranges and
//! catastrophe counts are affine in the product.

/// A ratio sequence together with whatever analytic knowledge the caller has
/// about its tail.
pub struct RatioSequence<'a> {
    /// Yields `r_0, r_1, r_2, ...` on successive calls.
    pub next: Box<dyn FnMut() -> f64 + 'a>,
    /// A lower bound on `inf_{k >= j} k * r_k`, valid for the given `j`.
    pub raabe_floor: Option<Box<dyn Fn(u64) -> f64 + 'a>>,
    /// `(k, r_k) -> (lo, hi)` bounds on `sum_{i >= k} r_i`.
    pub tail: Option<Box<dyn Fn(u64, f64) -> (f64, f64) + 'a>>,
    /// `Some(true)` when `sum r_k < inf` is known, `Some(false)` when it is
    /// known to diverge.
    pub summable: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesSum {
    /// The series diverges (certified by the caller's knowledge).
    Divergent,
    /// Finite value; `bound` is a certified absolute error bound when known.
    Finite { value: f64, bound: Option<f64>, terms: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProductSum {
    Infinite,
    /// `ln prod (1 + r_k)` and a certified half-width in log space when known.
    Finite { log_value: f64, log_half_width: Option<f64>, terms: u64 },
}

const CHECK_EVERY: u64 = 64;

/// Sums `sum_{j>=1} prod_{k<j} 1/(1+r_k)`.
///
/// Terms are accumulated until the Raabe-type tail bound drops below `tol` or
/// `max_terms` is reached. The returned value adds a summation-by-parts tail
/// estimate that always lies inside the certified tail bracket `[0, U]`.
pub fn raabe_series(mut seq: RatioSequence<'_>, tol: f64, max_terms: u64) -> SeriesSum {
    if seq.summable == Some(true) {
        return SeriesSum::Divergent;
    }
    let mut a = 1.0f64;
    let mut partial = 0.0f64;
    let mut r = (seq.next)();
    let mut last_bound = None;
    let mut last_est = 0.0;
    for j in 1..=max_terms {
        a /= 1.0 + r;
        partial += a;
        r = (seq.next)();
        if a == 0.0 {
            return SeriesSum::Finite { value: partial, bound: Some(0.0), terms: j };
        }
        if j < 2 || (j > CHECK_EVERY && j % CHECK_EVERY != 0 && j != max_terms) {
            continue;
        }
        let jf = j as f64;
        // sum_{n>j} a_n g_n = a_j (j - g_j), g_n = (n r_n - 1) / (1 + r_n)
        let g = (jf * r - 1.0) / (1.0 + r);
        let est = if g > 0.0 { a * (jf / g - 1.0) } else { f64::INFINITY };
        match seq.raabe_floor.as_ref().map(|f| f(j)) {
            Some(c) if c > 1.0 => {
                let c = c.min(jf.sqrt());
                if c > 1.0 {
                    let upper = a * (c * c / (2.0 * (jf - 1.0))).exp() * jf / (c - 1.0);
                    let est = est.clamp(0.0, upper);
                    last_bound = Some(upper);
                    last_est = est;
                    if upper < tol {
                        return SeriesSum::Finite { value: partial + est, bound: Some(upper), terms: j };
                    }
                }
            }
            Some(_) => {}
            None => {
                // no analytic knowledge: stop once the estimated tail is negligible
                if est.is_finite() && est < tol && jf * a < tol {
                    return SeriesSum::Finite { value: partial + est, bound: None, terms: j };
                }
                last_est = if est.is_finite() { est } else { 0.0 };
            }
        }
    }
    SeriesSum::Finite { value: partial + last_est, bound: last_bound, terms: max_terms }
}

/// Evaluates `ln prod_{k>=0} (1 + r_k)`.
pub fn log_product(mut seq: RatioSequence<'_>, tol: f64, max_terms: u64) -> ProductSum {
    if seq.summable == Some(false) {
        return ProductSum::Infinite;
    }
    let mut log = 0.0f64;
    let mut r = (seq.next)();
    for k in 0..max_terms {
        log += r.ln_1p();
        r = (seq.next)();
        let done = k + 1;
        if done > CHECK_EVERY && done % CHECK_EVERY != 0 && done != max_terms {
            continue;
        }
        match seq.tail.as_ref() {
            Some(tail) => {
                let (lo, hi) = tail(done, r);
                // ln(1+x) in [x - x^2/2, x] and r_i <= r_done for i >= done
                let lower = (lo - 0.5 * r * hi).max(0.0);
                let mid = 0.5 * (lower + hi);
                let hw = 0.5 * (hi - lower);
                if hw < tol || done == max_terms {
                    return ProductSum::Finite { log_value: log + mid, log_half_width: Some(hw), terms: done };
                }
            }
            None => {
                if r < 1e-18 {
                    return ProductSum::Finite { log_value: log, log_half_width: None, terms: done };
                }
            }
        }
    }
    ProductSum::Finite { log_value: log, log_half_width: None, terms: max_terms }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beta_a1(a: f64, lambda: f64) -> RatioSequence<'static> {
        let mut k = 0u64;
        RatioSequence {
            next: Box::new(move || {
                let r = lambda * a / (a + k as f64 + 1.0);
                k += 1;
                r
            }),
            raabe_floor: Some(Box::new(move |j| j as f64 * lambda * a / (a + j as f64 + 1.0))),
            tail: None,
            summable: Some(false),
        }
    }

    #[test]
    fn telescoping_series_with_power_law_terms() {
        // r_k = 2/(k+3): a_j = 12/((j+3)(j+4)), sum = 3
        match raabe_series(beta_a1(2.0, 1.0), 1e-12, 1 << 20) {
            SeriesSum::Finite { value, bound, .. } => {
                assert!((value - 3.0).abs() < 1e-9, "{value}");
                let b = bound.unwrap();
                assert!((value - 3.0).abs() <= b);
            }
            SeriesSum::Divergent => panic!("should converge"),
        }
    }

    #[test]
    fn geometric_series_certifies_quickly() {
        // r_k = 1: a_j = 2^-j, sum = 1
        let seq = RatioSequence {
            next: Box::new(|| 1.0),
            raabe_floor: Some(Box::new(|j| j as f64)),
            tail: None,
            summable: Some(false),
        };
        match raabe_series(seq, 1e-12, 1 << 20) {
            SeriesSum::Finite { value, bound, terms } => {
                assert!((value - 1.0).abs() < 1e-12);
                assert!(bound.unwrap() < 1e-12);
                assert!(terms < 200);
            }
            SeriesSum::Divergent => panic!(),
        }
    }

    #[test]
    fn product_of_geometric_ratios() {
        // prod_{k>=0} (1 + 2^-(k+1)) = 2.384231029031371...
        let mut x = 0.5;
        let seq = RatioSequence {
            next: Box::new(move || {
                let r = x;
                x *= 0.5;
                r
            }),
            raabe_floor: None,
            tail: Some(Box::new(|_, r| (2.0 * r, 2.0 * r))),
            summable: Some(true),
        };
        match log_product(seq, 1e-15, 10_000) {
            ProductSum::Finite { log_value, log_half_width, .. } => {
                assert!((log_value.exp() - 2.384_231_029_031_371).abs() < 1e-12);
                assert!(log_half_width.unwrap() < 1e-15);
            }
            ProductSum::Infinite => panic!(),
        }
    }
}
