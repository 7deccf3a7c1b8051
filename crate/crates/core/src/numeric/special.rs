//! Special functions: log-gamma wrappers, the confluent hypergeometric series
//! for positive arguments, and binomial coefficients.

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln C(n, k)`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Exact binomial coefficient as `f64` (exact while the result fits in 53 bits).
pub fn choose(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Kummer's function `1F1(a; b; x)` for `a, b > 0` and `x >= 0`.
///
/// All series terms are positive, so the sum is free of cancellation.
pub fn hyp1f1_positive(a: f64, b: f64, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0.0;
    loop {
        term *= (a + n) / (b + n) * x / (n + 1.0);
        sum += term;
        n += 1.0;
        // once (a+n)x/((b+n)(n+1)) < 1/2 the remaining tail is below 2*term
        if term < 1e-17 * sum && (a + n) * x < 0.5 * (b + n) * (n + 1.0) {
            return sum;
        }
        if n > 1e6 {
            return sum;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kummer_reduces_to_exponential() {
        // 1F1(a; a; x) = e^x
        let v = hyp1f1_positive(2.5, 2.5, 3.0);
        assert!((v - 3f64.exp()).abs() < 1e-13 * v);
    }

    #[test]
    fn kummer_one_two() {
        // 1F1(1; 2; x) = (e^x - 1) / x
        let v = hyp1f1_positive(1.0, 2.0, 1.7);
        assert!((v - (1.7f64.exp() - 1.0) / 1.7).abs() < 1e-14);
    }

    #[test]
    fn binomials() {
        assert_eq!(choose(20, 10), 184_756.0);
        assert!((ln_choose(30, 7).exp() - 2_035_800.0).abs() < 1e-6);
    }
}
