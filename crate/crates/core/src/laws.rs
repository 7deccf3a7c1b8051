//! Survival-parameter distributions on `[0, 1]`.
//!
//! A [`SurvivalLaw`] provides exact moments `E[X^j]`, mixed binomial moments
//! `E[X^r (1-X)^s]`, the binomial-mixture "thinning" rows used by the
//! backward-Kolmogorov oracle, a sampler, and the behaviour of its density at
//! the right end point.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Beta as BetaDist, Distribution};

use crate::error::{Error, Result};
use crate::numeric::dd::Dd;
use crate::numeric::quad;
use crate::numeric::special::{choose, hyp1f1_positive, ln_beta};

/// Moments of order above this are computed through log-gamma instead of a
/// running product.
const PRODUCT_MOMENT_LIMIT: u64 = 4096;

/// Absolute tolerance for quadrature-backed moments.
pub const QUAD_TOL: f64 = 1e-12;

pub type MomentFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;
pub type SamplerFn = Arc<dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync>;
pub type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A caller-supplied law: moments and sampler must describe the same
/// distribution. A density is optional and only used for mixed moments.
#[derive(Clone)]
pub struct CustomLaw {
    pub name: String,
    pub moment: MomentFn,
    pub sampler: SamplerFn,
    pub density: Option<DensityFn>,
}

impl CustomLaw {
    pub fn new(name: impl Into<String>, moment: MomentFn, sampler: SamplerFn) -> Self {
        CustomLaw { name: name.into(), moment, sampler, density: None }
    }

    pub fn with_density(mut self, density: DensityFn) -> Self {
        self.density = Some(density);
        self
    }
}

impl fmt::Debug for CustomLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLaw")
            .field("name", &self.name)
            .field("density", &self.density.is_some())
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum SurvivalLaw {
    Degenerate { p: f64 },
    Beta { a: f64, b: f64 },
    PowerFunction { a: f64 },
    Uniform,
    TruncatedExponential { gamma: f64 },
    Custom(CustomLaw),
}

/// Value of `f(1-)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeftLimit {
    Finite(f64),
    Infinite,
    Undefined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityBoundary {
    pub limit: LeftLimit,
    pub left_differentiable: bool,
    /// Whether the density is bounded on `[0, 1]`.
    pub bounded: bool,
}

impl SurvivalLaw {
    pub fn degenerate(p: f64) -> Result<Self> {
        SurvivalLaw::Degenerate { p }.validated()
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        SurvivalLaw::Beta { a, b }.validated()
    }

    pub fn power(a: f64) -> Result<Self> {
        SurvivalLaw::PowerFunction { a }.validated()
    }

    pub fn truncated_exponential(gamma: f64) -> Result<Self> {
        SurvivalLaw::TruncatedExponential { gamma }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidLaw(format!("{name} must be finite and positive, got {v}")))
            }
        };
        match *self {
            SurvivalLaw::Degenerate { p } => {
                if p.is_finite() && (0.0..=1.0).contains(&p) {
                    Ok(())
                } else {
                    Err(Error::InvalidLaw(format!("p must lie in [0, 1], got {p}")))
                }
            }
            SurvivalLaw::Beta { a, b } => positive("a", a).and(positive("b", b)),
            SurvivalLaw::PowerFunction { a } => positive("a", a),
            SurvivalLaw::Uniform | SurvivalLaw::Custom(_) => Ok(()),
            SurvivalLaw::TruncatedExponential { gamma } => positive("gamma", gamma),
        }
    }

    /// `Some((a, b))` for every member of the Beta family.
    pub fn beta_params(&self) -> Option<(f64, f64)> {
        match *self {
            SurvivalLaw::Beta { a, b } => Some((a, b)),
            SurvivalLaw::PowerFunction { a } => Some((a, 1.0)),
            SurvivalLaw::Uniform => Some((1.0, 1.0)),
            _ => None,
        }
    }

    /// True for `delta_1`, the law excluded from the catastrophe-random model.
    pub fn is_point_mass_at_one(&self) -> bool {
        matches!(*self, SurvivalLaw::Degenerate { p } if p == 1.0)
    }

    /// `E[X^j]`.
    pub fn moment(&self, j: u64) -> Result<f64> {
        self.validate()?;
        Ok(match self {
            SurvivalLaw::Degenerate { p } => pow_u64(*p, j),
            SurvivalLaw::Uniform => 1.0 / (j as f64 + 1.0),
            SurvivalLaw::PowerFunction { a } => a / (a + j as f64),
            SurvivalLaw::Beta { a, b } => beta_moment(*a, *b, j),
            SurvivalLaw::TruncatedExponential { gamma } => truncexp_mixed(*gamma, j, 0),
            SurvivalLaw::Custom(c) => (c.moment)(j),
        })
    }

    /// `E[X^r (1-X)^s]`.
    pub fn mixed_moment(&self, r: u64, s: u64) -> Result<f64> {
        self.validate()?;
        if s == 0 {
            return if r == 0 { Ok(1.0) } else { self.moment(r) };
        }
        Ok(match self {
            SurvivalLaw::Degenerate { p } => pow_u64(*p, r) * pow_u64(1.0 - p, s),
            SurvivalLaw::TruncatedExponential { gamma } => truncexp_mixed(*gamma, r, s),
            SurvivalLaw::Custom(c) => match &c.density {
                Some(d) => {
                    let d = d.clone();
                    quad::integrate(
                        move |x| pow_u64(x, r) * pow_u64(1.0 - x, s) * d(x),
                        0.0,
                        1.0,
                        QUAD_TOL,
                    )
                    .0
                }
                None => {
                    // binomial expansion of (1-x)^s; only reliable for small s
                    let mut acc = 0.0;
                    for k in 0..=s {
                        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                        let m = if r + k == 0 { 1.0 } else { (c.moment)(r + k) };
                        acc += sign * choose(s, k) * m;
                    }
                    acc.clamp(0.0, 1.0)
                }
            },
            _ => {
                let (a, b) = self.beta_params().expect("beta family");
                beta_mixed(a, b, r, s)
            }
        })
    }

    /// Moments `E[X^1], E[X^2], ...` in order, cheaper than repeated
    /// [`moment`](Self::moment) calls.
    pub fn moments(&self) -> MomentStream<'_> {
        MomentStream { law: self, j: 0, state: 1.0 }
    }

    /// Moments in double-double precision, in order.
    pub fn moments_dd(&self) -> MomentStreamDd<'_> {
        MomentStreamDd { law: self, j: 0, state: Dd::ONE }
    }

    /// `P(L <= k)` where `L` is the number of catastrophes an individual
    /// survives: `1 - E[X^{k+1}]`.
    pub fn lifetime_cdf(&self, k: u64) -> Result<f64> {
        Ok(1.0 - self.moment(k + 1)?)
    }

    /// Density on `(0, 1)` where one exists.
    pub fn density(&self, x: f64) -> Option<f64> {
        match *self {
            SurvivalLaw::Degenerate { .. } => None,
            SurvivalLaw::Uniform => Some(1.0),
            SurvivalLaw::PowerFunction { a } => Some(a * x.powf(a - 1.0)),
            SurvivalLaw::Beta { a, b } => {
                Some(((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_beta(a, b)).exp())
            }
            SurvivalLaw::TruncatedExponential { gamma } => {
                Some(gamma * (-gamma * x).exp() / -(-gamma).exp_m1())
            }
            SurvivalLaw::Custom(ref c) => c.density.as_ref().map(|d| d(x)),
        }
    }

    pub fn density_left_limit(&self) -> DensityBoundary {
        let undefined = DensityBoundary { limit: LeftLimit::Undefined, left_differentiable: false, bounded: false };
        match *self {
            SurvivalLaw::Degenerate { .. } | SurvivalLaw::Custom(_) => undefined,
            SurvivalLaw::TruncatedExponential { gamma } => DensityBoundary {
                limit: LeftLimit::Finite(gamma / gamma.exp_m1()),
                left_differentiable: true,
                bounded: true,
            },
            _ => {
                let (a, b) = self.beta_params().expect("beta family");
                let limit = if b > 1.0 {
                    LeftLimit::Finite(0.0)
                } else if b == 1.0 {
                    LeftLimit::Finite(a)
                } else {
                    LeftLimit::Infinite
                };
                DensityBoundary {
                    limit,
                    left_differentiable: b == 1.0 && a >= 1.0,
                    bounded: a >= 1.0 && b >= 1.0,
                }
            }
        }
    }

    /// Mass of the atom at 1.
    pub fn atom_at_one(&self) -> f64 {
        match *self {
            SurvivalLaw::Degenerate { p: 1.0 } => 1.0,
            _ => 0.0,
        }
    }

    /// Whether `sum_n E[X^n]` is finite, when known analytically.
    pub fn moments_summable(&self) -> Option<bool> {
        match *self {
            SurvivalLaw::Degenerate { p } => Some(p < 1.0),
            SurvivalLaw::TruncatedExponential { .. } => Some(false),
            SurvivalLaw::Custom(_) => None,
            _ => self.beta_params().map(|(_, b)| b > 1.0),
        }
    }

    /// `sum_{n >= k} E[X^n]` in closed form, for laws with summable moments.
    pub fn moment_tail(&self, k: u64) -> Option<f64> {
        match *self {
            SurvivalLaw::Degenerate { p } if p < 1.0 => Some(pow_u64(p, k) / (1.0 - p)),
            SurvivalLaw::Beta { a, b } if b > 1.0 => {
                // E[X^k / (1 - X)] = E[X^k] (a + b + k - 1) / (b - 1)
                Some(beta_moment(a, b, k) * (a + b + k as f64 - 1.0) / (b - 1.0))
            }
            _ => None,
        }
    }

    /// A lower bound on `inf_{k >= j} k E[X^{k+1}]`, when one is known.
    pub fn raabe_floor(&self, j: u64) -> Option<f64> {
        match *self {
            SurvivalLaw::Degenerate { p } => Some(if p == 1.0 { j as f64 } else { 0.0 }),
            SurvivalLaw::TruncatedExponential { gamma } => {
                // the density decreases, so E[X^{k+1}] >= f(1) / (k + 2)
                let f1 = gamma / gamma.exp_m1();
                Some(f1 * j as f64 / (j as f64 + 2.0))
            }
            SurvivalLaw::Custom(_) => None,
            _ => {
                let (a, b) = self.beta_params().expect("beta family");
                if b <= 1.0 {
                    // k E[X^{k+1}] is non-decreasing when b <= 1
                    Some(j as f64 * beta_moment(a, b, j + 1))
                } else {
                    Some(0.0)
                }
            }
        }
    }

    /// The law of the number of survivors when `i` individuals face one
    /// catastrophe: `w[j] = C(i, j) E[X^j (1-X)^{i-j}]`.
    pub fn thinning_row(&self, i: u64) -> Result<Vec<f64>> {
        self.validate()?;
        let n = i as usize;
        let mut w = vec![0.0; n + 1];
        match self {
            SurvivalLaw::Degenerate { p } => {
                let p = *p;
                if p == 0.0 {
                    w[0] = 1.0;
                } else if p == 1.0 {
                    w[n] = 1.0;
                } else {
                    let lr = (p / (1.0 - p)).ln();
                    let mut lw = i as f64 * (-p).ln_1p();
                    for j in 0..=n {
                        w[j] = lw.exp();
                        if j < n {
                            lw += ((n - j) as f64 / (j + 1) as f64).ln() + lr;
                        }
                    }
                }
            }
            SurvivalLaw::TruncatedExponential { gamma } => {
                let c = gamma / gamma.exp_m1() / (i as f64 + 1.0);
                for (j, wj) in w.iter_mut().enumerate() {
                    *wj = c * hyp1f1_positive((n - j) as f64 + 1.0, i as f64 + 2.0, *gamma);
                }
            }
            SurvivalLaw::Custom(_) => {
                for (j, wj) in w.iter_mut().enumerate() {
                    *wj = choose(i, j as u64) * self.mixed_moment(j as u64, i - j as u64)?;
                }
            }
            _ => {
                let (a, b) = self.beta_params().expect("beta family");
                // beta-binomial pmf by its term ratio, accumulated in log space
                let mut lw = ln_beta(a, b + i as f64) - ln_beta(a, b);
                for j in 0..=n {
                    w[j] = lw.exp();
                    if j < n {
                        let jf = j as f64;
                        lw += (((n - j) as f64) * (a + jf) / ((jf + 1.0) * (b + (n - j) as f64 - 1.0))).ln();
                    }
                }
            }
        }
        Ok(w)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            SurvivalLaw::Degenerate { p } => *p,
            SurvivalLaw::Uniform => rng.random::<f64>(),
            SurvivalLaw::PowerFunction { a } => rng.random::<f64>().powf(1.0 / a),
            SurvivalLaw::Beta { a, b } => BetaDist::new(*a, *b).expect("validated").sample(rng),
            SurvivalLaw::TruncatedExponential { gamma } => {
                let u: f64 = rng.random();
                // inverse CDF: -ln(1 - u (1 - e^-g)) / g
                (-(u * -(-gamma).exp_m1())).ln_1p() / -gamma
            }
            SurvivalLaw::Custom(c) => {
                let mut dynrng = DynRng(rng);
                (c.sampler)(&mut dynrng)
            }
        }
    }
}

struct DynRng<'a, R: Rng + ?Sized>(&'a mut R);

impl<R: Rng + ?Sized> RngCore for DynRng<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

pub struct MomentStream<'a> {
    law: &'a SurvivalLaw,
    j: u64,
    state: f64,
}

impl Iterator for MomentStream<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let j = self.j;
        self.j += 1;
        let m = match *self.law {
            SurvivalLaw::Degenerate { p } => {
                self.state *= p;
                self.state
            }
            SurvivalLaw::Uniform => 1.0 / (j as f64 + 2.0),
            SurvivalLaw::PowerFunction { a } => a / (a + j as f64 + 1.0),
            SurvivalLaw::Beta { a, b } => {
                self.state *= (a + j as f64) / (a + b + j as f64);
                self.state
            }
            SurvivalLaw::TruncatedExponential { gamma } => truncexp_mixed(gamma, j + 1, 0),
            SurvivalLaw::Custom(ref c) => (c.moment)(j + 1),
        };
        Some(m)
    }
}

pub struct MomentStreamDd<'a> {
    law: &'a SurvivalLaw,
    j: u64,
    state: Dd,
}

impl Iterator for MomentStreamDd<'_> {
    type Item = Dd;

    fn next(&mut self) -> Option<Dd> {
        let j = self.j as f64;
        self.j += 1;
        let m = match *self.law {
            SurvivalLaw::Degenerate { p } => {
                self.state = self.state * p;
                self.state
            }
            SurvivalLaw::TruncatedExponential { gamma } => truncexp_moment_dd(gamma, self.j),
            SurvivalLaw::Custom(ref c) => Dd::new((c.moment)(self.j)),
            _ => {
                let (a, b) = self.law.beta_params().expect("beta family");
                self.state = self.state * (Dd::new(a) + j) / (Dd::new(a) + b + j);
                self.state
            }
        };
        Some(m)
    }
}

fn pow_u64(x: f64, n: u64) -> f64 {
    if n <= i32::MAX as u64 {
        x.powi(n as i32)
    } else {
        x.powf(n as f64)
    }
}

fn beta_moment(a: f64, b: f64, j: u64) -> f64 {
    if j <= PRODUCT_MOMENT_LIMIT {
        (0..j).fold(1.0, |acc, i| acc * (a + i as f64) / (a + b + i as f64))
    } else {
        let jf = j as f64;
        (ln_beta(a + jf, b) - ln_beta(a, b)).exp()
    }
}

fn beta_mixed(a: f64, b: f64, r: u64, s: u64) -> f64 {
    if r + s <= PRODUCT_MOMENT_LIMIT {
        let mut acc = 1.0;
        for i in 0..r {
            acc *= (a + i as f64) / (a + b + i as f64);
        }
        for i in 0..s {
            acc *= (b + i as f64) / (a + b + (r + i) as f64);
        }
        acc
    } else {
        (ln_beta(a + r as f64, b + s as f64) - ln_beta(a, b)).exp()
    }
}

/// `E[X^r (1-X)^s]` for the truncated exponential law, through
/// `B(r+1, s+1) * 1F1(r+1; r+s+2; -g)` and Kummer's transformation.
fn truncexp_mixed(gamma: f64, r: u64, s: u64) -> f64 {
    let (rf, sf) = (r as f64, s as f64);
    let beta = if r + s <= PRODUCT_MOMENT_LIMIT {
        // r! s! / (r+s+1)!
        let mut acc = 1.0 / (rf + sf + 1.0);
        for i in 1..=s {
            acc *= i as f64 / (rf + i as f64);
        }
        acc
    } else {
        ln_beta(rf + 1.0, sf + 1.0).exp()
    };
    gamma / gamma.exp_m1() * beta * hyp1f1_positive(sf + 1.0, rf + sf + 2.0, gamma)
}

fn truncexp_moment_dd(gamma: f64, j: u64) -> Dd {
    // g/(e^g - 1) * sum_n g^n / prod_{i=1}^{n+1} (j + i)
    let jf = j as f64;
    let mut term = Dd::ONE / (jf + 1.0);
    let mut sum = term;
    let mut n = 0.0;
    loop {
        term = term * gamma / (jf + n + 2.0);
        sum = sum + term;
        n += 1.0;
        if term.hi < 1e-34 * sum.hi && gamma < jf + n + 2.0 {
            break;
        }
    }
    // g / (e^g - 1) in dd: 1 / sum_{n>=0} g^n/(n+1)!
    let mut t = Dd::ONE;
    let mut s = Dd::ONE;
    let mut k = 1.0;
    loop {
        t = t * gamma / (k + 1.0);
        s = s + t;
        k += 1.0;
        if t.hi < 1e-34 * s.hi && gamma < k + 1.0 {
            break;
        }
    }
    sum / s
}

impl fmt::Display for SurvivalLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurvivalLaw::Degenerate { p } => write!(f, "degenerate:p={p}"),
            SurvivalLaw::Beta { a, b } => write!(f, "beta:a={a},b={b}"),
            SurvivalLaw::PowerFunction { a } => write!(f, "power:a={a}"),
            SurvivalLaw::Uniform => write!(f, "uniform"),
            SurvivalLaw::TruncatedExponential { gamma } => write!(f, "truncexp:gamma={gamma}"),
            SurvivalLaw::Custom(c) => write!(f, "custom:{}", c.name),
        }
    }
}

/// Parses `key=value,key=value` with the given keys, in any order.
pub(crate) fn parse_params(body: &str, keys: &[&str]) -> Result<Vec<f64>> {
    let mut out = vec![None; keys.len()];
    if !body.is_empty() {
        for part in body.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{part}'")))?;
            let idx = keys
                .iter()
                .position(|key| *key == k)
                .ok_or_else(|| Error::Parse(format!("unknown parameter '{k}'")))?;
            if out[idx].is_some() {
                return Err(Error::Parse(format!("parameter '{k}' given twice")));
            }
            let x: f64 = v.parse().map_err(|_| Error::Parse(format!("'{v}' is not a number")))?;
            out[idx] = Some(x);
        }
    }
    out.into_iter()
        .zip(keys)
        .map(|(v, k)| v.ok_or_else(|| Error::Parse(format!("missing parameter '{k}'"))))
        .collect()
}

impl FromStr for SurvivalLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, body) = s.split_once(':').unwrap_or((s, ""));
        let law = match name {
            "degenerate" => {
                let v = parse_params(body, &["p"])?;
                SurvivalLaw::Degenerate { p: v[0] }
            }
            "beta" => {
                let v = parse_params(body, &["a", "b"])?;
                SurvivalLaw::Beta { a: v[0], b: v[1] }
            }
            "power" => {
                let v = parse_params(body, &["a"])?;
                SurvivalLaw::PowerFunction { a: v[0] }
            }
            "uniform" if body.is_empty() && !s.contains(':') => SurvivalLaw::Uniform,
            "truncexp" => {
                let v = parse_params(body, &["gamma"])?;
                SurvivalLaw::TruncatedExponential { gamma: v[0] }
            }
            _ => return Err(Error::Parse(format!("unknown distribution '{s}'"))),
        };
        law.validate().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(law)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quad_moment(law: &SurvivalLaw, r: u64, s: u64) -> f64 {
        quad::integrate(
            |x| x.powi(r as i32) * (1.0 - x).powi(s as i32) * law.density(x).unwrap(),
            0.0,
            1.0,
            1e-14,
        )
        .0
    }

    #[test]
    fn moment_examples() {
        assert_eq!(SurvivalLaw::degenerate(0.5).unwrap().moment(3).unwrap(), 0.125);
        assert!((SurvivalLaw::power(1.0).unwrap().moment(2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let beta = SurvivalLaw::beta(2.0, 3.0).unwrap();
        assert!((beta.moment(2).unwrap() - 0.2).abs() < 1e-15);
        assert!((quad_moment(&beta, 2, 0) - 0.2).abs() < 1e-12);
        let te = SurvivalLaw::truncated_exponential(1.0).unwrap();
        let q = quad_moment(&te, 1, 0);
        assert!((te.moment(1).unwrap() - q).abs() < 1e-12);
        assert!((q - 0.418_023).abs() < 1e-6);
    }

    #[test]
    fn mixed_moment_examples() {
        let d = SurvivalLaw::degenerate(0.5).unwrap();
        assert_eq!(d.mixed_moment(1, 1).unwrap(), 0.25);
        assert_eq!(SurvivalLaw::beta(2.0, 3.0).unwrap().mixed_moment(0, 0).unwrap(), 1.0);
        let u = SurvivalLaw::Uniform;
        assert!((u.mixed_moment(1, 1).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((quad_moment(&u, 1, 1) - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn truncexp_mixed_moments_match_quadrature() {
        for gamma in [0.3, 1.0, 4.0] {
            let law = SurvivalLaw::truncated_exponential(gamma).unwrap();
            for (r, s) in [(0, 1), (3, 2), (7, 0), (10, 10), (40, 3)] {
                let exact = law.mixed_moment(r, s).unwrap();
                let q = quad_moment(&law, r, s);
                assert!((exact - q).abs() < 1e-12, "gamma={gamma} r={r} s={s}: {exact} vs {q}");
            }
        }
    }

    #[test]
    fn density_boundary_examples() {
        assert_eq!(SurvivalLaw::power(2.0).unwrap().density_left_limit().limit, LeftLimit::Finite(2.0));
        assert_eq!(SurvivalLaw::beta(2.0, 3.0).unwrap().density_left_limit().limit, LeftLimit::Finite(0.0));
        assert_eq!(SurvivalLaw::beta(2.0, 0.5).unwrap().density_left_limit().limit, LeftLimit::Infinite);
        let te = SurvivalLaw::truncated_exponential(1.0).unwrap().density_left_limit();
        match te.limit {
            LeftLimit::Finite(v) => assert!((v - 0.581_977).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
        assert!(te.left_differentiable);
        assert_eq!(SurvivalLaw::degenerate(0.3).unwrap().density_left_limit().limit, LeftLimit::Undefined);
    }

    #[test]
    fn lifetime_cdf_examples() {
        assert_eq!(SurvivalLaw::degenerate(0.5).unwrap().lifetime_cdf(1).unwrap(), 0.75);
        assert_eq!(SurvivalLaw::Uniform.lifetime_cdf(0).unwrap(), 0.5);
        assert!((SurvivalLaw::beta(2.0, 3.0).unwrap().lifetime_cdf(0).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(SurvivalLaw::beta(f64::NAN, 1.0).is_err());
        assert!(SurvivalLaw::degenerate(1.5).is_err());
        assert!(SurvivalLaw::TruncatedExponential { gamma: f64::INFINITY }.moment(1).is_err());
    }

    #[test]
    fn grammar_round_trip() {
        for s in ["degenerate:p=0.5", "beta:a=2,b=3", "power:a=2", "uniform", "truncexp:gamma=1"] {
            let law: SurvivalLaw = s.parse().unwrap();
            assert_eq!(law.to_string(), s);
        }
        assert!("beta:a=2".parse::<SurvivalLaw>().is_err());
        assert!("beta:a=2, b=3".parse::<SurvivalLaw>().is_err());
        assert!("gamma:k=1".parse::<SurvivalLaw>().is_err());
        assert!("degenerate:p=2".parse::<SurvivalLaw>().is_err());
    }

    #[test]
    fn thinning_rows_are_probability_vectors() {
        let laws = [
            SurvivalLaw::degenerate(0.3).unwrap(),
            SurvivalLaw::beta(2.0, 3.0).unwrap(),
            SurvivalLaw::Uniform,
            SurvivalLaw::truncated_exponential(2.0).unwrap(),
        ];
        for law in &laws {
            for i in [1u64, 5, 50, 700] {
                let w = law.thinning_row(i).unwrap();
                let total: f64 = w.iter().sum();
                assert!((total - 1.0).abs() < 1e-11, "{law} i={i}: {total}");
                let j = (i / 3) as usize;
                let direct = choose(i, j as u64) * law.mixed_moment(j as u64, i - j as u64).unwrap();
                if i <= 50 {
                    assert!((w[j] - direct).abs() < 1e-12, "{law} i={i}");
                }
            }
        }
    }

    #[test]
    fn samplers_match_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(SurvivalLaw::degenerate(0.7).unwrap().sample(&mut rng), 0.7);
        let n = 1_000_000;
        for (law, j, target) in [(SurvivalLaw::Uniform, 1, 0.5), (SurvivalLaw::beta(2.0, 3.0).unwrap(), 2, 0.2)] {
            let xs: Vec<f64> = (0..n).map(|_| law.sample(&mut rng).powi(j)).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            let se = (var / n as f64).sqrt();
            assert!((mean - target).abs() < 5.0 * se, "{law}: {mean} vs {target}");
        }
        let te = SurvivalLaw::truncated_exponential(3.0).unwrap();
        let target = te.moment(1).unwrap();
        let xs: Vec<f64> = (0..n).map(|_| te.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((mean - target).abs() < 5.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn streams_agree_with_direct_moments() {
        let laws = [
            SurvivalLaw::degenerate(0.9).unwrap(),
            SurvivalLaw::beta(0.5, 0.5).unwrap(),
            SurvivalLaw::power(3.0).unwrap(),
            SurvivalLaw::truncated_exponential(1.5).unwrap(),
        ];
        for law in &laws {
            for (j, (m, mdd)) in law.moments().zip(law.moments_dd()).take(300).enumerate() {
                let direct = law.moment(j as u64 + 1).unwrap();
                assert!((m - direct).abs() < 1e-13, "{law} j={}", j + 1);
                assert!((mdd.to_f64() - direct).abs() < 1e-13, "{law} j={}", j + 1);
            }
        }
    }

    #[test]
    fn moment_tails_are_exact() {
        let law = SurvivalLaw::beta(2.0, 3.0).unwrap();
        // moments are 24/((n+2)(n+3)(n+4)); telescoped tail from k is 12/((k+2)(k+3))
        for k in [1u64, 5, 100] {
            let kf = k as f64;
            let tail = law.moment_tail(k).unwrap();
            assert!((tail - 12.0 / ((kf + 2.0) * (kf + 3.0))).abs() < 1e-14);
        }
        assert!(SurvivalLaw::Uniform.moment_tail(3).is_none());
    }
}
