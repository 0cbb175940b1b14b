//! Unbiased estimation of the welfare objective `Σ_c n_c u_c^α`.
//!
//! `u^α` is expanded as the binomial series `1 − α Σ_n η(n, α) (1 − u)^n`.
//! Each power `(1 − u)^n` of a mean has an unbiased estimator from a with-
//! replacement sample, which for 0/1 samples (RR-set coverage indicators)
//! collapses to a falling-factorial ratio of the uncovered count. The series
//! is truncated at order `Q`.

use crate::error::{Error, Result};

pub const DEFAULT_Q: usize = 10;

/// Series coefficient: `η(1, α) = 1`, `η(n, α) = (1−α)(2−α)…(n−1−α) / n!`.
pub fn eta(n: usize, alpha: f64) -> f64 {
    assert!(n >= 1, "eta is defined for n >= 1");
    let mut value = 1.0;
    for j in 1..n {
        value *= (j as f64 - alpha) / (j + 1) as f64;
    }
    value
}

/// Inequality-aversion parameter, truncation order and the cached
/// coefficients `η(1..=Q, α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    alpha: f64,
    eta: Vec<f64>,
}

impl EstimatorConfig {
    pub fn new(alpha: f64, q: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if q < 2 {
            return Err(Error::param(format!(
                "truncation order Q must be at least 2, got {q}"
            )));
        }
        let mut coeffs = Vec::with_capacity(q);
        let mut current = 1.0;
        coeffs.push(current);
        for n in 1..q {
            current *= (n as f64 - alpha) / (n + 1) as f64;
            coeffs.push(current);
        }
        Ok(EstimatorConfig { alpha, eta: coeffs })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn q(&self) -> usize {
        self.eta.len()
    }

    /// `η(1..=Q, α)`; index 0 holds `η(1, α)`.
    pub fn coefficients(&self) -> &[f64] {
        &self.eta
    }

    /// `Σ_{n=1}^{Q} η(n, α) Π_{i<n} (π − i)/(θ − i)`: the truncated series
    /// evaluated at the unbiased powers of the uncovered fraction.
    pub fn residual(&self, uncovered: usize, theta: usize) -> f64 {
        let mut sum = 0.0;
        let mut product = 1.0;
        for (i, &coef) in self.eta.iter().enumerate() {
            if uncovered <= i {
                break;
            }
            product *= (uncovered - i) as f64 / (theta - i) as f64;
            sum += coef * product;
        }
        sum
    }

    /// Gain contribution of one community given residuals before and after.
    #[inline]
    pub(crate) fn gain_term(&self, size: usize, before: f64, after: f64) -> f64 {
        self.alpha * size as f64 * (before - after)
    }
}

/// `1 − α Σ_{n=1}^{Q} η(n, α)(1 − u)^n`, the order-`Q` approximation of `u^α`.
///
/// Evaluated in double-double arithmetic and rounded once, so near `u = 1`
/// the result does not drift an ulp away from `u^α`.
pub fn truncated_power(u: f64, config: &EstimatorConfig) -> f64 {
    let alpha = config.alpha;
    let x = Dd::sum(1.0, -u);
    let mut eta = Dd::from(1.0);
    let mut power = x;
    let mut sum = x;
    for n in 1..config.q() {
        eta = eta.mul(Dd::sum(n as f64, -alpha)).div_f64((n + 1) as f64);
        power = power.mul(x);
        sum = sum.add(eta.mul(power));
    }
    Dd::from(1.0).add(sum.mul(Dd::from(-alpha))).to_f64()
}

/// Unevaluated sum `hi + lo` of two doubles.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl Dd {
    /// Exact `a + b`.
    fn sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Dd {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn quick(a: f64, b: f64) -> Self {
        let s = a + b;
        Dd {
            hi: s,
            lo: b - (s - a),
        }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::sum(self.hi, o.hi);
        Dd::quick(s.hi, s.lo + self.lo + o.lo)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Dd::quick(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let r = self.add(Dd::from(q1).mul(Dd::from(-d)));
        Dd::quick(q1, r.hi / d)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Unbiased estimator of `μ^n` from a with-replacement sample: the average of
/// `x_{i1}⋯x_{in}` over ordered `n`-tuples of distinct indices.
///
/// Evaluated as `e_n(x) / C(m, n)` with the elementary symmetric polynomial
/// built incrementally in normalized form, so it is `O(mn)` and never forms
/// factorials.
pub fn unbiased_mean_power(sample: &[f64], n: usize) -> Result<f64> {
    check_sample(sample, n)?;
    // f[j] = e_j(x_1..x_i) / C(i, j)
    let mut f = vec![0.0; n + 1];
    f[0] = 1.0;
    for (idx, &x) in sample.iter().enumerate() {
        let i = (idx + 1) as f64;
        for j in (1..=n.min(idx + 1)).rev() {
            let jf = j as f64;
            f[j] = ((i - jf) / i) * f[j] + (jf / i) * x * f[j - 1];
        }
    }
    Ok(f[n])
}

/// The same estimator by explicit enumeration of every ordered tuple of
/// distinct indices. Exponential; only for small samples.
pub fn permutation_sum_estimate(sample: &[f64], n: usize) -> Result<f64> {
    check_sample(sample, n)?;
    fn walk(sample: &[f64], used: &mut [bool], depth: usize, product: f64, total: &mut f64) {
        if depth == 0 {
            *total += product;
            return;
        }
        for i in 0..sample.len() {
            if !used[i] {
                used[i] = true;
                walk(sample, used, depth - 1, product * sample[i], total);
                used[i] = false;
            }
        }
    }
    let m = sample.len();
    let mut total = 0.0;
    walk(sample, &mut vec![false; m], n, 1.0, &mut total);
    // (m − n)!/m! = 1 / (m (m−1) ⋯ (m−n+1))
    let arrangements: f64 = (0..n).map(|i| (m - i) as f64).product();
    Ok(total / arrangements)
}

/// Binary-sample fast path: `k(k−1)⋯(k−n+1) / (m(m−1)⋯(m−n+1))` for a sample
/// of size `m` containing `ones` ones.
pub fn falling_factorial_estimate(ones: usize, m: usize, n: usize) -> Result<f64> {
    if n == 0 || n > m {
        return Err(Error::param(format!(
            "need 1 <= n <= m, got n = {n}, m = {m}"
        )));
    }
    if ones > m {
        return Err(Error::param(format!("{ones} ones in a sample of {m}")));
    }
    if ones < n {
        return Ok(0.0);
    }
    // Exact integer products and one rounding when they fit in the mantissa.
    const EXACT: u64 = 1 << f64::MANTISSA_DIGITS;
    let falling = |top: usize| {
        (0..n).try_fold(1u64, |acc, i| {
            acc.checked_mul((top - i) as u64).filter(|&v| v <= EXACT)
        })
    };
    if let (Some(num), Some(den)) = (falling(ones), falling(m)) {
        return Ok(num as f64 / den as f64);
    }
    let mut product = 1.0;
    for i in 0..n {
        product *= (ones - i) as f64 / (m - i) as f64;
    }
    Ok(product)
}

fn check_sample(sample: &[f64], n: usize) -> Result<()> {
    if n == 0 || n > sample.len() {
        return Err(Error::param(format!(
            "need 1 <= n <= m, got n = {n}, m = {}",
            sample.len()
        )));
    }
    if let Some(x) = sample.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::param(format!("sample value {x} outside [0, 1]")));
    }
    Ok(())
}

/// RR-set coverage of one community.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommunityCoverage {
    /// RR sets rooted in the community.
    pub theta: usize,
    /// How many of them the seed set does not cover.
    pub uncovered: usize,
    /// Community size `n_c`.
    pub size: usize,
}

/// Unbiased (up to truncation) estimate of the fair influence:
/// `Σ_c n_c (1 − α Σ_{n≤Q} η(n, α) Π_{i<n} (π_c − i)/(θ_c − i))`.
pub fn fair_influence_estimate(
    coverages: &[CommunityCoverage],
    config: &EstimatorConfig,
) -> Result<f64> {
    let mut total = 0.0;
    for (c, cov) in coverages.iter().enumerate() {
        check_theta(c, cov.theta, config)?;
        if cov.uncovered > cov.theta {
            return Err(Error::param(format!(
                "community {c}: {} uncovered of {} RR sets",
                cov.uncovered, cov.theta
            )));
        }
        total += cov.size as f64 * (1.0 - config.alpha * config.residual(cov.uncovered, cov.theta));
    }
    Ok(total)
}

/// Marginal gain of a node that newly covers `kappa[c]` RR sets of community
/// `c` when the current seeds already cover `covered[c]` of them.
///
/// Equals the difference of [`fair_influence_estimate`] after and before
/// adding the node.
pub fn marginal_gain(
    thetas: &[usize],
    covered: &[usize],
    kappa: &[usize],
    sizes: &[usize],
    config: &EstimatorConfig,
) -> Result<f64> {
    let c = thetas.len();
    if covered.len() != c || kappa.len() != c || sizes.len() != c {
        return Err(Error::param("per-community slices differ in length"));
    }
    let mut gain = 0.0;
    for i in 0..c {
        check_theta(i, thetas[i], config)?;
        if covered[i] > thetas[i] || kappa[i] > thetas[i] - covered[i] {
            return Err(Error::param(format!(
                "community {i}: covered {} + kappa {} exceeds theta {}",
                covered[i], kappa[i], thetas[i]
            )));
        }
        if kappa[i] == 0 {
            continue;
        }
        let uncovered = thetas[i] - covered[i];
        let before = config.residual(uncovered, thetas[i]);
        let after = config.residual(uncovered - kappa[i], thetas[i]);
        gain += config.gain_term(sizes[i], before, after);
    }
    Ok(gain)
}

fn check_theta(community: usize, theta: usize, config: &EstimatorConfig) -> Result<()> {
    if theta < config.q() {
        return Err(Error::TooFewSamples {
            community,
            theta,
            q: config.q(),
        });
    }
    Ok(())
}
