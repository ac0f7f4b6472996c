//! Sample-variance estimation and closed-form evaluators for the
//! subgaussian/subexponential tail bounds used to analyse the pipelines.
//!
//! Probabilities are carried in log space as [`Tail`] values. The raw value
//! may exceed 1 (union bounds do this freely); [`Tail::clamped`] is the
//! version to report as a probability.

use std::f64::consts::PI;

use crate::cheb::lebesgue_log_bound;
use crate::error::{Error, Result};

/// Single-pass running mean and variance (Welford's update).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased variance; 0 for fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }
}

/// Unbiased sample variance `S^2 = sum (X_i - mean)^2 / (m - 1)`.
pub fn sample_variance(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: samples.len() });
    }
    let mut w = Welford::new();
    samples.iter().for_each(|&x| w.push(x));
    Ok(w.variance())
}

/// A tail-probability bound stored as `ln(raw)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tail {
    pub ln_raw: f64,
}

impl Tail {
    pub fn from_ln(ln_raw: f64) -> Self {
        Self { ln_raw }
    }

    pub fn raw(&self) -> f64 {
        self.ln_raw.exp()
    }

    pub fn clamped(&self) -> f64 {
        self.raw().clamp(0.0, 1.0)
    }
}

fn log_sum_exp(terms: impl IntoIterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubgaussianParam {
    pub sigma: f64,
}

impl SubgaussianParam {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(Error::invalid("sigma", format!("{sigma} must be nonnegative")));
        }
        Ok(Self { sigma })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubexponentialParam {
    pub nu: f64,
    pub alpha: f64,
}

impl SubexponentialParam {
    pub fn new(nu: f64, alpha: f64) -> Result<Self> {
        if !(nu >= 0.0) {
            return Err(Error::invalid("nu", format!("{nu} must be nonnegative")));
        }
        if !(alpha > 0.0) {
            return Err(Error::invalid("alpha", format!("{alpha} must be positive")));
        }
        Ok(Self { nu, alpha })
    }

    /// Point `nu^2 / alpha` where the quadratic and linear branches meet.
    pub fn crossover(&self) -> f64 {
        self.nu * self.nu / self.alpha
    }
}

/// `(1 + 1/sqrt(m - 1))`, the finite-sample inflation shared by the variance bounds.
fn small_sample_factor(m: usize) -> f64 {
    1.0 + 1.0 / ((m - 1) as f64).sqrt()
}

/// Subexponential parameters of `S^2` built from `m` i.i.d. subgaussian(sigma) samples:
/// `nu = (4 sigma / sqrt m)(1 + 1/sqrt(m-1))`, `alpha = (4 sigma / m)(1 + 1/sqrt(m-1))`.
pub fn lemma1_params(sigma: f64, m: usize) -> Result<SubexponentialParam> {
    if !(sigma > 0.0) {
        return Err(Error::invalid("sigma", format!("{sigma} must be positive")));
    }
    if m < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: m });
    }
    let mf = m as f64;
    let g = small_sample_factor(m);
    SubexponentialParam::new(4.0 * sigma / mf.sqrt() * g, 4.0 * sigma / mf * g)
}

/// `2 exp(-t^2 / 2nu^2)` up to the crossover, `2 exp(-t / 2alpha)` beyond it.
pub fn subexp_tail(t: f64, p: &SubexponentialParam) -> Tail {
    let ln2 = std::f64::consts::LN_2;
    if t <= p.crossover() {
        if p.nu == 0.0 {
            // crossover is 0 too, so only t = 0 lands here
            return Tail::from_ln(ln2);
        }
        Tail::from_ln(ln2 - t * t / (2.0 * p.nu * p.nu))
    } else {
        Tail::from_ln(ln2 - t / (2.0 * p.alpha))
    }
}

/// `2 exp(-t^2 / sigma^2)`. A degenerate `sigma = 0` gives 1 at `t = 0` and 0 beyond.
pub fn subgaussian_tail(t: f64, p: &SubgaussianParam) -> Tail {
    if p.sigma == 0.0 {
        return if t > 0.0 {
            Tail::from_ln(f64::NEG_INFINITY)
        } else {
            Tail::from_ln(0.0)
        };
    }
    Tail::from_ln(std::f64::consts::LN_2 - t * t / (p.sigma * p.sigma))
}

/// Per-node term `K_j` of the proportional-estimate bound, in log space.
pub fn prop1_term_ln(s: f64, sigma: f64, m: usize) -> f64 {
    let mf = m as f64;
    let g = small_sample_factor(m);
    let quad = s * s * sigma * sigma * mf / (32.0 * (2.0 + s) * (2.0 + s)) / (g * g);
    let lin = s * sigma * mf / (8.0 * (2.0 + s)) / g;
    std::f64::consts::LN_2 - quad.min(lin)
}

/// Bound on the probability that some node's estimate `S_i^2 / sum S_j^2`
/// deviates from `sigma_i^2 / sum sigma_j^2` by more than a relative `s`,
/// when each `S_i^2` uses `m` samples.
pub fn prop1_bound(s: f64, sigma_vec: &[f64], m: usize) -> Result<Tail> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::invalid("s", format!("{s} is outside (0, 1)")));
    }
    if m < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: m });
    }
    if sigma_vec.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(bad) = sigma_vec.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::invalid("sigma_vec", format!("entry {bad} must be positive")));
    }
    Ok(Tail::from_ln(log_sum_exp(sigma_vec.iter().map(|&sig| prop1_term_ln(s, sig, m)))))
}

/// Inputs shared by the pointwise error theorems.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInputs {
    /// Per-node noise levels `sigma_i`, one per Chebyshev node of the reduced grid.
    pub sigma_vec: Vec<f64>,
    /// Total budget parameter `N` (the budget is `N + 1` samples).
    pub big_n: usize,
    pub n_hat: usize,
    /// Truncation degree.
    pub n: usize,
    pub r: f64,
    pub s: f64,
    /// `||f - p*_n||_inf`, supplied by the caller.
    pub r_n_inf: f64,
    pub t: f64,
}

impl BoundInputs {
    pub fn sigma_l2(&self) -> f64 {
        self.sigma_vec.iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    pub fn sigma_inf(&self) -> f64 {
        self.sigma_vec.iter().copied().fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n <= self.n_hat && self.n_hat <= self.big_n) || self.big_n == 0 {
            return Err(Error::InconsistentDegrees { n: self.n, n_hat: self.n_hat, big_n: self.big_n });
        }
        if !(self.t >= 0.0) {
            return Err(Error::invalid("t", format!("{} must be nonnegative", self.t)));
        }
        if !(self.r_n_inf >= 0.0) {
            return Err(Error::invalid("r_n_inf", "must be nonnegative"));
        }
        if self.sigma_vec.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::invalid("sigma_vec", "entries must be nonnegative"));
        }
        let cap = ((self.sigma_vec.len()) as f64).sqrt() * self.sigma_inf();
        if self.sigma_l2() > cap * (1.0 + 1e-12) {
            return Err(Error::invalid("sigma_vec", "l2 norm exceeds sqrt(len) * max"));
        }
        Ok(())
    }
}

/// `(threshold, probability)` pair returned by the theorem evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationBound {
    pub threshold: f64,
    pub probability: Tail,
}

fn gaussian_half_tail(t: f64) -> Tail {
    Tail::from_ln(std::f64::consts::LN_2 - t * t / 2.0)
}

fn thm1_threshold(inp: &BoundInputs, inflation: f64) -> f64 {
    let n1 = (inp.n + 1) as f64;
    let noise = 2.0 * inp.t * inp.sigma_l2() / ((inp.big_n as f64) * (inp.n_hat.max(1) as f64)).sqrt()
        * inflation
        * n1.sqrt();
    noise + ((8.0 * n1).sqrt() + 1.0) * inp.r_n_inf
}

/// Known-sigma weighted sampling: with probability at most `2 exp(-t^2/2)`,
/// `|p_n(x) - f(x)|` exceeds
/// `2t ||sigma||_2 / sqrt(N N_hat) sqrt(n+1) + (sqrt(8(n+1)) + 1) ||r_n||_inf`.
pub fn thm1_prob(inp: &BoundInputs) -> Result<DeviationBound> {
    inp.validate()?;
    Ok(DeviationBound { threshold: thm1_threshold(inp, 1.0), probability: gaussian_half_tail(inp.t) })
}

/// Subexponential-noise variant. `t_star` defaults to 1, where the quadratic
/// and linear exponents coincide.
pub fn thm2_prob(
    inp: &BoundInputs,
    nu_vec: &[f64],
    alpha_max: f64,
    t_star: Option<f64>,
) -> Result<DeviationBound> {
    inp.validate()?;
    if !(alpha_max > 0.0) {
        return Err(Error::invalid("alpha", format!("{alpha_max} must be positive")));
    }
    if nu_vec.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::invalid("nu_vec", "entries must be nonnegative"));
    }
    let t = inp.t;
    let nu_sq: f64 = nu_vec.iter().map(|v| v * v).sum();
    let n1 = (inp.n + 1) as f64;
    let log_factor = 2.0 / PI * n1.ln() + 1.0;
    let threshold = log_factor
        * n1.sqrt()
        * (2.0 * t * nu_sq / alpha_max / (inp.big_n as f64).sqrt() + 8f64.sqrt() * inp.r_n_inf);
    let rate = nu_sq / (2.0 * alpha_max * alpha_max);
    let power = if t <= t_star.unwrap_or(1.0) { t * t } else { t };
    let probability = Tail::from_ln((2.0 * n1).ln() - rate * power);
    Ok(DeviationBound { threshold, probability })
}

/// Noise inflation `1 / sqrt((1 - s)(1 - r))` paid by estimating the variances
/// from a pre-sample fraction `r` with relative accuracy `s`.
pub fn hetero_inflation(r: f64, s: f64) -> Result<f64> {
    for (name, v) in [("r", r), ("s", s)] {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::invalid(name, format!("{v} is outside [0, 1)")));
        }
    }
    Ok(1.0 / ((1.0 - s) * (1.0 - r)).sqrt())
}

/// Unknown-sigma pipeline: the known-sigma threshold with its noise term
/// inflated by [`hetero_inflation`]; same `2 exp(-t^2/2)` probability.
pub fn hetero_thm_prob(inp: &BoundInputs) -> Result<DeviationBound> {
    for (name, v) in [("r", inp.r), ("s", inp.s)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::invalid(name, format!("{v} is outside (0, 1)")));
        }
    }
    inp.validate()?;
    let inflation = hetero_inflation(inp.r, inp.s)?;
    Ok(DeviationBound { threshold: thm1_threshold(inp, inflation), probability: gaussian_half_tail(inp.t) })
}

/// Uniform bound on the untruncated interpolant without any independence
/// across nodes: `||f - p_hat||_inf >= ||q||_inf + t (||sigma||_2 / sqrt N) Lambda`
/// has probability at most `2 N_hat exp(-t^2)`, with `Lambda` the log bound on
/// the Lebesgue constant.
pub fn dependent_bound(n_hat: usize, big_n: usize, sigma_vec: &[f64], q_inf: f64, t: f64) -> Result<DeviationBound> {
    if big_n == 0 {
        return Err(Error::invalid("N", "must be positive"));
    }
    if !(t >= 0.0) || !(q_inf >= 0.0) {
        return Err(Error::invalid("t", "t and q_inf must be nonnegative"));
    }
    let sigma_l2 = sigma_vec.iter().map(|s| s * s).sum::<f64>().sqrt();
    let rho = sigma_l2 / (big_n as f64).sqrt();
    let threshold = q_inf + t * rho * lebesgue_log_bound(n_hat);
    let probability = Tail::from_ln((2.0 * n_hat as f64).ln() - t * t);
    Ok(DeviationBound { threshold, probability })
}
