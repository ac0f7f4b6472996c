//! Noise fields `sigma(x)` on `[-1, 1]`, target functions, and the sampling
//! oracle that produces `y = f(x) + eps_x` from a deterministic RNG stream.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cheb::ChebyshevSeries;
use crate::error::{Error, Result};
use crate::stats::Welford;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Closed-form noise levels known by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedSigma {
    /// `|sin(3x) + 1e-5|`
    Sin3,
    /// The Runge profile `1 / (1 + 25 x^2)` used as a noise level.
    Runge,
}

impl NamedSigma {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            NamedSigma::Sin3 => ((3.0 * x).sin() + 1e-5).abs(),
            NamedSigma::Runge => 1.0 / (1.0 + 25.0 * x * x),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NamedSigma::Sin3 => "sin3",
            NamedSigma::Runge => "runge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    Constant(f64),
    /// `hi` on the closed interval `[a, b]`, `lo` elsewhere.
    Indicator { hi: f64, lo: f64, a: f64, b: f64 },
    Expression(NamedSigma),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseDistribution {
    #[default]
    Normal,
    /// Uniform on `[-a, a]` with `a = sigma * sqrt(3)`, so the std is `sigma`.
    UniformSymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Dependence {
    #[default]
    Independent,
    /// `eps = sigma(x) (sqrt(1 - w^2) z_local + w z_round)`, where `z_round` is
    /// shared by the j-th draw at every node. Repeat draws at one `x` stay
    /// independent, draws at distinct nodes in the same round are correlated.
    SharedAdditive(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseField {
    pub kind: NoiseKind,
    pub distribution: NoiseDistribution,
    pub dependence: Dependence,
}

impl NoiseField {
    pub fn new(kind: NoiseKind) -> Self {
        Self { kind, distribution: NoiseDistribution::Normal, dependence: Dependence::Independent }
    }

    pub fn constant(sigma: f64) -> Self {
        Self::new(NoiseKind::Constant(sigma))
    }

    pub fn indicator(hi: f64, lo: f64, a: f64, b: f64) -> Self {
        Self::new(NoiseKind::Indicator { hi, lo, a, b })
    }

    pub fn named(name: NamedSigma) -> Self {
        Self::new(NoiseKind::Expression(name))
    }

    pub fn with_distribution(mut self, d: NoiseDistribution) -> Self {
        self.distribution = d;
        self
    }

    pub fn with_dependence(mut self, d: Dependence) -> Self {
        self.dependence = d;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            NoiseKind::Constant(s) => s >= 0.0 && s.is_finite(),
            NoiseKind::Indicator { hi, lo, a, b } => {
                hi >= 0.0 && lo >= 0.0 && hi.is_finite() && lo.is_finite() && -1.0 <= a && a <= b && b <= 1.0
            }
            NoiseKind::Expression(_) => true,
        };
        if !ok {
            return Err(Error::invalid("noise field", format!("{self}")));
        }
        if let Dependence::SharedAdditive(w) = self.dependence {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::invalid("dependence weight", format!("{w} is outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn is_homoskedastic(&self) -> bool {
        matches!(self.kind, NoiseKind::Constant(_))
    }

    /// Noise standard deviation at `x`.
    pub fn sigma_at(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        Ok(self.sigma_unchecked(x))
    }

    fn sigma_unchecked(&self, x: f64) -> f64 {
        match self.kind {
            NoiseKind::Constant(s) => s,
            NoiseKind::Indicator { hi, lo, a, b } => {
                if a <= x && x <= b {
                    hi
                } else {
                    lo
                }
            }
            NoiseKind::Expression(name) => name.eval(x),
        }
    }
}

impl fmt::Display for NoiseField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NoiseKind::Constant(s) => write!(f, "constant(sigma={s})")?,
            NoiseKind::Indicator { hi, lo, a, b } => write!(f, "burst(hi={hi}, lo={lo}, a={a}, b={b})")?,
            NoiseKind::Expression(n) => write!(f, "{}", n.name())?,
        }
        if self.distribution == NoiseDistribution::UniformSymmetric {
            write!(f, " uniform")?;
        }
        if let Dependence::SharedAdditive(w) = self.dependence {
            write!(f, " shared(w={w})")?;
        }
        Ok(())
    }
}

/// Points within this distance outside `[-1, 1]` are accepted (endpoint rounding).
const DOMAIN_SLACK: f64 = 1e-12;

fn check_domain(x: f64) -> Result<()> {
    if x.abs() <= 1.0 + DOMAIN_SLACK {
        Ok(())
    } else {
        Err(Error::OutOfDomain(x))
    }
}

/// Target functions the harness can name in a config file.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// `1 / (1 + 25 x^2)`
    Runge,
    /// A polynomial given by its Chebyshev coefficients.
    Chebyshev(ChebyshevSeries),
}

impl Target {
    pub fn chebyshev_t(degree: usize) -> Self {
        let mut c = vec![0.0; degree + 1];
        c[degree] = 1.0;
        Target::Chebyshev(ChebyshevSeries::new(c))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Target::Runge => runge(x),
            Target::Chebyshev(s) => s.eval(x),
        }
    }

    pub fn to_fn(&self) -> TargetFn {
        let t = self.clone();
        Arc::new(move |x| t.eval(x))
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Runge => write!(f, "runge"),
            Target::Chebyshev(s) => {
                write!(f, "cheb(")?;
                for (i, c) in s.coeffs().iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

pub fn runge(x: f64) -> f64 {
    1.0 / (1.0 + 25.0 * x * x)
}

pub type TargetFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// splitmix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a master seed and a path of
/// indices, e.g. `(algorithm, N, trial)`. Order-sensitive and platform-stable.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(master), |acc, &p| mix64(acc ^ mix64(p)))
}

/// Result of [`SamplingOracle::sample_many`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub mean: f64,
    /// Unbiased sample variance, 0 when `count == 1`.
    pub variance: f64,
    pub count: usize,
}

/// The only source of noisy evaluations. Owns its RNG and counts every draw.
pub struct SamplingOracle {
    target: TargetFn,
    noise: NoiseField,
    seed: u64,
    rng: ChaCha8Rng,
    samples_drawn: usize,
    shared: SharedRounds,
}

#[derive(Default)]
struct SharedRounds {
    rng: Option<ChaCha8Rng>,
    draws: Vec<f64>,
    per_node: HashMap<u64, usize>,
}

impl fmt::Debug for SamplingOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SamplingOracle")
            .field("noise", &self.noise)
            .field("seed", &self.seed)
            .field("samples_drawn", &self.samples_drawn)
            .finish()
    }
}

impl SamplingOracle {
    pub fn new<F>(target: F, noise: NoiseField, seed: u64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_arc(Arc::new(target), noise, seed)
    }

    pub fn from_arc(target: TargetFn, noise: NoiseField, seed: u64) -> Self {
        let shared = match noise.dependence {
            Dependence::Independent => SharedRounds::default(),
            Dependence::SharedAdditive(_) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(1);
                SharedRounds { rng: Some(rng), ..Default::default() }
            }
        };
        Self { target, noise, seed, rng: ChaCha8Rng::seed_from_u64(seed), samples_drawn: 0, shared }
    }

    pub fn noise(&self) -> &NoiseField {
        &self.noise
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn samples_drawn(&self) -> usize {
        self.samples_drawn
    }

    /// Noise-free value `f(x)`; does not consume budget.
    pub fn exact(&self, x: f64) -> f64 {
        (self.target)(x)
    }

    pub fn target(&self) -> &TargetFn {
        &self.target
    }

    #[inline]
    fn standard_draw(rng: &mut ChaCha8Rng, dist: NoiseDistribution) -> f64 {
        match dist {
            NoiseDistribution::Normal => rng.sample(StandardNormal),
            NoiseDistribution::UniformSymmetric => SQRT_3 * rng.random_range(-1.0..1.0),
        }
    }

    fn shared_round(&mut self, x: f64) -> f64 {
        let dist = self.noise.distribution;
        let sh = &mut self.shared;
        let round = sh.per_node.entry(x.to_bits()).or_insert(0);
        let j = *round;
        *round += 1;
        let rng = sh.rng.as_mut().expect("shared stream exists in dependent mode");
        while sh.draws.len() <= j {
            sh.draws.push(Self::standard_draw(rng, dist));
        }
        sh.draws[j]
    }

    #[inline]
    fn noise_draw(&mut self, sigma: f64) -> f64 {
        Self::standard_draw(&mut self.rng, self.noise.distribution) * sigma
    }

    fn one(&mut self, x: f64, fx: f64, sigma: f64) -> f64 {
        match self.noise.dependence {
            Dependence::Independent => fx + self.noise_draw(sigma),
            Dependence::SharedAdditive(w) => {
                let local = Self::standard_draw(&mut self.rng, self.noise.distribution);
                let shared = self.shared_round(x);
                fx + sigma * ((1.0 - w * w).sqrt() * local + w * shared)
            }
        }
    }

    /// One noisy evaluation `f(x) + eps_x`.
    pub fn sample(&mut self, x: f64) -> Result<f64> {
        check_domain(x)?;
        let sigma = self.noise.sigma_unchecked(x);
        let fx = self.exact(x);
        self.samples_drawn += 1;
        Ok(self.one(x, fx, sigma))
    }

    /// Draws `k` fresh samples at `x` and returns their mean and unbiased variance.
    pub fn sample_many(&mut self, x: f64, k: usize) -> Result<SampleSummary> {
        check_domain(x)?;
        if k == 0 {
            return Err(Error::ZeroSamples);
        }
        let sigma = self.noise.sigma_unchecked(x);
        let fx = self.exact(x);
        let mut acc = Welford::new();
        match self.noise.dependence {
            Dependence::Independent => {
                for _ in 0..k {
                    let y = fx + self.noise_draw(sigma);
                    acc.push(y);
                }
            }
            Dependence::SharedAdditive(_) => {
                for _ in 0..k {
                    let y = self.one(x, fx, sigma);
                    acc.push(y);
                }
            }
        }
        self.samples_drawn += k;
        Ok(SampleSummary { mean: acc.mean(), variance: acc.variance(), count: k })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn burst() -> NoiseField {
        NoiseField::indicator(1.0, 1e-5, 0.0, 0.1)
    }

    #[test]
    fn sigma_catalog() {
        assert_eq!(burst().sigma_at(0.05).unwrap(), 1.0);
        assert_eq!(burst().sigma_at(-0.5).unwrap(), 1e-5);
        assert_eq!(burst().sigma_at(0.0).unwrap(), 1.0);
        assert_eq!(burst().sigma_at(0.1).unwrap(), 1.0);
        let s = NoiseField::named(NamedSigma::Sin3);
        assert!((s.sigma_at(0.0).unwrap() - 1e-5).abs() < 1e-20);
        assert!(matches!(burst().sigma_at(1.5), Err(Error::OutOfDomain(_))));
        assert!(NoiseField::constant(0.2).is_homoskedastic());
        assert!(!burst().is_homoskedastic());
    }

    #[test]
    fn sigma_nonnegative() {
        let fields = [burst(), NoiseField::named(NamedSigma::Sin3), NoiseField::named(NamedSigma::Runge)];
        for f in fields {
            for i in 0..=200 {
                let x = -1.0 + i as f64 / 100.0;
                assert!(f.sigma_at(x).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn zero_noise_is_exact() {
        let mut o = SamplingOracle::new(|x: f64| x.sin(), NoiseField::constant(0.0), 3);
        assert_eq!(o.sample(0.3).unwrap(), 0.3f64.sin());
        let s = o.sample_many(-0.7, 17).unwrap();
        assert_eq!(s.mean, (-0.7f64).sin());
        assert_eq!(s.variance, 0.0);
        assert_eq!(o.samples_drawn(), 18);
    }

    #[test]
    fn determinism() {
        let mk = || SamplingOracle::new(runge, NoiseField::constant(1.0), 42);
        let (mut a, mut b) = (mk(), mk());
        for i in 0..100 {
            let x = (i as f64 / 50.0) - 1.0;
            assert_eq!(a.sample(x).unwrap().to_bits(), b.sample(x).unwrap().to_bits());
        }
    }

    #[test]
    fn two_sample_formula() {
        let field = NoiseField::constant(0.5);
        let mut a = SamplingOracle::new(|_| 0.0, field, 9);
        let mut b = SamplingOracle::new(|_| 0.0, field, 9);
        let s = a.sample_many(0.2, 2).unwrap();
        let (y1, y2) = (b.sample(0.2).unwrap(), b.sample(0.2).unwrap());
        assert!((s.mean - (y1 + y2) / 2.0).abs() < 1e-15);
        assert!((s.variance - (y1 - y2).powi(2) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_calls() {
        let mut o = SamplingOracle::new(runge, NoiseField::constant(1.0), 1);
        assert_eq!(o.sample_many(0.0, 0), Err(Error::ZeroSamples));
        assert!(o.sample(-1.01).is_err());
        assert_eq!(o.samples_drawn(), 0);
    }

    #[test]
    fn seed_derivation_is_order_sensitive() {
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
        assert_ne!(derive_seed(1, &[2]), derive_seed(2, &[2]));
        assert_eq!(derive_seed(7, &[1, 2, 3]), derive_seed(7, &[1, 2, 3]));
    }
}
