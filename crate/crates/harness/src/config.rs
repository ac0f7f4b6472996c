//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # Runge target, burst noise
//! target     = runge                      # or cheb(c0, c1, ...), or t(5)
//! noise      = burst(hi=1, lo=1e-5, a=0, b=0.1)
//! distribution = normal                   # or uniform
//! dependence = independent                # or shared(w=0.5)
//! algorithms = noisy, weighted_known, hetero
//! n_grid     = logspace(100, 1000000, 40) # or list(100, 1000, ...)
//! trials     = 50
//! n_hat      = sqrt                       # or fixed(1000), factor(0.5)
//! r          = 0.1
//! master_seed = 1
//! sup_resolution = 10001
//! ```
//!
//! Noise fields: `constant(sigma=0.1)`, `burst(hi, lo, a, b)` (alias
//! `indicator`), `sin3`, `runge`. Arguments may be positional or named.
//! Uniform noise is parameterized by its standard deviation, so U[-1, 1]
//! is `constant(sigma=0.5773502691896258)` with `distribution = uniform`.

use std::fmt;
use std::str::FromStr;

use chebtrunc::algorithms::HeteroParams;
use chebtrunc::{ChebyshevSeries, Dependence, NamedSigma, NoiseDistribution, NoiseField, Target};

use crate::error::{HarnessError, Result};

pub const DEFAULT_SUP_RESOLUTION: usize = 10_001;
pub const DEFAULT_R: f64 = 0.1;
pub const SEED_ENV: &str = "CHEBTRUNC_SEED";
const FALLBACK_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Noisy,
    WeightedKnown,
    Hetero,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Noisy, Algorithm::WeightedKnown, Algorithm::Hetero];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Noisy => "noisy",
            Algorithm::WeightedKnown => "weighted_known",
            Algorithm::Hetero => "hetero",
        }
    }

    /// Stable index used in seed derivation.
    pub fn index(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "noisy" => Ok(Algorithm::Noisy),
            "weighted_known" | "weighted" | "known" => Ok(Algorithm::WeightedKnown),
            "hetero" => Ok(Algorithm::Hetero),
            other => Err(HarnessError::config(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NGrid {
    LogSpaced { min: usize, max: usize, count: usize },
    List(Vec<usize>),
}

impl NGrid {
    /// Grid values, ascending with duplicates removed.
    pub fn values(&self) -> Vec<usize> {
        let mut v = match self {
            NGrid::List(v) => v.clone(),
            NGrid::LogSpaced { min, max, count } => logspace(*min, *max, *count),
        };
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// `count` log-spaced integers from `min` to `max` inclusive, rounded to nearest.
pub fn logspace(min: usize, max: usize, count: usize) -> Vec<usize> {
    if count <= 1 {
        return vec![min];
    }
    let (lo, hi) = ((min as f64).log10(), (max as f64).log10());
    let mut v: Vec<usize> = (0..count)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64).round() as usize)
        .collect();
    v[0] = min;
    v[count - 1] = max;
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NHatRule {
    Sqrt,
    Fixed(usize),
    Factor(f64),
}

impl NHatRule {
    pub fn apply(&self, big_n: usize) -> usize {
        let root = (big_n as f64).sqrt();
        match *self {
            NHatRule::Sqrt => root.floor() as usize,
            NHatRule::Fixed(v) => v,
            NHatRule::Factor(f) => (f * root).floor().max(1.0) as usize,
        }
    }
}

impl fmt::Display for NHatRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NHatRule::Sqrt => write!(f, "sqrt"),
            NHatRule::Fixed(v) => write!(f, "fixed({v})"),
            NHatRule::Factor(x) => write!(f, "factor({x:?})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub target: Target,
    pub noise: NoiseField,
    pub algorithms: Vec<Algorithm>,
    pub n_grid: NGrid,
    pub trials: usize,
    pub n_hat_rule: NHatRule,
    pub r: f64,
    pub master_seed: u64,
    pub sup_resolution: usize,
}

impl ExperimentConfig {
    pub fn new(target: Target, noise: NoiseField) -> Self {
        Self {
            target,
            noise,
            algorithms: Algorithm::ALL.to_vec(),
            n_grid: NGrid::LogSpaced { min: 100, max: 1_000_000, count: 40 },
            trials: 50,
            n_hat_rule: NHatRule::Sqrt,
            r: DEFAULT_R,
            master_seed: default_seed(),
            sup_resolution: DEFAULT_SUP_RESOLUTION,
        }
    }

    /// `N_hat` used by `alg` at budget parameter `big_n`. NoisyChebtrunc always uses `N`.
    pub fn n_hat_for(&self, alg: Algorithm, big_n: usize) -> usize {
        match alg {
            Algorithm::Noisy => big_n,
            _ => self.n_hat_rule.apply(big_n),
        }
    }

    /// Checks every grid point against every algorithm's preconditions.
    pub fn validate(&self) -> Result<()> {
        self.noise.validate().map_err(|e| HarnessError::config(e.to_string()))?;
        if self.trials == 0 {
            return Err(HarnessError::config("trials must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(HarnessError::config("no algorithms selected"));
        }
        if self.sup_resolution < 2 {
            return Err(HarnessError::config("sup_resolution must be at least 2"));
        }
        let grid = self.n_grid.values();
        if grid.is_empty() {
            return Err(HarnessError::config("n_grid is empty"));
        }
        for &n in &grid {
            if n < 10 {
                return Err(HarnessError::config(format!("n_grid value {n} is below 10")));
            }
            for &alg in &self.algorithms {
                let n_hat = self.n_hat_for(alg, n);
                match alg {
                    Algorithm::Noisy => {}
                    Algorithm::WeightedKnown => {
                        if n_hat > n {
                            return Err(HarnessError::config(format!("N_hat = {n_hat} exceeds N = {n}")));
                        }
                    }
                    Algorithm::Hetero => {
                        HeteroParams::resolve(n, Some(n_hat), Some(self.r))
                            .map_err(|e| HarnessError::config(format!("hetero at N = {n}: {e}")))?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Seed from `CHEBTRUNC_SEED` when set and valid, otherwise 1.
pub fn default_seed() -> u64 {
    std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(FALLBACK_SEED)
}

/// `name(arg, key=value, ...)` split into its name and arguments.
struct Call<'a> {
    name: &'a str,
    args: Vec<(Option<&'a str>, &'a str)>,
}

fn parse_call(s: &str) -> Result<Call<'_>> {
    let s = s.trim();
    let Some(open) = s.find('(') else {
        return Ok(Call { name: s, args: Vec::new() });
    };
    if !s.ends_with(')') {
        return Err(HarnessError::config(format!("unbalanced parentheses in `{s}`")));
    }
    let name = s[..open].trim();
    let inner = s[open + 1..s.len() - 1].trim();
    let args = if inner.is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|a| match a.split_once('=') {
                Some((k, v)) => (Some(k.trim()), v.trim()),
                None => (None, a.trim()),
            })
            .collect()
    };
    Ok(Call { name, args })
}

fn num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| HarnessError::config(format!("cannot parse {what} from `{s}`")))
}

impl Call<'_> {
    /// Argument by name, falling back to position.
    fn arg(&self, pos: usize, key: &str) -> Result<&str> {
        if let Some((_, v)) = self.args.iter().find(|(k, _)| *k == Some(key)) {
            return Ok(v);
        }
        match self.args.get(pos) {
            Some((None, v)) => Ok(v),
            _ => Err(HarnessError::config(format!("`{}` is missing argument `{key}`", self.name))),
        }
    }

    fn expect_arity(&self, n: usize) -> Result<()> {
        if self.args.len() != n {
            return Err(HarnessError::config(format!("`{}` takes {n} argument(s), got {}", self.name, self.args.len())));
        }
        Ok(())
    }
}

pub fn parse_noise(s: &str) -> Result<NoiseField> {
    let c = parse_call(s)?;
    let field = match c.name {
        "constant" => {
            c.expect_arity(1)?;
            NoiseField::constant(num(c.arg(0, "sigma")?, "sigma")?)
        }
        "burst" | "indicator" => {
            c.expect_arity(4)?;
            NoiseField::indicator(
                num(c.arg(0, "hi")?, "hi")?,
                num(c.arg(1, "lo")?, "lo")?,
                num(c.arg(2, "a")?, "a")?,
                num(c.arg(3, "b")?, "b")?,
            )
        }
        "sin3" => NoiseField::named(NamedSigma::Sin3),
        "runge" => NoiseField::named(NamedSigma::Runge),
        other => return Err(HarnessError::config(format!("unknown noise field `{other}`"))),
    };
    field.validate().map_err(|e| HarnessError::config(e.to_string()))?;
    Ok(field)
}

pub fn parse_distribution(s: &str) -> Result<NoiseDistribution> {
    match s.trim() {
        "normal" | "gaussian" => Ok(NoiseDistribution::Normal),
        "uniform" => Ok(NoiseDistribution::UniformSymmetric),
        other => Err(HarnessError::config(format!("unknown distribution `{other}`"))),
    }
}

pub fn parse_dependence(s: &str) -> Result<Dependence> {
    let c = parse_call(s)?;
    match c.name {
        "independent" => Ok(Dependence::Independent),
        "shared" => {
            c.expect_arity(1)?;
            Ok(Dependence::SharedAdditive(num(c.arg(0, "w")?, "w")?))
        }
        other => Err(HarnessError::config(format!("unknown dependence `{other}`"))),
    }
}

pub fn parse_target(s: &str) -> Result<Target> {
    let c = parse_call(s)?;
    match c.name {
        "runge" => Ok(Target::Runge),
        "t" | "T" => {
            c.expect_arity(1)?;
            Ok(Target::chebyshev_t(num(c.arg(0, "degree")?, "degree")?))
        }
        "cheb" => {
            if c.args.is_empty() {
                return Err(HarnessError::config("cheb() needs at least one coefficient"));
            }
            let coeffs = c.args.iter().map(|(_, v)| num(v, "coefficient")).collect::<Result<Vec<f64>>>()?;
            Ok(Target::Chebyshev(ChebyshevSeries::new(coeffs)))
        }
        other => Err(HarnessError::config(format!("unknown target `{other}`"))),
    }
}

pub fn parse_n_grid(s: &str) -> Result<NGrid> {
    let c = parse_call(s)?;
    match c.name {
        "logspace" => {
            c.expect_arity(3)?;
            let min: usize = num(c.arg(0, "min")?, "min")?;
            let max: usize = num(c.arg(1, "max")?, "max")?;
            let count: usize = num(c.arg(2, "count")?, "count")?;
            if min == 0 || max < min || count == 0 {
                return Err(HarnessError::config("logspace needs 0 < min <= max and count >= 1"));
            }
            Ok(NGrid::LogSpaced { min, max, count })
        }
        "list" => Ok(NGrid::List(c.args.iter().map(|(_, v)| num(v, "N")).collect::<Result<_>>()?)),
        _ => Ok(NGrid::List(s.split(',').map(|v| num(v, "N")).collect::<Result<_>>()?)),
    }
}

pub fn parse_n_hat(s: &str) -> Result<NHatRule> {
    let c = parse_call(s)?;
    match c.name {
        "sqrt" => Ok(NHatRule::Sqrt),
        "fixed" => {
            c.expect_arity(1)?;
            Ok(NHatRule::Fixed(num(c.arg(0, "value")?, "N_hat")?))
        }
        "factor" => {
            c.expect_arity(1)?;
            let f: f64 = num(c.arg(0, "value")?, "factor")?;
            if !(f > 0.0) {
                return Err(HarnessError::config("factor must be positive"));
            }
            Ok(NHatRule::Factor(f))
        }
        other => Err(HarnessError::config(format!("unknown n_hat rule `{other}`"))),
    }
}

/// Parses the flat config format. Unknown keys and repeated keys are errors.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(Target::Runge, NoiseField::constant(0.0));
    let mut distribution = None;
    let mut dependence = None;
    let mut seen = std::collections::HashSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        let value = value.trim();
        if !seen.insert(key.to_string()) {
            return Err(HarnessError::config(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
        let at = |e: HarnessError| HarnessError::config(format!("line {}: {e}", lineno + 1));
        match key {
            "target" => cfg.target = parse_target(value).map_err(at)?,
            "noise" => cfg.noise = parse_noise(value).map_err(at)?,
            "distribution" => distribution = Some(parse_distribution(value).map_err(at)?),
            "dependence" => dependence = Some(parse_dependence(value).map_err(at)?),
            "algorithms" => {
                cfg.algorithms = value.split(',').map(str::parse).collect::<Result<Vec<_>>>().map_err(at)?;
                cfg.algorithms.sort();
                cfg.algorithms.dedup();
            }
            "n_grid" => cfg.n_grid = parse_n_grid(value).map_err(at)?,
            "trials" => cfg.trials = num(value, "trials").map_err(at)?,
            "n_hat" => cfg.n_hat_rule = parse_n_hat(value).map_err(at)?,
            "r" => cfg.r = num(value, "r").map_err(at)?,
            "master_seed" => cfg.master_seed = num(value, "master_seed").map_err(at)?,
            "sup_resolution" => cfg.sup_resolution = num(value, "sup_resolution").map_err(at)?,
            other => return Err(HarnessError::config(format!("line {}: unknown key `{other}`", lineno + 1))),
        }
    }
    if let Some(d) = distribution {
        cfg.noise = cfg.noise.with_distribution(d);
    }
    if let Some(d) = dependence {
        cfg.noise = cfg.noise.with_dependence(d);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Renders a config back into the file format; `parse_config` of the output
/// reproduces the config.
pub fn render_config(cfg: &ExperimentConfig) -> String {
    let noise = match cfg.noise.kind {
        chebtrunc::NoiseKind::Constant(s) => format!("constant(sigma={s:?})"),
        chebtrunc::NoiseKind::Indicator { hi, lo, a, b } => format!("burst(hi={hi:?}, lo={lo:?}, a={a:?}, b={b:?})"),
        chebtrunc::NoiseKind::Expression(n) => n.name().to_string(),
    };
    let target = match &cfg.target {
        Target::Runge => "runge".to_string(),
        Target::Chebyshev(s) => {
            let c: Vec<String> = s.coeffs().iter().map(|c| format!("{c:?}")).collect();
            format!("cheb({})", c.join(", "))
        }
    };
    let distribution = match cfg.noise.distribution {
        NoiseDistribution::Normal => "normal",
        NoiseDistribution::UniformSymmetric => "uniform",
    };
    let dependence = match cfg.noise.dependence {
        Dependence::Independent => "independent".to_string(),
        Dependence::SharedAdditive(w) => format!("shared(w={w:?})"),
    };
    let grid = match &cfg.n_grid {
        NGrid::LogSpaced { min, max, count } => format!("logspace({min}, {max}, {count})"),
        NGrid::List(v) => format!("list({})", v.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ")),
    };
    let algs: Vec<&str> = cfg.algorithms.iter().map(|a| a.tag()).collect();
    format!(
        "target = {target}\nnoise = {noise}\ndistribution = {distribution}\ndependence = {dependence}\n\
         algorithms = {}\nn_grid = {grid}\ntrials = {}\nn_hat = {}\nr = {:?}\nmaster_seed = {}\nsup_resolution = {}\n",
        algs.join(", "),
        cfg.trials,
        cfg.n_hat_rule,
        cfg.r,
        cfg.master_seed,
        cfg.sup_resolution,
    )
}
