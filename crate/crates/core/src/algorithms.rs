//! The three approximation pipelines and Mallows' Cp degree selection.
//!
//! * [`noisy_chebtrunc`]: one sample at each of the `N + 1` Chebyshev points.
//! * [`weighted_chebtrunc_known`]: `N_hat + 1` points, `k_i` proportional to
//!   the known `sigma_i^2`.
//! * [`hetero_chebtrunc`]: pre-samples a fraction `r` of the budget to estimate
//!   `S_i^2`, then allocates the rest proportionally to the estimates.
//!
//! All three interpolate the node means and truncate by Cp. The total budget
//! is `N + 1` samples and every pipeline spends exactly that.

use crate::allocation::{allocate_known_sigma, allocate_uniform, largest_remainder, AllocationMode, AllocationPlan};
use crate::cheb::{chebyshev_points, truncate, values_to_coeffs, ChebyshevGrid, ChebyshevSeries};
use crate::error::{Error, Result};
use crate::noise::SamplingOracle;

/// Default pre-sample fraction.
pub const DEFAULT_PRESAMPLE_FRACTION: f64 = 0.1;

/// Below this total estimated variance the proportional weights are treated as undefined.
const DEGENERATE_VARIANCE_SUM: f64 = 1e-300;

/// Share of highest-index coefficients used for the tail noise-floor estimate.
const TAIL_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxResult {
    /// Truncated approximant `p_n`.
    pub series: ChebyshevSeries,
    /// Full interpolant through the node means, before truncation.
    pub interpolant: ChebyshevSeries,
    pub chosen_degree: usize,
    pub interpolant_degree: usize,
    pub plan: AllocationPlan,
    pub node_means: Vec<f64>,
    /// Per-node sample variances; `None` for the single-sample pipeline.
    pub node_variances: Option<Vec<f64>>,
    pub samples_used: usize,
    /// Node-value noise variance fed to Cp.
    pub noise_floor_estimate: f64,
}

/// Parseval weight of coefficient `i` on a degree-`n_hat` grid.
#[inline]
fn parseval_weight(i: usize, n_hat: usize) -> f64 {
    if i == 0 || i == n_hat {
        2.0
    } else {
        1.0
    }
}

/// Cp noise floor is never taken below roundoff in the coefficients.
fn roundoff_floor(coeffs: &[f64]) -> f64 {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let unit = 64.0 * f64::EPSILON * scale;
    coeffs.len() as f64 * unit * unit
}

/// Degree `n` in `[0, max_degree]` minimising
/// `Cp(n) = RSS(n) + 2 (n + 1) sigma^2`, with
/// `RSS(n) = ((N_hat + 1) / 2) sum_{i > n} w_i c_i^2` the energy of the
/// discarded coefficients. Ties go to the smallest `n`.
pub fn mallows_cp_select(coeffs: &ChebyshevSeries, noise_floor: f64, max_degree: usize) -> Result<usize> {
    if !(noise_floor >= 0.0) {
        return Err(Error::invalid("noise_floor", format!("{noise_floor} must be nonnegative")));
    }
    let c = coeffs.coeffs();
    let n_hat = coeffs.degree();
    if max_degree > n_hat {
        return Err(Error::TruncationDegree { requested: max_degree, degree: n_hat });
    }
    let sigma2 = noise_floor.max(roundoff_floor(c));
    let half = (n_hat + 1) as f64 / 2.0;

    // rss[n] for n = max_degree down to 0, accumulated from the top
    let mut rss: f64 = (max_degree + 1..=n_hat).map(|i| half * parseval_weight(i, n_hat) * c[i] * c[i]).sum();
    let mut best = (f64::INFINITY, 0usize);
    let mut cps = vec![0.0; max_degree + 1];
    for n in (0..=max_degree).rev() {
        cps[n] = rss + 2.0 * (n + 1) as f64 * sigma2;
        rss += half * parseval_weight(n, n_hat) * c[n] * c[n];
    }
    for (n, &cp) in cps.iter().enumerate() {
        if cp < best.0 {
            best = (cp, n);
        }
    }
    Ok(best.1)
}

/// Node-value noise variance estimated from the highest 10% of coefficients,
/// where the signal has decayed and only noise energy remains.
pub fn tail_noise_floor(coeffs: &ChebyshevSeries) -> f64 {
    let c = coeffs.coeffs();
    let n_hat = coeffs.degree();
    let count = ((TAIL_FRACTION * c.len() as f64).ceil() as usize).clamp(1, c.len());
    let start = c.len() - count;
    let mean: f64 =
        (start..c.len()).map(|i| parseval_weight(i, n_hat) * c[i] * c[i]).sum::<f64>() / count as f64;
    ((n_hat + 1) as f64 / 2.0 * mean).max(0.0)
}

fn finish(
    grid_degree: usize,
    node_means: Vec<f64>,
    node_variances: Option<Vec<f64>>,
    noise_floor: f64,
    plan: AllocationPlan,
    samples_used: usize,
) -> Result<ApproxResult> {
    let interpolant = values_to_coeffs(&node_means)?;
    let chosen_degree = mallows_cp_select(&interpolant, noise_floor, grid_degree)?;
    let series = truncate(&interpolant, chosen_degree)?;
    Ok(ApproxResult {
        series,
        interpolant,
        chosen_degree,
        interpolant_degree: grid_degree,
        plan,
        node_means,
        node_variances,
        samples_used,
        noise_floor_estimate: noise_floor,
    })
}

/// One sample per node on the degree-`N` grid, interpolate, Cp-truncate.
pub fn noisy_chebtrunc(oracle: &mut SamplingOracle, big_n: usize) -> Result<ApproxResult> {
    if big_n == 0 {
        return Err(Error::invalid("N", "must be at least 1"));
    }
    let start = oracle.samples_drawn();
    let grid = chebyshev_points(big_n);
    let values = grid.points().iter().map(|&x| oracle.sample(x)).collect::<Result<Vec<f64>>>()?;
    let interpolant = values_to_coeffs(&values)?;
    let noise_floor = tail_noise_floor(&interpolant);
    let plan = AllocationPlan { counts: vec![1; big_n + 1], budget: big_n + 1, mode: AllocationMode::Uniform };
    let used = oracle.samples_drawn() - start;
    finish(big_n, values, None, noise_floor, plan, used)
}

fn check_reduced_degree(big_n: usize, n_hat: usize) -> Result<()> {
    if big_n == 0 {
        return Err(Error::invalid("N", "must be at least 1"));
    }
    if n_hat > big_n {
        return Err(Error::BudgetShortfall { budget: big_n + 1, nodes: n_hat + 1 });
    }
    Ok(())
}

/// Weighted sampling with the oracle's true `sigma(x)`: `k_i` proportional to
/// `sigma_i^2`, each at least 1. A field that is zero at every node falls back
/// to a uniform split.
pub fn weighted_chebtrunc_known(oracle: &mut SamplingOracle, big_n: usize, n_hat: usize) -> Result<ApproxResult> {
    check_reduced_degree(big_n, n_hat)?;
    let start = oracle.samples_drawn();
    let grid = chebyshev_points(n_hat);
    let sigma = grid.points().iter().map(|&x| oracle.noise().sigma_at(x)).collect::<Result<Vec<f64>>>()?;
    let plan = if sigma.iter().all(|&s| s == 0.0) {
        allocate_uniform(n_hat + 1, big_n + 1)
    } else {
        allocate_known_sigma(&sigma, big_n + 1)?
    };
    let mut means = Vec::with_capacity(n_hat + 1);
    let mut vars = Vec::with_capacity(n_hat + 1);
    for (&x, &k) in grid.points().iter().zip(&plan.counts) {
        let s = oracle.sample_many(x, k)?;
        means.push(s.mean);
        vars.push(s.variance);
    }
    let noise_floor = sigma.iter().zip(&plan.counts).map(|(s, &k)| s * s / k as f64).sum::<f64>() / (n_hat + 1) as f64;
    let used = oracle.samples_drawn() - start;
    finish(n_hat, means, Some(vars), noise_floor, plan, used)
}

/// Resolved HeteroChebtrunc parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeteroParams {
    pub big_n: usize,
    pub n_hat: usize,
    pub r: f64,
    /// Pre-samples per node, `floor(r N / (N_hat + 1))`.
    pub m: usize,
}

impl HeteroParams {
    /// Applies the defaults `N_hat = floor(sqrt N)` and `r = 0.1` and checks `m >= 2`.
    pub fn resolve(big_n: usize, n_hat: Option<usize>, r: Option<f64>) -> Result<Self> {
        let n_hat = n_hat.unwrap_or_else(|| (big_n as f64).sqrt().floor() as usize);
        let r = r.unwrap_or(DEFAULT_PRESAMPLE_FRACTION);
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::invalid("r", format!("{r} is outside (0, 1)")));
        }
        check_reduced_degree(big_n, n_hat)?;
        let m = (r * big_n as f64 / (n_hat + 1) as f64).floor() as usize;
        if m < 2 {
            return Err(Error::PreSampleTooSmall { m, budget: big_n, n_hat, r });
        }
        Ok(Self { big_n, n_hat, r, m })
    }

    /// Budget left for the weighted phase, `N + 1 - m (N_hat + 1)`.
    pub fn weighted_budget(&self) -> usize {
        self.big_n + 1 - self.m * (self.n_hat + 1)
    }
}

/// Outcome of the pre-sampling and allocation phases.
#[derive(Debug, Clone, PartialEq)]
pub struct HeteroAllocation {
    pub params: HeteroParams,
    pub grid: ChebyshevGrid,
    pub presample_means: Vec<f64>,
    /// `S_i^2` from the `m` pre-samples at each node.
    pub presample_variances: Vec<f64>,
    /// Extra draws `k_hat_i` for the weighted phase.
    pub extra: Vec<usize>,
    /// True when every `S_i^2` vanished and the weighted phase was split uniformly.
    pub degenerate: bool,
}

impl HeteroAllocation {
    /// Total draws per node, `m + k_hat_i`.
    pub fn totals(&self) -> Vec<usize> {
        self.extra.iter().map(|k| k + self.params.m).collect()
    }
}

/// Pre-samples `m` draws per node and apportions the remaining budget
/// proportionally to the estimated variances.
pub fn hetero_presample(oracle: &mut SamplingOracle, params: HeteroParams) -> Result<HeteroAllocation> {
    let grid = chebyshev_points(params.n_hat);
    let mut presample_means = Vec::with_capacity(params.n_hat + 1);
    let mut presample_variances = Vec::with_capacity(params.n_hat + 1);
    for &x in grid.points() {
        let s = oracle.sample_many(x, params.m)?;
        presample_means.push(s.mean);
        presample_variances.push(s.variance);
    }
    let remaining = params.weighted_budget();
    let total: f64 = presample_variances.iter().sum();
    let degenerate = !(total >= DEGENERATE_VARIANCE_SUM);
    let extra = if degenerate {
        allocate_uniform(params.n_hat + 1, remaining).counts
    } else {
        largest_remainder(&presample_variances, remaining)?
    };
    Ok(HeteroAllocation { params, grid, presample_means, presample_variances, extra, degenerate })
}

/// Unknown-sigma pipeline. `n_hat` defaults to `floor(sqrt N)`, `r` to 0.1.
pub fn hetero_chebtrunc(
    oracle: &mut SamplingOracle,
    big_n: usize,
    n_hat: Option<usize>,
    r: Option<f64>,
) -> Result<ApproxResult> {
    let params = HeteroParams::resolve(big_n, n_hat, r)?;
    let start = oracle.samples_drawn();
    let alloc = hetero_presample(oracle, params)?;
    let m = params.m as f64;
    let mut means = Vec::with_capacity(params.n_hat + 1);
    for ((&x, &extra), &pre_mean) in alloc.grid.points().iter().zip(&alloc.extra).zip(&alloc.presample_means) {
        if extra == 0 {
            means.push(pre_mean);
        } else {
            let s = oracle.sample_many(x, extra)?;
            means.push((m * pre_mean + extra as f64 * s.mean) / (m + extra as f64));
        }
    }
    let counts = alloc.totals();
    let noise_floor = alloc.presample_variances.iter().zip(&counts).map(|(v, &k)| v / k as f64).sum::<f64>()
        / (params.n_hat + 1) as f64;
    let mode = if alloc.degenerate { AllocationMode::Uniform } else { AllocationMode::ProportionalEstimated };
    let plan = AllocationPlan { counts, budget: big_n + 1, mode };
    let used = oracle.samples_drawn() - start;
    finish(params.n_hat, means, Some(alloc.presample_variances), noise_floor, plan, used)
}
