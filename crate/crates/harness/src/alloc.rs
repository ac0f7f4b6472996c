//! Side-by-side dump of the estimated and known-sigma allocations.

use chebtrunc::algorithms::{hetero_presample, HeteroParams};
use chebtrunc::{allocate_known_sigma, allocate_uniform, derive_seed, SamplingOracle};

use crate::config::{Algorithm, ExperimentConfig};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct AllocRow {
    pub x: f64,
    pub sigma: f64,
    /// Pre-sample variance estimate `S_i^2`.
    pub s2: f64,
    /// `m + k_hat_i`.
    pub k_hetero: usize,
    pub k_known: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocDump {
    pub big_n: usize,
    pub n_hat: usize,
    pub r: f64,
    pub m: usize,
    pub rows: Vec<AllocRow>,
}

/// Runs the pre-sampling phase once and lays its allocation next to the
/// known-sigma one. Uses the config's target, noise and master seed.
pub fn allocation_dump(cfg: &ExperimentConfig, big_n: usize, n_hat: usize, r: f64) -> Result<AllocDump> {
    let params = HeteroParams::resolve(big_n, Some(n_hat), Some(r))?;
    let seed = derive_seed(cfg.master_seed, &[Algorithm::Hetero.index(), big_n as u64, u64::MAX]);
    let mut oracle = SamplingOracle::from_arc(cfg.target.to_fn(), cfg.noise, seed);
    let est = hetero_presample(&mut oracle, params)?;
    let sigma = est.grid.points().iter().map(|&x| cfg.noise.sigma_at(x)).collect::<chebtrunc::Result<Vec<f64>>>()?;
    let known = if sigma.iter().all(|&s| s == 0.0) {
        allocate_uniform(n_hat + 1, big_n + 1)
    } else {
        allocate_known_sigma(&sigma, big_n + 1)?
    };
    let rows = est
        .grid
        .points()
        .iter()
        .zip(&sigma)
        .zip(&est.presample_variances)
        .zip(est.totals())
        .zip(&known.counts)
        .map(|((((&x, &sigma), &s2), k_hetero), &k_known)| AllocRow { x, sigma, s2, k_hetero, k_known })
        .collect();
    Ok(AllocDump { big_n, n_hat, r, m: params.m, rows })
}
