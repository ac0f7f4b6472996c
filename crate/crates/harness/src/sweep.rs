//! Monte-Carlo sweeps over algorithms, budgets and trials.

use std::time::Instant;

use chebtrunc::{
    derive_seed, hetero_chebtrunc, noisy_chebtrunc, sup_error, weighted_chebtrunc_known, ApproxResult,
    SamplingOracle, TargetFn,
};
use rayon::prelude::*;

use crate::config::{Algorithm, ExperimentConfig};
use crate::error::{HarnessError, Result};

/// One `(algorithm, N, trial)` outcome. Failed trials keep their row with
/// `error` set and no degree or error value.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub algorithm: Algorithm,
    pub big_n: usize,
    pub n_hat: usize,
    /// Pre-sample fraction; only meaningful for `hetero`.
    pub r: Option<f64>,
    pub trial: usize,
    pub seed: u64,
    pub chosen_degree: Option<usize>,
    pub sup_error: Option<f64>,
    pub samples_used: usize,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn sort_key(&self) -> (Algorithm, usize, usize) {
        (self.algorithm, self.big_n, self.trial)
    }
}

pub fn trial_seed(master: u64, alg: Algorithm, big_n: usize, trial: usize) -> u64 {
    derive_seed(master, &[alg.index(), big_n as u64, trial as u64])
}

/// Runs a single pipeline on a fresh oracle.
pub fn run_pipeline(
    alg: Algorithm,
    oracle: &mut SamplingOracle,
    big_n: usize,
    n_hat: usize,
    r: f64,
) -> chebtrunc::Result<ApproxResult> {
    match alg {
        Algorithm::Noisy => noisy_chebtrunc(oracle, big_n),
        Algorithm::WeightedKnown => weighted_chebtrunc_known(oracle, big_n, n_hat),
        Algorithm::Hetero => hetero_chebtrunc(oracle, big_n, Some(n_hat), Some(r)),
    }
}

pub fn run_trial(cfg: &ExperimentConfig, f: &TargetFn, alg: Algorithm, big_n: usize, trial: usize) -> TrialRecord {
    let seed = trial_seed(cfg.master_seed, alg, big_n, trial);
    let n_hat = cfg.n_hat_for(alg, big_n);
    let mut oracle = SamplingOracle::from_arc(f.clone(), cfg.noise, seed);
    let start = Instant::now();
    let outcome = run_pipeline(alg, &mut oracle, big_n, n_hat, cfg.r);
    let wall_time_s = start.elapsed().as_secs_f64();
    let mut rec = TrialRecord {
        algorithm: alg,
        big_n,
        n_hat,
        r: (alg == Algorithm::Hetero).then_some(cfg.r),
        trial,
        seed,
        chosen_degree: None,
        sup_error: None,
        samples_used: oracle.samples_drawn(),
        wall_time_s,
        error: None,
    };
    match outcome {
        Ok(res) => {
            rec.chosen_degree = Some(res.chosen_degree);
            rec.sup_error = Some(sup_error(|x| f(x), &res.series, cfg.sup_resolution));
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// Every `(algorithm, N, trial)` task of a config, in output order.
pub fn tasks(cfg: &ExperimentConfig) -> Vec<(Algorithm, usize, usize)> {
    let grid = cfg.n_grid.values();
    let mut out = Vec::with_capacity(cfg.algorithms.len() * grid.len() * cfg.trials);
    for &alg in &cfg.algorithms {
        for &n in &grid {
            for t in 0..cfg.trials {
                out.push((alg, n, t));
            }
        }
    }
    out
}

/// Runs the sweep on `workers` threads (all cores when `None`). Records come
/// back sorted by `(algorithm, N, trial)`, so output does not depend on the
/// worker count.
pub fn run_sweep(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let f = cfg.target.to_fn();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| HarnessError::Pool(e.to_string()))?;
    let jobs = tasks(cfg);
    // large budgets first keeps the pool busy at the tail
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(jobs[i].1));
    let mut records: Vec<TrialRecord> = pool.install(|| {
        order.par_iter().map(|&i| {
            let (alg, n, t) = jobs[i];
            run_trial(cfg, &f, alg, n, t)
        })
        .collect()
    });
    records.sort_by_key(TrialRecord::sort_key);
    Ok(records)
}
