//! Wall-time scaling study of NoisyChebtrunc against HeteroChebtrunc.

use std::time::Instant;

use chebtrunc::{NoiseField, SamplingOracle, Target};

use crate::config::Algorithm;
use crate::error::Result;
use crate::summary::median;
use crate::sweep::{run_pipeline, trial_seed};

pub const BENCH_ALGORITHMS: [Algorithm; 2] = [Algorithm::Noisy, Algorithm::Hetero];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRecord {
    pub algorithm: Algorithm,
    pub big_n: usize,
    pub trial: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchMedian {
    pub algorithm: Algorithm,
    pub big_n: usize,
    pub median_s: f64,
}

/// Least-squares `y = a x + b` with relative residual `||y - fit||_2 / ||y||_2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub a: f64,
    pub b: f64,
    pub relative_residual: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let b = my - a * mx;
    let res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - (a * x + b)).powi(2)).sum();
    let norm: f64 = ys.iter().map(|y| y * y).sum();
    LinearFit { a, b, relative_residual: (res / norm).sqrt() }
}

/// Times each pipeline serially on fresh oracles, with `N_hat = floor(sqrt N)`
/// and `r = 0.1` for HeteroChebtrunc. The sup-error evaluation is not timed.
pub fn runtime_study(
    target: &Target,
    noise: NoiseField,
    grid: &[usize],
    trials: usize,
    master_seed: u64,
) -> Result<Vec<BenchRecord>> {
    let f = target.to_fn();
    let mut out = Vec::with_capacity(grid.len() * trials * BENCH_ALGORITHMS.len());
    for &big_n in grid {
        for trial in 0..trials {
            for alg in BENCH_ALGORITHMS {
                let mut oracle = SamplingOracle::from_arc(f.clone(), noise, trial_seed(master_seed, alg, big_n, trial));
                let n_hat = match alg {
                    Algorithm::Noisy => big_n,
                    _ => (big_n as f64).sqrt() as usize,
                };
                let start = Instant::now();
                let res = run_pipeline(alg, &mut oracle, big_n, n_hat, crate::config::DEFAULT_R)?;
                let seconds = start.elapsed().as_secs_f64();
                std::hint::black_box(res);
                out.push(BenchRecord { algorithm: alg, big_n, trial, seconds });
            }
        }
    }
    Ok(out)
}

/// Median wall time per `(algorithm, N)`, sorted by algorithm then `N`.
pub fn medians(records: &[BenchRecord]) -> Vec<BenchMedian> {
    let mut keys: Vec<(Algorithm, usize)> = records.iter().map(|r| (r.algorithm, r.big_n)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(algorithm, big_n)| {
            let t: Vec<f64> =
                records.iter().filter(|r| r.algorithm == algorithm && r.big_n == big_n).map(|r| r.seconds).collect();
            BenchMedian { algorithm, big_n, median_s: median(&t) }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 10.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let fit = linear_fit(&xs, &ys);
        assert!((fit.a - 2.0).abs() < 1e-12 && (fit.b - 1.0).abs() < 1e-12);
        assert!(fit.relative_residual < 1e-12);
    }

    #[test]
    fn medians_per_group() {
        let recs: Vec<BenchRecord> = [3.0, 1.0, 2.0]
            .iter()
            .enumerate()
            .map(|(i, &s)| BenchRecord { algorithm: Algorithm::Hetero, big_n: 100, trial: i, seconds: s })
            .collect();
        assert_eq!(medians(&recs), vec![BenchMedian { algorithm: Algorithm::Hetero, big_n: 100, median_s: 2.0 }]);
    }
}
