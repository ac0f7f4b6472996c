//! Named experiment setups. Desk scale uses 40 log-spaced budgets and 50
//! trials; full scale uses 200 budgets and the original trial counts.

use chebtrunc::{NamedSigma, NoiseField, Target};

use crate::config::{Algorithm, ExperimentConfig, NGrid, NHatRule};

pub const PRESETS: [(&str, &str); 9] = [
    ("homoskedastic", "constant sigma = 0.1, NoisyChebtrunc only"),
    ("burst", "sigma = 1 on [0, 0.1], all three algorithms"),
    ("redistribution", "sigma = 1 on [0, 1], noisy vs weighted_known"),
    ("step-3sqrt", "sigma = 1 on [0, 1], N up to 1e5, N_hat = 3 sqrt(N)"),
    ("edge-3sqrt", "sigma = 10 on [0.9, 1], N up to 1e5, N_hat = 3 sqrt(N)"),
    ("threeway-sin3", "sigma = |sin(3x) + 1e-5|, all three algorithms"),
    ("threeway-step", "sigma = 1 on [0, 1], all three algorithms"),
    ("threeway-edge", "sigma = 10 on [0.9, 1], all three algorithms"),
    ("presample", "sigma = 10 on [0, 1], N in [1e3, 1e6], 100 trials (500 at full scale)"),
];

fn grid(min: usize, max: usize, full: bool) -> NGrid {
    NGrid::LogSpaced { min, max, count: if full { 200 } else { 40 } }
}

pub fn preset(name: &str, full_scale: bool) -> Option<ExperimentConfig> {
    let step = NoiseField::indicator(1.0, 1e-5, 0.0, 1.0);
    let edge = NoiseField::indicator(10.0, 1e-5, 0.9, 1.0);
    let mut cfg = ExperimentConfig::new(Target::Runge, step);
    cfg.n_grid = grid(100, 1_000_000, full_scale);
    match name {
        "homoskedastic" => {
            cfg.noise = NoiseField::constant(0.1);
            cfg.algorithms = vec![Algorithm::Noisy];
        }
        "burst" => {
            cfg.noise = NoiseField::indicator(1.0, 1e-5, 0.0, 0.1);
        }
        "redistribution" => {
            cfg.algorithms = vec![Algorithm::Noisy, Algorithm::WeightedKnown];
        }
        "step-3sqrt" | "edge-3sqrt" => {
            if name == "edge-3sqrt" {
                cfg.noise = edge;
            }
            cfg.algorithms = vec![Algorithm::Noisy, Algorithm::WeightedKnown];
            cfg.n_grid = grid(10, 100_000, full_scale);
            cfg.n_hat_rule = NHatRule::Factor(3.0);
        }
        "threeway-sin3" => cfg.noise = NoiseField::named(NamedSigma::Sin3),
        "threeway-step" => {}
        "threeway-edge" => cfg.noise = edge,
        "presample" => {
            cfg.noise = NoiseField::indicator(10.0, 1e-5, 0.0, 1.0);
            cfg.n_grid = grid(1000, 1_000_000, full_scale);
            cfg.trials = if full_scale { 500 } else { 100 };
        }
        _ => return None,
    }
    // HeteroChebtrunc needs m >= 2 pre-samples, which fails at the smallest budgets
    if cfg.algorithms.contains(&Algorithm::Hetero) {
        if let NGrid::LogSpaced { min, .. } = &mut cfg.n_grid {
            *min = (*min).max(500);
        }
    }
    Some(cfg)
}
