//! Tabulation of the concentration-bound evaluators.

use std::fmt;
use std::str::FromStr;

use chebtrunc::stats::{
    dependent_bound, hetero_thm_prob, lemma1_params, prop1_bound, subexp_tail, thm1_prob, thm2_prob, BoundInputs,
};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Lemma1,
    Prop1,
    Thm1,
    Thm2,
    Hetero,
    Dependent,
}

impl BoundKind {
    pub fn tag(self) -> &'static str {
        match self {
            BoundKind::Lemma1 => "lemma1",
            BoundKind::Prop1 => "prop1",
            BoundKind::Thm1 => "thm1",
            BoundKind::Thm2 => "thm2",
            BoundKind::Hetero => "hetero",
            BoundKind::Dependent => "dependent",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for BoundKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lemma1" => BoundKind::Lemma1,
            "prop1" => BoundKind::Prop1,
            "thm1" => BoundKind::Thm1,
            "thm2" => BoundKind::Thm2,
            "hetero" => BoundKind::Hetero,
            "dependent" => BoundKind::Dependent,
            other => return Err(HarnessError::config(format!("unknown bound kind `{other}`"))),
        })
    }
}

/// Parameters for every bound kind; each kind reads the fields it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    /// Subgaussian parameter for `lemma1`.
    pub sigma: f64,
    pub m: usize,
    pub s: f64,
    pub r: f64,
    pub sigma_vec: Vec<f64>,
    pub big_n: usize,
    pub n_hat: usize,
    pub n: usize,
    pub r_n_inf: f64,
    pub q_inf: f64,
    /// Defaults to `sigma_vec` when empty.
    pub nu_vec: Vec<f64>,
    /// Defaults to `max(nu_vec)` when `None`.
    pub alpha: Option<f64>,
    pub t_star: Option<f64>,
    /// Swept variable: `t` for most kinds, `s` for `prop1`.
    pub grid: Vec<f64>,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            m: 100,
            s: 0.5,
            r: 0.1,
            sigma_vec: vec![1.0; 5],
            big_n: 10_000,
            n_hat: 4,
            n: 2,
            r_n_inf: 0.0,
            q_inf: 0.0,
            nu_vec: Vec::new(),
            alpha: None,
            t_star: None,
            grid: (0..=40).map(|i| i as f64 * 0.1).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub t: f64,
    pub threshold: f64,
    pub probability_raw: f64,
    pub probability_clamped: f64,
}

impl BoundRow {
    fn new(t: f64, threshold: f64, tail: chebtrunc::stats::Tail) -> Self {
        Self { t, threshold, probability_raw: tail.raw(), probability_clamped: tail.clamped() }
    }
}

fn inputs(p: &BoundParams, t: f64) -> BoundInputs {
    BoundInputs {
        sigma_vec: p.sigma_vec.clone(),
        big_n: p.big_n,
        n_hat: p.n_hat,
        n: p.n,
        r: p.r,
        s: p.s,
        r_n_inf: p.r_n_inf,
        t,
    }
}

pub fn bound_table(kind: BoundKind, p: &BoundParams) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::with_capacity(p.grid.len());
    for &t in &p.grid {
        if !(t >= 0.0) {
            return Err(HarnessError::config(format!("grid value {t} must be nonnegative")));
        }
        let row = match kind {
            BoundKind::Lemma1 => BoundRow::new(t, t, subexp_tail(t, &lemma1_params(p.sigma, p.m)?)),
            BoundKind::Prop1 => BoundRow::new(t, t, prop1_bound(t, &p.sigma_vec, p.m)?),
            BoundKind::Thm1 => {
                let b = thm1_prob(&inputs(p, t))?;
                BoundRow::new(t, b.threshold, b.probability)
            }
            BoundKind::Thm2 => {
                let nu = if p.nu_vec.is_empty() { &p.sigma_vec } else { &p.nu_vec };
                let alpha = p.alpha.unwrap_or_else(|| nu.iter().copied().fold(0.0, f64::max));
                let b = thm2_prob(&inputs(p, t), nu, alpha, p.t_star)?;
                BoundRow::new(t, b.threshold, b.probability)
            }
            BoundKind::Hetero => {
                let b = hetero_thm_prob(&inputs(p, t))?;
                BoundRow::new(t, b.threshold, b.probability)
            }
            BoundKind::Dependent => {
                let b = dependent_bound(p.n_hat, p.big_n, &p.sigma_vec, p.q_inf, t)?;
                BoundRow::new(t, b.threshold, b.probability)
            }
        };
        rows.push(row);
    }
    Ok(rows)
}
