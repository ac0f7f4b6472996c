//! Chebyshev grids, the values/coefficients transform pair, Clenshaw
//! evaluation, truncation and sup-norm error measurement on `[-1, 1]`.
//!
//! The transform is the type-I DCT on the Chebyshev extrema grid
//! `x_j = cos(j*pi/N)`, computed through an FFT of the even extension of
//! length `2N`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

/// The `N + 1` Chebyshev extreme points of degree `N`, descending from 1 to -1.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevGrid {
    points: Vec<f64>,
}

impl ChebyshevGrid {
    pub fn new(degree: usize) -> Self {
        chebyshev_points(degree)
    }

    pub fn degree(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A polynomial `sum c_i T_i(x)` stored by its Chebyshev coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevSeries {
    coeffs: Vec<f64>,
}

impl ChebyshevSeries {
    /// Wraps a coefficient vector; an empty vector becomes the zero constant.
    pub fn new(coeffs: Vec<f64>) -> Self {
        if coeffs.is_empty() {
            return Self { coeffs: vec![0.0] };
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        evaluate(self, x)
    }

    pub fn truncate(&self, n: usize) -> Result<Self> {
        truncate(self, n)
    }
}

/// Builds the degree-`n` grid. `x_j = cos(j*pi/n)` is computed as
/// `sin(pi*(n - 2j)/(2n))`, which is exactly antisymmetric about the midpoint.
/// The degree-0 grid is the single point `x = 1`.
pub fn chebyshev_points(n: usize) -> ChebyshevGrid {
    if n == 0 {
        return ChebyshevGrid { points: vec![1.0] };
    }
    let denom = 2.0 * n as f64;
    let points = (0..=n)
        .map(|j| {
            let num = n as f64 - 2.0 * j as f64;
            (PI * num / denom).sin()
        })
        .collect();
    ChebyshevGrid { points }
}

/// Type-I DCT with halved endpoints: `out_k = v_0 + (-1)^k v_N + 2 sum_{j=1}^{N-1} v_j cos(pi j k / N)`.
fn dct1(values: &[f64]) -> Vec<f64> {
    let n = values.len() - 1;
    if n == 0 {
        return vec![2.0 * values[0]];
    }
    let len = 2 * n;
    let mut buf: Vec<Complex64> = Vec::with_capacity(len);
    buf.extend(values.iter().map(|&v| Complex64::new(v, 0.0)));
    buf.extend(values[1..n].iter().rev().map(|&v| Complex64::new(v, 0.0)));
    plan(len).process(&mut buf);
    buf.truncate(n + 1);
    buf.into_iter().map(|c| c.re).collect()
}

/// Interpolates values sampled on the degree-`N` grid (`values.len() == N + 1`)
/// and returns the Chebyshev coefficients of the interpolant.
pub fn values_to_coeffs(values: &[f64]) -> Result<ChebyshevSeries> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = values.len() - 1;
    if n == 0 {
        return Ok(ChebyshevSeries::new(vec![values[0]]));
    }
    let scale = 1.0 / n as f64;
    let mut coeffs: Vec<f64> = dct1(values).into_iter().map(|v| v * scale).collect();
    coeffs[0] *= 0.5;
    coeffs[n] *= 0.5;
    Ok(ChebyshevSeries::new(coeffs))
}

/// Evaluates a series on every point of `grid`. The series is zero-padded to
/// the grid degree, so the cost is one transform of the grid size.
pub fn coeffs_to_values(series: &ChebyshevSeries, grid: &ChebyshevGrid) -> Result<Vec<f64>> {
    let m = grid.degree();
    if m < series.degree() {
        return Err(Error::GridTooSmall { grid: m, series: series.degree() });
    }
    if m == 0 {
        return Ok(vec![series.coeffs[0]]);
    }
    let mut padded = vec![0.0; m + 1];
    padded[..series.coeffs.len()].copy_from_slice(&series.coeffs);
    padded[0] *= 2.0;
    padded[m] *= 2.0;
    Ok(dct1(&padded).into_iter().map(|v| 0.5 * v).collect())
}

/// Clenshaw recurrence for `sum c_i T_i(x)`.
pub fn evaluate(series: &ChebyshevSeries, x: f64) -> f64 {
    let c = &series.coeffs;
    let two_x = 2.0 * x;
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c[1..].iter().rev() {
        let b0 = ck + two_x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c[0] + x * b1 - b2
}

/// Keeps `coeffs[0..=n]` unchanged.
pub fn truncate(series: &ChebyshevSeries, n: usize) -> Result<ChebyshevSeries> {
    if n > series.degree() {
        return Err(Error::TruncationDegree { requested: n, degree: series.degree() });
    }
    Ok(ChebyshevSeries::new(series.coeffs[..=n].to_vec()))
}

/// Upper bound `(2/pi) ln(N + 1) + 1` on the Lebesgue constant of the degree-`N` grid.
pub fn lebesgue_log_bound(n: usize) -> f64 {
    2.0 / PI * ((n + 1) as f64).ln() + 1.0
}

/// Default dense-grid size for [`sup_error`]: `10 * max(degree, 100)`.
pub fn default_resolution(series_degree: usize) -> usize {
    10 * series_degree.max(100)
}

/// Max of `|f(x) - p(x)|` over a Chebyshev grid with `resolution` points.
/// Under-estimates the true sup norm and converges as `resolution` grows.
pub fn sup_error<F>(f: F, series: &ChebyshevSeries, resolution: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let grid = chebyshev_points(resolution.max(2) - 1);
    grid.points()
        .iter()
        .map(|&x| (f(x) - evaluate(series, x)).abs())
        .fold(0.0, f64::max)
}
