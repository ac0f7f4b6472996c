//! Integer apportionment of a sample budget across Chebyshev nodes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationMode {
    Uniform,
    ProportionalKnownSigma,
    ProportionalEstimated,
}

impl AllocationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AllocationMode::Uniform => "uniform",
            AllocationMode::ProportionalKnownSigma => "proportional-known-sigma",
            AllocationMode::ProportionalEstimated => "proportional-estimated",
        }
    }
}

/// Sample counts `k_i` per node. `counts` always sums to `budget`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationPlan {
    pub counts: Vec<usize>,
    pub budget: usize,
    pub mode: AllocationMode,
}

impl AllocationPlan {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Proportional targets `q_i = budget * w_i / sum w`.
fn targets(weights: &[f64], budget: usize) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::EmptyInput);
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::invalid("weights", "entries must be finite and nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::AllZeroWeights);
    }
    Ok(weights.iter().map(|w| budget as f64 * (w / total)).collect())
}

/// Hamilton (largest-remainder) apportionment: floors first, then one extra
/// unit to each of the largest fractional remainders, ties to the lower index.
pub fn largest_remainder(weights: &[f64], budget: usize) -> Result<Vec<usize>> {
    let q = targets(weights, budget)?;
    let mut counts: Vec<usize> = q.iter().map(|v| v.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    // floating error can push the floor sum one over in pathological cases
    let mut order: Vec<usize> = (0..q.len()).collect();
    if assigned <= budget {
        order.sort_by(|&a, &b| frac(q[b]).total_cmp(&frac(q[a])).then(a.cmp(&b)));
        for &i in order.iter().cycle().take(budget - assigned) {
            counts[i] += 1;
        }
    } else {
        order.sort_by(|&a, &b| frac(q[a]).total_cmp(&frac(q[b])).then(b.cmp(&a)));
        let mut excess = assigned - budget;
        for &i in order.iter().cycle() {
            if excess == 0 {
                break;
            }
            if counts[i] > 0 {
                counts[i] -= 1;
                excess -= 1;
            }
        }
    }
    Ok(counts)
}

fn frac(v: f64) -> f64 {
    v - v.floor()
}

/// Marginal change of `sum |k_i - q_i|` when `k` grows by one.
fn add_cost(k: usize, q: f64) -> f64 {
    let k = k as f64;
    (k + 1.0 - q).abs() - (k - q).abs()
}

#[derive(PartialEq)]
struct Candidate {
    cost: f64,
    gap: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // max-heap: prefer low cost, then large remaining gap, then low index
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then(self.gap.total_cmp(&other.gap))
            .then(other.index.cmp(&self.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Counts proportional to `weights` with every count at least `floor`,
/// minimising `sum |k_i - q_i|` over all such integer vectors summing to
/// `budget`. Reduces to [`largest_remainder`] whenever no floor binds.
pub fn apportion_with_floor(weights: &[f64], budget: usize, floor: usize) -> Result<Vec<usize>> {
    let q = targets(weights, budget)?;
    let n = q.len();
    if budget < floor * n {
        return Err(Error::BudgetShortfall { budget, nodes: n });
    }
    let lr = largest_remainder(weights, budget)?;
    if lr.iter().all(|&k| k >= floor) {
        return Ok(lr);
    }
    let mut counts: Vec<usize> = q.iter().map(|v| (v.floor() as usize).max(floor)).collect();
    let assigned: usize = counts.iter().sum();
    if assigned <= budget {
        let mut heap: BinaryHeap<Candidate> = (0..n)
            .map(|i| Candidate { cost: add_cost(counts[i], q[i]), gap: q[i] - counts[i] as f64, index: i })
            .collect();
        for _ in 0..budget - assigned {
            let c = heap.pop().expect("heap holds one entry per node");
            let i = c.index;
            counts[i] += 1;
            heap.push(Candidate { cost: add_cost(counts[i], q[i]), gap: q[i] - counts[i] as f64, index: i });
        }
    } else {
        // Every count above the floor sits at or below its target, so each
        // removal costs exactly +1; take from the largest counts.
        let mut heap: BinaryHeap<(usize, std::cmp::Reverse<usize>)> =
            (0..n).filter(|&i| counts[i] > floor).map(|i| (counts[i], std::cmp::Reverse(i))).collect();
        for _ in 0..assigned - budget {
            let (k, std::cmp::Reverse(i)) = heap.pop().expect("enough removable units");
            counts[i] = k - 1;
            if counts[i] > floor {
                heap.push((counts[i], std::cmp::Reverse(i)));
            }
        }
    }
    Ok(counts)
}

/// Known-sigma allocation: `k_i` proportional to `sigma_i^2`, every `k_i >= 1`,
/// `sum k_i = budget`.
pub fn allocate_known_sigma(sigma_vec: &[f64], budget: usize) -> Result<AllocationPlan> {
    if sigma_vec.is_empty() {
        return Err(Error::EmptyInput);
    }
    if budget < sigma_vec.len() {
        return Err(Error::BudgetShortfall { budget, nodes: sigma_vec.len() });
    }
    let weights: Vec<f64> = sigma_vec.iter().map(|s| s * s).collect();
    let counts = apportion_with_floor(&weights, budget, 1)?;
    Ok(AllocationPlan { counts, budget, mode: AllocationMode::ProportionalKnownSigma })
}

/// Equal split of `budget` over `nodes`, the remainder going to the lowest indices.
pub fn allocate_uniform(nodes: usize, budget: usize) -> AllocationPlan {
    let base = budget / nodes;
    let extra = budget % nodes;
    let counts = (0..nodes).map(|i| base + usize::from(i < extra)).collect();
    AllocationPlan { counts, budget, mode: AllocationMode::Uniform }
}
