use chebtrunc::allocation::{apportion_with_floor, largest_remainder};
use chebtrunc::{allocate_known_sigma, allocate_uniform, AllocationMode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn l1(counts: &[usize], q: &[f64]) -> f64 {
    counts.iter().zip(q).map(|(&k, &t)| (k as f64 - t).abs()).sum()
}

fn targets(w: &[f64], budget: usize) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|x| budget as f64 * x / s).collect()
}

/// Minimum of sum |k_i - q_i| over every integer vector with k_i >= floor and sum = budget,
/// by enumeration. Branches that cannot beat `bound` are pruned, so the result is
/// `min(bound, true minimum)`.
fn brute_min(q: &[f64], budget: usize, floor: usize, bound: f64) -> f64 {
    fn go(q: &[f64], left: usize, floor: usize, acc: f64, best: &mut f64) {
        if q.len() == 1 {
            if left >= floor {
                *best = best.min(acc + (left as f64 - q[0]).abs());
            }
            return;
        }
        let reserve = floor * (q.len() - 1);
        if left < reserve + floor {
            return;
        }
        for k in floor..=left - reserve {
            let a = acc + (k as f64 - q[0]).abs();
            if a < *best {
                go(&q[1..], left - k, floor, a, best);
            }
        }
    }
    let mut best = bound;
    go(q, budget, floor, 0.0, &mut best);
    best
}

fn random_sigma(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| match rng.random_range(0..4) {
            0 => 1e-5,
            1 => 0.0,
            _ => rng.random_range(0.0..3.0),
        })
        .collect()
}

#[test]
fn exhaustive_optimality_small_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for nodes in 1..=7usize {
        for budget in nodes..=50 {
            for _ in 0..3 {
                let mut sigma = random_sigma(&mut rng, nodes);
                if sigma.iter().all(|&s| s == 0.0) {
                    sigma[0] = 1.0;
                }
                let w: Vec<f64> = sigma.iter().map(|s| s * s).collect();
                let q = targets(&w, budget);
                let plan = allocate_known_sigma(&sigma, budget).unwrap();
                let got = l1(&plan.counts, &q);
                assert!(brute_min(&q, budget, 1, got) >= got - 1e-9, "{sigma:?} {budget}");
                let lr = largest_remainder(&w, budget).unwrap();
                let got = l1(&lr, &q);
                assert!(brute_min(&q, budget, 0, got) >= got - 1e-9);
                checked += 1;
            }
        }
    }
    assert!(checked > 900);
}

#[test]
fn floored_apportionment_matches_brute_force_with_larger_floors() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..400 {
        let nodes = rng.random_range(1..=5);
        let floor = rng.random_range(0..=4);
        let budget = rng.random_range(floor * nodes..=40.max(floor * nodes));
        let mut w: Vec<f64> = (0..nodes).map(|_| rng.random_range(0.0..2.0)).collect();
        w[0] += 0.1;
        let q = targets(&w, budget);
        let k = apportion_with_floor(&w, budget, floor).unwrap();
        assert_eq!(k.iter().sum::<usize>(), budget);
        assert!(k.iter().all(|&x| x >= floor));
        let got = l1(&k, &q);
        assert!(brute_min(&q, budget, floor, got) >= got - 1e-9);
    }
}

#[test]
fn uniform_is_balanced() {
    let p = allocate_uniform(7, 100);
    assert_eq!(p.mode, AllocationMode::Uniform);
    assert_eq!(p.total(), 100);
    assert!(p.counts.iter().max().unwrap() - p.counts.iter().min().unwrap() <= 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn known_sigma_invariants(
        sigma in prop::collection::vec(prop_oneof![Just(0.0), Just(1e-5), 0.0f64..5.0], 1..=129),
        extra in 0usize..10_000,
    ) {
        prop_assume!(sigma.iter().any(|&s| s > 0.0));
        let budget = (sigma.len() + extra).min(10_000);
        let plan = allocate_known_sigma(&sigma, budget).unwrap();
        prop_assert_eq!(plan.total(), budget);
        prop_assert_eq!(plan.counts.len(), sigma.len());
        prop_assert!(plan.counts.iter().all(|&k| k >= 1));
        for i in 0..sigma.len() {
            for j in 0..sigma.len() {
                if sigma[i] > sigma[j] {
                    prop_assert!(plan.counts[i] + 1 >= plan.counts[j]);
                }
            }
        }
    }

    #[test]
    fn largest_remainder_within_one(w in prop::collection::vec(0.0f64..10.0, 1..=129), budget in 0usize..10_000) {
        prop_assume!(w.iter().sum::<f64>() > 0.0);
        let k = largest_remainder(&w, budget).unwrap();
        prop_assert_eq!(k.iter().sum::<usize>(), budget);
        for (k, t) in k.iter().zip(targets(&w, budget)) {
            prop_assert!((*k as f64 - t).abs() < 1.0 + 1e-9);
        }
    }
}
