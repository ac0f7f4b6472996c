//! Grouped summaries of trial records.
//!
//! Quantiles use linear interpolation between order statistics at position
//! `h = (n - 1) p` (Hyndman and Fan type 7), so `[1, 2, 3, 4]` gives 1.075 at
//! 2.5% and 3.925 at 97.5%.

use std::collections::BTreeMap;

use crate::config::Algorithm;
use crate::error::{HarnessError, Result};
use crate::sweep::TrialRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKey {
    Algorithm,
    BigN,
    NHat,
}

/// Values of the group-by keys for one summary row; unused keys are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Group {
    pub algorithm: Option<Algorithm>,
    pub big_n: Option<usize>,
    pub n_hat: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub group: Group,
    /// Records in the group, failed ones included.
    pub count: usize,
    pub failures: usize,
    pub mean_error: f64,
    pub q025_error: f64,
    pub q975_error: f64,
    pub mean_degree: f64,
    pub mean_time_s: f64,
    pub median_time_s: f64,
}

/// Type-7 quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

fn group_of(rec: &TrialRecord, keys: &[GroupKey]) -> Group {
    Group {
        algorithm: keys.contains(&GroupKey::Algorithm).then_some(rec.algorithm),
        big_n: keys.contains(&GroupKey::BigN).then_some(rec.big_n),
        n_hat: keys.contains(&GroupKey::NHat).then_some(rec.n_hat),
    }
}

/// One row per distinct group. Error statistics use successful trials only;
/// a group whose trials all failed is rejected.
pub fn summarize(records: &[TrialRecord], keys: &[GroupKey]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(HarnessError::EmptyGroup);
    }
    let mut groups: BTreeMap<Group, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(group_of(r, keys)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(group, recs)| {
            let ok: Vec<&TrialRecord> = recs.iter().copied().filter(|r| r.error.is_none()).collect();
            if ok.is_empty() {
                return Err(HarnessError::EmptyGroup);
            }
            let mut errors: Vec<f64> = ok.iter().filter_map(|r| r.sup_error).collect();
            errors.sort_by(f64::total_cmp);
            let n = errors.len() as f64;
            let times: Vec<f64> = recs.iter().map(|r| r.wall_time_s).collect();
            Ok(SummaryRow {
                group,
                count: recs.len(),
                failures: recs.len() - ok.len(),
                mean_error: errors.iter().sum::<f64>() / n,
                q025_error: quantile_sorted(&errors, 0.025),
                q975_error: quantile_sorted(&errors, 0.975),
                mean_degree: ok.iter().filter_map(|r| r.chosen_degree).sum::<usize>() as f64 / ok.len() as f64,
                mean_time_s: times.iter().sum::<f64>() / times.len() as f64,
                median_time_s: median(&times),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(alg: Algorithm, n: usize, trial: usize, err: f64) -> TrialRecord {
        TrialRecord {
            algorithm: alg,
            big_n: n,
            n_hat: n,
            r: None,
            trial,
            seed: 0,
            chosen_degree: Some(3),
            sup_error: Some(err),
            samples_used: n + 1,
            wall_time_s: err,
            error: None,
        }
    }

    #[test]
    fn quantiles_of_four() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert!((quantile_sorted(&v, 0.025) - 1.075).abs() < 1e-12);
        assert!((quantile_sorted(&v, 0.975) - 3.925).abs() < 1e-12);
        let recs: Vec<TrialRecord> = v.iter().enumerate().map(|(i, &e)| rec(Algorithm::Noisy, 100, i, e)).collect();
        let rows = summarize(&recs, &[GroupKey::Algorithm, GroupKey::BigN]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mean_error, 2.5);
        assert_eq!(rows[0].median_time_s, 2.5);
    }

    #[test]
    fn single_record() {
        let rows = summarize(&[rec(Algorithm::Hetero, 10, 0, 0.3)], &[GroupKey::BigN]).unwrap();
        assert_eq!((rows[0].mean_error, rows[0].q025_error, rows[0].q975_error), (0.3, 0.3, 0.3));
    }

    #[test]
    fn partition_complete() {
        let mut recs = Vec::new();
        for (i, alg) in Algorithm::ALL.iter().enumerate() {
            for n in [100, 200] {
                for t in 0..(i + 2) {
                    recs.push(rec(*alg, n, t, 0.1 * t as f64));
                }
            }
        }
        for keys in [&[GroupKey::Algorithm][..], &[GroupKey::BigN], &[GroupKey::Algorithm, GroupKey::BigN], &[]] {
            let rows = summarize(&recs, keys).unwrap();
            assert_eq!(rows.iter().map(|r| r.count).sum::<usize>(), recs.len());
        }
    }

    #[test]
    fn failed_groups_and_empty_input() {
        assert!(summarize(&[], &[GroupKey::BigN]).is_err());
        let mut r = rec(Algorithm::Noisy, 10, 0, 1.0);
        r.error = Some("boom".into());
        r.sup_error = None;
        assert!(summarize(&[r.clone()], &[GroupKey::BigN]).is_err());
        let rows = summarize(&[r, rec(Algorithm::Noisy, 10, 1, 2.0)], &[GroupKey::BigN]).unwrap();
        assert_eq!((rows[0].count, rows[0].failures, rows[0].mean_error), (2, 1, 2.0));
    }
}
