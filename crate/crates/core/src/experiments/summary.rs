//! Box-plot statistics.
//!
//! Quantiles use linear interpolation between order statistics: for sorted
//! values `x_0..x_{n-1}` the `p`-quantile is read at position `h = (n-1)p`.
//! Whiskers reach the most extreme values inside
//! `[Q1 - 1.5·IQR, Q3 + 1.5·IQR]`; anything beyond is an outlier.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::experiments::{AccuracyRow, CellKey};
use crate::walks::mean_std;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    #[serde(flatten)]
    pub key: CellKey,
    pub failed_runs: usize,
    pub stats: Option<BoxStats>,
}

/// Linear-interpolation quantile of sorted values.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of no values");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn box_stats(values: &[f64]) -> Option<BoxStats> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mean, std) = mean_std(values);
    let q1 = quantile(&sorted, 0.25);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (low_fence, high_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = || {
        sorted
            .iter()
            .copied()
            .filter(|&x| x >= low_fence && x <= high_fence)
    };
    Some(BoxStats {
        count: values.len(),
        mean,
        std,
        min: sorted[0],
        q1,
        median: quantile(&sorted, 0.5),
        q3,
        max: sorted[sorted.len() - 1],
        whisker_low: inside().fold(f64::INFINITY, f64::min),
        whisker_high: inside().fold(f64::NEG_INFINITY, f64::max),
        outliers: sorted
            .iter()
            .copied()
            .filter(|&x| x < low_fence || x > high_fence)
            .collect(),
    })
}

/// Groups accuracy rows by cell, in first-appearance order of the rows.
pub fn summarize(rows: &[AccuracyRow]) -> Vec<CellSummary> {
    let mut order: Vec<CellKey> = Vec::new();
    let mut groups: BTreeMap<CellKey, (Vec<f64>, usize)> = BTreeMap::new();
    for row in rows {
        let key = row.key();
        let entry = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (Vec::new(), 0)
        });
        match row.test_accuracy {
            Some(acc) => entry.0.push(acc),
            None => entry.1 += 1,
        }
    }
    order
        .into_iter()
        .map(|key| {
            let (values, failed_runs) = &groups[&key];
            CellSummary {
                stats: box_stats(values),
                failed_runs: *failed_runs,
                key,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.75), 3.25);
        assert_eq!(quantile(&[7.0], 0.3), 7.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
    }

    #[test]
    fn outliers_and_whiskers() {
        let values = [0.5, 0.52, 0.51, 0.53, 0.1, 0.54, 0.95];
        let b = box_stats(&values).unwrap();
        assert_eq!(b.outliers, vec![0.1, 0.95]);
        assert_eq!((b.whisker_low, b.whisker_high), (0.5, 0.54));
        assert_eq!(b.median, 0.52);
        assert!(box_stats(&[]).is_none());
    }
}
