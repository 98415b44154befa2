//! Small descriptive statistics and the paired bootstrap used to compare
//! models.

use serde::{Deserialize, Serialize};

use crate::rng::RngStream;

/// Median of `values` (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Linear-interpolation quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Point estimate with a percentile confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

/// Paired bootstrap over `n` units: every replicate draws one index vector
/// and hands it to `statistic`. Returns the statistic on the original
/// sample together with the central `level` percentile interval of the
/// replicates.
pub fn bootstrap<F>(
    n: usize,
    resamples: usize,
    level: f64,
    rng: &mut RngStream,
    mut statistic: F,
) -> Interval
where
    F: FnMut(&[usize]) -> f64,
{
    let identity: Vec<usize> = (0..n).collect();
    let estimate = statistic(&identity);
    let mut replicates = Vec::with_capacity(resamples);
    let mut idx = vec![0usize; n];
    for _ in 0..resamples {
        for slot in idx.iter_mut() {
            *slot = rng.next_below(n as u64) as usize;
        }
        replicates.push(statistic(&idx));
    }
    replicates.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Interval {
        estimate,
        low: quantile_sorted(&replicates, tail),
        high: quantile_sorted(&replicates, 1.0 - tail),
    }
}
