//! Probability algebra on circular length-`N` arrays.
//!
//! Beliefs live in log space, constrained to `[-10, 0]`, and are turned into
//! probability distributions with a softmax. Generative densities are kept in
//! plain space and floored at `e^-10`, which bounds the dynamic range enough
//! that no log-space arithmetic is needed.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lower edge of the belief range.
pub const BELIEF_MIN: f64 = -10.0;
/// Upper edge of the belief range.
pub const BELIEF_MAX: f64 = 0.0;
/// `e^-10`, the smallest value a generative density may take.
pub const DENSITY_FLOOR: f64 = 4.539_992_976_248_485_4e-5;

const NORMALIZATION_TOL: f64 = 1e-9;

/// Log-space belief over the `N` cells of the world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BeliefVector(Vec<f64>);

impl BeliefVector {
    /// Wraps `values`, clipping every entry into `[-10, 0]`.
    pub fn new(values: Vec<f64>) -> Self {
        let mut b = BeliefVector(values);
        b.clip();
        b
    }

    /// The flat belief, which encodes the uniform distribution.
    pub fn zeros(n: usize) -> Self {
        BeliefVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Softmax of the belief, without any size check.
    pub fn distribution(&self) -> ProbDist {
        ProbDist(softmax(&self.0))
    }

    /// Moves the maximum to zero, then clips the tail at the bottom of the
    /// range. The softmax is unaffected by the shift.
    pub(crate) fn from_unconstrained(mut values: Vec<f64>) -> Self {
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max.is_finite() {
            for v in &mut values {
                *v -= max;
            }
        }
        BeliefVector::new(values)
    }

    fn clip(&mut self) {
        for v in &mut self.0 {
            *v = v.clamp(BELIEF_MIN, BELIEF_MAX);
        }
    }
}

/// A probability mass function over the `N` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbDist(Vec<f64>);

impl ProbDist {
    /// Validates non-negativity and unit mass (absolute tolerance `1e-9`).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("empty distribution".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Domain(format!("invalid probability entry {v}")));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Domain(format!(
                "distribution sums to {total}, not 1"
            )));
        }
        Ok(ProbDist(values))
    }

    /// Normalizes non-negative weights with positive total mass.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || total <= 0.0 || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::Domain(format!(
                "cannot normalize weights with total {total}"
            )));
        }
        Ok(ProbDist(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        ProbDist(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub(crate) fn from_normalized_unchecked(values: Vec<f64>) -> Self {
        ProbDist(values)
    }
}

/// Positive, not necessarily normalized, density over the cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnnormalizedDensity(Vec<f64>);

impl UnnormalizedDensity {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Wraps raw values without clamping. Entries must be positive to be
    /// usable as a KL target.
    pub fn from_raw(values: Vec<f64>) -> Self {
        UnnormalizedDensity(values)
    }

    /// True when at least one entry sits on the `e^-10` floor.
    pub fn touches_floor(&self) -> bool {
        self.0.iter().any(|v| *v <= DENSITY_FLOOR)
    }
}

/// Min-shifted softmax. The shift cancels in the normalization.
pub(crate) fn softmax(b: &[f64]) -> Vec<f64> {
    let min = b.iter().copied().fold(f64::INFINITY, f64::min);
    let mut out: Vec<f64> = b.iter().map(|v| (v - min).exp()).collect();
    let total: f64 = out.iter().sum();
    for v in &mut out {
        *v /= total;
    }
    out
}

/// Converts a belief into the distribution it encodes, checking its length
/// against the configured world size.
pub fn to_distribution(b: &BeliefVector, n: usize) -> Result<ProbDist> {
    if b.len() != n {
        return Err(Error::Config(format!(
            "belief has {} entries, world has {n} cells",
            b.len()
        )));
    }
    Ok(b.distribution())
}

/// `ln q + K`, with `K` putting the largest entry at zero; entries below the
/// belief range are clipped to `-10`.
pub fn from_distribution(q: &ProbDist) -> Result<BeliefVector> {
    if let Some(i) = q.0.iter().position(|v| *v <= 0.0) {
        return Err(Error::Domain(format!(
            "log of zero probability at cell {i}"
        )));
    }
    let logs: Vec<f64> = q.0.iter().map(|v| v.ln()).collect();
    Ok(BeliefVector::from_unconstrained(logs))
}

/// `a q + (1 - a) / N`: mixes `q` with the uniform distribution.
pub fn rerange(q: &ProbDist, a: f64) -> Result<ProbDist> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::Parameter(format!(
            "re-ranging weight {a} outside [0, 1]"
        )));
    }
    Ok(ProbDist(rerange_slice(&q.0, a)))
}

pub(crate) fn rerange_slice(q: &[f64], a: f64) -> Vec<f64> {
    let base = (1.0 - a) / q.len() as f64;
    q.iter().map(|v| a * v + base).collect()
}

/// `out[i] = v[(i + x) mod N]`.
pub fn circular_shift<T: Copy>(v: &[T], x: i64) -> Vec<T> {
    let n = v.len();
    if n == 0 {
        return Vec::new();
    }
    let offset = x.rem_euclid(n as i64) as usize;
    (0..n).map(|i| v[(i + offset) % n]).collect()
}

/// `sum_i q_i ln(q_i / r_i)` with `0 ln 0 = 0`.
pub fn kl_divergence(q: &ProbDist, r: &UnnormalizedDensity) -> Result<f64> {
    if q.len() != r.len() {
        return Err(Error::Config(format!(
            "KL operands differ in length ({} vs {})",
            q.len(),
            r.len()
        )));
    }
    if let Some(i) = r.0.iter().position(|v| v.is_nan() || *v <= 0.0) {
        return Err(Error::Domain(format!("non-positive density at cell {i}")));
    }
    Ok(kl(&q.0, &r.0))
}

pub(crate) fn kl(q: &[f64], r: &[f64]) -> f64 {
    q.iter()
        .zip(r)
        .filter(|(qi, _)| **qi > 0.0)
        .map(|(qi, ri)| qi * (qi / ri).ln())
        .sum()
}

/// Maps each entry into `[e^-10, 1]`.
pub fn clamp_floor(r: &[f64]) -> UnnormalizedDensity {
    UnnormalizedDensity(r.iter().map(|v| v.clamp(DENSITY_FLOOR, 1.0)).collect())
}

/// Shortest distance between two cells on a ring of `n` cells.
pub fn circular_distance(x: usize, y: usize, n: usize) -> usize {
    let d = x.abs_diff(y) % n;
    d.min(n - d)
}

/// Gaussian profile in circular distance from `center`, normalized.
pub fn discretized_gaussian(center: usize, sigma: f64, n: usize) -> Result<ProbDist> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::Parameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if n == 0 {
        return Err(Error::Config("empty world".into()));
    }
    let two_var = 2.0 * sigma * sigma;
    let weights = (0..n)
        .map(|i| {
            let d = circular_distance(i, center % n, n) as f64;
            (-d * d / two_var).exp()
        })
        .collect();
    ProbDist::from_weights(weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn flat_belief_is_uniform() {
        let q = to_distribution(&BeliefVector::zeros(60), 60).unwrap();
        assert!(q.as_slice().iter().all(|v| close(*v, 1.0 / 60.0, 1e-15)));
    }

    #[test]
    fn two_cell_softmax_matches_closed_form() {
        let q = to_distribution(&BeliefVector::new(vec![-10.0, 0.0]), 2).unwrap();
        let e10 = 10f64.exp();
        assert!(close(q.as_slice()[0], 1.0 / (1.0 + e10), 1e-15));
        assert!(close(q.as_slice()[1], e10 / (1.0 + e10), 1e-15));
        assert!(close(q.as_slice()[0], 4.5398e-5, 1e-9));
    }

    #[test]
    fn length_mismatch_is_config_error() {
        let err = to_distribution(&BeliefVector::zeros(5), 6).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn inverse_of_two_cell_example() {
        let q = ProbDist::from_weights(vec![0.999_954_602_131_297_5, 4.539_786_870_243_442e-5])
            .unwrap();
        let b = from_distribution(&q).unwrap();
        assert_eq!(b.as_slice()[0], 0.0);
        assert!(close(b.as_slice()[1], -10.0, 1e-9));
    }

    #[test]
    fn uniform_maps_to_zero_belief() {
        let b = from_distribution(&ProbDist::uniform(60)).unwrap();
        assert!(b.as_slice().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn zero_probability_has_no_log() {
        let q = ProbDist::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(from_distribution(&q), Err(Error::Domain(_))));
    }

    #[test]
    fn rerange_endpoints_and_midpoint() {
        let q = ProbDist::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(rerange(&q, 1.0).unwrap(), q);
        assert_eq!(rerange(&q, 0.0).unwrap().as_slice(), &[0.5, 0.5]);
        assert_eq!(rerange(&q, 0.5).unwrap().as_slice(), &[0.75, 0.25]);
        assert!(matches!(rerange(&q, 1.5), Err(Error::Parameter(_))));
        assert!(matches!(rerange(&q, -0.1), Err(Error::Parameter(_))));
    }

    #[test]
    fn shift_identities() {
        let v = ['a', 'b', 'c'];
        assert_eq!(circular_shift(&v, 0), v);
        assert_eq!(circular_shift(&v, 3), v);
        assert_eq!(circular_shift(&v, 1), ['b', 'c', 'a']);
        assert_eq!(circular_shift(&v, -1), ['c', 'a', 'b']);
    }

    #[test]
    fn kl_examples() {
        let q = ProbDist::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(
            kl_divergence(&q, &UnnormalizedDensity::from_raw(vec![0.5, 0.5])).unwrap(),
            0.0
        );
        let r = UnnormalizedDensity::from_raw(vec![0.75, 0.25]);
        let expected = 0.5 * (4.0f64 / 3.0).ln();
        assert!(close(kl_divergence(&q, &r).unwrap(), expected, 1e-15));
        assert!(close(expected, 0.14384, 1e-5));

        let n = 60;
        let u = ProbDist::uniform(n);
        let r = UnnormalizedDensity::from_raw(vec![1.0 / (n * n) as f64; n]);
        assert!(close(
            kl_divergence(&u, &r).unwrap(),
            (n as f64).ln(),
            1e-12
        ));
    }

    #[test]
    fn kl_skips_empty_cells_and_rejects_zero_targets() {
        let q = ProbDist::new(vec![1.0, 0.0]).unwrap();
        let r = UnnormalizedDensity::from_raw(vec![0.5, 0.5]);
        assert!(close(kl_divergence(&q, &r).unwrap(), 2f64.ln(), 1e-15));
        let zero = UnnormalizedDensity::from_raw(vec![0.5, 0.0]);
        assert!(matches!(kl_divergence(&q, &zero), Err(Error::Domain(_))));
    }

    #[test]
    fn clamp_examples() {
        assert_eq!(clamp_floor(&[0.5]).as_slice(), &[0.5]);
        assert_eq!(clamp_floor(&[1e-7]).as_slice(), &[(-10f64).exp()]);
        assert!(close(clamp_floor(&[1e-7]).as_slice()[0], 4.53999e-5, 1e-10));
        assert_eq!(clamp_floor(&[3.0]).as_slice(), &[1.0]);
        assert_eq!(DENSITY_FLOOR, (-10f64).exp());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(circular_distance(0, 30, 60), 30);
        assert_eq!(circular_distance(5, 55, 60), 10);
        assert_eq!(circular_distance(17, 17, 60), 0);
        assert_eq!(circular_distance(55, 5, 60), 10);
    }

    #[test]
    fn gaussian_shape() {
        let g = discretized_gaussian(12, 3.0, 60).unwrap();
        let g = g.as_slice();
        let argmax = (0..60).max_by(|&a, &b| g[a].total_cmp(&g[b])).unwrap();
        assert_eq!(argmax, 12);
        for d in 1..30 {
            assert_eq!(g[(12 + d) % 60], g[(12 + 60 - d) % 60]);
        }
        let flat = discretized_gaussian(0, 1e6, 60).unwrap();
        assert!(flat.as_slice().iter().all(|v| close(*v, 1.0 / 60.0, 1e-6)));
        assert!(matches!(
            discretized_gaussian(0, 0.0, 60),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            discretized_gaussian(0, -1.0, 60),
            Err(Error::Parameter(_))
        ));
    }
}
