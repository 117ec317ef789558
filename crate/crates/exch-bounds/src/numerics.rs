//! Scalar and vector primitives shared by every bound: harmonic numbers,
//! the exchangeability inflation factor, population statistics and weight
//! norms.
//!
//! The inflation factor for a population of size `N` is
//!
//! ```text
//! eps_N = (H_N - 1) / (N - H_N),    H_N = 1 + 1/2 + ... + 1/N,
//! ```
//!
//! which is `1` at `N = 2`, strictly decreasing, and `O(log N / N)`.

use crate::error::{Error, Result};

/// Harmonic number `H_n = 1 + 1/2 + ... + 1/n`.
///
/// Summed from the smallest term up (`1/n` first) so results are
/// reproducible bit for bit.
pub fn harmonic(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("harmonic number needs n >= 1".into()));
    }
    Ok((1..=n).rev().map(|k| 1.0 / k as f64).sum())
}

/// Inflation factor `eps_N = (H_N - 1) / (N - H_N)` for `N >= 2`.
///
/// Lies in `(0, 1]`, with `eps_2 = 1` exactly.
pub fn epsilon(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain("inflation factor needs N >= 2".into()));
    }
    let h = harmonic(n)?;
    Ok((h - 1.0) / (n as f64 - h))
}

/// Iterator over `(N, eps_N)` for `N = 2..=max_n`, using a running harmonic
/// sum so whole-range sweeps cost O(max_n) instead of O(max_n^2).
///
/// The running sum accumulates large terms first, so individual values may
/// differ from [`epsilon`] by a few ulps; use this for envelope or
/// monotonicity sweeps, not for pinning exact values.
pub fn epsilon_sweep(max_n: u64) -> impl Iterator<Item = (u64, f64)> {
    let mut h = 1.0f64;
    (2..=max_n).map(move |n| {
        h += 1.0 / n as f64;
        (n, (h - 1.0) / (n as f64 - h))
    })
}

/// Fixed weights `w` with cached norms.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    entries: Vec<f64>,
    norm2: f64,
    norm_inf: f64,
    all_nonnegative: bool,
}

impl WeightVector {
    /// Validates and wraps a weight vector. Entries must be finite and the
    /// vector nonempty.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("weight vector must be nonempty".into()));
        }
        if let Some(i) = entries.iter().position(|w| !w.is_finite()) {
            return Err(Error::Domain(format!(
                "weight at index {i} is not finite: {}",
                entries[i]
            )));
        }
        let norm2 = entries.iter().map(|w| w * w).sum::<f64>().sqrt();
        let norm_inf = entries.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let all_nonnegative = entries.iter().all(|&w| w >= 0.0);
        Ok(Self {
            entries,
            norm2,
            norm_inf,
            all_nonnegative,
        })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Euclidean norm `|w|_2`.
    pub fn norm2(&self) -> f64 {
        self.norm2
    }

    /// Max-absolute-entry norm `|w|_inf`.
    pub fn norm_inf(&self) -> f64 {
        self.norm_inf
    }

    pub fn all_nonnegative(&self) -> bool {
        self.all_nonnegative
    }
}

/// A finite population `x` in `[-1, 1]^N` with its summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    values: Vec<f64>,
    mean: f64,
    variance: f64,
    inflated_variance: Option<f64>,
}

impl Population {
    /// Validates values against `[-1, 1]` (strictly, no tolerance) and
    /// computes mean, variance and, for `N >= 2`, the inflated variance
    /// `sigma^2 + 4 eps_N`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("population must be nonempty".into()));
        }
        for (index, &value) in values.iter().enumerate() {
            if !(-1.0..=1.0).contains(&value) {
                return Err(Error::ValueOutOfRange { index, value });
            }
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let inflated_variance = if values.len() >= 2 {
            Some(variance + 4.0 * epsilon(values.len() as u64)?)
        } else {
            None
        };
        Ok(Self {
            values,
            mean,
            variance,
            inflated_variance,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Population mean `(1/N) sum x_i`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance `(1/N) sum (x_i - mean)^2`.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Inflated variance `sigma^2 + 4 eps_N`; `None` when `N = 1`.
    pub fn inflated_variance(&self) -> Option<f64> {
        self.inflated_variance
    }
}

/// Mean and variance of an i.i.d. sampling distribution on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IidModel {
    mean: f64,
    variance: f64,
}

impl IidModel {
    /// Requires `|mean| <= 1` and `variance` in `[0, 1]`. The sharper
    /// feasibility constraint `variance <= 1 - mean^2` is deliberately not
    /// enforced.
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || mean.abs() > 1.0 {
            return Err(Error::Domain(format!(
                "i.i.d. mean must lie in [-1, 1], got {mean}"
            )));
        }
        if !variance.is_finite() || !(0.0..=1.0).contains(&variance) {
            return Err(Error::Domain(format!(
                "i.i.d. variance must lie in [0, 1], got {variance}"
            )));
        }
        Ok(Self { mean, variance })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}
