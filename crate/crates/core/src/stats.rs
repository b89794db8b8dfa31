//! Monte Carlo summaries: point estimate, standard error and a confidence
//! interval.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{require, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials_used: u64,
    pub discards: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    /// Standard error above a third of the mean.
    pub fn is_imprecise(&self) -> bool {
        self.std_error > self.mean.abs() / 3.0
    }

    pub fn contains(&self, value: f64) -> bool {
        (self.ci_low..=self.ci_high).contains(&value)
    }

    /// `|mean − value| ≤ k·std_error`.
    pub fn within_std_errors(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }

    pub fn attempts(&self) -> u64 {
        self.trials_used + self.discards
    }
}

/// Two-sided standard normal quantile for confidence level `level`.
pub fn z_value(level: f64) -> Result<f64> {
    require(level > 0.0 && level < 1.0, "ci_level", "must lie in (0, 1)")?;
    let n = Normal::standard();
    Ok(n.inverse_cdf(0.5 + 0.5 * level))
}

/// Neumaier-compensated sum; input order fixes the result.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Estimate of a probability from `successes` out of `n` Bernoulli trials.
///
/// Normal-approximation interval, switching to Wilson when fewer than ten
/// successes (or failures) are expected.
pub fn proportion(successes: u64, n: u64, discards: u64, level: f64) -> Result<Estimate> {
    require(n >= 1, "trials", "need at least one trial")?;
    let z = z_value(level)?;
    let nf = n as f64;
    let mean = successes as f64 / nf;
    let std_error = (mean * (1.0 - mean) / nf).sqrt();
    let (ci_low, ci_high) = if mean * nf < 10.0 || (1.0 - mean) * nf < 10.0 {
        wilson(mean, nf, z)
    } else {
        (
            (mean - z * std_error).max(0.0),
            (mean + z * std_error).min(1.0),
        )
    };
    Ok(Estimate {
        mean,
        std_error,
        trials_used: n,
        discards,
        ci_low: ci_low.min(mean),
        ci_high: ci_high.max(mean),
    })
}

fn wilson(p: f64, n: f64, z: f64) -> (f64, f64) {
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Sample mean of i.i.d. per-trial values with a normal interval.
pub fn sample_mean(values: &[f64], discards: u64, level: f64) -> Result<Estimate> {
    require(!values.is_empty(), "trials", "need at least one trial")?;
    let z = z_value(level)?;
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    let var = if values.len() > 1 {
        compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0)
    } else {
        0.0
    };
    let std_error = (var / n).sqrt();
    Ok(Estimate {
        mean,
        std_error,
        trials_used: values.len() as u64,
        discards,
        ci_low: mean - z * std_error,
        ci_high: mean + z * std_error,
    })
}

/// Ratio estimate `Σ num / Σ den` over independent clusters, with a
/// delta-method standard error from the per-cluster pairs.
pub fn ratio_of_sums(pairs: &[(f64, f64)], discards: u64, level: f64) -> Result<Estimate> {
    require(!pairs.is_empty(), "trials", "need at least one trial")?;
    let z = z_value(level)?;
    let n = pairs.len() as f64;
    let num = compensated_sum(pairs.iter().map(|p| p.0));
    let den = compensated_sum(pairs.iter().map(|p| p.1));
    require(den > 0.0, "trials", "denominator total is zero")?;
    let ratio = num / den;
    let mean_den = den / n;
    let var = if pairs.len() > 1 {
        compensated_sum(pairs.iter().map(|&(a, b)| {
            let r = a - ratio * b;
            r * r
        })) / (n - 1.0)
    } else {
        0.0
    };
    let std_error = (var / n).sqrt() / mean_den;
    Ok(Estimate {
        mean: ratio,
        std_error,
        trials_used: pairs.len() as u64,
        discards,
        ci_low: ratio - z * std_error,
        ci_high: ratio + z * std_error,
    })
}
