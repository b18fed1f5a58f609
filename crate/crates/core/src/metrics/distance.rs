use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Counts over ten equal buckets of [0, 100]; bucket `i` covers
/// [10i, 10i + 10) and 100 falls in the last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram10 {
    pub counts: [u64; 10],
    pub total: u64,
}

impl Histogram10 {
    pub fn from_counts(counts: [u64; 10]) -> Result<Self, MetricsError> {
        let total = counts.iter().sum();
        if total == 0 {
            return Err(MetricsError::EmptySamples);
        }
        Ok(Histogram10 { counts, total })
    }

    pub fn probabilities(&self) -> [f64; 10] {
        self.counts.map(|c| c as f64 / self.total as f64)
    }

    fn cdf(&self) -> [f64; 10] {
        let p = self.probabilities();
        let mut acc = 0.0;
        p.map(|x| {
            acc += x;
            acc
        })
    }
}

pub fn bucketize(samples: &[f64]) -> Result<Histogram10, MetricsError> {
    let mut counts = [0u64; 10];
    for &x in samples {
        if !(0.0..=100.0).contains(&x) {
            return Err(MetricsError::OutOfRange(x));
        }
        counts[((x / 10.0).floor() as usize).min(9)] += 1;
    }
    Histogram10::from_counts(counts)
}

/// W1 between the normalized histograms with mass at the bucket centers
/// 5, 15, ..., 95: ten times the summed absolute CDF gap.
pub fn wasserstein(a: &Histogram10, b: &Histogram10) -> f64 {
    let (ca, cb) = (a.cdf(), b.cdf());
    10.0 * (0..9).map(|i| (ca[i] - cb[i]).abs()).sum::<f64>()
}

pub fn tvd(a: &Histogram10, b: &Histogram10) -> f64 {
    let (pa, pb) = (a.probabilities(), b.probabilities());
    0.5 * (0..10).map(|i| (pa[i] - pb[i]).abs()).sum::<f64>()
}

/// Squared Pearson correlation.
pub fn mean_r2(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(MetricsError::TooFewPoints(x.len()));
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    // relative to the data scale, so exact constants and rounding noise agree
    let tiny = |s: f64, m: f64| s <= 1e-24 * (1.0 + m * m) * n;
    if tiny(sxx, mx) || tiny(syy, my) {
        return Err(MetricsError::DegenerateVariance);
    }
    Ok((sxy * sxy / (sxx * syy)).min(1.0))
}
