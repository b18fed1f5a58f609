use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{aggregate_measures, measure, GroupKey, Layout, Pool};
use super::{JudgmentSet, Metric, MetricsError};
use crate::olympics::{Experiment, Sport};
use crate::seed::derive_seed;

pub const CI_LEVEL: f64 = 0.95;

/// Mean over replicates with a percentile interval. The interval is widened
/// to include the mean if the percentiles miss it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

impl Interval {
    pub fn from_replicates(values: &[f64]) -> Result<Interval, MetricsError> {
        if values.is_empty() {
            return Err(MetricsError::NoResamples);
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let tail = (1.0 - CI_LEVEL) / 2.0;
        Ok(Interval {
            mean,
            lo: quantile(&sorted, tail).min(mean),
            hi: quantile(&sorted, 1.0 - tail).max(mean),
            level: CI_LEVEL,
        })
    }
}

/// Linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let (i, frac) = (h.floor() as usize, h - h.floor());
    match sorted.get(i + 1) {
        Some(next) => sorted[i] + frac * (next - sorted[i]),
        None => sorted[i],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupInterval {
    pub sport: Sport,
    #[serde(default)]
    pub experiment: Option<Experiment>,
    pub metric: Metric,
    pub interval: Interval,
}

fn require_participants(layout: &Layout, needed: usize) -> Result<(), MetricsError> {
    match layout.vignettes.iter().find(|(_, people)| people.len() < needed) {
        Some((vid, people)) => Err(MetricsError::TooFewParticipants {
            vignette: vid.clone(),
            found: people.len(),
            needed,
        }),
        None => Ok(()),
    }
}

/// Aggregate one replicate's per-question pools into a value per group.
fn replicate(
    layout: &Layout,
    pairs: impl Iterator<Item = (Pool, Pool)>,
    metric: Metric,
) -> Result<Vec<(GroupKey, f64)>, MetricsError> {
    let items = layout
        .questions
        .iter()
        .zip(pairs)
        .map(|(q, (a, b))| Ok((q.group, q.query_type, measure(&a, &b)?)))
        .collect::<Result<Vec<_>, MetricsError>>()?;
    aggregate_measures(items)?
        .groups
        .iter()
        .map(|g| g.get(metric).map(|v| (g.key, v)).ok_or(MetricsError::DegenerateVariance))
        .collect()
}

fn summarize(replicates: Vec<Vec<(GroupKey, f64)>>, metric: Metric) -> Result<Vec<GroupInterval>, MetricsError> {
    let Some(first) = replicates.first() else {
        return Err(MetricsError::NoResamples);
    };
    first
        .iter()
        .enumerate()
        .map(|(i, &(key, _))| {
            let values: Vec<f64> = replicates.iter().map(|r| r[i].1).collect();
            Ok(GroupInterval {
                sport: key.sport,
                experiment: key.experiment,
                metric,
                interval: Interval::from_replicates(&values)?,
            })
        })
        .collect()
}

fn pool_with(q: &[Pool], weights: &[u64]) -> Pool {
    let mut p = Pool::EMPTY;
    for (x, &w) in q.iter().zip(weights) {
        if w > 0 {
            p.add(x, w);
        }
    }
    p
}

/// Resample reference participants with replacement, per vignette, and
/// recompute the aggregate against the fixed model judgments.
pub fn bootstrap_model_human(
    model: &JudgmentSet,
    human: &JudgmentSet,
    metric: Metric,
    n_boot: usize,
    seed: u64,
) -> Result<Vec<GroupInterval>, MetricsError> {
    if n_boot == 0 {
        return Err(MetricsError::NoResamples);
    }
    model.validate()?;
    let layout = Layout::new(human, &[human, model])?;
    require_participants(&layout, 2)?;
    let model_pools = layout.model_pools(model)?;
    let replicates = (0..n_boot as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, 0x626f_6f74, b]));
            let weights: Vec<Vec<u64>> = layout
                .vignettes
                .iter()
                .map(|(_, people)| {
                    let mut w = vec![0; people.len()];
                    for _ in 0..people.len() {
                        w[rng.random_range(0..people.len())] += 1;
                    }
                    w
                })
                .collect();
            let pairs = layout
                .questions
                .iter()
                .zip(&model_pools)
                .map(|(q, m)| (*m, pool_with(&q.participants, &weights[q.vignette])));
            replicate(&layout, pairs, metric)
        })
        .collect::<Result<Vec<_>, _>>()?;
    summarize(replicates, metric)
}

/// Human-human agreement: split each vignette's participants into two
/// random halves of equal size (dropping one when the count is odd) and
/// compare the pooled halves.
pub fn split_half_baseline(
    human: &JudgmentSet,
    metric: Metric,
    n_boot: usize,
    seed: u64,
) -> Result<Vec<GroupInterval>, MetricsError> {
    if n_boot == 0 {
        return Err(MetricsError::NoResamples);
    }
    let layout = Layout::new(human, &[human])?;
    require_participants(&layout, 4)?;
    let replicates = (0..n_boot as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, 0x7370_6c69_74, b]));
            // 1 marks the first half, 2 the second, 0 the dropped participant
            let sides: Vec<Vec<u8>> = layout
                .vignettes
                .iter()
                .map(|(_, people)| {
                    let mut order: Vec<usize> = (0..people.len()).collect();
                    order.shuffle(&mut rng);
                    let half = people.len() / 2;
                    let mut side = vec![0; people.len()];
                    for (rank, &i) in order.iter().enumerate().take(2 * half) {
                        side[i] = if rank < half { 1 } else { 2 };
                    }
                    side
                })
                .collect();
            let pairs = layout.questions.iter().map(|q| {
                let side = &sides[q.vignette];
                let pick = |s: u8| -> Vec<u64> { side.iter().map(|&x| u64::from(x == s)).collect() };
                (pool_with(&q.participants, &pick(1)), pool_with(&q.participants, &pick(2)))
            });
            replicate(&layout, pairs, metric)
        })
        .collect::<Result<Vec<_>, _>>()?;
    summarize(replicates, metric)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 5.0);
        assert_eq!(quantile(&xs, 0.5), 3.0);
        assert!((quantile(&xs, 0.1) - 1.4).abs() < 1e-12);
    }

    #[test]
    fn single_replicate_collapses() {
        let i = Interval::from_replicates(&[4.2]).unwrap();
        assert_eq!((i.mean, i.lo, i.hi, i.level), (4.2, 4.2, 4.2, 0.95));
    }
}
