use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap_model_human, split_half_baseline, GroupInterval, Interval};
use super::{mean_r2, tvd, wasserstein, Histogram10, JudgmentSet, Metric, MetricsError, Source, VignetteMeta};
use crate::olympics::{Experiment, QueryType, Sport};

/// Aggregation cell: one sport within one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub sport: Sport,
    pub experiment: Option<Experiment>,
}

/// Pooled judgments of one question: bucket counts plus the running sum
/// for the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) struct Pool {
    pub counts: [u64; 10],
    pub sum: f64,
    pub n: u64,
}

impl Pool {
    pub const EMPTY: Pool = Pool {
        counts: [0; 10],
        sum: 0.0,
        n: 0,
    };

    pub fn of(samples: &[f64]) -> Result<Pool, MetricsError> {
        let mut p = Pool::EMPTY;
        for &x in samples {
            if !(0.0..=100.0).contains(&x) {
                return Err(MetricsError::OutOfRange(x));
            }
            p.counts[((x / 10.0).floor() as usize).min(9)] += 1;
            p.sum += x;
            p.n += 1;
        }
        Ok(p)
    }

    pub fn add(&mut self, other: &Pool, weight: u64) {
        for (c, o) in self.counts.iter_mut().zip(other.counts) {
            *c += weight * o;
        }
        self.sum += weight as f64 * other.sum;
        self.n += weight * other.n;
    }

    pub fn histogram(&self) -> Result<Histogram10, MetricsError> {
        Histogram10::from_counts(self.counts)
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }
}

fn pool_lists(lists: &[&[f64]]) -> Result<Pool, MetricsError> {
    let mut p = Pool::EMPTY;
    for xs in lists {
        p.add(&Pool::of(xs)?, 1);
    }
    Ok(p)
}

/// Per-question numbers feeding every aggregate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) struct Measures {
    pub model_mean: f64,
    pub reference_mean: f64,
    pub wd: f64,
    pub tvd: f64,
}

pub(super) fn measure(model: &Pool, reference: &Pool) -> Result<Measures, MetricsError> {
    let (a, b) = (model.histogram()?, reference.histogram()?);
    Ok(Measures {
        model_mean: model.mean(),
        reference_mean: reference.mean(),
        wd: wasserstein(&a, &b),
        tvd: tvd(&a, &b),
    })
}

#[derive(Debug, Clone)]
pub(super) struct QuestionSlot {
    pub vignette_id: String,
    pub label: String,
    pub group: GroupKey,
    pub query_type: QueryType,
    /// Position in `Layout::vignettes`.
    pub vignette: usize,
    /// Per-participant pools, aligned with that vignette's participants;
    /// a participant who skipped the question contributes nothing.
    pub participants: Vec<Pool>,
}

/// The reference set arranged for repeated resampling.
#[derive(Debug, Clone)]
pub(super) struct Layout {
    pub vignettes: Vec<(String, Vec<String>)>,
    pub questions: Vec<QuestionSlot>,
}

fn lookup_meta<'a>(
    vid: &str,
    sets: &[&'a JudgmentSet],
) -> Result<&'a VignetteMeta, MetricsError> {
    sets.iter()
        .find_map(|s| s.vignettes.get(vid))
        .ok_or_else(|| MetricsError::MissingVignetteMeta(vid.to_string()))
}

impl Layout {
    /// Questions come from `reference`; metadata from whichever set has it.
    pub fn new(reference: &JudgmentSet, meta_sets: &[&JudgmentSet]) -> Result<Layout, MetricsError> {
        reference.validate()?;
        let participants = reference.participants();
        let mut vignettes = Vec::new();
        let mut questions = Vec::new();
        for (vid, labels) in reference.index() {
            let meta = lookup_meta(vid, meta_sets)?;
            let group = GroupKey {
                sport: meta.sport,
                experiment: meta.experiment,
            };
            let people = &participants[vid];
            for (label, by_participant) in labels {
                let query_type = *meta.query_types.get(label).ok_or_else(|| MetricsError::UnknownLabel {
                    vignette: vid.to_string(),
                    label: label.to_string(),
                })?;
                let pools = people
                    .iter()
                    .map(|p| pool_lists(by_participant.get(p).map_or(&[][..], Vec::as_slice)))
                    .collect::<Result<_, _>>()?;
                questions.push(QuestionSlot {
                    vignette_id: vid.to_string(),
                    label: label.to_string(),
                    group,
                    query_type,
                    vignette: vignettes.len(),
                    participants: pools,
                });
            }
            vignettes.push((vid.to_string(), people.iter().map(|p| p.to_string()).collect()));
        }
        Ok(Layout { vignettes, questions })
    }

    /// Every participant once.
    pub fn pooled(&self) -> Vec<Pool> {
        self.questions
            .iter()
            .map(|q| {
                let mut p = Pool::EMPTY;
                for x in &q.participants {
                    p.add(x, 1);
                }
                p
            })
            .collect()
    }

    /// Pools of `model` aligned with `self.questions`.
    pub fn model_pools(&self, model: &JudgmentSet) -> Result<Vec<Pool>, MetricsError> {
        let index = model.index();
        self.questions
            .iter()
            .map(|q| {
                let missing = || MetricsError::MissingQuestion {
                    vignette: q.vignette_id.clone(),
                    label: q.label.clone(),
                };
                let by_participant = index
                    .get(q.vignette_id.as_str())
                    .and_then(|l| l.get(q.label.as_str()))
                    .ok_or_else(missing)?;
                let mut pool = Pool::EMPTY;
                for lists in by_participant.values() {
                    pool.add(&pool_lists(lists)?, 1);
                }
                if pool.n == 0 {
                    return Err(missing());
                }
                Ok(pool)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeRow {
    pub sport: Sport,
    #[serde(default)]
    pub experiment: Option<Experiment>,
    pub query_type: QueryType,
    pub n_questions: usize,
    pub wd: f64,
    pub tvd: f64,
    /// Unset with fewer than three questions or a constant series.
    pub r2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub sport: Sport,
    #[serde(default)]
    pub experiment: Option<Experiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tvd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
    /// Bootstrap intervals over resampled reference participants.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub ci: BTreeMap<Metric, Interval>,
}

/// Unweighted means over the three query types; `r2` is set only when all
/// three types have one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupValue {
    pub key: GroupKey,
    pub wd: f64,
    pub tvd: f64,
    pub r2: Option<f64>,
}

impl GroupValue {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Wd => Some(self.wd),
            Metric::Tvd => Some(self.tvd),
            Metric::R2 => self.r2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub by_type: Vec<TypeRow>,
    pub groups: Vec<GroupValue>,
}

pub(super) fn aggregate_measures(
    items: impl IntoIterator<Item = (GroupKey, QueryType, Measures)>,
) -> Result<Aggregate, MetricsError> {
    let mut cells: BTreeMap<(GroupKey, QueryType), Vec<Measures>> = BTreeMap::new();
    let mut keys = BTreeSet::new();
    for (g, t, m) in items {
        keys.insert(g);
        cells.entry((g, t)).or_default().push(m);
    }
    let mut by_type = Vec::new();
    let mut groups = Vec::new();
    for g in keys {
        let (mut wd, mut tv, mut r2) = (0.0, 0.0, Some(0.0));
        for t in QueryType::ALL {
            let ms = cells.get(&(g, t)).ok_or(MetricsError::MissingQueryType {
                sport: g.sport,
                experiment: g.experiment,
                query_type: t,
            })?;
            let n = ms.len() as f64;
            let x: Vec<f64> = ms.iter().map(|m| m.model_mean).collect();
            let y: Vec<f64> = ms.iter().map(|m| m.reference_mean).collect();
            let row = TypeRow {
                sport: g.sport,
                experiment: g.experiment,
                query_type: t,
                n_questions: ms.len(),
                wd: ms.iter().map(|m| m.wd).sum::<f64>() / n,
                tvd: ms.iter().map(|m| m.tvd).sum::<f64>() / n,
                r2: mean_r2(&x, &y).ok(),
            };
            wd += row.wd / 3.0;
            tv += row.tvd / 3.0;
            r2 = r2.zip(row.r2).map(|(a, b)| a + b / 3.0);
            by_type.push(row);
        }
        groups.push(GroupValue { key: g, wd, tvd: tv, r2 });
    }
    Ok(Aggregate { by_type, groups })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRow {
    pub vignette_id: String,
    pub question_label: String,
    pub sport: Sport,
    #[serde(default)]
    pub experiment: Option<Experiment>,
    pub query_type: QueryType,
    pub model_mean: f64,
    pub reference_mean: f64,
    pub wd: f64,
    pub tvd: f64,
}

/// Per-question comparison of pooled judgments. Every question of
/// `reference` must appear in `model`.
pub fn compare(model: &JudgmentSet, reference: &JudgmentSet) -> Result<Vec<QuestionRow>, MetricsError> {
    model.validate()?;
    let layout = Layout::new(reference, &[reference, model])?;
    let model_pools = layout.model_pools(model)?;
    layout
        .questions
        .iter()
        .zip(layout.pooled())
        .zip(model_pools)
        .map(|((q, r), m)| {
            let ms = measure(&m, &r)?;
            Ok(QuestionRow {
                vignette_id: q.vignette_id.clone(),
                question_label: q.label.clone(),
                sport: q.group.sport,
                experiment: q.group.experiment,
                query_type: q.query_type,
                model_mean: ms.model_mean,
                reference_mean: ms.reference_mean,
                wd: ms.wd,
                tvd: ms.tvd,
            })
        })
        .collect()
}

/// Mean within each query type, then the unweighted mean across types,
/// per sport and experiment.
pub fn aggregate(rows: &[QuestionRow]) -> Result<Aggregate, MetricsError> {
    aggregate_measures(rows.iter().map(|r| {
        (
            GroupKey {
                sport: r.sport,
                experiment: r.experiment,
            },
            r.query_type,
            Measures {
                model_mean: r.model_mean,
                reference_mean: r.reference_mean,
                wd: r.wd,
                tvd: r.tvd,
            },
        )
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub metrics: Vec<Metric>,
    /// Bootstrap and split-half replicate count; 0 skips intervals.
    pub n_boot: usize,
    pub split_half: bool,
    pub seed: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            metrics: Metric::ALL.to_vec(),
            n_boot: 1000,
            split_half: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub model_source: Source,
    pub reference_source: Source,
    pub options: ReportOptions,
    pub questions: Vec<QuestionRow>,
    pub by_type: Vec<TypeRow>,
    pub groups: Vec<GroupRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub split_half: Vec<GroupInterval>,
}

pub fn build_report(
    model: &JudgmentSet,
    reference: &JudgmentSet,
    options: &ReportOptions,
) -> Result<MetricReport, MetricsError> {
    let questions = compare(model, reference)?;
    let agg = aggregate(&questions)?;
    let wants = |m| options.metrics.contains(&m);
    let mut groups: Vec<GroupRow> = agg
        .groups
        .iter()
        .map(|g| GroupRow {
            sport: g.key.sport,
            experiment: g.key.experiment,
            wd: wants(Metric::Wd).then_some(g.wd),
            tvd: wants(Metric::Tvd).then_some(g.tvd),
            r2: if wants(Metric::R2) { g.r2 } else { None },
            ci: BTreeMap::new(),
        })
        .collect();
    let mut split_half = Vec::new();
    if options.n_boot > 0 {
        for &m in &options.metrics {
            for gi in bootstrap_model_human(model, reference, m, options.n_boot, options.seed)? {
                if let Some(row) = groups
                    .iter_mut()
                    .find(|r| r.sport == gi.sport && r.experiment == gi.experiment)
                {
                    row.ci.insert(m, gi.interval);
                }
            }
            if options.split_half {
                split_half.extend(split_half_baseline(reference, m, options.n_boot, options.seed)?);
            }
        }
    }
    Ok(MetricReport {
        model_source: model.source,
        reference_source: reference.source,
        options: options.clone(),
        questions,
        by_type: agg.by_type,
        groups,
        split_half,
    })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    vignette_id: &'a str,
    question_label: &'a str,
    sport: &'static str,
    experiment: &'static str,
    query_type: &'static str,
    model_mean: f64,
    reference_mean: f64,
    wd: f64,
    tvd: f64,
}

/// One row per vignette and question.
pub fn write_csv(report: &MetricReport, out: impl Write) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    for q in &report.questions {
        w.serialize(CsvRow {
            vignette_id: &q.vignette_id,
            question_label: &q.question_label,
            sport: q.sport.as_str(),
            experiment: q.experiment.map_or("", Experiment::as_str),
            query_type: q.query_type.as_str(),
            model_mean: q.model_mean,
            reference_mean: q.reference_mean,
            wd: q.wd,
            tvd: q.tvd,
        })
        .map_err(|e| MetricsError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| MetricsError::Csv(e.to_string()))
}
