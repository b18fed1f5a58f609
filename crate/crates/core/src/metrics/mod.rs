//! Comparison of judgment sets: bucketized distances, mean correlations,
//! per-type aggregation and resampled intervals.

mod bootstrap;
mod distance;
mod judgments;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bootstrap::{bootstrap_model_human, split_half_baseline, GroupInterval, Interval, CI_LEVEL};
pub use distance::{bucketize, mean_r2, tvd, wasserstein, Histogram10};
pub use judgments::{JudgmentEntry, JudgmentSet, Source, VignetteMeta, HUMAN_RESPONSES};
pub use report::{
    aggregate, build_report, compare, write_csv, Aggregate, GroupKey, GroupRow, GroupValue, MetricReport, QuestionRow,
    ReportOptions, TypeRow,
};

use crate::olympics::{Experiment, QueryType, Sport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Wd,
    Tvd,
    R2,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Wd, Metric::Tvd, Metric::R2];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Wd => "wd",
            Metric::Tvd => "tvd",
            Metric::R2 => "r2",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| MetricsError::UnknownMetric(s.to_string()))
    }
}

fn experiment_name(e: &Option<Experiment>) -> &'static str {
    e.map_or("-", Experiment::as_str)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no samples to bucketize")]
    EmptySamples,
    #[error("sample {0} lies outside [0, 100]")]
    OutOfRange(f64),
    #[error("series lengths differ: {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("correlation needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("a series has zero variance")]
    DegenerateVariance,
    #[error("{sport}/{} has no {} questions", experiment_name(.experiment), .query_type.as_str())]
    MissingQueryType {
        sport: Sport,
        experiment: Option<Experiment>,
        query_type: QueryType,
    },
    #[error("vignette {vignette} has {found} participants, need at least {needed}")]
    TooFewParticipants {
        vignette: String,
        found: usize,
        needed: usize,
    },
    #[error("no sport or query types known for vignette {0}")]
    MissingVignetteMeta(String),
    #[error("vignette {vignette} has no query type for {label}")]
    UnknownLabel { vignette: String, label: String },
    #[error("the compared set has no judgments for {vignette}/{label}")]
    MissingQuestion { vignette: String, label: String },
    #[error("human entry {vignette}/{label}/{participant} has {found} samples, expected 5")]
    BadHumanEntry {
        vignette: String,
        label: String,
        participant: String,
        found: usize,
    },
    #[error("cannot merge {1:?} judgments into a {0:?} set")]
    SourceMismatch(Source, Source),
    #[error("unknown metric {0:?} (expected wd, tvd or r2)")]
    UnknownMetric(String),
    #[error("no resamples requested")]
    NoResamples,
    #[error("csv export: {0}")]
    Csv(String),
}
