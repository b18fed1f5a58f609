use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::infer::PosteriorEstimate;
use crate::olympics::{Experiment, QueryType, Sport, Vignette};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Human,
    Msa,
    Gold,
    LmDirect,
    LmCot,
}

/// Responses per participant per question in the human data.
pub const HUMAN_RESPONSES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentEntry {
    pub vignette_id: String,
    pub question_label: String,
    pub participant_id: String,
    pub samples: Vec<f64>,
}

/// What the metrics need to know about a vignette.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VignetteMeta {
    pub sport: Sport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    pub query_types: BTreeMap<String, QueryType>,
}

impl From<&Vignette> for VignetteMeta {
    fn from(v: &Vignette) -> Self {
        VignetteMeta {
            sport: v.sport,
            experiment: v.experiment,
            query_types: v.query_types(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentSet {
    pub source: Source,
    pub entries: Vec<JudgmentEntry>,
    /// Keyed by vignette id.
    #[serde(default)]
    pub vignettes: BTreeMap<String, VignetteMeta>,
}

impl JudgmentSet {
    pub fn new(source: Source) -> Self {
        JudgmentSet {
            source,
            entries: Vec::new(),
            vignettes: BTreeMap::new(),
        }
    }

    pub fn add_vignette(&mut self, v: &Vignette) {
        self.vignettes.insert(v.id.clone(), VignetteMeta::from(v));
    }

    /// One entry per query label, holding every posterior sample.
    pub fn add_posterior(&mut self, vignette_id: &str, participant_id: &str, posterior: &PosteriorEstimate) {
        for (label, xs) in &posterior.queries {
            self.entries.push(JudgmentEntry {
                vignette_id: vignette_id.to_string(),
                question_label: label.clone(),
                participant_id: participant_id.to_string(),
                samples: xs.clone(),
            });
        }
    }

    pub fn add_answers(&mut self, vignette_id: &str, participant_id: &str, answers: &BTreeMap<String, Vec<f64>>) {
        for (label, xs) in answers {
            self.entries.push(JudgmentEntry {
                vignette_id: vignette_id.to_string(),
                question_label: label.clone(),
                participant_id: participant_id.to_string(),
                samples: xs.clone(),
            });
        }
    }

    /// Fold in another set of the same source.
    pub fn extend(&mut self, other: JudgmentSet) -> Result<(), MetricsError> {
        if other.source != self.source {
            return Err(MetricsError::SourceMismatch(self.source, other.source));
        }
        self.entries.extend(other.entries);
        self.vignettes.extend(other.vignettes);
        Ok(())
    }

    /// Samples in range; a human participant gives exactly five per
    /// question, possibly spread over several entries.
    pub fn validate(&self) -> Result<(), MetricsError> {
        for e in &self.entries {
            if let Some(&x) = e.samples.iter().find(|x| !(0.0..=100.0).contains(*x)) {
                return Err(MetricsError::OutOfRange(x));
            }
        }
        if self.source == Source::Human {
            for (vid, labels) in self.index() {
                for (label, people) in labels {
                    for (participant, lists) in people {
                        let found = lists.iter().map(|l| l.len()).sum();
                        if found != HUMAN_RESPONSES {
                            return Err(MetricsError::BadHumanEntry {
                                vignette: vid.to_string(),
                                label: label.to_string(),
                                participant: participant.to_string(),
                                found,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// vignette → label → participant → sample lists in entry order.
    pub fn index(&self) -> BTreeMap<&str, BTreeMap<&str, BTreeMap<&str, Vec<&[f64]>>>> {
        let mut out: BTreeMap<&str, BTreeMap<&str, BTreeMap<&str, Vec<&[f64]>>>> = BTreeMap::new();
        for e in &self.entries {
            out.entry(&e.vignette_id)
                .or_default()
                .entry(&e.question_label)
                .or_default()
                .entry(&e.participant_id)
                .or_default()
                .push(&e.samples);
        }
        out
    }

    /// Participants seen per vignette, sorted.
    pub fn participants(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in &self.entries {
            let list = out.entry(e.vignette_id.as_str()).or_default();
            if !list.contains(&e.participant_id.as_str()) {
                list.push(&e.participant_id);
            }
        }
        for list in out.values_mut() {
            list.sort_unstable();
        }
        out
    }
}
