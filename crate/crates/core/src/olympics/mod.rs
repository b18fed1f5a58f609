//! The Model Olympics stimulus domain: tournament motifs rendered as
//! vignettes in three sports, and the hand-built gold models.

mod gold;
mod motifs;
mod text;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::seed::derive_seed;

pub use gold::{gold_definitions, gold_model, gold_parse, prediction_gain, Aggregation, GoldParams, GoldParse, ParamsError};
pub use motifs::{
    find_motif, list_motifs, Anomaly, Focus, MatchSpec, Motif, MotifError, MotifTag, PredictionSpec, Role, Winner,
};
pub use text::NAME_POOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sport {
    TugOfWar,
    CanoeRacing,
    Biathlon,
}

impl Sport {
    pub const ALL: [Sport; 3] = [Sport::TugOfWar, Sport::CanoeRacing, Sport::Biathlon];

    pub fn as_str(self) -> &'static str {
        match self {
            Sport::TugOfWar => "tug_of_war",
            Sport::CanoeRacing => "canoe_racing",
            Sport::Biathlon => "biathlon",
        }
    }

    /// The word for one contest, also used as the record key in queries.
    pub fn event_noun(self) -> &'static str {
        match self {
            Sport::TugOfWar => "match",
            Sport::CanoeRacing => "race",
            Sport::Biathlon => "round",
        }
    }

    /// The function name of the per-contest latent asked about.
    pub fn temporal_function(self) -> &'static str {
        match self {
            Sport::TugOfWar => "effort_level_in_match",
            Sport::CanoeRacing => "effort_level_in_race",
            Sport::Biathlon => "shooting_accuracy_in_round",
        }
    }
}

impl fmt::Display for Sport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sport {
    type Err = OlympicsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Sport::ALL
            .into_iter()
            .find(|sp| sp.as_str() == s)
            .ok_or_else(|| OlympicsError::UnknownSport(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundKind {
    Detailed,
    Underspecified,
    UnderspecifiedWithCommentary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    E1,
    E2,
    E3,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::E1 => "e1",
            Experiment::E2 => "e2",
            Experiment::E3 => "e3",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = OlympicsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "e1" => Ok(Experiment::E1),
            "e2" => Ok(Experiment::E2),
            "e3" => Ok(Experiment::E3),
            _ => Err(OlympicsError::UnknownExperiment(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryType {
    Constant,
    Temporal,
    Prediction,
}

impl QueryType {
    pub const ALL: [QueryType; 3] = [QueryType::Constant, QueryType::Temporal, QueryType::Prediction];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryType::Constant => "constant",
            QueryType::Temporal => "temporal",
            QueryType::Prediction => "prediction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub label: String,
    pub text: String,
    pub query_type: QueryType,
    pub scale: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vignette {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    pub sport: Sport,
    pub background_kind: BackgroundKind,
    pub background: String,
    pub observations: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commentary: Option<String>,
    pub questions: Vec<Question>,
    /// Role letter to display name.
    pub athletes: BTreeMap<String, String>,
    pub motif_id: String,
    pub seed: u64,
}

impl Vignette {
    pub fn labels(&self) -> Vec<&str> {
        self.questions.iter().map(|q| q.label.as_str()).collect()
    }

    pub fn query_types(&self) -> BTreeMap<String, QueryType> {
        self.questions.iter().map(|q| (q.label.clone(), q.query_type)).collect()
    }

    /// The display name of `role`.
    pub fn name(&self, role: Role) -> Option<&str> {
        self.athletes.get(&role.to_string()).map(String::as_str)
    }

    /// The lowercase identifier used for `role` in programs.
    pub fn ident(&self, role: Role) -> Option<String> {
        self.name(role).map(str::to_lowercase)
    }

    /// The full task text: background, observations, commentary and
    /// numbered questions.
    pub fn task_text(&self) -> String {
        let mut out = self.background.clone();
        out.push_str("\n\n");
        out.push_str(&self.observations.join("\n"));
        if let Some(c) = &self.commentary {
            out.push_str("\n\n");
            out.push_str(c);
        }
        out.push_str("\n\n");
        let qs: Vec<String> = self
            .questions
            .iter()
            .enumerate()
            .map(|(i, q)| format!("Query {}: {}", i + 1, q.text))
            .collect();
        out.push_str(&qs.join("\n"));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentaryEntry {
    pub vignette_index: usize,
    /// May mention roles as `{A}`, `{B}`, ...; they are replaced by names.
    pub sentence: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OlympicsError {
    #[error("unknown motif `{0}`")]
    UnknownMotif(String),
    #[error("unknown sport `{0}` (expected tug_of_war, canoe_racing or biathlon)")]
    UnknownSport(String),
    #[error("unknown experiment `{0}` (expected e1, e2 or e3)")]
    UnknownExperiment(String),
    #[error("experiment e3 needs a commentary sentence for vignette index {0}")]
    MissingCommentaryFixture(usize),
    #[error("vignette `{0}` has commentary; there is no gold model for it")]
    NoGoldModel(String),
    #[error("vignette `{vignette}` does not match its motif: {problem}")]
    Inconsistent { vignette: String, problem: String },
}

pub fn generate_vignette(
    sport: Sport,
    motif_id: &str,
    background_kind: BackgroundKind,
    seed: u64,
) -> Result<Vignette, OlympicsError> {
    let motif = find_motif(motif_id).ok_or_else(|| OlympicsError::UnknownMotif(motif_id.to_string()))?;
    Ok(render(&motif, sport, background_kind, seed, format!("{sport}-{motif_id}-{seed}")))
}

fn render(motif: &Motif, sport: Sport, kind: BackgroundKind, seed: u64, id: String) -> Vignette {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = NAME_POOL.to_vec();
    pool.shuffle(&mut rng);
    let athletes: BTreeMap<String, String> = motif
        .roles
        .iter()
        .zip(pool)
        .map(|(r, n)| (r.to_string(), n.to_string()))
        .collect();
    let name = |r: &Role| athletes[&r.to_string()].as_str();
    let names = |rs: &[Role]| rs.iter().map(name).collect::<Vec<_>>();

    let observations = motif
        .matches
        .iter()
        .enumerate()
        .map(|(i, m)| text::observation(sport, i + 1, &names(&m.team1), &names(&m.team2), m.winner == Winner::Team1))
        .collect();

    let mut questions = Vec::with_capacity(8);
    let mut push = |text: String, query_type| {
        questions.push(Question {
            label: format!("q{}", questions.len() + 1),
            text,
            query_type,
            scale: [0.0, 100.0],
        })
    };
    for r in &motif.focus.constant_roles {
        push(text::constant_question(name(r), kind), QueryType::Constant);
    }
    for (r, idx) in &motif.focus.temporal_probes {
        push(text::temporal_question(sport, name(r), *idx), QueryType::Temporal);
    }
    for p in &motif.focus.predictions {
        push(
            text::prediction_question(sport, &names(&p.team1), &names(&p.team2)),
            QueryType::Prediction,
        );
    }

    Vignette {
        id,
        experiment: None,
        sport,
        background_kind: kind,
        background: text::background(sport, kind),
        observations,
        commentary: None,
        questions,
        athletes,
        motif_id: motif.id.clone(),
        seed,
    }
}

/// Replace `{A}`-style role placeholders with the vignette's names.
pub fn fill_roles(template: &str, vignette: &Vignette) -> String {
    let mut out = template.to_string();
    for (role, name) in &vignette.athletes {
        out = out.replace(&format!("{{{role}}}"), name);
    }
    out
}

const E3_LAYOUT: [(Sport, usize); 2] = [(Sport::TugOfWar, 5), (Sport::CanoeRacing, 4)];

/// The vignette set of one experiment. `commentary` is required for e3 and
/// ignored otherwise.
pub fn sample_experiment_set(
    experiment: Experiment,
    seed: u64,
    commentary: Option<&[CommentaryEntry]>,
) -> Result<Vec<Vignette>, OlympicsError> {
    let motifs = list_motifs();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, 0x6d6f_7469_66]));
    let layout: Vec<(Sport, usize)> = match experiment {
        Experiment::E1 | Experiment::E2 => Sport::ALL.iter().map(|&s| (s, 6)).collect(),
        Experiment::E3 => E3_LAYOUT.to_vec(),
    };
    // e1 and e2 share the rng stream above, so their motif draws coincide
    let kind = match experiment {
        Experiment::E1 => BackgroundKind::Detailed,
        Experiment::E2 => BackgroundKind::Underspecified,
        Experiment::E3 => BackgroundKind::UnderspecifiedWithCommentary,
    };
    let mut out = Vec::new();
    for (sport, count) in layout {
        let picks = index::sample(&mut rng, motifs.len(), count).into_vec();
        for (i, m) in picks.into_iter().enumerate() {
            let position = out.len();
            let vseed = derive_seed(&[seed, experiment as u64 + 1, sport as u64, i as u64]);
            let id = format!("{experiment}-{sport}-{:02}", i + 1);
            let mut v = render(&motifs[m], sport, kind, vseed, id);
            v.experiment = Some(experiment);
            if experiment == Experiment::E3 {
                let entry = commentary
                    .and_then(|c| c.iter().find(|e| e.vignette_index == position))
                    .ok_or(OlympicsError::MissingCommentaryFixture(position))?;
                v.commentary = Some(fill_roles(&entry.sentence, &v));
            }
            out.push(v);
        }
    }
    Ok(out)
}

/// The commentary fixture shipped for e3, one sentence per vignette index.
pub fn default_commentary() -> Vec<CommentaryEntry> {
    serde_json::from_str(include_str!("../../fixtures/commentary/e3.json")).expect("shipped commentary fixture")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sport_names_round_trip() {
        for s in Sport::ALL {
            assert_eq!(s.as_str().parse::<Sport>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{s}\""));
        }
        assert!(matches!("curling".parse::<Sport>(), Err(OlympicsError::UnknownSport(_))));
    }
}
