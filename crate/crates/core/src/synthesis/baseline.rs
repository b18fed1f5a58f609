//! Direct and chain-of-thought LM baselines: the LM itself answers each
//! question several times in one running conversation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::blocks::first_in_range_number;
use super::fixtures::{frame, Frame};
use super::stages::Session;
use super::{PipelineConfig, SynthesisError};
use crate::lm::{Backend, Message};
use crate::olympics::Vignette;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMode {
    Direct,
    Cot,
}

impl BaselineMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineMode::Direct => "direct",
            BaselineMode::Cot => "cot",
        }
    }
}

impl std::str::FromStr for BaselineMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "direct" => Ok(BaselineMode::Direct),
            "cot" => Ok(BaselineMode::Cot),
            _ => Err(format!("unknown baseline mode `{s}` (expected direct or cot)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub responses_per_question: usize,
    pub temperature: f64,
    /// Follow-ups allowed when a reply holds no number in [0, 100].
    pub max_reasks: usize,
    pub max_tokens: u32,
    pub model_name: String,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            responses_per_question: 5,
            temperature: 1.0,
            max_reasks: 3,
            max_tokens: 512,
            model_name: String::new(),
        }
    }
}

/// One simulated participant's answers: label → responses in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineAnswers {
    pub vignette_id: String,
    pub participant_id: usize,
    pub answers: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRun {
    pub mode: BaselineMode,
    pub answers: BaselineAnswers,
    pub transcript: Vec<Message>,
}

/// Append a user turn, ask, and append the reply.
fn converse(
    session: &mut Session<'_>,
    turns: &mut Vec<Message>,
    config: &BaselineConfig,
    kind: &str,
    text: String,
) -> Result<String, SynthesisError> {
    turns.push(Message::user(text));
    let reply = session
        .ask(kind, turns, config.temperature, config.max_tokens)
        .map_err(SynthesisError::BaselineBackend)?;
    turns.push(Message::assistant(reply.clone()));
    Ok(reply)
}

const REASK: &str = "Please reply with a single number between 0 and 100.";

/// Ask every question `responses_per_question` times in question order,
/// each turn seeing all earlier turns.
pub fn run_baseline(
    mode: BaselineMode,
    vignette: &Vignette,
    backend: &dyn Backend,
    participant: usize,
    seed: u64,
    config: &BaselineConfig,
) -> Result<BaselineRun, SynthesisError> {
    let template = match mode {
        BaselineMode::Direct => frame(Frame::BaselineDirect),
        BaselineMode::Cot => frame(Frame::BaselineCot),
    };
    let system = template.replace("<SCENARIO>", &vignette.task_text()).trim().to_string();
    let pipeline = PipelineConfig {
        model_name: config.model_name.clone(),
        ..PipelineConfig::default()
    };
    let mut session = Session::with_system(vignette, &pipeline, backend, participant, seed, system);
    let (answer_kind, reasoning_kind) = match mode {
        BaselineMode::Direct => ("baseline_direct", ""),
        BaselineMode::Cot => ("baseline_cot_answer", "baseline_cot_reasoning"),
    };
    let n = config.responses_per_question;
    let mut turns: Vec<Message> = Vec::new();
    let mut answers = BTreeMap::new();
    for (qi, q) in vignette.questions.iter().enumerate() {
        let mut values = Vec::with_capacity(n);
        for r in 0..n {
            let header = format!("Query {}: {}\nResponse {} of {n}.", qi + 1, q.text, r + 1);
            let mut reply = match mode {
                BaselineMode::Direct => converse(
                    &mut session,
                    &mut turns,
                    config,
                    answer_kind,
                    format!("{header} Answer with a single number from 0 to 100."),
                )?,
                BaselineMode::Cot => {
                    converse(
                        &mut session,
                        &mut turns,
                        config,
                        reasoning_kind,
                        format!("{header} Think it through step by step before answering."),
                    )?;
                    converse(
                        &mut session,
                        &mut turns,
                        config,
                        answer_kind,
                        "Now give your answer as a single number from 0 to 100.".to_string(),
                    )?
                }
            };
            let mut reasks = 0;
            let value = loop {
                if let Some(v) = first_in_range_number(&reply) {
                    break v;
                }
                if reasks == config.max_reasks {
                    return Err(SynthesisError::BaselineParseFailure {
                        label: q.label.clone(),
                        response: r,
                    });
                }
                reasks += 1;
                reply = converse(&mut session, &mut turns, config, answer_kind, REASK.to_string())?;
            };
            values.push(value);
        }
        answers.insert(q.label.clone(), values);
    }
    Ok(BaselineRun {
        mode,
        answers: BaselineAnswers {
            vignette_id: vignette.id.clone(),
            participant_id: participant,
            answers,
        },
        transcript: session.into_transcript(),
    })
}
