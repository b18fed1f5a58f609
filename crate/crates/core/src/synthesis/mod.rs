//! The staged synthesis pipeline: parse the vignette into code, retrieve
//! background knowledge and a concept graph, synthesize definitions that
//! pass an executability gate, then run inference. Also the LM baselines.

mod baseline;
mod blocks;
mod config;
mod fixtures;
mod mockgen;
mod participant;
mod prompt;
mod stages;

use serde::{Deserialize, Serialize};

use crate::infer::InferError;
use crate::lm::BackendError;

pub use baseline::{run_baseline, BaselineAnswers, BaselineConfig, BaselineMode, BaselineRun};
pub use blocks::{
    block, first_in_range_number, first_score, model_definitions, parse_background, parse_block, parse_graph,
    BlockError, DependencyEdge, ParsedBlock,
};
pub use config::{ConfigError, MaxTokens, PipelineConfig, RetryLimits};
pub use fixtures::{example, frame, ExampleFixture, Frame, EXAMPLES, EXAMPLES_TOKEN};
pub use mockgen::{gold_parse_block, mock_script};
pub use participant::{
    participant_seed, run_experiment, simulate_participant, ParticipantError, ParticipantOutcome, ParticipantRun,
};
pub use prompt::{assemble_prompt, commentary_mode, eligible_examples, fingerprint, truncate_example, PromptContext};
pub use stages::{
    argmax_lowest, expected_conditions, gate, score_candidates, stage_background, stage_inference, stage_model,
    stage_parse, BackgroundResult, Candidate, Diagnostic, LabeledQuery, ModelResult, ParseResult, RejectedCandidate,
    Session, StageOutput, SynthesizedModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Parse,
    Background,
    Model,
    Inference,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Parse => "parse",
            Stage::Background => "background",
            Stage::Model => "model",
            Stage::Inference => "inference",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthesisError {
    #[error("no example fixture for `{0}`")]
    MissingFixture(String),
    #[error("the {0} stage has no prompt")]
    NoPrompt(Stage),
    #[error("{stage} stage failed after {} discarded candidates{}", diagnostics.len(), summary(diagnostics))]
    StageFailure {
        stage: Stage,
        diagnostics: Vec<RejectedCandidate>,
    },
    #[error("{stage} stage: {source}")]
    Backend { stage: Stage, source: BackendError },
    #[error("inference: {0}")]
    Inference(InferError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("baseline: {0}")]
    BaselineBackend(BackendError),
    #[error("no number in [0, 100] for {label}, response {response}, after all re-asks")]
    BaselineParseFailure { label: String, response: usize },
}

fn summary(d: &[RejectedCandidate]) -> String {
    d.iter().map(|r| format!("; {}", r.diagnostic)).collect()
}
