use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::fixtures::{example, frame, ExampleFixture, Frame, EXAMPLES_TOKEN};
use super::{PipelineConfig, Stage, SynthesisError};
use crate::olympics::{BackgroundKind, Experiment, Sport, Vignette};
use crate::seed::derive_seed;

/// Earlier-stage outputs a prompt refers to.
#[derive(Debug, Clone, Copy, Default)]
pub struct PromptContext<'a> {
    /// The selected parse block, without its markers.
    pub parse: Option<&'a str>,
    /// The selected background candidate, markers included.
    pub background: Option<&'a str>,
}

/// Whether a vignette belongs to the commentary experiment, which drops the
/// exam domain from the examples.
pub fn commentary_mode(v: &Vignette) -> bool {
    v.experiment == Some(Experiment::E3)
        || v.commentary.is_some()
        || v.background_kind == BackgroundKind::UnderspecifiedWithCommentary
}

/// Example text cut after the section a stage needs.
pub fn truncate_example(text: &str, stage: Stage) -> &str {
    let marker = match stage {
        Stage::Parse => "<END_LANGUAGE_TO_WEBPPL_CODE>",
        Stage::Background => "<END_DEPENDENCY_GRAPH>",
        Stage::Model | Stage::Inference => return text.trim_end(),
    };
    match text.find(marker) {
        Some(i) => &text[..i + marker.len()],
        None => text.trim_end(),
    }
}

/// The examples a vignette may see, in pool order: every pooled fixture
/// whose domain is not the vignette's sport, minus exam in commentary mode.
pub fn eligible_examples(v: &Vignette, config: &PipelineConfig) -> Result<Vec<&'static ExampleFixture>, SynthesisError> {
    let pool = config
        .example_pool
        .iter()
        .map(|id| example(id).ok_or_else(|| SynthesisError::MissingFixture(id.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let e3 = commentary_mode(v);
    let mut required: Vec<&str> = Sport::ALL.iter().map(|s| s.as_str()).collect();
    required.push("diving");
    if !e3 {
        required.push("exam");
    }
    for domain in required {
        if !pool.iter().any(|e| e.domain == domain) {
            return Err(SynthesisError::MissingFixture(domain.to_string()));
        }
    }
    Ok(pool
        .into_iter()
        .filter(|e| e.domain != v.sport.as_str() && !(e3 && e.domain == "exam"))
        .collect())
}

/// The user prompt for a generation stage.
pub fn assemble_prompt(
    stage: Stage,
    vignette: &Vignette,
    config: &PipelineConfig,
    seed: u64,
    context: &PromptContext<'_>,
) -> Result<String, SynthesisError> {
    let template = match stage {
        Stage::Parse => frame(Frame::Parse),
        Stage::Background => frame(Frame::Background),
        Stage::Model => frame(Frame::Model),
        Stage::Inference => return Err(SynthesisError::NoPrompt(stage)),
    };
    let mut examples = eligible_examples(vignette, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, stage as u64]));
    examples.shuffle(&mut rng);
    let injected: Vec<&str> = examples.iter().map(|e| truncate_example(e.text, stage)).collect();
    Ok(template
        .replace(EXAMPLES_TOKEN, &injected.join("\n\n"))
        .replace("<SCENARIO>", &vignette.task_text())
        .replace("<PARSE>", context.parse.unwrap_or(""))
        .replace("<BACKGROUND_AND_GRAPH>", context.background.unwrap_or("")))
}

pub fn fingerprint(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}
