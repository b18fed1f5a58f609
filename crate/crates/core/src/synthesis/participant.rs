use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stages::{stage_background, stage_inference, stage_model, stage_parse, Session, StageOutput, SynthesizedModel};
use super::{PipelineConfig, SynthesisError};
use crate::infer::PosteriorEstimate;
use crate::lm::{Backend, Message};
use crate::olympics::Vignette;
use crate::seed::{derive_seed, str_word};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantRun {
    pub participant_id: usize,
    pub vignette_id: String,
    pub seed: u64,
    /// Parse, background and model stages in order.
    pub stages: Vec<StageOutput>,
    pub model: SynthesizedModel,
    pub posterior: PosteriorEstimate,
    pub transcript: Vec<Message>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("participant {participant_id} on `{vignette_id}`: {source}")]
pub struct ParticipantError {
    pub participant_id: usize,
    pub vignette_id: String,
    pub source: SynthesisError,
    /// Everything exchanged before the failure.
    pub transcript: Vec<Message>,
}

/// The seed of one participant of one vignette.
pub fn participant_seed(seed: u64, vignette_id: &str, participant: usize) -> u64 {
    derive_seed(&[seed, str_word(vignette_id), participant as u64])
}

/// Build one model for the vignette and run inference in it.
pub fn simulate_participant(
    vignette: &Vignette,
    config: &PipelineConfig,
    backend: &dyn Backend,
    participant: usize,
    seed: u64,
) -> Result<ParticipantRun, ParticipantError> {
    let mut session = Session::new(vignette, config, backend, participant, seed);
    let result = (|| {
        let parse = stage_parse(&mut session)?;
        let background = stage_background(&mut session, &parse)?;
        let model = stage_model(&mut session, &parse, &background)?;
        let posterior = stage_inference(&model.model, config, derive_seed(&[seed, 0x696e_6665_72]))?;
        Ok::<_, SynthesisError>((vec![parse.output, background.output, model.output], model.model, posterior))
    })();
    match result {
        Ok((stages, model, posterior)) => Ok(ParticipantRun {
            participant_id: participant,
            vignette_id: vignette.id.clone(),
            seed,
            stages,
            model,
            posterior,
            transcript: session.into_transcript(),
        }),
        Err(source) => Err(ParticipantError {
            participant_id: participant,
            vignette_id: vignette.id.clone(),
            source,
            transcript: session.into_transcript(),
        }),
    }
}

#[derive(Debug, Clone)]
pub struct ParticipantOutcome {
    pub vignette_id: String,
    pub participant_id: usize,
    pub result: Result<ParticipantRun, ParticipantError>,
}

/// `n_participants` independent runs per vignette on the current rayon
/// pool, in (vignette, participant) order. A failing run never stops the
/// others.
pub fn run_experiment(
    vignettes: &[Vignette],
    config: &PipelineConfig,
    backend: &dyn Backend,
    seed: u64,
) -> Result<Vec<ParticipantOutcome>, SynthesisError> {
    config.validate().map_err(SynthesisError::Config)?;
    let jobs: Vec<(usize, usize)> = (0..vignettes.len())
        .flat_map(|v| (0..config.n_participants).map(move |p| (v, p)))
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(v, p)| {
            let vignette = &vignettes[v];
            let pseed = participant_seed(seed, &vignette.id, p);
            ParticipantOutcome {
                vignette_id: vignette.id.clone(),
                participant_id: p,
                result: simulate_participant(vignette, config, backend, p, pseed),
            }
        })
        .collect())
}
