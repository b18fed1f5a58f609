use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::blocks::{block, model_definitions, parse_background, parse_block, strip_fences, DependencyEdge, ParsedBlock};
use super::fixtures::{frame, Frame};
use super::prompt::{assemble_prompt, fingerprint, PromptContext};
use super::{PipelineConfig, Stage, SynthesisError};
use crate::infer::{run_rejection, CompiledProgram, InferError, PosteriorEstimate, RejectionConfig};
use crate::lang::{assemble_model, free_functions_in_program, parse_expression, parse_source, Expr, Origin, SourceProgram};
use crate::lm::{Backend, BackendError, CompletionRequest, Message};
use crate::olympics::Vignette;
use crate::seed::{derive_seed, str_word};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub text: String,
    /// Judge score; absent when the stage did not score.
    pub score: Option<f64>,
}

/// Why a generated candidate was discarded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    Malformed { message: String },
    Syntax { message: String },
    FreeFunctions { names: Vec<String> },
    Compile { message: String },
    Runtime { message: String },
    SmokeRejected { message: String },
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diagnostic::Malformed { message } => write!(f, "malformed output: {message}"),
            Diagnostic::Syntax { message } => write!(f, "syntax error: {message}"),
            Diagnostic::FreeFunctions { names } => write!(f, "undefined functions: {}", names.join(", ")),
            Diagnostic::Compile { message } => write!(f, "does not compile: {message}"),
            Diagnostic::Runtime { message } => write!(f, "smoke run failed: {message}"),
            Diagnostic::SmokeRejected { message } => write!(f, "smoke run rejected everything: {message}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedCandidate {
    pub text: String,
    pub diagnostic: Diagnostic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageOutput {
    pub stage: Stage,
    /// Well-formed candidates in generation order.
    pub candidates: Vec<Candidate>,
    pub selected_index: usize,
    pub prompt_fingerprint: String,
    /// Discarded generations, each of which triggered a re-sample.
    pub rejected: Vec<RejectedCandidate>,
}

impl StageOutput {
    pub fn selected(&self) -> &str {
        &self.candidates[self.selected_index].text
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledQuery {
    pub label: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesizedModel {
    pub pi_o: Vec<String>,
    pub pi_q: Vec<LabeledQuery>,
    /// The vignette background followed by the generated augmentation.
    pub b_aug: String,
    pub graph: Vec<DependencyEdge>,
    /// The synthesized definitions.
    pub pi_b: String,
    pub combined: SourceProgram,
}

impl SynthesizedModel {
    pub fn pi_o_exprs(&self) -> Vec<Expr> {
        self.pi_o.iter().map(|t| parse_expression(t).expect("checked when synthesized")).collect()
    }

    pub fn pi_q_exprs(&self) -> Vec<Expr> {
        self.pi_q.iter().map(|q| parse_expression(&q.text).expect("checked when synthesized")).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseResult {
    pub output: StageOutput,
    pub block: ParsedBlock,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundResult {
    pub output: StageOutput,
    pub augmented: String,
    pub graph: Vec<DependencyEdge>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelResult {
    pub output: StageOutput,
    pub model: SynthesizedModel,
}

/// One simulated participant's conversation with the backend.
///
/// Requests are tagged `stage|vignette|p<participant>|<n>` where `n` counts
/// that stage's requests, and every prompt and completion is appended to
/// the transcript in order.
pub struct Session<'a> {
    pub vignette: &'a Vignette,
    pub config: &'a PipelineConfig,
    pub backend: &'a dyn Backend,
    pub participant: usize,
    pub seed: u64,
    system: String,
    transcript: Vec<Message>,
    counters: BTreeMap<String, usize>,
}

impl<'a> Session<'a> {
    pub fn new(
        vignette: &'a Vignette,
        config: &'a PipelineConfig,
        backend: &'a dyn Backend,
        participant: usize,
        seed: u64,
    ) -> Self {
        Self::with_system(vignette, config, backend, participant, seed, frame(Frame::System).trim().to_string())
    }

    pub fn with_system(
        vignette: &'a Vignette,
        config: &'a PipelineConfig,
        backend: &'a dyn Backend,
        participant: usize,
        seed: u64,
        system: String,
    ) -> Self {
        Session {
            vignette,
            config,
            backend,
            participant,
            seed,
            transcript: vec![Message::system(system.clone())],
            system,
            counters: BTreeMap::new(),
        }
    }

    pub fn transcript(&self) -> &[Message] {
        &self.transcript
    }

    pub fn into_transcript(self) -> Vec<Message> {
        self.transcript
    }

    /// Send `turns` after the system prompt and return the single
    /// completion. Only the last turn and the reply are logged; callers
    /// carrying a conversation have logged the earlier turns already.
    pub fn ask(&mut self, kind: &str, turns: &[Message], temperature: f64, max_tokens: u32) -> Result<String, BackendError> {
        let n = self.counters.entry(kind.to_string()).or_insert(0);
        let tag = format!("{kind}|{}|p{}|{n}", self.vignette.id, self.participant);
        let request_seed = derive_seed(&[self.seed, str_word(kind), *n as u64]);
        *n += 1;
        let mut messages = vec![Message::system(self.system.clone())];
        messages.extend_from_slice(turns);
        let request = CompletionRequest {
            messages,
            temperature,
            n_candidates: 1,
            max_tokens,
            model_name: self.config.model_name.clone(),
            request_tag: tag,
            seed: Some(request_seed),
        };
        if let Some(last) = turns.last() {
            self.transcript.push(last.clone());
        }
        let reply = self.backend.complete(&request)?.swap_remove(0);
        self.transcript.push(Message::assistant(reply.clone()));
        Ok(reply)
    }

    fn prompt(&self, stage: Stage, context: &PromptContext<'_>) -> Result<String, SynthesisError> {
        assemble_prompt(stage, self.vignette, self.config, derive_seed(&[self.seed, 0x7072_6f6d_7074]), context)
    }
}

/// Lowest index among the maximal scores.
pub fn argmax_lowest(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

/// Ask the judge prompt for each candidate. A failed request or a reply
/// without an integer in 0..=100 scores 0.
pub fn score_candidates(session: &mut Session<'_>, stage: Stage, candidates: &[String], parse: Option<&str>) -> Vec<f64> {
    let (template, kind) = match stage {
        Stage::Parse => (frame(Frame::ScoreParse), "score_parse"),
        _ => (frame(Frame::ScoreBackground), "score_background"),
    };
    let scenario = session.vignette.task_text();
    candidates
        .iter()
        .map(|c| {
            let prompt = template
                .replace("<SCENARIO>", &scenario)
                .replace("<PARSE>", parse.unwrap_or(""))
                .replace("<CANDIDATE>", c.trim());
            let (t, max) = (session.config.judge_temperature, session.config.max_tokens.judge);
            session
                .ask(kind, &[Message::user(prompt)], t, max)
                .ok()
                .and_then(|reply| super::blocks::first_score(&reply))
                .map_or(0.0, f64::from)
        })
        .collect()
}

/// Generate `k` well-formed candidates, re-sampling malformed ones up to
/// `retry_limit` times, then score when `k > 1` and pick the best.
#[allow(clippy::too_many_arguments)]
fn generate_and_select<T>(
    session: &mut Session<'_>,
    stage: Stage,
    prompt: &str,
    k: usize,
    temperature: f64,
    max_tokens: u32,
    retry_limit: usize,
    parse_for_judge: Option<&str>,
    check: impl Fn(&str) -> Result<T, String>,
) -> Result<(StageOutput, Vec<T>), SynthesisError> {
    let mut accepted = Vec::new();
    let mut parsed = Vec::new();
    let mut rejected = Vec::new();
    while accepted.len() < k {
        let text = session
            .ask(stage.as_str(), &[Message::user(prompt)], temperature, max_tokens)
            .map_err(|source| SynthesisError::Backend { stage, source })?;
        match check(&text) {
            Ok(v) => {
                accepted.push(text);
                parsed.push(v);
            }
            Err(message) => {
                rejected.push(RejectedCandidate {
                    text,
                    diagnostic: Diagnostic::Malformed { message },
                });
                if rejected.len() > retry_limit {
                    break;
                }
            }
        }
    }
    if accepted.is_empty() {
        return Err(SynthesisError::StageFailure {
            stage,
            diagnostics: rejected,
        });
    }
    let scores: Vec<Option<f64>> = if accepted.len() > 1 {
        score_candidates(session, stage, &accepted, parse_for_judge)
            .into_iter()
            .map(Some)
            .collect()
    } else {
        vec![None]
    };
    let selected_index = argmax_lowest(&scores.iter().map(|s| s.unwrap_or(0.0)).collect::<Vec<_>>());
    let output = StageOutput {
        stage,
        candidates: accepted
            .into_iter()
            .zip(scores)
            .map(|(text, score)| Candidate { text, score })
            .collect(),
        selected_index,
        prompt_fingerprint: fingerprint(prompt),
        rejected,
    };
    Ok((output, parsed))
}

/// Number of conditions a vignette's parse must contain: one per
/// observation plus one for the commentary.
pub fn expected_conditions(v: &Vignette) -> usize {
    v.observations.len() + usize::from(v.commentary.is_some())
}

pub fn stage_parse(session: &mut Session<'_>) -> Result<ParseResult, SynthesisError> {
    let prompt = session.prompt(Stage::Parse, &PromptContext::default())?;
    let (nc, nq) = (expected_conditions(session.vignette), session.vignette.questions.len());
    let c = session.config;
    let (output, mut blocks) = generate_and_select(
        session,
        Stage::Parse,
        &prompt,
        c.k_parse,
        c.parse_temperature,
        c.max_tokens.parse,
        c.retry_limits.parse,
        None,
        |text| parse_block(text, nc, nq).map_err(|e| e.to_string()),
    )?;
    let block = blocks.swap_remove(output.selected_index);
    Ok(ParseResult { output, block })
}

/// The selected parse as code lines, for later prompts.
fn parse_code(parse: &ParseResult) -> String {
    let text = parse.output.selected();
    block(text, "LANGUAGE_TO_WEBPPL_CODE")
        .unwrap_or_else(|| strip_fences(text))
        .to_string()
}

pub fn stage_background(session: &mut Session<'_>, parse: &ParseResult) -> Result<BackgroundResult, SynthesisError> {
    let code = parse_code(parse);
    let context = PromptContext {
        parse: Some(&code),
        background: None,
    };
    let prompt = session.prompt(Stage::Background, &context)?;
    let c = session.config;
    let (output, mut parsed) = generate_and_select(
        session,
        Stage::Background,
        &prompt,
        c.k_relevance,
        c.relevance_temperature,
        c.max_tokens.background,
        c.retry_limits.background,
        Some(&code),
        |text| parse_background(text).map_err(|e| e.to_string()),
    )?;
    let (augmented, graph) = parsed.swap_remove(output.selected_index);
    Ok(BackgroundResult {
        output,
        augmented,
        graph,
    })
}

/// The executability gate: the assembled program parses, calls nothing
/// undefined, compiles and yields the smoke-run samples within budget.
pub fn gate(
    definitions: &str,
    parse: &ParsedBlock,
    labels: &[&str],
    config: &PipelineConfig,
    seed: u64,
) -> Result<(String, PosteriorEstimate), Diagnostic> {
    let queries: Vec<(String, String)> = labels
        .iter()
        .zip(&parse.queries)
        .map(|(l, q)| (l.to_string(), q.clone()))
        .collect();
    let combined = assemble_model(definitions, &parse.conditions, &queries);
    let program = parse_source(&combined).map_err(|d| Diagnostic::Syntax { message: d.to_string() })?;
    let free = free_functions_in_program(&program);
    if !free.is_empty() {
        return Err(Diagnostic::FreeFunctions { names: free });
    }
    let compiled = CompiledProgram::compile(&program).map_err(|e| Diagnostic::Compile { message: e.to_string() })?;
    let smoke = RejectionConfig {
        n_samples: config.smoke_samples,
        seed,
        max_attempts_per_sample: config.smoke_max_attempts,
        parallel: false,
    };
    match run_rejection(&compiled, &smoke) {
        Ok(p) => Ok((combined, p)),
        Err(e @ InferError::MaxRejections { .. }) => Err(Diagnostic::SmokeRejected { message: e.to_string() }),
        Err(e) => Err(Diagnostic::Runtime { message: e.to_string() }),
    }
}

/// Sample program candidates until one passes the gate; the first that
/// does is returned.
pub fn stage_model(
    session: &mut Session<'_>,
    parse: &ParseResult,
    background: &BackgroundResult,
) -> Result<ModelResult, SynthesisError> {
    let code = parse_code(parse);
    let context = PromptContext {
        parse: Some(&code),
        background: Some(background.output.selected()),
    };
    let prompt = session.prompt(Stage::Model, &context)?;
    let labels = session.vignette.labels();
    let c = session.config;
    let mut rejected = Vec::new();
    for attempt in 0..c.k_program_attempts {
        let text = session
            .ask(Stage::Model.as_str(), &[Message::user(prompt.as_str())], c.program_temperature, c.max_tokens.model)
            .map_err(|source| SynthesisError::Backend {
                stage: Stage::Model,
                source,
            })?;
        let defs = model_definitions(&text).to_string();
        let smoke_seed = derive_seed(&[session.seed, 0x736d_6f6b_65, attempt as u64]);
        match gate(&defs, &parse.block, &labels, c, smoke_seed) {
            Ok((combined, _)) => {
                let model = SynthesizedModel {
                    pi_o: parse.block.conditions.clone(),
                    pi_q: labels
                        .iter()
                        .zip(&parse.block.queries)
                        .map(|(l, q)| LabeledQuery {
                            label: l.to_string(),
                            text: q.clone(),
                        })
                        .collect(),
                    b_aug: format!("{}\n\n{}", session.vignette.background, background.augmented),
                    graph: background.graph.clone(),
                    pi_b: defs,
                    combined: SourceProgram::new(combined, Origin::Synthesized),
                };
                let output = StageOutput {
                    stage: Stage::Model,
                    candidates: vec![Candidate { text, score: None }],
                    selected_index: 0,
                    prompt_fingerprint: fingerprint(&prompt),
                    rejected,
                };
                return Ok(ModelResult { output, model });
            }
            Err(diagnostic) => rejected.push(RejectedCandidate { text, diagnostic }),
        }
    }
    Err(SynthesisError::StageFailure {
        stage: Stage::Model,
        diagnostics: rejected,
    })
}

/// Run the full sample budget on a synthesized model.
pub fn stage_inference(model: &SynthesizedModel, config: &PipelineConfig, seed: u64) -> Result<PosteriorEstimate, SynthesisError> {
    let program = parse_source(&model.combined.text).expect("gated programs parse");
    let compiled = CompiledProgram::compile(&program).map_err(SynthesisError::Inference)?;
    let rc = RejectionConfig {
        n_samples: config.k_samples,
        seed,
        max_attempts_per_sample: config.max_attempts_per_sample,
        parallel: false,
    };
    run_rejection(&compiled, &rc).map_err(SynthesisError::Inference)
}
