use serde::{Deserialize, Serialize};

use crate::olympics::Experiment;

/// Budgets and sampling settings for one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub k_parse: usize,
    pub parse_temperature: f64,
    pub k_relevance: usize,
    pub relevance_temperature: f64,
    pub k_program_attempts: usize,
    pub program_temperature: f64,
    /// Temperature of the judge prompts behind candidate scoring.
    pub judge_temperature: f64,
    pub k_samples: usize,
    pub n_participants: usize,
    pub max_attempts_per_sample: u64,
    pub smoke_samples: usize,
    pub smoke_max_attempts: u64,
    /// Example fixture ids that may be injected into prompts.
    pub example_pool: Vec<String>,
    pub retry_limits: RetryLimits,
    pub max_tokens: MaxTokens,
    /// Empty means the backend's default model.
    pub model_name: String,
}

/// Re-samples allowed per stage after malformed output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetryLimits {
    pub parse: usize,
    pub background: usize,
}

impl Default for RetryLimits {
    fn default() -> Self {
        RetryLimits { parse: 5, background: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaxTokens {
    pub parse: u32,
    pub background: u32,
    pub model: u32,
    pub judge: u32,
    pub baseline: u32,
}

impl Default for MaxTokens {
    fn default() -> Self {
        MaxTokens {
            parse: 1024,
            background: 2048,
            model: 4096,
            judge: 16,
            baseline: 512,
        }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k_parse: 1,
            parse_temperature: 0.2,
            k_relevance: 8,
            relevance_temperature: 0.5,
            k_program_attempts: 5,
            program_temperature: 0.2,
            judge_temperature: 0.0,
            k_samples: 1000,
            n_participants: 10,
            max_attempts_per_sample: crate::infer::DEFAULT_MAX_ATTEMPTS_PER_SAMPLE,
            smoke_samples: 10,
            smoke_max_attempts: 50_000,
            example_pool: ["tug_of_war", "canoe_racing", "biathlon", "diving", "exam"]
                .map(String::from)
                .to_vec(),
            retry_limits: RetryLimits::default(),
            max_tokens: MaxTokens::default(),
            model_name: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid pipeline config: {0}")]
pub struct ConfigError(pub String);

impl PipelineConfig {
    /// Defaults for an experiment: e3 halves the sample budget and swaps in
    /// the commentary examples without the exam domain.
    pub fn for_experiment(experiment: Experiment) -> Self {
        let mut c = PipelineConfig::default();
        if experiment == Experiment::E3 {
            c.k_samples = 500;
            c.example_pool = [
                "tug_of_war_commentary",
                "canoe_racing_commentary",
                "biathlon_commentary",
                "diving_commentary",
            ]
            .map(String::from)
            .to_vec();
        }
        c
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let counts = [
            ("k_parse", self.k_parse),
            ("k_relevance", self.k_relevance),
            ("k_program_attempts", self.k_program_attempts),
            ("k_samples", self.k_samples),
            ("n_participants", self.n_participants),
            ("smoke_samples", self.smoke_samples),
        ];
        for (name, n) in counts {
            if n == 0 {
                return Err(ConfigError(format!("{name} must be at least 1")));
            }
        }
        if self.max_attempts_per_sample == 0 || self.smoke_max_attempts == 0 {
            return Err(ConfigError("attempt budgets must be at least 1".into()));
        }
        let temps = [
            ("parse_temperature", self.parse_temperature),
            ("relevance_temperature", self.relevance_temperature),
            ("program_temperature", self.program_temperature),
            ("judge_temperature", self.judge_temperature),
        ];
        for (name, t) in temps {
            if !(0.0..=2.0).contains(&t) {
                return Err(ConfigError(format!("{name} must lie in [0, 2], got {t}")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let c: PipelineConfig = serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }
}
