//! Prompt assembly, model backends, the mixture-of-agents ensemble and
//! parsing of the model's answer into a structured report.

mod backend;
mod ensemble;
mod prompt;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use backend::{
    prompt_hash, BackendError, GenerationParams, HttpBackend, LlmBackend, ReplayBackend,
    ReplayMode, StubBackend, ENV_LLM_API_KEY, ENV_LLM_URL,
};
pub use ensemble::{aggregator_prompt, diagnose, EnsembleConfig, AGGREGATOR_TEMPERATURE};
pub use prompt::{
    build_prompt, diagnostic_text, render_health_table, summarize_symptoms, symptom_prompt,
    topology_summary, Exemplar, PromptBundle, PromptInputs, PromptSection, SectionKind,
    MAX_PROMPT_CHARS,
};
pub use report::{parse_report, render_report, ActionPlan, DiagnosisReport, Hypothesis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    FewShot,
    ZeroShot,
}

impl fmt::Display for PromptMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PromptMode::FewShot => "few_shot",
            PromptMode::ZeroShot => "zero_shot",
        })
    }
}

impl FromStr for PromptMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "few_shot" | "fewshot" | "few" => Ok(PromptMode::FewShot),
            "zero_shot" | "zeroshot" | "zero" => Ok(PromptMode::ZeroShot),
            other => Err(format!(
                "unknown mode {other:?}; expected few_shot or zero_shot"
            )),
        }
    }
}

#[derive(Debug, Error)]
pub enum DiagnosisError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("every draft failed: {}", .0.join("; "))]
    AllDraftsFailed(Vec<String>),
    #[error("few-shot mode needs at least one exemplar")]
    MissingExemplars,
    #[error("prompt has {len} characters, limit is {max}")]
    PromptTooLong { len: usize, max: usize },
    #[error("snapshot has no application layer (rank 0)")]
    NoApplicationLayer,
    #[error("backend returned an empty {0}")]
    EmptyResponse(&'static str),
    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),
}
