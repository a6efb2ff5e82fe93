use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::backend::{GenerationParams, LlmBackend};
use super::prompt::{PromptBundle, AGGREGATOR_DRAFTS_HEADER};
use super::report::{parse_report, DiagnosisReport};
use super::DiagnosisError;

/// Temperature of the aggregator call.
pub const AGGREGATOR_TEMPERATURE: f64 = 0.0;

const CONSENSUS_TEXT: &str = "The drafts above were written independently for the same incident. Compare their \
hypotheses, keep the root cause that is best supported by the health report and by the majority of drafts, merge \
their action steps without duplicates, and answer once in the required output format.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub num_agents: usize,
    pub aggregator: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            num_agents: 3,
            aggregator: true,
        }
    }
}

impl EnsembleConfig {
    pub fn single() -> Self {
        Self {
            num_agents: 1,
            aggregator: false,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.num_agents == 0 {
            return Err("num_agents must be at least 1".into());
        }
        Ok(())
    }

    pub fn aggregates(&self) -> bool {
        self.aggregator && self.num_agents > 1
    }
}

/// Prompt for the aggregator: the original prompt, every draft verbatim in
/// agent order, then the consensus instruction.
pub fn aggregator_prompt(prompt: &str, drafts: &[String]) -> String {
    let mut out =
        String::with_capacity(prompt.len() + drafts.iter().map(String::len).sum::<usize>() + 512);
    out.push_str(prompt.trim_end());
    out.push_str("\n\n");
    out.push_str(AGGREGATOR_DRAFTS_HEADER);
    out.push('\n');
    for (i, d) in drafts.iter().enumerate() {
        let _ = writeln!(out, "### Draft {}\n{}", i + 1, d.trim_end());
    }
    let _ = writeln!(out, "\n## Consensus instruction\n{CONSENSUS_TEXT}");
    out
}

/// Runs `num_agents` draft generations concurrently, optionally merges them
/// with one aggregator call, and parses the final answer.
///
/// Failed drafts are dropped as long as one survives. If the aggregator call
/// fails, the first surviving draft is used and the failure is noted.
pub fn diagnose(
    bundle: &PromptBundle,
    backend: &dyn LlmBackend,
    ens: &EnsembleConfig,
    params: &GenerationParams,
) -> Result<DiagnosisReport, DiagnosisError> {
    ens.validate().map_err(DiagnosisError::InvalidConfig)?;
    let prompt = bundle.render();

    let results: Vec<_> = if ens.num_agents == 1 {
        vec![backend.generate(&prompt, params)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..ens.num_agents)
                .map(|_| scope.spawn(|| backend.generate(&prompt, params)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("draft thread panicked"))
                .collect()
        })
    };

    let mut notes = Vec::new();
    let mut drafts = Vec::new();
    let mut errors = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(text) => drafts.push(text),
            Err(e) => {
                notes.push(format!("draft {} failed: {e}", i + 1));
                errors.push(e.to_string());
            }
        }
    }
    if drafts.is_empty() {
        return Err(DiagnosisError::AllDraftsFailed(errors));
    }

    let final_text = if ens.aggregates() && drafts.len() > 1 {
        let agg_prompt = aggregator_prompt(&prompt, &drafts);
        match backend.generate(
            &agg_prompt,
            &params.with_temperature(AGGREGATOR_TEMPERATURE),
        ) {
            Ok(text) => text,
            Err(e) => {
                notes.push(format!("aggregator failed, using draft 1: {e}"));
                drafts.swap_remove(0)
            }
        }
    } else {
        drafts.swap_remove(0)
    };

    let mut report = parse_report(&final_text);
    report.notes.extend(notes);
    Ok(report)
}
