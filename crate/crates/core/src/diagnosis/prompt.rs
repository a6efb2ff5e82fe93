use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::backend::{GenerationParams, LlmBackend};
use super::{DiagnosisError, PromptMode};
use crate::retrieval::IncidentRecord;
use crate::statrca::{max_abs_zscore, Analysis, HealthReport};
use crate::topology::TopologySnapshot;

/// Upper bound on a rendered prompt, in characters.
pub const MAX_PROMPT_CHARS: usize = 256_000;

pub(crate) const SUMMARY_TASK: &str =
    "Task: describe the current state of the application-layer telemetry and call out every anomalous metric.";
pub(crate) const SUMMARY_ANOMALY_HEADER: &str = "Anomalous application metrics:";
pub(crate) const HEALTH_REPORT_TITLE: &str = "Statistical health report";
pub(crate) const SYMPTOM_TITLE: &str = "Symptom description";
pub(crate) const AGGREGATOR_DRAFTS_HEADER: &str = "## Candidate diagnoses";

const ROLE_TEXT: &str = "You are a network root cause analysis assistant working with an on-call engineer. \
Diagnose the incident described below, identify the most likely root cause and recommend concrete action steps.";

const CHAIN_OF_THOUGHT_TEXT: &str = "Think step by step before answering. Start from the symptom, list the \
candidate hypotheses suggested by the health report, check each one against the topology and any similar past \
incidents, discard the ones that do not fit, and only then write the final answer.";

const OUTPUT_FORMAT_TEXT: &str = "Answer using exactly these labeled lines:
Symptom: <one application-layer symptom>
Root cause hypothesis: <the most likely root cause of that symptom>
Repeat the Symptom and Root cause hypothesis pair for every distinct symptom.
Action Steps on <Layer> Layer Node <node>:
1. <first step>
2. <next step>
Write one Action Steps block per node that needs intervention, using layer names from the topology.
Reasoning: <the reasoning that led to the hypothesis>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionKind {
    Role,
    DomainKnowledge,
    TopologySummary,
    Symptom,
    HealthReport,
    Exemplars,
    ChainOfThought,
    OutputFormat,
}

impl SectionKind {
    pub const ORDER: [SectionKind; 8] = [
        SectionKind::Role,
        SectionKind::DomainKnowledge,
        SectionKind::TopologySummary,
        SectionKind::Symptom,
        SectionKind::HealthReport,
        SectionKind::Exemplars,
        SectionKind::ChainOfThought,
        SectionKind::OutputFormat,
    ];

    pub fn title(self) -> &'static str {
        match self {
            SectionKind::Role => "Role",
            SectionKind::DomainKnowledge => "Operator domain knowledge",
            SectionKind::TopologySummary => "Topology",
            SectionKind::Symptom => SYMPTOM_TITLE,
            SectionKind::HealthReport => HEALTH_REPORT_TITLE,
            SectionKind::Exemplars => "Similar past incidents",
            SectionKind::ChainOfThought => "Reasoning instructions",
            SectionKind::OutputFormat => "Output format",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptSection {
    pub kind: SectionKind,
    pub body: String,
}

/// The assembled prompt: every section kind exactly once, in fixed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub mode: PromptMode,
    pub sections: Vec<PromptSection>,
}

impl PromptBundle {
    pub fn section(&self, kind: SectionKind) -> &str {
        self.sections
            .iter()
            .find(|s| s.kind == kind)
            .map(|s| s.body.as_str())
            .unwrap_or("")
    }

    pub fn non_empty_sections(&self) -> usize {
        self.sections
            .iter()
            .filter(|s| !s.body.trim().is_empty())
            .count()
    }

    /// Prompt text; empty sections are omitted.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in self.sections.iter().filter(|s| !s.body.trim().is_empty()) {
            if !out.is_empty() {
                out.push('\n');
            }
            let _ = writeln!(out, "## {}\n{}", s.kind.title(), s.body.trim_end());
        }
        out
    }
}

/// A retrieved past incident shown to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exemplar {
    pub id: String,
    pub diagnostic_text: String,
    pub gold_diagnosis: String,
    pub gold_action_steps: Vec<String>,
}

impl From<&IncidentRecord> for Exemplar {
    fn from(r: &IncidentRecord) -> Self {
        Self {
            id: r.id.clone(),
            diagnostic_text: r.diagnostic_text.clone(),
            gold_diagnosis: r.gold_diagnosis.clone(),
            gold_action_steps: r.gold_action_steps.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PromptInputs<'a> {
    pub summary: &'a str,
    pub topology_summary: &'a str,
    pub report: &'a HealthReport,
    pub exemplars: &'a [Exemplar],
    pub domain_knowledge: &'a str,
}

// keeps embedded text from opening a new top-level section
fn defuse_headers(text: &str) -> String {
    text.lines()
        .map(|l| {
            if l.starts_with("## ") {
                format!(" {l}")
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Top `k` rows of the report as a table; the rank-1 rows carry `1*`.
pub fn render_health_table(report: &HealthReport) -> String {
    if report.is_empty() {
        return "The statistical analysis found no anomalous series to rank.".to_string();
    }
    let mut out = String::from("Rows marked 1* hold the top-ranked root cause.\n");
    out.push_str(
        "| Rank | Layer | Node | Metric | Score |\n|------|-------|------|--------|-------|\n",
    );
    for c in report.ranked_causes.iter().take(report.k.max(1)) {
        let rank = if c.rank == 1 {
            "1*".to_string()
        } else {
            c.rank.to_string()
        };
        let _ = writeln!(
            out,
            "| {rank} | {} | {} | {} | {:.6} |",
            c.layer, c.node, c.metric, c.score
        );
    }
    out
}

fn render_exemplars(exemplars: &[Exemplar]) -> String {
    let mut out = String::new();
    for (i, ex) in exemplars.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "### Incident {} ({})", i + 1, ex.id);
        let _ = writeln!(
            out,
            "Diagnostic information:\n{}",
            defuse_headers(ex.diagnostic_text.trim())
        );
        let _ = writeln!(
            out,
            "Diagnosis:\n{}",
            defuse_headers(ex.gold_diagnosis.trim())
        );
        out.push_str("Action steps:\n");
        for (j, step) in ex.gold_action_steps.iter().enumerate() {
            let _ = writeln!(out, "{}. {}", j + 1, defuse_headers(step.trim()));
        }
    }
    out
}

pub fn build_prompt(
    inputs: &PromptInputs<'_>,
    mode: PromptMode,
) -> Result<PromptBundle, DiagnosisError> {
    if mode == PromptMode::FewShot && inputs.exemplars.is_empty() {
        return Err(DiagnosisError::MissingExemplars);
    }
    let body = |kind: SectionKind| -> String {
        match kind {
            SectionKind::Role => ROLE_TEXT.to_string(),
            SectionKind::DomainKnowledge => defuse_headers(inputs.domain_knowledge.trim()),
            SectionKind::TopologySummary => defuse_headers(inputs.topology_summary.trim()),
            SectionKind::Symptom => defuse_headers(inputs.summary.trim()),
            SectionKind::HealthReport => render_health_table(inputs.report),
            SectionKind::Exemplars => match mode {
                PromptMode::FewShot => render_exemplars(inputs.exemplars),
                PromptMode::ZeroShot => String::new(),
            },
            SectionKind::ChainOfThought => CHAIN_OF_THOUGHT_TEXT.to_string(),
            SectionKind::OutputFormat => OUTPUT_FORMAT_TEXT.to_string(),
        }
    };
    let bundle = PromptBundle {
        mode,
        sections: SectionKind::ORDER
            .into_iter()
            .map(|kind| PromptSection {
                kind,
                body: body(kind),
            })
            .collect(),
    };
    let len = bundle.render().chars().count();
    if len > MAX_PROMPT_CHARS {
        return Err(DiagnosisError::PromptTooLong {
            len,
            max: MAX_PROMPT_CHARS,
        });
    }
    Ok(bundle)
}

/// Short deterministic description of the layers, nodes and links.
pub fn topology_summary(s: &TopologySnapshot) -> String {
    let mut out = format!(
        "Topology {} captured at {} ({} samples every {} s).\nLayers from application to infrastructure:\n",
        s.topology_id,
        s.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        s.series_len(),
        s.interval_seconds().unwrap_or(0.0)
    );
    for layer in s.layers_by_rank() {
        let nodes: Vec<&str> = s
            .nodes_in_layer(&layer.name)
            .map(|n| n.id.as_str())
            .collect();
        let _ = writeln!(
            out,
            "- {} (rank {}): {}",
            layer.name,
            layer.rank,
            nodes.join(", ")
        );
    }
    if !s.edges.is_empty() {
        let links: Vec<String> = s
            .edges
            .iter()
            .map(|e| format!("{} -> {}", e.source, e.target))
            .collect();
        let _ = writeln!(out, "Links: {}", links.join("; "));
    }
    out
}

/// Text used both to index incidents and to query for similar ones. Built
/// from the snapshot and the statistical result only, so it does not depend
/// on model output.
pub fn diagnostic_text(s: &TopologySnapshot, analysis: &Analysis) -> String {
    let layers: Vec<&str> = s.layers_by_rank().iter().map(|l| l.name.as_str()).collect();
    let mut out = format!(
        "Topology {} with layers {}.\n",
        s.topology_id,
        layers.join(", ")
    );
    if analysis.anomalies.anomalies.is_empty() {
        out.push_str("Anomalous series: none.\n");
    } else {
        let list: Vec<String> = analysis
            .anomalies
            .anomalies
            .iter()
            .map(|r| r.to_string())
            .collect();
        let _ = writeln!(out, "Anomalous series: {}.", list.join("; "));
    }
    if analysis.report.is_empty() {
        out.push_str("Ranked causes: none.\n");
    } else {
        let list: Vec<String> = analysis
            .report
            .ranked_causes
            .iter()
            .map(|c| format!("rank {} {}/{}/{}", c.rank, c.layer, c.node, c.metric))
            .collect();
        let _ = writeln!(out, "Ranked causes: {}.", list.join("; "));
    }
    out
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

/// The intermediate prompt sent by [`summarize_symptoms`]. Only the
/// application layer (rank 0) is described.
pub fn symptom_prompt(s: &TopologySnapshot, z_threshold: f64) -> Result<String, DiagnosisError> {
    let app = s
        .layer_by_rank(0)
        .ok_or(DiagnosisError::NoApplicationLayer)?;
    let mut anomalous = Vec::new();
    let mut all = Vec::new();
    for node in s.nodes_in_layer(&app.name) {
        for m in node.metrics.values() {
            let z = max_abs_zscore(&m.values);
            let flagged = match m.anomalous {
                Some(flag) => flag,
                None => z.is_some_and(|z| z > z_threshold),
            };
            let tail = &m.values[m.values.len() - (m.values.len() / 4).max(1)..];
            let z_text = z.map_or("n/a".to_string(), |z| format!("{z:.2}"));
            if flagged {
                anomalous.push(format!(
                    "- {} {}: overall mean {:.3} {unit}, recent mean {:.3} {unit}, max |z| {z_text}",
                    node.id,
                    m.name,
                    mean(&m.values),
                    mean(tail),
                    unit = m.unit
                ));
            }
            let (min, max) = m
                .values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(*v), hi.max(*v))
                });
            all.push(format!(
                "- {} {} ({}): mean {:.3}, min {:.3}, max {:.3}, last {:.3}",
                node.id,
                m.name,
                m.unit,
                mean(&m.values),
                min,
                max,
                m.values.last().copied().unwrap_or(f64::NAN)
            ));
        }
    }
    let mut out = String::from("You are assisting a network on-call engineer.\n");
    out.push_str(SUMMARY_TASK);
    out.push('\n');
    let _ = writeln!(
        out,
        "Topology {}; application layer {}; {} samples every {} s.",
        s.topology_id,
        app.name,
        s.series_len(),
        s.interval_seconds().unwrap_or(0.0)
    );
    out.push_str(SUMMARY_ANOMALY_HEADER);
    out.push('\n');
    if anomalous.is_empty() {
        out.push_str("- none\n");
    } else {
        for line in &anomalous {
            out.push_str(line);
            out.push('\n');
        }
    }
    out.push_str("\nAll application metrics:\n");
    for line in &all {
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(
        "\nRespond with a short paragraph that names each anomalous metric and its node.\n",
    );
    Ok(out)
}

/// One model call summarizing the application-layer symptoms.
pub fn summarize_symptoms(
    s: &TopologySnapshot,
    backend: &dyn LlmBackend,
    params: &GenerationParams,
    z_threshold: f64,
) -> Result<String, DiagnosisError> {
    let prompt = symptom_prompt(s, z_threshold)?;
    let text = backend.generate(&prompt, params)?;
    let text = text.trim();
    if text.is_empty() {
        return Err(DiagnosisError::EmptyResponse("symptom summary"));
    }
    Ok(text.to_string())
}
