use std::fmt::Write as _;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::topology::TopologySnapshot;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub symptom: String,
    pub hypothesis: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionPlan {
    pub layer: String,
    pub node: String,
    pub steps: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DiagnosisReport {
    pub symptom: String,
    pub hypotheses: Vec<Hypothesis>,
    pub action_steps: Vec<ActionPlan>,
    pub reasoning_chain: String,
    pub raw_model_output: String,
    pub parse_failed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Field {
    Symptom,
    Hypothesis,
    Steps,
    Reasoning,
}

struct Patterns {
    symptom: Regex,
    hypothesis: Regex,
    steps_on: Regex,
    steps: Regex,
    reasoning: Regex,
    bullet: Regex,
}

fn patterns() -> &'static Patterns {
    static P: OnceLock<Patterns> = OnceLock::new();
    P.get_or_init(|| Patterns {
        symptom: Regex::new(r"(?i)^symptoms?(?:\s*\d+)?\s*(?::|-|$)\s*(.*)$").unwrap(),
        hypothesis: Regex::new(r"(?i)^(?:(?:likely\s+)?root[\s-]*cause\s+)?hypothes[ie]s(?:\s*\d+)?\s*(?::|-|$)\s*(.*)$")
            .unwrap(),
        steps_on: Regex::new(r"(?i)^action\s+steps?\s+on\s+(?:the\s+)?(.+?)\s+layer\s+(?:node\s+)?(.+?)\s*:?\s*$").unwrap(),
        steps: Regex::new(r"(?i)^(?:recommended\s+)?action\s+steps?\s*(?::\s*(.*))?$").unwrap(),
        reasoning: Regex::new(r"(?i)^(?:reasoning(?:\s+chain)?|chain\s+of\s+thought)\s*(?::|-|$)\s*(.*)$").unwrap(),
        bullet: Regex::new(r"^(?:[-*+•]\s+|\d+[.)]\s+|\(\d+\)\s+)").unwrap(),
    })
}

/// Strips markdown emphasis, heading marks, quote marks and list numbering.
fn clean(line: &str) -> String {
    let mut s = line
        .trim()
        .trim_start_matches('>')
        .trim()
        .trim_start_matches('#')
        .trim()
        .to_string();
    s = s.replace("**", "").replace("__", "");
    let p = patterns();
    while let Some(m) = p.bullet.find(&s) {
        s = s[m.end()..].trim_start().to_string();
    }
    s.trim().to_string()
}

fn strip_bullet(line: &str) -> String {
    let mut s = line.trim().to_string();
    let p = patterns();
    while let Some(m) = p.bullet.find(&s) {
        s = s[m.end()..].trim_start().to_string();
    }
    s.replace("**", "")
}

fn push_text(target: &mut String, text: &str, sep: &str) {
    let text = text.trim();
    if text.is_empty() {
        return;
    }
    if !target.is_empty() {
        target.push_str(sep);
    }
    target.push_str(text);
}

/// Reads the labeled sections of a model answer. Never fails: text with no
/// hypothesis yields a report with `parse_failed` set and empty fields.
pub fn parse_report(text: &str) -> DiagnosisReport {
    let p = patterns();
    let mut symptoms: Vec<String> = Vec::new();
    let mut hypotheses: Vec<Hypothesis> = Vec::new();
    let mut plans: Vec<ActionPlan> = Vec::new();
    let mut reasoning = String::new();
    let mut current: Option<Field> = None;

    for raw in text.lines() {
        let line = clean(raw);
        if line.is_empty() {
            continue;
        }
        if let Some(c) = p.symptom.captures(&line) {
            symptoms.push(c[1].trim().to_string());
            current = Some(Field::Symptom);
        } else if let Some(c) = p.hypothesis.captures(&line) {
            hypotheses.push(Hypothesis {
                symptom: symptoms.last().cloned().unwrap_or_default(),
                hypothesis: c[1].trim().to_string(),
            });
            current = Some(Field::Hypothesis);
        } else if let Some(c) = p.steps_on.captures(&line) {
            plans.push(ActionPlan {
                layer: c[1].trim().to_string(),
                node: c[2].trim().trim_end_matches(':').trim().to_string(),
                steps: Vec::new(),
            });
            current = Some(Field::Steps);
        } else if let Some(c) = p.steps.captures(&line) {
            let mut plan = ActionPlan {
                layer: String::new(),
                node: String::new(),
                steps: Vec::new(),
            };
            if let Some(first) = c
                .get(1)
                .map(|m| m.as_str().trim())
                .filter(|t| !t.is_empty())
            {
                plan.steps.push(first.to_string());
            }
            plans.push(plan);
            current = Some(Field::Steps);
        } else if let Some(c) = p.reasoning.captures(&line) {
            push_text(&mut reasoning, &c[1], "\n");
            current = Some(Field::Reasoning);
        } else {
            match current {
                Some(Field::Symptom) => {
                    let last = symptoms.last_mut().expect("symptom open");
                    push_text(last, raw, " ");
                }
                Some(Field::Hypothesis) => {
                    let last = hypotheses.last_mut().expect("hypothesis open");
                    push_text(&mut last.hypothesis, raw, " ");
                }
                Some(Field::Steps) => {
                    let step = strip_bullet(raw);
                    if !step.is_empty() {
                        plans.last_mut().expect("plan open").steps.push(step);
                    }
                }
                Some(Field::Reasoning) => push_text(&mut reasoning, raw, "\n"),
                None => {}
            }
        }
    }

    plans.retain(|p| !p.steps.is_empty() || !p.node.is_empty());

    if hypotheses.is_empty() {
        return DiagnosisReport {
            raw_model_output: text.to_string(),
            parse_failed: true,
            ..DiagnosisReport::default()
        };
    }
    DiagnosisReport {
        symptom: symptoms.first().cloned().unwrap_or_default(),
        hypotheses,
        action_steps: plans,
        reasoning_chain: reasoning,
        raw_model_output: text.to_string(),
        parse_failed: false,
        notes: Vec::new(),
    }
}

/// Canonical text form of a report, readable by [`parse_report`].
pub fn render_report(r: &DiagnosisReport) -> String {
    let mut out = String::new();
    let mut last_symptom: Option<&str> = None;
    if r.hypotheses.is_empty() && !r.symptom.is_empty() {
        let _ = writeln!(out, "Symptom: {}", r.symptom);
    }
    for h in &r.hypotheses {
        if !h.symptom.is_empty() && last_symptom != Some(h.symptom.as_str()) {
            let _ = writeln!(out, "Symptom: {}", h.symptom);
            last_symptom = Some(&h.symptom);
        }
        let _ = writeln!(out, "Root cause hypothesis: {}", h.hypothesis);
    }
    for plan in &r.action_steps {
        if plan.layer.is_empty() {
            out.push_str("Action Steps:\n");
        } else {
            let _ = writeln!(
                out,
                "Action Steps on {} Layer Node {}:",
                plan.layer, plan.node
            );
        }
        for (i, step) in plan.steps.iter().enumerate() {
            let _ = writeln!(out, "{}. {}", i + 1, step);
        }
    }
    if !r.reasoning_chain.is_empty() {
        let _ = writeln!(out, "Reasoning: {}", r.reasoning_chain);
    }
    out
}

fn layer_key(name: &str) -> String {
    let lower = name.trim().to_ascii_lowercase();
    lower.strip_suffix('s').map(str::to_string).unwrap_or(lower)
}

impl DiagnosisReport {
    /// Maps action-step layers onto the snapshot's layer names (ignoring
    /// case and a plural `s`) and drops plans naming unknown layers, noting
    /// each drop.
    pub fn retain_known_layers(&mut self, s: &TopologySnapshot) {
        let mut kept = Vec::new();
        for mut plan in std::mem::take(&mut self.action_steps) {
            let wanted = layer_key(&plan.layer);
            match s.layers.iter().find(|l| layer_key(&l.name) == wanted) {
                Some(layer) => {
                    plan.layer = layer.name.clone();
                    kept.push(plan);
                }
                None => self.notes.push(format!(
                    "dropped action steps for unknown layer {:?} (node {:?})",
                    plan.layer, plan.node
                )),
            }
        }
        self.action_steps = kept;
    }

    /// Text compared against gold diagnoses in evaluation.
    pub fn evaluation_text(&self) -> String {
        if self.parse_failed {
            return self.raw_model_output.trim().to_string();
        }
        let mut out = String::new();
        for h in &self.hypotheses {
            if !h.symptom.is_empty() {
                let _ = writeln!(out, "Symptom: {}", h.symptom);
            }
            let _ = writeln!(out, "Root cause hypothesis: {}", h.hypothesis);
        }
        for plan in &self.action_steps {
            for step in &plan.steps {
                let _ = writeln!(out, "{step}");
            }
        }
        out.trim_end().to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANONICAL: &str = "Symptom: High Latency in the Application Layer.
Root cause hypothesis: High CPU utilization on the Gateway node gw-1.
Action Steps on Gateways Layer Node gw-1:
1. Reduce the CPU load on gw-1.
2. Implement load balancing across the Gateways nodes
Reasoning: CPU leads latency.
";

    #[test]
    fn canonical_text_round_trips() {
        let r = parse_report(CANONICAL);
        assert!(!r.parse_failed);
        assert_eq!(r.symptom, "High Latency in the Application Layer.");
        assert_eq!(r.hypotheses.len(), 1);
        assert_eq!(r.action_steps[0].layer, "Gateways");
        assert_eq!(r.action_steps[0].node, "gw-1");
        assert_eq!(r.action_steps[0].steps.len(), 2);
        assert_eq!(render_report(&r), CANONICAL);
        let again = parse_report(&render_report(&r));
        assert_eq!(again, r);
    }

    #[test]
    fn markdown_and_numbering_variants() {
        let text = "### 1. **Symptom:** Slow training iterations\n\
                    **Root Cause Hypothesis** - ACK timeouts on nic-1\n\
                    continued on a second line\n\n\
                    #### Action Steps on the NICs Layer Node nic-1\n\
                    - check the link\n\
                    * tune retries\n\
                    **Reasoning chain:** step one\n\
                    step two";
        let r = parse_report(text);
        assert!(!r.parse_failed);
        assert_eq!(r.symptom, "Slow training iterations");
        assert_eq!(
            r.hypotheses[0].hypothesis,
            "ACK timeouts on nic-1 continued on a second line"
        );
        assert_eq!(r.action_steps[0].layer, "NICs");
        assert_eq!(r.action_steps[0].node, "nic-1");
        assert_eq!(r.action_steps[0].steps, ["check the link", "tune retries"]);
        assert_eq!(r.reasoning_chain, "step one\nstep two");
    }

    #[test]
    fn one_hypothesis_per_symptom() {
        let text = "Symptom: latency\nHypothesis: cpu\nSymptom: retransmissions\nHypothesis: blackhole route\n";
        let r = parse_report(text);
        assert_eq!(r.hypotheses.len(), 2);
        assert_eq!(r.hypotheses[0].symptom, "latency");
        assert_eq!(r.hypotheses[1].symptom, "retransmissions");
        assert_eq!(r.hypotheses[1].hypothesis, "blackhole route");
    }

    #[test]
    fn unparseable_text_is_flagged() {
        for text in ["", "the model rambled without any labels"] {
            let r = parse_report(text);
            assert!(r.parse_failed);
            assert_eq!(r.raw_model_output, text);
            assert!(r.hypotheses.is_empty() && r.action_steps.is_empty() && r.symptom.is_empty());
        }
    }

    #[test]
    fn layer_names_are_matched_loosely() {
        let s = crate::faultlab::make_vista_topology(0);
        let mut r = parse_report(
            "Symptom: s\nHypothesis: h\nAction Steps on Gateway Layer Node gw:\n1. a\nAction Steps on Core Layer Node x:\n1. b\n",
        );
        r.retain_known_layers(&s);
        assert_eq!(r.action_steps.len(), 1);
        assert_eq!(r.action_steps[0].layer, "Gateways");
        assert_eq!(r.notes.len(), 1);
    }
}
