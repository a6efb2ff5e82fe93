//! Scoring of predicted diagnoses against gold text: greedy token-matching
//! BERTScore and sentence-embedding cosine, plus the batch table harness.

mod table;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use table::{parse_table, render_table, TABLE_COLUMNS};

use crate::diagnosis::PromptMode;
use crate::retrieval::{cosine, trigram_vector, EmbeddingProvider, RetrievalError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{0} text has no tokens")]
    EmptyTokens(&'static str),
    #[error("token embedder returned {got} vectors for {expected} tokens")]
    VectorCount { expected: usize, got: usize },
    #[error(transparent)]
    Embedding(#[from] RetrievalError),
    #[error("evaluation suite needs at least one case")]
    NoCases,
}

/// Tokenizer plus per-token vectors.
pub trait TokenEmbedder: Send + Sync {
    fn tokenize(&self, text: &str) -> Vec<String>;
    fn embed_tokens(&self, tokens: &[String]) -> Vec<Vec<f64>>;
}

/// Lowercased alphanumeric tokens, each embedded as a hashed character
/// trigram vector. Context-free, so identical tokens match exactly.
#[derive(Debug, Clone)]
pub struct TrigramTokenEmbedder {
    pub dimension: usize,
}

impl Default for TrigramTokenEmbedder {
    fn default() -> Self {
        Self {
            dimension: crate::retrieval::TrigramProvider::DEFAULT_DIMENSION,
        }
    }
}

impl TokenEmbedder for TrigramTokenEmbedder {
    fn tokenize(&self, text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .collect()
    }

    fn embed_tokens(&self, tokens: &[String]) -> Vec<Vec<f64>> {
        tokens
            .iter()
            .map(|t| trigram_vector(t, self.dimension))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BertScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn unit_vectors(vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    vs.into_iter()
        .map(|v| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                v
            } else {
                v.into_iter().map(|x| x / norm).collect()
            }
        })
        .collect()
}

fn embed(
    text: &str,
    emb: &dyn TokenEmbedder,
    which: &'static str,
) -> Result<Vec<Vec<f64>>, EvalError> {
    let tokens = emb.tokenize(text);
    if tokens.is_empty() {
        return Err(EvalError::EmptyTokens(which));
    }
    let vectors = emb.embed_tokens(&tokens);
    if vectors.len() != tokens.len() {
        return Err(EvalError::VectorCount {
            expected: tokens.len(),
            got: vectors.len(),
        });
    }
    Ok(unit_vectors(vectors))
}

/// Greedy matching over the token cosine matrix, no IDF weighting.
/// A zero-norm token vector contributes similarity 0.
pub fn bertscore(
    candidate: &str,
    reference: &str,
    emb: &dyn TokenEmbedder,
) -> Result<BertScore, EvalError> {
    let cand = embed(candidate, emb, "candidate")?;
    let refs = embed(reference, emb, "reference")?;
    let sim: Vec<Vec<f64>> = cand
        .iter()
        .map(|c| {
            refs.iter()
                .map(|r| c.iter().zip(r).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    let precision = sim
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / cand.len() as f64;
    let recall = (0..refs.len())
        .map(|j| {
            sim.iter()
                .map(|row| row[j])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum::<f64>()
        / refs.len() as f64;
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(BertScore {
        precision,
        recall,
        f1,
    })
}

/// Cosine between the provider's sentence vectors.
pub fn sentence_cosine(
    candidate: &str,
    reference: &str,
    provider: &dyn EmbeddingProvider,
) -> Result<f64, EvalError> {
    let a = provider.embed(candidate)?;
    let b = provider.embed(reference)?;
    Ok(cosine(&a, &b)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalCase {
    pub usecase: String,
    pub predicted: String,
    pub gold: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub usecase: String,
    pub mode: PromptMode,
    pub bertscore_precision: f64,
    pub bertscore_recall: f64,
    pub bertscore_f1: f64,
    pub sbert_cosine: f64,
}

/// One table row; `result` is absent when the case could not be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub sno: usize,
    pub usecase: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<EvalResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSuite {
    pub mode: PromptMode,
    pub rows: Vec<EvalRow>,
}

impl EvalSuite {
    pub fn table(&self) -> String {
        render_table(self)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.result.is_none()).count()
    }
}

pub fn evaluate_case(
    case: &EvalCase,
    mode: PromptMode,
    emb: &dyn TokenEmbedder,
    provider: &dyn EmbeddingProvider,
) -> Result<EvalResult, EvalError> {
    let bs = bertscore(&case.predicted, &case.gold, emb)?;
    let sbert = sentence_cosine(&case.predicted, &case.gold, provider)?;
    Ok(EvalResult {
        usecase: case.usecase.clone(),
        mode,
        bertscore_precision: bs.precision,
        bertscore_recall: bs.recall,
        bertscore_f1: bs.f1,
        sbert_cosine: sbert,
    })
}

/// Scores every case (in parallel), keeping input order. A failing case
/// becomes a row with an error and does not stop the others.
pub fn run_eval_suite(
    cases: &[EvalCase],
    mode: PromptMode,
    emb: &dyn TokenEmbedder,
    provider: &dyn EmbeddingProvider,
) -> Result<EvalSuite, EvalError> {
    if cases.is_empty() {
        return Err(EvalError::NoCases);
    }
    let rows = cases
        .par_iter()
        .enumerate()
        .map(|(i, case)| {
            let (result, error) = match evaluate_case(case, mode, emb, provider) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            EvalRow {
                sno: i + 1,
                usecase: case.usecase.clone(),
                result,
                error,
            }
        })
        .collect();
    Ok(EvalSuite { mode, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::TrigramProvider;

    /// Fixed per-token vectors for hand-checked cases.
    struct Table(Vec<(&'static str, Vec<f64>)>);

    impl TokenEmbedder for Table {
        fn tokenize(&self, text: &str) -> Vec<String> {
            text.split_whitespace().map(str::to_string).collect()
        }
        fn embed_tokens(&self, tokens: &[String]) -> Vec<Vec<f64>> {
            tokens
                .iter()
                .map(|t| {
                    self.0
                        .iter()
                        .find(|(k, _)| k == t)
                        .map(|(_, v)| v.clone())
                        .unwrap()
                })
                .collect()
        }
    }

    #[test]
    fn identical_texts_score_one() {
        let e = TrigramTokenEmbedder::default();
        let t = "High CPU utilization on the Gateway node VistaDev-aws-us-west-2";
        let s = bertscore(t, t, &e).unwrap();
        for v in [s.precision, s.recall, s.f1] {
            assert!((v - 1.0).abs() < 1e-9);
        }
        let c = sentence_cosine(t, t, &TrigramProvider::default()).unwrap();
        assert!((c - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hand_built_vectors() {
        // candidate "a b", reference "a c d"; a.c = 0.6, b.d = 0.8, others 0
        let e = Table(vec![
            ("a", vec![1.0, 0.0, 0.0]),
            ("b", vec![0.0, 1.0, 0.0]),
            ("c", vec![0.6, 0.0, 0.8]),
            ("d", vec![0.0, 0.8, 0.6]),
        ]);
        let s = bertscore("a b", "a c d", &e).unwrap();
        // P = (max(1, .6, 0) + max(0, 0, .8)) / 2 = 0.9
        // R = (1 + .6 + .8) / 3 = 0.8
        assert!((s.precision - 0.9).abs() < 1e-12);
        assert!((s.recall - 0.8).abs() < 1e-12);
        assert!((s.f1 - 2.0 * 0.9 * 0.8 / 1.7).abs() < 1e-12);
        let back = bertscore("a c d", "a b", &e).unwrap();
        assert!((back.recall - s.precision).abs() < 1e-15);
    }

    #[test]
    fn disjoint_characters_have_low_sentence_cosine() {
        let c = sentence_cosine("abc abc abc", "xyz xyz", &TrigramProvider::default()).unwrap();
        assert!(c <= 0.05, "{c}");
    }

    #[test]
    fn empty_texts_are_rejected() {
        let e = TrigramTokenEmbedder::default();
        assert!(matches!(
            bertscore("", "x", &e),
            Err(EvalError::EmptyTokens("candidate"))
        ));
        assert!(matches!(
            bertscore("x", " .. ", &e),
            Err(EvalError::EmptyTokens("reference"))
        ));
    }

    #[test]
    fn suite_isolates_failures() {
        let cases = vec![
            EvalCase {
                usecase: "TGW Blackhole".into(),
                predicted: "route blackhole".into(),
                gold: "route blackhole".into(),
            },
            EvalCase {
                usecase: "Switch Congestion".into(),
                predicted: "".into(),
                gold: "congestion".into(),
            },
        ];
        let suite = run_eval_suite(
            &cases,
            PromptMode::FewShot,
            &TrigramTokenEmbedder::default(),
            &TrigramProvider::default(),
        )
        .unwrap();
        assert_eq!(suite.rows.len(), 2);
        assert_eq!(suite.failures(), 1);
        let r = suite.rows[0].result.as_ref().unwrap();
        assert!((r.bertscore_f1 - 1.0).abs() < 1e-9);
        assert!(suite.rows[1].error.is_some());
        let table = suite.table();
        assert!(table.lines().nth(2).unwrap().contains("1.00"));
        assert!(table.contains("failed"));
        assert!(matches!(
            run_eval_suite(
                &[],
                PromptMode::FewShot,
                &TrigramTokenEmbedder::default(),
                &TrigramProvider::default()
            ),
            Err(EvalError::NoCases)
        ));
    }
}
