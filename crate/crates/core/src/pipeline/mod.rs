//! End-to-end workflow: symptom summary, statistical ranking, exemplar
//! retrieval, prompt assembly and diagnosis.

mod config;

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{AppConfig, BackendConfig, ProviderConfig, StubKind, DEFAULT_BIND};

use crate::diagnosis::{
    build_prompt, diagnose, diagnostic_text, summarize_symptoms, topology_summary, BackendError,
    DiagnosisError, DiagnosisReport, EnsembleConfig, Exemplar, GenerationParams, LlmBackend,
    PromptInputs, PromptMode,
};
use crate::retrieval::{
    EmbeddingProvider, RetrievalError, RetrievalResult, VectorIndex, DEFAULT_EXEMPLARS,
};
use crate::statrca::{analyze, HealthReport, StatConfig, StatError};
use crate::topology::TopologySnapshot;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("few-shot mode needs a corpus")]
    MissingCorpus,
    #[error(transparent)]
    Stat(#[from] StatError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Diagnosis(DiagnosisError),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub micros: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub mode: PromptMode,
    pub topology_id: String,
    pub status: String,
    pub health_report: HealthReport,
    pub diagnosis: Option<DiagnosisReport>,
    pub retrieval_hits: Option<RetrievalResult>,
    pub prompt: Option<String>,
    /// Stages in execution order.
    pub timings: Vec<StageTiming>,
    /// Set when the model backend failed and only the statistical result
    /// is available.
    pub partial: bool,
    pub error: Option<String>,
}

impl PipelineResult {
    /// Zeroes every duration so that repeated runs serialize identically.
    pub fn without_timings(mut self) -> Self {
        for t in &mut self.timings {
            t.micros = 0;
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pipeline result serializes")
    }
}

fn is_backend_failure(e: &DiagnosisError) -> bool {
    matches!(
        e,
        DiagnosisError::Backend(_)
            | DiagnosisError::AllDraftsFailed(_)
            | DiagnosisError::EmptyResponse(_)
    )
}

struct Clock(Vec<StageTiming>);

impl Clock {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.push(StageTiming {
            stage: stage.to_string(),
            micros: start.elapsed().as_micros() as u64,
        });
        out
    }
}

/// Shared, read-only pipeline state; one instance serves concurrent runs.
#[derive(Clone)]
pub struct Pipeline {
    pub stat: StatConfig,
    pub ensemble: EnsembleConfig,
    pub generation: GenerationParams,
    pub retrieval_count: usize,
    pub domain_knowledge: String,
    backend: Arc<dyn LlmBackend>,
    provider: Arc<dyn EmbeddingProvider>,
    corpus: Option<Arc<VectorIndex>>,
}

impl Pipeline {
    pub fn new(backend: Arc<dyn LlmBackend>, provider: Arc<dyn EmbeddingProvider>) -> Self {
        Self {
            stat: StatConfig::default(),
            ensemble: EnsembleConfig::default(),
            generation: GenerationParams::default(),
            retrieval_count: DEFAULT_EXEMPLARS,
            domain_knowledge: String::new(),
            backend,
            provider,
            corpus: None,
        }
    }

    pub fn with_corpus(mut self, corpus: VectorIndex) -> Self {
        self.corpus = Some(Arc::new(corpus));
        self
    }

    pub fn from_config(cfg: &AppConfig) -> Result<Self, PipelineError> {
        cfg.validate()?;
        let mut p = Self::new(cfg.backend.build()?, cfg.provider.build()?);
        p.stat = cfg.stat.clone();
        p.ensemble = cfg.ensemble.clone();
        p.generation = cfg.generation.clone();
        p.retrieval_count = cfg.retrieval_count;
        p.domain_knowledge = cfg.domain_knowledge.clone();
        if let Some(path) = &cfg.corpus {
            p = p.with_corpus(VectorIndex::load(path)?);
        }
        Ok(p)
    }

    pub fn corpus(&self) -> Option<&VectorIndex> {
        self.corpus.as_deref()
    }

    pub fn backend(&self) -> &dyn LlmBackend {
        self.backend.as_ref()
    }

    /// summarize -> analyze -> retrieve (few-shot only) -> build_prompt ->
    /// diagnose. A backend failure yields `Ok` with `partial` set and the
    /// health report filled in; every other failure is an error.
    pub fn run(
        &self,
        snapshot: &TopologySnapshot,
        mode: PromptMode,
    ) -> Result<PipelineResult, PipelineError> {
        let corpus = match (mode, &self.corpus) {
            (PromptMode::FewShot, None) => return Err(PipelineError::MissingCorpus),
            (_, c) => c.as_deref(),
        };
        let mut clock = Clock(Vec::new());
        let backend = self.backend.as_ref();

        let summary = clock.time("summarize", || {
            summarize_symptoms(snapshot, backend, &self.generation, self.stat.z_threshold)
        });
        let analysis = clock.time("analyze", || analyze(snapshot, &self.stat))?;
        let partial = |clock: Clock,
                       err: DiagnosisError,
                       prompt: Option<String>,
                       hits: Option<RetrievalResult>|
         -> Result<PipelineResult, PipelineError> {
            Ok(PipelineResult {
                mode,
                topology_id: snapshot.topology_id.clone(),
                status: analysis.status_message(),
                health_report: analysis.report.clone(),
                diagnosis: None,
                retrieval_hits: hits,
                prompt,
                timings: clock.0,
                partial: true,
                error: Some(err.to_string()),
            })
        };
        let summary = match summary {
            Ok(s) => s,
            Err(e) if is_backend_failure(&e) => return partial(clock, e, None, None),
            Err(e) => return Err(PipelineError::Diagnosis(e)),
        };

        let (exemplars, hits) = match (mode, corpus) {
            (PromptMode::FewShot, Some(index)) => clock.time("retrieve", || {
                let query = diagnostic_text(snapshot, &analysis);
                let hits = index.query(&query, self.retrieval_count, self.provider.as_ref())?;
                let exemplars: Vec<Exemplar> = hits
                    .hits
                    .iter()
                    .filter_map(|h| index.get(&h.id))
                    .map(Exemplar::from)
                    .collect();
                Ok::<_, RetrievalError>((exemplars, Some(hits)))
            })?,
            _ => (Vec::new(), None),
        };

        let topo = topology_summary(snapshot);
        let bundle = clock
            .time("build_prompt", || {
                build_prompt(
                    &PromptInputs {
                        summary: &summary,
                        topology_summary: &topo,
                        report: &analysis.report,
                        exemplars: &exemplars,
                        domain_knowledge: &self.domain_knowledge,
                    },
                    mode,
                )
            })
            .map_err(PipelineError::Diagnosis)?;
        let prompt = bundle.render();

        let diagnosis = clock.time("diagnose", || {
            diagnose(&bundle, backend, &self.ensemble, &self.generation)
        });
        let mut report = match diagnosis {
            Ok(r) => r,
            Err(e) if is_backend_failure(&e) => return partial(clock, e, Some(prompt), hits),
            Err(e) => return Err(PipelineError::Diagnosis(e)),
        };
        report.retain_known_layers(snapshot);

        Ok(PipelineResult {
            mode,
            topology_id: snapshot.topology_id.clone(),
            status: analysis.status_message(),
            health_report: analysis.report,
            diagnosis: Some(report),
            retrieval_hits: hits,
            prompt: Some(prompt),
            timings: clock.0,
            partial: false,
            error: None,
        })
    }
}

/// Corpus entry for a snapshot and its ground truth, keyed by the
/// snapshot's diagnostic text.
pub fn corpus_record(
    snapshot: &TopologySnapshot,
    truth: &crate::topology::GroundTruth,
    stat: &StatConfig,
) -> Result<crate::retrieval::NewIncident, StatError> {
    let analysis = analyze(snapshot, stat)?;
    let mut metadata = std::collections::BTreeMap::new();
    metadata.insert("topology_id".to_string(), snapshot.topology_id.clone());
    metadata.insert("scenario".to_string(), truth.scenario_name.clone());
    Ok(crate::retrieval::NewIncident {
        id: None,
        diagnostic_text: diagnostic_text(snapshot, &analysis),
        gold_diagnosis: truth.gold_diagnosis.clone(),
        gold_action_steps: truth.gold_action_steps.clone(),
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnosis::StubBackend;
    use crate::faultlab::{generate_named, generate_scenario, list_scenarios};
    use crate::retrieval::TrigramProvider;

    fn corpus(provider: &TrigramProvider) -> VectorIndex {
        let mut idx = VectorIndex::new(provider);
        for spec in list_scenarios(100) {
            let out = generate_scenario(&spec).unwrap();
            let rec = corpus_record(&out.snapshot, &out.truth, &StatConfig::default()).unwrap();
            idx.add(rec, provider).unwrap();
        }
        idx
    }

    #[test]
    fn few_shot_with_gold_echo_returns_gold() {
        let provider = TrigramProvider::default();
        let out = generate_named("gateway-resource-contention", 0).unwrap();
        let p = Pipeline::new(
            Arc::new(StubBackend::fixed(out.truth.gold_diagnosis.clone())),
            Arc::new(provider.clone()),
        )
        .with_corpus(corpus(&provider));
        let r = p.run(&out.snapshot, PromptMode::FewShot).unwrap();
        assert!(!r.partial);
        let d = r.diagnosis.unwrap();
        assert_eq!(d.raw_model_output, out.truth.gold_diagnosis);
        let hits = r.retrieval_hits.unwrap();
        assert_eq!(hits.hits.len(), 3);
        let stages: Vec<&str> = r.timings.iter().map(|t| t.stage.as_str()).collect();
        assert_eq!(
            stages,
            [
                "summarize",
                "analyze",
                "retrieve",
                "build_prompt",
                "diagnose"
            ]
        );
        assert!(r.prompt.unwrap().contains("## Similar past incidents"));
    }

    #[test]
    fn zero_shot_prompt_has_no_exemplars() {
        let out = generate_named("tgw-blackhole", 0).unwrap();
        let p = Pipeline::new(
            Arc::new(StubBackend::template()),
            Arc::new(TrigramProvider::default()),
        );
        let r = p.run(&out.snapshot, PromptMode::ZeroShot).unwrap();
        assert!(!r
            .prompt
            .as_ref()
            .unwrap()
            .contains("Similar past incidents"));
        assert!(r.retrieval_hits.is_none());
        assert_eq!(r.health_report.top().unwrap().layer, "TGW");
        assert!(matches!(
            p.run(&out.snapshot, PromptMode::FewShot),
            Err(PipelineError::MissingCorpus)
        ));
    }

    #[test]
    fn backend_failure_keeps_the_health_report() {
        let out = generate_named("gateway-resource-contention", 0).unwrap();
        let p = Pipeline::new(
            Arc::new(StubBackend::failing("connection refused")),
            Arc::new(TrigramProvider::default()),
        );
        let r = p.run(&out.snapshot, PromptMode::ZeroShot).unwrap();
        assert!(r.partial);
        assert!(r.diagnosis.is_none());
        assert!(r.error.unwrap().contains("connection refused"));
        assert_eq!(
            r.health_report.top().unwrap().metric,
            "total_cpu_utilization"
        );
    }

    #[test]
    fn result_round_trips_through_json() {
        let out = generate_named("switch-congestion", 0).unwrap();
        let p = Pipeline::new(
            Arc::new(StubBackend::template()),
            Arc::new(TrigramProvider::default()),
        );
        let r = p.run(&out.snapshot, PromptMode::ZeroShot).unwrap();
        let back: PipelineResult = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
