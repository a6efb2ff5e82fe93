//! Statistical and retrieval-augmented root cause analysis for layered
//! network topologies.

pub mod diagnosis;
pub mod evaluation;
pub mod faultlab;
pub mod pipeline;
pub mod retrieval;
pub mod statrca;
pub mod topology;

pub use diagnosis::{DiagnosisReport, EnsembleConfig, GenerationParams, LlmBackend, PromptMode};
pub use evaluation::{EvalCase, EvalResult, EvalSuite};
pub use faultlab::{ScenarioKind, ScenarioOutput, ScenarioSpec};
pub use pipeline::{AppConfig, Pipeline, PipelineError, PipelineResult};
pub use retrieval::{EmbeddingProvider, IncidentRecord, RetrievalResult, VectorIndex};
pub use statrca::{HealthReport, RankedCause, SeriesRef, StatConfig};
pub use topology::{GroundTruth, TopologySnapshot};
