//! Statistical root-cause ranking.
//!
//! Anomalous series are extracted from a snapshot, every ordered pair is
//! tested for Granger causality, significant directions become weighted
//! edges (|Pearson r|), and PageRank on the reversed graph ranks the
//! upstream causes.

mod anomaly;
mod config;
mod granger;
mod graph;
pub mod ols;
mod pagerank;
mod pearson;
mod report;
pub mod special;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use anomaly::{extract_anomalies, max_abs_zscore, AnomalyScan};
pub use config::StatConfig;
pub use granger::{granger_test, GrangerOutcome};
pub use graph::{build_causal_graph, CausalEdge, CausalGraph};
pub use pagerank::{pagerank_rank, weighted_pagerank};
pub use pearson::pearson;
pub use report::{HealthReport, RankedCause};

use crate::topology::TopologySnapshot;

#[derive(Debug, Error)]
pub enum StatError {
    #[error("invalid statistical configuration: {0}")]
    InvalidConfig(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("degenerate series: {0}")]
    Degenerate(String),
    #[error("series lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("unknown series {0}")]
    UnknownSeries(String),
}

/// A (layer, node, metric) coordinate in a snapshot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeriesRef {
    pub layer: String,
    #[serde(rename = "node")]
    pub node_id: String,
    pub metric: String,
}

impl SeriesRef {
    pub fn new(
        layer: impl Into<String>,
        node_id: impl Into<String>,
        metric: impl Into<String>,
    ) -> Self {
        Self {
            layer: layer.into(),
            node_id: node_id.into(),
            metric: metric.into(),
        }
    }
}

impl fmt::Display for SeriesRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.layer, self.node_id, self.metric)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisStatus {
    Ranked,
    NoAnomalies,
}

/// Output of [`analyze`]: the report plus what produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub report: HealthReport,
    pub status: AnalysisStatus,
    pub anomalies: AnomalyScan,
    pub graph: CausalGraph,
}

impl Analysis {
    pub fn status_message(&self) -> String {
        match self.status {
            AnalysisStatus::Ranked => format!(
                "{} anomalous series, {} causal edges",
                self.graph.vertices.len(),
                self.graph.edges.len()
            ),
            AnalysisStatus::NoAnomalies => "no anomalous series found; nothing to rank".to_string(),
        }
    }
}

/// Full statistical pipeline: anomalies, causal graph, PageRank.
pub fn analyze(s: &TopologySnapshot, cfg: &StatConfig) -> Result<Analysis, StatError> {
    cfg.validate_for_len(s.series_len())?;
    let anomalies = extract_anomalies(s, cfg);
    if anomalies.anomalies.is_empty() {
        return Ok(Analysis {
            report: HealthReport::empty(cfg.k),
            status: AnalysisStatus::NoAnomalies,
            anomalies,
            graph: CausalGraph::default(),
        });
    }
    let graph = build_causal_graph(s, &anomalies.anomalies, cfg)?;
    let report = pagerank_rank(&graph, cfg);
    Ok(Analysis {
        report,
        status: AnalysisStatus::Ranked,
        anomalies,
        graph,
    })
}
