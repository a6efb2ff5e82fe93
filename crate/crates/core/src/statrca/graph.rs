use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::granger::{granger_test, has_variance};
use super::pearson::pearson;
use super::{SeriesRef, StatConfig, StatError};
use crate::topology::TopologySnapshot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalEdge {
    pub cause: SeriesRef,
    pub effect: SeriesRef,
    pub p_value: f64,
    /// |Pearson correlation| of the two series.
    pub weight: f64,
}

/// Directed graph over anomalous series; edges point from inferred cause to
/// effect.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CausalGraph {
    /// Sorted, unique.
    pub vertices: Vec<SeriesRef>,
    /// Sorted by (cause, effect).
    pub edges: Vec<CausalEdge>,
    /// Pairs that were skipped and why.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CausalGraph {
    pub fn index_of(&self, r: &SeriesRef) -> Option<usize> {
        self.vertices.binary_search(r).ok()
    }

    pub fn has_edge(&self, cause: &SeriesRef, effect: &SeriesRef) -> bool {
        self.edges
            .iter()
            .any(|e| &e.cause == cause && &e.effect == effect)
    }
}

enum PairOutcome {
    Edge(CausalEdge),
    NoEdge,
    Skipped(String),
}

/// Runs a Granger test for every ordered pair of anomalous series and keeps
/// the significant directions. Both directions may survive.
pub fn build_causal_graph(
    s: &TopologySnapshot,
    anomalies: &BTreeSet<SeriesRef>,
    cfg: &StatConfig,
) -> Result<CausalGraph, StatError> {
    if anomalies.is_empty() {
        return Err(StatError::Precondition(
            "causal graph needs at least one anomalous series".into(),
        ));
    }
    let vertices: Vec<SeriesRef> = anomalies.iter().cloned().collect();
    let mut series: Vec<&[f64]> = Vec::with_capacity(vertices.len());
    for v in &vertices {
        let values = s
            .series(&v.node_id, &v.metric)
            .ok_or_else(|| StatError::UnknownSeries(v.to_string()))?;
        series.push(&values.values);
    }
    let mut notes: Vec<String> = vertices
        .iter()
        .zip(&series)
        .filter(|(_, values)| !has_variance(values))
        .map(|(v, _)| format!("{v}: zero variance, excluded from causality tests"))
        .collect();

    let pairs: Vec<(usize, usize)> = (0..vertices.len())
        .flat_map(|a| {
            (0..vertices.len())
                .filter(move |b| *b != a)
                .map(move |b| (a, b))
        })
        .filter(|(a, b)| has_variance(series[*a]) && has_variance(series[*b]))
        .collect();

    let outcomes: Vec<PairOutcome> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let outcome = match granger_test(series[b], series[a], cfg.max_lag, cfg.alpha) {
                Ok(o) => o,
                Err(err) => {
                    return PairOutcome::Skipped(format!(
                        "{} -> {}: {err}",
                        vertices[a], vertices[b]
                    ))
                }
            };
            if let Some(note) = outcome.degenerate {
                return PairOutcome::Skipped(format!("{} -> {}: {note}", vertices[a], vertices[b]));
            }
            if !outcome.causes {
                return PairOutcome::NoEdge;
            }
            match pearson(series[a], series[b]) {
                Ok(r) => PairOutcome::Edge(CausalEdge {
                    cause: vertices[a].clone(),
                    effect: vertices[b].clone(),
                    p_value: outcome.p_value,
                    weight: r.abs(),
                }),
                Err(err) => {
                    PairOutcome::Skipped(format!("{} -> {}: {err}", vertices[a], vertices[b]))
                }
            }
        })
        .collect();

    let mut edges = Vec::new();
    for outcome in outcomes {
        match outcome {
            PairOutcome::Edge(e) => edges.push(e),
            PairOutcome::NoEdge => {}
            PairOutcome::Skipped(note) => notes.push(note),
        }
    }
    Ok(CausalGraph {
        vertices,
        edges,
        notes,
    })
}
