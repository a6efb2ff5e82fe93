use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// A named layer of the network stack. Rank 0 is the application-most layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub name: String,
    pub rank: u32,
}

/// One telemetry time series sampled at a fixed interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSeries {
    pub name: String,
    pub unit: String,
    pub interval_seconds: f64,
    pub values: Vec<f64>,
    /// Anomaly marker carried by the data source. `None` means the
    /// statistical pipeline decides.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anomalous: Option<bool>,
}

impl MetricSeries {
    pub fn new(
        name: impl Into<String>,
        unit: impl Into<String>,
        interval_seconds: f64,
        values: Vec<f64>,
    ) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
            interval_seconds,
            values,
            anomalous: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetNode {
    pub id: String,
    pub layer: String,
    pub metrics: BTreeMap<String, MetricSeries>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub source: String,
    pub target: String,
}

impl Edge {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
        }
    }
}

/// Layered topology graph with per-node telemetry for one capture window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySnapshot {
    pub topology_id: String,
    pub timestamp: DateTime<Utc>,
    pub layers: Vec<Layer>,
    pub nodes: Vec<NetNode>,
    pub edges: Vec<Edge>,
}

impl TopologySnapshot {
    pub fn layer(&self, name: &str) -> Option<&Layer> {
        self.layers.iter().find(|l| l.name == name)
    }

    pub fn layer_by_rank(&self, rank: u32) -> Option<&Layer> {
        self.layers.iter().find(|l| l.rank == rank)
    }

    /// The rank-0 layer, if declared.
    pub fn application_layer(&self) -> Option<&Layer> {
        self.layer_by_rank(0)
    }

    pub fn node(&self, id: &str) -> Option<&NetNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_mut(&mut self, id: &str) -> Option<&mut NetNode> {
        self.nodes.iter_mut().find(|n| n.id == id)
    }

    pub fn series(&self, node_id: &str, metric: &str) -> Option<&MetricSeries> {
        self.node(node_id).and_then(|n| n.metrics.get(metric))
    }

    /// Layers ordered by rank.
    pub fn layers_by_rank(&self) -> Vec<&Layer> {
        let mut layers: Vec<&Layer> = self.layers.iter().collect();
        layers.sort_by_key(|l| l.rank);
        layers
    }

    pub fn nodes_in_layer<'a>(&'a self, layer: &'a str) -> impl Iterator<Item = &'a NetNode> + 'a {
        self.nodes.iter().filter(move |n| n.layer == layer)
    }

    /// Common series length (T). Zero for a snapshot without metrics.
    pub fn series_len(&self) -> usize {
        self.nodes
            .iter()
            .flat_map(|n| n.metrics.values())
            .map(MetricSeries::len)
            .next()
            .unwrap_or(0)
    }

    pub fn interval_seconds(&self) -> Option<f64> {
        self.nodes
            .iter()
            .flat_map(|n| n.metrics.values())
            .map(|m| m.interval_seconds)
            .next()
    }

    /// Identifier used in store listings and reports.
    pub fn snapshot_id(&self) -> String {
        format!(
            "{}/{}",
            self.topology_id,
            self.timestamp
                .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
        )
    }
}

/// Gold label paired with an injected-fault snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    pub scenario_name: String,
    pub fault_layer: String,
    pub fault_node: String,
    pub fault_metric: String,
    pub gold_diagnosis: String,
    pub gold_action_steps: Vec<String>,
}
