//! Layered network topology snapshots: data model, JSON wire format,
//! validation and on-disk store layout.
//!
//! A snapshot is one JSON document with top-level keys `topology_id`,
//! `timestamp` (RFC 3339, UTC), `layers`, `nodes` and `edges`. Every metric
//! series in a snapshot shares the same length and sampling interval.

mod model;
mod store;
mod validate;

use std::path::{Path, PathBuf};

use serde_json::error::Category;
use thiserror::Error;

pub use model::{Edge, GroundTruth, Layer, MetricSeries, NetNode, TopologySnapshot};
pub use store::{
    load_snapshot, load_truth, store_path, timestamp_file_name, truth_path_for, validate_store,
    write_entry, RejectedFile, StoreEntry, StoreListing, TRUTH_SUFFIX,
};
pub use validate::{validate_snapshot, validate_truth};

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    MalformedJson {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invariant `{rule}` violated: {detail}")]
    Invariant { rule: &'static str, detail: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl TopologyError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        TopologyError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// The violated rule name, for invariant errors.
    pub fn rule(&self) -> Option<&'static str> {
        match self {
            TopologyError::Invariant { rule, .. } => Some(rule),
            _ => None,
        }
    }
}

fn decode<T: serde::de::DeserializeOwned>(raw: &[u8]) -> Result<T, TopologyError> {
    let text = std::str::from_utf8(raw).map_err(|e| TopologyError::MalformedJson {
        line: 0,
        column: 0,
        message: format!("input is not UTF-8: {e}"),
    })?;
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        match inner.classify() {
            Category::Data => TopologyError::Schema {
                path,
                message: inner.to_string(),
            },
            _ => TopologyError::MalformedJson {
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            },
        }
    })?;
    de.end().map_err(|e| TopologyError::MalformedJson {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(value)
}

/// Parses and validates a snapshot document.
pub fn parse_snapshot(raw: &[u8]) -> Result<TopologySnapshot, TopologyError> {
    let snapshot: TopologySnapshot = decode(raw)?;
    validate_snapshot(&snapshot)?;
    Ok(snapshot)
}

/// Parses a ground-truth document. Pair it with its snapshot through
/// [`validate_truth`].
pub fn parse_truth(raw: &[u8]) -> Result<GroundTruth, TopologyError> {
    decode(raw)
}

/// Pretty-printed JSON with a trailing newline. Key order follows field
/// declaration order and sorted metric names, so output is deterministic.
pub fn serialize_snapshot(s: &TopologySnapshot) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(s).expect("snapshot serialization cannot fail");
    out.push(b'\n');
    out
}

#[cfg(test)]
pub(crate) mod test_support {
    use std::collections::BTreeMap;

    use chrono::TimeZone;

    use super::*;

    pub fn minimal() -> TopologySnapshot {
        let mut metrics = BTreeMap::new();
        metrics.insert(
            "latency_ms".to_string(),
            MetricSeries::new("latency_ms", "ms", 60.0, vec![1.0, 2.0, 3.0]),
        );
        TopologySnapshot {
            topology_id: "t".into(),
            timestamp: chrono::Utc.with_ymd_and_hms(2024, 6, 1, 0, 0, 0).unwrap(),
            layers: vec![Layer {
                name: "Application".into(),
                rank: 0,
            }],
            nodes: vec![NetNode {
                id: "app-1".into(),
                layer: "Application".into(),
                metrics,
            }],
            edges: vec![],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::minimal;
    use super::*;

    const MINIMAL: &str = r#"{
        "topology_id": "t",
        "timestamp": "2024-06-01T00:00:00Z",
        "layers": [{"name": "Application", "rank": 0}],
        "nodes": [{"id": "a", "layer": "Application",
                   "metrics": {"m": {"name": "m", "unit": "ms", "interval_seconds": 60, "values": [1, 2, 3, 4]}}}],
        "edges": []
    }"#;

    #[test]
    fn minimal_document_parses() {
        let s = parse_snapshot(MINIMAL.as_bytes()).unwrap();
        assert_eq!(s.series_len(), 4);
        assert_eq!(s.layers.len(), 1);
        assert_eq!(s.series("a", "m").unwrap().anomalous, None);
    }

    #[test]
    fn unknown_edge_endpoint_is_named() {
        let doc = MINIMAL.replace(
            r#""edges": []"#,
            r#""edges": [{"source": "a", "target": "ghost"}]"#,
        );
        let err = parse_snapshot(doc.as_bytes()).unwrap_err();
        assert_eq!(err.rule(), Some("edge.endpoint_exists"));
        let msg = err.to_string();
        assert!(msg.contains("edges[0]") && msg.contains("ghost"), "{msg}");
    }

    #[test]
    fn schema_errors_carry_the_path() {
        let doc = MINIMAL.replace(r#""rank": 0"#, r#""rank": "zero""#);
        match parse_snapshot(doc.as_bytes()).unwrap_err() {
            TopologyError::Schema { path, .. } => assert_eq!(path, "layers[0].rank"),
            other => panic!("unexpected {other:?}"),
        }
        let doc = MINIMAL.replace(r#""unit": "ms","#, r#""unit": "ms", "colour": 1,"#);
        assert!(matches!(
            parse_snapshot(doc.as_bytes()),
            Err(TopologyError::Schema { .. })
        ));
    }

    #[test]
    fn malformed_json_is_reported() {
        assert!(matches!(
            parse_snapshot(b"{\"topology_id\": "),
            Err(TopologyError::MalformedJson { .. })
        ));
        assert!(matches!(
            parse_snapshot(&[0xff, 0xfe]),
            Err(TopologyError::MalformedJson { .. })
        ));
        let trailing = format!("{MINIMAL} x");
        assert!(matches!(
            parse_snapshot(trailing.as_bytes()),
            Err(TopologyError::MalformedJson { .. })
        ));
    }

    #[test]
    fn invariant_rules() {
        let cases = [
            (MINIMAL.replace("[1, 2, 3, 4]", "[1]"), "metric.min_length"),
            (
                MINIMAL.replace(r#""layer": "Application""#, r#""layer": "Nope""#),
                "node.layer_exists",
            ),
            (
                MINIMAL.replace(r#""rank": 0"#, r#""rank": 1"#),
                "layer.rank_contiguous",
            ),
            (
                MINIMAL.replace(r#""interval_seconds": 60"#, r#""interval_seconds": 0"#),
                "metric.interval_positive",
            ),
            (
                MINIMAL.replace(
                    r#""metrics": {"m": {"name": "m""#,
                    r#""metrics": {"m": {"name": "q""#,
                ),
                "metric.key_matches_name",
            ),
            (
                MINIMAL.replace(
                    r#""edges": []"#,
                    r#""edges": [{"source": "a", "target": "a"}]"#,
                ),
                "edge.no_self_loop",
            ),
        ];
        for (doc, rule) in cases {
            let err = parse_snapshot(doc.as_bytes()).unwrap_err();
            assert_eq!(err.rule(), Some(rule), "{err}");
        }
    }

    #[test]
    fn unequal_series_are_rejected() {
        let mut s = minimal();
        let node = &mut s.nodes[0];
        node.metrics.insert(
            "other".into(),
            MetricSeries::new("other", "pct", 60.0, vec![1.0, 2.0]),
        );
        assert_eq!(
            validate_snapshot(&s).unwrap_err().rule(),
            Some("metric.equal_length")
        );
        s.nodes[0]
            .metrics
            .get_mut("other")
            .unwrap()
            .values
            .push(9.0);
        s.nodes[0]
            .metrics
            .get_mut("other")
            .unwrap()
            .interval_seconds = 30.0;
        assert_eq!(
            validate_snapshot(&s).unwrap_err().rule(),
            Some("metric.equal_interval")
        );
    }

    #[test]
    fn disconnected_graph_warns() {
        let mut s = minimal();
        let mut other = s.nodes[0].clone();
        other.id = "app-2".into();
        s.nodes.push(other);
        let warnings = validate_snapshot(&s).unwrap();
        assert_eq!(warnings.len(), 1);
        s.edges.push(Edge::new("app-1", "app-2"));
        assert!(validate_snapshot(&s).unwrap().is_empty());
    }

    #[test]
    fn serialization_is_stable_and_preserves_flags() {
        let mut s = minimal();
        s.nodes[0].metrics.get_mut("latency_ms").unwrap().anomalous = Some(true);
        let a = serialize_snapshot(&s);
        let b = serialize_snapshot(&s);
        assert_eq!(a, b);
        let back = parse_snapshot(&a).unwrap();
        assert_eq!(back, s);
        assert_eq!(serialize_snapshot(&back), a);
        assert!(String::from_utf8(a)
            .unwrap()
            .contains("\"anomalous\": true"));
    }

    #[test]
    fn truth_must_reference_the_snapshot() {
        let s = minimal();
        let mut truth = GroundTruth {
            scenario_name: "x".into(),
            fault_layer: "Application".into(),
            fault_node: "app-1".into(),
            fault_metric: "latency_ms".into(),
            gold_diagnosis: "d".into(),
            gold_action_steps: vec!["a".into()],
        };
        validate_truth(&truth, &s).unwrap();
        truth.fault_metric = "nope".into();
        assert_eq!(
            validate_truth(&truth, &s).unwrap_err().rule(),
            Some("truth.fault_exists")
        );
        truth.fault_metric = "latency_ms".into();
        truth.gold_action_steps.clear();
        assert_eq!(
            validate_truth(&truth, &s).unwrap_err().rule(),
            Some("truth.steps_nonempty")
        );
    }
}
