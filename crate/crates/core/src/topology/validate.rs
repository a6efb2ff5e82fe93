use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::model::{GroundTruth, TopologySnapshot};
use super::TopologyError;

fn violation(rule: &'static str, detail: impl Into<String>) -> TopologyError {
    TopologyError::Invariant {
        rule,
        detail: detail.into(),
    }
}

/// Checks every structural invariant of a snapshot. Returns non-fatal
/// warnings (currently only disconnected components) on success.
pub fn validate_snapshot(s: &TopologySnapshot) -> Result<Vec<String>, TopologyError> {
    if s.topology_id.trim().is_empty() {
        return Err(violation("topology.id_nonempty", "topology_id is empty"));
    }
    if s.layers.is_empty() {
        return Err(violation("layer.nonempty", "snapshot declares no layers"));
    }

    let mut names = BTreeSet::new();
    let mut ranks = BTreeSet::new();
    for (i, layer) in s.layers.iter().enumerate() {
        if layer.name.trim().is_empty() {
            return Err(violation(
                "layer.name_nonempty",
                format!("layers[{i}] has an empty name"),
            ));
        }
        if !names.insert(layer.name.as_str()) {
            return Err(violation(
                "layer.name_unique",
                format!("layer name {:?} declared twice", layer.name),
            ));
        }
        if !ranks.insert(layer.rank) {
            return Err(violation(
                "layer.rank_unique",
                format!("layer rank {} declared twice", layer.rank),
            ));
        }
    }
    for (expected, rank) in ranks.iter().enumerate() {
        if *rank as usize != expected {
            return Err(violation(
                "layer.rank_contiguous",
                format!(
                    "layer ranks must be 0..{} without gaps; missing rank {expected}",
                    s.layers.len()
                ),
            ));
        }
    }

    if s.nodes.is_empty() {
        return Err(violation("node.nonempty", "snapshot declares no nodes"));
    }

    let mut ids = BTreeSet::new();
    let mut shape: Option<(usize, f64, String)> = None;
    for node in &s.nodes {
        if node.id.trim().is_empty() {
            return Err(violation("node.id_nonempty", "node with empty id"));
        }
        if !ids.insert(node.id.as_str()) {
            return Err(violation(
                "node.id_unique",
                format!("node id {:?} declared twice", node.id),
            ));
        }
        if !names.contains(node.layer.as_str()) {
            return Err(violation(
                "node.layer_exists",
                format!(
                    "node {:?} references undeclared layer {:?}",
                    node.id, node.layer
                ),
            ));
        }
        if node.metrics.is_empty() {
            return Err(violation(
                "node.has_metric",
                format!("node {:?} has no metrics", node.id),
            ));
        }
        for (key, series) in &node.metrics {
            let at = format!("{}.{}", node.id, key);
            if *key != series.name {
                return Err(violation(
                    "metric.key_matches_name",
                    format!(
                        "metric key {at} does not match series name {:?}",
                        series.name
                    ),
                ));
            }
            if series.values.len() < 2 {
                return Err(violation(
                    "metric.min_length",
                    format!(
                        "series {at} has {} values; at least 2 required",
                        series.values.len()
                    ),
                ));
            }
            if let Some(pos) = series.values.iter().position(|v| !v.is_finite()) {
                return Err(violation(
                    "metric.finite",
                    format!("series {at} has a non-finite value at index {pos}"),
                ));
            }
            if !(series.interval_seconds.is_finite() && series.interval_seconds > 0.0) {
                return Err(violation(
                    "metric.interval_positive",
                    format!(
                        "series {at} has interval_seconds {}",
                        series.interval_seconds
                    ),
                ));
            }
            match &shape {
                None => shape = Some((series.values.len(), series.interval_seconds, at)),
                Some((len, interval, first)) => {
                    if series.values.len() != *len {
                        return Err(violation(
                            "metric.equal_length",
                            format!(
                                "series {at} has {} values but {first} has {len}",
                                series.values.len()
                            ),
                        ));
                    }
                    if series.interval_seconds != *interval {
                        return Err(violation(
                            "metric.equal_interval",
                            format!(
                                "series {at} has interval {}s but {first} has {interval}s",
                                series.interval_seconds
                            ),
                        ));
                    }
                }
            }
        }
    }

    for (i, edge) in s.edges.iter().enumerate() {
        for end in [&edge.source, &edge.target] {
            if !ids.contains(end.as_str()) {
                return Err(violation(
                    "edge.endpoint_exists",
                    format!(
                        "edges[{i}] ({} -> {}) references unknown node {end:?}",
                        edge.source, edge.target
                    ),
                ));
            }
        }
        if edge.source == edge.target {
            return Err(violation(
                "edge.no_self_loop",
                format!("edges[{i}] is a self-edge on {:?}", edge.source),
            ));
        }
    }

    Ok(connectivity_warnings(s))
}

fn connectivity_warnings(s: &TopologySnapshot) -> Vec<String> {
    let mut adjacency: BTreeMap<&str, Vec<&str>> = s
        .nodes
        .iter()
        .map(|n| (n.id.as_str(), Vec::new()))
        .collect();
    for edge in &s.edges {
        adjacency
            .entry(edge.source.as_str())
            .or_default()
            .push(edge.target.as_str());
        adjacency
            .entry(edge.target.as_str())
            .or_default()
            .push(edge.source.as_str());
    }
    let mut seen = BTreeSet::new();
    let mut components = 0usize;
    for start in adjacency.keys() {
        if seen.contains(start) {
            continue;
        }
        components += 1;
        let mut queue = VecDeque::from([*start]);
        seen.insert(*start);
        while let Some(v) = queue.pop_front() {
            for next in &adjacency[v] {
                if seen.insert(*next) {
                    queue.push_back(*next);
                }
            }
        }
    }
    if components > 1 {
        vec![format!(
            "topology graph is disconnected: {components} components over declared edges"
        )]
    } else {
        Vec::new()
    }
}

/// Checks a ground-truth record against the snapshot it labels.
pub fn validate_truth(truth: &GroundTruth, s: &TopologySnapshot) -> Result<(), TopologyError> {
    if truth.gold_diagnosis.trim().is_empty() {
        return Err(violation("truth.gold_nonempty", "gold_diagnosis is empty"));
    }
    if truth.gold_action_steps.is_empty()
        || truth.gold_action_steps.iter().any(|a| a.trim().is_empty())
    {
        return Err(violation(
            "truth.steps_nonempty",
            "gold_action_steps must be a non-empty list of non-empty texts",
        ));
    }
    let node = s.node(&truth.fault_node).ok_or_else(|| {
        violation(
            "truth.fault_exists",
            format!("fault node {:?} not in snapshot", truth.fault_node),
        )
    })?;
    if node.layer != truth.fault_layer {
        return Err(violation(
            "truth.fault_exists",
            format!(
                "fault node {:?} is in layer {:?}, not {:?}",
                truth.fault_node, node.layer, truth.fault_layer
            ),
        ));
    }
    if !node.metrics.contains_key(&truth.fault_metric) {
        return Err(violation(
            "truth.fault_exists",
            format!(
                "fault node {:?} has no metric {:?}",
                truth.fault_node, truth.fault_metric
            ),
        ));
    }
    Ok(())
}
