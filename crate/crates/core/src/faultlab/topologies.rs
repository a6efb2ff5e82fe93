use std::collections::BTreeMap;
use std::f64::consts::PI;

use chrono::{Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::topology::{Edge, Layer, MetricSeries, NetNode, TopologySnapshot};

pub const DEFAULT_SERIES_LEN: usize = 200;
pub const DEFAULT_NOISE_SIGMA: f64 = 0.05;
pub const SAMPLE_INTERVAL_SECONDS: f64 = 60.0;

/// Amplitude of the hourly-cycle component on untouched series, in latent
/// units. Keeps background max |z| well below 3.
const BACKGROUND_AMPLITUDE: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    /// Hybrid multicloud: Application, Spokes, TGW, Gateways.
    Vista,
    /// AI/ML datacenter: Application, GPU, NICs, Compute, NetworkDevices.
    Aiml,
}

impl TopologyKind {
    pub fn topology_id(self) -> &'static str {
        match self {
            TopologyKind::Vista => "vista-hybrid-multicloud",
            TopologyKind::Aiml => "aiml-datacenter",
        }
    }
}

/// Emitted value = `baseline + scale * latent`; the latent signal carries
/// the noise, faults and couplings.
#[derive(Debug, Clone, Copy)]
pub(crate) struct MetricDef {
    pub name: &'static str,
    pub unit: &'static str,
    pub baseline: f64,
    pub scale: f64,
}

const fn m(name: &'static str, unit: &'static str, baseline: f64, scale: f64) -> MetricDef {
    MetricDef {
        name,
        unit,
        baseline,
        scale,
    }
}

struct LayerDef {
    name: &'static str,
    nodes: &'static [&'static str],
    metrics: &'static [MetricDef],
}

const VISTA_LAYERS: &[LayerDef] = &[
    LayerDef {
        name: "Application",
        nodes: &[
            "Sausalito-spoke-us-east-2",
            "Berkeley-spoke-us-west-2",
            "Oakland-spoke-eu-west-1",
        ],
        metrics: &[
            m(
                "applications_time_to_first_data_packet_avg",
                "ms",
                40.0,
                60.0,
            ),
            m("applications_ack_round_trip_forward_avg", "ms", 25.0, 40.0),
            m("applications_bandwidth_avg", "Mbps", 300.0, 400.0),
            m("applications_tcp_retransmissions", "count", 20.0, 40.0),
        ],
    },
    LayerDef {
        name: "Spokes",
        nodes: &[
            "spoke-vpc-us-east-2",
            "spoke-vpc-us-west-2",
            "spoke-vpc-eu-west-1",
        ],
        metrics: &[
            m("spoke_throughput_mbps", "Mbps", 800.0, 1000.0),
            m("spoke_packet_loss_pct", "%", 1.0, 2.0),
        ],
    },
    LayerDef {
        name: "TGW",
        nodes: &["tgw-us-east-2", "tgw-us-west-2"],
        metrics: &[
            m("tgw_bytes_in_mbps", "Mbps", 1500.0, 2000.0),
            m("tgw_blackhole_packet_drops", "count", 10.0, 40.0),
        ],
    },
    LayerDef {
        name: "Gateways",
        nodes: &["VistaDev-aws-us-west-2", "VistaDev-aws-us-east-2"],
        metrics: &[
            m("total_cpu_utilization", "%", 40.0, 60.0),
            m("packet_loss_pct", "%", 1.0, 2.0),
            m("session_count", "count", 1200.0, 1000.0),
        ],
    },
];

const VISTA_EDGES: &[(&str, &str)] = &[
    ("Sausalito-spoke-us-east-2", "spoke-vpc-us-east-2"),
    ("Berkeley-spoke-us-west-2", "spoke-vpc-us-west-2"),
    ("Oakland-spoke-eu-west-1", "spoke-vpc-eu-west-1"),
    ("spoke-vpc-us-east-2", "tgw-us-east-2"),
    ("spoke-vpc-eu-west-1", "tgw-us-east-2"),
    ("spoke-vpc-us-west-2", "tgw-us-west-2"),
    ("tgw-us-east-2", "tgw-us-west-2"),
    ("tgw-us-east-2", "VistaDev-aws-us-east-2"),
    ("tgw-us-east-2", "VistaDev-aws-us-west-2"),
    ("tgw-us-west-2", "VistaDev-aws-us-west-2"),
];

const AIML_LAYERS: &[LayerDef] = &[
    LayerDef {
        name: "Application",
        nodes: &["aiapp-training-01", "aiapp-inference-01"],
        metrics: &[
            m("iteration_completion_time_ms", "ms", 850.0, 800.0),
            m("samples_per_second", "samples/s", 2400.0, 2000.0),
        ],
    },
    LayerDef {
        name: "GPU",
        nodes: &["gpu-node-01", "gpu-node-02"],
        metrics: &[
            m("gpu_utilization", "%", 55.0, 60.0),
            m("gpu_memory_utilization", "%", 50.0, 40.0),
        ],
    },
    LayerDef {
        name: "NICs",
        nodes: &["nic-node-01-eth0", "nic-node-02-eth0"],
        metrics: &[
            m("ack_timeout_errors", "count", 5.0, 20.0),
            m("cnp_sent", "count", 30.0, 80.0),
            m("rx_throughput_gbps", "Gbps", 180.0, 150.0),
        ],
    },
    LayerDef {
        name: "Compute",
        nodes: &["compute-node-01", "compute-node-02"],
        metrics: &[
            m("cpu_utilization", "%", 35.0, 40.0),
            m("memory_utilization", "%", 45.0, 30.0),
        ],
    },
    LayerDef {
        name: "NetworkDevices",
        nodes: &["leaf-switch-01", "spine-switch-01"],
        metrics: &[
            m("port_utilization", "%", 45.0, 60.0),
            m("ecn_marked_packets", "count", 100.0, 400.0),
            m("buffer_drops", "count", 2.0, 10.0),
        ],
    },
];

const AIML_EDGES: &[(&str, &str)] = &[
    ("aiapp-training-01", "gpu-node-01"),
    ("aiapp-inference-01", "gpu-node-02"),
    ("gpu-node-01", "nic-node-01-eth0"),
    ("gpu-node-02", "nic-node-02-eth0"),
    ("gpu-node-01", "compute-node-01"),
    ("gpu-node-02", "compute-node-02"),
    ("compute-node-01", "nic-node-01-eth0"),
    ("compute-node-02", "nic-node-02-eth0"),
    ("nic-node-01-eth0", "leaf-switch-01"),
    ("nic-node-02-eth0", "leaf-switch-01"),
    ("leaf-switch-01", "spine-switch-01"),
];

fn layer_defs(
    kind: TopologyKind,
) -> (&'static [LayerDef], &'static [(&'static str, &'static str)]) {
    match kind {
        TopologyKind::Vista => (VISTA_LAYERS, VISTA_EDGES),
        TopologyKind::Aiml => (AIML_LAYERS, AIML_EDGES),
    }
}

pub(crate) fn metric_def(kind: TopologyKind, metric: &str) -> Option<MetricDef> {
    layer_defs(kind)
        .0
        .iter()
        .flat_map(|l| l.metrics.iter())
        .find(|d| d.name == metric)
        .copied()
}

pub(crate) fn emit(def: MetricDef, latent: &[f64]) -> Vec<f64> {
    latent
        .iter()
        .map(|z| def.baseline + def.scale * z)
        .collect()
}

/// Builds the topology with background telemetry: an hourly-cycle component
/// with random phase plus gaussian noise on every series, no flags set.
pub fn build_topology(
    kind: TopologyKind,
    seed: u64,
    series_len: usize,
    noise_sigma: f64,
) -> TopologySnapshot {
    let (layers, edges) = layer_defs(kind);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sigma).expect("noise sigma is positive and finite");
    // hourly cycle
    let period = 3600.0 / SAMPLE_INTERVAL_SECONDS;

    let mut nodes = Vec::new();
    for layer in layers {
        for node_id in layer.nodes {
            let mut metrics = BTreeMap::new();
            for def in layer.metrics {
                let phase = rng.gen_range(0.0..2.0 * PI);
                let latent: Vec<f64> = (0..series_len)
                    .map(|t| {
                        BACKGROUND_AMPLITUDE * (2.0 * PI * t as f64 / period + phase).sin()
                            + noise.sample(&mut rng)
                    })
                    .collect();
                metrics.insert(
                    def.name.to_string(),
                    MetricSeries::new(
                        def.name,
                        def.unit,
                        SAMPLE_INTERVAL_SECONDS,
                        emit(*def, &latent),
                    ),
                );
            }
            nodes.push(NetNode {
                id: node_id.to_string(),
                layer: layer.name.to_string(),
                metrics,
            });
        }
    }

    let base = Utc.with_ymd_and_hms(2024, 6, 1, 0, 0, 0).unwrap();
    TopologySnapshot {
        topology_id: kind.topology_id().to_string(),
        timestamp: base + Duration::hours((seed % 1_000_000) as i64),
        layers: layers
            .iter()
            .enumerate()
            .map(|(rank, l)| Layer {
                name: l.name.to_string(),
                rank: rank as u32,
            })
            .collect(),
        nodes,
        edges: edges.iter().map(|(a, b)| Edge::new(*a, *b)).collect(),
    }
}

/// Hybrid multicloud topology at default window length and noise.
pub fn make_vista_topology(seed: u64) -> TopologySnapshot {
    build_topology(
        TopologyKind::Vista,
        seed,
        DEFAULT_SERIES_LEN,
        DEFAULT_NOISE_SIGMA,
    )
}

/// AI/ML datacenter topology at default window length and noise.
pub fn make_aiml_topology(seed: u64) -> TopologySnapshot {
    build_topology(
        TopologyKind::Aiml,
        seed,
        DEFAULT_SERIES_LEN,
        DEFAULT_NOISE_SIGMA,
    )
}
