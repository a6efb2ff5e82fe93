use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::topologies::{TopologyKind, DEFAULT_NOISE_SIGMA, DEFAULT_SERIES_LEN};
use super::FaultlabError;
use crate::statrca::SeriesRef;

/// The eight injected-fault use cases, in evaluation-table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    HighAppBandwidth,
    HighAppLatency,
    GpuOverUtilization,
    NicAckTimeoutError,
    TgwBlackhole,
    GatewayPacketLoss,
    GatewayResourceContention,
    SwitchCongestion,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 8] = [
        ScenarioKind::HighAppBandwidth,
        ScenarioKind::HighAppLatency,
        ScenarioKind::GpuOverUtilization,
        ScenarioKind::NicAckTimeoutError,
        ScenarioKind::TgwBlackhole,
        ScenarioKind::GatewayPacketLoss,
        ScenarioKind::GatewayResourceContention,
        ScenarioKind::SwitchCongestion,
    ];

    /// Command-line / file-name slug.
    pub fn slug(self) -> &'static str {
        match self {
            ScenarioKind::HighAppBandwidth => "high-app-bandwidth",
            ScenarioKind::HighAppLatency => "high-app-latency",
            ScenarioKind::GpuOverUtilization => "gpu-over-utilization",
            ScenarioKind::NicAckTimeoutError => "nic-ack-timeout-error",
            ScenarioKind::TgwBlackhole => "tgw-blackhole",
            ScenarioKind::GatewayPacketLoss => "gateway-packet-loss",
            ScenarioKind::GatewayResourceContention => "gateway-resource-contention",
            ScenarioKind::SwitchCongestion => "switch-congestion",
        }
    }

    /// Descriptive scenario name.
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::HighAppBandwidth => "High App Bandwidth",
            ScenarioKind::HighAppLatency => "High App Latency",
            ScenarioKind::GpuOverUtilization => "Over-utilization of the GPU",
            ScenarioKind::NicAckTimeoutError => "Nic Ack Timeout Error",
            ScenarioKind::TgwBlackhole => "TGW Blackhole",
            ScenarioKind::GatewayPacketLoss => "Gateway Packet Loss",
            ScenarioKind::GatewayResourceContention => "Gateway Resource Contention",
            ScenarioKind::SwitchCongestion => "Switch Congestion",
        }
    }

    /// Label used in evaluation tables.
    pub fn usecase_label(self) -> &'static str {
        match self {
            ScenarioKind::GpuOverUtilization => "High GPU Utilization",
            ScenarioKind::NicAckTimeoutError => "Nic ACK Timeout Error",
            other => other.name(),
        }
    }

    pub fn topology(self) -> TopologyKind {
        match self {
            ScenarioKind::GpuOverUtilization
            | ScenarioKind::NicAckTimeoutError
            | ScenarioKind::SwitchCongestion => TopologyKind::Aiml,
            _ => TopologyKind::Vista,
        }
    }

    pub fn valid_names() -> String {
        Self::ALL
            .iter()
            .map(|k| k.slug())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for ScenarioKind {
    type Err = FaultlabError;

    /// Accepts the slug or the descriptive name, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_lowercase().replace([' ', '_'], "-");
        Self::ALL
            .into_iter()
            .find(|k| {
                k.slug() == wanted
                    || k.name().to_ascii_lowercase().replace(' ', "-") == wanted
                    || k.usecase_label().to_ascii_lowercase().replace(' ', "-") == wanted
            })
            .ok_or_else(|| FaultlabError::UnknownScenario {
                name: s.to_string(),
                valid: Self::valid_names(),
            })
    }
}

/// Linear lagged propagation `dest_t = gain * source_{t-lag} + noise` on the
/// latent signals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub source: SeriesRef,
    pub dest: SeriesRef,
    pub lag: usize,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub topology: TopologyKind,
    pub fault_target: SeriesRef,
    /// Applied in order; every source is the fault target or an earlier
    /// destination.
    pub couplings: Vec<Coupling>,
    pub noise_sigma: f64,
    pub series_len: usize,
    pub seed: u64,
}

pub const DEFAULT_GAIN: f64 = 0.9;

fn r(layer: &str, node: &str, metric: &str) -> SeriesRef {
    SeriesRef::new(layer, node, metric)
}

fn c(source: &SeriesRef, dest: SeriesRef, gain: f64) -> Coupling {
    Coupling {
        source: source.clone(),
        dest,
        lag: 1,
        gain,
    }
}

const APP: &str = "Application";
const SAUSALITO: &str = "Sausalito-spoke-us-east-2";
const BERKELEY: &str = "Berkeley-spoke-us-west-2";
const OAKLAND: &str = "Oakland-spoke-eu-west-1";
const GATEWAY: &str = "VistaDev-aws-us-west-2";
const TRAINING: &str = "aiapp-training-01";
const TTFDP: &str = "applications_time_to_first_data_packet_avg";
const ACK_RTT: &str = "applications_ack_round_trip_forward_avg";
const RETX: &str = "applications_tcp_retransmissions";
const ITERATION: &str = "iteration_completion_time_ms";

impl ScenarioSpec {
    /// Default planted structure for a scenario: fault target plus lag-1
    /// couplings at gain 0.9 to its application-layer effects and to one
    /// intermediate series on the propagation path.
    pub fn default_for(kind: ScenarioKind, seed: u64) -> Self {
        let g = DEFAULT_GAIN;
        let (target, couplings) = match kind {
            ScenarioKind::HighAppBandwidth => {
                let t = r(APP, SAUSALITO, "applications_bandwidth_avg");
                let cs = vec![
                    c(
                        &t,
                        r("Spokes", "spoke-vpc-us-east-2", "spoke_throughput_mbps"),
                        g,
                    ),
                    c(&t, r(APP, BERKELEY, "applications_bandwidth_avg"), g),
                    c(&t, r(APP, SAUSALITO, TTFDP), g),
                ];
                (t, cs)
            }
            ScenarioKind::HighAppLatency => {
                let t = r(APP, SAUSALITO, TTFDP);
                let cs = vec![c(&t, r(APP, SAUSALITO, ACK_RTT), g)];
                (t, cs)
            }
            ScenarioKind::GpuOverUtilization => {
                let t = r("GPU", "gpu-node-01", "gpu_utilization");
                let cs = vec![
                    c(&t, r("Compute", "compute-node-01", "cpu_utilization"), g),
                    c(&t, r(APP, TRAINING, ITERATION), -g),
                ];
                (t, cs)
            }
            ScenarioKind::NicAckTimeoutError => {
                let t = r("NICs", "nic-node-01-eth0", "ack_timeout_errors");
                let cs = vec![
                    c(&t, r("NICs", "nic-node-01-eth0", "rx_throughput_gbps"), -g),
                    c(&t, r(APP, TRAINING, ITERATION), -g),
                ];
                (t, cs)
            }
            ScenarioKind::TgwBlackhole => {
                let t = r("TGW", "tgw-us-east-2", "tgw_blackhole_packet_drops");
                let cs = vec![
                    c(
                        &t,
                        r("Spokes", "spoke-vpc-us-east-2", "spoke_packet_loss_pct"),
                        g,
                    ),
                    c(&t, r(APP, SAUSALITO, RETX), g),
                    c(&t, r(APP, OAKLAND, RETX), g),
                ];
                (t, cs)
            }
            ScenarioKind::GatewayPacketLoss => {
                let t = r("Gateways", GATEWAY, "packet_loss_pct");
                let cs = vec![
                    c(&t, r("TGW", "tgw-us-west-2", "tgw_bytes_in_mbps"), -g),
                    c(&t, r(APP, BERKELEY, TTFDP), g),
                ];
                (t, cs)
            }
            ScenarioKind::GatewayResourceContention => {
                let t = r("Gateways", GATEWAY, "total_cpu_utilization");
                let cs = vec![
                    c(&t, r(APP, SAUSALITO, TTFDP), g),
                    c(&t, r(APP, SAUSALITO, ACK_RTT), g),
                ];
                (t, cs)
            }
            ScenarioKind::SwitchCongestion => {
                let t = r("NetworkDevices", "leaf-switch-01", "ecn_marked_packets");
                let cs = vec![
                    c(&t, r("NICs", "nic-node-01-eth0", "cnp_sent"), g),
                    c(&t, r("GPU", "gpu-node-01", "gpu_utilization"), g),
                    c(&t, r(APP, TRAINING, ITERATION), g),
                ];
                (t, cs)
            }
        };
        Self {
            kind,
            topology: kind.topology(),
            fault_target: target,
            couplings,
            noise_sigma: DEFAULT_NOISE_SIGMA,
            series_len: DEFAULT_SERIES_LEN,
            seed,
        }
    }
}

/// Default specs for all eight scenarios.
pub fn list_scenarios(seed: u64) -> Vec<ScenarioSpec> {
    ScenarioKind::ALL
        .into_iter()
        .map(|k| ScenarioSpec::default_for(k, seed))
        .collect()
}
