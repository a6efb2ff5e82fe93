use super::ScenarioKind;

pub(crate) struct GoldTemplate {
    pub diagnosis: &'static str,
    pub steps: &'static [&'static str],
}

pub(crate) fn gold(kind: ScenarioKind) -> GoldTemplate {
    match kind {
        ScenarioKind::HighAppBandwidth => GoldTemplate {
            diagnosis: "Symptom: High bandwidth in the Application Layer.\nRoot cause hypothesis: A heavy burst of \
                traffic between the application endpoints Sausalito-spoke-us-east-2 and Berkeley-spoke-us-west-2 is \
                caused by an excessive data transfer originating at Sausalito-spoke-us-east-2. The transfer saturates \
                the spoke throughput and raises the time to first data packet for the endpoint.",
            steps: &[
                "Identify the flows responsible for the excessive data transfer on Sausalito-spoke-us-east-2 and rate limit them.",
                "Apply QoS policies on spoke-vpc-us-east-2 so that bulk transfers do not starve latency sensitive traffic.",
            ],
        },
        ScenarioKind::HighAppLatency => GoldTemplate {
            diagnosis: "Symptom: High Latency in the Application Layer.\nRoot cause hypothesis: The application node \
                Sausalito-spoke-us-east-2 reports anomalous time to first data packet while no other layer shows \
                anomalies, so the delay is local to the application endpoint itself rather than the network path.",
            steps: &[
                "Inspect the application process on Sausalito-spoke-us-east-2 for slow request handling or resource starvation.",
                "Restart or scale out the application endpoint Sausalito-spoke-us-east-2 if the delay persists.",
            ],
        },
        ScenarioKind::GpuOverUtilization => GoldTemplate {
            diagnosis: "Symptom: Premature iteration completion in the Application Layer.\nRoot cause hypothesis: \
                High GPU utilization on gpu-node-01 leaves the training workload on aiapp-training-01 without compute \
                headroom, which causes iterations to complete prematurely with incomplete data processing.",
            steps: &[
                "Reduce the load on gpu-node-01 by rebalancing jobs across the GPU nodes.",
                "Check for runaway or co-located workloads on gpu-node-01 and evict them.",
            ],
        },
        ScenarioKind::NicAckTimeoutError => GoldTemplate {
            diagnosis: "Symptom: Premature iteration completion in the Application Layer.\nRoot cause hypothesis: \
                Significant ACK timeout errors on the NIC nic-node-01-eth0 cause communication delays, which lead to \
                incomplete data processing and premature iteration completion on aiapp-training-01.",
            steps: &[
                "Inspect the NIC nic-node-01-eth0 for link errors and verify its firmware and driver versions.",
                "Tune the RDMA retransmission timeout and retry settings on nic-node-01-eth0.",
            ],
        },
        ScenarioKind::TgwBlackhole => GoldTemplate {
            diagnosis: "Symptom: Repeated TCP retransmissions in the Application Layer.\nRoot cause hypothesis: A \
                blackhole route in the Transit Gateway tgw-us-east-2 drops packets, which disrupts traffic flow \
                between the application endpoints and triggers repeated TCP retransmissions.",
            steps: &[
                "Inspect the route tables of tgw-us-east-2 and remove or correct the blackhole route.",
                "Verify the TGW attachments of the affected spokes and confirm traffic recovers.",
            ],
        },
        ScenarioKind::GatewayPacketLoss => GoldTemplate {
            diagnosis: "Symptom: High Latency in the Application Layer.\nRoot cause hypothesis: Packet loss on the \
                Gateway node VistaDev-aws-us-west-2 increases network delays, which extends the time to receive the \
                first data packet at the application endpoint Berkeley-spoke-us-west-2.",
            steps: &[
                "Inspect the interfaces of the Gateways node VistaDev-aws-us-west-2 for errors and drops.",
                "Fail traffic over to a healthy gateway while the faulty path on VistaDev-aws-us-west-2 is repaired.",
            ],
        },
        ScenarioKind::GatewayResourceContention => GoldTemplate {
            diagnosis: "Symptom: High Latency in the Application Layer.\nRoot cause hypothesis: The root cause of the \
                high latency is likely due to the high CPU utilization on the Gateway node VistaDev-aws-us-west-2. \
                The high CPU utilization can cause delays in processing packets, leading to increased acknowledgment \
                round trip times and overall latency.",
            steps: &[
                "Reduce the CPU load on the Gateways node VistaDev-aws-us-west-2 as the high CPU utilization on this node is likely causing delays in packet processing, leading to increased latency.",
                "Implement load balancing across the Gateways nodes to distribute the processing load more evenly",
            ],
        },
        ScenarioKind::SwitchCongestion => GoldTemplate {
            diagnosis: "Symptom: Delays in the Application Layer.\nRoot cause hypothesis: Congestion on the switch \
                leaf-switch-01 marks packets with ECN, which makes the NIC nic-node-01-eth0 send congestion \
                notification packets while the GPUs run at full utilization, limiting application processing \
                capacity on aiapp-training-01.",
            steps: &[
                "Rebalance traffic away from the congested ports of leaf-switch-01 or add fabric capacity.",
                "Review the ECN and PFC thresholds on leaf-switch-01 and the congestion control settings on the NICs.",
            ],
        },
    }
}
