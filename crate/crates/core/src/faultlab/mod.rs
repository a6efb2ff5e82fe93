//! Synthetic fault injection over the two reference topologies.
//!
//! Every scenario plants a level-shift fault on one series and propagates it
//! through linear lagged couplings, so the statistical pipeline has a known
//! causal source to recover.

mod scenarios;
mod templates;
mod topologies;

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use scenarios::{list_scenarios, Coupling, ScenarioKind, ScenarioSpec, DEFAULT_GAIN};
pub use topologies::{
    build_topology, make_aiml_topology, make_vista_topology, TopologyKind, DEFAULT_NOISE_SIGMA,
    DEFAULT_SERIES_LEN, SAMPLE_INTERVAL_SECONDS,
};

use crate::statrca::SeriesRef;
use crate::topology::{validate_snapshot, validate_truth, GroundTruth, TopologySnapshot};

/// Fault magnitude in units of the noise sigma.
pub const FAULT_SHIFT_SIGMAS: f64 = 5.0;
/// Largest lag a coupling may use.
pub const MAX_COUPLING_LAG: usize = 3;

#[derive(Debug, Error)]
pub enum FaultlabError {
    #[error("unknown scenario {name:?}; valid scenarios: {valid}")]
    UnknownScenario { name: String, valid: String },
    #[error("invalid scenario spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutput {
    pub snapshot: TopologySnapshot,
    pub truth: GroundTruth,
}

fn check_series(snapshot: &TopologySnapshot, r: &SeriesRef) -> Result<(), FaultlabError> {
    let node = snapshot
        .node(&r.node_id)
        .ok_or_else(|| FaultlabError::InvalidSpec(format!("unknown node in {r}")))?;
    if node.layer != r.layer || !node.metrics.contains_key(&r.metric) {
        return Err(FaultlabError::InvalidSpec(format!(
            "{r} does not exist in the topology"
        )));
    }
    Ok(())
}

fn validate_spec(spec: &ScenarioSpec, snapshot: &TopologySnapshot) -> Result<(), FaultlabError> {
    if spec.topology != spec.kind.topology() {
        return Err(FaultlabError::InvalidSpec(format!(
            "{} runs on the {:?} topology",
            spec.kind,
            spec.kind.topology()
        )));
    }
    if !(spec.noise_sigma > 0.0 && spec.noise_sigma.is_finite()) {
        return Err(FaultlabError::InvalidSpec(
            "noise_sigma must be positive".into(),
        ));
    }
    if spec.series_len < 4 * MAX_COUPLING_LAG {
        return Err(FaultlabError::InvalidSpec(format!(
            "series_len must be at least {}",
            4 * MAX_COUPLING_LAG
        )));
    }
    check_series(snapshot, &spec.fault_target)?;
    let mut driven = BTreeSet::from([spec.fault_target.clone()]);
    for coupling in &spec.couplings {
        check_series(snapshot, &coupling.dest)?;
        if !(1..=MAX_COUPLING_LAG).contains(&coupling.lag) {
            return Err(FaultlabError::InvalidSpec(format!(
                "coupling {} -> {} has lag {}; allowed 1..={MAX_COUPLING_LAG}",
                coupling.source, coupling.dest, coupling.lag
            )));
        }
        if !coupling.gain.is_finite() {
            return Err(FaultlabError::InvalidSpec(
                "coupling gain must be finite".into(),
            ));
        }
        if !driven.contains(&coupling.source) {
            return Err(FaultlabError::InvalidSpec(format!(
                "coupling source {} is neither the fault target nor an earlier destination",
                coupling.source
            )));
        }
        if !driven.insert(coupling.dest.clone()) {
            return Err(FaultlabError::InvalidSpec(format!(
                "{} is driven twice",
                coupling.dest
            )));
        }
    }
    Ok(())
}

/// Generates the faulted snapshot and its ground truth.
///
/// The fault target's latent signal is white noise plus a step of
/// `5 * noise_sigma` over the final half of the window. Each coupled
/// destination is replaced by `gain * source_{t-lag} + noise`. The fault
/// target and the application-layer destinations that drive nothing further
/// are flagged anomalous.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<ScenarioOutput, FaultlabError> {
    let mut snapshot = build_topology(spec.topology, spec.seed, spec.series_len, spec.noise_sigma);
    validate_spec(spec, &snapshot)?;

    let t_len = spec.series_len;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_fa17_0000_0000);
    let noise = Normal::new(0.0, spec.noise_sigma).expect("validated sigma");
    let onset = t_len - t_len / 2;
    let shift = FAULT_SHIFT_SIGMAS * spec.noise_sigma;

    let mut latent: BTreeMap<SeriesRef, Vec<f64>> = BTreeMap::new();
    let target: Vec<f64> = (0..t_len)
        .map(|t| noise.sample(&mut rng) + if t >= onset { shift } else { 0.0 })
        .collect();
    latent.insert(spec.fault_target.clone(), target);
    for coupling in &spec.couplings {
        let source = &latent[&coupling.source];
        let dest: Vec<f64> = (0..t_len)
            .map(|t| {
                coupling.gain * source[t.saturating_sub(coupling.lag)] + noise.sample(&mut rng)
            })
            .collect();
        latent.insert(coupling.dest.clone(), dest);
    }

    let sources: BTreeSet<&SeriesRef> = spec.couplings.iter().map(|c| &c.source).collect();
    let app_layer = snapshot
        .application_layer()
        .map(|l| l.name.clone())
        .unwrap_or_default();
    for (r, values) in &latent {
        let def = topologies::metric_def(spec.topology, &r.metric).expect("validated metric");
        let terminal_app = r.layer == app_layer && !sources.contains(r) && r != &spec.fault_target;
        let series = snapshot
            .node_mut(&r.node_id)
            .and_then(|n| n.metrics.get_mut(&r.metric))
            .expect("validated series");
        series.values = topologies::emit(def, values);
        if r == &spec.fault_target || terminal_app {
            series.anomalous = Some(true);
        }
    }

    let template = templates::gold(spec.kind);
    let truth = GroundTruth {
        scenario_name: spec.kind.name().to_string(),
        fault_layer: spec.fault_target.layer.clone(),
        fault_node: spec.fault_target.node_id.clone(),
        fault_metric: spec.fault_target.metric.clone(),
        gold_diagnosis: template.diagnosis.to_string(),
        gold_action_steps: template.steps.iter().map(|s| s.to_string()).collect(),
    };
    debug_assert!(validate_snapshot(&snapshot).is_ok());
    debug_assert!(validate_truth(&truth, &snapshot).is_ok());
    Ok(ScenarioOutput { snapshot, truth })
}

/// Generates a named scenario at default parameters.
pub fn generate_named(name: &str, seed: u64) -> Result<ScenarioOutput, FaultlabError> {
    let kind: ScenarioKind = name.parse()?;
    generate_scenario(&ScenarioSpec::default_for(kind, seed))
}
