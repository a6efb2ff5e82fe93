use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{SeriesRef, StatConfig};
use crate::topology::TopologySnapshot;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnomalyScan {
    pub anomalies: BTreeSet<SeriesRef>,
    /// Unflagged series with zero variance; they cannot be scored.
    pub degenerate: Vec<SeriesRef>,
}

/// Largest |z| of any sample against the series' own mean and population
/// standard deviation. `None` for a constant series.
pub fn max_abs_zscore(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var <= 0.0 {
        return None;
    }
    let sd = var.sqrt();
    Some(
        values
            .iter()
            .map(|v| ((v - mean) / sd).abs())
            .fold(0.0, f64::max),
    )
}

/// Collects every series flagged anomalous plus every unflagged series whose
/// max |z| exceeds the configured threshold. An explicit `false` flag wins
/// over the z-score test.
pub fn extract_anomalies(s: &TopologySnapshot, cfg: &StatConfig) -> AnomalyScan {
    let mut scan = AnomalyScan::default();
    for node in &s.nodes {
        for (name, series) in &node.metrics {
            let r = SeriesRef::new(&node.layer, &node.id, name);
            match series.anomalous {
                Some(true) => {
                    scan.anomalies.insert(r);
                }
                Some(false) => {}
                None => match max_abs_zscore(&series.values) {
                    Some(z) if z > cfg.z_threshold => {
                        scan.anomalies.insert(r);
                    }
                    Some(_) => {}
                    None => scan.degenerate.push(r),
                },
            }
        }
    }
    scan.degenerate.sort();
    scan
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::test_support::minimal;

    #[test]
    fn constant_unflagged_series_is_degenerate() {
        let mut s = minimal();
        let m = s.nodes[0].metrics.get_mut("latency_ms").unwrap();
        m.values = vec![5.0; 20];
        let scan = extract_anomalies(&s, &StatConfig::default());
        assert!(scan.anomalies.is_empty());
        assert_eq!(scan.degenerate.len(), 1);

        s.nodes[0].metrics.get_mut("latency_ms").unwrap().anomalous = Some(false);
        let scan = extract_anomalies(&s, &StatConfig::default());
        assert!(scan.anomalies.is_empty() && scan.degenerate.is_empty());
    }

    #[test]
    fn flag_wins() {
        let mut s = minimal();
        s.nodes[0].metrics.get_mut("latency_ms").unwrap().anomalous = Some(true);
        let scan = extract_anomalies(&s, &StatConfig::default());
        assert_eq!(
            scan.anomalies.into_iter().collect::<Vec<_>>(),
            vec![SeriesRef::new("Application", "app-1", "latency_ms")]
        );
    }

    #[test]
    fn single_spike_exceeds_threshold() {
        // 20 samples: zeros with one 10. mean = 0.5, population sd =
        // sqrt(100/20 - 0.25) = sqrt(4.75); z = 9.5 / sqrt(4.75) = sqrt(19).
        let mut values = vec![0.0; 20];
        values[7] = 10.0;
        let z = max_abs_zscore(&values).unwrap();
        assert!((z - 19f64.sqrt()).abs() < 1e-12);

        let mut s = minimal();
        s.nodes[0].metrics.get_mut("latency_ms").unwrap().values = values;
        assert_eq!(
            extract_anomalies(&s, &StatConfig::default())
                .anomalies
                .len(),
            1
        );
    }

    #[test]
    fn spike_in_short_series_stays_below_threshold() {
        // T = 9: z = sqrt(8) < 3
        let mut values = vec![0.0; 9];
        values[0] = 10.0;
        assert!((max_abs_zscore(&values).unwrap() - 8f64.sqrt()).abs() < 1e-12);
        let mut s = minimal();
        s.nodes[0].metrics.get_mut("latency_ms").unwrap().values = values;
        assert!(extract_anomalies(&s, &StatConfig::default())
            .anomalies
            .is_empty());
    }
}
