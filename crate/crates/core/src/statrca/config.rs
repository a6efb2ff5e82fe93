use serde::{Deserialize, Serialize};

use super::StatError;

/// Tuning knobs for the statistical pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatConfig {
    /// Granger lag order L.
    pub max_lag: usize,
    /// Granger significance level.
    pub alpha: f64,
    /// Global z-score threshold for series without an anomaly flag.
    pub z_threshold: f64,
    pub damping: f64,
    pub pagerank_epsilon: f64,
    pub pagerank_max_iters: usize,
    /// Number of root-cause candidates reported.
    pub k: usize,
}

impl Default for StatConfig {
    fn default() -> Self {
        Self {
            max_lag: 3,
            alpha: 0.05,
            z_threshold: 3.0,
            damping: 0.85,
            pagerank_epsilon: 1e-9,
            pagerank_max_iters: 200,
            k: 5,
        }
    }
}

impl StatConfig {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn validate(&self) -> Result<(), StatError> {
        let bad = |msg: String| Err(StatError::InvalidConfig(msg));
        if self.max_lag == 0 {
            return bad("max_lag must be >= 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.z_threshold > 0.0 && self.z_threshold.is_finite()) {
            return bad(format!(
                "z_threshold must be positive, got {}",
                self.z_threshold
            ));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return bad(format!("damping must lie in (0, 1), got {}", self.damping));
        }
        if self.pagerank_epsilon.is_nan() || self.pagerank_epsilon <= 0.0 {
            return bad(format!(
                "pagerank_epsilon must be positive, got {}",
                self.pagerank_epsilon
            ));
        }
        if self.pagerank_max_iters == 0 {
            return bad("pagerank_max_iters must be >= 1".into());
        }
        if self.k == 0 {
            return bad("k must be >= 1".into());
        }
        Ok(())
    }

    /// Additionally requires L < T/3 for a series length T.
    pub fn validate_for_len(&self, series_len: usize) -> Result<(), StatError> {
        self.validate()?;
        if 3 * self.max_lag >= series_len {
            return Err(StatError::InvalidConfig(format!(
                "max_lag {} requires series longer than {} samples, snapshot has {series_len}",
                self.max_lag,
                3 * self.max_lag
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = StatConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.k, 5);
        assert!(cfg.validate_for_len(10).is_ok());
        assert!(cfg.validate_for_len(9).is_err());
    }

    #[test]
    fn partial_json_fills_defaults_and_rejects_unknown_keys() {
        let cfg: StatConfig = serde_json::from_str(r#"{"k": 3}"#).unwrap();
        assert_eq!(cfg.k, 3);
        assert_eq!(cfg.max_lag, 3);
        assert!(serde_json::from_str::<StatConfig>(r#"{"lag": 3}"#).is_err());
        assert!(StatConfig {
            k: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
