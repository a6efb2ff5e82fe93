use serde::{Deserialize, Serialize};

use super::ols::least_squares;
use super::special::f_survival;
use super::StatError;

/// Result of one bivariate Granger test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrangerOutcome {
    pub causes: bool,
    pub p_value: f64,
    pub f_statistic: f64,
    pub rss_restricted: f64,
    pub rss_unrestricted: f64,
    pub df_num: usize,
    pub df_den: usize,
    /// Set when the regression could not be fitted; the test then reports
    /// "not causal" with p = 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<String>,
}

pub(crate) fn has_variance(values: &[f64]) -> bool {
    values.iter().any(|v| *v != values[0])
}

/// Lagged design columns `series[t - lag]` for t in `max_lag..len`.
fn lag_columns(series: &[f64], max_lag: usize) -> impl Iterator<Item = Vec<f64>> + '_ {
    let n = series.len();
    (1..=max_lag).map(move |lag| series[max_lag - lag..n - lag].to_vec())
}

/// Tests whether past values of `cause` improve an order-`max_lag`
/// autoregression of `effect`.
///
/// Restricted model: `effect_t ~ 1 + effect_{t-1..t-L}`. Unrestricted model
/// adds `cause_{t-1..t-L}`. With `n = T - L` usable observations,
/// `F = ((RSS_r - RSS_u) / L) / (RSS_u / (n - 2L - 1))` against F(L, n - 2L - 1).
pub fn granger_test(
    effect: &[f64],
    cause: &[f64],
    max_lag: usize,
    alpha: f64,
) -> Result<GrangerOutcome, StatError> {
    let len = effect.len();
    if cause.len() != len {
        return Err(StatError::LengthMismatch {
            left: len,
            right: cause.len(),
        });
    }
    if max_lag == 0 {
        return Err(StatError::Precondition("max_lag must be >= 1".into()));
    }
    if len <= 3 * max_lag + 1 {
        return Err(StatError::Precondition(format!(
            "Granger test with lag {max_lag} needs more than {} samples, got {len}",
            3 * max_lag + 1
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatError::Precondition(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if !has_variance(effect) {
        return Err(StatError::Degenerate(
            "effect series has zero variance".into(),
        ));
    }
    if !has_variance(cause) {
        return Err(StatError::Degenerate(
            "cause series has zero variance".into(),
        ));
    }

    let n_obs = len - max_lag;
    let df_num = max_lag;
    let df_den = n_obs - 2 * max_lag - 1;
    let target = &effect[max_lag..];

    let mut restricted: Vec<Vec<f64>> = vec![vec![1.0; n_obs]];
    restricted.extend(lag_columns(effect, max_lag));
    let mut unrestricted = restricted.clone();
    unrestricted.extend(lag_columns(cause, max_lag));

    let degenerate = |note: &str| GrangerOutcome {
        causes: false,
        p_value: 1.0,
        f_statistic: 0.0,
        rss_restricted: f64::NAN,
        rss_unrestricted: f64::NAN,
        df_num,
        df_den,
        degenerate: Some(note.to_string()),
    };

    let Some(r) = least_squares(&restricted, target) else {
        return Ok(degenerate("restricted design matrix is singular"));
    };
    let Some(u) = least_squares(&unrestricted, target) else {
        return Ok(degenerate("unrestricted design matrix is singular"));
    };

    let gain = (r.rss - u.rss).max(0.0);
    let f_statistic = if u.rss > 0.0 {
        (gain / df_num as f64) / (u.rss / df_den as f64)
    } else if gain > 0.0 {
        f64::INFINITY
    } else {
        return Ok(degenerate("both models fit exactly"));
    };
    let p_value = f_survival(f_statistic, df_num as f64, df_den as f64);
    Ok(GrangerOutcome {
        causes: p_value <= alpha,
        p_value,
        f_statistic,
        rss_restricted: r.rss,
        rss_unrestricted: u.rss,
        df_num,
        df_den,
        degenerate: None,
    })
}
