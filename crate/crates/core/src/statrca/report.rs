use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::SeriesRef;

/// Relative score difference under which two candidates share a rank.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCause {
    pub rank: u32,
    pub layer: String,
    pub node: String,
    pub metric: String,
    pub score: f64,
}

impl RankedCause {
    pub fn series(&self) -> SeriesRef {
        SeriesRef::new(&self.layer, &self.node, &self.metric)
    }
}

/// Ranked root-cause candidates emitted by the statistical pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthReport {
    pub k: usize,
    pub ranked_causes: Vec<RankedCause>,
}

impl HealthReport {
    pub fn empty(k: usize) -> Self {
        Self {
            k,
            ranked_causes: Vec::new(),
        }
    }

    /// Sorts by descending score, assigns competition ranks (1, 2, 2, 4)
    /// and keeps every entry ranked within `k`. Entries sharing a rank are
    /// listed by series so near-equal scores cannot reorder them.
    pub fn from_scores(mut scored: Vec<(SeriesRef, f64)>, k: usize) -> Self {
        scored.sort_by(|(ra, a), (rb, b)| {
            b.partial_cmp(a)
                .unwrap_or(Ordering::Equal)
                .then_with(|| ra.cmp(rb))
        });
        let mut ranked = Vec::new();
        let mut group_score = f64::NAN;
        let mut group_rank = 0u32;
        for (position, (series, score)) in scored.into_iter().enumerate() {
            let tied =
                (group_score - score).abs() <= TIE_TOLERANCE * group_score.abs().max(score.abs());
            if !tied {
                group_rank = position as u32 + 1;
                group_score = score;
            }
            if group_rank as usize > k {
                break;
            }
            ranked.push(RankedCause {
                rank: group_rank,
                layer: series.layer,
                node: series.node_id,
                metric: series.metric,
                score,
            });
        }
        ranked.sort_by(|a, b| {
            a.rank
                .cmp(&b.rank)
                .then_with(|| a.series().cmp(&b.series()))
        });
        Self {
            k,
            ranked_causes: ranked,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.ranked_causes.is_empty()
    }

    pub fn top(&self) -> Option<&RankedCause> {
        self.ranked_causes.first()
    }

    /// 1-based rank of a series, if reported.
    pub fn rank_of(&self, series: &SeriesRef) -> Option<u32> {
        self.ranked_causes
            .iter()
            .find(|c| &c.series() == series)
            .map(|c| c.rank)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("health report serializes")
    }
}
