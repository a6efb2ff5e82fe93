use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::embedding::{fingerprint, EmbeddingProvider};
use super::{cosine, RetrievalError};

/// A past incident with its embedded diagnostic text and gold labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentRecord {
    pub id: String,
    pub diagnostic_text: String,
    pub embedding: Vec<f64>,
    pub gold_diagnosis: String,
    pub gold_action_steps: Vec<String>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

/// Input to [`VectorIndex::add`].
#[derive(Debug, Clone, Default)]
pub struct NewIncident {
    /// Generated as `incident-NNNN` when absent.
    pub id: Option<String>,
    pub diagnostic_text: String,
    pub gold_diagnosis: String,
    pub gold_action_steps: Vec<String>,
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalHit {
    pub id: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub n: usize,
    pub hits: Vec<RetrievalHit>,
}

/// Exact cosine index persisted as `{"provider", "dimension", "records"}`.
///
/// Queries take `&self`; additions take `&mut self`, so sharing an index
/// behind `Arc` gives the single-writer, multi-reader contract for free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorIndex {
    pub provider: String,
    pub dimension: usize,
    pub records: Vec<IncidentRecord>,
}

impl VectorIndex {
    pub fn new(provider: &dyn EmbeddingProvider) -> Self {
        Self {
            provider: provider.name().to_string(),
            dimension: provider.dimension(),
            records: Vec::new(),
        }
    }

    pub fn fingerprint(&self) -> String {
        fingerprint(&self.provider, self.dimension)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&IncidentRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    fn check_provider(&self, provider: &dyn EmbeddingProvider) -> Result<(), RetrievalError> {
        if provider.dimension() != self.dimension {
            return Err(RetrievalError::DimensionMismatch {
                expected: self.dimension,
                got: provider.dimension(),
            });
        }
        if provider.fingerprint() != self.fingerprint() {
            return Err(RetrievalError::FingerprintMismatch {
                index: self.fingerprint(),
                provider: provider.fingerprint(),
            });
        }
        Ok(())
    }

    /// Embeds and appends an incident; returns its id.
    pub fn add(
        &mut self,
        incident: NewIncident,
        provider: &dyn EmbeddingProvider,
    ) -> Result<String, RetrievalError> {
        self.check_provider(provider)?;
        if incident.diagnostic_text.trim().is_empty() || incident.gold_diagnosis.trim().is_empty() {
            return Err(RetrievalError::EmptyText);
        }
        let id = incident
            .id
            .unwrap_or_else(|| format!("incident-{:04}", self.records.len() + 1));
        if self.get(&id).is_some() {
            return Err(RetrievalError::DuplicateId(id));
        }
        let embedding = provider.embed(&incident.diagnostic_text)?;
        if embedding.len() != self.dimension {
            return Err(RetrievalError::DimensionMismatch {
                expected: self.dimension,
                got: embedding.len(),
            });
        }
        self.records.push(IncidentRecord {
            id: id.clone(),
            diagnostic_text: incident.diagnostic_text,
            embedding,
            gold_diagnosis: incident.gold_diagnosis,
            gold_action_steps: incident.gold_action_steps,
            metadata: incident.metadata,
        });
        Ok(id)
    }

    /// Top-`n` records by cosine similarity to the embedded query text.
    pub fn query(
        &self,
        text: &str,
        n: usize,
        provider: &dyn EmbeddingProvider,
    ) -> Result<RetrievalResult, RetrievalError> {
        self.check_provider(provider)?;
        let v = provider.embed(text)?;
        self.query_vector(&v, n)
    }

    /// Linear scan; ties are broken by ascending record id.
    pub fn query_vector(&self, v: &[f64], n: usize) -> Result<RetrievalResult, RetrievalError> {
        if self.records.is_empty() {
            return Err(RetrievalError::EmptyIndex);
        }
        if n == 0 {
            return Err(RetrievalError::InvalidCount);
        }
        if v.len() != self.dimension {
            return Err(RetrievalError::DimensionMismatch {
                expected: self.dimension,
                got: v.len(),
            });
        }
        let mut hits = self
            .records
            .iter()
            .map(|r| {
                Ok(RetrievalHit {
                    id: r.id.clone(),
                    similarity: cosine(v, &r.embedding)?,
                })
            })
            .collect::<Result<Vec<_>, RetrievalError>>()?;
        hits.sort_by(|a, b| {
            b.similarity
                .total_cmp(&a.similarity)
                .then_with(|| a.id.cmp(&b.id))
        });
        hits.truncate(n);
        Ok(RetrievalResult { n, hits })
    }

    fn validate(&self) -> Result<(), RetrievalError> {
        let mut ids = BTreeSet::new();
        for r in &self.records {
            if !ids.insert(r.id.as_str()) {
                return Err(RetrievalError::DuplicateId(r.id.clone()));
            }
            if r.embedding.len() != self.dimension {
                return Err(RetrievalError::DimensionMismatch {
                    expected: self.dimension,
                    got: r.embedding.len(),
                });
            }
            if r.embedding.iter().any(|x| !x.is_finite()) {
                return Err(RetrievalError::Corrupt(format!(
                    "record {} has a non-finite embedding",
                    r.id
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("index serializes");
        out.push(b'\n');
        out
    }

    pub fn from_json(raw: &[u8]) -> Result<Self, RetrievalError> {
        let idx: VectorIndex =
            serde_json::from_slice(raw).map_err(|e| RetrievalError::Corrupt(e.to_string()))?;
        idx.validate()?;
        Ok(idx)
    }

    pub fn save(&self, path: &Path) -> Result<(), RetrievalError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| RetrievalError::io(path, e))?;
        }
        fs::write(path, self.to_json()).map_err(|e| RetrievalError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, RetrievalError> {
        let raw = fs::read(path).map_err(|e| RetrievalError::io(path, e))?;
        Self::from_json(&raw)
    }
}
