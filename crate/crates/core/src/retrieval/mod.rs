//! Incident corpus and exact cosine retrieval of few-shot exemplars.

mod embedding;
mod index;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use embedding::{
    fingerprint, trigram_vector, EmbeddingProvider, HttpEmbeddingProvider, TrigramProvider,
};
pub use index::{IncidentRecord, NewIncident, RetrievalHit, RetrievalResult, VectorIndex};

/// Number of exemplars retrieved per query unless configured otherwise.
pub const DEFAULT_EXEMPLARS: usize = 3;

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("duplicate record id {0:?}")]
    DuplicateId(String),
    #[error("index is empty")]
    EmptyIndex,
    #[error("index was built with {index} but the query provider is {provider}")]
    FingerprintMismatch { index: String, provider: String },
    #[error("cannot take the cosine of a zero-norm vector")]
    ZeroNorm,
    #[error("text to embed is empty")]
    EmptyText,
    #[error("requested result count must be positive")]
    InvalidCount,
    #[error("embedding service error: {0}")]
    Service(String),
    #[error("corrupt index: {0}")]
    Corrupt(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RetrievalError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        RetrievalError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// dot(u, v) / (|u| |v|).
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, RetrievalError> {
    if u.len() != v.len() {
        return Err(RetrievalError::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    let (mut dot, mut uu, mut vv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(RetrievalError::ZeroNorm);
    }
    Ok((dot / (uu.sqrt() * vv.sqrt())).clamp(-1.0, 1.0))
}
