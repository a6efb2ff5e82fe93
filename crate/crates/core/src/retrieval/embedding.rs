use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::RetrievalError;

/// Maps text to a fixed-dimension vector.
pub trait EmbeddingProvider: Send + Sync {
    fn name(&self) -> &str;

    fn dimension(&self) -> usize;

    fn embed(&self, text: &str) -> Result<Vec<f64>, RetrievalError>;

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, RetrievalError> {
        texts.iter().map(|t| self.embed(t)).collect()
    }

    /// Identifies the embedding space; indexes refuse providers whose
    /// fingerprint differs from the one they were built with.
    fn fingerprint(&self) -> String {
        fingerprint(self.name(), self.dimension())
    }
}

pub fn fingerprint(name: &str, dimension: usize) -> String {
    format!("{name}:{dimension}")
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME)
    })
}

/// Hashed character-trigram frequency vector, L2-normalized.
///
/// Text is lowercased, whitespace runs collapse to one space and the text is
/// padded with a space on each side before trigrams are taken. Returns the
/// zero vector when the padded text is shorter than three characters.
pub fn trigram_vector(text: &str, dimension: usize) -> Vec<f64> {
    let mut padded: Vec<char> = vec![' '];
    for word in text.split_whitespace() {
        if padded.len() > 1 {
            padded.push(' ');
        }
        padded.extend(word.chars().flat_map(char::to_lowercase));
    }
    padded.push(' ');

    let mut v = vec![0.0; dimension];
    let mut buf = [0u8; 12];
    for window in padded.windows(3) {
        let mut len = 0;
        for c in window {
            len += c.encode_utf8(&mut buf[len..]).len();
        }
        let bucket = (fnv1a(&buf[..len]) % dimension as u64) as usize;
        v[bucket] += 1.0;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Offline deterministic provider backed by [`trigram_vector`].
#[derive(Debug, Clone)]
pub struct TrigramProvider {
    dimension: usize,
}

impl TrigramProvider {
    pub const NAME: &'static str = "hashed-trigram";
    pub const DEFAULT_DIMENSION: usize = 256;

    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "dimension must be positive");
        Self { dimension }
    }
}

impl Default for TrigramProvider {
    fn default() -> Self {
        Self::new(Self::DEFAULT_DIMENSION)
    }
}

impl EmbeddingProvider for TrigramProvider {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, RetrievalError> {
        if text.trim().is_empty() {
            return Err(RetrievalError::EmptyText);
        }
        Ok(trigram_vector(text, self.dimension))
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

/// Client for an external embedding service speaking
/// `{"texts": [..]} -> {"vectors": [[..]]}` over HTTP JSON.
pub struct HttpEmbeddingProvider {
    name: String,
    url: String,
    dimension: usize,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpEmbeddingProvider {
    pub fn new(
        name: impl Into<String>,
        url: impl Into<String>,
        dimension: usize,
        api_key: Option<String>,
        timeout: Duration,
    ) -> Result<Self, RetrievalError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| RetrievalError::Service(e.to_string()))?;
        Ok(Self {
            name: name.into(),
            url: url.into(),
            dimension,
            api_key,
            client,
        })
    }
}

impl EmbeddingProvider for HttpEmbeddingProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, RetrievalError> {
        let mut out = self.embed_batch(&[text])?;
        out.pop()
            .ok_or_else(|| RetrievalError::Service("empty response".into()))
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, RetrievalError> {
        if texts.iter().any(|t| t.trim().is_empty()) {
            return Err(RetrievalError::EmptyText);
        }
        let mut req = self.client.post(&self.url).json(&EmbedRequest { texts });
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req
            .send()
            .and_then(|r| r.error_for_status())
            .map_err(|e| RetrievalError::Service(e.to_string()))?;
        let body: EmbedResponse = resp
            .json()
            .map_err(|e| RetrievalError::Service(e.to_string()))?;
        if body.vectors.len() != texts.len() {
            return Err(RetrievalError::Service(format!(
                "expected {} vectors, got {}",
                texts.len(),
                body.vectors.len()
            )));
        }
        for v in &body.vectors {
            if v.len() != self.dimension {
                return Err(RetrievalError::DimensionMismatch {
                    expected: self.dimension,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(RetrievalError::Service(
                    "non-finite embedding component".into(),
                ));
            }
        }
        Ok(body.vectors)
    }
}
