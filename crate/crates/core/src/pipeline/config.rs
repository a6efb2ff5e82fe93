use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::diagnosis::{
    EnsembleConfig, GenerationParams, HttpBackend, LlmBackend, ReplayBackend, StubBackend,
};
use crate::retrieval::{
    EmbeddingProvider, HttpEmbeddingProvider, TrigramProvider, DEFAULT_EXEMPLARS,
};
use crate::statrca::StatConfig;

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StubKind {
    #[default]
    Template,
    Echo,
    Fixed,
    Failing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendConfig {
    /// URL falls back to `RCA_LLM_URL`; the key always comes from
    /// `RCA_LLM_API_KEY`.
    Http {
        #[serde(default)]
        url: Option<String>,
    },
    Stub {
        #[serde(default)]
        mode: StubKind,
        /// Response for `fixed`, message for `failing`.
        #[serde(default)]
        text: Option<String>,
    },
    /// Replays `cassette`; with `record` set, unseen prompts go to `inner`
    /// and are appended to the cassette.
    Replay {
        cassette: PathBuf,
        #[serde(default)]
        record: bool,
        #[serde(default)]
        inner: Option<Box<BackendConfig>>,
    },
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Stub {
            mode: StubKind::Template,
            text: None,
        }
    }
}

impl BackendConfig {
    pub fn build(&self) -> Result<Arc<dyn LlmBackend>, PipelineError> {
        Ok(match self {
            BackendConfig::Http { url } => Arc::new(HttpBackend::from_env(url.as_deref())?),
            BackendConfig::Stub { mode, text } => Arc::new(match mode {
                StubKind::Template => StubBackend::template(),
                StubKind::Echo => StubBackend::echo(),
                StubKind::Fixed => StubBackend::fixed(
                    text.clone()
                        .ok_or_else(|| PipelineError::Config("fixed stub needs `text`".into()))?,
                ),
                StubKind::Failing => {
                    StubBackend::failing(text.clone().unwrap_or_else(|| "stub failure".into()))
                }
            }),
            BackendConfig::Replay {
                cassette,
                record,
                inner,
            } => {
                if *record {
                    let inner = inner
                        .as_deref()
                        .ok_or_else(|| {
                            PipelineError::Config("record mode needs an `inner` backend".into())
                        })?
                        .build()?;
                    Arc::new(ReplayBackend::record(cassette, Box::new(inner))?)
                } else {
                    Arc::new(ReplayBackend::replay(cassette)?)
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProviderConfig {
    Trigram {
        #[serde(default = "default_dimension")]
        dimension: usize,
    },
    Http {
        name: String,
        url: String,
        dimension: usize,
        /// Name of the environment variable holding the bearer token.
        #[serde(default)]
        api_key_env: Option<String>,
        #[serde(default = "default_timeout")]
        timeout_seconds: f64,
    },
}

fn default_dimension() -> usize {
    TrigramProvider::DEFAULT_DIMENSION
}

fn default_timeout() -> f64 {
    30.0
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig::Trigram {
            dimension: default_dimension(),
        }
    }
}

impl ProviderConfig {
    pub fn build(&self) -> Result<Arc<dyn EmbeddingProvider>, PipelineError> {
        Ok(match self {
            ProviderConfig::Trigram { dimension } => {
                if *dimension == 0 {
                    return Err(PipelineError::Config(
                        "provider dimension must be positive".into(),
                    ));
                }
                Arc::new(TrigramProvider::new(*dimension))
            }
            ProviderConfig::Http {
                name,
                url,
                dimension,
                api_key_env,
                timeout_seconds,
            } => {
                let key = api_key_env.as_deref().and_then(|v| std::env::var(v).ok());
                Arc::new(HttpEmbeddingProvider::new(
                    name.clone(),
                    url.clone(),
                    *dimension,
                    key,
                    Duration::from_secs_f64(*timeout_seconds),
                )?)
            }
        })
    }
}

/// Single JSON configuration file; every key is optional and unknown keys
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub store: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub stat: StatConfig,
    pub ensemble: EnsembleConfig,
    pub generation: GenerationParams,
    pub backend: BackendConfig,
    pub provider: ProviderConfig,
    pub bind: String,
    pub retrieval_count: usize,
    pub domain_knowledge: String,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            store: None,
            corpus: None,
            stat: StatConfig::default(),
            ensemble: EnsembleConfig::default(),
            generation: GenerationParams::default(),
            backend: BackendConfig::default(),
            provider: ProviderConfig::default(),
            bind: DEFAULT_BIND.to_string(),
            retrieval_count: DEFAULT_EXEMPLARS,
            domain_knowledge: String::new(),
        }
    }
}

impl AppConfig {
    pub fn from_json(raw: &[u8]) -> Result<Self, PipelineError> {
        let de = &mut serde_json::Deserializer::from_slice(raw);
        let cfg: Self = serde_path_to_error::deserialize(de)
            .map_err(|e| PipelineError::Config(format!("at {}: {}", e.path(), e.inner())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let raw = std::fs::read(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&raw).map_err(|e| match e {
            PipelineError::Config(m) => PipelineError::Config(format!("{}: {m}", path.display())),
            other => PipelineError::Config(format!("{}: {other}", path.display())),
        })
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        self.stat.validate().map_err(PipelineError::Stat)?;
        self.ensemble.validate().map_err(PipelineError::Config)?;
        self.generation.validate().map_err(PipelineError::Config)?;
        if self.retrieval_count == 0 {
            return Err(PipelineError::Config(
                "retrieval_count must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Paths that read operations depend on must exist.
    pub fn check_paths(&self, needs_corpus: bool) -> Result<(), PipelineError> {
        if let Some(store) = &self.store {
            if !store.is_dir() {
                return Err(PipelineError::Config(format!(
                    "store {} is not a directory",
                    store.display()
                )));
            }
        }
        match &self.corpus {
            Some(c) if !c.is_file() => Err(PipelineError::Config(format!(
                "corpus {} does not exist",
                c.display()
            ))),
            None if needs_corpus => Err(PipelineError::MissingCorpus),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let cfg = AppConfig::from_json(b"{}").unwrap();
        assert_eq!(cfg, AppConfig::default());
        assert_eq!(cfg.ensemble.num_agents, 3);
        assert_eq!(cfg.retrieval_count, 3);
    }

    #[test]
    fn nested_sections_parse() {
        let cfg = AppConfig::from_json(
            br#"{"stat": {"k": 3}, "backend": {"kind": "replay", "cassette": "c.json"},
                "provider": {"kind": "trigram", "dimension": 128}, "ensemble": {"num_agents": 1}}"#,
        )
        .unwrap();
        assert_eq!(cfg.stat.k, 3);
        assert_eq!(cfg.stat.max_lag, 3);
        assert!(matches!(
            cfg.backend,
            BackendConfig::Replay { record: false, .. }
        ));
        assert_eq!(cfg.provider, ProviderConfig::Trigram { dimension: 128 });
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for raw in [
            &br#"{"stroe": "x"}"#[..],
            br#"{"backend": {"kind": "stub", "colour": 1}}"#,
            br#"{"stat": {"lag": 2}}"#,
        ] {
            let err = AppConfig::from_json(raw).unwrap_err().to_string();
            assert!(err.contains("unknown"), "{err}");
        }
        assert!(AppConfig::from_json(br#"{"ensemble": {"num_agents": 0}}"#).is_err());
    }

    #[test]
    fn record_mode_requires_inner_backend() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = BackendConfig::Replay {
            cassette: dir.path().join("c.json"),
            record: true,
            inner: None,
        };
        assert!(cfg.build().is_err());
    }
}
