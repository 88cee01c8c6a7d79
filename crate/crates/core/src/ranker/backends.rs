//! Embedding backends: the pluggable services that map texts to vectors.
//!
//! Four implementations ship with the toolkit:
//!
//! * [`ReferenceBackend`] — offline, deterministic hashed character trigrams;
//!   used for tests and reproducible runs.
//! * [`HttpBackend`] — `POST /embed` with `{"texts": [...]}`, expecting
//!   `{"vectors": [[...], ...], "dim": D}` and status 200.
//! * [`StdioBackend`] — the same JSON schema as line-delimited
//!   request/response pairs over a subprocess's stdin/stdout.
//! * [`PrecomputedBackend`] — a versioned JSON file mapping exact text to
//!   vector; useful for replaying cached embeddings.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::EmbeddingVector;

/// Failures while obtaining embeddings from a backend.
#[derive(Debug, Error)]
pub enum BackendError {
    #[error("http request failed: {0}")]
    Http(#[from] reqwest::Error),
    #[error("backend returned status {status}: {body}")]
    HttpStatus { status: u16, body: String },
    #[error("no precomputed embedding for text {0:?}")]
    MissingEmbedding(String),
    #[error("backend protocol error: {0}")]
    Protocol(String),
    #[error("backend subprocess error: {0}")]
    Io(#[from] std::io::Error),
    #[error("backend response was not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Anything that maps batches of texts to fixed-dimension vectors.
///
/// Implementations must be deterministic for identical inputs within one
/// session and must return one vector per input text, all with the same
/// dimension.
pub trait EmbeddingBackend<F>: Send + Sync {
    fn name(&self) -> &str;

    /// Declared dimension, when known before the first call.
    fn dim(&self) -> Option<usize>;

    /// Longest document (in characters) the backend wants to see, if limited.
    fn max_chars(&self) -> Option<usize> {
        None
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector<F>>, BackendError>;
}

/// Wire schema shared by the HTTP and stdio protocols.
#[derive(Debug, Serialize, Deserialize)]
pub struct EmbedRequest {
    pub texts: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub vectors: Vec<Vec<f64>>,
    pub dim: usize,
}

fn convert_response<F: Float>(
    response: EmbedResponse,
    expected: usize,
) -> Result<Vec<EmbeddingVector<F>>, BackendError> {
    if response.vectors.len() != expected {
        return Err(BackendError::Protocol(format!(
            "expected {expected} vectors, got {}",
            response.vectors.len()
        )));
    }
    if response.dim == 0 {
        return Err(BackendError::Protocol("backend declared dim 0".into()));
    }
    response
        .vectors
        .into_iter()
        .map(|raw| {
            if raw.len() != response.dim {
                return Err(BackendError::Protocol(format!(
                    "vector length {} does not match declared dim {}",
                    raw.len(),
                    response.dim
                )));
            }
            raw.into_iter()
                .map(|v| {
                    F::from(v).filter(|f| f.is_finite()).ok_or_else(|| {
                        BackendError::Protocol(format!("non-finite embedding value {v}"))
                    })
                })
                .collect::<Result<Vec<F>, _>>()
                .map(EmbeddingVector::new)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Reference backend

/// Deterministic offline embedder: L2-normalized counts of character
/// trigrams of the lowercased text, hashed into `dim` buckets with a seeded
/// FNV hash. Texts shorter than three characters hash as a single gram; the
/// empty text embeds as the all-zero vector (which any similarity use flags
/// as `ZeroVector`).
#[derive(Debug, Clone)]
pub struct ReferenceBackend {
    dim: usize,
    seed: u64,
    name: String,
}

impl ReferenceBackend {
    pub fn new(dim: usize, seed: u64) -> ReferenceBackend {
        assert!(dim >= 16, "reference embedder requires dim >= 16");
        ReferenceBackend {
            dim,
            seed,
            name: format!("reference:{dim}:{seed}"),
        }
    }

    /// Bucket index for one gram.
    pub fn bucket(&self, gram: &str) -> usize {
        (fnv1a64(self.seed, gram.as_bytes()) % self.dim as u64) as usize
    }

    fn embed_one<F: Float>(&self, text: &str) -> EmbeddingVector<F> {
        let lowered = text.to_lowercase();
        let chars: Vec<char> = lowered.chars().collect();
        let mut counts = vec![0u32; self.dim];
        if chars.len() >= 3 {
            for window in chars.windows(3) {
                let gram: String = window.iter().collect();
                counts[self.bucket(&gram)] += 1;
            }
        } else if !chars.is_empty() {
            counts[self.bucket(&lowered)] += 1;
        }
        let values: Vec<F> = counts
            .iter()
            .map(|&c| F::from(c).expect("small count fits any float"))
            .collect();
        let norm = values
            .iter()
            .fold(F::zero(), |acc, &v| acc + v * v)
            .sqrt();
        if norm > F::zero() {
            EmbeddingVector::new(values.into_iter().map(|v| v / norm).collect())
        } else {
            EmbeddingVector::new(values)
        }
    }
}

/// Seeded FNV-1a, kept inline so hashes never change across platforms or
/// library versions.
fn fnv1a64(seed: u64, bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64 ^ seed;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

impl<F: Float> EmbeddingBackend<F> for ReferenceBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> Option<usize> {
        Some(self.dim)
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector<F>>, BackendError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

/// Construct the deterministic trigram-hash backend.
pub fn reference_embedder(dim: usize, seed: u64) -> ReferenceBackend {
    ReferenceBackend::new(dim, seed)
}

// ---------------------------------------------------------------------------
// HTTP backend

/// Client for an embedding service speaking the `POST /embed` protocol.
pub struct HttpBackend {
    client: reqwest::blocking::Client,
    endpoint: String,
    name: String,
    max_chars: Option<usize>,
    seen_dim: Mutex<Option<usize>>,
}

impl HttpBackend {
    /// `base_url` may or may not carry a scheme; `/embed` is appended when
    /// the URL does not already end with it.
    pub fn new(base_url: &str, max_chars: Option<usize>) -> HttpBackend {
        let with_scheme = if base_url.contains("://") {
            base_url.to_string()
        } else {
            format!("http://{base_url}")
        };
        let endpoint = if with_scheme.ends_with("/embed") {
            with_scheme
        } else {
            format!("{}/embed", with_scheme.trim_end_matches('/'))
        };
        HttpBackend {
            client: reqwest::blocking::Client::new(),
            name: format!("http:{endpoint}"),
            endpoint,
            max_chars,
            seen_dim: Mutex::new(None),
        }
    }
}

impl<F: Float> EmbeddingBackend<F> for HttpBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> Option<usize> {
        *self.seen_dim.lock().expect("dim lock")
    }

    fn max_chars(&self) -> Option<usize> {
        self.max_chars
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector<F>>, BackendError> {
        let response = self
            .client
            .post(&self.endpoint)
            .json(&EmbedRequest {
                texts: texts.to_vec(),
            })
            .send()?;
        let status = response.status();
        if !status.is_success() {
            return Err(BackendError::HttpStatus {
                status: status.as_u16(),
                body: response.text().unwrap_or_default(),
            });
        }
        let parsed: EmbedResponse = response.json()?;
        let mut seen = self.seen_dim.lock().expect("dim lock");
        match *seen {
            Some(dim) if dim != parsed.dim => {
                return Err(BackendError::Protocol(format!(
                    "backend changed dimension from {dim} to {}",
                    parsed.dim
                )));
            }
            _ => *seen = Some(parsed.dim),
        }
        drop(seen);
        convert_response(parsed, texts.len())
    }
}

// ---------------------------------------------------------------------------
// Stdio backend

/// Embedding service spoken to over a subprocess's stdin/stdout with one
/// JSON request and one JSON response per line. Calls are serialized
/// internally, so the adapter is safe to share across worker threads.
pub struct StdioBackend {
    child: Mutex<StdioChild>,
    name: String,
    seen_dim: Mutex<Option<usize>>,
}

struct StdioChild {
    process: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl StdioBackend {
    /// Spawn `command` (split on whitespace) with piped stdin/stdout.
    pub fn spawn(command: &str) -> Result<StdioBackend, BackendError> {
        let parts: Vec<&str> = command.split_whitespace().collect();
        if parts.is_empty() {
            return Err(BackendError::Protocol("empty stdio backend command".into()));
        }
        let mut process = Command::new(parts[0])
            .args(&parts[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = process.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(process.stdout.take().expect("piped stdout"));
        Ok(StdioBackend {
            child: Mutex::new(StdioChild {
                process,
                stdin,
                stdout,
            }),
            name: format!("stdio:{command}"),
            seen_dim: Mutex::new(None),
        })
    }
}

impl Drop for StdioChild {
    fn drop(&mut self) {
        let _ = self.process.kill();
        let _ = self.process.wait();
    }
}

impl<F: Float> EmbeddingBackend<F> for StdioBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> Option<usize> {
        *self.seen_dim.lock().expect("dim lock")
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector<F>>, BackendError> {
        let mut child = self.child.lock().expect("stdio backend lock");
        let request = serde_json::to_string(&EmbedRequest {
            texts: texts.to_vec(),
        })?;
        writeln!(child.stdin, "{request}")?;
        child.stdin.flush()?;
        let mut line = String::new();
        let read = child.stdout.read_line(&mut line)?;
        if read == 0 {
            return Err(BackendError::Protocol(
                "stdio backend closed its output".into(),
            ));
        }
        drop(child);
        let parsed: EmbedResponse = serde_json::from_str(line.trim_end())?;
        let mut seen = self.seen_dim.lock().expect("dim lock");
        match *seen {
            Some(dim) if dim != parsed.dim => {
                return Err(BackendError::Protocol(format!(
                    "backend changed dimension from {dim} to {}",
                    parsed.dim
                )));
            }
            _ => *seen = Some(parsed.dim),
        }
        drop(seen);
        convert_response(parsed, texts.len())
    }
}

// ---------------------------------------------------------------------------
// Precomputed backend

#[derive(Debug, Serialize, Deserialize)]
struct PrecomputedFile {
    version: u32,
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

/// Embeddings replayed from a versioned JSON file keyed by exact text.
pub struct PrecomputedBackend {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
    name: String,
}

impl PrecomputedBackend {
    pub fn load(path: &Path) -> Result<PrecomputedBackend, BackendError> {
        let content = std::fs::read_to_string(path)?;
        let file: PrecomputedFile = serde_json::from_str(&content)?;
        if file.version != 1 {
            return Err(BackendError::Protocol(format!(
                "unsupported precomputed embedding file version {}",
                file.version
            )));
        }
        if file.dim == 0 {
            return Err(BackendError::Protocol("precomputed file declares dim 0".into()));
        }
        for (text, vector) in &file.vectors {
            if vector.len() != file.dim {
                return Err(BackendError::Protocol(format!(
                    "vector for {text:?} has length {} but file declares dim {}",
                    vector.len(),
                    file.dim
                )));
            }
        }
        Ok(PrecomputedBackend {
            dim: file.dim,
            vectors: file.vectors,
            name: format!("precomputed:{}", path.display()),
        })
    }
}

impl<F: Float> EmbeddingBackend<F> for PrecomputedBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> Option<usize> {
        Some(self.dim)
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector<F>>, BackendError> {
        texts
            .iter()
            .map(|text| {
                let raw = self
                    .vectors
                    .get(text)
                    .ok_or_else(|| BackendError::MissingEmbedding(text.clone()))?;
                raw.iter()
                    .map(|&v| {
                        F::from(v).filter(|f| f.is_finite()).ok_or_else(|| {
                            BackendError::Protocol(format!("non-finite embedding value {v}"))
                        })
                    })
                    .collect::<Result<Vec<F>, _>>()
                    .map(EmbeddingVector::new)
            })
            .collect()
    }
}
