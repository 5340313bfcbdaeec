//! Single-input embedding requests.

use std::time::Duration;

use serde::Deserialize;
use serde_json::value::RawValue;
use thiserror::Error;

use super::mock::mock_embed;
use crate::ingest::parse_vector;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("HTTP status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("request timed out")]
    Timeout,
    #[error("network error: {0}")]
    Network(String),
    #[error("invalid response: {0}")]
    InvalidResponse(String),
}

impl TransportError {
    /// 408, 429, 5xx, timeouts and network failures are worth retrying.
    pub fn is_transient(&self) -> bool {
        match self {
            TransportError::Status { status, .. } => matches!(status, 408 | 429 | 500..=599),
            TransportError::Timeout | TransportError::Network(_) => true,
            TransportError::InvalidResponse(_) => false,
        }
    }
}

/// Sends one embedding request for one input.
pub trait EmbeddingTransport: Send + Sync {
    fn embed(&self, model: &str, input: &str) -> Result<Vec<f32>, TransportError>;
}

/// OpenAI-compatible `POST {endpoint}/embeddings`.
pub struct HttpTransport {
    agent: ureq::Agent,
    url: String,
    api_key: String,
}

impl HttpTransport {
    pub fn new(endpoint_url: &str, api_key: impl Into<String>, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build();
        HttpTransport {
            agent: config.into(),
            url: format!("{}/embeddings", endpoint_url.trim_end_matches('/')),
            api_key: api_key.into(),
        }
    }
}

#[derive(serde::Serialize)]
struct EmbeddingRequest<'a> {
    model: &'a str,
    input: &'a str,
}

#[derive(Deserialize)]
struct EmbeddingResponse<'a> {
    #[serde(borrow)]
    data: Vec<EmbeddingDatum<'a>>,
}

#[derive(Deserialize)]
struct EmbeddingDatum<'a> {
    #[serde(borrow)]
    embedding: &'a RawValue,
}

/// Extracts `data[0].embedding` from a response body.
pub fn parse_embedding_response(body: &str) -> Result<Vec<f32>, TransportError> {
    let parsed: EmbeddingResponse<'_> =
        serde_json::from_str(body).map_err(|e| TransportError::InvalidResponse(e.to_string()))?;
    let first = parsed.data.first().ok_or_else(|| TransportError::InvalidResponse("empty `data`".into()))?;
    parse_vector(first.embedding.get()).map_err(TransportError::InvalidResponse)
}

impl EmbeddingTransport for HttpTransport {
    fn embed(&self, model: &str, input: &str) -> Result<Vec<f32>, TransportError> {
        let response = self
            .agent
            .post(&self.url)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(EmbeddingRequest { model, input })
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => TransportError::Timeout,
                other => TransportError::Network(other.to_string()),
            })?;
        let status = response.status().as_u16();
        let body = response
            .into_body()
            .read_to_string()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(TransportError::Status { status, body: body.chars().take(512).collect() });
        }
        parse_embedding_response(&body)
    }
}

/// Offline transport answering with [`mock_embed`] vectors.
#[derive(Debug, Clone, Copy)]
pub struct MockTransport {
    pub dimension: usize,
    pub seed: u64,
}

impl EmbeddingTransport for MockTransport {
    fn embed(&self, _model: &str, input: &str) -> Result<Vec<f32>, TransportError> {
        mock_embed(input, self.dimension, self.seed).map_err(|e| TransportError::InvalidResponse(e.to_string()))
    }
}
