//! HTTP client for a remote quantum random number service.
//!
//! Protocol: `GET {endpoint}?length={n}&type=uint8` answered by a JSON
//! document with a `data` array of integers 0–255 and a `success` boolean.
//! Bytes are prefetched in blocks and buffered; the buffer refills in
//! `block_size` units whenever it cannot cover a request or sits below
//! `low_watermark`.

use std::collections::VecDeque;
use std::io::Write;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::Deserialize;

use super::bytes::ByteStream;
use super::{EntropyError, FallbackPolicy};

#[derive(Debug, Clone)]
pub struct QuantumClientConfig {
    pub endpoint_url: String,
    /// Bytes per fetch, 1..=1024.
    pub block_size: usize,
    /// Refill threshold, strictly below `block_size`.
    pub low_watermark: usize,
    pub request_timeout: Duration,
    pub fallback_policy: FallbackPolicy,
}

impl Default for QuantumClientConfig {
    fn default() -> Self {
        QuantumClientConfig {
            endpoint_url: String::new(),
            block_size: 1024,
            low_watermark: 128,
            request_timeout: Duration::from_secs(5),
            fallback_policy: FallbackPolicy::UsePseudo,
        }
    }
}

impl QuantumClientConfig {
    pub fn validate(&self) -> Result<(), EntropyError> {
        if self.endpoint_url.is_empty() {
            return Err(EntropyError::BadConfig("endpoint_url is empty"));
        }
        if self.block_size == 0 || self.block_size > 1024 {
            return Err(EntropyError::BadConfig("block_size must be in 1..=1024"));
        }
        if self.low_watermark >= self.block_size {
            return Err(EntropyError::BadConfig("low_watermark must be below block_size"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FetchOutcome {
    Ok { bytes: usize },
    Error { reason: String },
}

#[derive(Deserialize)]
struct WireResponse {
    data: Vec<u16>,
    success: bool,
}

/// Buffered client over the wire protocol. One instance per worker.
pub struct QuantumClient {
    config: QuantumClientConfig,
    agent: ureq::Agent,
    buffer: VecDeque<u8>,
    pub fetch_requests: u64,
    pub fetch_failures: u64,
    pub bytes_received: u64,
    /// One line per fetch event: unix timestamp, requested bytes, outcome.
    audit: Option<Box<dyn Write + Send>>,
    /// Raw copy of every byte received, for later replay.
    recorder: Option<Box<dyn Write + Send>>,
}

impl QuantumClient {
    pub fn new(config: QuantumClientConfig) -> Result<QuantumClient, EntropyError> {
        config.validate()?;
        let agent = ureq::AgentBuilder::new()
            .timeout(config.request_timeout)
            .build();
        Ok(QuantumClient {
            config,
            agent,
            buffer: VecDeque::new(),
            fetch_requests: 0,
            fetch_failures: 0,
            bytes_received: 0,
            audit: None,
            recorder: None,
        })
    }

    pub fn with_audit_log(mut self, sink: Box<dyn Write + Send>) -> QuantumClient {
        self.audit = Some(sink);
        self
    }

    pub fn with_recorder(mut self, sink: Box<dyn Write + Send>) -> QuantumClient {
        self.recorder = Some(sink);
        self
    }

    /// Takes exactly `count` bytes, refilling block-wise as needed.
    pub fn take_bytes(&mut self, count: usize) -> Result<Vec<u8>, EntropyError> {
        self.ensure_available(count)?;
        Ok(self.buffer.drain(..count).collect())
    }

    fn ensure_available(&mut self, need: usize) -> Result<(), EntropyError> {
        let floor = need.max(self.config.low_watermark);
        while self.buffer.len() < floor {
            self.fetch_block()?;
        }
        Ok(())
    }

    fn fetch_block(&mut self) -> Result<(), EntropyError> {
        let n = self.config.block_size;
        let sep = if self.config.endpoint_url.contains('?') { '&' } else { '?' };
        let url = format!("{}{}length={}&type=uint8", self.config.endpoint_url, sep, n);

        self.fetch_requests += 1;
        let started = Instant::now();
        let result = self.request_bytes(&url, n);
        let elapsed = started.elapsed();

        match result {
            Ok(bytes) => {
                self.bytes_received += bytes.len() as u64;
                if let Some(rec) = self.recorder.as_mut() {
                    let _ = rec.write_all(&bytes);
                    let _ = rec.flush();
                }
                self.log_event(n, &FetchOutcome::Ok { bytes: bytes.len() }, elapsed);
                self.buffer.extend(bytes);
                Ok(())
            }
            Err(reason) => {
                self.fetch_failures += 1;
                self.log_event(n, &FetchOutcome::Error { reason: reason.clone() }, elapsed);
                Err(EntropyError::FetchFailed(reason))
            }
        }
    }

    fn request_bytes(&self, url: &str, expected: usize) -> Result<Vec<u8>, String> {
        let response = self
            .agent
            .get(url)
            .call()
            .map_err(|e| format!("request failed: {e}"))?;
        let text = response
            .into_string()
            .map_err(|e| format!("unreadable response body: {e}"))?;
        let body: WireResponse =
            serde_json::from_str(&text).map_err(|e| format!("malformed response body: {e}"))?;
        if !body.success {
            return Err("service reported success=false".to_string());
        }
        if body.data.len() != expected {
            return Err(format!("expected {expected} bytes, got {}", body.data.len()));
        }
        body.data
            .iter()
            .map(|&v| u8::try_from(v).map_err(|_| format!("value {v} outside 0..=255")))
            .collect()
    }

    fn log_event(&mut self, requested: usize, outcome: &FetchOutcome, elapsed: Duration) {
        if let Some(sink) = self.audit.as_mut() {
            let ts = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0);
            let line = match outcome {
                FetchOutcome::Ok { bytes } => {
                    format!("{ts}\trequested={requested}\tok bytes={bytes}\telapsed_ms={}\n", elapsed.as_millis())
                }
                FetchOutcome::Error { reason } => {
                    format!("{ts}\trequested={requested}\terror {reason}\telapsed_ms={}\n", elapsed.as_millis())
                }
            };
            let _ = sink.write_all(line.as_bytes());
            let _ = sink.flush();
        }
    }

    pub fn fallback_policy(&self) -> FallbackPolicy {
        self.config.fallback_policy
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }
}

impl ByteStream for QuantumClient {
    fn fill(&mut self, buf: &mut [u8]) -> Result<(), EntropyError> {
        self.ensure_available(buf.len())?;
        for slot in buf.iter_mut() {
            *slot = self.buffer.pop_front().expect("buffer holds enough bytes");
        }
        Ok(())
    }
}
