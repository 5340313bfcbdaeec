//! Embedding generation against an OpenAI-compatible endpoint.
//!
//! Inputs are truncated to a token budget, dispatched by a pool of workers
//! behind a shared sliding-window rate limiter, retried with exponential
//! backoff on transient failures, and appended to a JSON-lines checkpoint as
//! they complete so an interrupted job resumes where it stopped.

mod limiter;
mod mock;
mod tokenize;
mod transport;

pub use limiter::{Clock, ManualClock, RateLimiter, SystemClock};
pub use mock::mock_embed;
pub use tokenize::{count_tokens, Tokenizer, WhitespaceTokenizer};
pub use transport::{parse_embedding_response, EmbeddingTransport, HttpTransport, MockTransport, TransportError};

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use parking_lot::Mutex;

use crate::error::{Error, Result};
use crate::ingest::{open_corpus, BadLinePolicy, CorpusRecord, CorpusWriter, ReadOptions, TextRecord};
use crate::vector::Embedding;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    /// Attempts per input, including the first.
    pub max_attempts: u32,
    pub base_backoff: Duration,
    pub multiplier: f64,
    pub max_backoff: Duration,
}

impl RetryPolicy {
    /// Delay after failed attempt number `attempt` (1-based).
    pub fn backoff(&self, attempt: u32) -> Duration {
        let factor = self.multiplier.powi(attempt.saturating_sub(1) as i32);
        self.base_backoff.mul_f64(factor).min(self.max_backoff)
    }
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 6,
            base_backoff: Duration::from_secs(1),
            multiplier: 2.0,
            max_backoff: Duration::from_secs(60),
        }
    }
}

#[derive(Clone)]
pub struct EmbedConfig {
    pub endpoint_url: String,
    pub api_key: String,
    pub model_name: String,
    pub dimension: usize,
    pub max_input_tokens: usize,
    /// Requests per minute.
    pub rate_limit: usize,
    pub max_parallel: usize,
    pub retry: RetryPolicy,
}

impl fmt::Debug for EmbedConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EmbedConfig")
            .field("endpoint_url", &self.endpoint_url)
            .field("api_key", &"<redacted>")
            .field("model_name", &self.model_name)
            .field("dimension", &self.dimension)
            .field("max_input_tokens", &self.max_input_tokens)
            .field("rate_limit", &self.rate_limit)
            .field("max_parallel", &self.max_parallel)
            .field("retry", &self.retry)
            .finish()
    }
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            endpoint_url: "https://api.openai.com/v1".into(),
            api_key: String::new(),
            model_name: "text-embedding-ada-002".into(),
            dimension: 1536,
            max_input_tokens: 512,
            rate_limit: 3500,
            max_parallel: 8,
            retry: RetryPolicy::default(),
        }
    }
}

impl EmbedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if self.max_input_tokens == 0 {
            return Err(Error::invalid("max_input_tokens must be positive"));
        }
        if self.rate_limit == 0 {
            return Err(Error::invalid("rate_limit must be positive"));
        }
        if self.max_parallel == 0 {
            return Err(Error::invalid("max_parallel must be at least 1"));
        }
        if self.retry.max_attempts == 0 {
            return Err(Error::invalid("max_attempts must be at least 1"));
        }
        if !(self.retry.multiplier.is_finite() && self.retry.multiplier >= 1.0) {
            return Err(Error::invalid("backoff multiplier must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbedJobReport {
    pub total_inputs: usize,
    /// Includes inputs restored from the checkpoint.
    pub succeeded: usize,
    pub failed_permanently: usize,
    /// Inputs already present in the checkpoint when the job started.
    pub resumed: usize,
    pub requests_sent: u64,
    pub retries_performed: u64,
    pub elapsed: Duration,
    /// Token statistics over the untruncated inputs.
    pub token_count_total: u64,
    pub token_count_mean: f64,
    pub failures: Vec<(String, String)>,
}

impl fmt::Display for EmbedJobReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "inputs:            {}", self.total_inputs)?;
        writeln!(f, "succeeded:         {} ({} resumed from checkpoint)", self.succeeded, self.resumed)?;
        writeln!(f, "failed:            {}", self.failed_permanently)?;
        writeln!(f, "requests sent:     {}", self.requests_sent)?;
        writeln!(f, "retries:           {}", self.retries_performed)?;
        writeln!(f, "elapsed:           {:.3}s", self.elapsed.as_secs_f64())?;
        writeln!(f, "tokens (total):    {}", self.token_count_total)?;
        write!(f, "tokens (mean):     {:.1}", self.token_count_mean)
    }
}

/// A vector, or the reason the input was given up on.
type Attempt = std::result::Result<Vec<f32>, String>;

#[derive(Debug, Clone)]
pub struct EmbedOutput {
    /// Successful embeddings in input order.
    pub embeddings: Vec<Embedding<f32>>,
    pub report: EmbedJobReport,
}

/// A configured embedding run. See the module docs for the dispatch discipline.
pub struct EmbedJob<'a> {
    cfg: &'a EmbedConfig,
    transport: &'a dyn EmbeddingTransport,
    tokenizer: &'a dyn Tokenizer,
    clock: Arc<dyn Clock>,
    checkpoint: Option<PathBuf>,
    cancel: Option<&'a AtomicBool>,
    rate_limited: bool,
}

impl<'a> EmbedJob<'a> {
    pub fn new(cfg: &'a EmbedConfig, transport: &'a dyn EmbeddingTransport) -> Self {
        EmbedJob {
            cfg,
            transport,
            tokenizer: &WhitespaceTokenizer,
            clock: Arc::new(SystemClock::new()),
            checkpoint: None,
            cancel: None,
            rate_limited: true,
        }
    }

    pub fn tokenizer(mut self, tokenizer: &'a dyn Tokenizer) -> Self {
        self.tokenizer = tokenizer;
        self
    }

    pub fn clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    /// Appends each success to `path` and skips ids already recorded there.
    pub fn checkpoint(mut self, path: impl Into<PathBuf>) -> Self {
        self.checkpoint = Some(path.into());
        self
    }

    /// Stops dispatching new requests once the flag is set; the run then fails with
    /// [`Error::Interrupted`] after in-flight requests finish.
    pub fn cancel_flag(mut self, flag: &'a AtomicBool) -> Self {
        self.cancel = Some(flag);
        self
    }

    /// Disables the rate limiter (for local transports).
    pub fn unlimited(mut self) -> Self {
        self.rate_limited = false;
        self
    }

    pub fn run(&self, texts: &[TextRecord]) -> Result<EmbedOutput> {
        self.cfg.validate()?;
        if texts.is_empty() {
            return Err(Error::invalid("no inputs to embed"));
        }
        let mut ids = HashSet::with_capacity(texts.len());
        for t in texts {
            if t.docid.is_empty() {
                return Err(Error::invalid("empty input id"));
            }
            if !ids.insert(t.docid.as_str()) {
                return Err(Error::DuplicateId(t.docid.clone()));
            }
        }
        drop(ids);

        let started = self.clock.now();
        let token_count_total: u64 = texts.iter().map(|t| self.tokenizer.count(&t.text) as u64).sum();

        let mut done: HashMap<String, Vec<f32>> = match &self.checkpoint {
            Some(path) => load_checkpoint(path, self.cfg.dimension)?,
            None => HashMap::new(),
        };
        let pending: Vec<usize> = (0..texts.len()).filter(|&i| !done.contains_key(&texts[i].docid)).collect();
        let resumed = texts.len() - pending.len();

        let writer = match &self.checkpoint {
            Some(path) => Some(Mutex::new(open_checkpoint_writer(path)?)),
            None => None,
        };
        let limiter = RateLimiter::per_minute(self.cfg.rate_limit, self.clock.clone());
        let results: Vec<Mutex<Option<Attempt>>> = pending.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let requests = AtomicU64::new(0);
        let retries = AtomicU64::new(0);
        let first_error: Mutex<Option<Error>> = Mutex::new(None);
        let interrupted = AtomicBool::new(false);

        let workers = self.cfg.max_parallel.min(pending.len()).max(1);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    if self.cancel.is_some_and(|c| c.load(Ordering::SeqCst)) {
                        interrupted.store(true, Ordering::SeqCst);
                        return;
                    }
                    if first_error.lock().is_some() {
                        return;
                    }
                    let slot = next.fetch_add(1, Ordering::SeqCst);
                    let Some(&input) = pending.get(slot) else { return };
                    let record = &texts[input];
                    let outcome = self.embed_one(&record.text, &limiter, &requests, &retries);
                    if let (Ok(vector), Some(writer)) = (&outcome, &writer) {
                        let mut w = writer.lock();
                        let written = w
                            .write(&CorpusRecord::new(record.docid.clone(), vector.clone()))
                            .and_then(|_| w.flush());
                        if let Err(e) = written {
                            first_error.lock().get_or_insert(e);
                            return;
                        }
                    }
                    if let Err(reason) = &outcome {
                        log::warn!("giving up on `{}`: {reason}", record.docid);
                    }
                    *results[slot].lock() = Some(outcome);
                });
            }
        });

        if let Some(e) = first_error.into_inner() {
            return Err(e);
        }
        if interrupted.load(Ordering::SeqCst) {
            return Err(Error::Interrupted);
        }

        let mut fresh: HashMap<usize, Attempt> = HashMap::new();
        for (slot, cell) in results.into_iter().enumerate() {
            if let Some(outcome) = cell.into_inner() {
                fresh.insert(pending[slot], outcome);
            }
        }
        let mut embeddings = Vec::with_capacity(texts.len());
        let mut failures = Vec::new();
        for (i, record) in texts.iter().enumerate() {
            let vector = match done.remove(&record.docid) {
                Some(v) => v,
                None => match fresh.remove(&i) {
                    Some(Ok(v)) => v,
                    Some(Err(reason)) => {
                        failures.push((record.docid.clone(), reason));
                        continue;
                    }
                    None => return Err(Error::Interrupted),
                },
            };
            embeddings.push(Embedding { id: record.docid.clone(), values: vector });
        }

        let report = EmbedJobReport {
            total_inputs: texts.len(),
            succeeded: embeddings.len(),
            failed_permanently: failures.len(),
            resumed,
            requests_sent: requests.into_inner(),
            retries_performed: retries.into_inner(),
            elapsed: self.clock.now().saturating_sub(started),
            token_count_total,
            token_count_mean: token_count_total as f64 / texts.len() as f64,
            failures,
        };
        Ok(EmbedOutput { embeddings, report })
    }

    fn embed_one(
        &self,
        text: &str,
        limiter: &RateLimiter,
        requests: &AtomicU64,
        retries: &AtomicU64,
    ) -> Attempt {
        let input = self.tokenizer.truncate(text, self.cfg.max_input_tokens);
        let mut attempt = 1;
        loop {
            if self.rate_limited {
                limiter.acquire();
            }
            requests.fetch_add(1, Ordering::SeqCst);
            let error = match self.transport.embed(&self.cfg.model_name, &input) {
                Ok(v) if v.len() != self.cfg.dimension => {
                    return Err(format!("expected {} dimensions, got {}", self.cfg.dimension, v.len()))
                }
                Ok(v) if v.iter().any(|x| !x.is_finite()) => return Err("non-finite component in response".into()),
                Ok(v) => return Ok(v),
                Err(e) => e,
            };
            if !error.is_transient() {
                return Err(error.to_string());
            }
            if attempt >= self.cfg.retry.max_attempts {
                return Err(format!("{error} (after {attempt} attempts)"));
            }
            log::debug!("transient failure on attempt {attempt}: {error}");
            retries.fetch_add(1, Ordering::SeqCst);
            self.clock.sleep(self.cfg.retry.backoff(attempt));
            attempt += 1;
        }
    }
}

/// Embeds `texts` with default tokenizer and wall clock, no checkpoint.
pub fn embed_batch(
    cfg: &EmbedConfig,
    transport: &dyn EmbeddingTransport,
    texts: &[TextRecord],
) -> Result<EmbedOutput> {
    EmbedJob::new(cfg, transport).run(texts)
}

fn load_checkpoint(path: &Path, dimension: usize) -> Result<HashMap<String, Vec<f32>>> {
    if !path.exists() {
        return Ok(HashMap::new());
    }
    let opts = ReadOptions { gzip: Some(false), on_bad_line: BadLinePolicy::Skip, dimension: Some(dimension) };
    let mut done = HashMap::new();
    for record in open_corpus(path, opts)? {
        let record = record?;
        done.insert(record.docid, record.vector);
    }
    Ok(done)
}

/// Opens the checkpoint for appending, terminating a torn final line first.
fn open_checkpoint_writer(path: &Path) -> Result<CorpusWriter<File>> {
    let mut file = OpenOptions::new().create(true).read(true).append(true).open(path)?;
    let len = file.metadata()?.len();
    let mut needs_newline = false;
    if len > 0 {
        let mut last = [0u8; 1];
        file.seek(SeekFrom::Start(len - 1))?;
        file.read_exact(&mut last)?;
        needs_newline = last[0] != b'\n';
    }
    if needs_newline {
        use std::io::Write;
        file.write_all(b"\n")?;
    }
    Ok(CorpusWriter::new(file, false))
}
