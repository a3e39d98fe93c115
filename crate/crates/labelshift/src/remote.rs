//! Client for an embedding service speaking
//! `POST <endpoint>/embed {"labels": [..]}` →
//! `{"dim": d, "vectors": {"<label>": [..], ..}}`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use labelshift_core::{Composition, EmbeddingStore};
use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub batch_size: usize,
    pub max_inflight: usize,
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub initial_backoff: Duration,
    pub timeout: Duration,
    pub token: Option<String>,
    pub provider_id: Option<String>,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            batch_size: 512,
            max_inflight: 4,
            max_retries: 3,
            initial_backoff: Duration::from_millis(250),
            timeout: Duration::from_secs(120),
            token: None,
            provider_id: None,
        }
    }

    fn url(&self) -> String {
        format!("{}/embed", self.endpoint.trim_end_matches('/'))
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    labels: &'a [String],
}

#[derive(Debug, Deserialize)]
pub struct EmbedResponse {
    pub dim: usize,
    pub vectors: HashMap<String, Vec<f64>>,
}

/// Number of requests needed for `labels` labels.
pub fn batch_count(labels: usize, batch_size: usize) -> usize {
    labels.div_ceil(batch_size)
}

/// Fetches one unit vector per label. Batches run on up to `max_inflight`
/// threads; each batch is retried on connection errors, timeouts, 429 and
/// 5xx responses with doubling backoff.
pub fn fetch_remote_embeddings(config: &RemoteConfig, labels: &[String]) -> Result<EmbeddingStore> {
    if config.batch_size == 0 {
        return Err(Error::Remote("batch size must be positive".into()));
    }
    if labels.is_empty() {
        return Err(Error::Remote("no labels to embed".into()));
    }
    let client = Client::builder()
        .timeout(config.timeout)
        .build()
        .map_err(|e| Error::Remote(e.to_string()))?;
    let batches: Vec<&[String]> = labels.chunks(config.batch_size).collect();
    let results: Mutex<Vec<Option<Result<EmbedResponse>>>> =
        Mutex::new((0..batches.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = config.max_inflight.clamp(1, batches.len());

    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(batch) = batches.get(i) else { break };
                let result = post_with_retry(&client, config, batch);
                let failed = result.is_err();
                results.lock().unwrap()[i] = Some(result);
                if failed {
                    next.store(batches.len(), Ordering::Relaxed);
                }
            });
        }
    });

    let provider = config
        .provider_id
        .clone()
        .unwrap_or_else(|| format!("remote:{}", config.endpoint));
    let mut store: Option<EmbeddingStore> = None;
    for (batch, result) in batches.iter().zip(results.into_inner().unwrap()) {
        let Some(result) = result else { continue };
        let response = result?;
        let store = match &mut store {
            Some(s) if s.dim() != response.dim => {
                return Err(Error::Remote(format!(
                    "dimension changed between batches: {} vs {}",
                    s.dim(),
                    response.dim
                )))
            }
            Some(s) => s,
            None => store.insert(EmbeddingStore::new(
                provider.clone(),
                Composition::WholeString,
                response.dim,
            )?),
        };
        for label in batch.iter() {
            let v = response
                .vectors
                .get(label)
                .ok_or_else(|| Error::Remote(format!("response is missing label {label:?}")))?;
            store.insert(label.clone(), v)?;
        }
    }
    store.ok_or_else(|| Error::Remote("no batch completed".into()))
}

fn post_with_retry(client: &Client, config: &RemoteConfig, batch: &[String]) -> Result<EmbedResponse> {
    let mut delay = config.initial_backoff;
    let mut attempt = 0;
    loop {
        match post_once(client, config, batch) {
            Ok(r) => return Ok(r),
            Err(Attempt::Fatal(e)) => return Err(e),
            Err(Attempt::Transient(e)) if attempt >= config.max_retries => return Err(e),
            Err(Attempt::Transient(e)) => {
                log::warn!("embedding request failed ({e}), retrying in {delay:?}");
                thread::sleep(delay);
                delay *= 2;
                attempt += 1;
            }
        }
    }
}

enum Attempt {
    Transient(Error),
    Fatal(Error),
}

fn post_once(client: &Client, config: &RemoteConfig, batch: &[String]) -> Result<EmbedResponse, Attempt> {
    let mut request = client.post(config.url()).json(&EmbedRequest { labels: batch });
    if let Some(token) = &config.token {
        request = request.bearer_auth(token);
    }
    let response = request.send().map_err(|e| {
        let err = Error::Remote(e.to_string());
        if e.is_connect() || e.is_timeout() || e.is_request() {
            Attempt::Transient(err)
        } else {
            Attempt::Fatal(err)
        }
    })?;
    let status = response.status();
    if !status.is_success() {
        let err = Error::Remote(format!("HTTP {status}"));
        return Err(if status.is_server_error() || status == StatusCode::TOO_MANY_REQUESTS {
            Attempt::Transient(err)
        } else {
            Attempt::Fatal(err)
        });
    }
    let body = response
        .bytes()
        .map_err(|e| Attempt::Transient(Error::Remote(e.to_string())))?;
    serde_json::from_slice(&body)
        .map_err(|e| Attempt::Fatal(Error::Remote(format!("malformed response: {e}"))))
}
