use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use sha2::{Digest, Sha256};

use super::files::decode_depth;
use super::lvdm::decode_lvdm;
use super::png_io::decode_mask_png;
use crate::error::{Error, Result};
use crate::geometry::{DepthConvention, DepthMap, InstanceMaskFrame};

const MAX_RESPONSE: u64 = 256 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProviderKind {
    Depth,
    Segmentation,
}

impl ProviderKind {
    pub fn path(self) -> &'static str {
        match self {
            ProviderKind::Depth => "/v1/depth",
            ProviderKind::Segmentation => "/v1/segment",
        }
    }
}

impl fmt::Display for ProviderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProviderKind::Depth => "depth",
            ProviderKind::Segmentation => "segmentation",
        })
    }
}

/// Where an external depth estimator or segmenter lives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProviderEndpoint {
    pub kind: ProviderKind,
    /// e.g. `http://127.0.0.1:9000`
    pub base_url: String,
    pub timeout: Duration,
    pub auth_token: Option<String>,
}

impl ProviderEndpoint {
    pub fn new(kind: ProviderKind, base_url: impl Into<String>) -> Self {
        Self { kind, base_url: base_url.into(), timeout: Duration::from_secs(30), auth_token: None }
    }

    fn url(&self) -> String {
        format!("{}{}", self.base_url.trim_end_matches('/'), self.kind.path())
    }
}

/// HTTP client for one provider with a content-addressed response cache.
///
/// Responses are validated before they are cached, so a cached body always
/// decodes. Concurrent misses on the same image may both reach the provider;
/// the first body stored wins.
pub struct ProviderClient {
    endpoint: ProviderEndpoint,
    agent: ureq::Agent,
    cache: Mutex<HashMap<[u8; 32], Arc<Vec<u8>>>>,
    calls: AtomicUsize,
}

impl fmt::Debug for ProviderClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProviderClient").field("endpoint", &self.endpoint).field("calls", &self.calls()).finish()
    }
}

impl ProviderClient {
    pub fn new(endpoint: ProviderEndpoint) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(endpoint.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { endpoint, agent, cache: Mutex::new(HashMap::new()), calls: AtomicUsize::new(0) }
    }

    pub fn endpoint(&self) -> &ProviderEndpoint {
        &self.endpoint
    }

    /// Requests actually sent to the provider.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    fn error(&self, cause: impl Into<String>) -> Error {
        Error::Provider { kind: self.endpoint.kind.to_string(), cause: cause.into() }
    }

    fn post(&self, image_png: &[u8]) -> Result<Vec<u8>> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let mut req = self.agent.post(&self.endpoint.url()).header("Content-Type", "image/png");
        if let Some(token) = &self.endpoint.auth_token {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let mut resp = req.send(image_png).map_err(|e| self.error(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(self.error(format!("HTTP {}", status.as_u16())));
        }
        resp.body_mut()
            .with_config()
            .limit(MAX_RESPONSE)
            .read_to_vec()
            .map_err(|e| self.error(e.to_string()))
    }

    fn fetch<T>(&self, image_png: &[u8], decode: impl Fn(&[u8]) -> Result<T>) -> Result<T> {
        let key: [u8; 32] = Sha256::digest(image_png).into();
        let hit = self.cache.lock().expect("provider cache poisoned").get(&key).cloned();
        if let Some(body) = hit {
            return decode(&body);
        }
        let body = self.post(image_png)?;
        let value = decode(&body).map_err(|e| self.error(format!("invalid response: {e}")))?;
        self.cache.lock().expect("provider cache poisoned").entry(key).or_insert_with(|| Arc::new(body));
        Ok(value)
    }

    /// Depth for an RGB PNG. The provider answers with an LVDM body.
    pub fn fetch_depth(&self, image_png: &[u8], convention: DepthConvention) -> Result<DepthMap> {
        self.expect_kind(ProviderKind::Depth)?;
        self.fetch(image_png, |b| {
            if b.starts_with(super::lvdm::LVDM_MAGIC) {
                decode_lvdm(b, convention)
            } else {
                decode_depth(b, convention)
            }
        })
    }

    /// Instance masks for an RGB PNG. The provider answers with an indexed PNG.
    pub fn fetch_segmentation(&self, image_png: &[u8]) -> Result<InstanceMaskFrame> {
        self.expect_kind(ProviderKind::Segmentation)?;
        self.fetch(image_png, |b| decode_mask_png(b, 0))
    }

    fn expect_kind(&self, kind: ProviderKind) -> Result<()> {
        if self.endpoint.kind != kind {
            return Err(Error::validation(
                "provider",
                format!("{} endpoint used for a {kind} request", self.endpoint.kind),
            ));
        }
        Ok(())
    }
}
