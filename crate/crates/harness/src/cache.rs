//! On-disk response cache keyed by model, image, prompt and temperature.
//!
//! Only raw text is stored, so parser changes never require re-querying.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use bindbench_providers::{ModelResponse, Usage};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CacheKey(pub String);

impl CacheKey {
    pub fn new(model_id: &str, image: &[u8], prompt: &str, temperature: f64) -> Self {
        let mut h = Sha256::new();
        h.update(b"bindbench-cache-v1\0");
        h.update(model_id.as_bytes());
        h.update([0]);
        h.update(Sha256::digest(image));
        h.update(Sha256::digest(prompt.as_bytes()));
        h.update(temperature.to_bits().to_le_bytes());
        CacheKey(hex::encode(h.finalize()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for CacheKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CachedResponse {
    pub model_id: String,
    pub raw_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Usage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_id: Option<String>,
    #[serde(default)]
    pub truncated: bool,
}

impl CachedResponse {
    pub fn from_response(model_id: &str, r: &ModelResponse) -> Self {
        Self {
            model_id: model_id.to_string(),
            raw_text: r.raw_text.clone(),
            usage: r.usage,
            request_id: r.request_id.clone(),
            truncated: r.truncated,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResponseCache {
    root: PathBuf,
}

impl ResponseCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, key: &CacheKey) -> PathBuf {
        self.root.join(&key.0[..2]).join(format!("{}.json", key.0))
    }

    /// A missing or unreadable entry is a miss.
    pub fn get(&self, key: &CacheKey) -> Option<CachedResponse> {
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        match serde_json::from_str(&text) {
            Ok(entry) => Some(entry),
            Err(e) => {
                tracing::warn!(key = %key, error = %e, "ignoring corrupt cache entry");
                None
            }
        }
    }

    /// Writes through a temporary file and a rename, so readers never see a
    /// partial entry.
    pub fn put(&self, key: &CacheKey, entry: &CachedResponse) -> std::io::Result<()> {
        let path = self.path(key);
        let dir = path.parent().expect("cache path has a parent");
        std::fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(".{}.{}.tmp", key.0, std::process::id()));
        std::fs::write(&tmp, serde_json::to_vec(entry).expect("cache entry serializes"))?;
        std::fs::rename(&tmp, &path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_depends_on_every_input() {
        let base = CacheKey::new("m", b"img", "p", 0.0);
        assert_eq!(base, CacheKey::new("m", b"img", "p", 0.0));
        assert_eq!(base.0.len(), 64);
        for other in [
            CacheKey::new("m2", b"img", "p", 0.0),
            CacheKey::new("m", b"imh", "p", 0.0),
            CacheKey::new("m", b"img", "q", 0.0),
            CacheKey::new("m", b"img", "p", 0.5),
            // Boundary shifts between fields must not collide.
            CacheKey::new("mi", b"mg", "p", 0.0),
        ] {
            assert_ne!(base, other);
        }
    }

    #[test]
    fn put_then_get() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::new(dir.path());
        let key = CacheKey::new("m", b"img", "p", 0.0);
        assert!(cache.get(&key).is_none());
        let entry = CachedResponse {
            model_id: "m".into(),
            raw_text: "  [True]\n".into(),
            usage: None,
            request_id: Some("r".into()),
            truncated: false,
        };
        cache.put(&key, &entry).unwrap();
        assert_eq!(cache.get(&key), Some(entry));
        assert!(dir.path().join(&key.0[..2]).join(format!("{key}.json")).is_file());
        std::fs::write(cache.path(&key), "{not json").unwrap();
        assert!(cache.get(&key).is_none());
    }
}
