//! Bounded, single-flight cache of built hierarchies keyed by tree token.

use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use lru::LruCache;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use synopsviz_core::{FacetSelection, HierarchyConfig, HierarchyTree};
use tokio::sync::OnceCell;

use crate::error::ApiError;

/// Everything that determines a tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HierarchyKey {
    pub dataset_id: String,
    pub selection: FacetSelection,
    pub config: HierarchyConfig,
}

impl HierarchyKey {
    /// Opaque token: hex sha256 of the key's canonical JSON, truncated to
    /// 128 bits.
    pub fn token(&self) -> String {
        let json = serde_json::to_vec(self).expect("keys serialize");
        hex::encode(&Sha256::digest(json)[..16])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
}

impl CacheStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CacheStatus::Hit => "hit",
            CacheStatus::Miss => "miss",
        }
    }
}

type Slot = Arc<OnceCell<Arc<HierarchyTree>>>;

pub struct HierarchyCache {
    trees: Mutex<LruCache<String, Slot>>,
    /// Tokens stay resolvable after their tree is evicted; the tree is then
    /// rebuilt from the key.
    keys: Mutex<LruCache<String, HierarchyKey>>,
    builds: AtomicU64,
}

impl HierarchyCache {
    pub fn new(capacity: usize) -> Self {
        let cap = NonZeroUsize::new(capacity.max(1)).expect("nonzero");
        let key_cap = NonZeroUsize::new(capacity.max(1).saturating_mul(64)).expect("nonzero");
        HierarchyCache {
            trees: Mutex::new(LruCache::new(cap)),
            keys: Mutex::new(LruCache::new(key_cap)),
            builds: AtomicU64::new(0),
        }
    }

    pub fn key_for(&self, token: &str) -> Option<HierarchyKey> {
        self.keys.lock().expect("cache lock").get(token).cloned()
    }

    /// Number of trees built so far.
    pub fn builds(&self) -> u64 {
        self.builds.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.trees.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Returns the tree for `key`, building it on a blocking thread if
    /// needed. Concurrent callers for the same key share one build; a
    /// failed build is not cached.
    pub async fn get_or_build<F>(
        &self,
        key: &HierarchyKey,
        build: F,
    ) -> Result<(Arc<HierarchyTree>, CacheStatus), ApiError>
    where
        F: FnOnce() -> Result<HierarchyTree, ApiError> + Send + 'static,
    {
        let token = key.token();
        let slot: Slot = {
            let mut trees = self.trees.lock().expect("cache lock");
            trees
                .get_or_insert(token.clone(), || Arc::new(OnceCell::new()))
                .clone()
        };
        if let Some(tree) = slot.get() {
            return Ok((Arc::clone(tree), CacheStatus::Hit));
        }
        let tree = slot
            .get_or_try_init(|| async {
                self.builds.fetch_add(1, Ordering::Relaxed);
                let tree = tokio::task::spawn_blocking(build)
                    .await
                    .map_err(|e| ApiError::internal(format!("hierarchy build panicked: {e}")))??;
                Ok::<_, ApiError>(Arc::new(tree))
            })
            .await?;
        self.keys
            .lock()
            .expect("cache lock")
            .put(token, key.clone());
        Ok((Arc::clone(tree), CacheStatus::Miss))
    }
}
