use std::path::Path;
use std::sync::{Arc, Mutex};

use donut_core::index::{IndexError, SnapshotCell};
use donut_core::taxonomy::{corpus_statistics, tag_tree, CorpusStats, TagTree};
use donut_core::IndexSnapshot;
use sha2::{Digest, Sha256};

use crate::config::ServiceConfig;
use crate::logging::{Clock, LogError, LogKey, RequestLog};

#[derive(Debug, thiserror::Error)]
pub enum StartError {
    #[error("request log unavailable, refusing to start: {0}")]
    Log(#[from] LogError),
    #[error("index {path}: {source}")]
    Index { path: String, source: IndexError },
}

#[derive(Debug, thiserror::Error)]
pub enum ReloadError {
    #[error("a reload is already in progress")]
    InProgress,
    #[error("index {path}: {source}")]
    Index { path: String, source: IndexError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReloadOutcome {
    pub generation: u64,
    pub doc_count: usize,
    /// False when the file matched the snapshot already being served.
    pub reloaded: bool,
}

/// Aggregates computed once per generation.
pub struct Derived {
    pub generation: u64,
    pub stats: CorpusStats,
    pub tree: TagTree,
}

/// Everything the handlers share.
pub struct AppState {
    pub config: ServiceConfig,
    pub cell: SnapshotCell,
    pub log: Option<RequestLog>,
    /// Digest of the index file behind the current snapshot.
    loaded_digest: Mutex<Option<[u8; 32]>>,
    derived: Mutex<Option<Arc<Derived>>>,
}

fn read_index(path: &Path) -> Result<(IndexSnapshot, [u8; 32]), IndexError> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes).into();
    Ok((IndexSnapshot::from_bytes(&bytes)?, digest))
}

impl AppState {
    /// State without request logging, serving `snapshot` if given.
    pub fn unlogged(config: ServiceConfig, snapshot: Option<IndexSnapshot>) -> Self {
        AppState {
            config,
            cell: snapshot.map_or_else(SnapshotCell::new, SnapshotCell::with_snapshot),
            log: None,
            loaded_digest: Mutex::new(None),
            derived: Mutex::new(None),
        }
    }

    /// Production start-up: the log key must load (fail closed), expired
    /// logs are purged, and the index file is loaded if it exists. A missing
    /// index file is not fatal; searches answer 503 until a reload.
    pub fn start(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self, StartError> {
        let key = LogKey::load(&config.log_key_path)?;
        let log = RequestLog::open(&config.log_dir, key, config.retention_days, clock)?;
        let mut state = AppState::unlogged(config, None);
        state.log = Some(log);
        let path = state.config.index_path.clone();
        if path.exists() {
            let (snapshot, digest) = read_index(&path).map_err(|source| StartError::Index {
                path: path.display().to_string(),
                source,
            })?;
            state.cell = SnapshotCell::with_snapshot(snapshot);
            *state.loaded_digest.lock().expect("digest lock") = Some(digest);
        }
        Ok(state)
    }

    pub fn snapshot(&self) -> Option<Arc<IndexSnapshot>> {
        self.cell.load()
    }

    /// Stats and tag tree for `snapshot`, cached by generation.
    pub fn derived(&self, snapshot: &IndexSnapshot) -> Arc<Derived> {
        let mut guard = self.derived.lock().expect("derived lock");
        match guard.as_ref() {
            Some(d) if d.generation == snapshot.generation() => Arc::clone(d),
            _ => {
                let d = Arc::new(Derived {
                    generation: snapshot.generation(),
                    stats: corpus_statistics(snapshot.entries()),
                    tree: tag_tree(snapshot.entries()),
                });
                *guard = Some(Arc::clone(&d));
                d
            }
        }
    }

    /// Re-reads the index file and swaps it in when its content changed.
    /// Readers holding the old snapshot finish on it.
    pub fn reload(&self) -> Result<ReloadOutcome, ReloadError> {
        let lease = self.cell.try_write().ok_or(ReloadError::InProgress)?;
        let path = &self.config.index_path;
        let (snapshot, digest) = read_index(path).map_err(|source| ReloadError::Index {
            path: path.display().to_string(),
            source,
        })?;
        let mut loaded = self.loaded_digest.lock().expect("digest lock");
        if let (Some(current), Some(d)) = (lease.current(), *loaded) {
            if d == digest {
                return Ok(ReloadOutcome {
                    generation: current.generation(),
                    doc_count: current.doc_count(),
                    reloaded: false,
                });
            }
        }
        let published = lease.publish(snapshot);
        *loaded = Some(digest);
        Ok(ReloadOutcome {
            generation: published.generation(),
            doc_count: published.doc_count(),
            reloaded: true,
        })
    }
}
