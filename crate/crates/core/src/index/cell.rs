use std::sync::{Arc, Mutex, MutexGuard, RwLock, TryLockError};

use super::IndexSnapshot;

/// Holds the currently published snapshot.
///
/// Readers clone the `Arc` and keep using it for as long as they like, so a
/// publish never disturbs a running query. Writers serialize on a separate
/// lease that is not held by readers.
#[derive(Debug, Default)]
pub struct SnapshotCell {
    current: RwLock<Option<Arc<IndexSnapshot>>>,
    writer: Mutex<()>,
}

/// Exclusive right to publish; obtained from [`SnapshotCell::try_write`].
#[derive(Debug)]
pub struct WriteLease<'a> {
    cell: &'a SnapshotCell,
    _guard: MutexGuard<'a, ()>,
}

impl SnapshotCell {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_snapshot(snapshot: IndexSnapshot) -> Self {
        let cell = Self::new();
        cell.store(snapshot);
        cell
    }

    pub fn load(&self) -> Option<Arc<IndexSnapshot>> {
        self.current.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Takes the writer lease, or `None` when another writer holds it.
    pub fn try_write(&self) -> Option<WriteLease<'_>> {
        match self.writer.try_lock() {
            Ok(guard) => Some(WriteLease { cell: self, _guard: guard }),
            Err(TryLockError::Poisoned(p)) => Some(WriteLease {
                cell: self,
                _guard: p.into_inner(),
            }),
            Err(TryLockError::WouldBlock) => None,
        }
    }

    fn store(&self, snapshot: IndexSnapshot) -> Arc<IndexSnapshot> {
        let arc = Arc::new(snapshot);
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = Some(arc.clone());
        arc
    }
}

impl WriteLease<'_> {
    pub fn current(&self) -> Option<Arc<IndexSnapshot>> {
        self.cell.load()
    }

    /// Publishes `snapshot`, renumbered so generations never go backwards.
    pub fn publish(&self, snapshot: IndexSnapshot) -> Arc<IndexSnapshot> {
        let floor = self.cell.load().map_or(0, |s| s.generation() + 1);
        let generation = snapshot.generation().max(floor);
        self.cell.store(snapshot.with_generation(generation))
    }
}
