//! In-memory sessions with LRU eviction.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use levictl_core::ingest::Session;
use levictl_core::pipeline::{synthesize_inference_signals, InferenceOutput, SessionConfig, TrajectoryDocument};
use sha2::{Digest, Sha256};

/// Mutable editing state; replaced wholesale on every write.
#[derive(Clone, Debug, Default)]
pub struct EditState {
    pub trajectories: Option<Arc<TrajectoryDocument>>,
}

type SynthKey = ([u8; 32], u64);

/// One session: immutable inputs plus editing state.
#[derive(Debug)]
pub struct SessionEntry {
    session: Session,
    state: RwLock<Arc<EditState>>,
    synth_cache: Mutex<Option<(SynthKey, Arc<InferenceOutput>)>>,
}

impl SessionEntry {
    pub fn new(session: Session) -> Self {
        Self { session, state: RwLock::new(Arc::default()), synth_cache: Mutex::new(None) }
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    /// A consistent view of the editing state.
    pub fn snapshot(&self) -> Arc<EditState> {
        self.state.read().expect("session state poisoned").clone()
    }

    pub fn set_trajectories(&self, doc: TrajectoryDocument) {
        let mut state = self.state.write().expect("session state poisoned");
        *state = Arc::new(EditState { trajectories: Some(Arc::new(doc)) });
    }

    /// The config a synthesis with `doc` and control-point `scale` runs under.
    pub fn config_for(&self, doc: &TrajectoryDocument, scale: f64) -> SessionConfig {
        let mut cfg = self.session.config().clone();
        cfg.frames = doc.frames;
        cfg.policy.inference_scale = scale;
        cfg
    }

    /// Run (or reuse) the synthesis for the given trajectories. Preview and
    /// export both come through here so they always agree.
    pub fn synthesize(&self, doc: &TrajectoryDocument, scale: f64) -> levictl_core::Result<Arc<InferenceOutput>> {
        let key: SynthKey = (Sha256::digest(doc.to_json().as_bytes()).into(), scale.to_bits());
        if let Some((k, out)) = self.synth_cache.lock().expect("synthesis cache poisoned").as_ref() {
            if *k == key {
                return Ok(out.clone());
            }
        }
        let cfg = self.config_for(doc, scale);
        let out = Arc::new(synthesize_inference_signals(
            self.session.depth0(),
            self.session.masks0(),
            &doc.objects,
            &cfg,
        )?);
        *self.synth_cache.lock().expect("synthesis cache poisoned") = Some((key, out.clone()));
        Ok(out)
    }
}

struct Slot {
    entry: Arc<SessionEntry>,
    last_used: u64,
}

/// Session map bounded by `capacity`; the least recently used session is
/// dropped when a new one would exceed it.
pub struct SessionStore {
    capacity: usize,
    inner: Mutex<(HashMap<String, Slot>, u64)>,
}

impl SessionStore {
    pub fn new(capacity: usize) -> Self {
        Self { capacity: capacity.max(1), inner: Mutex::new((HashMap::new(), 0)) }
    }

    pub fn insert(&self, session: Session) -> Arc<SessionEntry> {
        let id = session.id().to_string();
        let entry = Arc::new(SessionEntry::new(session));
        let mut guard = self.inner.lock().expect("session store poisoned");
        let (map, clock) = &mut *guard;
        *clock += 1;
        map.insert(id, Slot { entry: entry.clone(), last_used: *clock });
        while map.len() > self.capacity {
            let oldest = map.iter().min_by_key(|(_, s)| s.last_used).map(|(k, _)| k.clone()).expect("nonempty");
            log::info!("evicting session {oldest}");
            map.remove(&oldest);
        }
        entry
    }

    pub fn get(&self, id: &str) -> Option<Arc<SessionEntry>> {
        let mut guard = self.inner.lock().expect("session store poisoned");
        let (map, clock) = &mut *guard;
        *clock += 1;
        let slot = map.get_mut(id)?;
        slot.last_used = *clock;
        Some(slot.entry.clone())
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("session store poisoned").0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use levictl_core::geometry::{DepthConvention, DepthMap, InstanceMaskFrame};
    use levictl_core::ingest::RgbImage;

    fn session(id: &str) -> Session {
        let mut m = InstanceMaskFrame::empty(4, 4, 0);
        m.set(1, 1, 1);
        Session::new(
            id,
            RgbImage::filled(4, 4, [0; 3]),
            DepthMap::constant(4, 4, 0.5, DepthConvention::default()).unwrap(),
            m,
            SessionConfig::for_resolution(4, 4).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn evicts_least_recently_used() {
        let store = SessionStore::new(2);
        store.insert(session("a"));
        store.insert(session("b"));
        assert!(store.get("a").is_some());
        store.insert(session("c"));
        assert!(store.get("b").is_none());
        assert!(store.get("a").is_some() && store.get("c").is_some());
        assert_eq!(store.len(), 2);
    }

    #[test]
    fn snapshots_survive_writes() {
        let store = SessionStore::new(4);
        let e = store.insert(session("a"));
        let before = e.snapshot();
        let doc = TrajectoryDocument { version: 1, frames: 2, resolution: [4, 4], objects: vec![] };
        e.set_trajectories(doc.clone());
        assert!(before.trajectories.is_none());
        assert_eq!(e.snapshot().trajectories.as_deref(), Some(&doc));
    }
}
