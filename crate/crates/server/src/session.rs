use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use mtx_core::segmentation::{run_query, LabelField, QuerySpec};
use mtx_core::{
    build_merge_tree, compute_distance_field, compute_persistence, BranchDecomposition,
    Connectivity, DistanceField, MergeTree, MultiFieldDataset, TraitConfig,
};

use crate::error::ApiError;

/// Everything derived from one trait: the distance field, its full merge tree
/// and branch decomposition, and the segmentations requested so far.
pub struct TraitSession {
    pub config: TraitConfig,
    pub distance: DistanceField,
    pub tree: MergeTree,
    pub bd: BranchDecomposition,
    cache: Mutex<HashMap<String, Arc<LabelField>>>,
}

impl TraitSession {
    pub fn compute(dataset: &MultiFieldDataset, config: TraitConfig) -> mtx_core::Result<Self> {
        let distance = compute_distance_field(dataset, &config)?;
        let tree = build_merge_tree(&distance, Connectivity::Face6)?;
        let bd = compute_persistence(&tree);
        Ok(TraitSession {
            config,
            distance,
            tree,
            bd,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Cached per query.
    pub fn segmentation(&self, spec: &QuerySpec) -> Result<Arc<LabelField>, ApiError> {
        let key = format!(
            "{}|{}|{:x}|{:?}",
            spec.method,
            spec.metric.kind,
            spec.metric.threshold.to_bits(),
            spec.cut_level.map(f64::to_bits)
        );
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(Arc::clone(hit));
        }
        let lf = Arc::new(run_query(&self.tree, &self.bd, spec)?);
        self.cache
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| Arc::clone(&lf));
        Ok(lf)
    }
}

pub struct Session {
    pub dataset: Arc<MultiFieldDataset>,
    pub current: Option<Arc<TraitSession>>,
}

/// Shared handle: one dataset, at most one trait at a time. Writers swap in
/// fully computed state, so readers never see a partial update.
#[derive(Clone, Default)]
pub struct AppState {
    inner: Arc<RwLock<Option<Session>>>,
}

impl AppState {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(dataset: MultiFieldDataset) -> Self {
        let state = Self::default();
        state.set_dataset(dataset);
        state
    }

    pub fn set_dataset(&self, dataset: MultiFieldDataset) {
        *self.inner.write().unwrap() = Some(Session {
            dataset: Arc::new(dataset),
            current: None,
        });
    }

    pub fn dataset(&self) -> Result<Arc<MultiFieldDataset>, ApiError> {
        self.inner
            .read()
            .unwrap()
            .as_ref()
            .map(|s| Arc::clone(&s.dataset))
            .ok_or(ApiError::NotReady)
    }

    pub fn current(&self) -> Result<Arc<TraitSession>, ApiError> {
        let guard = self.inner.read().unwrap();
        let session = guard.as_ref().ok_or(ApiError::NotReady)?;
        session.current.clone().ok_or(ApiError::NoTrait)
    }

    /// Installs `trait_session` if the dataset it was computed on is still
    /// the loaded one.
    pub fn install(
        &self,
        dataset: &Arc<MultiFieldDataset>,
        trait_session: TraitSession,
    ) -> Result<Arc<TraitSession>, ApiError> {
        let mut guard = self.inner.write().unwrap();
        let session = guard.as_mut().ok_or(ApiError::NotReady)?;
        if !Arc::ptr_eq(&session.dataset, dataset) {
            return Err(ApiError::Internal("dataset changed during trait update".into()));
        }
        let ts = Arc::new(trait_session);
        session.current = Some(Arc::clone(&ts));
        Ok(ts)
    }
}
