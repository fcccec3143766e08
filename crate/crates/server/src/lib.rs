//! HTTP API for exploring trait-induced merge trees: dataset summary, trait
//! submission, simplified trees, segmentations, slices and the distance
//! histogram.

mod error;
mod session;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::str::FromStr;

use axum::extract::{Query, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine;
use serde::{Deserialize, Serialize};

use mtx_core::io::{tree_document, TreeDocument};
use mtx_core::segmentation::{histogram, HistogramBin, LegendEntry, QueryMethod, QuerySpec};
use mtx_core::{compute_persistence, simplify, MetricKind, SimplificationMetric, TraitConfig};

pub use error::ApiError;
pub use session::{AppState, Session, TraitSession};

pub const DEFAULT_PORT: u16 = 7878;
pub const DEFAULT_BINS: usize = 32;

type ApiResult<T> = Result<Json<T>, ApiError>;

/// All `/api` routes, plus static files from `ui_dir` at `/` when given.
pub fn router(state: AppState, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/dataset", get(dataset))
        .route("/api/trait", post(submit_trait))
        .route("/api/tree", get(tree))
        .route("/api/segmentation", get(segmentation))
        .route("/api/slice", get(slice))
        .route("/api/histogram", get(histogram_route))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

/// Binds `addr` and serves until the process ends.
pub async fn serve(state: AppState, addr: SocketAddr, ui_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state, ui_dir)).await
}

#[derive(Serialize)]
struct FieldSummary {
    name: String,
    min: f64,
    max: f64,
    derived: bool,
}

#[derive(Serialize)]
struct DatasetSummary {
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
    voxels: usize,
    fields: Vec<FieldSummary>,
    derived: Vec<String>,
    metadata: std::collections::BTreeMap<String, String>,
}

async fn dataset(State(state): State<AppState>) -> ApiResult<DatasetSummary> {
    let ds = state.dataset()?;
    let grid = ds.grid();
    Ok(Json(DatasetSummary {
        dims: grid.dims,
        spacing: grid.spacing,
        origin: grid.origin,
        voxels: grid.voxel_count(),
        fields: ds
            .fields()
            .iter()
            .map(|f| {
                let (min, max) = f.range();
                FieldSummary {
                    name: f.name.clone(),
                    min,
                    max,
                    derived: ds.is_derived(&f.name),
                }
            })
            .collect(),
        derived: ds.derived_names().to_vec(),
        metadata: ds.metadata.clone(),
    }))
}

#[derive(Serialize)]
struct TraitSummary {
    max_distance: f64,
    leaf_count: usize,
    branch_count: usize,
    node_count: usize,
    #[serde(rename = "trait")]
    config: serde_json::Value,
}

async fn submit_trait(State(state): State<AppState>, body: String) -> ApiResult<TraitSummary> {
    let config = TraitConfig::from_json(&body)?;
    let ds = state.dataset()?;
    let for_worker = std::sync::Arc::clone(&ds);
    let computed = tokio::task::spawn_blocking(move || TraitSession::compute(&for_worker, config))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    let ts = state.install(&ds, computed)?;
    let config = serde_json::from_str(&ts.config.to_json())
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(Json(TraitSummary {
        max_distance: ts.distance.max(),
        leaf_count: ts.tree.leaf_count(),
        branch_count: ts.bd.len(),
        node_count: ts.tree.nodes().len(),
        config,
    }))
}

#[derive(Debug, Default, Deserialize)]
pub struct SegmentationParams {
    method: Option<String>,
    metric: Option<String>,
    threshold: Option<String>,
    cut: Option<String>,
}

fn parse_f64(name: &str, raw: &str) -> Result<f64, ApiError> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ApiError::BadRequest(format!("{name} must be a finite number, got '{raw}'")))
}

fn parse_metric(
    metric: Option<&str>,
    threshold: Option<&str>,
) -> Result<SimplificationMetric, ApiError> {
    let kind = match metric {
        Some(m) => MetricKind::from_str(m)?,
        None => MetricKind::Persistence,
    };
    let t = match threshold {
        Some(t) => parse_f64("threshold", t)?,
        None => 0.0,
    };
    Ok(SimplificationMetric::new(kind, t)?)
}

impl SegmentationParams {
    fn spec(&self) -> Result<QuerySpec, ApiError> {
        let method = match self.method.as_deref() {
            Some(m) => QueryMethod::from_str(m)?,
            None => QueryMethod::BranchDecomposition,
        };
        let metric = parse_metric(self.metric.as_deref(), self.threshold.as_deref())?;
        let cut = self.cut.as_deref().map(|c| parse_f64("cut", c)).transpose()?;
        Ok(QuerySpec::new(method, metric, cut)?)
    }
}

#[derive(Debug, Deserialize)]
pub struct TreeParams {
    metric: Option<String>,
    threshold: Option<String>,
}

#[derive(Serialize)]
struct TreeResponse {
    metric: MetricKind,
    threshold: f64,
    leaf_count: usize,
    tree: TreeDocument,
}

async fn tree(State(state): State<AppState>, Query(p): Query<TreeParams>) -> ApiResult<TreeResponse> {
    let metric = parse_metric(p.metric.as_deref(), p.threshold.as_deref())?;
    let ts = state.current()?;
    let simplified = simplify(&ts.tree, metric);
    let bd = compute_persistence(&simplified);
    Ok(Json(TreeResponse {
        metric: metric.kind,
        threshold: metric.threshold,
        leaf_count: simplified.leaf_count(),
        tree: tree_document(&simplified, &bd),
    }))
}

#[derive(Serialize)]
struct SegmentationResponse {
    method: QueryMethod,
    metric: MetricKind,
    threshold: f64,
    cut: Option<f64>,
    dims: [usize; 3],
    legend: Vec<LegendEntry>,
    warnings: Vec<String>,
    /// Base64 of little-endian `u32` labels in grid order.
    labels: String,
}

async fn segmentation(
    State(state): State<AppState>,
    Query(p): Query<SegmentationParams>,
) -> ApiResult<SegmentationResponse> {
    let spec = p.spec()?;
    let ts = state.current()?;
    let lf = ts.segmentation(&spec)?;
    let bytes: Vec<u8> = lf.labels.iter().flat_map(|l| l.to_le_bytes()).collect();
    Ok(Json(SegmentationResponse {
        method: spec.method,
        metric: spec.metric.kind,
        threshold: spec.metric.threshold,
        cut: spec.cut_level,
        dims: lf.grid.dims,
        legend: lf.legend.clone(),
        warnings: lf.warnings.clone(),
        labels: base64::engine::general_purpose::STANDARD.encode(bytes),
    }))
}

#[derive(Debug, Deserialize)]
pub struct SliceParams {
    axis: Option<String>,
    index: Option<String>,
    layer: Option<String>,
    segids: Option<String>,
    #[serde(flatten)]
    segmentation: SegmentationParams,
}

#[derive(Serialize)]
#[serde(untagged)]
enum SliceValues {
    Distance(Vec<f64>),
    Labels(Vec<u32>),
}

#[derive(Serialize)]
struct SliceResponse {
    axis: char,
    index: usize,
    layer: &'static str,
    width: usize,
    height: usize,
    min: f64,
    max: f64,
    /// Row-major, `height` rows of `width` values.
    values: SliceValues,
}

async fn slice(State(state): State<AppState>, Query(p): Query<SliceParams>) -> ApiResult<SliceResponse> {
    let axis = match p.axis.as_deref().unwrap_or("z") {
        "x" => 0,
        "y" => 1,
        "z" => 2,
        other => return Err(ApiError::BadRequest(format!("axis must be x, y or z, got '{other}'"))),
    };
    let layer = match p.layer.as_deref().unwrap_or("distance") {
        "distance" => "distance",
        "labels" => "labels",
        other => {
            return Err(ApiError::BadRequest(format!(
                "layer must be distance or labels, got '{other}'"
            )))
        }
    };
    let segids: Option<Vec<u32>> = p
        .segids
        .as_deref()
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u32>()
                        .map_err(|_| ApiError::BadRequest(format!("bad segment id '{t}'")))
                })
                .collect()
        })
        .transpose()?;
    let spec = if layer == "labels" { Some(p.segmentation.spec()?) } else { None };
    let ts = state.current()?;
    let grid = *ts.distance.grid();
    let dims = grid.dims;
    let index = match p.index.as_deref() {
        Some(raw) => raw
            .trim()
            .parse::<usize>()
            .map_err(|_| ApiError::OutOfRange(format!("index '{raw}' is not a valid voxel index")))?,
        None => dims[axis] / 2,
    };
    if index >= dims[axis] {
        return Err(ApiError::OutOfRange(format!(
            "index {index} outside 0..{} on axis {}",
            dims[axis],
            ["x", "y", "z"][axis]
        )));
    }
    // in-plane axes: (columns, rows)
    let (u, v) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let voxel = |a: usize, b: usize| {
        let mut c = [0; 3];
        c[axis] = index;
        c[u] = a;
        c[v] = b;
        grid.index(c[0], c[1], c[2])
    };
    let cells = (0..dims[v]).flat_map(|b| (0..dims[u]).map(move |a| (a, b)));
    let (values, min, max) = match spec {
        None => {
            let d = ts.distance.values();
            let vals: Vec<f64> = cells.map(|(a, b)| d[voxel(a, b)]).collect();
            let (lo, hi) = vals
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
            (SliceValues::Distance(vals), lo, hi)
        }
        Some(spec) => {
            let lf = ts.segmentation(&spec)?;
            let keep = |l: u32| segids.as_ref().is_none_or(|ids| ids.contains(&l));
            let vals: Vec<u32> = cells
                .map(|(a, b)| lf.labels[voxel(a, b)])
                .map(|l| if keep(l) { l } else { 0 })
                .collect();
            let hi = vals.iter().copied().max().unwrap_or(0);
            let lo = vals.iter().copied().min().unwrap_or(0);
            (SliceValues::Labels(vals), lo as f64, hi as f64)
        }
    };
    Ok(Json(SliceResponse {
        axis: ['x', 'y', 'z'][axis],
        index,
        layer,
        width: dims[u],
        height: dims[v],
        min,
        max,
        values,
    }))
}

#[derive(Debug, Deserialize)]
pub struct HistogramParams {
    bins: Option<String>,
}

#[derive(Serialize)]
struct HistogramResponse {
    max: f64,
    total: u64,
    bins: Vec<HistogramBin>,
}

async fn histogram_route(
    State(state): State<AppState>,
    Query(p): Query<HistogramParams>,
) -> ApiResult<HistogramResponse> {
    let bins = match p.bins.as_deref() {
        Some(raw) => raw
            .trim()
            .parse::<usize>()
            .map_err(|_| ApiError::BadRequest(format!("bins must be a positive integer, got '{raw}'")))?,
        None => DEFAULT_BINS,
    };
    let ts = state.current()?;
    let bins = histogram(&ts.distance, bins)?;
    Ok(Json(HistogramResponse {
        max: ts.distance.max(),
        total: bins.iter().map(|b| b.count).sum(),
        bins,
    }))
}
