//! The session-oriented HTTP API consumed by the trajectory editor.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use base64::Engine;
use levictl_core::geometry::{BoundingBox, DepthConvention, InstanceId};
use levictl_core::ingest::{
    decode_depth, decode_mask_png, decode_rgb_png, encode_lvdm, encode_mask_png, ProviderClient, Session,
};
use levictl_core::pipeline::{FieldError, InferenceOutput, SessionConfig, TrajectoryDocument};
use levictl_core::signal::{sample_depth, serialize, ControlPoint};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::outline::trace_outline;
use crate::store::{SessionEntry, SessionStore};

const MAX_UPLOAD: usize = 256 << 20;

/// Shared handler state.
#[derive(Clone)]
pub struct AppState {
    pub store: Arc<SessionStore>,
    pub depth_provider: Option<Arc<ProviderClient>>,
    pub seg_provider: Option<Arc<ProviderClient>>,
    pub seed: u64,
}

impl AppState {
    pub fn new(capacity: usize, seed: u64) -> Self {
        Self { store: Arc::new(SessionStore::new(capacity)), depth_provider: None, seg_provider: None, seed }
    }
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    Validation { message: String, fields: Vec<FieldError> },
    Unavailable(String),
    Internal(String),
}

impl ApiError {
    fn field(field: &str, message: impl Into<String>) -> Self {
        let message = message.into();
        ApiError::Validation { fields: vec![FieldError { field: field.into(), message: message.clone() }], message }
    }

    fn fields(fields: Vec<FieldError>) -> Self {
        let message = fields.iter().map(|f| format!("{}: {}", f.field, f.message)).collect::<Vec<_>>().join("; ");
        ApiError::Validation { message, fields }
    }

    /// Attach an input field name to a core error.
    fn from_core(field: &str, e: levictl_core::Error) -> Self {
        use levictl_core::Error as E;
        match e {
            E::Provider { .. } => ApiError::Unavailable(e.to_string()),
            E::Validation { ref field, .. } | E::Parse { ref field, .. } => ApiError::field(field, e.to_string()),
            ref v if v.is_validation() => ApiError::field(field, e.to_string()),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, json!({"error": "not_found", "message": m})),
            ApiError::Validation { message, fields } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({"error": "validation", "message": message, "fields": fields}),
            ),
            ApiError::Unavailable(m) => {
                (StatusCode::SERVICE_UNAVAILABLE, json!({"error": "provider_unavailable", "message": m}))
            }
            ApiError::Internal(m) => {
                log::error!("{m}");
                (StatusCode::INTERNAL_SERVER_ERROR, json!({"error": "internal", "message": m}))
            }
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/healthz", get(healthz))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}/depth", get(get_depth))
        .route("/v1/sessions/{id}/select", post(select))
        .route("/v1/sessions/{id}/trajectories", put(put_trajectories))
        .route("/v1/sessions/{id}/preview", post(preview))
        .route("/v1/sessions/{id}/export", post(export))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD))
        .with_state(state)
}

async fn healthz() -> Json<serde_json::Value> {
    Json(json!({"status": "ok"}))
}

fn lookup(state: &AppState, id: &str) -> ApiResult<Arc<SessionEntry>> {
    state.store.get(id).ok_or_else(|| ApiError::NotFound(format!("unknown session {id}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::Internal(e.to_string()))?
}

#[derive(Serialize)]
struct InstanceSummary {
    id: InstanceId,
    area: usize,
    bbox: BoundingBox,
}

#[derive(Serialize)]
struct SessionCreated {
    id: String,
    /// `[H, W]`
    resolution: [u32; 2],
    instances: Vec<InstanceSummary>,
}

fn build_session(state: &AppState, parts: HashMap<String, Bytes>) -> ApiResult<Session> {
    let image_bytes = parts.get("image").ok_or_else(|| ApiError::field("image", "multipart field is required"))?;
    let image = decode_rgb_png(image_bytes).map_err(|e| ApiError::field("image", e.to_string()))?;
    let convention = DepthConvention::default();

    let depth = match (parts.get("depth"), &state.depth_provider) {
        (Some(b), _) => decode_depth(b, convention).map_err(|e| ApiError::field("depth", e.to_string()))?,
        (None, Some(p)) => p.fetch_depth(image_bytes, convention).map_err(|e| ApiError::from_core("depth", e))?,
        (None, None) => return Err(ApiError::field("depth", "not provided and no depth provider configured")),
    };
    let masks = match (parts.get("masks"), &state.seg_provider) {
        (Some(b), _) => decode_mask_png(b, 0).map_err(|e| ApiError::field("masks", e.to_string()))?,
        (None, Some(p)) => p.fetch_segmentation(image_bytes).map_err(|e| ApiError::from_core("masks", e))?,
        (None, None) => return Err(ApiError::field("masks", "not provided and no segmentation provider configured")),
    };

    let mut config = SessionConfig::for_resolution(image.height, image.width)
        .map_err(|e| ApiError::from_core("image", e))?;
    config.kmeans.seed = state.seed;
    Session::new(uuid::Uuid::new_v4().to_string(), image, depth, masks, config)
        .map_err(|e| ApiError::from_core("masks", e))
}

async fn create_session(State(state): State<AppState>, mut form: Multipart) -> ApiResult<Json<SessionCreated>> {
    let mut parts = HashMap::new();
    while let Some(field) = form.next_field().await.map_err(|e| ApiError::field("multipart", e.to_string()))? {
        let name = field.name().unwrap_or_default().to_string();
        let bytes = field.bytes().await.map_err(|e| ApiError::field(&name, e.to_string()))?;
        parts.insert(name, bytes);
    }
    let st = state.clone();
    let session = blocking(move || build_session(&st, parts)).await?;
    let body = SessionCreated {
        id: session.id().to_string(),
        resolution: [session.config().height, session.config().width],
        instances: session
            .registry()
            .iter()
            .map(|(&id, info)| InstanceSummary { id, area: info.area, bbox: info.bbox })
            .collect(),
    };
    log::info!("created session {} ({} instances)", body.id, body.instances.len());
    state.store.insert(session);
    Ok(Json(body))
}

fn octets(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "application/octet-stream")], bytes).into_response()
}

async fn get_depth(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let entry = lookup(&state, &id)?;
    Ok(octets(encode_lvdm(entry.session().depth0())))
}

#[derive(Deserialize)]
struct Click {
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct Selection {
    instance_id: InstanceId,
    outline: Vec<[u32; 2]>,
    depth_at_click: f64,
}

async fn select(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Selection>> {
    let entry = lookup(&state, &id)?;
    let click: Click = serde_json::from_slice(&body).map_err(|e| ApiError::field("body", e.to_string()))?;
    let session = entry.session();
    let (w, h) = (session.config().width as f64, session.config().height as f64);
    if !(click.x >= 0.0 && click.x <= w - 1.0) {
        return Err(ApiError::field("x", format!("{} outside [0, {}]", click.x, w - 1.0)));
    }
    if !(click.y >= 0.0 && click.y <= h - 1.0) {
        return Err(ApiError::field("y", format!("{} outside [0, {}]", click.y, h - 1.0)));
    }
    let (px, py) = ((click.x + 0.5).floor() as u32, (click.y + 0.5).floor() as u32);
    // A label raster holds one id per pixel, so the most specific instance is
    // simply the one stored there.
    let instance_id = session.masks0().label(px, py);
    if instance_id == 0 {
        return Err(ApiError::field("point", "no instance at point"));
    }
    let depth_at_click =
        sample_depth(session.depth0(), click.x, click.y).map_err(|e| ApiError::from_core("point", e))?;
    Ok(Json(Selection { instance_id, outline: trace_outline(session.masks0(), instance_id, px, py), depth_at_click }))
}

async fn put_trajectories(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<TrajectoryDocument>> {
    let entry = lookup(&state, &id)?;
    let doc = TrajectoryDocument::from_json(&body).map_err(|e| ApiError::field("body", e.to_string()))?;
    let problems = doc.check(entry.session().masks0());
    if !problems.is_empty() {
        return Err(ApiError::fields(problems));
    }
    entry.set_trajectories(doc.clone());
    Ok(Json(doc))
}

#[derive(Deserialize, Default)]
struct RenderRequest {
    #[serde(default)]
    frames: Option<Vec<usize>>,
    #[serde(default)]
    scale: Option<f64>,
}

fn parse_request(body: &[u8]) -> ApiResult<RenderRequest> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(RenderRequest::default());
    }
    let req: Option<RenderRequest> =
        serde_json::from_slice(body).map_err(|e| ApiError::field("body", e.to_string()))?;
    Ok(req.unwrap_or_default())
}

async fn run_synthesis(entry: Arc<SessionEntry>, scale: Option<f64>) -> ApiResult<Arc<InferenceOutput>> {
    let scale = scale.unwrap_or(1.0);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(ApiError::field("scale", format!("must be > 0, got {scale}")));
    }
    let doc = entry
        .snapshot()
        .trajectories
        .clone()
        .ok_or_else(|| ApiError::field("trajectories", "no trajectories set for this session"))?;
    blocking(move || entry.synthesize(&doc, scale).map_err(|e| ApiError::from_core("trajectories", e))).await
}

#[derive(Serialize)]
struct PreviewFrame {
    index: usize,
    /// Base64 indexed PNG of the rendered instance image.
    png: String,
    points: Vec<ControlPoint>,
}

#[derive(Serialize)]
struct Preview {
    frames: Vec<PreviewFrame>,
    k_per_frame: std::collections::BTreeMap<InstanceId, Vec<usize>>,
}

async fn preview(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Preview>> {
    let entry = lookup(&state, &id)?;
    let req = parse_request(&body)?;
    let out = run_synthesis(entry, req.scale).await?;
    let total = out.previews.len();
    let wanted = req.frames.unwrap_or_else(|| (0..total).collect());
    if let Some(bad) = wanted.iter().find(|&&t| t >= total) {
        return Err(ApiError::field("frames", format!("frame {bad} outside [0, {total})")));
    }
    let frames = wanted
        .into_iter()
        .map(|t| {
            let png = encode_mask_png(&out.previews[t].to_mask(t)).map_err(|e| ApiError::Internal(e.to_string()))?;
            Ok(PreviewFrame {
                index: t,
                png: base64::engine::general_purpose::STANDARD.encode(png),
                points: out.control_points.frames[t].clone(),
            })
        })
        .collect::<ApiResult<Vec<_>>>()?;
    Ok(Json(Preview { frames, k_per_frame: out.k_per_frame.clone() }))
}

async fn export(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let entry = lookup(&state, &id)?;
    let req = parse_request(&body)?;
    let out = run_synthesis(entry, req.scale).await?;
    Ok(octets(serialize(&out.tensor)))
}
