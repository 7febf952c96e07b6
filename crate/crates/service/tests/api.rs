use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use base64::Engine;
use http_body_util::BodyExt;
use levictl::api::{router, AppState};
use levictl::server::{app_state, ServeConfig};
use levictl_core::fixtures::{demo_scene, BALL};
use levictl_core::geometry::{DepthConvention, DepthMap, InstanceMaskFrame};
use levictl_core::ingest::{
    decode_lvdm, decode_mask_png, encode_lvdm, encode_mask_png, encode_rgb_png, ProviderEndpoint, ProviderKind, RgbImage,
};
use levictl_core::pipeline::{synthesize_inference_signals, SessionConfig, TrajectoryDocument, TrajectorySpec, Waypoint};
use levictl_core::signal::{deserialize, serialize, ControlPoint};
use serde_json::{json, Value};
use tower::ServiceExt;

const BOUNDARY: &str = "levictl-test-boundary";

fn multipart(parts: &[(&str, &[u8])]) -> Vec<u8> {
    let mut body = Vec::new();
    for (name, bytes) in parts {
        body.extend(format!("--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"{name}\"; filename=\"{name}\"\r\nContent-Type: application/octet-stream\r\n\r\n").as_bytes());
        body.extend(*bytes);
        body.extend(b"\r\n");
    }
    body.extend(format!("--{BOUNDARY}--\r\n").as_bytes());
    body
}

async fn call(app: &Router, method: &str, uri: &str, body: Vec<u8>, content_type: &str) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri).header("content-type", content_type).body(Body::from(body)).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn call_json(app: &Router, method: &str, uri: &str, body: Value) -> (StatusCode, Value) {
    let (s, b) = call(app, method, uri, serde_json::to_vec(&body).unwrap(), "application/json").await;
    (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
}

/// 40x30 scene: object 1 (square, d 0.6) and object 2 (bar, d 0.3) on true background.
fn small_inputs() -> (Vec<u8>, Vec<u8>, Vec<u8>, InstanceMaskFrame, DepthMap) {
    let (w, h) = (40, 30);
    let mut masks = InstanceMaskFrame::empty(w, h, 0);
    let mut depth = vec![0.1f32; (w * h) as usize];
    for y in 5..15 {
        for x in 5..15 {
            masks.set(x, y, 1);
            depth[(y * w + x) as usize] = 0.6;
        }
    }
    for y in 20..24 {
        for x in 10..35 {
            masks.set(x, y, 2);
            depth[(y * w + x) as usize] = 0.3;
        }
    }
    let depth = DepthMap::new(w, h, depth, DepthConvention::default()).unwrap();
    let image = encode_rgb_png(&RgbImage::filled(w, h, [10, 20, 30])).unwrap();
    (image, encode_lvdm(&depth), encode_mask_png(&masks).unwrap(), masks, depth)
}

async fn create(app: &Router, parts: &[(&str, &[u8])]) -> (StatusCode, Value) {
    let (s, b) = call(app, "POST", "/v1/sessions", multipart(parts), &format!("multipart/form-data; boundary={BOUNDARY}")).await;
    (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
}

fn small_doc() -> TrajectoryDocument {
    TrajectoryDocument {
        version: 1,
        frames: 4,
        resolution: [30, 40],
        objects: vec![
            TrajectorySpec::moving(1, vec![Waypoint::new(8.0, 8.0, 0.6), Waypoint::new(25.0, 8.0, 0.7)]),
            TrajectorySpec::anchor(2),
        ],
    }
}

#[tokio::test]
async fn healthz_and_unknown_session() {
    let app = router(AppState::new(4, 0));
    let (s, v) = call_json(&app, "GET", "/v1/healthz", Value::Null).await;
    assert_eq!((s, v), (StatusCode::OK, json!({"status": "ok"})));
    let (s, v) = call_json(&app, "POST", "/v1/sessions/nope/select", json!({"x": 1, "y": 1})).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "not_found");
}

#[tokio::test]
async fn session_select_and_depth() {
    let app = router(AppState::new(4, 0));
    let (image, depth, masks, _, depth_map) = small_inputs();
    let (s, v) = create(&app, &[("image", &image), ("depth", &depth), ("masks", &masks)]).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["resolution"], json!([30, 40]));
    assert_eq!(v["instances"], json!([
        {"id": 1, "area": 100, "bbox": {"x0": 5, "y0": 5, "x1": 14, "y1": 14}},
        {"id": 2, "area": 100, "bbox": {"x0": 10, "y0": 20, "x1": 34, "y1": 23}},
    ]));
    let id = v["id"].as_str().unwrap().to_string();

    let (s, sel) = call_json(&app, "POST", &format!("/v1/sessions/{id}/select"), json!({"x": 9, "y": 9})).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(sel["instance_id"], 1);
    assert!((sel["depth_at_click"].as_f64().unwrap() - 0.6).abs() < 1e-6);
    assert_eq!(sel["outline"].as_array().unwrap().len(), 36);
    assert_eq!(sel["outline"][0], json!([5, 5]));

    let (s, miss) = call_json(&app, "POST", &format!("/v1/sessions/{id}/select"), json!({"x": 1, "y": 1})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(miss["message"], "no instance at point");
    assert_eq!(miss["fields"][0]["field"], "point");

    let (s, oob) = call_json(&app, "POST", &format!("/v1/sessions/{id}/select"), json!({"x": 99, "y": 1})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(oob["fields"][0]["field"], "x");

    let (s, body) = call(&app, "GET", &format!("/v1/sessions/{id}/depth"), vec![], "application/json").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(decode_lvdm(&body, DepthConvention::default()).unwrap(), depth_map);
}

#[tokio::test]
async fn missing_inputs_are_field_errors() {
    let app = router(AppState::new(4, 0));
    let (image, _, masks, _, _) = small_inputs();
    let (s, v) = create(&app, &[("image", &image), ("masks", &masks)]).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["fields"][0]["field"], "depth");
    let (s, v) = create(&app, &[("masks", &masks)]).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["fields"][0]["field"], "image");
    let (s, v) = create(&app, &[("image", &image), ("depth", b"junk"), ("masks", &masks)]).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["fields"][0]["field"], "depth");
}

#[tokio::test]
async fn trajectory_validation_and_preview_export_agree() {
    let app = router(AppState::new(4, 7));
    let (image, depth, masks, mask_frame, depth_map) = small_inputs();
    let (_, v) = create(&app, &[("image", &image), ("depth", &depth), ("masks", &masks)]).await;
    let id = v["id"].as_str().unwrap().to_string();

    let (s, v) = call_json(&app, "POST", &format!("/v1/sessions/{id}/export"), Value::Null).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["fields"][0]["field"], "trajectories");

    let mut bad = serde_json::to_value(small_doc()).unwrap();
    bad["objects"][0]["waypoints"][0]["x"] = json!(30.0);
    bad["objects"][0]["waypoints"][1]["d"] = json!(1.5);
    let (s, v) = call_json(&app, "PUT", &format!("/v1/sessions/{id}/trajectories"), bad).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let fields: Vec<&str> = v["fields"].as_array().unwrap().iter().map(|f| f["field"].as_str().unwrap()).collect();
    assert!(fields.contains(&"objects[0].waypoints[1].d"), "{fields:?}");
    assert!(fields.contains(&"objects[0].waypoints[0]"), "{fields:?}");

    let doc = small_doc();
    let (s, echoed) = call_json(&app, "PUT", &format!("/v1/sessions/{id}/trajectories"), serde_json::to_value(&doc).unwrap()).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(serde_json::from_value::<TrajectoryDocument>(echoed).unwrap(), doc);

    let (s, prev) = call_json(&app, "POST", &format!("/v1/sessions/{id}/preview"), json!({"frames": [0, 3]})).await;
    assert_eq!(s, StatusCode::OK);
    let frames = prev["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 2);
    let png = base64::engine::general_purpose::STANDARD.decode(frames[0]["png"].as_str().unwrap()).unwrap();
    assert_eq!(decode_mask_png(&png, 0).unwrap().area(1), mask_frame.area(1));

    let (s, lvtc) = call(&app, "POST", &format!("/v1/sessions/{id}/export"), vec![], "application/json").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(&lvtc[..4], b"LVTC");
    let (_, again) = call(&app, "POST", &format!("/v1/sessions/{id}/export"), vec![], "application/json").await;
    assert_eq!(lvtc, again);

    // overlay points are exactly the points encoded in the export
    let mut cfg = SessionConfig::for_resolution(30, 40).unwrap();
    cfg.frames = 4;
    cfg.kmeans.seed = 7;
    let direct = synthesize_inference_signals(&depth_map, &mask_frame, &doc.objects, &cfg).unwrap();
    assert_eq!(serialize(&direct.tensor), lvtc);
    let overlay3: Vec<ControlPoint> = serde_json::from_value(frames[1]["points"].clone()).unwrap();
    assert_eq!(overlay3, direct.control_points.frames[3]);

    let (s, v) = call_json(&app, "POST", &format!("/v1/sessions/{id}/preview"), json!({"frames": [4]})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["fields"][0]["field"], "frames");
    let (s, _) = call_json(&app, "POST", &format!("/v1/sessions/{id}/preview"), json!({"scale": -1})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn demo_export_header() {
    let app = router(AppState::new(4, 0));
    let scene = demo_scene();
    let image = encode_rgb_png(&scene.image).unwrap();
    let depth = encode_lvdm(&scene.depth);
    let masks = encode_mask_png(&scene.masks).unwrap();
    let (_, v) = create(&app, &[("image", &image), ("depth", &depth), ("masks", &masks)]).await;
    let id = v["id"].as_str().unwrap().to_string();
    let (s, sel) = call_json(&app, "POST", &format!("/v1/sessions/{id}/select"), json!({"x": 140, "y": 180})).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(sel["instance_id"], BALL);
    let (s, _) = call_json(&app, "PUT", &format!("/v1/sessions/{id}/trajectories"), serde_json::to_value(&scene.trajectories).unwrap()).await;
    assert_eq!(s, StatusCode::OK);
    let (s, lvtc) = call(&app, "POST", &format!("/v1/sessions/{id}/export"), vec![], "application/json").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(deserialize(&lvtc).unwrap().shape(), [16, 3, 288, 512]);
}

/// One-shot provider answering every request with `status` and `body`.
fn provider(status: u16, body: Vec<u8>) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    std::thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            let mut stream = stream;
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut buf = vec![0; len];
            let _ = reader.read_exact(&mut buf);
            let head = format!("HTTP/1.1 {status} X\r\nContent-Length: {}\r\nConnection: close\r\n\r\n", body.len());
            let _ = stream.write_all(head.as_bytes());
            let _ = stream.write_all(&body);
        }
    });
    url
}

#[tokio::test]
async fn providers_fill_missing_inputs() {
    let (image, depth, masks, mask_frame, _) = small_inputs();
    let cfg = ServeConfig {
        bind: "127.0.0.1:0".parse().unwrap(),
        capacity: 4,
        seed: 0,
        depth_provider: Some(ProviderEndpoint::new(ProviderKind::Depth, provider(200, depth.clone()))),
        seg_provider: Some(ProviderEndpoint::new(ProviderKind::Segmentation, provider(200, masks.clone()))),
    };
    let app = router(app_state(&cfg));
    let (s, v) = create(&app, &[("image", &image)]).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["instances"].as_array().unwrap().len(), mask_frame.registry().len());

    let down = ServeConfig {
        depth_provider: Some(ProviderEndpoint::new(ProviderKind::Depth, provider(503, vec![]))),
        ..cfg
    };
    let app = router(app_state(&down));
    let (s, v) = create(&app, &[("image", &image), ("masks", &masks)]).await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(v["error"], "provider_unavailable");
    // files still work when the provider is down
    let (s, _) = create(&app, &[("image", &image), ("depth", &depth), ("masks", &masks)]).await;
    assert_eq!(s, StatusCode::OK);
}
