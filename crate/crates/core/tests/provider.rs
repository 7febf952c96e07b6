use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use levictl_core::geometry::{DepthConvention, DepthMap, InstanceMaskFrame};
use levictl_core::ingest::{encode_lvdm, encode_mask_png, ProviderClient, ProviderEndpoint, ProviderKind};
use levictl_core::Error;

struct Mock {
    url: String,
    hits: Arc<AtomicUsize>,
}

/// Serve `status` + `body` to every request; `delay` before answering.
fn mock(status: u16, body: Vec<u8>, delay: Duration) -> Mock {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0usize;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut req = vec![0; len];
            let _ = reader.read_exact(&mut req);
            counter.fetch_add(1, Ordering::SeqCst);
            thread::sleep(delay);
            let head = format!("HTTP/1.1 {status} X\r\nContent-Length: {}\r\nConnection: close\r\n\r\n", body.len());
            let _ = stream.write_all(head.as_bytes());
            let _ = stream.write_all(&body);
        }
    });
    Mock { url, hits }
}

fn fixture_depth() -> DepthMap {
    DepthMap::new(3, 2, vec![0.0, 0.25, 0.5, 0.75, 1.0, 0.125], DepthConvention::default()).unwrap()
}

#[test]
fn depth_echo_and_cache() {
    let m = mock(200, encode_lvdm(&fixture_depth()), Duration::ZERO);
    let client = ProviderClient::new(ProviderEndpoint::new(ProviderKind::Depth, &m.url));
    let d = client.fetch_depth(b"image-a", DepthConvention::default()).unwrap();
    assert_eq!(d, fixture_depth());
    let again = client.fetch_depth(b"image-a", DepthConvention::default()).unwrap();
    assert_eq!(again, d);
    assert_eq!(client.calls(), 1);
    assert_eq!(m.hits.load(Ordering::SeqCst), 1);
    client.fetch_depth(b"image-b", DepthConvention::default()).unwrap();
    assert_eq!(client.calls(), 2);
}

#[test]
fn segmentation_echo() {
    let mut mask = InstanceMaskFrame::empty(4, 4, 0);
    mask.set(1, 2, 5);
    let m = mock(200, encode_mask_png(&mask).unwrap(), Duration::ZERO);
    let client = ProviderClient::new(ProviderEndpoint::new(ProviderKind::Segmentation, &m.url));
    assert_eq!(client.fetch_segmentation(b"img").unwrap(), mask);
}

#[test]
fn server_error_is_provider_error() {
    let m = mock(503, b"busy".to_vec(), Duration::ZERO);
    let client = ProviderClient::new(ProviderEndpoint::new(ProviderKind::Depth, &m.url));
    match client.fetch_depth(b"img", DepthConvention::default()) {
        Err(Error::Provider { kind, cause }) => {
            assert_eq!(kind, "depth");
            assert!(cause.contains("503"), "{cause}");
        }
        other => panic!("unexpected {other:?}"),
    }
    // failures are not cached
    assert!(client.fetch_depth(b"img", DepthConvention::default()).is_err());
    assert_eq!(client.calls(), 2);
}

#[test]
fn malformed_body_is_schema_violation() {
    let m = mock(200, b"LVDM\x01".to_vec(), Duration::ZERO);
    let client = ProviderClient::new(ProviderEndpoint::new(ProviderKind::Depth, &m.url));
    let e = client.fetch_depth(b"img", DepthConvention::default()).unwrap_err();
    assert!(matches!(e, Error::Provider { .. }));
    assert!(e.to_string().contains("invalid response"), "{e}");
}

#[test]
fn timeout_is_provider_error() {
    let m = mock(200, encode_lvdm(&fixture_depth()), Duration::from_millis(800));
    let mut ep = ProviderEndpoint::new(ProviderKind::Depth, &m.url);
    ep.timeout = Duration::from_millis(100);
    let client = ProviderClient::new(ep);
    assert!(matches!(client.fetch_depth(b"img", DepthConvention::default()), Err(Error::Provider { .. })));
}

#[test]
fn unreachable_is_provider_error() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let client = ProviderClient::new(ProviderEndpoint::new(ProviderKind::Segmentation, format!("http://127.0.0.1:{port}")));
    assert!(matches!(client.fetch_segmentation(b"img"), Err(Error::Provider { .. })));
}
