use std::time::Duration;

use familiar_cli::{serve, ServeOptions};
use familiar_core::{Config, SessionOptions};
use futures_util::{SinkExt, StreamExt};
use serde_json::Value;
use tokio::net::{TcpListener, TcpStream};
use tokio_tungstenite::tungstenite::{self, Message};
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Client = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn start(max_sessions: usize, options: SessionOptions, log_dir: Option<std::path::PathBuf>) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let opts = ServeOptions { config: Config::default_scenario(), options, max_sessions, log_dir };
    tokio::spawn(serve(listener, opts));
    format!("ws://{addr}/ws")
}

async fn next_json(ws: &mut Client) -> Value {
    loop {
        let frame = tokio::time::timeout(Duration::from_secs(5), ws.next()).await.expect("message in time");
        if let Message::Text(text) = frame.expect("stream open").expect("frame ok") {
            return serde_json::from_str(text.as_str()).unwrap();
        }
    }
}

async fn next_of_type(ws: &mut Client, ty: &str) -> Value {
    loop {
        let m = next_json(ws).await;
        if m["type"] == ty {
            return m;
        }
    }
}

#[tokio::test]
async fn session_greets_ticks_and_answers() {
    let url = start(1, SessionOptions::default(), None).await;
    let (mut ws, _) = connect_async(&url).await.unwrap();
    let first = next_json(&mut ws).await;
    assert_eq!(first["type"], "snapshot");
    assert_eq!(first["seq"], 1);
    assert_eq!(first["snapshot"]["phase"], "running");

    ws.send(Message::Text("{\"type\":\"chat\",\"text\":\"learn the region kitchen\"}".into())).await.unwrap();
    let ack = next_of_type(&mut ws, "chat_ack").await;
    assert_eq!(ack["recognized"], true);
    assert_eq!(ack["slots"]["region_label"], "kitchen");

    let event = next_of_type(&mut ws, "event").await;
    assert!(event["tick"].as_u64().unwrap() >= 1);

    ws.send(Message::Text("{\"type\":\"teleport\"}".into())).await.unwrap();
    let err = next_of_type(&mut ws, "protocol_error").await;
    assert!(err["detail"].as_str().unwrap().contains("teleport"), "{err}");
    ws.send(Message::Binary(vec![0xff, 0xfe].into())).await.unwrap();
    next_of_type(&mut ws, "protocol_error").await;
}

#[tokio::test]
async fn dynamic_viz_off_hides_live_architecture_events() {
    let options = SessionOptions { dynamic_viz: false, visual_programming: true };
    let url = start(1, options, None).await;
    let (mut ws, _) = connect_async(&url).await.unwrap();
    next_of_type(&mut ws, "snapshot").await;
    ws.send(Message::Text("{\"type\":\"chat\",\"text\":\"learn the region kitchen\"}".into())).await.unwrap();
    let deadline = tokio::time::Instant::now() + Duration::from_millis(1500);
    while tokio::time::Instant::now() < deadline {
        let Ok(Some(Ok(Message::Text(text)))) = tokio::time::timeout(Duration::from_millis(300), ws.next()).await else {
            continue;
        };
        let m: Value = serde_json::from_str(text.as_str()).unwrap();
        if m["type"] == "event" {
            let kind = m["kind"].as_str().unwrap();
            assert!(!matches!(kind, "sensor_update" | "precondition" | "behavior_status"), "{m}");
        }
    }
}

#[tokio::test]
async fn session_limit_is_enforced_and_released() {
    let dir = tempfile::tempdir().unwrap();
    let url = start(1, SessionOptions::default(), Some(dir.path().to_owned())).await;
    let (mut first, _) = connect_async(&url).await.unwrap();
    next_json(&mut first).await;

    match connect_async(&url).await {
        Err(tungstenite::Error::Http(resp)) => assert_eq!(resp.status(), 503),
        other => panic!("second session admitted: {:?}", other.map(|_| ())),
    }

    first.close(None).await.unwrap();
    drop(first);
    let mut admitted = None;
    for _ in 0..50 {
        if let Ok((ws, _)) = connect_async(&url).await {
            admitted = Some(ws);
            break;
        }
        tokio::time::sleep(Duration::from_millis(50)).await;
    }
    let mut second = admitted.expect("slot freed after disconnect");
    assert_eq!(next_json(&mut second).await["type"], "snapshot");
    assert!(dir.path().join("session-1.ndjson").exists());
}
