//! Live sessions. Each connection owns one `Session` driven by a single loop
//! that consumes client frames and 10 Hz tick timers in arrival order. Socket
//! reads and writes run on their own tasks and only pass strings through
//! channels.

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use familiar_core::session::{export_ndjson, ClientEnvelope, ClientMessage, ServerMessage, TICK_HZ};
use familiar_core::{Config, Session, SessionOptions};
use futures_util::{SinkExt, StreamExt};
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::TcpListener;
use tokio::sync::{mpsc, Semaphore};
use tokio::time::MissedTickBehavior;

/// A frame received from a client before it has been decoded.
#[derive(Debug)]
pub enum Inbound {
    Text(String),
    /// A frame that cannot be text, such as non-UTF-8 binary data.
    Undecodable(String),
}

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub config: Config,
    pub options: SessionOptions,
    pub max_sessions: usize,
    /// When set, each session's log is written here on disconnect.
    pub log_dir: Option<PathBuf>,
}

struct AppState {
    serve: ServeOptions,
    slots: Arc<Semaphore>,
    next_id: AtomicU64,
}

pub fn router(serve: ServeOptions) -> Router {
    let slots = Arc::new(Semaphore::new(serve.max_sessions));
    let state = Arc::new(AppState { serve, slots, next_id: AtomicU64::new(1) });
    Router::new()
        .route("/ws", get(ws_handler))
        .route("/health", get(|| async { "ok" }))
        .with_state(state)
}

pub async fn serve(listener: TcpListener, options: ServeOptions) -> std::io::Result<()> {
    axum::serve(listener, router(options)).await
}

async fn ws_handler(State(state): State<Arc<AppState>>, ws: WebSocketUpgrade) -> Response {
    let Ok(permit) = state.slots.clone().try_acquire_owned() else {
        return (StatusCode::SERVICE_UNAVAILABLE, "session limit reached").into_response();
    };
    let id = state.next_id.fetch_add(1, Ordering::Relaxed);
    ws.on_upgrade(move |socket| async move {
        run_socket(socket, &state, id).await;
        drop(permit);
    })
}

async fn run_socket(socket: WebSocket, state: &AppState, id: u64) {
    tracing::info!(session = id, "client connected");
    let (mut sink, mut stream) = socket.split();
    let (in_tx, in_rx) = mpsc::channel(256);
    let (out_tx, mut out_rx) = mpsc::unbounded_channel::<String>();

    let reader = tokio::spawn(async move {
        while let Some(Ok(frame)) = stream.next().await {
            let inbound = match frame {
                Message::Text(text) => Inbound::Text(text.as_str().to_owned()),
                Message::Binary(bytes) => match String::from_utf8(bytes.to_vec()) {
                    Ok(text) => Inbound::Text(text),
                    Err(_) => Inbound::Undecodable("binary frame is not UTF-8".into()),
                },
                Message::Close(_) => break,
                Message::Ping(_) | Message::Pong(_) => continue,
            };
            if in_tx.send(inbound).await.is_err() {
                break;
            }
        }
    });
    let writer = tokio::spawn(async move {
        while let Some(line) = out_rx.recv().await {
            if sink.send(Message::Text(line.into())).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });

    let session = Session::new(state.serve.config.clone(), state.serve.options);
    let session = drive_session(session, in_rx, out_tx).await;
    let _ = reader.await;
    let _ = writer.await;

    if let Some(dir) = &state.serve.log_dir {
        let path = dir.join(format!("session-{id}.ndjson"));
        if let Err(e) = std::fs::write(&path, export_ndjson(session.log())) {
            tracing::warn!(session = id, path = %path.display(), "log not written: {e}");
        }
    }
    tracing::info!(session = id, ticks = session.tick_count(), "client disconnected");
}

/// Runs `session` until `inbox` closes, then hands it back. A snapshot is
/// sent first so the client has a state to fold later messages onto.
pub async fn drive_session(
    mut session: Session,
    mut inbox: mpsc::Receiver<Inbound>,
    outbox: mpsc::UnboundedSender<String>,
) -> Session {
    let period = Duration::from_secs_f64(1.0 / TICK_HZ);
    let mut ticker = tokio::time::interval_at(tokio::time::Instant::now() + period, period);
    ticker.set_missed_tick_behavior(MissedTickBehavior::Delay);
    let send = |messages: Vec<ServerMessage>| {
        for m in messages {
            let _ = outbox.send(m.to_line());
        }
    };
    send(session.handle_message(ClientMessage::GetSnapshot {}));
    loop {
        tokio::select! {
            biased;
            frame = inbox.recv() => match frame {
                Some(Inbound::Text(text)) => {
                    for line in text.lines().filter(|l| !l.trim().is_empty()) {
                        let replies = match ClientEnvelope::parse(line) {
                            Ok(env) => session.handle_message(env.message),
                            Err(detail) => session.protocol_error(detail),
                        };
                        send(replies);
                    }
                }
                Some(Inbound::Undecodable(detail)) => send(session.protocol_error(detail)),
                None => break,
            },
            _ = ticker.tick() => send(session.tick()),
        }
    }
    session
}

/// Headless mode: one session speaking NDJSON over stdin and stdout. Ends
/// when stdin closes.
pub async fn serve_stdio(config: Config, options: SessionOptions, log: Option<PathBuf>) -> std::io::Result<()> {
    let (in_tx, in_rx) = mpsc::channel(256);
    let (out_tx, mut out_rx) = mpsc::unbounded_channel::<String>();
    let reader = tokio::spawn(async move {
        let mut lines = BufReader::new(tokio::io::stdin()).lines();
        loop {
            let inbound = match lines.next_line().await {
                Ok(Some(line)) => Inbound::Text(line),
                Ok(None) => break,
                Err(e) => Inbound::Undecodable(e.to_string()),
            };
            if in_tx.send(inbound).await.is_err() {
                break;
            }
        }
    });
    let writer = tokio::spawn(async move {
        let mut stdout = tokio::io::stdout();
        while let Some(mut line) = out_rx.recv().await {
            line.push('\n');
            stdout.write_all(line.as_bytes()).await?;
            stdout.flush().await?;
        }
        Ok::<_, std::io::Error>(())
    });
    let session = drive_session(Session::new(config, options), in_rx, out_tx).await;
    let _ = reader.await;
    writer.await.map_err(std::io::Error::other)??;
    if let Some(path) = log {
        std::fs::write(path, export_ndjson(session.log()))?;
    }
    Ok(())
}
