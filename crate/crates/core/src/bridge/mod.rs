//! Live session service: a websocket at `/session` drives one engine per
//! connection from client input, and static files are served for the
//! browser client.
//!
//! Each connection owns its engine loop. The socket reader feeds it messages
//! and the writer drains an [`Outbox`], so a slow client loses snapshots
//! instead of slowing the simulation.

mod outbox;
mod session;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::time::{Interval, MissedTickBehavior};
use tower_http::services::ServeDir;

pub use outbox::Outbox;
pub use session::{
    Reply, Session, SessionMessage, SessionSetup, StateMessage, TaskEventKind, TickOutput,
};

use crate::error::{Error, Result};
use crate::model::canonical::to_canonical_json;
use crate::model::{canonical::to_canonical_json_pretty, EngineConfig, SensorFrame};

/// Snapshots queued per connection before the oldest are dropped.
pub const OUTBOX_CAPACITY: usize = 64;

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub config: EngineConfig,
    pub port: u16,
    pub static_dir: PathBuf,
    pub record_dir: Option<PathBuf>,
}

struct AppState {
    config: EngineConfig,
    record_dir: Option<PathBuf>,
    next_id: AtomicU64,
}

/// Writes one session segment (from configure or reset until the next one)
/// to `<record_dir>/session-<id>-<segment>/`.
struct Recorder {
    dir: PathBuf,
    trace: BufWriter<File>,
}

impl Recorder {
    fn start(root: &Path, id: u64, segment: u32, setup: &SessionSetup) -> Result<Self> {
        let dir = root.join(format!("session-{id:04}-{segment:02}"));
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let write = |name: &str, text: String| {
            let p = dir.join(name);
            fs::write(&p, text + "\n").map_err(|e| Error::io(&p, e))
        };
        write("calibration.json", setup.calibration.to_json())?;
        write("config.json", to_canonical_json_pretty(&setup.config)?)?;
        write("condition.json", to_canonical_json_pretty(&setup.condition)?)?;
        let path = dir.join("trace.jsonl");
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Recorder {
            dir,
            trace: BufWriter::new(file),
        })
    }

    fn record(&mut self, frame: &SensorFrame) -> Result<()> {
        let line = to_canonical_json(frame)?;
        writeln!(self.trace, "{line}").map_err(|e| Error::io(&self.dir, e))
    }

    fn finish(mut self) -> Result<()> {
        self.trace.flush().map_err(|e| Error::io(&self.dir, e))
    }
}

/// The HTTP application: `/session` plus static files from `static_dir`.
pub fn router(opts: &ServeOptions) -> Router {
    let state = Arc::new(AppState {
        config: opts.config.clone(),
        record_dir: opts.record_dir.clone(),
        next_id: AtomicU64::new(0),
    });
    Router::new()
        .route("/session", get(upgrade))
        .with_state(state)
        .fallback_service(ServeDir::new(&opts.static_dir))
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<Arc<AppState>>) -> Response {
    ws.on_upgrade(move |socket| session_loop(socket, state))
}

async fn next_tick(ticker: &mut Option<Interval>) {
    match ticker {
        Some(i) => {
            i.tick().await;
        }
        None => std::future::pending().await,
    }
}

fn encode(msg: &StateMessage) -> Message {
    Message::Text(to_canonical_json(msg).expect("state message serializes").into())
}

async fn session_loop(socket: WebSocket, state: Arc<AppState>) {
    let id = state.next_id.fetch_add(1, Ordering::Relaxed);
    let (mut sink, mut stream) = socket.split();
    let outbox = Arc::new(Outbox::new(OUTBOX_CAPACITY));
    let writer = {
        let outbox = outbox.clone();
        tokio::spawn(async move {
            while let Some(batch) = outbox.next_batch().await {
                for m in &batch {
                    if sink.send(encode(m)).await.is_err() {
                        return;
                    }
                }
            }
            let _ = sink.close().await;
        })
    };

    let mut session = Session::new(state.config.clone());
    let mut ticker: Option<Interval> = None;
    let mut recorder: Option<Recorder> = None;
    let mut segment = 0u32;

    loop {
        tokio::select! {
            incoming = stream.next() => {
                let text = match incoming {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Binary(_))) => {
                        outbox.push(StateMessage::error("binary frames are not accepted"));
                        break;
                    }
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                let msg = match serde_json::from_str::<SessionMessage>(&text) {
                    Ok(m) => m,
                    Err(e) => {
                        outbox.push(StateMessage::error(format!("malformed message: {e}")));
                        break;
                    }
                };
                let messages = match session.handle(msg) {
                    Reply::Messages(m) => m,
                    Reply::Started(m) => {
                        if let Some(r) = recorder.take() {
                            let _ = r.finish();
                        }
                        let setup = session.setup().expect("started session has a setup");
                        if let Some(root) = &state.record_dir {
                            match Recorder::start(root, id, segment, setup) {
                                Ok(r) => recorder = Some(r),
                                Err(e) => outbox.push(StateMessage::error(e.to_string())),
                            }
                            segment += 1;
                        }
                        let mut i = tokio::time::interval(Duration::from_secs_f64(
                            setup.config.tick_period(),
                        ));
                        i.set_missed_tick_behavior(MissedTickBehavior::Delay);
                        ticker = Some(i);
                        m
                    }
                };
                for m in messages {
                    outbox.push(m);
                }
            }
            _ = next_tick(&mut ticker) => {
                match session.tick() {
                    Some(Ok(out)) => {
                        if let Some(r) = recorder.as_mut() {
                            if let Err(e) = r.record(&out.frame) {
                                outbox.push(StateMessage::error(e.to_string()));
                                recorder = None;
                            }
                        }
                        for m in out.messages {
                            outbox.push(m);
                        }
                    }
                    Some(Err(e)) => {
                        outbox.push(StateMessage::error(e.to_string()));
                        break;
                    }
                    None => {}
                }
            }
        }
    }
    if let Some(r) = recorder {
        let _ = r.finish();
    }
    outbox.close();
    let _ = writer.await;
}

/// Serves on an already bound listener until the task is dropped.
pub async fn serve_on(listener: TcpListener, opts: &ServeOptions) -> std::io::Result<()> {
    axum::serve(listener, router(opts)).await
}

/// Blocking entry point for the `serve` command.
pub fn serve(opts: ServeOptions) -> Result<()> {
    opts.config.validate()?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io("tokio runtime", e))?;
    runtime.block_on(async {
        let addr = SocketAddr::from(([0, 0, 0, 0], opts.port));
        let listener = TcpListener::bind(addr)
            .await
            .map_err(|e| Error::io(addr.to_string(), e))?;
        eprintln!("listening on http://{addr} (websocket at /session)");
        serve_on(listener, &opts)
            .await
            .map_err(|e| Error::io(addr.to_string(), e))
    })
}
