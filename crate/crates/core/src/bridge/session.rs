//! One interactive session: turns sparse client input into full sensor
//! frames and runs them through an engine. No networking here.

use serde::{Deserialize, Serialize};

use crate::biosignal::Calibration;
use crate::engine::synth::{default_calibration, EmgSynth, BLINK_PROFILE, HAND_CLOSED};
use crate::engine::{Engine, EngineSnapshot, TaskLayout};
use crate::error::{Error, Result};
use crate::model::{EngineConfig, FactorCondition, SensorFrame, SkinTemps, Vec3};
use crate::rng;

/// Client to server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SessionMessage {
    Hello {
        #[serde(default)]
        client: Option<String>,
    },
    Configure {
        condition: FactorCondition,
        /// Partial engine config merged over the server's config.
        #[serde(default)]
        config: Option<serde_json::Value>,
        /// Snapshots per second to send; every tick when absent.
        #[serde(default)]
        snapshot_rate: Option<f64>,
        /// Seeds the session's EMG noise and its calibration baseline.
        #[serde(default)]
        seed: Option<u64>,
    },
    Input {
        /// Hand displacement in meters, added to the hand position on the next tick.
        #[serde(default)]
        hand_delta: Option<Vec3>,
        #[serde(default)]
        openness: Option<f64>,
        /// Starts one blink.
        #[serde(default)]
        blink: bool,
        /// Held strain level in [0, 1].
        #[serde(default)]
        strain: Option<f64>,
        /// World point the eyes look at; the palm faces it too.
        #[serde(default)]
        gaze_point: Option<Vec3>,
    },
    Reset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskEventKind {
    Snap,
    Complete,
}

/// Server to client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateMessage {
    Snapshot {
        snapshot: EngineSnapshot,
    },
    TaskEvent {
        event: TaskEventKind,
        t: f64,
        #[serde(default)]
        block: Option<String>,
    },
    Error {
        message: String,
    },
}

impl StateMessage {
    pub fn error(message: impl Into<String>) -> Self {
        StateMessage::Error {
            message: message.into(),
        }
    }

    pub fn is_snapshot(&self) -> bool {
        matches!(self, StateMessage::Snapshot { .. })
    }
}

/// The latest client input, held between messages.
#[derive(Debug, Clone, PartialEq)]
struct InputState {
    hand: Vec3,
    pending_delta: Vec3,
    openness: f64,
    strain: f64,
    gaze_point: Vec3,
    /// Index into the blink profile while a blink plays out.
    blink_phase: Option<usize>,
    blink_queued: bool,
}

impl InputState {
    fn new(layout: &TaskLayout) -> Self {
        InputState {
            hand: layout.hand_rest,
            pending_delta: Vec3::ZERO,
            openness: HAND_CLOSED,
            strain: 0.0,
            // Looking at the empty target base: nothing selected.
            gaze_point: layout.target_base,
            blink_phase: None,
            blink_queued: false,
        }
    }
}

/// What a configured session needs to restart from scratch.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionSetup {
    pub config: EngineConfig,
    pub condition: FactorCondition,
    pub calibration: Calibration,
    pub seed: u64,
    /// Emit every n-th snapshot.
    pub decimation: usize,
}

struct Running {
    setup: SessionSetup,
    engine: Engine,
    emg: EmgSynth,
    input: InputState,
    tick: u64,
    stacked: usize,
    complete: bool,
}

impl Running {
    fn start(setup: SessionSetup, layout: &TaskLayout) -> Result<Self> {
        let engine = Engine::with_layout(
            setup.config.clone(),
            setup.condition,
            Some(setup.calibration),
            layout,
        )?;
        Ok(Running {
            emg: EmgSynth::new(rng::seeded(setup.seed, rng::stream::SESSION), setup.config.emg_rate),
            engine,
            input: InputState::new(layout),
            tick: 0,
            stacked: 0,
            complete: false,
            setup,
        })
    }
}

/// Output of one session tick.
#[derive(Debug, Clone)]
pub struct TickOutput {
    pub frame: SensorFrame,
    pub snapshot: EngineSnapshot,
    /// Messages for the client: the snapshot (unless decimated away) and task events.
    pub messages: Vec<StateMessage>,
}

/// What the caller should do after a message.
#[derive(Debug, Clone, PartialEq)]
pub enum Reply {
    Messages(Vec<StateMessage>),
    /// The engine was (re)built; a fresh recording should start.
    Started(Vec<StateMessage>),
}

pub struct Session {
    base_config: EngineConfig,
    layout: TaskLayout,
    running: Option<Running>,
}

impl Session {
    pub fn new(base_config: EngineConfig) -> Self {
        Session {
            base_config,
            layout: TaskLayout::default(),
            running: None,
        }
    }

    pub fn is_configured(&self) -> bool {
        self.running.is_some()
    }

    pub fn setup(&self) -> Option<&SessionSetup> {
        self.running.as_ref().map(|r| &r.setup)
    }

    /// Tick period of the configured engine.
    pub fn tick_period(&self) -> Option<f64> {
        self.setup().map(|s| s.config.tick_period())
    }

    /// Applies one client message. Errors here are reported to the client
    /// without closing the connection.
    pub fn handle(&mut self, msg: SessionMessage) -> Reply {
        match self.try_handle(msg) {
            Ok(r) => r,
            Err(e) => Reply::Messages(vec![StateMessage::error(e.to_string())]),
        }
    }

    fn try_handle(&mut self, msg: SessionMessage) -> Result<Reply> {
        match msg {
            SessionMessage::Hello { .. } => Ok(Reply::Messages(Vec::new())),
            SessionMessage::Configure {
                condition,
                config,
                snapshot_rate,
                seed,
            } => {
                let config = match config {
                    Some(v) => self.base_config.with_overrides(&v)?,
                    None => self.base_config.clone(),
                };
                let decimation = match snapshot_rate {
                    None => 1,
                    Some(r) if r.is_finite() && r > 0.0 => {
                        ((config.tick_rate / r).round() as usize).max(1)
                    }
                    Some(r) => {
                        return Err(Error::validation(format!(
                            "snapshot_rate must be positive, got {r}"
                        )))
                    }
                };
                let seed = seed.unwrap_or(0);
                let calibration = default_calibration(&config, seed)?;
                self.running = Some(Running::start(
                    SessionSetup {
                        config,
                        condition,
                        calibration,
                        seed,
                        decimation,
                    },
                    &self.layout,
                )?);
                Ok(Reply::Started(Vec::new()))
            }
            SessionMessage::Input {
                hand_delta,
                openness,
                blink,
                strain,
                gaze_point,
            } => {
                let run = self
                    .running
                    .as_mut()
                    .ok_or_else(|| Error::validation("input before configure"))?;
                let unit = |name: &str, v: f64| {
                    if (0.0..=1.0).contains(&v) {
                        Ok(v)
                    } else {
                        Err(Error::validation(format!("{name} must lie in [0, 1], got {v}")))
                    }
                };
                let finite = |name: &str, v: Vec3| {
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(Error::validation(format!("{name} must be finite")))
                    }
                };
                // Validate everything before touching state.
                let openness = openness.map(|v| unit("openness", v)).transpose()?;
                let strain = strain.map(|v| unit("strain", v)).transpose()?;
                let hand_delta = hand_delta.map(|v| finite("hand_delta", v)).transpose()?;
                let gaze_point = gaze_point.map(|v| finite("gaze_point", v)).transpose()?;
                let input = &mut run.input;
                if let Some(d) = hand_delta {
                    input.pending_delta += d;
                }
                if let Some(o) = openness {
                    input.openness = o;
                }
                if let Some(s) = strain {
                    input.strain = s;
                }
                if let Some(g) = gaze_point {
                    input.gaze_point = g;
                }
                input.blink_queued |= blink;
                Ok(Reply::Messages(Vec::new()))
            }
            SessionMessage::Reset => {
                let run = self
                    .running
                    .take()
                    .ok_or_else(|| Error::validation("reset before configure"))?;
                self.running = Some(Running::start(run.setup, &self.layout)?);
                Ok(Reply::Started(Vec::new()))
            }
        }
    }

    /// Synthesizes the next frame from the held input and ticks the engine.
    /// Returns `None` until the session is configured.
    pub fn tick(&mut self) -> Option<Result<TickOutput>> {
        let run = self.running.as_mut()?;
        let frame = synthesize_frame(run, &self.layout);
        let snapshot = match run.engine.tick(&frame) {
            Ok(s) => s,
            Err(e) => return Some(Err(e)),
        };
        let mut messages = Vec::new();
        if run.tick % run.setup.decimation as u64 == 0 {
            messages.push(StateMessage::Snapshot {
                snapshot: snapshot.clone(),
            });
        }
        for id in &snapshot.task.stacked[run.stacked..] {
            messages.push(StateMessage::TaskEvent {
                event: TaskEventKind::Snap,
                t: snapshot.t,
                block: Some(id.clone()),
            });
        }
        run.stacked = snapshot.task.stacked.len();
        if snapshot.task.complete && !run.complete {
            run.complete = true;
            messages.push(StateMessage::TaskEvent {
                event: TaskEventKind::Complete,
                t: snapshot.t,
                block: None,
            });
        }
        run.tick += 1;
        Some(Ok(TickOutput {
            frame,
            snapshot,
            messages,
        }))
    }
}

fn synthesize_frame(run: &mut Running, layout: &TaskLayout) -> SensorFrame {
    let cfg = &run.setup.config;
    let input = &mut run.input;
    input.hand += input.pending_delta;
    input.pending_delta = Vec3::ZERO;

    if input.blink_phase.is_none() && input.blink_queued {
        input.blink_phase = Some(0);
        input.blink_queued = false;
    }
    let eye = match input.blink_phase {
        Some(k) => {
            input.blink_phase = (k + 1 < BLINK_PROFILE.len()).then_some(k + 1);
            BLINK_PROFILE[k]
        }
        None => 1.0,
    };
    let fallback = Vec3::new(0.0, 0.0, 1.0);
    SensorFrame {
        t: run.tick as f64 * cfg.tick_period(),
        hand_pos: input.hand,
        palm_normal: (input.gaze_point - input.hand).normalized().unwrap_or(fallback),
        hand_openness: input.openness,
        gaze_origin: layout.head,
        gaze_dir: (input.gaze_point - layout.head).normalized().unwrap_or(fallback),
        eye_openness: eye,
        emg_batch: run.emg.batch(input.strain, cfg.emg_batch_len()),
        skin_temp: SkinTemps::default(),
    }
    .normalized()
}
