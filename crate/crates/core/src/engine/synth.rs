//! Synthetic operator: generates sensor traces that stand in for a human.
//!
//! The operator model runs a private copy of the engine in lockstep and acts
//! on what it observes: it looks at the next block, opens the hand, strains
//! and suppresses blinks as the condition demands, then steers the block with
//! short straight hand strokes, closing the hand to stop the object between
//! strokes.

use std::f64::consts::PI;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use super::{Engine, TaskLayout};
use crate::biosignal::{calibrate_from_trace, Calibration};
use crate::error::Result;
use crate::model::{EngineConfig, FactorCondition, SensorFrame, SkinTemps, Vec3};
use crate::rng::{self, Rng};

/// EMG amplitude (mV) of a maximal contraction, i.e. strain level 1.0.
pub const MVC_AMPLITUDE: f64 = 1.0;
/// Resting EMG noise standard deviation, mV.
pub const REST_NOISE: f64 = 0.01;
/// Electrode DC offset, mV.
pub const EMG_DC: f64 = 0.5;
/// Burst carrier frequency, Hz.
pub const EMG_CARRIER_HZ: f64 = 100.0;
/// Eye-openness samples of one blink, one per tick.
pub const BLINK_PROFILE: [f64; 3] = [0.4, 0.05, 0.4];
pub const HAND_OPEN: f64 = 0.95;
pub const HAND_CLOSED: f64 = 0.1;
/// Strain level the operator holds while engaged.
pub const TASK_STRAIN: f64 = 0.9;

/// Raw EMG generator: DC offset, Gaussian rest noise and a sine burst whose
/// amplitude scales with the strain level.
#[derive(Debug, Clone)]
pub struct EmgSynth {
    rng: Rng,
    noise: Normal<f64>,
    sample: u64,
    emg_rate: f64,
}

impl EmgSynth {
    pub fn new(rng: Rng, emg_rate: f64) -> Self {
        EmgSynth {
            rng,
            noise: Normal::new(0.0, REST_NOISE).expect("valid sd"),
            sample: 0,
            emg_rate,
        }
    }

    pub fn batch(&mut self, level: f64, n: usize) -> Vec<f64> {
        let amp = MVC_AMPLITUDE * level.clamp(0.0, 1.0);
        (0..n)
            .map(|_| {
                let phase = 2.0 * PI * EMG_CARRIER_HZ * self.sample as f64 / self.emg_rate;
                self.sample += 1;
                EMG_DC + amp * phase.sin() + self.noise.sample(&mut self.rng)
            })
            .collect()
    }
}

/// Blink generator with uniformly jittered inter-blink intervals.
#[derive(Debug, Clone)]
pub struct BlinkTrain {
    next_onset: f64,
    interval: (f64, f64),
    period: f64,
}

impl BlinkTrain {
    pub fn new(first_onset: f64, interval: (f64, f64), period: f64) -> Self {
        BlinkTrain {
            next_onset: first_onset,
            interval,
            period,
        }
    }

    pub fn set_interval(&mut self, interval: (f64, f64)) {
        self.interval = interval;
    }

    /// Eye openness at time `t`; times must be visited in order.
    pub fn openness(&mut self, t: f64, rng: &mut Rng) -> f64 {
        let k = ((t - self.next_onset) / self.period).round();
        if k < 0.0 {
            return 1.0;
        }
        let k = k as usize;
        if k < BLINK_PROFILE.len() {
            return BLINK_PROFILE[k];
        }
        self.next_onset += rng.random_range(self.interval.0..self.interval.1);
        1.0
    }
}

fn frame(
    t: f64,
    hand: Vec3,
    look_at: Vec3,
    head: Vec3,
    openness: f64,
    eye: f64,
    emg: Vec<f64>,
) -> SensorFrame {
    SensorFrame {
        t,
        hand_pos: hand,
        palm_normal: (look_at - hand).normalized().unwrap_or(Vec3::new(0.0, 0.0, 1.0)),
        hand_openness: openness,
        gaze_origin: head,
        gaze_dir: (look_at - head).normalized().unwrap_or(Vec3::new(0.0, 0.0, 1.0)),
        eye_openness: eye,
        emg_batch: emg,
        skin_temp: SkinTemps::default(),
    }
    .normalized()
}

/// A resting trace for calibration: free gaze around the table, normal
/// blinking, relaxed arm, and one two-second maximal contraction at 50 s.
pub fn synthesize_baseline(cfg: &EngineConfig, seed: u64, seconds: f64) -> Vec<SensorFrame> {
    let layout = TaskLayout::default();
    let mut rng = rng::seeded(seed, rng::stream::BASELINE);
    let mut emg = EmgSynth::new(rng::seeded(seed, rng::stream::BASELINE + 100), cfg.emg_rate);
    let period = cfg.tick_period();
    let mut blinks = BlinkTrain::new(rng.random_range(0.5..1.5), (2.5, 3.5), period);
    let ticks = (seconds * cfg.tick_rate).round() as usize;
    let mut gaze_point = layout.target_base;
    let mut next_saccade = 0.0;
    (0..ticks)
        .map(|i| {
            let t = i as f64 * period;
            if t >= next_saccade {
                gaze_point = Vec3::new(
                    rng.random_range(-0.8..0.8),
                    rng.random_range(0.6..1.4),
                    rng.random_range(0.9..1.8),
                );
                next_saccade = t + rng.random_range(1.0..2.0);
            }
            let eye = blinks.openness(t, &mut rng);
            let level = if (50.0..52.0).contains(&t) { 1.0 } else { 0.0 };
            let batch = emg.batch(level, cfg.emg_batch_len());
            frame(t, layout.hand_rest, gaze_point, layout.head, HAND_CLOSED, eye, batch)
        })
        .collect()
}

/// Baseline calibration the operator model uses when the caller has none.
pub fn default_calibration(cfg: &EngineConfig, seed: u64) -> Result<Calibration> {
    calibrate_from_trace(&synthesize_baseline(cfg, seed, 90.0), cfg)
}

#[derive(Debug, Clone, Copy)]
pub struct SynthOptions {
    /// Produce EMG bursts when the condition asks for strain. Off gives a
    /// negative control that should never activate under strain.
    pub emg_bursts: bool,
    /// Give up after this much simulated time.
    pub max_seconds: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            emg_bursts: true,
            max_seconds: 240.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stroke {
    /// Hand moves across the hand-object line; object follows the hand.
    Transverse { hand_dir: Vec3 },
    /// Hand moves along the line; `sign` +1 pushes the object away.
    Depth { sign: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Acquire,
    Stroke { stroke: Stroke, obj_dir: Vec3, step: f64 },
    Release { ticks: usize },
}

/// Goal distance below which the operator lets go for the snap.
const FINISH_DISTANCE: f64 = 0.015;

pub fn synthesize_operator(
    condition: FactorCondition,
    cfg: &EngineConfig,
    seed: u64,
    calibration: Option<&Calibration>,
) -> Result<Vec<SensorFrame>> {
    synthesize_operator_with(condition, cfg, seed, calibration, SynthOptions::default())
}

pub fn synthesize_operator_with(
    condition: FactorCondition,
    cfg: &EngineConfig,
    seed: u64,
    calibration: Option<&Calibration>,
    opts: SynthOptions,
) -> Result<Vec<SensorFrame>> {
    let layout = TaskLayout::default();
    let calib = match calibration {
        Some(c) => *c,
        None => default_calibration(cfg, seed)?,
    };
    let mut engine = Engine::with_layout(cfg.clone(), condition, Some(calib), &layout)?;
    let mut rng = rng::seeded(seed, rng::stream::OPERATOR);
    let mut emg = EmgSynth::new(rng::seeded(seed, rng::stream::OPERATOR + 100), cfg.emg_rate);
    let period = cfg.tick_period();
    let interval = if condition.concentration {
        (6.5, 7.5)
    } else {
        (2.5, 3.5)
    };
    let mut blinks = BlinkTrain::new(rng.random_range(0.3..0.8), interval, period);
    let strain = if condition.strain && opts.emg_bursts {
        TASK_STRAIN
    } else {
        0.0
    };

    let mut hand = layout.hand_rest;
    let mut phase = Phase::Acquire;
    let mut frames = Vec::new();
    let max_ticks = (opts.max_seconds * cfg.tick_rate) as usize;

    for i in 0..max_ticks {
        if engine.task().complete {
            break;
        }
        let t = i as f64 * period;
        let Some(target) = engine.task().next_required() else {
            break;
        };
        let obj = engine.task().blocks[target].position;
        let goal = engine.task().next_slot().expect("slot for next block");
        let eye = blinks.openness(t, &mut rng);
        let batch = emg.batch(strain, cfg.emg_batch_len());
        let make = |hand: Vec3, openness: f64| {
            frame(t, hand, obj, layout.head, openness, eye, batch.clone())
        };

        if phase == Phase::Acquire && obj.distance(goal) <= FINISH_DISTANCE {
            phase = Phase::Release { ticks: 2 };
        }

        let chosen = match phase {
            Phase::Acquire => make(hand, HAND_OPEN),
            Phase::Release { ticks } => {
                let to_rest = layout.hand_rest - hand;
                if to_rest.norm() > 0.02 {
                    hand += to_rest * (0.02 / to_rest.norm());
                } else {
                    hand = layout.hand_rest;
                }
                phase = if ticks <= 1 && hand.distance(layout.hand_rest) < 0.03 {
                    Phase::Acquire
                } else {
                    Phase::Release {
                        ticks: ticks.saturating_sub(1),
                    }
                };
                make(hand, HAND_CLOSED)
            }
            Phase::Stroke { stroke, obj_dir, step } => {
                let delta = match stroke {
                    Stroke::Transverse { hand_dir } => hand_dir * step,
                    Stroke::Depth { sign } => {
                        let axis = (obj - hand).normalized().unwrap_or(obj_dir);
                        axis * (-sign * step)
                    }
                };
                let candidate = make(hand + delta, HAND_OPEN);
                let mut probe = engine.clone();
                let snap = probe.tick(&candidate)?;
                let moved = snap.objects[target].position;
                let before = (goal - obj).dot(obj_dir);
                let after = (goal - moved).dot(obj_dir);
                let along = (moved - obj).normalized().map_or(0.0, |d| d.dot(obj_dir));
                if snap.gate.active && after.abs() < before.abs() && along > 0.5 {
                    hand += delta;
                    candidate
                } else {
                    phase = Phase::Release { ticks: 2 };
                    make(hand, HAND_CLOSED)
                }
            }
        };

        let snap = engine.tick(&chosen)?;
        frames.push(chosen);

        if phase == Phase::Acquire && snap.gate.active && engine.selected() == Some(target) {
            let obj = engine.task().blocks[target].position;
            if obj.distance(goal) > FINISH_DISTANCE {
                phase = plan_stroke(obj, goal, hand, cfg);
            }
        }
    }
    Ok(frames)
}

/// Picks the dominant component of the remaining error and a stroke that
/// moves the object along it.
fn plan_stroke(obj: Vec3, goal: Vec3, hand: Vec3, cfg: &EngineConfig) -> Phase {
    let err = goal - obj;
    let axis = (obj - hand).normalized().expect("hand away from object");
    let along = err.dot(axis);
    let across = err - axis * along;
    let dist = obj.distance(hand);
    let (stroke, obj_dir, remaining) = if across.norm() >= along.abs() {
        let d = across.normalized().expect("nonzero transverse error");
        (Stroke::Transverse { hand_dir: d }, d, across.norm())
    } else {
        let sign = along.signum();
        (Stroke::Depth { sign }, axis * sign, along.abs())
    };
    let obj_step = (remaining / 8.0).clamp(0.002, 0.012);
    let step = (obj_step / (cfg.k * dist)).max(1.5 * cfg.m_th);
    Phase::Stroke {
        stroke,
        obj_dir,
        step,
    }
}
