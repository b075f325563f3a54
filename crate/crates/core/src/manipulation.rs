//! The object-follow control law.
//!
//! Each tick the hand displacement is split into a depth part (along the
//! hand-to-object line) and a transverse part. The dominant part picks the
//! object's direction, the movement amount is latched while the direction
//! stays similar, and the object moves by `k * m * dist(hand, object)` along
//! that direction.

use serde::{Deserialize, Serialize};

use crate::model::{EngineConfig, Vec3};

/// Recurrence state carried between ticks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManipulationState {
    /// Hand position on the previous tick.
    pub prev_hand: Vec3,
    /// Effective movement amount on the previous tick, meters/tick.
    pub prev_m: f64,
    /// Previous movement direction: unit, or [`Vec3::ZERO`] before any motion.
    pub prev_dir: Vec3,
    pub object_pos: Vec3,
}

impl ManipulationState {
    pub fn new(hand: Vec3, object_pos: Vec3) -> Self {
        ManipulationState {
            prev_hand: hand,
            prev_m: 0.0,
            prev_dir: Vec3::ZERO,
            object_pos,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.prev_m >= 0.0
            && self.prev_m.is_finite()
            && self.prev_dir.is_direction()
            && self.prev_hand.is_finite()
            && self.object_pos.is_finite()
    }
}

/// Hand displacement split relative to the hand-to-object axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionDecomposition {
    /// Movement along the depth axis (forward/backward), >= 0.
    pub depth: f64,
    /// Movement across the depth axis (up/down/left/right), >= 0.
    pub transverse: f64,
    /// +1 when the hand moves away from the object (push), -1 when it moves
    /// toward it (pull).
    pub push_sign: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManipulationParams {
    pub k: f64,
    pub sim_th: f64,
    pub m_th: f64,
}

impl From<&EngineConfig> for ManipulationParams {
    fn from(cfg: &EngineConfig) -> Self {
        ManipulationParams {
            k: cfg.k,
            sim_th: cfg.sim_th,
            m_th: cfg.m_th,
        }
    }
}

/// Intermediate quantities of one tick, exposed for diagnostics and tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDetail {
    pub raw_magnitude: f64,
    pub effective_magnitude: f64,
    pub similar: bool,
    pub direction: Vec3,
    pub speed: f64,
    pub displacement: Vec3,
}

pub fn decompose_motion(hand: Vec3, state: &ManipulationState) -> MotionDecomposition {
    let delta = hand - state.prev_hand;
    let Some(axis) = (state.object_pos - hand).normalized() else {
        return MotionDecomposition {
            depth: 0.0,
            transverse: delta.norm(),
            push_sign: 1.0,
        };
    };
    let along = delta.dot(axis);
    MotionDecomposition {
        depth: along.abs(),
        transverse: (delta - axis * along).norm(),
        push_sign: if along > 0.0 { -1.0 } else { 1.0 },
    }
}

/// Whether two consecutive directions agree. The zero sentinel never does.
pub fn similarity(dir: Vec3, prev_dir: Vec3, sim_th: f64) -> bool {
    if dir.is_zero() || prev_dir.is_zero() {
        return false;
    }
    dir.dot(prev_dir) > sim_th
}

/// Keeps the previous movement amount when it was larger and the direction
/// has not changed.
pub fn effective_magnitude(raw: f64, state: &ManipulationState, similar: bool) -> f64 {
    if state.prev_m > raw && similar {
        state.prev_m
    } else {
        raw
    }
}

pub fn select_direction(
    hand: Vec3,
    state: &ManipulationState,
    dec: &MotionDecomposition,
    m_th: f64,
) -> Vec3 {
    if dec.depth > dec.transverse && dec.depth > m_th {
        if let Some(axis) = (state.object_pos - hand).normalized() {
            return axis * dec.push_sign;
        }
    } else if dec.transverse > dec.depth && dec.transverse > m_th {
        if let Some(d) = (hand - state.prev_hand).normalized() {
            return d;
        }
    }
    state.prev_dir
}

/// Object speed: movement amount scaled by the hand-object distance.
pub fn speed(m_eff: f64, hand: Vec3, object_pos: Vec3) -> f64 {
    m_eff * object_pos.distance(hand)
}

pub fn displacement(k: f64, s: f64, dir: Vec3) -> Vec3 {
    dir * (k * s)
}

pub fn step(
    state: &ManipulationState,
    hand: Vec3,
    active: bool,
    params: &ManipulationParams,
) -> ManipulationState {
    step_detailed(state, hand, active, params).0
}

pub fn step_detailed(
    state: &ManipulationState,
    hand: Vec3,
    active: bool,
    params: &ManipulationParams,
) -> (ManipulationState, StepDetail) {
    if !active {
        let next = ManipulationState {
            prev_hand: hand,
            prev_m: 0.0,
            prev_dir: Vec3::ZERO,
            object_pos: state.object_pos,
        };
        let detail = StepDetail {
            raw_magnitude: (hand - state.prev_hand).norm(),
            effective_magnitude: 0.0,
            similar: false,
            direction: Vec3::ZERO,
            speed: 0.0,
            displacement: Vec3::ZERO,
        };
        return (next, detail);
    }

    let dec = decompose_motion(hand, state);
    let direction = select_direction(hand, state, &dec, params.m_th);
    let similar = similarity(direction, state.prev_dir, params.sim_th);
    let raw = (hand - state.prev_hand).norm();
    let m_eff = effective_magnitude(raw, state, similar);
    let s = speed(m_eff, hand, state.object_pos);
    let dx = displacement(params.k, s, direction);
    let next = ManipulationState {
        prev_hand: hand,
        prev_m: m_eff,
        prev_dir: direction,
        object_pos: state.object_pos + dx,
    };
    let detail = StepDetail {
        raw_magnitude: raw,
        effective_magnitude: m_eff,
        similar,
        direction,
        speed: s,
        displacement: dx,
    };
    (next, detail)
}
