//! Per-tick world orchestration: detectors, gating, target selection, the
//! manipulation law, thermal cueing and the stacking task.

mod gate;
mod report;
mod snapshot;
pub mod synth;
mod task;

pub use gate::{gazed_object, palm_facing, select_target, TelekinesisGate};
pub use report::{ActivationStats, QuestionnaireSchema, ReportBuilder, RunReport};
pub use snapshot::{
    write_snapshots, DetectorReadout, EngineSnapshot, ObjectReadout, TaskSummary, ThermalReadout,
};
pub use task::{snap_check, TaskLayout, TaskState};

use crate::biosignal::{
    concentration_state, gaze_on_target, strain_state, BlinkDetector, Calibration, EmgPipeline,
    EmgReading,
};
use crate::error::{Error, Result};
use crate::manipulation::{self, ManipulationParams, ManipulationState};
use crate::model::{EngineConfig, FactorCondition, SensorFrame, Site, Vec3};
use crate::thermal::ThermalChannel;

/// Relative slack when checking that a frame lands on the next tick.
const TICK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
struct Selection {
    index: usize,
    manip: ManipulationState,
    /// The gate has been active on this target since it was selected.
    held: bool,
    inactive_for: f64,
}

/// The simulation world. Feed it frames in tick order.
#[derive(Debug, Clone)]
pub struct Engine {
    cfg: EngineConfig,
    params: ManipulationParams,
    condition: FactorCondition,
    calibration: Option<Calibration>,
    blink: BlinkDetector,
    emg: EmgPipeline,
    task: TaskState,
    selection: Option<Selection>,
    last_hand: Option<Vec3>,
    thermal: Vec<ThermalChannel>,
    last_t: Option<f64>,
    t0: Option<f64>,
}

impl Engine {
    /// Fails when the condition relies on a detector that needs calibration
    /// and none is given.
    pub fn new(
        cfg: EngineConfig,
        condition: FactorCondition,
        calibration: Option<Calibration>,
    ) -> Result<Self> {
        Self::with_layout(cfg, condition, calibration, &TaskLayout::default())
    }

    pub fn with_layout(
        cfg: EngineConfig,
        condition: FactorCondition,
        calibration: Option<Calibration>,
        layout: &TaskLayout,
    ) -> Result<Self> {
        cfg.validate()?;
        if (condition.concentration || condition.strain) && calibration.is_none() {
            return Err(Error::Calibration(format!(
                "condition {condition} requires a calibration"
            )));
        }
        let mut emg = EmgPipeline::new(cfg.emg_rate.round() as usize);
        if let Some(c) = &calibration {
            c.validate()?;
            emg.seed_extrema(c.f_min, c.f_max);
        }
        Ok(Engine {
            params: ManipulationParams::from(&cfg),
            blink: BlinkDetector::from_config(&cfg),
            emg,
            task: TaskState::new(layout),
            selection: None,
            last_hand: None,
            thermal: Vec::new(),
            last_t: None,
            t0: None,
            cfg,
            condition,
            calibration,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn condition(&self) -> FactorCondition {
        self.condition
    }

    pub fn task(&self) -> &TaskState {
        &self.task
    }

    pub fn selected(&self) -> Option<usize> {
        self.selection.as_ref().map(|s| s.index)
    }

    pub fn manipulation_state(&self) -> Option<&ManipulationState> {
        self.selection.as_ref().map(|s| &s.manip)
    }

    fn check_frame(&self, frame: &SensorFrame) -> Result<()> {
        frame.check().map_err(Error::Validation)?;
        let expected_len = self.cfg.emg_batch_len();
        if frame.emg_batch.len() != expected_len {
            return Err(Error::validation(format!(
                "emg_batch has {} samples, expected {expected_len}",
                frame.emg_batch.len()
            )));
        }
        if let Some(last) = self.last_t {
            let expected = last + self.cfg.tick_period();
            if (frame.t - expected).abs() > TICK_TOLERANCE * expected.abs().max(1.0) {
                return Err(Error::OutOfOrder {
                    expected,
                    got: frame.t,
                });
            }
        }
        Ok(())
    }

    /// Advances the world by one frame.
    pub fn tick(&mut self, frame: &SensorFrame) -> Result<EngineSnapshot> {
        self.check_frame(frame)?;
        let dt = self.cfg.tick_period();
        let t0 = *self.t0.get_or_insert(frame.t);
        self.last_t = Some(frame.t);
        if self.thermal.is_empty() {
            self.thermal = Site::ALL
                .iter()
                .map(|&s| ThermalChannel::new(s, frame.skin_temp.get(s), &self.cfg))
                .collect();
        }

        let hand = frame.hand_pos;
        let target = self.resolve_target(frame);
        let focus = target.or_else(|| self.gazed_candidate(frame));
        let (gaze_ok, palm_ok) = focus.map_or((false, false), |i| {
            let obj = &self.task.blocks[i];
            (
                gaze_on_target(frame.gaze_origin, frame.gaze_dir, obj, self.cfg.gaze_half_angle),
                palm_facing(frame.palm_normal, hand, obj),
            )
        });

        self.blink.step(frame.eye_openness, frame.t, gaze_ok);
        let emg: EmgReading = self.emg.process(&frame.emg_batch);
        let conc_ok = self.calibration.as_ref().is_some_and(|c| {
            concentration_state(&self.blink, &c.concentration(), gaze_ok)
        });
        let strain_ok = strain_state(emg.normalized, self.cfg.f_th);
        let open_ok = frame.hand_openness > self.cfg.openness_th;
        let gate =
            TelekinesisGate::evaluate(self.condition, gaze_ok, palm_ok, open_ok, conc_ok, strain_ok);

        if let Some(sel) = self.selection.as_mut() {
            sel.manip = manipulation::step(&sel.manip, hand, gate.active, &self.params);
            self.task.blocks[sel.index].position = sel.manip.object_pos;
            if gate.active {
                sel.held = true;
                sel.inactive_for = 0.0;
            } else {
                sel.inactive_for += dt;
            }
        }
        self.last_hand = Some(hand);

        let stimulate = gate.active && self.condition.energy;
        for ch in &mut self.thermal {
            ch.step(stimulate, dt);
        }

        let held = self.selected().filter(|_| gate.active);
        if let Some(id) = snap_check(&mut self.task, held, self.cfg.snap_tolerance) {
            if self
                .selection
                .as_ref()
                .is_some_and(|s| self.task.blocks[s.index].id == id)
            {
                self.selection = None;
            }
        }
        if !self.task.complete {
            self.task.elapsed = frame.t - t0;
        }
        let selected = self.selected();
        for (i, b) in self.task.blocks.iter_mut().enumerate() {
            b.selected = Some(i) == selected;
        }

        Ok(self.snapshot(frame.t, gate, emg))
    }

    fn candidates(&self) -> Vec<usize> {
        (0..self.task.blocks.len())
            .filter(|&i| !self.task.is_snapped(i))
            .collect()
    }

    fn gazed_candidate(&self, frame: &SensorFrame) -> Option<usize> {
        let idx = self.candidates();
        let objs: Vec<_> = idx.iter().map(|&i| &self.task.blocks[i]).collect();
        gazed_object(frame.gaze_origin, frame.gaze_dir, &objs, self.cfg.gaze_half_angle)
            .map(|k| idx[k])
    }

    /// Keeps a held selection through short gate drops; otherwise selects
    /// afresh from gaze and palm.
    fn resolve_target(&mut self, frame: &SensorFrame) -> Option<usize> {
        if let Some(sel) = &self.selection {
            if sel.held
                && sel.inactive_for <= self.cfg.selection_hold
                && !self.task.is_snapped(sel.index)
            {
                return Some(sel.index);
            }
        }
        let idx = self.candidates();
        let objs: Vec<_> = idx.iter().map(|&i| &self.task.blocks[i]).collect();
        let picked = select_target(
            frame.gaze_origin,
            frame.gaze_dir,
            frame.palm_normal,
            frame.hand_pos,
            &objs,
            self.cfg.gaze_half_angle,
        )
        .map(|k| idx[k]);
        match picked {
            Some(i) if self.selection.as_ref().is_some_and(|s| s.index == i) => {}
            Some(i) => {
                let prev_hand = self.last_hand.unwrap_or(frame.hand_pos);
                self.selection = Some(Selection {
                    index: i,
                    manip: ManipulationState::new(prev_hand, self.task.blocks[i].position),
                    held: false,
                    inactive_for: 0.0,
                });
            }
            None => self.selection = None,
        }
        picked
    }

    fn snapshot(&self, t: f64, gate: TelekinesisGate, emg: EmgReading) -> EngineSnapshot {
        let selected = self.selected();
        EngineSnapshot {
            t,
            gate,
            selected: selected.map(|i| self.task.blocks[i].id.clone()),
            objects: self
                .task
                .blocks
                .iter()
                .enumerate()
                .map(|(i, b)| ObjectReadout {
                    id: b.id.clone(),
                    position: b.position,
                    selected: Some(i) == selected,
                    snapped: self.task.is_snapped(i),
                })
                .collect(),
            detectors: DetectorReadout {
                emg_strength: emg.strength,
                emg_normalized: emg.normalized,
                blink_ring_mean: self.blink.mean_interval(),
                blink_ring_len: self.blink.intervals().len(),
                concentration: gate.conc_ok,
                strain: gate.strain_ok,
            },
            thermal: self
                .thermal
                .iter()
                .map(|ch| ThermalReadout {
                    site: ch.controller.site,
                    temp: ch.plant.temp,
                    setpoint: ch.controller.setpoint,
                    heater_on: ch.controller.heater_on,
                })
                .collect(),
            task: TaskSummary {
                stacked: self.task.stacked.clone(),
                next: self
                    .task
                    .next_required()
                    .map(|i| self.task.blocks[i].id.clone()),
                complete: self.task.complete,
                elapsed: self.task.elapsed,
            },
        }
    }
}

/// Output of replaying a whole trace.
#[derive(Debug, Clone)]
pub struct Replay {
    pub snapshots: Vec<EngineSnapshot>,
    pub report: RunReport,
}

impl Replay {
    /// The snapshot stream as JSONL bytes.
    pub fn snapshot_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        write_snapshots(&mut buf, &self.snapshots).expect("in-memory write");
        buf
    }
}

/// Runs `frames` through a fresh engine.
pub fn replay(
    frames: &[SensorFrame],
    cfg: &EngineConfig,
    condition: FactorCondition,
    calibration: Option<Calibration>,
) -> Result<Replay> {
    let mut engine = Engine::new(cfg.clone(), condition, calibration)?;
    let mut builder = ReportBuilder::default();
    let mut snapshots = Vec::with_capacity(frames.len());
    for f in frames {
        let s = engine.tick(f)?;
        builder.observe(&s);
        snapshots.push(s);
    }
    Ok(Replay {
        report: builder.finish(condition, cfg.tick_period()),
        snapshots,
    })
}
