//! Concentration (blink intervals) and strain (EMG) detectors.

mod blink;
mod emg;
mod gaze;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use blink::{
    calibrate, concentration_state, BlinkDetector, BlinkEvent, ConcentrationCalibration, EyePhase,
};
pub use emg::{strain_state, EmgPipeline, EmgReading};
pub use gaze::{angular_offset, gaze_on_target};

use crate::error::{Error, Result};
use crate::model::canonical::round9;
use crate::model::{EngineConfig, SensorFrame};

/// Length of the resting baseline used for the blink threshold, seconds.
pub const BASELINE_SECONDS: f64 = 60.0;

/// Persisted per-user calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub mean_interval: f64,
    pub c_th: f64,
    pub f_min: f64,
    pub f_max: f64,
}

impl Calibration {
    pub fn concentration(&self) -> ConcentrationCalibration {
        ConcentrationCalibration {
            mean_interval: self.mean_interval,
            c_th: self.c_th,
        }
    }

    /// Rounds to the canonical 9 significant digits, so a calibration saved
    /// to JSON and loaded back is bit-identical to the one in memory.
    pub fn normalized(&self) -> Calibration {
        Calibration {
            mean_interval: round9(self.mean_interval),
            c_th: round9(self.c_th),
            f_min: round9(self.f_min),
            f_max: round9(self.f_max),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.mean_interval > 0.0
            && self.c_th > 0.0
            && self.f_min.is_finite()
            && self.f_max.is_finite()
            && self.f_min <= self.f_max;
        if ok {
            Ok(())
        } else {
            Err(Error::Calibration(
                "requires mean_interval > 0, c_th > 0 and f_min <= f_max".into(),
            ))
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Calibration = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        crate::model::canonical::to_canonical_json_pretty(self).expect("calibration serializes")
    }
}

/// Calibrates from a resting trace: blink threshold from the first 60 s,
/// EMG extrema from the whole trace.
pub fn calibrate_from_trace(frames: &[SensorFrame], cfg: &EngineConfig) -> Result<Calibration> {
    let duration = frames.len() as f64 * cfg.tick_period();
    if duration + 0.5 * cfg.tick_period() < BASELINE_SECONDS {
        return Err(Error::Calibration(format!(
            "baseline trace spans {duration:.2} s, need at least {BASELINE_SECONDS} s"
        )));
    }
    let t0 = frames[0].t;
    let mut blinks = BlinkDetector::from_config(cfg);
    let mut emg = EmgPipeline::new(cfg.emg_rate.round() as usize);
    let mut times = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for f in frames {
        if f.t - t0 < BASELINE_SECONDS {
            if let Some(ev) = blinks.step(f.eye_openness, f.t, true) {
                times.push(ev.t);
            }
        }
        if !f.emg_batch.is_empty() {
            let s = emg.strength(&f.emg_batch);
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    let conc = calibrate(&times, cfg.c_multiplier)?;
    if !lo.is_finite() {
        return Err(Error::Calibration("baseline trace carries no EMG samples".into()));
    }
    Ok(Calibration {
        mean_interval: conc.mean_interval,
        c_th: conc.c_th,
        f_min: lo,
        f_max: hi,
    }
    .normalized())
}
