use serde::{Deserialize, Serialize};

use super::canonical::round9;
use super::Vec3;

/// Skin temperature sites carrying a heater and thermistor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Site {
    Forearm,
    Forehead,
    Palm,
}

impl Site {
    pub const ALL: [Site; 3] = [Site::Forearm, Site::Forehead, Site::Palm];

    pub fn name(self) -> &'static str {
        match self {
            Site::Forearm => "forearm",
            Site::Forehead => "forehead",
            Site::Palm => "palm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkinTemps {
    pub forearm: f64,
    pub forehead: f64,
    pub palm: f64,
}

impl SkinTemps {
    pub fn get(&self, site: Site) -> f64 {
        match site {
            Site::Forearm => self.forearm,
            Site::Forehead => self.forehead,
            Site::Palm => self.palm,
        }
    }
}

impl Default for SkinTemps {
    fn default() -> Self {
        SkinTemps {
            forearm: 33.0,
            forehead: 34.5,
            palm: 33.5,
        }
    }
}

/// One tick of sensor input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorFrame {
    pub t: f64,
    pub hand_pos: Vec3,
    pub palm_normal: Vec3,
    pub hand_openness: f64,
    pub gaze_origin: Vec3,
    pub gaze_dir: Vec3,
    pub eye_openness: f64,
    /// Raw EMG samples for this tick, millivolts.
    pub emg_batch: Vec<f64>,
    pub skin_temp: SkinTemps,
}

impl SensorFrame {
    /// Rounds every real to the canonical 9 significant digits.
    pub fn normalized(&self) -> SensorFrame {
        let r = |v: Vec3| v.map(round9);
        SensorFrame {
            t: round9(self.t),
            hand_pos: r(self.hand_pos),
            palm_normal: r(self.palm_normal),
            hand_openness: round9(self.hand_openness),
            gaze_origin: r(self.gaze_origin),
            gaze_dir: r(self.gaze_dir),
            eye_openness: round9(self.eye_openness),
            emg_batch: self.emg_batch.iter().copied().map(round9).collect(),
            skin_temp: SkinTemps {
                forearm: round9(self.skin_temp.forearm),
                forehead: round9(self.skin_temp.forehead),
                palm: round9(self.skin_temp.palm),
            },
        }
    }

    /// Per-frame invariants (the cross-frame ones live in the trace loader).
    pub fn check(&self) -> Result<(), String> {
        let vecs = [
            ("hand_pos", self.hand_pos),
            ("palm_normal", self.palm_normal),
            ("gaze_origin", self.gaze_origin),
            ("gaze_dir", self.gaze_dir),
        ];
        if !self.t.is_finite() {
            return Err("t must be finite".into());
        }
        for (name, v) in vecs {
            if !v.is_finite() {
                return Err(format!("{name} must be finite"));
            }
        }
        // Unit checks are loose enough to admit 9-digit rounding.
        for (name, v) in [("palm_normal", self.palm_normal), ("gaze_dir", self.gaze_dir)] {
            if !v.is_zero() && (v.norm() - 1.0).abs() > 1e-6 {
                return Err(format!("{name} must be a unit vector"));
            }
        }
        for (name, v) in [("hand_openness", self.hand_openness), ("eye_openness", self.eye_openness)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must lie in [0, 1]"));
            }
        }
        if self.emg_batch.iter().any(|s| !s.is_finite()) {
            return Err("emg_batch samples must be finite".into());
        }
        let st = self.skin_temp;
        if ![st.forearm, st.forehead, st.palm].iter().all(|v| v.is_finite()) {
            return Err("skin_temp must be finite".into());
        }
        Ok(())
    }
}
