use serde::{Deserialize, Serialize};

use super::gate::TelekinesisGate;
use crate::model::canonical::to_canonical_json;
use crate::model::{Site, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectReadout {
    pub id: String,
    pub position: Vec3,
    pub selected: bool,
    pub snapped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorReadout {
    pub emg_strength: f64,
    pub emg_normalized: f64,
    pub blink_ring_mean: Option<f64>,
    pub blink_ring_len: usize,
    pub concentration: bool,
    pub strain: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalReadout {
    pub site: Site,
    pub temp: f64,
    pub setpoint: f64,
    pub heater_on: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub stacked: Vec<String>,
    pub next: Option<String>,
    pub complete: bool,
    pub elapsed: f64,
}

/// World state after one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineSnapshot {
    pub t: f64,
    pub gate: TelekinesisGate,
    pub selected: Option<String>,
    pub objects: Vec<ObjectReadout>,
    pub detectors: DetectorReadout,
    pub thermal: Vec<ThermalReadout>,
    pub task: TaskSummary,
}

impl EngineSnapshot {
    /// Canonical single-line JSON.
    pub fn to_json_line(&self) -> String {
        to_canonical_json(self).expect("snapshot serializes")
    }

    pub fn object(&self, id: &str) -> Option<&ObjectReadout> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn heater_on_any(&self) -> bool {
        self.thermal.iter().any(|t| t.heater_on)
    }
}

/// Writes snapshots as JSONL.
pub fn write_snapshots<W: std::io::Write>(
    mut w: W,
    snapshots: &[EngineSnapshot],
) -> std::io::Result<()> {
    for s in snapshots {
        w.write_all(s.to_json_line().as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}
