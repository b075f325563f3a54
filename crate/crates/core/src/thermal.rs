//! Heater control for the warmth cue, plus a first-order skin/heater plant
//! standing in for the film heater and thermistor.

use serde::{Deserialize, Serialize};

use crate::model::{EngineConfig, Site};

/// Bang-bang controller holding one site at `baseline + offset`, capped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalController {
    pub site: Site,
    pub baseline: f64,
    pub setpoint: f64,
    pub heater_on: bool,
    hysteresis: f64,
    cap: f64,
}

impl ThermalController {
    pub fn new(site: Site, baseline: f64, offset: f64, cap: f64, hysteresis: f64) -> Self {
        ThermalController {
            site,
            baseline,
            setpoint: (baseline + offset).min(cap),
            heater_on: false,
            hysteresis,
            cap,
        }
    }

    pub fn from_config(site: Site, baseline: f64, cfg: &EngineConfig) -> Self {
        Self::new(site, baseline, cfg.temp_offset, cfg.temp_cap, cfg.temp_hysteresis)
    }

    /// Returns the heater command for this tick.
    pub fn step(&mut self, measured: f64, stimulate: bool) -> bool {
        self.heater_on = if !stimulate || measured >= self.cap {
            false
        } else if measured < self.setpoint - self.hysteresis {
            true
        } else if measured > self.setpoint + self.hysteresis {
            false
        } else {
            self.heater_on
        };
        self.heater_on
    }
}

/// First-order thermal response toward `ambient` (+ `gain` when heating).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalPlant {
    pub temp: f64,
    pub ambient: f64,
    pub tau_heat: f64,
    pub tau_cool: f64,
    pub gain: f64,
}

impl ThermalPlant {
    pub fn new(temp: f64, ambient: f64, tau_heat: f64, tau_cool: f64, gain: f64) -> Self {
        assert!(tau_heat > 0.0 && tau_cool > 0.0, "time constants must be positive");
        ThermalPlant {
            temp,
            ambient,
            tau_heat,
            tau_cool,
            gain,
        }
    }

    /// Plant resting at `ambient`, parameters from config.
    pub fn at_rest(ambient: f64, cfg: &EngineConfig) -> Self {
        Self::new(ambient, ambient, cfg.plant_tau_heat, cfg.plant_tau_cool, cfg.plant_gain)
    }

    pub fn step(&mut self, heater_on: bool, dt: f64) {
        assert!(dt > 0.0, "dt must be positive");
        let (target, tau) = if heater_on {
            (self.ambient + self.gain, self.tau_heat)
        } else {
            (self.ambient, self.tau_cool)
        };
        self.temp = target + (self.temp - target) * (-dt / tau).exp();
    }
}

/// Controller and plant for one site, stepped together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalChannel {
    pub controller: ThermalController,
    pub plant: ThermalPlant,
}

impl ThermalChannel {
    pub fn new(site: Site, baseline: f64, cfg: &EngineConfig) -> Self {
        ThermalChannel {
            controller: ThermalController::from_config(site, baseline, cfg),
            plant: ThermalPlant::at_rest(baseline, cfg),
        }
    }

    /// Controls on the current reading, then advances the plant. Returns the
    /// command issued.
    pub fn step(&mut self, stimulate: bool, dt: f64) -> bool {
        let on = self.controller.step(self.plant.temp, stimulate);
        self.plant.step(on, dt);
        on
    }
}
