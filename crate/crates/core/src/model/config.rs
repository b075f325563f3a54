use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every tunable of the engine. Loaded from JSON; missing fields take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub version: u32,
    /// Sensitivity factor applied to every displacement.
    pub k: f64,
    /// Direction-similarity threshold on the dot product of consecutive directions.
    pub sim_th: f64,
    /// Hand movement threshold, meters per tick.
    #[serde(rename = "m_th")]
    pub m_th: f64,
    /// Strain threshold on the normalized EMG strength.
    #[serde(rename = "F_th")]
    pub f_th: f64,
    pub openness_th: f64,
    /// Gaze cone half-angle, degrees.
    pub gaze_half_angle: f64,
    pub tick_rate: f64,
    pub emg_rate: f64,
    pub blink_close_th: f64,
    pub blink_open_th: f64,
    pub c_multiplier: f64,
    pub window_blinks: usize,
    pub temp_offset: f64,
    pub temp_cap: f64,
    pub temp_hysteresis: f64,
    pub snap_tolerance: f64,
    /// Gaze may leave the target this long (s) before the blink ring is cleared.
    pub gaze_reset_after: f64,
    /// Selection survives a gate drop of at most this long (s).
    pub selection_hold: f64,
    pub plant_gain: f64,
    pub plant_tau_heat: f64,
    pub plant_tau_cool: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            version: 1,
            k: 1.0,
            sim_th: 0.7,
            m_th: 0.002,
            f_th: 0.5,
            openness_th: 0.7,
            gaze_half_angle: 5.0,
            tick_rate: 100.0,
            emg_rate: 2000.0,
            blink_close_th: 0.3,
            blink_open_th: 0.6,
            c_multiplier: 1.67,
            window_blinks: 5,
            temp_offset: 2.0,
            temp_cap: 40.0,
            temp_hysteresis: 0.2,
            snap_tolerance: 0.05,
            gaze_reset_after: 1.0,
            selection_hold: 0.25,
            plant_gain: 12.0,
            plant_tau_heat: 8.0,
            plant_tau_cool: 20.0,
        }
    }
}

impl EngineConfig {
    pub fn tick_period(&self) -> f64 {
        1.0 / self.tick_rate
    }

    /// EMG samples carried by each frame.
    pub fn emg_batch_len(&self) -> usize {
        (self.emg_rate / self.tick_rate).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::validation(format!("config: {m}")));
        let all_finite = [
            self.k,
            self.sim_th,
            self.m_th,
            self.f_th,
            self.openness_th,
            self.gaze_half_angle,
            self.tick_rate,
            self.emg_rate,
            self.blink_close_th,
            self.blink_open_th,
            self.c_multiplier,
            self.temp_offset,
            self.temp_cap,
            self.temp_hysteresis,
            self.snap_tolerance,
            self.gaze_reset_after,
            self.selection_hold,
            self.plant_gain,
            self.plant_tau_heat,
            self.plant_tau_cool,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return fail("all numeric fields must be finite");
        }
        if self.version != 1 {
            return fail("unsupported version (expected 1)");
        }
        if self.k <= 0.0 {
            return fail("k must be > 0");
        }
        if self.tick_rate <= 0.0 {
            return fail("tick_rate must be > 0");
        }
        if self.emg_rate <= 0.0 {
            return fail("emg_rate must be > 0");
        }
        let ratio = self.emg_rate / self.tick_rate;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return fail("emg_rate must be an integer multiple of tick_rate");
        }
        if !(self.f_th > 0.0 && self.f_th < 1.0) {
            return fail("F_th must lie in (0, 1)");
        }
        if !(-1.0..=1.0).contains(&self.sim_th) {
            return fail("sim_th must lie in [-1, 1]");
        }
        if !(0.0..=1.0).contains(&self.openness_th) {
            return fail("openness_th must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.blink_close_th) || !(0.0..=1.0).contains(&self.blink_open_th)
        {
            return fail("blink thresholds must lie in [0, 1]");
        }
        if self.blink_close_th >= self.blink_open_th {
            return fail("blink_close_th must be < blink_open_th");
        }
        if self.m_th < 0.0 {
            return fail("m_th must be >= 0");
        }
        if !(self.gaze_half_angle > 0.0 && self.gaze_half_angle < 180.0) {
            return fail("gaze_half_angle must lie in (0, 180)");
        }
        if self.c_multiplier <= 0.0 {
            return fail("c_multiplier must be > 0");
        }
        if self.window_blinks == 0 {
            return fail("window_blinks must be >= 1");
        }
        if self.temp_hysteresis < 0.0 || self.snap_tolerance <= 0.0 {
            return fail("temp_hysteresis must be >= 0 and snap_tolerance > 0");
        }
        if self.gaze_reset_after < 0.0 || self.selection_hold < 0.0 {
            return fail("timing windows must be >= 0");
        }
        if self.plant_tau_heat <= 0.0 || self.plant_tau_cool <= 0.0 {
            return fail("plant time constants must be > 0");
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: EngineConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Applies a partial JSON object of field overrides.
    pub fn with_overrides(&self, overrides: &serde_json::Value) -> Result<Self> {
        let mut base = serde_json::to_value(self)?;
        if let (Some(dst), Some(src)) = (base.as_object_mut(), overrides.as_object()) {
            for (k, v) in src {
                dst.insert(k.clone(), v.clone());
            }
        } else if !overrides.is_null() {
            return Err(Error::validation("config overrides must be a JSON object"));
        }
        let cfg: EngineConfig = serde_json::from_value(base)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = EngineConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.emg_batch_len(), 20);
    }

    #[test]
    fn json_round_trip_uses_field_names() {
        let cfg = EngineConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"F_th\":0.5"));
        assert!(text.contains("\"m_th\":0.002"));
        assert_eq!(EngineConfig::from_json(&text).unwrap(), cfg);
        let partial = EngineConfig::from_json(r#"{"k": 2.5}"#).unwrap();
        assert_eq!(partial.k, 2.5);
        assert_eq!(partial.sim_th, 0.7);
    }

    #[test]
    fn rejects_unknown_field() {
        assert!(EngineConfig::from_json(r#"{"kk": 1}"#).is_err());
    }

    #[test]
    fn rejects_non_multiple_emg_rate() {
        let cfg = EngineConfig {
            tick_rate: 90.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[derive(Debug, Clone)]
    enum Mutation {
        K(f64),
        TickRate(f64),
        FTh(f64),
        SimTh(f64),
        BlinkSwap,
        EmgRateOffset(f64),
    }

    fn mutation() -> impl Strategy<Value = Mutation> {
        prop_oneof![
            (-10.0f64..=0.0).prop_map(Mutation::K),
            (-100.0f64..=0.0).prop_map(Mutation::TickRate),
            prop_oneof![-5.0f64..=0.0, 1.0f64..5.0].prop_map(Mutation::FTh),
            prop_oneof![-5.0f64..-1.0001, 1.0001f64..5.0].prop_map(Mutation::SimTh),
            Just(Mutation::BlinkSwap),
            (0.1f64..0.9).prop_map(Mutation::EmgRateOffset),
        ]
    }

    proptest! {
        #[test]
        fn every_invariant_violation_rejected(m in mutation()) {
            let mut cfg = EngineConfig::default();
            match m {
                Mutation::K(v) => cfg.k = v,
                Mutation::TickRate(v) => cfg.tick_rate = v,
                Mutation::FTh(v) => cfg.f_th = v,
                Mutation::SimTh(v) => cfg.sim_th = v,
                Mutation::BlinkSwap => std::mem::swap(&mut cfg.blink_close_th, &mut cfg.blink_open_th),
                Mutation::EmgRateOffset(v) => cfg.emg_rate = cfg.tick_rate * 20.0 + v,
            }
            prop_assert!(cfg.validate().is_err());
        }

        #[test]
        fn config_round_trip(k in 0.01f64..10.0, sim in -1.0f64..1.0, fth in 0.01f64..0.99) {
            let cfg = EngineConfig { k, sim_th: sim, f_th: fth, ..Default::default() };
            let back = EngineConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
