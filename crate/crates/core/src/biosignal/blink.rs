use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EyePhase {
    Open,
    Closed,
}

/// A completed blink, reported when the eye reopens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlinkEvent {
    /// Wall-clock time at which the eye closed.
    pub t: f64,
    /// On-target gaze clock at closing.
    pub gaze_clock: f64,
    /// Interval pushed into the ring, if there was a previous blink.
    pub interval: Option<f64>,
}

/// Schmitt-trigger blink detector with a ring of recent blink intervals.
///
/// Intervals are measured on a clock that only runs while gaze is on the
/// target. If gaze stays off-target longer than `reset_after`, the ring and
/// the interval anchor are cleared.
#[derive(Debug, Clone, PartialEq)]
pub struct BlinkDetector {
    close_th: f64,
    open_th: f64,
    capacity: usize,
    reset_after: f64,
    phase: EyePhase,
    closed_at: Option<(f64, f64)>,
    last_blink_clock: Option<f64>,
    intervals: VecDeque<f64>,
    gaze_clock: f64,
    off_target_for: f64,
    last_t: Option<f64>,
}

impl BlinkDetector {
    pub fn new(close_th: f64, open_th: f64, capacity: usize, reset_after: f64) -> Self {
        assert!(close_th < open_th, "close threshold must be below open threshold");
        assert!(capacity > 0);
        BlinkDetector {
            close_th,
            open_th,
            capacity,
            reset_after,
            phase: EyePhase::Open,
            closed_at: None,
            last_blink_clock: None,
            intervals: VecDeque::with_capacity(capacity),
            gaze_clock: 0.0,
            off_target_for: 0.0,
            last_t: None,
        }
    }

    pub fn from_config(cfg: &crate::model::EngineConfig) -> Self {
        Self::new(
            cfg.blink_close_th,
            cfg.blink_open_th,
            cfg.window_blinks,
            cfg.gaze_reset_after,
        )
    }

    pub fn phase(&self) -> EyePhase {
        self.phase
    }

    pub fn intervals(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.intervals.iter().copied()
    }

    pub fn is_full(&self) -> bool {
        self.intervals.len() == self.capacity
    }

    pub fn mean_interval(&self) -> Option<f64> {
        if self.intervals.is_empty() {
            None
        } else {
            Some(self.intervals.iter().sum::<f64>() / self.intervals.len() as f64)
        }
    }

    /// Advances the detector by one sample.
    pub fn step(&mut self, eye_openness: f64, t: f64, gaze_on_target: bool) -> Option<BlinkEvent> {
        let dt = self.last_t.map_or(0.0, |last| (t - last).max(0.0));
        self.last_t = Some(t);
        if gaze_on_target {
            self.gaze_clock += dt;
            self.off_target_for = 0.0;
        } else {
            self.off_target_for += dt;
            if self.off_target_for > self.reset_after {
                self.intervals.clear();
                self.last_blink_clock = None;
            }
        }

        match self.phase {
            EyePhase::Open if eye_openness < self.close_th => {
                self.phase = EyePhase::Closed;
                self.closed_at = Some((t, self.gaze_clock));
                None
            }
            EyePhase::Closed if eye_openness > self.open_th => {
                self.phase = EyePhase::Open;
                let (t_close, clock) = self.closed_at.take().expect("closed phase has a timestamp");
                let interval = self
                    .last_blink_clock
                    .map(|prev| clock - prev)
                    .filter(|iv| *iv > 0.0);
                if let Some(iv) = interval {
                    if self.intervals.len() == self.capacity {
                        self.intervals.pop_front();
                    }
                    self.intervals.push_back(iv);
                }
                self.last_blink_clock = Some(clock);
                Some(BlinkEvent {
                    t: t_close,
                    gaze_clock: clock,
                    interval,
                })
            }
            _ => None,
        }
    }
}

/// Baseline blink statistics and the derived concentration threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationCalibration {
    pub mean_interval: f64,
    pub c_th: f64,
}

/// Mean of consecutive intervals between `blink_times`, scaled by `multiplier`.
pub fn calibrate(blink_times: &[f64], multiplier: f64) -> Result<ConcentrationCalibration> {
    if blink_times.len() < 2 {
        return Err(Error::Calibration(format!(
            "need at least 2 blinks in the baseline window, found {}",
            blink_times.len()
        )));
    }
    let intervals: Vec<f64> = blink_times.windows(2).map(|w| w[1] - w[0]).collect();
    if intervals.iter().any(|iv| *iv <= 0.0) {
        return Err(Error::Calibration("blink times must be strictly increasing".into()));
    }
    let mean_interval = intervals.iter().sum::<f64>() / intervals.len() as f64;
    Ok(ConcentrationCalibration {
        mean_interval,
        c_th: multiplier * mean_interval,
    })
}

/// Concentrating: a full ring whose mean interval exceeds the threshold,
/// with gaze on the target.
pub fn concentration_state(
    detector: &BlinkDetector,
    calib: &ConcentrationCalibration,
    gaze_on_target: bool,
) -> bool {
    gaze_on_target
        && detector.is_full()
        && detector.mean_interval().is_some_and(|m| m > calib.c_th)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn detector() -> BlinkDetector {
        BlinkDetector::new(0.3, 0.6, 5, 1.0)
    }

    fn run(d: &mut BlinkDetector, openness: &[f64]) -> Vec<BlinkEvent> {
        openness
            .iter()
            .enumerate()
            .filter_map(|(i, o)| d.step(*o, i as f64 * 0.01, true))
            .collect()
    }

    #[test]
    fn single_dip_is_one_blink() {
        let mut d = detector();
        let ev = run(&mut d, &[1.0, 0.1, 1.0]);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].t, 0.01);
        assert_eq!(ev[0].interval, None);
    }

    #[test]
    fn open_eye_never_blinks() {
        let mut d = detector();
        assert!(run(&mut d, &[1.0; 500]).is_empty());
    }

    #[test]
    fn partial_closure_rejected() {
        let mut d = detector();
        assert!(run(&mut d, &[1.0, 0.7, 0.5, 0.4, 0.5, 1.0]).is_empty());
        // Closing then hovering inside the band does not emit until reopened.
        let mut d = detector();
        assert!(run(&mut d, &[1.0, 0.2, 0.5, 0.55, 0.4]).is_empty());
        assert_eq!(d.phase(), EyePhase::Closed);
    }

    #[test]
    fn intervals_fill_ring() {
        let mut d = detector();
        let mut t = 0.0;
        for _ in 0..8 {
            for o in [1.0, 0.1, 1.0] {
                d.step(o, t, true);
                t += 0.01;
            }
            t += 2.97;
        }
        assert!(d.is_full());
        for iv in d.intervals() {
            assert!((iv - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn off_target_pauses_then_resets() {
        let mut d = detector();
        d.step(1.0, 0.0, true);
        d.step(0.1, 0.01, true);
        d.step(1.0, 0.02, true);
        // 0.5 s off target: clock pauses, anchor survives.
        let mut t = 0.02;
        for _ in 0..50 {
            t += 0.01;
            d.step(1.0, t, false);
        }
        for _ in 0..100 {
            t += 0.01;
            d.step(1.0, t, true);
        }
        d.step(0.1, t + 0.01, true);
        let ev = d.step(1.0, t + 0.02, true).unwrap();
        // On-target time only: 0.01 + 1.00 + 0.01 (the 0.5 s gap is excluded).
        assert!((ev.interval.unwrap() - 1.02).abs() < 1e-9, "{ev:?}");

        // More than 1 s off target clears the ring.
        for _ in 0..150 {
            t += 0.01;
            d.step(1.0, t + 0.02, false);
        }
        assert_eq!(d.intervals().len(), 0);
        d.step(0.1, t + 0.03, true);
        assert_eq!(d.step(1.0, t + 0.04, true).unwrap().interval, None);
    }

    #[test]
    fn calibration_examples() {
        let c = calibrate(&[0.0, 3.0, 6.0, 9.0], 1.67).unwrap();
        assert!((c.mean_interval - 3.0).abs() < 1e-12);
        assert!((c.c_th - 5.01).abs() < 1e-12);
        let c = calibrate(&[1.0, 3.0, 7.0], 1.67).unwrap();
        assert!((c.mean_interval - 3.0).abs() < 1e-12);
        assert!((c.c_th - 5.01).abs() < 1e-12);
        assert!(matches!(calibrate(&[4.0], 1.67), Err(Error::Calibration(_))));
    }

    fn detector_with_ring(intervals: &[f64]) -> BlinkDetector {
        let mut d = detector();
        let mut t = 0.0;
        let blink = |d: &mut BlinkDetector, t: f64| {
            d.step(1.0, t, true);
            d.step(0.1, t + 0.01, true);
            d.step(1.0, t + 0.02, true);
        };
        blink(&mut d, t);
        for iv in intervals {
            t += iv;
            blink(&mut d, t);
        }
        d
    }

    #[test]
    fn concentration_examples() {
        let calib = ConcentrationCalibration {
            mean_interval: 3.0,
            c_th: 5.01,
        };
        let d = detector_with_ring(&[6.0; 5]);
        assert!(concentration_state(&d, &calib, true));
        assert!(!concentration_state(&d, &calib, false));
        let d = detector_with_ring(&[4.0; 5]);
        assert!(!concentration_state(&d, &calib, true));
        let d = detector_with_ring(&[9.0; 4]);
        assert!(!concentration_state(&d, &calib, true));
    }
}
