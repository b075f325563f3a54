use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// DC removal, rectification and running min-max normalization of EMG.
#[derive(Debug, Clone, PartialEq)]
pub struct EmgPipeline {
    /// Trailing samples, stored as offsets from `anchor`.
    dc_window: VecDeque<f64>,
    dc_capacity: usize,
    /// First sample ever seen. Offsets from it are exact zeros for a flat
    /// signal, so a constant input gives a strength of exactly 0.
    anchor: Option<f64>,
    offset_sum: f64,
    /// Pushes since `offset_sum` was last recomputed from scratch.
    since_refresh: usize,
    f_min: Option<f64>,
    f_max: Option<f64>,
    last_fprime: f64,
}

/// Strength and normalized strength for one batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmgReading {
    pub strength: f64,
    pub normalized: f64,
}

impl EmgPipeline {
    /// `dc_window_len` is the trailing sample count used for the DC estimate.
    pub fn new(dc_window_len: usize) -> Self {
        assert!(dc_window_len > 0);
        EmgPipeline {
            dc_window: VecDeque::with_capacity(dc_window_len),
            dc_capacity: dc_window_len,
            anchor: None,
            offset_sum: 0.0,
            since_refresh: 0,
            f_min: None,
            f_max: None,
            last_fprime: 0.0,
        }
    }

    /// Starts the running extrema from calibrated values.
    pub fn seed_extrema(&mut self, f_min: f64, f_max: f64) {
        assert!(f_min <= f_max, "f_min must not exceed f_max");
        self.f_min = Some(f_min);
        self.f_max = Some(f_max);
    }

    pub fn extrema(&self) -> Option<(f64, f64)> {
        self.f_min.zip(self.f_max)
    }

    pub fn last_normalized(&self) -> f64 {
        self.last_fprime
    }

    /// Mean absolute deviation of the batch from the trailing DC estimate.
    /// The batch itself joins the trailing window before the estimate is taken.
    pub fn strength(&mut self, batch: &[f64]) -> f64 {
        assert!(!batch.is_empty(), "EMG batch must be nonempty");
        let anchor = *self.anchor.get_or_insert(batch[0]);
        for &s in batch {
            if self.dc_window.len() == self.dc_capacity {
                let old = self.dc_window.pop_front().expect("window is full");
                self.offset_sum -= old;
            }
            let off = s - anchor;
            self.dc_window.push_back(off);
            self.offset_sum += off;
            self.since_refresh += 1;
        }
        // The running sum drifts by rounding; resumming once per window
        // length keeps it bounded.
        if self.since_refresh >= self.dc_capacity {
            self.offset_sum = self.dc_window.iter().sum();
            self.since_refresh = 0;
        }
        let dc = anchor + self.offset_sum / self.dc_window.len() as f64;
        batch.iter().map(|s| (s - dc).abs()).sum::<f64>() / batch.len() as f64
    }

    /// Folds `strength` into the extrema, then min-max normalizes it.
    /// A degenerate range (max == min) normalizes to 0.
    pub fn normalize(&mut self, strength: f64) -> f64 {
        let lo = self.f_min.map_or(strength, |m| m.min(strength));
        let hi = self.f_max.map_or(strength, |m| m.max(strength));
        self.f_min = Some(lo);
        self.f_max = Some(hi);
        let range = hi - lo;
        let fprime = if range > 0.0 {
            ((strength - lo) / range).clamp(0.0, 1.0)
        } else {
            0.0
        };
        self.last_fprime = fprime;
        fprime
    }

    pub fn process(&mut self, batch: &[f64]) -> EmgReading {
        let strength = self.strength(batch);
        EmgReading {
            strength,
            normalized: self.normalize(strength),
        }
    }
}

/// Strain: normalized strength strictly above the threshold.
pub fn strain_state(normalized: f64, f_th: f64) -> bool {
    normalized > f_th
}
